use std::collections::HashMap;

use super::ProjectedPoint;

/// Single-linkage clusters at a fixed distance cutoff.
///
/// Cluster ids are `0..k` ordered by each cluster's smallest member keyword;
/// members are sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub clusters: Vec<(usize, Vec<String>)>,
    pub threshold: f64,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// keyword → cluster id.
    pub fn lookup(&self) -> HashMap<&str, usize> {
        self.clusters
            .iter()
            .flat_map(|(id, members)| members.iter().map(move |m| (m.as_str(), *id)))
            .collect()
    }
}

fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

/// Symmetric matrix of Euclidean distances between 2-D points.
pub fn pairwise_distances(points: &[ProjectedPoint]) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = distance(points[i].xy, points[j].xy);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Connected components of the graph linking points within `threshold`.
pub fn cluster_points(points: &[ProjectedPoint], threshold: f64) -> ClusterAssignment {
    assert!(threshold > 0.0, "cluster threshold must be positive");
    let n = points.len();
    let mut component = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut stack = Vec::new();
    for seed in 0..n {
        if component[seed] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = Vec::new();
        component[seed] = id;
        stack.push(seed);
        while let Some(i) = stack.pop() {
            members.push(i);
            for j in 0..n {
                if component[j] == usize::MAX && distance(points[i].xy, points[j].xy) <= threshold {
                    component[j] = id;
                    stack.push(j);
                }
            }
        }
        groups.push(members);
    }

    let mut clusters: Vec<Vec<String>> = groups
        .into_iter()
        .map(|g| {
            let mut names: Vec<String> = g.into_iter().map(|i| points[i].keyword.clone()).collect();
            names.sort();
            names
        })
        .collect();
    clusters.sort_by(|a, b| a[0].cmp(&b[0]));
    ClusterAssignment {
        clusters: clusters.into_iter().enumerate().collect(),
        threshold,
    }
}
