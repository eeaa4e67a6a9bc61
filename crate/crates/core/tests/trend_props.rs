use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trendlens_core::corpus::{Corpus, PatentDocument};
use trendlens_core::keywords::{ExtractionResult, ExtractionStatus, KeywordScore};
use trendlens_core::trend::{
    aggregate_keywords, cluster_points, fit_pca, pairwise_distances, project, select_top_percent, top_percent_size,
    KeywordFrequencyTable, ProjectedPoint,
};

/// Box–Muller normal; enough for an isotropy check.
fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn points(coords: &[(f64, f64)]) -> Vec<ProjectedPoint> {
    coords
        .iter()
        .enumerate()
        .map(|(i, &xy)| ProjectedPoint {
            keyword: format!("k{i:03}"),
            full_vector: Vec::new(),
            xy,
        })
        .collect()
}

fn components(coords: &[(f64, f64)], t: f64) -> BTreeSet<BTreeSet<usize>> {
    let n = coords.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = ((coords[i].0 - coords[j].0).powi(2) + (coords[i].1 - coords[j].1).powi(2)).sqrt();
            if d <= t {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut out = std::collections::BTreeMap::<usize, BTreeSet<usize>>::new();
    for i in 0..n {
        let r = root(&mut parent, i);
        out.entry(r).or_default().insert(i);
    }
    out.into_values().collect()
}

proptest! {
    #[test]
    fn clusters_are_union_find_components(
        coords in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..30),
        t in 0.01f64..0.8,
        seed in any::<u64>(),
    ) {
        let pts = points(&coords);
        let got = cluster_points(&pts, t);
        let sets: BTreeSet<BTreeSet<usize>> = got
            .clusters
            .iter()
            .map(|(_, m)| m.iter().map(|k| k[1..].parse().unwrap()).collect())
            .collect();
        prop_assert_eq!(sets, components(&coords, t));
        for (i, (id, members)) in got.clusters.iter().enumerate() {
            prop_assert_eq!(*id, i);
            prop_assert!(members.windows(2).all(|w| w[0] < w[1]));
        }
        let mut shuffled = pts.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.gen_range(0..=i));
        }
        prop_assert_eq!(cluster_points(&shuffled, t), got);
    }

    #[test]
    fn pca_components_are_orthonormal(seed in any::<u64>(), n in 3usize..20, d in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let b = fit_pca(&data).unwrap();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let [c0, c1] = &b.components;
        prop_assert!((dot(c0, c0) - 1.0).abs() < 1e-10);
        prop_assert!((dot(c1, c1) - 1.0).abs() < 1e-10);
        prop_assert!(dot(c0, c1).abs() < 1e-10);
        prop_assert!(b.explained_variance[0] >= b.explained_variance[1]);
        for c in [c0, c1] {
            let top = c.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            prop_assert!(top > 0.0);
        }
        prop_assert_eq!(fit_pca(&data).unwrap(), b);
    }
}

#[test]
fn cluster_examples() {
    let two = points(&[(0.0, 0.0), (10.0, 0.0)]);
    assert_eq!(cluster_points(&two, 1.0).len(), 2);
    let chain = points(&[(0.0, 0.0), (0.0, 0.9), (0.0, 1.8)]);
    assert_eq!(cluster_points(&chain, 1.0).len(), 1);
    assert_eq!(cluster_points(&chain, 100.0).clusters[0].1.len(), 3);

    let d = pairwise_distances(&points(&[(0.0, 0.0), (3.0, 4.0), (3.0, 4.0)]));
    assert_eq!(d[0][1], 5.0);
    assert_eq!(d[1][2], 0.0);
}

#[test]
fn pca_hand_case_and_projection() {
    let pad = |x: f64, y: f64| {
        let mut v = vec![0.0; 6];
        v[0] = x;
        v[1] = y;
        v
    };
    let data = vec![pad(-1.0, -1.0), pad(1.0, 1.0), pad(0.0, 0.0)];
    let b = fit_pca(&data).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((b.components[0][0] - h).abs() < 1e-12 && (b.components[0][1] - h).abs() < 1e-12);
    assert!(b.explained_variance[1].abs() < 1e-12);

    let (x, y) = project(&b, &b.mean);
    assert!(x.abs() < 1e-15 && y.abs() < 1e-15);
    let shifted: Vec<f64> = b.mean.iter().zip(&b.components[0]).map(|(m, c)| m + c).collect();
    let (x, y) = project(&b, &shifted);
    assert!((x - 1.0).abs() < 1e-12 && y.abs() < 1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v: Vec<f64> = (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let centered: Vec<f64> = v.iter().zip(&b.mean).map(|(a, m)| a - m).collect();
    let by_hand: Vec<f64> = b.components.iter().map(|c| c.iter().zip(&centered).map(|(a, b)| a * b).sum()).collect();
    let (x, y) = project(&b, &v);
    assert_eq!((x, y), (by_hand[0], by_hand[1]));

    assert!(fit_pca(&data[..2]).is_err());
    assert!(fit_pca(&[pad(1.0, 1.0), pad(1.0, 1.0), pad(1.0, 1.0)]).is_err());
}

#[test]
fn isotropic_gaussian_has_balanced_variance() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let data: Vec<Vec<f64>> = (0..10_000).map(|_| (0..4).map(|_| gaussian(&mut rng)).collect()).collect();
    let b = fit_pca(&data).unwrap();
    let ratio = b.explained_variance[0] / b.explained_variance[1];
    assert!((0.5..=2.0).contains(&ratio), "ratio {ratio}");
}

fn result(id: &str, words: &[&str]) -> ExtractionResult {
    ExtractionResult {
        doc_id: id.into(),
        keywords: words
            .iter()
            .map(|w| KeywordScore {
                keyword: w.to_string(),
                score: 0.5,
            })
            .collect(),
        status: ExtractionStatus::Ok,
    }
}

fn corpus(industries: &[&str]) -> Corpus {
    Corpus::new(
        industries
            .iter()
            .enumerate()
            .map(|(i, ind)| PatentDocument {
                id: format!("p{i}"),
                industry: ind.to_string(),
                year: 2020,
                title: format!("t{i}"),
                abstract_text: "abstract".into(),
            })
            .collect(),
    )
    .unwrap()
}

#[test]
fn aggregation_matches_hand_tally() {
    let c = corpus(&["medical", "medical", "medical", "security", "security"]);
    let results = [
        result("p0", &["patient", "imaging"]),
        result("p1", &["patient", "record"]),
        result("p2", &["patient"]),
        result("p3", &["attack", "patient"]),
        result("p4", &["attack"]),
    ];
    let tables = aggregate_keywords(&results, &c).unwrap();
    let med = &tables["medical"];
    assert_eq!(med.total_docs, 3);
    assert_eq!(med.ranked(), [("patient".into(), 3), ("imaging".into(), 1), ("record".into(), 1)]);
    assert_eq!(tables["security"].ranked(), [("attack".to_string(), 2), ("patient".to_string(), 1)]);
    for t in tables.values() {
        assert!(t.counts.values().all(|&n| n >= 1 && n <= t.total_docs));
    }
    assert!(aggregate_keywords(&[], &c).unwrap().values().all(KeywordFrequencyTable::is_empty));
    assert!(aggregate_keywords(&[result("zz", &["x"])], &c).is_err());
}

#[test]
fn top_percent_rule() {
    assert_eq!(top_percent_size(100, 5.0), 5);
    assert_eq!(top_percent_size(10, 5.0), 1);
    let mut t = KeywordFrequencyTable::new("x", 3);
    t.counts.insert("a".into(), 3);
    t.counts.insert("b".into(), 3);
    t.counts.insert("c".into(), 1);
    let words = |p| select_top_percent(&t, p).unwrap().into_iter().map(|(k, _)| k).collect::<Vec<_>>();
    assert_eq!(words(67.0), ["a", "b", "c"]);
    assert_eq!(words(34.0), ["a", "b"]);
    assert!(select_top_percent(&t, 0.0).is_err());
}
