//! File formats exchanged between pipeline stages.
//!
//! All CSV floats are fixed 6-decimal.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::text::TokenStream;
use crate::trend::{ClusterAssignment, ProjectedPoint};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{file}: line {line}: {message}")]
    Parse {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("{file}: expected header {expected:?}, found {found:?}")]
    Header {
        file: &'static str,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub fn fixed6(v: f64) -> String {
    format!("{v:.6}")
}

/// Value of `v` after a trip through the 6-decimal CSV representation.
pub fn round6(v: f64) -> f64 {
    fixed6(v).parse().expect("formatted float parses")
}

fn check_header<R: Read>(rdr: &mut csv::Reader<R>, file: &'static str, expected: &[&str]) -> Result<(), FormatError> {
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(FormatError::Header {
            file,
            expected: expected.join(","),
            found: found.join(","),
        });
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(value: &str, file: &'static str, line: usize, name: &str) -> Result<T, FormatError> {
    value.parse().map_err(|_| FormatError::Parse {
        file,
        line,
        message: format!("invalid {name} {value:?}"),
    })
}

pub fn write_tokens_jsonl<W: Write>(mut out: W, streams: &[TokenStream]) -> Result<(), FormatError> {
    for s in streams {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_tokens_jsonl<R: BufRead>(input: R) -> Result<Vec<TokenStream>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| FormatError::Parse {
            file: "tokens",
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub const FREQUENCY_HEADER: [&str; 4] = ["industry", "keyword", "count", "rank"];

/// `industry,keyword,count,rank` rows; `rank` is 1-based within the
/// industry.
pub fn write_frequency_csv<W: Write>(
    out: W,
    rows: &BTreeMap<String, Vec<(String, usize)>>,
) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FREQUENCY_HEADER)?;
    for (industry, ranked) in rows {
        for (i, (k, c)) in ranked.iter().enumerate() {
            w.write_record([industry.as_str(), k, &c.to_string(), &(i + 1).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_frequency_csv<R: Read>(input: R) -> Result<BTreeMap<String, Vec<(String, usize)>>, FormatError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, "frequencies", &FREQUENCY_HEADER)?;
    let mut out: BTreeMap<String, Vec<(String, usize)>> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let count = parse_field(&rec[2], "frequencies", i + 2, "count")?;
        out.entry(rec[0].to_string()).or_default().push((rec[1].to_string(), count));
    }
    Ok(out)
}

pub const CANDIDATE_HEADER: [&str; 2] = ["keyword", "doc_frequency"];

pub fn write_candidates_csv<W: Write>(out: W, candidates: &[(String, usize)]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CANDIDATE_HEADER)?;
    for (k, c) in candidates {
        w.write_record([k.as_str(), &c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_candidates_csv<R: Read>(input: R) -> Result<Vec<(String, usize)>, FormatError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, "candidates", &CANDIDATE_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        out.push((rec[0].to_string(), parse_field(&rec[1], "candidates", i + 2, "doc_frequency")?));
    }
    Ok(out)
}

/// One row of the projection file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionRow {
    pub industry: String,
    pub keyword: String,
    pub x: f64,
    pub y: f64,
    pub cluster_id: usize,
}

impl ProjectionRow {
    /// Builds rows for one industry, rounded as they will be stored.
    pub fn from_points(industry: &str, points: &[ProjectedPoint], clusters: &ClusterAssignment) -> Vec<Self> {
        let lookup = clusters.lookup();
        points
            .iter()
            .map(|p| ProjectionRow {
                industry: industry.to_string(),
                keyword: p.keyword.clone(),
                x: round6(p.xy.0),
                y: round6(p.xy.1),
                cluster_id: lookup[p.keyword.as_str()],
            })
            .collect()
    }
}

pub const PROJECTION_HEADER: [&str; 5] = ["industry", "keyword", "x", "y", "cluster_id"];

pub fn write_projection_csv<W: Write>(out: W, rows: &[ProjectionRow]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROJECTION_HEADER)?;
    for r in rows {
        w.write_record([
            r.industry.as_str(),
            r.keyword.as_str(),
            &fixed6(r.x),
            &fixed6(r.y),
            &r.cluster_id.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_projection_csv<R: Read>(input: R) -> Result<Vec<ProjectionRow>, FormatError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, "projection", &PROJECTION_HEADER)?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        out.push(ProjectionRow {
            industry: rec[0].to_string(),
            keyword: rec[1].to_string(),
            x: parse_field(&rec[2], "projection", line, "x")?,
            y: parse_field(&rec[3], "projection", line, "y")?,
            cluster_id: parse_field(&rec[4], "projection", line, "cluster_id")?,
        });
    }
    Ok(out)
}

/// Groups projection rows by industry into plot-ready points and clusters.
pub fn projection_by_industry(rows: &[ProjectionRow]) -> BTreeMap<String, (Vec<ProjectedPoint>, ClusterAssignment)> {
    let mut grouped: BTreeMap<String, Vec<&ProjectionRow>> = BTreeMap::new();
    for r in rows {
        grouped.entry(r.industry.clone()).or_default().push(r);
    }
    grouped
        .into_iter()
        .map(|(industry, rows)| {
            let points = rows
                .iter()
                .map(|r| ProjectedPoint {
                    keyword: r.keyword.clone(),
                    full_vector: Vec::new(),
                    xy: (r.x, r.y),
                })
                .collect();
            let mut members: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for r in &rows {
                members.entry(r.cluster_id).or_default().push(r.keyword.clone());
            }
            let clusters = members
                .into_iter()
                .map(|(id, mut m)| {
                    m.sort();
                    (id, m)
                })
                .collect();
            (
                industry,
                (
                    points,
                    ClusterAssignment {
                        clusters,
                        threshold: f64::NAN,
                    },
                ),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceRow {
    pub industry: String,
    pub keyword_a: String,
    pub keyword_b: String,
    pub cosine: f64,
    pub distance_2d: f64,
}

pub fn write_distances_csv<W: Write>(out: W, rows: &[DistanceRow]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["industry", "keyword_a", "keyword_b", "cosine", "distance_2d"])?;
    for r in rows {
        w.write_record([
            r.industry.as_str(),
            r.keyword_a.as_str(),
            r.keyword_b.as_str(),
            &fixed6(r.cosine),
            &fixed6(r.distance_2d),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorRow {
    pub industry: String,
    pub anchor: String,
    pub keyword: String,
    pub cosine: f64,
}

pub fn write_anchor_csv<W: Write>(out: W, rows: &[AnchorRow]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["industry", "anchor", "keyword", "cosine"])?;
    for r in rows {
        w.write_record([r.industry.as_str(), r.anchor.as_str(), r.keyword.as_str(), &fixed6(r.cosine)])?;
    }
    w.flush()?;
    Ok(())
}
