//! Shared helpers for the integration suites: an independent brute-force
//! clustering simulator, deterministic data generators, and a synthetic
//! regime fixture.

#![allow(dead_code)]

use chronoca::ContingencyTable;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One merge step as recorded by the brute-force simulator.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleMerge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub span: (usize, usize),
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        acc += t * t;
    }
    acc.sqrt()
}

/// Complete-link distance: the maximum pairwise distance across clusters.
fn complete_link(points: &[Vec<f64>], a: &[usize], b: &[usize]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for &i in a {
        for &j in b {
            let d = euclid(&points[i], &points[j]);
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Independent simulator: every step recomputes all adjacent complete-link
/// distances from the raw points and merges the leftmost minimum. This is
/// the reference the incremental implementation must reproduce.
pub fn oracle_cluster(points: &[Vec<f64>]) -> Vec<OracleMerge> {
    let n = points.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i + 1, vec![i])).collect();
    let mut merges = Vec::new();
    let mut next_id = n + 1;
    while clusters.len() > 1 {
        let mut best_at = 0;
        let mut best = f64::INFINITY;
        for c in 0..clusters.len() - 1 {
            let d = complete_link(points, &clusters[c].1, &clusters[c + 1].1);
            if d < best {
                best = d;
                best_at = c;
            }
        }
        let (right_id, right_members) = clusters.remove(best_at + 1);
        let (left_id, left_members) = clusters[best_at].clone();
        let mut members = left_members;
        members.extend(right_members);
        merges.push(OracleMerge {
            left: left_id,
            right: right_id,
            height: best,
            span: (members[0] + 1, members[members.len() - 1] + 1),
        });
        clusters[best_at] = (next_id, members);
        next_id += 1;
    }
    merges
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random positive table, up to `max_rows × max_cols` (at least 2×2).
pub fn random_table(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> ContingencyTable {
    let r = rng.random_range(2..=max_rows);
    let c = rng.random_range(2..=max_cols);
    let cells: Vec<f64> = (0..r * c).map(|_| rng.random_range(0.5..20.0)).collect();
    let rows = (0..r).map(|i| format!("r{i}")).collect();
    let cols = (0..c).map(|j| format!("c{j}")).collect();
    ContingencyTable::new(rows, cols, DMatrix::from_row_slice(r, c, &cells))
        .expect("positive cells cannot prune")
        .0
}

/// A product-form table (`counts[i][j] = r[i] * c[j]`), which carries zero
/// inertia by construction.
pub fn product_table(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> ContingencyTable {
    let r = rng.random_range(2..=max_rows);
    let c = rng.random_range(2..=max_cols);
    let row_w: Vec<f64> = (0..r).map(|_| rng.random_range(0.5..5.0)).collect();
    let col_w: Vec<f64> = (0..c).map(|_| rng.random_range(0.5..5.0)).collect();
    let m = DMatrix::from_fn(r, c, |i, j| row_w[i] * col_w[j]);
    let rows = (0..r).map(|i| format!("r{i}")).collect();
    let cols = (0..c).map(|j| format!("c{j}")).collect();
    ContingencyTable::new(rows, cols, m).expect("positive cells").0
}

/// A random ordered point sequence, `n` points of shared dimension `dim`.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect()
}

pub const REGIME_MONTHS: usize = 204;
pub const REGIME_ATTRS: usize = 144;
/// Segment boundaries of the reference 8-segment labeling of 204 ordered
/// observations (change between positions p and p+1).
pub const REGIME_BOUNDARIES: [usize; 7] = [4, 5, 20, 21, 119, 120, 172];
/// The same labeling as (label, run length) pairs.
pub const REGIME_RUNS: [(usize, usize); 8] =
    [(1, 4), (2, 1), (3, 15), (4, 1), (5, 98), (6, 1), (7, 52), (8, 32)];

fn regime_of(month: usize) -> usize {
    let mut start = 0;
    for (idx, (_, len)) in REGIME_RUNS.iter().enumerate() {
        if month < start + len {
            return idx;
        }
        start += len;
    }
    unreachable!("month {month} beyond {REGIME_MONTHS}")
}

fn month_label(t: usize) -> String {
    format!("{}-{:02}", 1988 + t / 12, 1 + t % 12)
}

/// Mean attribute level for a month in regime `r`: a flat base plus a
/// strong bump on the regime's own attribute block, so the eight regime
/// profiles are mutually far apart in the χ² metric.
fn regime_mean(regime: usize, attr: usize) -> f64 {
    let block = REGIME_ATTRS / REGIME_RUNS.len();
    if attr / block == regime {
        100.0
    } else {
        10.0
    }
}

/// 204 × 144 synthetic months with eight planted mean-shifted regimes at
/// the reference boundaries; multiplicative noise of ±2% keeps
/// within-regime profile scatter far below the between-regime shifts.
pub fn regime_table(seed: u64) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut rng = rng(seed);
    let labels: Vec<String> = (0..REGIME_MONTHS).map(month_label).collect();
    let rows: Vec<Vec<f64>> = (0..REGIME_MONTHS)
        .map(|t| {
            let r = regime_of(t);
            (0..REGIME_ATTRS)
                .map(|j| regime_mean(r, j) * (1.0 + rng.random_range(-0.02..0.02)))
                .collect()
        })
        .collect();
    (labels, rows)
}

/// The regime fixture as a counts CSV.
pub fn regime_table_csv(seed: u64) -> String {
    let (labels, rows) = regime_table(seed);
    let mut csv = String::from("obs");
    for j in 0..REGIME_ATTRS {
        csv.push_str(&format!(",a{j}"));
    }
    csv.push('\n');
    for (label, row) in labels.iter().zip(&rows) {
        csv.push_str(label);
        for v in row {
            csv.push_str(&format!(",{v}"));
        }
        csv.push('\n');
    }
    csv
}

/// The regime fixture as an event log: each month's totals are split over
/// two dated events, so monthly aggregation reconstructs the table.
pub fn regime_events_csv(seed: u64) -> String {
    let (_, rows) = regime_table(seed);
    let mut csv = String::from("date");
    for j in 0..REGIME_ATTRS {
        csv.push_str(&format!(",a{j}"));
    }
    csv.push('\n');
    for (t, row) in rows.iter().enumerate() {
        let (year, month) = (1988 + t / 12, 1 + t % 12);
        for (day, share) in [(5, 0.35), (18, 0.65)] {
            csv.push_str(&format!("{year}-{month:02}-{day:02}"));
            for v in row {
                csv.push_str(&format!(",{}", v * share));
            }
            csv.push('\n');
        }
    }
    csv
}

/// Minimal XML well-formedness check: tags balance and nest properly.
pub fn assert_well_formed_xml(doc: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut rest = doc;
    while let Some(start) = rest.find('<') {
        let end = rest[start..].find('>').expect("unclosed tag") + start;
        let tag = &rest[start + 1..end];
        rest = &rest[end + 1..];
        if let Some(name) = tag.strip_prefix('/') {
            assert_eq!(stack.pop().as_deref(), Some(name), "mismatched close tag");
        } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
            stack.push(tag.split_whitespace().next().unwrap().to_string());
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}
