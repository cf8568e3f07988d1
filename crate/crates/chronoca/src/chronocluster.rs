//! Sequence-constrained complete-link agglomerative clustering.
//!
//! Given an ordered list of points, only *adjacent* clusters may merge, so
//! every cluster is a contiguous interval of the input order. The
//! inter-cluster distance is complete link (the maximum pairwise Euclidean
//! distance between members), which guarantees non-decreasing merge
//! heights; the heights therefore define an ultrametric on the leaves,
//! read off by [`Dendrogram::cophenetic`]. Cutting the top of the tree
//! yields a contiguous [`Partition`], and the undone merges locate the
//! [`ChangepointReport`] boundaries between consecutive leaves.
//!
//! The agglomeration maintains complete-link distances per adjacent pair
//! incrementally. When two intervals merge, the distance to a neighbor is
//! the larger of the neighbor's cached distance to the near half and the
//! (freshly evaluated) maximum over point pairs against the far half; a
//! point pair is evaluated at most once over the whole run, giving O(n²)
//! worst-case work with O(n) active pairs. A per-point bounding-box bound
//! skips most far-half scans in practice. Candidate merges sit in a lazy
//! min-heap keyed by (distance, start position), so exact ties resolve to
//! the leftmost pair, and distances are compared exactly as computed —
//! no epsilon.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::json::fmt_f64;

const NO_SLOT: usize = usize::MAX;

/// One agglomeration step: clusters `left` and `right` fuse at `height`
/// into a cluster covering the 1-based leaf interval `span`.
///
/// Cluster ids: leaves are `1..=n_leaves`, internal clusters are
/// `n_leaves + 1, n_leaves + 2, ...` in merge order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub span: (usize, usize),
}

/// A stepwise dendrogram over contiguous leaf intervals with
/// non-decreasing merge heights.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

/// Contiguous cluster labels for a k-cluster cut, `1..=k` left to right.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
}

/// A change between leaf `position` and leaf `position + 1` (1-based),
/// at the height of the merge that joins across it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boundary {
    pub position: usize,
    pub height: f64,
}

/// Ordered boundary positions with their merge heights.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ChangepointReport {
    pub boundaries: Vec<Boundary>,
}

/// A failed strong triangle inequality: `d(x,y) > max(d(x,z), d(z,y))`
/// beyond the tolerance. Indices are 1-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UltrametricViolation {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug)]
struct PairEntry {
    dist: f64,
    left_start: usize,
    left_slot: usize,
    left_stamp: u32,
    right_slot: usize,
    right_stamp: u32,
}

impl PartialEq for PairEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PairEntry {}

impl Ord for PairEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.left_start.cmp(&other.left_start))
            .then(self.left_stamp.cmp(&other.left_stamp))
            .then(self.right_stamp.cmp(&other.right_stamp))
    }
}

impl PartialOrd for PairEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[inline]
fn dist_sq(points: &[f64], dim: usize, p: usize, q: usize) -> f64 {
    let a = &points[p * dim..(p + 1) * dim];
    let b = &points[q * dim..(q + 1) * dim];
    let mut acc = 0.0;
    for d in 0..dim {
        let t = a[d] - b[d];
        acc += t * t;
    }
    acc
}

/// Largest possible squared distance from point `p` to anywhere inside the
/// axis-aligned box `[lo, hi]`.
#[inline]
fn bbox_max_sq(points: &[f64], dim: usize, p: usize, lo: &[f64], hi: &[f64]) -> f64 {
    let x = &points[p * dim..(p + 1) * dim];
    let mut acc = 0.0;
    for d in 0..dim {
        let a = x[d] - lo[d];
        let b = hi[d] - x[d];
        acc += f64::max(a * a, b * b);
    }
    acc
}

/// Exact `max(floor_sq, max over span_x × span_y point pairs)` in squared
/// distance, skipping points whose box bound cannot beat the running best.
fn cross_sq_max(
    points: &[f64],
    dim: usize,
    span_x: (usize, usize),
    span_y: (usize, usize),
    bbox_lo: &[f64],
    bbox_hi: &[f64],
    slot_x: usize,
    slot_y: usize,
    floor_sq: f64,
) -> f64 {
    let len_x = span_x.1 - span_x.0 + 1;
    let len_y = span_y.1 - span_y.0 + 1;
    let (outer, inner, inner_slot) = if len_x <= len_y {
        (span_x, span_y, slot_y)
    } else {
        (span_y, span_x, slot_x)
    };
    let lo = &bbox_lo[inner_slot * dim..(inner_slot + 1) * dim];
    let hi = &bbox_hi[inner_slot * dim..(inner_slot + 1) * dim];

    let mut best = floor_sq;
    for p in outer.0..=outer.1 {
        if bbox_max_sq(points, dim, p, lo, hi) <= best {
            continue;
        }
        for q in inner.0..=inner.1 {
            let d = dist_sq(points, dim, p, q);
            if d > best {
                best = d;
            }
        }
    }
    best
}

/// Builds the sequence-constrained complete-link dendrogram of `points`.
///
/// All points must share one dimension. A single point yields a
/// dendrogram with zero merges. At every step the adjacent pair with the
/// minimal complete-link distance merges; exact ties go to the leftmost
/// pair (smallest start position). Heights are plain Euclidean distances,
/// not squares, so cophenetic values compare directly against pairwise
/// point distances.
pub fn cluster_sequence(points: &[Vec<f64>]) -> Result<Dendrogram> {
    let n = points.len();
    if n == 0 {
        return Err(Error::usage("cluster_sequence needs at least one point"));
    }
    let dim = points[0].len();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            return Err(Error::usage(format!(
                "dimension mismatch: point {i} has {} coordinates, expected {dim}",
                p.len()
            )));
        }
    }
    if n == 1 {
        return Ok(Dendrogram {
            n_leaves: 1,
            merges: Vec::new(),
        });
    }

    let mut flat = Vec::with_capacity(n * dim);
    for p in points {
        flat.extend_from_slice(p);
    }

    // Active clusters live in slots 0..n; a merge reuses the left slot and
    // bumps its stamp, which lazily invalidates stale heap entries.
    let span_start: Vec<usize> = (0..n).collect();
    let mut span_end: Vec<usize> = (0..n).collect();
    let mut cluster_id: Vec<usize> = (1..=n).collect();
    let mut prev: Vec<usize> = (0..n).map(|i| if i == 0 { NO_SLOT } else { i - 1 }).collect();
    let mut next: Vec<usize> = (0..n).map(|i| if i + 1 == n { NO_SLOT } else { i + 1 }).collect();
    let mut stamp: Vec<u32> = vec![0; n];
    let mut alive: Vec<bool> = vec![true; n];
    let mut bbox_lo = flat.clone();
    let mut bbox_hi = flat.clone();
    // Complete-link distance from the cluster in each slot to its `next`
    // neighbor, cached both squared and as the Euclidean value.
    let mut right_sq: Vec<f64> = vec![f64::INFINITY; n];
    let mut right_dist: Vec<f64> = vec![f64::INFINITY; n];

    let mut heap: BinaryHeap<std::cmp::Reverse<PairEntry>> = BinaryHeap::with_capacity(3 * n);
    for i in 0..n - 1 {
        let sq = dist_sq(&flat, dim, i, i + 1);
        right_sq[i] = sq;
        right_dist[i] = sq.sqrt();
        heap.push(std::cmp::Reverse(PairEntry {
            dist: right_dist[i],
            left_start: i,
            left_slot: i,
            left_stamp: 0,
            right_slot: i + 1,
            right_stamp: 0,
        }));
    }

    let mut merges = Vec::with_capacity(n - 1);
    while merges.len() < n - 1 {
        let entry = heap
            .pop()
            .expect("the heap cannot drain while clusters remain")
            .0;
        let (a, b) = (entry.left_slot, entry.right_slot);
        if !alive[a]
            || !alive[b]
            || stamp[a] != entry.left_stamp
            || stamp[b] != entry.right_stamp
        {
            continue;
        }
        debug_assert_eq!(next[a], b);

        let height = entry.dist;
        merges.push(Merge {
            left: cluster_id[a],
            right: cluster_id[b],
            height,
            span: (span_start[a] + 1, span_end[b] + 1),
        });

        let left_neighbor = prev[a];
        let right_neighbor = next[b];

        // Evaluate the far-half cross maxima before any state mutation;
        // both halves still own their spans and boxes here.
        let new_left_sq = (left_neighbor != NO_SLOT).then(|| {
            cross_sq_max(
                &flat,
                dim,
                (span_start[left_neighbor], span_end[left_neighbor]),
                (span_start[b], span_end[b]),
                &bbox_lo,
                &bbox_hi,
                left_neighbor,
                b,
                right_sq[left_neighbor],
            )
        });
        let new_right_sq = (right_neighbor != NO_SLOT).then(|| {
            cross_sq_max(
                &flat,
                dim,
                (span_start[a], span_end[a]),
                (span_start[right_neighbor], span_end[right_neighbor]),
                &bbox_lo,
                &bbox_hi,
                a,
                right_neighbor,
                right_sq[b],
            )
        });

        for d in 0..dim {
            bbox_lo[a * dim + d] = f64::min(bbox_lo[a * dim + d], bbox_lo[b * dim + d]);
            bbox_hi[a * dim + d] = f64::max(bbox_hi[a * dim + d], bbox_hi[b * dim + d]);
        }
        span_end[a] = span_end[b];
        cluster_id[a] = n + merges.len();
        stamp[a] += 1;
        alive[b] = false;
        next[a] = right_neighbor;
        if right_neighbor != NO_SLOT {
            prev[right_neighbor] = a;
        }

        if let Some(sq) = new_left_sq {
            right_sq[left_neighbor] = sq;
            right_dist[left_neighbor] = sq.sqrt();
            heap.push(std::cmp::Reverse(PairEntry {
                dist: right_dist[left_neighbor],
                left_start: span_start[left_neighbor],
                left_slot: left_neighbor,
                left_stamp: stamp[left_neighbor],
                right_slot: a,
                right_stamp: stamp[a],
            }));
        }
        if let Some(sq) = new_right_sq {
            right_sq[a] = sq;
            right_dist[a] = sq.sqrt();
            heap.push(std::cmp::Reverse(PairEntry {
                dist: right_dist[a],
                left_start: span_start[a],
                left_slot: a,
                left_stamp: stamp[a],
                right_slot: right_neighbor,
                right_stamp: stamp[right_neighbor],
            }));
        } else {
            right_sq[a] = f64::INFINITY;
            right_dist[a] = f64::INFINITY;
        }
    }

    Ok(Dendrogram {
        n_leaves: n,
        merges,
    })
}

impl Dendrogram {
    /// Validates an explicit merge list: contiguous adjacent spans,
    /// non-decreasing heights, ids assigned in merge order, full coverage.
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        let invalid = |msg: String| Error::domain(format!("invalid dendrogram: {msg}"));
        if n_leaves == 0 {
            return Err(Error::usage("a dendrogram needs at least one leaf"));
        }
        if merges.len() + 1 != n_leaves {
            return Err(invalid(format!(
                "{} merges cannot join {n_leaves} leaves",
                merges.len()
            )));
        }

        let max_id = 2 * n_leaves; // exclusive
        let mut spans: Vec<Option<(usize, usize)>> = vec![None; max_id];
        let mut active = vec![false; max_id];
        for leaf in 1..=n_leaves {
            spans[leaf] = Some((leaf, leaf));
            active[leaf] = true;
        }

        let mut prev_height = 0.0;
        for (t, m) in merges.iter().enumerate() {
            let new_id = n_leaves + 1 + t;
            for id in [m.left, m.right] {
                if id == 0 || id >= new_id {
                    return Err(invalid(format!("merge {t} references unknown cluster {id}")));
                }
                if !active[id] {
                    return Err(invalid(format!(
                        "merge {t} references already-merged cluster {id}"
                    )));
                }
            }
            let (ls, le) = spans[m.left].expect("active cluster has a span");
            let (rs, re) = spans[m.right].expect("active cluster has a span");
            if le + 1 != rs {
                return Err(invalid(format!(
                    "merge {t} joins non-adjacent spans [{ls}, {le}] and [{rs}, {re}]"
                )));
            }
            if m.span != (ls, re) {
                return Err(invalid(format!(
                    "merge {t} declares span {:?}, expected ({ls}, {re})",
                    m.span
                )));
            }
            if !m.height.is_finite() || m.height < 0.0 {
                return Err(invalid(format!("merge {t} has invalid height {}", m.height)));
            }
            if m.height < prev_height {
                return Err(invalid(format!(
                    "heights decrease at merge {t}: {} after {prev_height}",
                    m.height
                )));
            }
            prev_height = m.height;
            active[m.left] = false;
            active[m.right] = false;
            active[new_id] = true;
            spans[new_id] = Some((ls, re));
        }

        if let Some(last) = merges.last() {
            debug_assert_eq!(last.span, (1, n_leaves));
        }
        Ok(Dendrogram { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Child spans (left, right) of every merge, by replaying the sequence.
    fn child_spans(&self) -> Vec<((usize, usize), (usize, usize))> {
        let n = self.n_leaves;
        let mut spans: Vec<(usize, usize)> = vec![(0, 0); 2 * n];
        for leaf in 1..=n {
            spans[leaf] = (leaf, leaf);
        }
        let mut out = Vec::with_capacity(self.merges.len());
        for (t, m) in self.merges.iter().enumerate() {
            let ls = spans[m.left];
            let rs = spans[m.right];
            out.push((ls, rs));
            spans[n + 1 + t] = (ls.0, rs.1);
        }
        out
    }

    /// Cophenetic distance matrix: entry `(i, j)` is the height of the
    /// lowest merge joining leaves `i` and `j`. The result is an
    /// ultrametric (zero diagonal, symmetric, strong triangle inequality).
    pub fn cophenetic(&self) -> DMatrix<f64> {
        let n = self.n_leaves;
        let mut m = DMatrix::zeros(n, n);
        for (merge, (left, right)) in self.merges.iter().zip(self.child_spans()) {
            for i in left.0..=left.1 {
                for j in right.0..=right.1 {
                    m[(i - 1, j - 1)] = merge.height;
                    m[(j - 1, i - 1)] = merge.height;
                }
            }
        }
        m
    }

    /// Partition into `k` contiguous clusters by undoing the top `k − 1`
    /// merges; segments are labeled `1..=k` left to right.
    pub fn cut(&self, k: usize) -> Result<Partition> {
        let n = self.n_leaves;
        if k < 1 || k > n {
            return Err(Error::usage(format!(
                "cut size k={k} out of range 1..={n}"
            )));
        }
        let applied = n - k;
        let spans = self.child_spans();
        // Boundary p (between leaves p and p+1) disappears exactly when the
        // merge whose left child ends at p is applied.
        let mut boundary = vec![true; n.saturating_sub(1)];
        for (left, _) in spans.iter().take(applied) {
            boundary[left.1 - 1] = false;
        }
        let mut labels = Vec::with_capacity(n);
        let mut current = 1;
        for i in 1..=n {
            labels.push(current);
            if i < n && boundary[i - 1] {
                current += 1;
            }
        }
        debug_assert_eq!(current, k);
        Ok(Partition { labels, k })
    }

    /// The `k − 1` positions where consecutive leaves end up in different
    /// clusters under [`Dendrogram::cut`], each with the height of the
    /// (undone) merge that joins across it.
    pub fn changepoints(&self, k: usize) -> Result<ChangepointReport> {
        let n = self.n_leaves;
        if k < 1 || k > n {
            return Err(Error::usage(format!(
                "cut size k={k} out of range 1..={n}"
            )));
        }
        let spans = self.child_spans();
        let mut boundaries: Vec<Boundary> = (n - k..self.merges.len())
            .map(|t| Boundary {
                position: spans[t].0 .1,
                height: self.merges[t].height,
            })
            .collect();
        boundaries.sort_by_key(|b| b.position);
        Ok(ChangepointReport { boundaries })
    }

    /// Serializes to the JSON interchange form with 17-significant-digit
    /// heights.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"n_leaves\":");
        out.push_str(&self.n_leaves.to_string());
        out.push_str(",\"merges\":[");
        for (t, m) in self.merges.iter().enumerate() {
            if t > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"left\":{},\"right\":{},\"height\":{},\"span\":[{},{}]}}",
                m.left,
                m.right,
                fmt_f64(m.height),
                m.span.0,
                m.span.1
            ));
        }
        out.push_str("]}");
        out
    }

    /// Reads and re-validates the JSON interchange form.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct MergeRepr {
            left: usize,
            right: usize,
            height: f64,
            span: [usize; 2],
        }
        #[derive(Deserialize)]
        struct Repr {
            n_leaves: usize,
            merges: Vec<MergeRepr>,
        }
        let repr: Repr = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("invalid dendrogram JSON: {e}")))?;
        let merges = repr
            .merges
            .into_iter()
            .map(|m| Merge {
                left: m.left,
                right: m.right,
                height: m.height,
                span: (m.span[0], m.span[1]),
            })
            .collect();
        Dendrogram::new(repr.n_leaves, merges)
    }

    /// Newick form with branch lengths derived from merge heights: a
    /// node's branch length is its parent's height minus its own (leaves
    /// sit at height zero), so leaf depth equals the root height.
    pub fn to_newick(&self, labels: &[String]) -> Result<String> {
        if labels.len() != self.n_leaves {
            return Err(Error::usage(format!(
                "{} labels for {} leaves",
                labels.len(),
                self.n_leaves
            )));
        }
        if self.n_leaves == 1 {
            return Ok(format!("{};", newick_label(&labels[0])));
        }
        let n = self.n_leaves;
        let mut frags: Vec<Option<(String, f64)>> = vec![None; 2 * n];
        for (leaf, label) in labels.iter().enumerate() {
            frags[leaf + 1] = Some((newick_label(label), 0.0));
        }
        for (t, m) in self.merges.iter().enumerate() {
            let (lf, lh) = frags[m.left].take().expect("child exists");
            let (rf, rh) = frags[m.right].take().expect("child exists");
            let frag = format!("({lf}:{},{rf}:{})", m.height - lh, m.height - rh);
            frags[n + 1 + t] = Some((frag, m.height));
        }
        let (root, _) = frags[2 * n - 1].take().expect("root exists");
        Ok(format!("{root};"))
    }
}

fn newick_label(label: &str) -> String {
    let needs_quoting = label
        .chars()
        .any(|c| c.is_whitespace() || "(),:;[]'".contains(c))
        || label.is_empty();
    if needs_quoting {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_owned()
    }
}

impl Partition {
    /// Validates labels: contiguous runs with ids `1..=k` in order of
    /// first appearance.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::usage("a partition needs at least one label"));
        }
        let mut current = 0;
        for (i, &l) in labels.iter().enumerate() {
            if l == current {
                continue;
            }
            if l == current + 1 {
                current = l;
            } else {
                return Err(Error::domain(format!(
                    "invalid partition: label {l} at position {} breaks the contiguous 1..k order",
                    i + 1
                )));
            }
        }
        Ok(Partition { labels, k: current })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Positions `p` (1-based) where `labels[p] != labels[p+1]`.
pub fn boundaries_from_partition(partition: &Partition) -> Vec<usize> {
    partition
        .labels()
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i + 1)
        .collect()
}

/// Checks the strong triangle inequality `d(x,y) ≤ max(d(x,z), d(z,y))`
/// for every triple, within `1e-12` absolute slack. Returns the violating
/// triples (empty means the matrix is an ultrametric). The input must be
/// square, symmetric, non-negative, with a zero diagonal.
pub fn verify_ultrametric(m: &DMatrix<f64>) -> Result<Vec<UltrametricViolation>> {
    const SLACK: f64 = 1e-12;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::usage(format!(
            "distance matrix must be square, got {}x{}",
            n,
            m.ncols()
        )));
    }
    for i in 0..n {
        if m[(i, i)] != 0.0 {
            return Err(Error::usage(format!(
                "diagonal entry ({i},{i}) is {}, expected 0",
                m[(i, i)]
            )));
        }
        for j in 0..n {
            let v = m[(i, j)];
            if v < 0.0 || v.is_nan() {
                return Err(Error::usage(format!("negative entry {v} at ({i},{j})")));
            }
            if v != m[(j, i)] {
                return Err(Error::usage(format!(
                    "asymmetric entries at ({i},{j}): {v} vs {}",
                    m[(j, i)]
                )));
            }
        }
    }

    let mut violations = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            let lhs = m[(x, y)];
            for z in 0..n {
                if z == x || z == y {
                    continue;
                }
                let rhs = f64::max(m[(x, z)], m[(z, y)]);
                if lhs > rhs + SLACK {
                    violations.push(UltrametricViolation {
                        x: x + 1,
                        y: y + 1,
                        z: z + 1,
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(violations)
}
