//! Neighborhood-overlap scores on sorted id sets.

use crate::graph::{DiGraph, NodeId};

/// `|a ∩ b|` for sorted, duplicate-free slices.
pub fn intersection_size(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Jaccard and cosine similarity of two sorted id sets; both 0 if either
/// set is empty.
pub fn set_similarity(a: &[u32], b: &[u32]) -> (f64, f64) {
    if a.is_empty() || b.is_empty() {
        return (0.0, 0.0);
    }
    let inter = intersection_size(a, b) as f64;
    let union = (a.len() + b.len()) as f64 - inter;
    let cosine = inter / ((a.len() * b.len()) as f64).sqrt();
    (inter / union, cosine)
}

/// Adamic-Adar over undirected neighborhoods. Common neighbors of degree 1
/// contribute nothing.
pub fn adamic_adar(g: &DiGraph, u: NodeId, v: NodeId) -> f64 {
    let (a, b) = (g.neighbors(u), g.neighbors(v));
    let (mut i, mut j, mut score) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let deg = g.neighbors(a[i] as usize).len();
                if deg > 1 {
                    score += 1.0 / (deg as f64).ln();
                }
                i += 1;
                j += 1;
            }
        }
    }
    score
}

/// `[w_in, w_out, w_in + w_out, w_in * w_out, 2 w_in + w_out, w_in + 2 w_out]`
/// with `w_in = 1/sqrt(1 + indeg(v))` and `w_out = 1/sqrt(1 + outdeg(u))`.
pub fn weight_features(g: &DiGraph, u: NodeId, v: NodeId) -> [f64; 6] {
    let w_in = 1.0 / (1.0 + g.in_degree(v) as f64).sqrt();
    let w_out = 1.0 / (1.0 + g.out_degree(u) as f64).sqrt();
    [
        w_in,
        w_out,
        w_in + w_out,
        w_in * w_out,
        2.0 * w_in + w_out,
        w_in + 2.0 * w_out,
    ]
}
