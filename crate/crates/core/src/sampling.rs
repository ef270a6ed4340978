//! Train/test construction: a node-preserving split of the positive edges and
//! distance-filtered negative pairs, assembled into balanced labeled sets.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{DiGraph, NodeId};

/// Attempts per requested negative before giving up.
pub const NEGATIVE_ATTEMPT_FACTOR: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub label: u8,
}

impl LabeledEdge {
    pub fn positive(src: NodeId, dst: NodeId) -> Self {
        LabeledEdge { src, dst, label: 1 }
    }

    pub fn negative(src: NodeId, dst: NodeId) -> Self {
        LabeledEdge { src, dst, label: 0 }
    }

    pub fn is_positive(&self) -> bool {
        self.label == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveSplit {
    pub train: Vec<(NodeId, NodeId)>,
    pub test: Vec<(NodeId, NodeId)>,
    /// How many test edges short of the requested target the split ended.
    pub shortfall: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegativeSample {
    pub pairs: Vec<(NodeId, NodeId)>,
    pub shortfall: usize,
    /// Accepted pairs whose endpoints lie in different weak components.
    pub cross_component: usize,
}

#[derive(Debug, Clone)]
pub struct SplitDataset {
    /// Graph over the full node set containing only the train positives.
    pub train_graph: DiGraph,
    pub train: Vec<LabeledEdge>,
    pub test: Vec<LabeledEdge>,
    pub seed: u64,
    pub test_fraction: f64,
    pub positive_shortfall: usize,
    pub negative_shortfall: usize,
    pub cross_component_negatives: usize,
}

impl SplitDataset {
    pub fn count(edges: &[LabeledEdge]) -> (usize, usize) {
        let pos = edges.iter().filter(|e| e.is_positive()).count();
        (pos, edges.len() - pos)
    }
}

fn test_target(edge_count: usize, test_fraction: f64) -> usize {
    // ceil, tolerant of representation error (0.1 * 30 = 3.0000000000000004)
    let raw = test_fraction * edge_count as f64;
    ((raw - 1e-9).ceil().max(0.0) as usize).min(edge_count)
}

fn check_fraction(test_fraction: f64) -> Result<()> {
    if test_fraction > 0.0 && test_fraction < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("test fraction {test_fraction} outside (0, 1)")))
    }
}

/// Shuffle the edges and move each one to the test side only while both of
/// its endpoints keep at least one other incident edge.
pub fn split_positive_edges(g: &DiGraph, test_fraction: f64, seed: u64) -> Result<PositiveSplit> {
    check_fraction(test_fraction)?;
    let mut edges = g.edges();
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let target = test_target(edges.len(), test_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);

    let mut residual = vec![0usize; g.node_count()];
    for &(u, v) in &edges {
        residual[u] += 1;
        residual[v] += 1;
    }
    let mut train = Vec::with_capacity(edges.len() - target);
    let mut test = Vec::with_capacity(target);
    for (u, v) in edges {
        if test.len() < target && residual[u] >= 2 && residual[v] >= 2 {
            residual[u] -= 1;
            residual[v] -= 1;
            test.push((u, v));
        } else {
            train.push((u, v));
        }
    }
    let shortfall = target - test.len();
    if shortfall > 0 {
        log::warn!("positive split: {shortfall} test edges short of target {target}");
    }
    Ok(PositiveSplit { train, test, shortfall })
}

/// Distinct, sorted undirected neighbor lists intersect?
fn sorted_intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// True when `u` and `v` are at least three hops apart ignoring direction.
pub fn far_enough(g: &DiGraph, u: NodeId, v: NodeId) -> bool {
    if u == v {
        return false;
    }
    let nu = g.neighbors(u);
    if nu.binary_search(&(v as u32)).is_ok() {
        return false;
    }
    !sorted_intersects(nu, g.neighbors(v))
}

/// Uniform rejection sampling of node pairs at undirected distance >= 3.
///
/// For undirected graphs `(u, v)` and `(v, u)` count as the same pair.
pub fn sample_negative_edges(g: &DiGraph, count: usize, seed: u64) -> Result<NegativeSample> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let comps = crate::graph::weakly_connected_components(g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(count);
    let mut pairs = Vec::with_capacity(count);
    let mut cross_component = 0;
    let budget = count.saturating_mul(NEGATIVE_ATTEMPT_FACTOR);
    let mut attempts = 0;
    while pairs.len() < count && attempts < budget {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if !far_enough(g, u, v) {
            continue;
        }
        let key = if g.is_directed() { (u, v) } else { (u.min(v), u.max(v)) };
        if !seen.insert(key) {
            continue;
        }
        if comps.label[u] != comps.label[v] {
            cross_component += 1;
        }
        pairs.push((u, v));
    }
    let shortfall = count - pairs.len();
    if shortfall > 0 {
        log::warn!("negative sampling: {shortfall} of {count} pairs not found within {budget} attempts");
    }
    Ok(NegativeSample {
        pairs,
        shortfall,
        cross_component,
    })
}

/// Positive split, negatives (as many as there are positive edges) split in
/// the same proportion, and the training graph over the full node set.
pub fn assemble_dataset(g: &DiGraph, test_fraction: f64, seed: u64) -> Result<SplitDataset> {
    let split = split_positive_edges(g, test_fraction, seed)?;
    let positives = split.train.len() + split.test.len();
    let negatives = sample_negative_edges(g, positives, seed.wrapping_add(0x9e37_79b9_7f4a_7c15))?;

    let mut neg_pairs = negatives.pairs;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
    neg_pairs.shuffle(&mut rng);
    let neg_test = ((neg_pairs.len() * split.test.len()) as f64 / positives as f64).round() as usize;
    let (neg_test_pairs, neg_train_pairs) = neg_pairs.split_at(neg_test.min(neg_pairs.len()));

    let train_graph = g.with_edges(&split.train)?;

    let mut train: Vec<LabeledEdge> = split
        .train
        .iter()
        .map(|&(u, v)| LabeledEdge::positive(u, v))
        .chain(neg_train_pairs.iter().map(|&(u, v)| LabeledEdge::negative(u, v)))
        .collect();
    let mut test: Vec<LabeledEdge> = split
        .test
        .iter()
        .map(|&(u, v)| LabeledEdge::positive(u, v))
        .chain(neg_test_pairs.iter().map(|&(u, v)| LabeledEdge::negative(u, v)))
        .collect();
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);

    Ok(SplitDataset {
        train_graph,
        train,
        test,
        seed,
        test_fraction,
        positive_shortfall: split.shortfall,
        negative_shortfall: negatives.shortfall,
        cross_component_negatives: negatives.cross_component,
    })
}
