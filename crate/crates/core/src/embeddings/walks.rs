use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DiGraph, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub walks_per_node: usize,
    pub walk_length: usize,
    /// Return parameter.
    pub p: f64,
    /// In-out parameter.
    pub q: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walks_per_node: 10,
            walk_length: 80,
            p: 1.0,
            q: 1.0,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::InvalidArgument("walk p and q must be positive".into()));
        }
        if self.walk_length < 2 {
            return Err(Error::InvalidArgument("walk length must be at least 2".into()));
        }
        Ok(())
    }
}

/// Unnormalized second-order weights for stepping from `cur` to each of its
/// successors, having arrived from `prev`: `1/p` back to `prev`, `1` to a
/// successor of `prev`, `1/q` otherwise.
pub fn transition_weights(g: &DiGraph, prev: NodeId, cur: NodeId, p: f64, q: f64) -> Vec<f64> {
    g.out_neighbors(cur)
        .iter()
        .map(|&x| {
            let x = x as usize;
            if x == prev {
                1.0 / p
            } else if g.has_edge(prev, x) {
                1.0
            } else {
                1.0 / q
            }
        })
        .collect()
}

/// Next node of a walk, or `None` at a node without successors.
pub fn sample_next<R: Rng>(g: &DiGraph, prev: Option<NodeId>, cur: NodeId, p: f64, q: f64, rng: &mut R) -> Option<NodeId> {
    let succ = g.out_neighbors(cur);
    if succ.is_empty() {
        return None;
    }
    let r: f64 = rng.random();
    let prev = match prev {
        Some(prev) if p != 1.0 || q != 1.0 => prev,
        // all weights equal
        _ => {
            let idx = ((r * succ.len() as f64) as usize).min(succ.len() - 1);
            return Some(succ[idx] as usize);
        }
    };
    let weights = transition_weights(g, prev, cur, p, q);
    Some(succ[pick_weighted(&weights, r)] as usize)
}

/// Index drawn from the categorical distribution proportional to `weights`,
/// given a uniform `r` in `[0, 1)`.
pub fn pick_weighted(weights: &[f64], r: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = r * total;
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return i;
        }
        target -= w;
    }
    weights.len() - 1
}

fn walk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `walks_per_node` rounds; each round visits every node once in a freshly
/// shuffled order and starts one walk there. Walks follow out-edges and stop
/// early at nodes with no successors.
///
/// Every walk draws from its own RNG stream, so the output does not depend
/// on the number of worker threads.
pub fn generate_walks(g: &DiGraph, cfg: &WalkConfig) -> Result<Vec<Vec<u32>>> {
    cfg.validate()?;
    let n = g.node_count();
    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut walks = Vec::with_capacity(n * cfg.walks_per_node);
    for round in 0..cfg.walks_per_node {
        let mut starts: Vec<NodeId> = (0..n).collect();
        starts.shuffle(&mut order_rng);
        let batch: Vec<Vec<u32>> = starts
            .par_iter()
            .enumerate()
            .map(|(i, &start)| {
                let mut rng = walk_rng(cfg.seed, (round * n + i) as u64 + 1);
                let mut walk = Vec::with_capacity(cfg.walk_length);
                walk.push(start as u32);
                let (mut prev, mut cur) = (None, start);
                while walk.len() < cfg.walk_length {
                    match sample_next(g, prev, cur, cfg.p, cfg.q, &mut rng) {
                        Some(next) => {
                            walk.push(next as u32);
                            prev = Some(cur);
                            cur = next;
                        }
                        None => break,
                    }
                }
                walk
            })
            .collect();
        walks.extend(batch);
    }
    Ok(walks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sink_truncates_walk() {
        let g = DiGraph::from_dense_edges(3, &[(0, 1), (1, 2)], true).unwrap();
        let walks = generate_walks(&g, &WalkConfig { walks_per_node: 2, walk_length: 5, ..WalkConfig::default() }).unwrap();
        assert_eq!(walks.len(), 6);
        for w in &walks {
            match w[0] {
                0 => assert_eq!(w, &vec![0, 1, 2]),
                1 => assert_eq!(w, &vec![1, 2]),
                _ => assert_eq!(w, &vec![2]),
            }
        }
    }

    #[test]
    fn walks_are_paths_and_reproducible() {
        let edges: Vec<_> = (0..20).flat_map(|i| [(i, (i + 1) % 20), (i, (i + 7) % 20)]).collect();
        let g = DiGraph::from_dense_edges(20, &edges, false).unwrap();
        let cfg = WalkConfig {
            walks_per_node: 3,
            walk_length: 15,
            p: 0.5,
            q: 2.0,
            seed: 9,
        };
        let a = generate_walks(&g, &cfg).unwrap();
        assert_eq!(a, generate_walks(&g, &cfg).unwrap());
        assert_eq!(a.len(), 60);
        for w in &a {
            assert_eq!(w.len(), 15);
            for pair in w.windows(2) {
                assert!(g.has_edge(pair[0] as usize, pair[1] as usize));
            }
        }
        // each round starts every node exactly once
        for round in a.chunks(20) {
            let mut starts: Vec<u32> = round.iter().map(|w| w[0]).collect();
            starts.sort_unstable();
            assert_eq!(starts, (0..20).collect::<Vec<u32>>());
        }
    }

    #[test]
    fn directed_cycle_has_single_successor() {
        let edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let g = DiGraph::from_dense_edges(5, &edges, true).unwrap();
        let walks = generate_walks(&g, &WalkConfig { walk_length: 12, ..WalkConfig::default() }).unwrap();
        for w in walks {
            for pair in w.windows(2) {
                assert_eq!(pair[1], (pair[0] + 1) % 5);
            }
        }
    }

    #[test]
    fn weights_follow_return_and_in_out_rule() {
        // path 0 - 1 - 2 plus triangle 1 - 3 - 0
        let g = DiGraph::from_dense_edges(4, &[(0, 1), (1, 2), (1, 3), (3, 0)], false).unwrap();
        // at 1 coming from 0; successors of 1 are [0, 2, 3]
        assert_eq!(transition_weights(&g, 0, 1, 4.0, 0.5), vec![0.25, 2.0, 1.0]);
    }

    #[test]
    fn invalid_config() {
        let g = DiGraph::from_dense_edges(2, &[(0, 1)], true).unwrap();
        assert!(generate_walks(&g, &WalkConfig { p: 0.0, ..WalkConfig::default() }).is_err());
        assert!(generate_walks(&g, &WalkConfig { walk_length: 1, ..WalkConfig::default() }).is_err());
    }
}
