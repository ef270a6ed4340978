//! Power-iteration node scores: PageRank, Katz and HITS.

use crate::error::{Error, Result};
use crate::graph::DiGraph;

use super::HeuristicConfig;

/// Katz iterates above this L2 norm are treated as divergent.
pub const KATZ_DIVERGENCE_NORM: f64 = 1e12;

/// Result of an iterative solver, with convergence bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterated<T> {
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn normalize_l1(x: &mut [f64]) {
    let s: f64 = x.iter().sum();
    if s > 0.0 {
        x.iter_mut().for_each(|v| *v /= s);
    }
}

/// PageRank with uniform teleport and dangling mass spread uniformly.
pub fn compute_pagerank(g: &DiGraph, cfg: &HeuristicConfig) -> Iterated<Vec<f64>> {
    let n = g.node_count();
    let d = cfg.pagerank_damping;
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        let dangling: f64 = (0..n).filter(|&u| g.out_degree(u) == 0).map(|u| rank[u]).sum();
        let base = (1.0 - d) / nf + d * dangling / nf;
        for v in 0..n {
            let inflow: f64 = g
                .in_neighbors(v)
                .iter()
                .map(|&u| rank[u as usize] / g.out_degree(u as usize) as f64)
                .sum();
            next[v] = base + d * inflow;
        }
        let change = l1_diff(&next, &rank);
        std::mem::swap(&mut rank, &mut next);
        if change < cfg.pagerank_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("pagerank did not converge in {iterations} iterations");
    }
    normalize_l1(&mut rank);
    Iterated {
        value: rank,
        iterations,
        converged,
    }
}

/// Katz centrality `x = alpha * A^T x + beta`, started from zero, stopped on
/// an L1 change below `katz_tol * N`, and scaled to unit L2 norm.
pub fn compute_katz(g: &DiGraph, cfg: &HeuristicConfig) -> Result<Iterated<Vec<f64>>> {
    let n = g.node_count();
    let (alpha, beta) = (cfg.katz_alpha, cfg.katz_beta);
    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        for v in 0..n {
            let s: f64 = g.in_neighbors(v).iter().map(|&u| x[u as usize]).sum();
            next[v] = alpha * s + beta;
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > KATZ_DIVERGENCE_NORM {
            return Err(Error::KatzDiverged { norm, iterations });
        }
        let change = l1_diff(&next, &x);
        std::mem::swap(&mut x, &mut next);
        if change < cfg.katz_tol * n as f64 {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("katz did not converge in {iterations} iterations");
    }
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    Ok(Iterated {
        value: x,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitsScores {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
}

/// HITS by alternating `a = A^T h`, `h = A a` with L1 normalization of
/// both vectors every round.
pub fn compute_hits(g: &DiGraph, cfg: &HeuristicConfig) -> Result<Iterated<HitsScores>> {
    let n = g.node_count();
    if g.arc_count() == 0 {
        return Err(Error::InvalidArgument("HITS needs at least one edge".into()));
    }
    let mut hub = vec![1.0 / n as f64; n];
    let mut auth = vec![0.0; n];
    let mut new_hub = vec![0.0; n];
    let mut new_auth = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        iterations += 1;
        for v in 0..n {
            new_auth[v] = g.in_neighbors(v).iter().map(|&u| hub[u as usize]).sum();
        }
        normalize_l1(&mut new_auth);
        for u in 0..n {
            new_hub[u] = g.out_neighbors(u).iter().map(|&v| new_auth[v as usize]).sum();
        }
        normalize_l1(&mut new_hub);
        let change_h = l1_diff(&new_hub, &hub);
        let change_a = l1_diff(&new_auth, &auth);
        std::mem::swap(&mut hub, &mut new_hub);
        std::mem::swap(&mut auth, &mut new_auth);
        if change_h < cfg.hits_tol && change_a < cfg.hits_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("hits did not converge in {iterations} iterations");
    }
    Ok(Iterated {
        value: HitsScores { hub, authority: auth },
        iterations,
        converged,
    })
}
