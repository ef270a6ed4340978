//! Rank-k truncated SVD of the binary adjacency matrix by randomized
//! subspace iteration.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::DiGraph;

pub const OVERSAMPLING: usize = 8;
pub const POWER_ITERATIONS: usize = 7;
/// Extra iterations continue until the leading Ritz values settle to this
/// relative change, or the cap is hit.
pub const RITZ_TOL: f64 = 1e-13;
pub const MAX_POWER_ITERATIONS: usize = 500;

/// `A ~ U diag(S) V` with `U` of shape N x k and `V` of shape k x N.
///
/// Column `j` of `V` belongs to node `j`. Each column of `U` has its
/// largest-magnitude entry non-negative; `V` is flipped to match.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.s.len()
    }
}

/// `A M` where `A[u][v] = 1` iff `u -> v`.
fn adj_mul(g: &DiGraph, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.node_count();
    let mut out = DMatrix::zeros(n, m.ncols());
    for j in 0..m.ncols() {
        let src = m.column(j);
        let mut dst = out.column_mut(j);
        for u in 0..n {
            dst[u] = g.out_neighbors(u).iter().map(|&v| src[v as usize]).sum();
        }
    }
    out
}

/// `A^T M`.
fn adj_t_mul(g: &DiGraph, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.node_count();
    let mut out = DMatrix::zeros(n, m.ncols());
    for j in 0..m.ncols() {
        let src = m.column(j);
        let mut dst = out.column_mut(j);
        for v in 0..n {
            dst[v] = g.in_neighbors(v).iter().map(|&u| src[u as usize]).sum();
        }
    }
    out
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Top-k singular values of `A Z` for orthonormal `Z`.
fn leading_values(az: &DMatrix<f64>, k: usize) -> Vec<f64> {
    let mut sv: Vec<f64> = az.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.truncate(k);
    sv
}

pub fn compute_svd(g: &DiGraph, k: usize, seed: u64) -> Result<SvdFactors> {
    let n = g.node_count();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("svd rank {k} must be in 1..={n}")));
    }
    let l = (k + OVERSAMPLING).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = DMatrix::from_fn(n, l, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormal_basis(adj_mul(g, &omega));
    let mut previous: Option<Vec<f64>> = None;
    for it in 0..MAX_POWER_ITERATIONS {
        let z = orthonormal_basis(adj_t_mul(g, &q));
        let az = adj_mul(g, &z);
        if it + 1 >= POWER_ITERATIONS {
            let ritz = leading_values(&az, k);
            let settled = previous.as_ref().is_some_and(|p| {
                let scale = ritz[0].max(f64::MIN_POSITIVE);
                p.iter().zip(&ritz).all(|(a, b)| (a - b).abs() <= RITZ_TOL * scale.max(b.abs()))
            });
            previous = Some(ritz);
            q = orthonormal_basis(az);
            if settled {
                break;
            }
        } else {
            q = orthonormal_basis(az);
        }
    }

    // B = Q^T A, so B^T = A^T Q (N x l); factor the tall side.
    let bt = adj_t_mul(g, &q);
    let svd = bt.svd(true, true);
    let (left, right_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::InvalidArgument("svd of projected matrix failed".into())),
    };
    // B^T = W S Z^T  =>  A ~ (Q Z) S W^T
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let order = &order[..k];

    let z = right_t.transpose();
    let qz = &q * &z;
    let mut u = DMatrix::zeros(n, k);
    let mut v = DMatrix::zeros(k, n);
    let mut s = Vec::with_capacity(k);
    for (col, &idx) in order.iter().enumerate() {
        let mut ucol = qz.column(idx).clone_owned();
        let mut vrow = left.column(idx).transpose();
        let pivot = ucol
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            ucol.neg_mut();
            vrow.neg_mut();
        }
        u.set_column(col, &ucol);
        v.set_row(col, &vrow);
        s.push(svd.singular_values[idx].max(0.0));
    }
    Ok(SvdFactors { u, s, v })
}
