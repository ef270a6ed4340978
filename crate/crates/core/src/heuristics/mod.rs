//! The 56 per-edge heuristic features.
//!
//! Node-level scores (PageRank, Katz, HITS), the truncated SVD and the
//! component labels are computed once per graph in [`HeuristicContext`];
//! each edge row is then a cheap lookup plus one shortest-path query.

mod centrality;
mod similarity;
mod svd;

use rayon::prelude::*;

pub use centrality::{compute_hits, compute_katz, compute_pagerank, HitsScores, Iterated, KATZ_DIVERGENCE_NORM};
pub use similarity::{adamic_adar, intersection_size, set_similarity, weight_features};
pub use svd::{compute_svd, SvdFactors, OVERSAMPLING, POWER_ITERATIONS};

use crate::error::{Error, Result};
use crate::features::FeatureTable;
use crate::graph::{weakly_connected_components, ComponentLabels, DiGraph, NodeId, PathFinder};
use crate::sampling::LabeledEdge;

pub const HEURISTIC_DIM: usize = 56;
/// SVD slots per node in the feature layout.
pub const SVD_SLOTS: usize = 6;

/// Slot indices of [`HeuristicVector`].
pub mod slot {
    pub const JACCARD_FOLLOWERS: usize = 0;
    pub const JACCARD_FOLLOWEES: usize = 1;
    pub const COSINE_FOLLOWERS: usize = 2;
    pub const COSINE_FOLLOWEES: usize = 3;
    pub const PAGERANK_SRC: usize = 4;
    pub const PAGERANK_DST: usize = 5;
    pub const SHORTEST_PATH: usize = 6;
    pub const SAME_COMMUNITY: usize = 7;
    pub const FOLLOWS_BACK: usize = 8;
    pub const ADAMIC_ADAR: usize = 9;
    pub const KATZ_SRC: usize = 10;
    pub const KATZ_DST: usize = 11;
    pub const AUTH_SRC: usize = 12;
    pub const AUTH_DST: usize = 13;
    pub const HUB_SRC: usize = 14;
    pub const HUB_DST: usize = 15;
    pub const FOLLOWERS_SRC: usize = 16;
    pub const FOLLOWEES_SRC: usize = 17;
    pub const FOLLOWERS_DST: usize = 18;
    pub const FOLLOWEES_DST: usize = 19;
    pub const COMMON_FOLLOWERS: usize = 20;
    pub const COMMON_FOLLOWEES: usize = 21;
    pub const WEIGHTS: usize = 22;
    pub const U_SRC: usize = 28;
    pub const U_DST: usize = 34;
    pub const V_SRC: usize = 40;
    pub const V_DST: usize = 46;
    pub const U_DOT: usize = 52;
    pub const V_DOT: usize = 53;
    pub const IN_DEGREE_PRODUCT: usize = 54;
    pub const OUT_DEGREE_PRODUCT: usize = 55;
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicConfig {
    pub pagerank_damping: f64,
    pub pagerank_tol: f64,
    pub katz_alpha: f64,
    pub katz_beta: f64,
    pub katz_tol: f64,
    pub hits_tol: f64,
    pub max_iters: usize,
    pub svd_rank: usize,
    pub svd_seed: u64,
    pub missing_path_sentinel: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            pagerank_damping: 0.85,
            pagerank_tol: 1e-6,
            katz_alpha: 0.1,
            katz_beta: 1.0,
            katz_tol: 1e-6,
            hits_tol: 1e-8,
            max_iters: 1000,
            svd_rank: SVD_SLOTS,
            svd_seed: 0,
            missing_path_sentinel: -1.0,
        }
    }
}

impl HeuristicConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.pagerank_damping > 0.0 && self.pagerank_damping < 1.0) {
            return bad("pagerank damping must be in (0, 1)");
        }
        if self.svd_rank == 0 || self.svd_rank > SVD_SLOTS {
            return bad("svd rank must be in 1..=6");
        }
        if !(self.pagerank_tol > 0.0 && self.katz_tol > 0.0 && self.hits_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        if !self.missing_path_sentinel.is_finite() {
            return bad("missing path sentinel must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeScores {
    pub pagerank: Vec<f64>,
    pub katz: Vec<f64>,
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
}

impl NodeScores {
    pub fn compute(g: &DiGraph, cfg: &HeuristicConfig) -> Result<Self> {
        let pagerank = compute_pagerank(g, cfg).value;
        let katz = compute_katz(g, cfg)?.value;
        let hits = compute_hits(g, cfg)?.value;
        Ok(NodeScores {
            pagerank,
            katz,
            hub: hits.hub,
            authority: hits.authority,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicVector(pub [f64; HEURISTIC_DIM]);

impl HeuristicVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for HeuristicVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Everything precomputed over one (training) graph.
#[derive(Debug, Clone)]
pub struct HeuristicContext<'g> {
    pub graph: &'g DiGraph,
    pub scores: NodeScores,
    pub svd: SvdFactors,
    pub components: ComponentLabels,
    pub sentinel: f64,
}

impl<'g> HeuristicContext<'g> {
    pub fn new(graph: &'g DiGraph, cfg: &HeuristicConfig) -> Result<Self> {
        cfg.validate()?;
        let scores = NodeScores::compute(graph, cfg)?;
        let rank = cfg.svd_rank.min(graph.node_count());
        let svd = compute_svd(graph, rank, cfg.svd_seed)?;
        let components = weakly_connected_components(graph);
        Ok(HeuristicContext {
            graph,
            scores,
            svd,
            components,
            sentinel: cfg.missing_path_sentinel,
        })
    }

    pub fn from_parts(
        graph: &'g DiGraph,
        scores: NodeScores,
        svd: SvdFactors,
        components: ComponentLabels,
        sentinel: f64,
    ) -> Result<Self> {
        let n = graph.node_count();
        let lens = [
            scores.pagerank.len(),
            scores.katz.len(),
            scores.hub.len(),
            scores.authority.len(),
            svd.u.nrows(),
            svd.v.ncols(),
            components.label.len(),
        ];
        if let Some(&bad) = lens.iter().find(|&&l| l != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: bad,
            });
        }
        if svd.rank() > SVD_SLOTS {
            return Err(Error::InvalidArgument("svd rank exceeds the 6 feature slots".into()));
        }
        Ok(HeuristicContext {
            graph,
            scores,
            svd,
            components,
            sentinel,
        })
    }

    /// Feature row for the candidate edge `u -> v`, reusing `finder`'s
    /// scratch buffers for the shortest-path slot.
    pub fn featurize_with(&self, finder: &mut PathFinder, u: NodeId, v: NodeId) -> Result<HeuristicVector> {
        let g = self.graph;
        g.check_node(u)?;
        g.check_node(v)?;
        let mut h = [0.0; HEURISTIC_DIM];

        let (followers_u, followers_v) = (g.in_neighbors(u), g.in_neighbors(v));
        let (followees_u, followees_v) = (g.out_neighbors(u), g.out_neighbors(v));
        let (jf, cf) = set_similarity(followers_u, followers_v);
        let (je, ce) = set_similarity(followees_u, followees_v);
        h[slot::JACCARD_FOLLOWERS] = jf;
        h[slot::JACCARD_FOLLOWEES] = je;
        h[slot::COSINE_FOLLOWERS] = cf;
        h[slot::COSINE_FOLLOWEES] = ce;

        h[slot::PAGERANK_SRC] = self.scores.pagerank[u];
        h[slot::PAGERANK_DST] = self.scores.pagerank[v];

        h[slot::SHORTEST_PATH] = finder
            .distance(g, u, v, usize::MAX, true, false)
            .map_or(self.sentinel, |d| d as f64);
        h[slot::SAME_COMMUNITY] = f64::from(u8::from(self.components.label[u] == self.components.label[v]));
        h[slot::FOLLOWS_BACK] = f64::from(u8::from(g.has_edge(v, u)));
        h[slot::ADAMIC_ADAR] = adamic_adar(g, u, v);
        h[slot::KATZ_SRC] = self.scores.katz[u];
        h[slot::KATZ_DST] = self.scores.katz[v];
        h[slot::AUTH_SRC] = self.scores.authority[u];
        h[slot::AUTH_DST] = self.scores.authority[v];
        h[slot::HUB_SRC] = self.scores.hub[u];
        h[slot::HUB_DST] = self.scores.hub[v];

        h[slot::FOLLOWERS_SRC] = followers_u.len() as f64;
        h[slot::FOLLOWEES_SRC] = followees_u.len() as f64;
        h[slot::FOLLOWERS_DST] = followers_v.len() as f64;
        h[slot::FOLLOWEES_DST] = followees_v.len() as f64;
        h[slot::COMMON_FOLLOWERS] = intersection_size(followers_u, followers_v) as f64;
        h[slot::COMMON_FOLLOWEES] = intersection_size(followees_u, followees_v) as f64;

        h[slot::WEIGHTS..slot::WEIGHTS + 6].copy_from_slice(&weight_features(g, u, v));

        let k = self.svd.rank();
        let (svd_u, svd_v) = (&self.svd.u, &self.svd.v);
        let (mut u_dot, mut v_dot) = (0.0, 0.0);
        for j in 0..k {
            h[slot::U_SRC + j] = svd_u[(u, j)];
            h[slot::U_DST + j] = svd_u[(v, j)];
            h[slot::V_SRC + j] = svd_v[(j, u)];
            h[slot::V_DST + j] = svd_v[(j, v)];
            u_dot += svd_u[(u, j)] * svd_u[(v, j)];
            v_dot += svd_v[(j, u)] * svd_v[(j, v)];
        }
        h[slot::U_DOT] = u_dot;
        h[slot::V_DOT] = v_dot;

        h[slot::IN_DEGREE_PRODUCT] = h[slot::FOLLOWERS_SRC] * h[slot::FOLLOWERS_DST];
        h[slot::OUT_DEGREE_PRODUCT] = h[slot::FOLLOWEES_SRC] * h[slot::FOLLOWEES_DST];
        Ok(HeuristicVector(h))
    }
}

/// Single-edge convenience wrapper around [`HeuristicContext::featurize_with`].
pub fn featurize_edge(ctx: &HeuristicContext<'_>, u: NodeId, v: NodeId) -> Result<HeuristicVector> {
    ctx.featurize_with(&mut PathFinder::new(ctx.graph.node_count()), u, v)
}

/// Feature rows for a batch of edges, in input order.
pub fn featurize_edges(ctx: &HeuristicContext<'_>, edges: &[LabeledEdge]) -> Result<FeatureTable> {
    let n = ctx.graph.node_count();
    let rows: Vec<HeuristicVector> = edges
        .par_iter()
        .map_init(|| PathFinder::new(n), |finder, e| ctx.featurize_with(finder, e.src, e.dst))
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(rows.len() * HEURISTIC_DIM);
    for r in &rows {
        data.extend_from_slice(&r.0);
    }
    FeatureTable::single_block("H", HEURISTIC_DIM, data, edges.iter().map(|e| e.label).collect())
}

/// Precompute over `g` and featurize every edge.
pub fn featurize_dataset(g: &DiGraph, edges: &[LabeledEdge], cfg: &HeuristicConfig) -> Result<FeatureTable> {
    let ctx = HeuristicContext::new(g, cfg)?;
    featurize_edges(&ctx, edges)
}
