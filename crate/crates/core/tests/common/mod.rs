//! Independent oracles and property checks shared by the integration tests
//! and the acceptance suite. Every check returns `Err(description)` on the
//! first violation.

#![allow(dead_code)]

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linkpred::graph::DiGraph;
use linkpred::heuristics::{compute_hits, compute_katz, compute_pagerank, compute_svd, HeuristicConfig};
use linkpred::model::{Activation, Network, TowerSpec};
use linkpred::sampling::{assemble_dataset, LabeledEdge, SplitDataset};

pub type Check = Result<(), String>;

/// Erdos-Renyi style graph with at least one edge.
pub fn random_graph(n: usize, p: f64, directed: bool, seed: u64) -> DiGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && (directed || u < v) && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, n - 1));
    }
    DiGraph::from_dense_edges(n, &edges, directed).unwrap()
}

pub fn adjacency(g: &DiGraph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for u in 0..n {
        for &v in g.out_neighbors(u) {
            a[(u, v as usize)] = 1.0;
        }
    }
    a
}

/// Plain BFS over a dense adjacency built from scratch, ignoring direction.
pub fn undirected_distance_oracle(g: &DiGraph, src: usize, dst: usize) -> Option<usize> {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut dist = vec![usize::MAX; n];
    dist[src] = 0;
    let mut q = VecDeque::from([src]);
    while let Some(x) = q.pop_front() {
        if x == dst {
            return Some(dist[x]);
        }
        for &y in &adj[x] {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                q.push_back(y);
            }
        }
    }
    None
}

/// Weak components by union-find with path halving.
pub fn union_find_components(g: &DiGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (u, v) in g.edges() {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
        }
    }
    (0..n).map(|x| find(&mut parent, x)).collect()
}

/// Two labelings describe the same partition.
pub fn same_partition(a: &[usize], b: &[usize]) -> bool {
    use std::collections::HashMap;
    let mut ab = HashMap::new();
    let mut ba = HashMap::new();
    a.iter().zip(b).all(|(x, y)| *ab.entry(*x).or_insert(*y) == *y && *ba.entry(*y).or_insert(*x) == *x)
}

/// Test graphs for the centrality checks: cycles, stars, random digraphs.
pub fn centrality_graphs() -> Vec<DiGraph> {
    let mut gs = vec![
        DiGraph::from_dense_edges(3, &[(0, 1), (1, 2), (2, 0)], true).unwrap(),
        DiGraph::from_dense_edges(4, &[(0, 1), (0, 2), (0, 3)], true).unwrap(),
        DiGraph::from_dense_edges(5, &[(0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4)], true).unwrap(),
    ];
    for seed in 0..40 {
        let n = 2 + (seed as usize * 7) % 60;
        gs.push(random_graph(n, 0.15, seed % 3 != 0, seed));
    }
    gs
}

pub fn check_score_sums() -> Check {
    let cfg = HeuristicConfig::default();
    for (i, g) in centrality_graphs().iter().enumerate() {
        let pr: f64 = compute_pagerank(g, &cfg).value.iter().sum();
        let h = compute_hits(g, &cfg).map_err(|e| e.to_string())?.value;
        let (hub, auth): (f64, f64) = (h.hub.iter().sum(), h.authority.iter().sum());
        for (name, s) in [("pagerank", pr), ("hub", hub), ("authority", auth)] {
            if (s - 1.0).abs() > 1e-9 {
                return Err(format!("graph {i}: {name} sums to {s}"));
            }
        }
    }
    let c3 = &centrality_graphs()[0];
    let pr = compute_pagerank(c3, &cfg).value;
    let h = compute_hits(c3, &cfg).map_err(|e| e.to_string())?.value;
    for x in pr.iter().chain(&h.hub).chain(&h.authority) {
        if (x - 1.0 / 3.0).abs() > 1e-12 {
            return Err(format!("3-cycle score {x} is not 1/3"));
        }
    }
    Ok(())
}

/// Upper bound on the spectral radius: the smaller of the largest row and
/// column sums.
fn spectral_bound(a: &DMatrix<f64>) -> f64 {
    let rows = a.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let cols = a.column_iter().map(|c| c.sum()).fold(0.0, f64::max);
    rows.min(cols)
}

/// Katz against `(I - alpha A^T) x = beta 1`, L2-normalized, on every graph
/// with N <= 20 in the sample. Alpha is 0.1 unless that would put the series
/// near or past divergence.
pub fn check_katz_oracle(cfg_tol: f64) -> Check {
    let mut graphs = centrality_graphs();
    for seed in 100..160 {
        graphs.push(random_graph(2 + (seed as usize % 19), 0.25, seed % 2 == 0, seed));
    }
    let mut checked = 0;
    for (i, g) in graphs.iter().enumerate().filter(|(_, g)| g.node_count() <= 20) {
        let a = adjacency(g);
        let rho = spectral_bound(&a);
        let alpha = if 0.1 * rho < 0.8 { 0.1 } else { 0.8 / rho };
        let cfg = HeuristicConfig {
            katz_alpha: alpha,
            katz_tol: cfg_tol,
            ..HeuristicConfig::default()
        };
        let n = g.node_count();
        let m = DMatrix::<f64>::identity(n, n) - a.transpose() * alpha;
        let mut x = m.lu().solve(&DMatrix::from_element(n, 1, 1.0)).ok_or("singular Katz system")?;
        let norm = x.norm();
        x /= norm;
        let got = compute_katz(g, &cfg).map_err(|e| format!("graph {i}: {e}"))?.value;
        for (k, (&o, &y)) in x.iter().zip(&got).enumerate() {
            let rel = (y - o).abs() / o.abs();
            if rel > 1e-6 {
                return Err(format!("graph {i} (N={n}, alpha={alpha}) node {k}: {y} vs {o}, relative error {rel:e}"));
            }
        }
        checked += 1;
    }
    if checked < 50 {
        return Err(format!("only {checked} graphs checked"));
    }
    Ok(())
}

/// Largest singular-value relative error of the truncated SVD against a
/// dense decomposition, over random graphs with N <= 64.
pub fn check_svd_oracle() -> Check {
    for seed in 0..30u64 {
        let n = 6 + (seed as usize * 11) % 59;
        let g = random_graph(n, 0.1 + 0.02 * (seed % 5) as f64, seed % 4 != 0, 500 + seed);
        let k = 6.min(n);
        let got = compute_svd(&g, k, seed).map_err(|e| e.to_string())?;
        let mut oracle: Vec<f64> = adjacency(&g).singular_values().iter().copied().collect();
        oracle.sort_by(|a, b| b.total_cmp(a));
        for i in 0..k {
            let (s, o) = (got.s[i], oracle[i]);
            let err = if o > 1e-9 { (s - o).abs() / o } else { (s - o).abs() };
            if err > 1e-6 {
                return Err(format!("seed {seed} (N={n}) sigma_{i}: {s} vs {o}, error {err:e}"));
            }
        }
        let utu = got.u.transpose() * &got.u;
        let vvt = &got.v * got.v.transpose();
        let eye = DMatrix::<f64>::identity(k, k);
        let rank = got.s.iter().filter(|&&s| s > 1e-9).count();
        let sub = |m: &DMatrix<f64>| (m.view((0, 0), (rank, rank)) - eye.view((0, 0), (rank, rank))).abs().max();
        if sub(&utu) > 1e-6 || sub(&vvt) > 1e-6 {
            return Err(format!("seed {seed}: factors not orthonormal"));
        }
    }
    Ok(())
}

/// Five synthetic families used by the split checks.
pub fn split_graphs() -> Vec<(&'static str, DiGraph)> {
    let cycle: Vec<_> = (0..40).map(|i| (i, (i + 1) % 40)).collect();
    let mut grid = Vec::new();
    for r in 0..8 {
        for c in 0..8 {
            let u = r * 8 + c;
            if c + 1 < 8 {
                grid.push((u, u + 1));
            }
            if r + 1 < 8 {
                grid.push((u, u + 8));
            }
        }
    }
    let mut communities = Vec::new();
    for b in 0..3 {
        for i in 0..15 {
            for j in (i + 1)..15 {
                if (i * j + b) % 3 != 0 {
                    communities.push((b * 15 + i, b * 15 + j));
                }
            }
        }
    }
    communities.extend([(0, 15), (15, 30)]);
    let mut ring_chords = Vec::new();
    for i in 0..60 {
        ring_chords.push((i, (i + 1) % 60));
        ring_chords.push((i, (i + 7) % 60));
    }
    vec![
        ("directed cycle", DiGraph::from_dense_edges(40, &cycle, true).unwrap()),
        ("grid", DiGraph::from_dense_edges(64, &grid, false).unwrap()),
        ("random digraph", random_graph(80, 0.05, true, 77)),
        ("three communities", DiGraph::from_dense_edges(45, &communities, true).unwrap()),
        ("ring with chords", DiGraph::from_dense_edges(60, &ring_chords, false).unwrap()),
    ]
}

fn key(g: &DiGraph, e: &LabeledEdge) -> (usize, usize, u8) {
    if g.is_directed() {
        (e.src, e.dst, e.label)
    } else {
        (e.src.min(e.dst), e.src.max(e.dst), e.label)
    }
}

/// Node preservation, disjointness, balance and the negative-distance rule
/// for one assembled dataset.
pub fn check_dataset(g: &DiGraph, d: &SplitDataset) -> Check {
    use std::collections::HashSet;
    if d.train_graph.node_count() != g.node_count() {
        return Err("train graph lost nodes".into());
    }
    for u in 0..g.node_count() {
        if !g.neighbors(u).is_empty() && d.train_graph.neighbors(u).is_empty() {
            return Err(format!("node {u} isolated in the train graph"));
        }
    }
    let train: HashSet<_> = d.train.iter().map(|e| key(g, e)).collect();
    let test: HashSet<_> = d.test.iter().map(|e| key(g, e)).collect();
    if train.len() != d.train.len() || test.len() != d.test.len() {
        return Err("duplicate labelled edges".into());
    }
    let pairs = |s: &HashSet<(usize, usize, u8)>| s.iter().map(|&(a, b, _)| (a, b)).collect::<HashSet<_>>();
    if pairs(&train).intersection(&pairs(&test)).next().is_some() {
        return Err("train and test share a pair".into());
    }
    for e in &d.test {
        if e.is_positive() && d.train_graph.has_edge(e.src, e.dst) {
            return Err(format!("test positive {}->{} present in the train graph", e.src, e.dst));
        }
    }
    for (name, part) in [("train", &d.train), ("test", &d.test)] {
        let (pos, neg) = SplitDataset::count(part);
        if pos == 0 {
            continue;
        }
        let ratio = neg as f64 / pos as f64;
        if !(0.9..=1.1).contains(&ratio) {
            return Err(format!("{name} balance {neg}/{pos} = {ratio:.3}"));
        }
    }
    check_negatives(g, d.train.iter().chain(&d.test))
}

/// Every negative must be at undirected distance >= 3 (or disconnected).
/// The oracle is a depth-2 BFS over its own adjacency lists, so it stays
/// cheap on large graphs.
pub fn check_negatives<'a>(g: &DiGraph, edges: impl Iterator<Item = &'a LabeledEdge>) -> Check {
    let n = g.node_count();
    let mut adj = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![usize::MAX; n];
    for (i, e) in edges.filter(|e| !e.is_positive()).enumerate() {
        if e.src == e.dst {
            return Err(format!("negative self-pair {}", e.src));
        }
        seen[e.src] = i;
        let mut frontier = vec![e.src];
        for depth in 1..=2 {
            let mut next = Vec::new();
            for &x in &frontier {
                for &y in &adj[x] {
                    if seen[y] != i {
                        if y == e.dst {
                            return Err(format!("negative {}-{} at distance {depth}", e.src, e.dst));
                        }
                        seen[y] = i;
                        next.push(y);
                    }
                }
            }
            frontier = next;
        }
    }
    Ok(())
}

pub fn check_split_invariants(seeds: u64) -> Check {
    for (name, g) in split_graphs() {
        for seed in 0..seeds {
            let d = assemble_dataset(&g, 0.1, seed).map_err(|e| format!("{name} seed {seed}: {e}"))?;
            check_dataset(&g, &d).map_err(|e| format!("{name} seed {seed}: {e}"))?;
        }
    }
    Ok(())
}

/// Central-difference gradient check on randomized micro-models covering
/// dense stacks of both activations, Hadamard and concatenation.
pub fn check_gradients() -> Check {
    let io = [("H", 5), ("S", 4), ("D", 4)];
    let archs = [
        "H",
        "f2(H)",
        "e(S,D)",
        "H|e(S,D)",
        "e(f2(S),f2(D))",
        "e(f2(H),f1(S),f1(D))",
        "e(f1(H),f2(e(f2(S),f2(D))))",
        "f[6,3](S)|f3(D)|H",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for arch in archs {
        for act in [Activation::Relu, Activation::Elu] {
            for trial in 0..3u64 {
                let spec = TowerSpec::new(arch, &io, act, 5, &[4, 3]).map_err(|e| e.to_string())?;
                let net = Network::compile(&spec).map_err(|e| e.to_string())?;
                let rows = 6;
                let x = ndarray::Array2::from_shape_simple_fn((rows, net.input_width()), || rng.random_range(-1.5..1.5));
                let y: Vec<f64> = (0..rows).map(|i| ((i + trial as usize) % 2) as f64).collect();
                let mut p = net.init_params(trial);
                for l in &mut p.layers {
                    l.bias.mapv_inplace(|_| rng.random_range(-0.2..0.2));
                }
                let (_, g) = net.loss_and_grad(&p, x.view(), &y).map_err(|e| e.to_string())?;
                let analytic: Vec<f64> = g.values().copied().collect();
                let h = 1e-5;
                for (k, &a) in analytic.iter().enumerate() {
                    let mut plus = p.clone();
                    *plus.values_mut().nth(k).unwrap() += h;
                    let mut minus = p.clone();
                    *minus.values_mut().nth(k).unwrap() -= h;
                    let lp = net.loss_and_grad(&plus, x.view(), &y).unwrap().0;
                    let lm = net.loss_and_grad(&minus, x.view(), &y).unwrap().0;
                    let num = (lp - lm) / (2.0 * h);
                    let rel = (a - num).abs() / a.abs().max(num.abs()).max(1e-7);
                    if rel > 1e-3 {
                        return Err(format!("{arch} ({}) trial {trial} param {k}: {a} vs {num}, relative error {rel:e}", act.name()));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Negatives drawn directly from the sampler on sparse, partly disconnected
/// random graphs, each confirmed by the distance oracle.
pub fn check_sampled_negatives() -> Check {
    for seed in 0..20u64 {
        let directed = seed % 2 == 0;
        let g = random_graph(200, 0.004 + 0.002 * (seed % 5) as f64, directed, 900 + seed);
        let count = g.edge_count().max(10);
        let sample = linkpred::sampling::sample_negative_edges(&g, count, seed).map_err(|e| e.to_string())?;
        let edges: Vec<_> = sample.pairs.iter().map(|&(u, v)| LabeledEdge::negative(u, v)).collect();
        check_negatives(&g, edges.iter()).map_err(|e| format!("seed {seed}: {e}"))?;
        for e in &edges {
            if undirected_distance_oracle(&g, e.src, e.dst).is_some_and(|d| d < 3) {
                return Err(format!("seed {seed}: full BFS rejects {}-{}", e.src, e.dst));
            }
        }
    }
    Ok(())
}
