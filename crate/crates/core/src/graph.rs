//! Edge-list ingestion and the immutable directed graph every other stage
//! works on.
//!
//! Raw ids from the input file are relabeled to dense ids `0..N` in order of
//! first appearance. Self-loops and duplicate edges are dropped at build time.
//! Adjacency is stored as three CSR arrays (successors, predecessors and the
//! sorted union of both), each with sorted, duplicate-free rows.

use std::collections::{HashMap, VecDeque};
use std::io::BufRead;

use crate::error::{Error, Result};

pub type NodeId = usize;

/// Edge pairs as read from the file, before any cleaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEdgeList {
    pub edges: Vec<(u64, u64)>,
    pub directed: bool,
}

/// Parse the SNAP edge-list format: `#` comments, blank lines, and one
/// whitespace-separated integer pair per data line.
///
/// Commas are accepted as separators as well so the MUSAE `*_edges.csv`
/// files can be read; a first line made only of non-numeric tokens is taken
/// as a CSV header when `skip_header` is set.
pub fn parse_edge_list<R: BufRead>(reader: R, directed: bool, skip_header: bool) -> Result<RawEdgeList> {
    let mut edges = Vec::new();
    let mut header_pending = skip_header;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if header_pending {
            header_pending = false;
            if tokens.iter().all(|t| t.parse::<u64>().is_err()) {
                continue;
            }
        }
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 tokens, found {}", tokens.len()),
            });
        }
        let parse = |t: &str| {
            t.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{t}` is not a non-negative integer"),
            })
        };
        edges.push((parse(tokens[0])?, parse(tokens[1])?));
    }
    Ok(RawEdgeList { edges, directed })
}

pub fn parse_edge_str(text: &str, directed: bool) -> Result<RawEdgeList> {
    parse_edge_list(text.as_bytes(), directed, false)
}

/// Compressed sparse rows: `targets[offsets[u]..offsets[u + 1]]` is row `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// Rows are sorted and deduplicated.
    fn from_pairs(n: usize, pairs: &[(u32, u32)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(u, _) in pairs {
            counts[u as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut targets = vec![0u32; pairs.len()];
        for &(u, v) in pairs {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut out = Vec::with_capacity(targets.len());
        for u in 0..n {
            let row = &mut targets[counts[u]..counts[u + 1]];
            row.sort_unstable();
            let mut last = None;
            for &v in row.iter() {
                if last != Some(v) {
                    out.push(v);
                    last = Some(v);
                }
            }
            offsets.push(out.len());
        }
        Csr {
            offsets,
            targets: out,
        }
    }

    #[inline]
    fn row(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    fn nnz(&self) -> usize {
        self.targets.len()
    }
}

/// Immutable simple directed graph over dense ids `0..node_count`.
///
/// Undirected graphs store every edge in both directions; `edge_count` then
/// counts each undirected edge once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    out_adj: Csr,
    in_adj: Csr,
    und_adj: Csr,
    raw_ids: Vec<u64>,
    directed: bool,
}

impl DiGraph {
    /// Relabel, clean and index a raw edge list.
    pub fn build(raw: &RawEdgeList) -> Result<Self> {
        if raw.edges.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut id_map: HashMap<u64, u32> = HashMap::new();
        let mut raw_ids = Vec::new();
        let mut dense = |r: u64| -> u32 {
            *id_map.entry(r).or_insert_with(|| {
                raw_ids.push(r);
                (raw_ids.len() - 1) as u32
            })
        };
        let mut pairs = Vec::with_capacity(raw.edges.len());
        for &(s, d) in &raw.edges {
            let (u, v) = (dense(s), dense(d));
            if u != v {
                pairs.push((u as usize, v as usize));
            }
        }
        let mut g = Self::from_dense_edges(raw_ids.len(), &pairs, raw.directed)?;
        g.raw_ids = raw_ids;
        Ok(g)
    }

    /// Build over an explicit dense node set. Nodes without edges are kept.
    pub fn from_dense_edges(node_count: usize, edges: &[(NodeId, NodeId)], directed: bool) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        if node_count > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!("{node_count} nodes exceed the u32 id space")));
        }
        let mut arcs = Vec::with_capacity(edges.len() * if directed { 1 } else { 2 });
        for &(u, v) in edges {
            if u >= node_count {
                return Err(Error::InvalidNode(u));
            }
            if v >= node_count {
                return Err(Error::InvalidNode(v));
            }
            if u == v {
                continue;
            }
            arcs.push((u as u32, v as u32));
            if !directed {
                arcs.push((v as u32, u as u32));
            }
        }
        let out_adj = Csr::from_pairs(node_count, &arcs);
        let rev: Vec<(u32, u32)> = arcs.iter().map(|&(u, v)| (v, u)).collect();
        let in_adj = Csr::from_pairs(node_count, &rev);
        let und_adj = if directed {
            let mut both = arcs;
            both.extend_from_slice(&rev);
            Csr::from_pairs(node_count, &both)
        } else {
            out_adj.clone()
        };
        Ok(DiGraph {
            out_adj,
            in_adj,
            und_adj,
            raw_ids: (0..node_count as u64).collect(),
            directed,
        })
    }

    /// Replace the dense-to-raw id map; one raw id per node.
    pub fn with_raw_ids(mut self, raw_ids: Vec<u64>) -> Result<Self> {
        if raw_ids.len() != self.node_count() {
            return Err(Error::DimensionMismatch {
                expected: self.node_count(),
                actual: raw_ids.len(),
            });
        }
        self.raw_ids = raw_ids;
        Ok(self)
    }

    /// Same node set and id map, different edges.
    pub fn with_edges(&self, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Self::from_dense_edges(self.node_count(), edges, self.directed)?;
        g.raw_ids = self.raw_ids.clone();
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.raw_ids.len()
    }

    /// Number of stored arcs, i.e. the sum of all out-degrees.
    pub fn arc_count(&self) -> usize {
        self.out_adj.nnz()
    }

    /// Number of edges: arcs for directed graphs, unordered pairs otherwise.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.arc_count()
        } else {
            self.arc_count() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    /// Successors ("followees").
    #[inline]
    pub fn out_neighbors(&self, u: NodeId) -> &[u32] {
        self.out_adj.row(u)
    }

    /// Predecessors ("followers").
    #[inline]
    pub fn in_neighbors(&self, u: NodeId) -> &[u32] {
        self.in_adj.row(u)
    }

    /// Sorted union of predecessors and successors.
    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[u32] {
        self.und_adj.row(u)
    }

    #[inline]
    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_adj.row(u).len()
    }

    #[inline]
    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_adj.row(u).len()
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.out_adj.row(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn raw_id(&self, u: NodeId) -> u64 {
        self.raw_ids[u]
    }

    pub fn raw_ids(&self) -> &[u64] {
        &self.raw_ids
    }

    pub fn check_node(&self, u: NodeId) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode(u))
        }
    }

    /// Edges in canonical form: every arc for directed graphs, `(u, v)` with
    /// `u < v` for undirected ones. Ordered by source then target.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.node_count() {
            for &v in self.out_neighbors(u) {
                let v = v as usize;
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Reusable scratch state for repeated shortest-path queries on one graph.
///
/// Runs a bidirectional, level-synchronous BFS that always grows the side
/// with the smaller frontier.
#[derive(Debug, Clone)]
pub struct PathFinder {
    stamp: u32,
    fwd_mark: Vec<u32>,
    bwd_mark: Vec<u32>,
    fwd_dist: Vec<u32>,
    bwd_dist: Vec<u32>,
    fwd_frontier: Vec<u32>,
    bwd_frontier: Vec<u32>,
    next: Vec<u32>,
}

impl PathFinder {
    pub fn new(node_count: usize) -> Self {
        PathFinder {
            stamp: 0,
            fwd_mark: vec![0; node_count],
            bwd_mark: vec![0; node_count],
            fwd_dist: vec![0; node_count],
            bwd_dist: vec![0; node_count],
            fwd_frontier: Vec::new(),
            bwd_frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn next_stamp(&mut self) -> u32 {
        if self.stamp == u32::MAX {
            self.fwd_mark.iter_mut().for_each(|m| *m = 0);
            self.bwd_mark.iter_mut().for_each(|m| *m = 0);
            self.stamp = 0;
        }
        self.stamp += 1;
        self.stamp
    }

    /// Shortest path length from `src` to `dst` of at most `max_depth` hops.
    ///
    /// With `exclude_direct_edge` the arc `src -> dst` is ignored (both arcs
    /// between the two nodes when `ignore_direction` is set).
    pub fn distance(
        &mut self,
        g: &DiGraph,
        src: NodeId,
        dst: NodeId,
        max_depth: usize,
        exclude_direct_edge: bool,
        ignore_direction: bool,
    ) -> Option<usize> {
        if src == dst {
            return Some(0);
        }
        if max_depth == 0 {
            return None;
        }
        let stamp = self.next_stamp();
        let (s, d) = (src as u32, dst as u32);
        let skip = |a: u32, b: u32| -> bool {
            exclude_direct_edge && ((a == s && b == d) || (ignore_direction && a == d && b == s))
        };

        self.fwd_mark[src] = stamp;
        self.fwd_dist[src] = 0;
        self.bwd_mark[dst] = stamp;
        self.bwd_dist[dst] = 0;
        self.fwd_frontier.clear();
        self.fwd_frontier.push(s);
        self.bwd_frontier.clear();
        self.bwd_frontier.push(d);
        let (mut fwd_depth, mut bwd_depth) = (0usize, 0usize);

        loop {
            if fwd_depth + bwd_depth >= max_depth || self.fwd_frontier.is_empty() || self.bwd_frontier.is_empty() {
                return None;
            }
            let forward = self.fwd_frontier.len() <= self.bwd_frontier.len();
            let mut best: Option<usize> = None;
            self.next.clear();
            if forward {
                for i in 0..self.fwd_frontier.len() {
                    let a = self.fwd_frontier[i];
                    let row = if ignore_direction { g.neighbors(a as usize) } else { g.out_neighbors(a as usize) };
                    for &b in row {
                        if self.fwd_mark[b as usize] == stamp || skip(a, b) {
                            continue;
                        }
                        self.fwd_mark[b as usize] = stamp;
                        self.fwd_dist[b as usize] = (fwd_depth + 1) as u32;
                        if self.bwd_mark[b as usize] == stamp {
                            let total = fwd_depth + 1 + self.bwd_dist[b as usize] as usize;
                            best = Some(best.map_or(total, |x| x.min(total)));
                        }
                        self.next.push(b);
                    }
                }
                fwd_depth += 1;
                std::mem::swap(&mut self.fwd_frontier, &mut self.next);
            } else {
                for i in 0..self.bwd_frontier.len() {
                    let b = self.bwd_frontier[i];
                    let row = if ignore_direction { g.neighbors(b as usize) } else { g.in_neighbors(b as usize) };
                    for &a in row {
                        if self.bwd_mark[a as usize] == stamp || skip(a, b) {
                            continue;
                        }
                        self.bwd_mark[a as usize] = stamp;
                        self.bwd_dist[a as usize] = (bwd_depth + 1) as u32;
                        if self.fwd_mark[a as usize] == stamp {
                            let total = bwd_depth + 1 + self.fwd_dist[a as usize] as usize;
                            best = Some(best.map_or(total, |x| x.min(total)));
                        }
                        self.next.push(a);
                    }
                }
                bwd_depth += 1;
                std::mem::swap(&mut self.bwd_frontier, &mut self.next);
            }
            if let Some(len) = best {
                return (len <= max_depth).then_some(len);
            }
        }
    }
}

/// One-off shortest path query; see [`PathFinder::distance`].
pub fn bfs_distance(
    g: &DiGraph,
    src: NodeId,
    dst: NodeId,
    max_depth: usize,
    exclude_direct_edge: bool,
    ignore_direction: bool,
) -> Result<Option<usize>> {
    g.check_node(src)?;
    g.check_node(dst)?;
    Ok(PathFinder::new(g.node_count()).distance(g, src, dst, max_depth, exclude_direct_edge, ignore_direction))
}

/// Weakly connected component labels, numbered `0..component_count` in order
/// of each component's smallest node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLabels {
    pub label: Vec<usize>,
    pub component_count: usize,
}

pub fn weakly_connected_components(g: &DiGraph) -> ComponentLabels {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if label[v as usize] == usize::MAX {
                    label[v as usize] = count;
                    queue.push_back(v as usize);
                }
            }
        }
        count += 1;
    }
    ComponentLabels {
        label,
        component_count: count,
    }
}
