//! Random-walk node embeddings (DeepWalk when `p = q = 1`, node2vec
//! otherwise), Hadamard edge representations, and concatenation with the
//! heuristic vector.

mod skipgram;
mod walks;

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub use skipgram::{train_skipgram, SkipGramConfig, SkipGramHistory, TrainMode, MIN_LEARNING_RATE, UNIGRAM_POWER};
pub use walks::{generate_walks, pick_weighted, sample_next, transition_weights, WalkConfig};

use crate::artifact::ArtifactMeta;
use crate::error::{Error, Result};
use crate::features::{FeatureBlock, FeatureTable};
use crate::graph::{DiGraph, NodeId};
use crate::heuristics::{HeuristicVector, HEURISTIC_DIM};
use crate::sampling::LabeledEdge;

/// Row-major `N x dim` node vectors. `context_vectors` is only populated
/// right after training and is not persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub dim: usize,
    pub vectors: Vec<f32>,
    pub context_vectors: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn node_count(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.vectors.len() / self.dim
        }
    }

    pub fn row(&self, u: NodeId) -> &[f32] {
        &self.vectors[u * self.dim..(u + 1) * self.dim]
    }

    fn check(&self, u: NodeId) -> Result<()> {
        if u < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode(u))
        }
    }

    /// Text layout: `N dim`, then one line per node: id followed by `dim`
    /// values.
    pub fn write_text(&self, path: &Path, meta: &ArtifactMeta) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{}", meta.to_line()).map_err(io)?;
        writeln!(w, "{} {}", self.node_count(), self.dim).map_err(io)?;
        let mut line = String::new();
        for u in 0..self.node_count() {
            line.clear();
            line.push_str(&u.to_string());
            for x in self.row(u) {
                line.push(' ');
                line.push_str(&x.to_string());
            }
            writeln!(w, "{line}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Read the text layout. The provenance line is optional so embeddings
    /// produced by other tools can be plugged in.
    pub fn read_text(path: &Path) -> Result<(EmbeddingMatrix, Option<ArtifactMeta>)> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut meta = None;
        let mut shape: Option<(usize, usize)> = None;
        let mut vectors = Vec::new();
        let mut seen = Vec::new();
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let bad = |m: String| Error::artifact(path, format!("line {}: {m}", idx + 1));
            if line.starts_with("# linkpred ") && idx == 0 {
                meta = Some(ArtifactMeta::parse_line(path, &line)?);
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match shape {
                None => {
                    if tokens.len() != 2 {
                        return Err(bad("expected `N dim`".into()));
                    }
                    let n: usize = tokens[0].parse().map_err(|_| bad("bad node count".into()))?;
                    let d: usize = tokens[1].parse().map_err(|_| bad("bad dimension".into()))?;
                    shape = Some((n, d));
                    vectors = vec![0.0f32; n * d];
                    seen = vec![false; n];
                }
                Some((n, d)) => {
                    if tokens.len() != d + 1 {
                        return Err(bad(format!("expected {} fields, found {}", d + 1, tokens.len())));
                    }
                    let u: usize = tokens[0].parse().map_err(|_| bad("bad node id".into()))?;
                    if u >= n || seen[u] {
                        return Err(bad(format!("node id {u} out of range or repeated")));
                    }
                    seen[u] = true;
                    for (k, t) in tokens[1..].iter().enumerate() {
                        vectors[u * d + k] = t.parse().map_err(|_| bad(format!("bad value `{t}`")))?;
                    }
                }
            }
        }
        let (n, d) = shape.ok_or_else(|| Error::artifact(path, "missing `N dim` line"))?;
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::artifact(path, format!("no vector for node {missing} of {n}")));
        }
        Ok((
            EmbeddingMatrix {
                dim: d,
                vectors,
                context_vectors: Vec::new(),
            },
            meta,
        ))
    }
}

/// Walks plus skip-gram over `g`.
pub fn embed_graph(g: &DiGraph, walk: &WalkConfig, sg: &SkipGramConfig) -> Result<(EmbeddingMatrix, SkipGramHistory)> {
    let walks = generate_walks(g, walk)?;
    train_skipgram(&walks, g.node_count(), sg)
}

/// Elementwise product of the two node vectors.
pub fn edge_embedding(e: &EmbeddingMatrix, u: NodeId, v: NodeId) -> Result<Vec<f64>> {
    e.check(u)?;
    e.check(v)?;
    Ok(e.row(u).iter().zip(e.row(v)).map(|(a, b)| f64::from(*a) * f64::from(*b)).collect())
}

/// `h` followed by `r`; `r` must have exactly `dim` entries.
pub fn combine_features(h: &HeuristicVector, r: &[f64], dim: usize) -> Result<Vec<f64>> {
    if r.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: r.len(),
        });
    }
    let mut out = Vec::with_capacity(HEURISTIC_DIM + dim);
    out.extend_from_slice(h.as_slice());
    out.extend_from_slice(r);
    Ok(out)
}

/// Block `R`: Hadamard edge representation per edge.
pub fn edge_embedding_table(e: &EmbeddingMatrix, edges: &[LabeledEdge]) -> Result<FeatureTable> {
    let mut data = Vec::with_capacity(edges.len() * e.dim);
    for edge in edges {
        data.extend(edge_embedding(e, edge.src, edge.dst)?);
    }
    FeatureTable::single_block("R", e.dim, data, edges.iter().map(|x| x.label).collect())
}

/// Blocks `S` and `D`: raw source and destination node vectors.
pub fn endpoint_table(e: &EmbeddingMatrix, edges: &[LabeledEdge]) -> Result<FeatureTable> {
    let mut data = Vec::with_capacity(edges.len() * e.dim * 2);
    for edge in edges {
        e.check(edge.src)?;
        e.check(edge.dst)?;
        data.extend(e.row(edge.src).iter().map(|&x| f64::from(x)));
        data.extend(e.row(edge.dst).iter().map(|&x| f64::from(x)));
    }
    let mut t = FeatureTable::single_block("S", 2 * e.dim, data, edges.iter().map(|x| x.label).collect())?;
    t.blocks = vec![
        FeatureBlock {
            name: "S".into(),
            width: e.dim,
        },
        FeatureBlock {
            name: "D".into(),
            width: e.dim,
        },
    ];
    Ok(t)
}
