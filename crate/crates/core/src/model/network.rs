//! Compiled tower networks with hand-written backpropagation.

use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::spec::{Activation, Expr, TowerSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    /// `inputs x outputs`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub layers: Vec<DenseParams>,
}

impl ModelParams {
    pub fn zeros_like(&self) -> Self {
        ModelParams {
            layers: self
                .layers
                .iter()
                .map(|l| DenseParams {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// Every parameter, layer by layer, weights (row-major) before biases.
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.bias.iter()))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Op {
    /// Column range of the input matrix.
    Input(usize, usize),
    Dense {
        src: usize,
        layer: usize,
        act: Option<Activation>,
    },
    Hadamard(Vec<usize>),
    Concat(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
struct Node {
    op: Op,
    dim: usize,
}

/// A [`TowerSpec`] lowered to a topologically ordered node list. The last
/// node is the output logit.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    nodes: Vec<Node>,
    layer_shapes: Vec<(usize, usize)>,
    input_width: usize,
}

fn activate(act: Activation, z: f64) -> f64 {
    match act {
        Activation::Relu => z.max(0.0),
        Activation::Elu => {
            if z > 0.0 {
                z
            } else {
                z.exp_m1()
            }
        }
    }
}

fn activate_grad(act: Activation, z: f64) -> f64 {
    match act {
        Activation::Relu => {
            if z > 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Activation::Elu => {
            if z > 0.0 {
                1.0
            } else {
                z.exp()
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of a logit, `log(1 + e^z) - y z`.
pub fn bce_with_logit(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

/// Forward-pass values kept for backpropagation.
pub struct Cache {
    values: Vec<Array2<f64>>,
    pre: Vec<Option<Array2<f64>>>,
}

impl Cache {
    pub fn logits(&self) -> Array1<f64> {
        self.values.last().expect("network has nodes").column(0).to_owned()
    }
}

impl Network {
    pub fn compile(spec: &TowerSpec) -> Result<Self> {
        spec.output_dim()?;
        let mut offsets = Vec::new();
        let mut off = 0;
        for (_, d) in &spec.inputs {
            offsets.push(off);
            off += d;
        }
        let mut net = Network {
            nodes: Vec::new(),
            layer_shapes: Vec::new(),
            input_width: off,
        };
        let mut top = net.lower(spec, &offsets, &spec.arch)?;
        for &w in &spec.head {
            top = net.dense(top, w, Some(spec.activation));
        }
        net.dense(top, 1, None);
        Ok(net)
    }

    fn push(&mut self, op: Op, dim: usize) -> usize {
        self.nodes.push(Node { op, dim });
        self.nodes.len() - 1
    }

    fn dense(&mut self, src: usize, out: usize, act: Option<Activation>) -> usize {
        let layer = self.layer_shapes.len();
        self.layer_shapes.push((self.nodes[src].dim, out));
        self.push(Op::Dense { src, layer, act }, out)
    }

    fn lower(&mut self, spec: &TowerSpec, offsets: &[usize], e: &Expr) -> Result<usize> {
        Ok(match e {
            Expr::Input(name) => {
                let idx = spec
                    .inputs
                    .iter()
                    .position(|(n, _)| n == name)
                    .ok_or_else(|| Error::Spec(format!("input `{name}` is not declared")))?;
                let dim = spec.inputs[idx].1;
                self.push(Op::Input(offsets[idx], offsets[idx] + dim), dim)
            }
            Expr::Dense(widths, inner) => {
                let mut top = self.lower(spec, offsets, inner)?;
                for w in widths {
                    top = self.dense(top, w.unwrap_or(spec.width), Some(spec.activation));
                }
                top
            }
            Expr::Hadamard(args) => {
                let ids = args.iter().map(|a| self.lower(spec, offsets, a)).collect::<Result<Vec<_>>>()?;
                let dim = self.nodes[ids[0]].dim;
                self.push(Op::Hadamard(ids), dim)
            }
            Expr::Concat(args) => {
                let ids = args.iter().map(|a| self.lower(spec, offsets, a)).collect::<Result<Vec<_>>>()?;
                let dim = ids.iter().map(|&i| self.nodes[i].dim).sum();
                self.push(Op::Concat(ids), dim)
            }
        })
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn layer_shapes(&self) -> &[(usize, usize)] {
        &self.layer_shapes
    }

    /// He-scaled normal weights, zero biases.
    pub fn init_params(&self, seed: u64) -> ModelParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = self
            .layer_shapes
            .iter()
            .map(|&(fan_in, out)| {
                let normal = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
                DenseParams {
                    weights: Array2::from_shape_simple_fn((fan_in, out), || normal.sample(&mut rng)),
                    bias: Array1::zeros(out),
                }
            })
            .collect();
        ModelParams { layers }
    }

    pub fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.layers.len() != self.layer_shapes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.layer_shapes.len(),
                actual: params.layers.len(),
            });
        }
        for (l, &(i, o)) in params.layers.iter().zip(&self.layer_shapes) {
            if l.weights.dim() != (i, o) || l.bias.len() != o {
                return Err(Error::Spec(format!(
                    "layer shape {:?}/{} does not match {i}x{o}",
                    l.weights.dim(),
                    l.bias.len()
                )));
            }
        }
        Ok(())
    }

    pub fn forward(&self, params: &ModelParams, x: ArrayView2<'_, f64>) -> Result<Cache> {
        if x.ncols() != self.input_width {
            return Err(Error::DimensionMismatch {
                expected: self.input_width,
                actual: x.ncols(),
            });
        }
        let rows = x.nrows();
        let mut values: Vec<Array2<f64>> = Vec::with_capacity(self.nodes.len());
        let mut pre = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let (value, z) = match &node.op {
                Op::Input(a, b) => (x.slice(s![.., *a..*b]).to_owned(), None),
                Op::Dense { src, layer, act } => {
                    let p = &params.layers[*layer];
                    let z = values[*src].dot(&p.weights) + &p.bias;
                    match act {
                        Some(act) => {
                            let a = z.mapv(|v| activate(*act, v));
                            (a, Some(z))
                        }
                        None => (z, None),
                    }
                }
                Op::Hadamard(ids) => {
                    let mut out = values[ids[0]].clone();
                    for &i in &ids[1..] {
                        out *= &values[i];
                    }
                    (out, None)
                }
                Op::Concat(ids) => {
                    let views: Vec<_> = ids.iter().map(|&i| values[i].view()).collect();
                    let out = if rows == 0 {
                        Array2::zeros((0, node.dim))
                    } else {
                        ndarray::concatenate(Axis(1), &views).expect("row counts agree")
                    };
                    (out, None)
                }
            };
            values.push(value);
            pre.push(z);
        }
        Ok(Cache { values, pre })
    }

    /// Mean binary cross-entropy over the rows of `x` and its gradient.
    pub fn loss_and_grad(&self, params: &ModelParams, x: ArrayView2<'_, f64>, y: &[f64]) -> Result<(f64, ModelParams)> {
        if y.len() != x.nrows() {
            return Err(Error::DimensionMismatch {
                expected: x.nrows(),
                actual: y.len(),
            });
        }
        let cache = self.forward(params, x)?;
        let logits = cache.logits();
        let n = y.len().max(1) as f64;
        let loss = logits.iter().zip(y).map(|(&z, &t)| bce_with_logit(z, t)).sum::<f64>() / n;
        let dlogit = Array2::from_shape_fn((y.len(), 1), |(i, _)| (sigmoid(logits[i]) - y[i]) / n);
        Ok((loss, self.backward(params, &cache, dlogit)))
    }

    fn backward(&self, params: &ModelParams, cache: &Cache, dlogit: Array2<f64>) -> ModelParams {
        let mut grads = params.zeros_like();
        let mut upstream: Vec<Option<Array2<f64>>> = vec![None; self.nodes.len()];
        *upstream.last_mut().expect("network has nodes") = Some(dlogit);
        let add = |slot: &mut Option<Array2<f64>>, g: Array2<f64>| match slot {
            Some(acc) => *acc += &g,
            None => *slot = Some(g),
        };
        for idx in (0..self.nodes.len()).rev() {
            let Some(d_out) = upstream[idx].take() else { continue };
            match &self.nodes[idx].op {
                Op::Input(..) => {}
                Op::Dense { src, layer, act } => {
                    let dz = match (act, &cache.pre[idx]) {
                        (Some(act), Some(z)) => {
                            let mut dz = d_out;
                            Zip::from(&mut dz).and(z).for_each(|d, &zv| *d *= activate_grad(*act, zv));
                            dz
                        }
                        _ => d_out,
                    };
                    let x = &cache.values[*src];
                    let g = &mut grads.layers[*layer];
                    g.weights = x.t().dot(&dz);
                    g.bias = dz.sum_axis(Axis(0));
                    let dx = dz.dot(&params.layers[*layer].weights.t());
                    add(&mut upstream[*src], dx);
                }
                Op::Hadamard(ids) => {
                    for (k, &i) in ids.iter().enumerate() {
                        let mut g = d_out.clone();
                        for (m, &j) in ids.iter().enumerate() {
                            if m != k {
                                g *= &cache.values[j];
                            }
                        }
                        add(&mut upstream[i], g);
                    }
                }
                Op::Concat(ids) => {
                    let mut start = 0;
                    for &i in ids {
                        let w = self.nodes[i].dim;
                        add(&mut upstream[i], d_out.slice(s![.., start..start + w]).to_owned());
                        start += w;
                    }
                }
            }
        }
        grads
    }
}

pub fn init_params(spec: &TowerSpec, seed: u64) -> Result<ModelParams> {
    Ok(Network::compile(spec)?.init_params(seed))
}
