//! Binary link classifiers: multi-tower feed-forward networks and a
//! logistic-regression baseline, trained with Adam on cross-entropy.

mod metrics;
mod network;
mod spec;
mod train;

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};

pub use metrics::{Metrics, THRESHOLD};
pub use network::{bce_with_logit, init_params, sigmoid, DenseParams, ModelParams, Network};
pub use spec::{Activation, Expr, TowerSpec, DEFAULT_HEAD, DEFAULT_WIDTH};
pub use train::{train, train_logistic, Adam, EpochRecord, TrainConfig, TrainHistory, VALIDATION_FRACTION};

use crate::artifact::ArtifactMeta;
use crate::error::{Error, Result};
use crate::features::{FeatureTable, Standardizer};

/// A trained network bundled with the input scaling it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub spec: TowerSpec,
    pub standardizer: Standardizer,
    pub params: ModelParams,
    net: Network,
}

impl Model {
    pub fn new(spec: TowerSpec, standardizer: Standardizer, params: ModelParams) -> Result<Self> {
        let net = Network::compile(&spec)?;
        net.check_params(&params)?;
        if standardizer.mean.len() != net.input_width() {
            return Err(Error::DimensionMismatch {
                expected: net.input_width(),
                actual: standardizer.mean.len(),
            });
        }
        Ok(Model {
            spec,
            standardizer,
            params,
            net,
        })
    }

    fn block_names(spec: &TowerSpec) -> Vec<&str> {
        spec.inputs.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// The spec's input blocks pulled from `table`, in declaration order.
    pub fn raw_inputs(spec: &TowerSpec, table: &FeatureTable) -> Result<Array2<f64>> {
        for (name, dim) in &spec.inputs {
            let got = table
                .block_range(name)
                .ok_or_else(|| Error::MissingInput(name.clone()))?
                .len();
            if got != *dim {
                return Err(Error::DimensionMismatch {
                    expected: *dim,
                    actual: got,
                });
            }
        }
        Ok(table.select(&Self::block_names(spec))?.data)
    }

    /// Fit the standardizer on `table`, then train.
    pub fn fit(spec: TowerSpec, table: &FeatureTable, cfg: &TrainConfig) -> Result<(Model, TrainHistory)> {
        let mut x = Self::raw_inputs(&spec, table)?;
        let standardizer = Standardizer::fit(x.view());
        standardizer.transform(&mut x)?;
        let (params, history) = train(&spec, x.view(), &table.labels, cfg)?;
        Ok((Model::new(spec, standardizer, params)?, history))
    }

    /// Probabilities for already standardized rows.
    pub fn predict_standardized(&self, x: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
        Ok(self.net.forward(&self.params, x)?.logits().mapv(sigmoid))
    }

    pub fn predict(&self, table: &FeatureTable) -> Result<Array1<f64>> {
        let mut x = Self::raw_inputs(&self.spec, table)?;
        self.standardizer.transform(&mut x)?;
        self.predict_standardized(x.view())
    }

    /// Probability for one example given as named input vectors.
    pub fn predict_named(&self, inputs: &[(&str, &[f64])]) -> Result<f64> {
        let mut row = Vec::with_capacity(self.net.input_width());
        for (name, dim) in &self.spec.inputs {
            let v = inputs
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| Error::MissingInput(name.clone()))?
                .1;
            if v.len() != *dim {
                return Err(Error::DimensionMismatch {
                    expected: *dim,
                    actual: v.len(),
                });
            }
            row.extend_from_slice(v);
        }
        let mut x = Array2::from_shape_vec((1, row.len()), row).expect("row shape");
        self.standardizer.transform(&mut x)?;
        Ok(self.predict_standardized(x.view())?[0])
    }

    pub fn evaluate(&self, table: &FeatureTable) -> Result<Metrics> {
        if table.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        let probs = self.predict(table)?;
        Metrics::from_probabilities(probs.as_slice().expect("contiguous"), &table.labels)
    }

    /// Spec block, standardizer, then each layer's shape, row-major weights
    /// (one input row per line) and bias.
    pub fn write_text(&self, path: &Path, meta: &ArtifactMeta) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        let join = |v: &mut dyn Iterator<Item = &f64>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(w, "{}", meta.to_line()).map_err(io)?;
        writeln!(w, "spec {}", self.spec.describe()).map_err(io)?;
        writeln!(w, "mean {}", join(&mut self.standardizer.mean.iter())).map_err(io)?;
        writeln!(w, "scale {}", join(&mut self.standardizer.scale.iter())).map_err(io)?;
        writeln!(w, "layers {}", self.params.layers.len()).map_err(io)?;
        for (i, l) in self.params.layers.iter().enumerate() {
            writeln!(w, "layer {i} {} {}", l.weights.nrows(), l.weights.ncols()).map_err(io)?;
            for row in l.weights.rows() {
                writeln!(w, "{}", join(&mut row.iter())).map_err(io)?;
            }
            writeln!(w, "bias {}", join(&mut l.bias.iter())).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_text(path: &Path) -> Result<(Model, ArtifactMeta)> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let lines: Vec<String> = BufReader::new(file)
            .lines()
            .collect::<std::io::Result<_>>()
            .map_err(|e| Error::io(path, e))?;
        let mut it = lines.iter().enumerate();
        let mut next = |want: &str| -> Result<(usize, &str)> {
            let (i, l) = it
                .next()
                .ok_or_else(|| Error::artifact(path, format!("truncated before `{want}`")))?;
            let rest = l
                .strip_prefix(want)
                .ok_or_else(|| Error::artifact(path, format!("line {}: expected `{want}`", i + 1)))?;
            Ok((i + 1, rest.trim()))
        };
        let floats = |line: usize, s: &str| -> Result<Vec<f64>> {
            s.split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::artifact(path, format!("line {line}: bad number `{t}`"))))
                .collect()
        };

        let (_, head) = next("")?;
        let meta = ArtifactMeta::parse_line(path, head)?;
        let (line, desc) = next("spec ")?;
        let spec = parse_description(desc).map_err(|e| Error::artifact(path, format!("line {line}: {e}")))?;
        let (line, mean) = next("mean")?;
        let mean = floats(line, mean)?;
        let (line, scale) = next("scale")?;
        let scale = floats(line, scale)?;
        let (line, count) = next("layers ")?;
        let count: usize = count
            .parse()
            .map_err(|_| Error::artifact(path, format!("line {line}: bad layer count")))?;
        let mut layers = Vec::with_capacity(count);
        for i in 0..count {
            let (line, shape) = next("layer ")?;
            let dims: Vec<usize> = shape.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            if dims.len() != 3 || dims[0] != i {
                return Err(Error::artifact(path, format!("line {line}: bad layer header")));
            }
            let (rows, cols) = (dims[1], dims[2]);
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (line, row) = next("")?;
                let vals = floats(line, row)?;
                if vals.len() != cols {
                    return Err(Error::artifact(path, format!("line {line}: expected {cols} weights")));
                }
                data.extend(vals);
            }
            let (line, bias) = next("bias")?;
            let bias = floats(line, bias)?;
            if bias.len() != cols {
                return Err(Error::artifact(path, format!("line {line}: expected {cols} biases")));
            }
            layers.push(DenseParams {
                weights: Array2::from_shape_vec((rows, cols), data).expect("checked shape"),
                bias: Array1::from(bias),
            });
        }
        let model = Model::new(spec, Standardizer { mean, scale }, ModelParams { layers })
            .map_err(|e| Error::artifact(path, e.to_string()))?;
        Ok((model, meta))
    }
}

/// Inverse of [`TowerSpec::describe`].
pub fn parse_description(desc: &str) -> Result<TowerSpec> {
    let mut arch = None;
    let mut inputs = Vec::new();
    let mut activation = Activation::Relu;
    let mut width = DEFAULT_WIDTH;
    let mut head = Vec::new();
    let bad = |s: &str| Error::Spec(format!("bad spec field `{s}`"));
    for field in desc.split_whitespace() {
        let (k, v) = field.split_once('=').ok_or_else(|| bad(field))?;
        match k {
            "arch" => arch = Some(v.to_string()),
            "inputs" => {
                for part in v.split(',').filter(|p| !p.is_empty()) {
                    let (n, d) = part.split_once(':').ok_or_else(|| bad(part))?;
                    inputs.push((n.to_string(), d.parse::<usize>().map_err(|_| bad(part))?));
                }
            }
            "activation" => activation = Activation::parse(v)?,
            "width" => width = v.parse().map_err(|_| bad(field))?,
            "head" => head = parse_widths(v)?,
            _ => return Err(bad(field)),
        }
    }
    let arch = arch.ok_or_else(|| Error::Spec("missing arch".into()))?;
    let inputs: Vec<(&str, usize)> = inputs.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    TowerSpec::new(&arch, &inputs, activation, width, &head)
}

/// Comma-separated positive widths; empty means none.
pub fn parse_widths(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .ok()
                .filter(|&w| w > 0)
                .ok_or_else(|| Error::Spec(format!("bad layer width `{p}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(rows: usize, blocks: &[(&str, usize)], seed: u64) -> FeatureTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<u8> = (0..rows).map(|i| (i % 2) as u8).collect();
        let mut table: Option<FeatureTable> = None;
        for (name, w) in blocks {
            let data = (0..rows * w).map(|_| rng.random_range(-2.0..2.0)).collect();
            let t = FeatureTable::single_block(name, *w, data, labels.clone()).unwrap();
            table = Some(match table {
                None => t,
                Some(acc) => acc.hconcat(&t).unwrap(),
            });
        }
        table.unwrap()
    }

    /// Max relative error between backprop and central differences.
    fn gradient_error(spec: &TowerSpec, seed: u64) -> f64 {
        let net = Network::compile(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = 5;
        let x = Array2::from_shape_simple_fn((rows, net.input_width()), || rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..rows).map(|i| (i % 2) as f64).collect();
        let mut p = net.init_params(seed);
        // nonzero biases so every path through the bias gradient is exercised
        for l in &mut p.layers {
            l.bias.mapv_inplace(|_| rng.random_range(-0.3..0.3));
        }
        let (_, g) = net.loss_and_grad(&p, x.view(), &y).unwrap();
        let analytic: Vec<f64> = g.values().copied().collect();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for (k, &a) in analytic.iter().enumerate() {
            let mut plus = p.clone();
            *plus.values_mut().nth(k).unwrap() += h;
            let mut minus = p.clone();
            *minus.values_mut().nth(k).unwrap() -= h;
            let lp = net.loss_and_grad(&plus, x.view(), &y).unwrap().0;
            let lm = net.loss_and_grad(&minus, x.view(), &y).unwrap().0;
            let numeric = (lp - lm) / (2.0 * h);
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-7);
            worst = worst.max(err);
        }
        worst
    }

    #[test]
    fn gradient_check_all_layer_and_combiner_types() {
        let io = [("H", 4), ("S", 3), ("D", 3)];
        for (arch, act) in [
            ("H", Activation::Relu),
            ("e(S,D)", Activation::Relu),
            ("e(f2(H),f1(S),f1(D))", Activation::Elu),
            ("H|e(S,D)", Activation::Elu),
            ("e(f1(H),f2(e(f2(S),f2(D))))", Activation::Relu),
            ("f[5,3](S)|f2(D)|H", Activation::Elu),
        ] {
            let spec = TowerSpec::new(arch, &io, act, 4, &[3]).unwrap();
            for seed in 0..3 {
                let err = gradient_error(&spec, seed);
                assert!(err <= 1e-3, "{arch} seed {seed}: {err}");
            }
        }
        let lr = TowerSpec::logistic(&io).unwrap();
        assert!(gradient_error(&lr, 7) <= 1e-3);
    }

    #[test]
    fn fit_predict_and_persist() {
        let table = random_table(40, &[("H", 3), ("R", 2)], 1);
        let spec = TowerSpec::new("f1(H)|R", &[("H", 3), ("R", 2)], Activation::Relu, 4, &[2]).unwrap();
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 8,
            ..TrainConfig::default()
        };
        let (model, _) = Model::fit(spec, &table, &cfg).unwrap();
        let m = model.evaluate(&table).unwrap();
        assert_eq!(m.total(), 40);

        let row = table.data.row(3).to_vec();
        let named = model.predict_named(&[("R", &row[3..]), ("H", &row[..3])]).unwrap();
        assert!((named - model.predict(&table).unwrap()[3]).abs() < 1e-15);
        assert!(matches!(model.predict_named(&[("H", &row[..3])]), Err(Error::MissingInput(_))));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        let meta = ArtifactMeta::new("model", 0, "abc");
        model.write_text(&path, &meta).unwrap();
        let (back, m2) = Model::read_text(&path).unwrap();
        assert_eq!(back, model);
        assert_eq!(m2, meta);
    }

    #[test]
    fn missing_block_is_reported() {
        let table = random_table(10, &[("H", 3)], 1);
        let spec = TowerSpec::new("e(S,D)", &[("S", 2), ("D", 2)], Activation::Relu, 4, &[]).unwrap();
        assert!(matches!(
            Model::fit(spec, &table, &TrainConfig::default()),
            Err(Error::MissingInput(_))
        ));
    }

    #[test]
    fn evaluate_is_row_order_free() {
        let table = random_table(30, &[("H", 3)], 4);
        let spec = TowerSpec::new("f1(H)", &[("H", 3)], Activation::Relu, 4, &[]).unwrap();
        let (model, _) = Model::fit(spec, &table, &TrainConfig { epochs: 2, ..TrainConfig::default() }).unwrap();
        let order: Vec<usize> = (0..30).rev().collect();
        let permuted = FeatureTable {
            blocks: table.blocks.clone(),
            data: table.data.select(ndarray::Axis(0), &order),
            labels: order.iter().map(|&i| table.labels[i]).collect(),
        };
        assert_eq!(model.evaluate(&table).unwrap(), model.evaluate(&permuted).unwrap());
    }

    #[test]
    fn description_round_trip() {
        let spec = TowerSpec::new("e(f[8,4](S),f2(D))", &[("S", 3), ("D", 3)], Activation::Elu, 4, &[5, 2]).unwrap();
        assert_eq!(parse_description(&spec.describe()).unwrap(), spec);
        assert_eq!(parse_widths("64, 16").unwrap(), vec![64, 16]);
        assert!(parse_widths("0").is_err());
        assert!(parse_widths("").unwrap().is_empty());
    }
}
