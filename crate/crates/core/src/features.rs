//! Labeled feature matrices made of named column blocks (`H`, `R`, `S`,
//! `D`, ...) and their CSV form.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{s, Array2, ArrayView2};

use crate::artifact::ArtifactMeta;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureBlock {
    pub name: String,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub blocks: Vec<FeatureBlock>,
    pub data: Array2<f64>,
    pub labels: Vec<u8>,
}

impl FeatureTable {
    pub fn single_block(name: &str, width: usize, data: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let rows = labels.len();
        let data = Array2::from_shape_vec((rows, width), data).map_err(|_| Error::DimensionMismatch {
            expected: rows * width,
            actual: 0,
        })?;
        Ok(FeatureTable {
            blocks: vec![FeatureBlock {
                name: name.to_string(),
                width,
            }],
            data,
            labels,
        })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn width(&self) -> usize {
        self.data.ncols()
    }

    /// Column range of a named block.
    pub fn block_range(&self, name: &str) -> Option<std::ops::Range<usize>> {
        let mut start = 0;
        for b in &self.blocks {
            if b.name == name {
                return Some(start..start + b.width);
            }
            start += b.width;
        }
        None
    }

    pub fn block(&self, name: &str) -> Option<ArrayView2<'_, f64>> {
        self.block_range(name).map(|r| self.data.slice(s![.., r]))
    }

    /// Side-by-side join of two tables over the same rows.
    pub fn hconcat(&self, other: &FeatureTable) -> Result<FeatureTable> {
        if self.labels != other.labels {
            return Err(Error::InvalidArgument("cannot join tables with different rows".into()));
        }
        for b in &other.blocks {
            if self.block_range(&b.name).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate block `{}`", b.name)));
            }
        }
        let data = ndarray::concatenate(ndarray::Axis(1), &[self.data.view(), other.data.view()])
            .expect("row counts checked through labels");
        let mut blocks = self.blocks.clone();
        blocks.extend(other.blocks.iter().cloned());
        Ok(FeatureTable {
            blocks,
            data,
            labels: self.labels.clone(),
        })
    }

    /// Keep only the named blocks, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<FeatureTable> {
        let mut views = Vec::new();
        let mut blocks = Vec::new();
        for &name in names {
            let r = self
                .block_range(name)
                .ok_or_else(|| Error::InvalidArgument(format!("feature block `{name}` not present")))?;
            blocks.push(FeatureBlock {
                name: name.to_string(),
                width: r.len(),
            });
            views.push(self.data.slice(s![.., r]));
        }
        let data = if views.is_empty() {
            Array2::zeros((self.rows(), 0))
        } else {
            ndarray::concatenate(ndarray::Axis(1), &views).expect("same row count")
        };
        Ok(FeatureTable {
            blocks,
            data,
            labels: self.labels.clone(),
        })
    }

    pub fn header(&self) -> String {
        let mut cols = Vec::with_capacity(self.width() + 1);
        for b in &self.blocks {
            let prefix = b.name.to_lowercase();
            cols.extend((0..b.width).map(|i| format!("{prefix}{i}")));
        }
        cols.push("label".to_string());
        cols.join(",")
    }

    pub fn write_csv(&self, path: &Path, meta: &ArtifactMeta) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{}", meta.to_line()).map_err(io)?;
        writeln!(w, "{}", self.header()).map_err(io)?;
        let mut line = String::new();
        for (row, label) in self.data.rows().into_iter().zip(&self.labels) {
            line.clear();
            for x in row {
                line.push_str(&x.to_string());
                line.push(',');
            }
            line.push_str(&label.to_string());
            writeln!(w, "{line}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn read_csv(path: &Path) -> Result<(FeatureTable, ArtifactMeta)> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::artifact(path, format!("missing {what}")))?
                .map_err(|e| Error::io(path, e))
        };
        let meta = ArtifactMeta::parse_line(path, &next("provenance header")?)?;
        let header = next("column header")?;
        let blocks = parse_header(path, &header)?;
        let width: usize = blocks.iter().map(|b| b.width).sum();

        let mut data = Vec::new();
        let mut labels = Vec::new();
        let mut line_no = 2;
        while let Ok(line) = next("") {
            line_no += 1;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width + 1 {
                return Err(Error::artifact(
                    path,
                    format!("line {line_no}: expected {} fields, found {}", width + 1, fields.len()),
                ));
            }
            for f in &fields[..width] {
                data.push(
                    f.parse::<f64>()
                        .map_err(|_| Error::artifact(path, format!("line {line_no}: bad number `{f}`")))?,
                );
            }
            labels.push(match fields[width] {
                "0" => 0,
                "1" => 1,
                other => return Err(Error::artifact(path, format!("line {line_no}: bad label `{other}`"))),
            });
        }
        let data = Array2::from_shape_vec((labels.len(), width), data).expect("row lengths checked");
        Ok((FeatureTable { blocks, data, labels }, meta))
    }
}

fn parse_header(path: &Path, header: &str) -> Result<Vec<FeatureBlock>> {
    let cols: Vec<&str> = header.split(',').collect();
    if cols.last() != Some(&"label") {
        return Err(Error::artifact(path, "last column must be `label`"));
    }
    let mut blocks: Vec<FeatureBlock> = Vec::new();
    for col in &cols[..cols.len() - 1] {
        let split = col.find(|c: char| c.is_ascii_digit()).unwrap_or(col.len());
        let (prefix, idx) = col.split_at(split);
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::artifact(path, format!("bad column name `{col}`")))?;
        let name = prefix.to_uppercase();
        match blocks.last_mut() {
            Some(b) if b.name == name && b.width == idx => b.width += 1,
            _ if idx == 0 => blocks.push(FeatureBlock { name, width: 1 }),
            _ => return Err(Error::artifact(path, format!("column `{col}` out of order"))),
        }
    }
    Ok(blocks)
}

/// Per-column zero-mean / unit-variance scaling fit on training rows.
/// Constant columns keep scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(data: ArrayView2<'_, f64>) -> Self {
        let n = data.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(data.ncols());
        let mut scale = Vec::with_capacity(data.ncols());
        for col in data.columns() {
            let m = col.sum() / n;
            let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(m);
            scale.push(if sd > 1e-12 { sd } else { 1.0 });
        }
        Standardizer { mean, scale }
    }

    pub fn identity(width: usize) -> Self {
        Standardizer {
            mean: vec![0.0; width],
            scale: vec![1.0; width],
        }
    }

    pub fn transform(&self, data: &mut Array2<f64>) -> Result<()> {
        if data.ncols() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                actual: data.ncols(),
            });
        }
        for mut row in data.rows_mut() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (*x - self.mean[j]) / self.scale[j];
            }
        }
        Ok(())
    }
}
