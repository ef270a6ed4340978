use crate::error::{Error, Result};

pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl Metrics {
    /// Confusion counts at `p >= 0.5`.
    pub fn from_probabilities(probs: &[f64], labels: &[u8]) -> Result<Self> {
        if probs.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                actual: probs.len(),
            });
        }
        if probs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
        for (&p, &y) in probs.iter().zip(labels) {
            match (p >= THRESHOLD, y != 0) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        Ok(Metrics::from_counts(tp, fp, tn, fn_))
    }

    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            precision,
            recall,
            f1,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            tp,
            fp,
            tn,
            fn_,
        }
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `key=value` lines.
    pub fn report(&self) -> String {
        format!(
            "precision={}\nrecall={}\nf1={}\naccuracy={}\ntp={}\nfp={}\ntn={}\nfn={}\n",
            self.precision, self.recall, self.f1, self.accuracy, self.tp, self.fp, self.tn, self.fn_
        )
    }

    pub fn parse_report(text: &str) -> Result<Self> {
        let mut counts = [None; 4];
        for line in text.lines() {
            let Some((k, v)) = line.split_once('=') else { continue };
            let slot = match k.trim() {
                "tp" => 0,
                "fp" => 1,
                "tn" => 2,
                "fn" => 3,
                _ => continue,
            };
            counts[slot] = Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad metrics value `{line}`")))?,
            );
        }
        match counts {
            [Some(tp), Some(fp), Some(tn), Some(fn_)] => Ok(Metrics::from_counts(tp, fp, tn, fn_)),
            _ => Err(Error::Config("metrics report lacks confusion counts".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let m = Metrics::from_probabilities(&[0.9, 0.1, 0.5, 0.49], &[1, 0, 1, 0]).unwrap();
        assert_eq!(m.f1, 1.0);
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn constant_positive_on_balanced_set() {
        let m = Metrics::from_probabilities(&[0.7; 6], &[1, 0, 1, 0, 1, 0]).unwrap();
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn undefined_f1_is_zero() {
        let m = Metrics::from_probabilities(&[0.1, 0.2], &[0, 0]).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (0.0, 0.0, 0.0, 1.0));
        assert!(matches!(Metrics::from_probabilities(&[], &[]), Err(Error::EmptyDataset)));
    }

    #[test]
    fn report_round_trip() {
        let m = Metrics::from_counts(40, 3, 37, 5);
        assert_eq!(Metrics::parse_report(&m.report()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn counts_partition_and_order_free(
            rows in prop::collection::vec((0.0f64..1.0, 0u8..2), 1..60),
            rot in 0usize..60,
        ) {
            let probs: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let labels: Vec<u8> = rows.iter().map(|r| r.1).collect();
            let m = Metrics::from_probabilities(&probs, &labels).unwrap();
            prop_assert_eq!(m.total(), rows.len());
            for v in [m.precision, m.recall, m.f1, m.accuracy] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let mut shuffled = rows.clone();
            shuffled.rotate_left(rot % rows.len());
            shuffled.reverse();
            let p2: Vec<f64> = shuffled.iter().map(|r| r.0).collect();
            let l2: Vec<u8> = shuffled.iter().map(|r| r.1).collect();
            prop_assert_eq!(Metrics::from_probabilities(&p2, &l2).unwrap(), m);
        }
    }
}
