use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Values this close to a bin edge count as on the edge.
const EDGE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Dominance,
    NumClasses,
    Frequency,
    Typicality,
}

impl Factor {
    pub fn as_str(self) -> &'static str {
        match self {
            Factor::Dominance => "dominance",
            Factor::NumClasses => "classes",
            Factor::Frequency => "frequency",
            Factor::Typicality => "typicality",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dominance" => Ok(Factor::Dominance),
            "classes" | "num_classes" => Ok(Factor::NumClasses),
            "frequency" => Ok(Factor::Frequency),
            "typicality" => Ok(Factor::Typicality),
            other => Err(Error::Config(format!("unknown factor `{other}`"))),
        }
    }
}

/// Bins `[c − h, c + h]` around sorted centers `c`. A value goes to the
/// nearest center; a value exactly between two centers goes to the larger.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorBinning {
    pub factor: Factor,
    pub centers: Vec<f64>,
    pub half_width: f64,
}

impl FactorBinning {
    pub fn new(factor: Factor, mut centers: Vec<f64>, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || centers.is_empty() || centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(
                "bins need finite centers and a positive half-width".into(),
            ));
        }
        centers.sort_by(f64::total_cmp);
        centers.dedup();
        Ok(FactorBinning {
            factor,
            centers,
            half_width,
        })
    }

    /// Default levels: 0.0–1.0 by 0.1 for dominance, −1.0–1.0 by 0.1 for
    /// typicality (both half-width 0.05), multiples of 10 up to the largest
    /// observed count for frequency (half-width 5), and each integer up to
    /// the largest observed value for the number of classes.
    pub fn default_for(factor: Factor, observed_max: f64) -> Self {
        let (centers, half_width) = match factor {
            Factor::Dominance => ((0..=10).map(|i| i as f64 / 10.0).collect(), 0.05),
            Factor::Typicality => ((-10..=10).map(|i| i as f64 / 10.0).collect(), 0.05),
            Factor::Frequency => {
                let top = (observed_max.max(0.0) / 10.0).ceil() as usize;
                ((0..=top).map(|i| 10.0 * i as f64).collect(), 5.0)
            }
            Factor::NumClasses => {
                let top = observed_max.max(1.0).round() as usize;
                ((1..=top).map(|i| i as f64).collect(), 0.5)
            }
        };
        FactorBinning::new(factor, centers, half_width).expect("valid default bins")
    }

    /// Index of the bin holding `value`, or `None` when it lies outside every bin.
    pub fn assign(&self, value: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &c) in self.centers.iter().enumerate() {
            let d = (value - c).abs();
            // Centers ascend, so `<=` lets the larger center win a tie.
            if best.is_none_or(|(_, bd)| d <= bd + EDGE_TOLERANCE) {
                best = Some((i, d));
            }
        }
        best.filter(|&(_, d)| d <= self.half_width + EDGE_TOLERANCE)
            .map(|(i, _)| i)
    }
}
