//! Diagnostic classifiers and the two probing tasks: per-class S-class
//! membership and ambiguity (one vs. several S-classes).

mod knn;
mod logistic;
mod metrics;
mod mlp;
mod optim;
mod report;
mod scale;
mod tasks;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use knn::{knn_classify, majority, KnnConfig, KnnIndex, KnnModel};
pub use logistic::{lr_loss_and_grad, LogisticRegression, LrConfig};
pub use metrics::{align, f1_counts, micro_f1, per_class_counts, F1Counts};
pub use mlp::{init_params, mlp_loss_and_grad, Mlp, MlpConfig, MlpShape};
pub use optim::{minimize, LbfgsOptions, Minimum};
pub use report::{
    read_sclass_predictions, write_likelihood_csv, write_sclass_predictions, BinScore, ClassScore,
    EvalReport,
};
pub use scale::Standardizer;
pub use tasks::{
    frequency_baseline, l2_normalize, random_baseline, run_ambiguity_probe, run_sclass_probe,
    AmbiguityLabel, ProbeOptions,
};

use crate::{Error, Result};

/// Binary probe family with its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierKind {
    Lr(LrConfig),
    Mlp(MlpConfig),
    Knn(KnnConfig),
}

impl ClassifierKind {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierKind::Lr(_) => "lr",
            ClassifierKind::Mlp(_) => "mlp",
            ClassifierKind::Knn(_) => "knn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassifierKind::Knn(c) if c.k == 0 => Err(Error::Config("k must be at least 1".into())),
            ClassifierKind::Mlp(c) if c.hidden == Some(0) => {
                Err(Error::Config("hidden width must be at least 1".into()))
            }
            ClassifierKind::Mlp(c) if c.batch_size == 0 => {
                Err(Error::Config("batch size must be at least 1".into()))
            }
            ClassifierKind::Lr(c) if c.l2 < 0.0 => {
                Err(Error::Config("l2 strength must be non-negative".into()))
            }
            _ => Ok(()),
        }
    }

    /// Fixes the MLP hidden width from the inventory size when unset.
    pub fn resolved(self, n_classes: usize) -> Self {
        match self {
            ClassifierKind::Mlp(mut c) => {
                c.hidden = Some(c.hidden_width(n_classes));
                ClassifierKind::Mlp(c)
            }
            other => other,
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lr" => Ok(ClassifierKind::Lr(LrConfig::default())),
            "mlp" => Ok(ClassifierKind::Mlp(MlpConfig::default())),
            "knn" => Ok(ClassifierKind::Knn(KnnConfig::default())),
            other => Err(Error::Config(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BinaryModel {
    /// Fitted on single-class labels: always predicts that class.
    Constant(bool),
    Lr(LogisticRegression),
    Mlp(Mlp),
    Knn(KnnModel),
}

impl BinaryModel {
    /// Decision at threshold 0.5 and the positive likelihood.
    pub fn predict(&self, x: &[f64]) -> Result<(bool, f64)> {
        let p = match self {
            BinaryModel::Constant(v) => return Ok((*v, if *v { 1.0 } else { 0.0 })),
            BinaryModel::Lr(m) => m.predict_proba(x),
            BinaryModel::Mlp(m) => m.predict_proba(x),
            BinaryModel::Knn(m) => return m.predict(x),
        };
        Ok((p >= 0.5, p))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedBinary {
    pub model: BinaryModel,
    pub warning: Option<String>,
}

/// Fits one binary probe. Labels of a single value give a constant model
/// and a warning.
pub fn fit_binary(kind: &ClassifierKind, x: &[Vec<f64>], y: &[bool], seed: u64) -> Result<FittedBinary> {
    kind.validate()?;
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::ExampleMismatch(format!(
            "{} feature rows for {} labels",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].len();
    if x.iter().any(|r| r.len() != dim) {
        return Err(Error::ExampleMismatch("feature rows differ in length".into()));
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        let value = positives > 0;
        return Ok(FittedBinary {
            model: BinaryModel::Constant(value),
            warning: Some(format!(
                "all {} training labels are {value}; using a constant predictor",
                y.len()
            )),
        });
    }
    let model = match kind {
        ClassifierKind::Lr(c) => BinaryModel::Lr(LogisticRegression::fit(x, y, c)),
        ClassifierKind::Mlp(c) => BinaryModel::Mlp(Mlp::fit(x, y, c.hidden_width(1), c, seed)),
        ClassifierKind::Knn(c) => BinaryModel::Knn(KnnModel::fit(x, y, c.k)?),
    };
    Ok(FittedBinary {
        model,
        warning: None,
    })
}

/// Per-example prediction keyed by word.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction<L> {
    pub word: String,
    pub label: L,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet<L> {
    pub entries: Vec<Prediction<L>>,
}

impl<L> PredictionSet<L> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&L> {
        self.entries.iter().find(|p| p.word == word).map(|p| &p.label)
    }
}

impl<L> FromIterator<(String, L)> for PredictionSet<L> {
    fn from_iter<T: IntoIterator<Item = (String, L)>>(iter: T) -> Self {
        PredictionSet {
            entries: iter
                .into_iter()
                .map(|(word, label)| Prediction { word, label })
                .collect(),
        }
    }
}

/// Seed for the `i`-th independent fit derived from a base seed.
pub(crate) fn derive_seed(seed: u64, i: u64) -> u64 {
    seed ^ (i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
