use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::Factor;
use crate::corpus::CorpusFormat;
use crate::embedding::{TrainConfig, TrainMode};
use crate::probe::ClassifierKind;
use crate::synth::SynthSpec;
use crate::{Error, Result};

/// Word representation handed to the probes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Vectors trained on the word corpus.
    Word,
    /// Uniform sum of sense vectors.
    Unif,
    /// Frequency-weighted sum of sense vectors.
    Wght,
}

impl Representation {
    pub fn as_str(self) -> &'static str {
        match self {
            Representation::Word => "word",
            Representation::Unif => "unif",
            Representation::Wght => "wght",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sclass,
    Ambiguity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: CorpusFormat,
    /// One class name per line; defaults to the 34 FIGER parent types.
    #[serde(default)]
    pub classes: Option<PathBuf>,
}

fn default_format() -> CorpusFormat {
    CorpusFormat::Jsonl
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LexiconConfig {
    pub min_word_freq: u64,
    pub lowercase: bool,
}

impl Default for LexiconConfig {
    fn default() -> Self {
        LexiconConfig {
            min_word_freq: 20,
            lowercase: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig { seed: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainGrid {
    pub modes: Vec<TrainMode>,
    pub dims: Vec<usize>,
    /// Shared settings; `dim` is overridden per grid cell.
    pub params: TrainConfig,
}

impl Default for TrainGrid {
    fn default() -> Self {
        TrainGrid {
            modes: vec![TrainMode::Skip, TrainMode::Sskip],
            dims: vec![100, 200, 300, 400],
            params: TrainConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeGrid {
    pub representations: Vec<Representation>,
    pub classifiers: Vec<ClassifierKind>,
    pub tasks: Vec<Task>,
    pub seed: u64,
    pub sclass_normalize: bool,
    pub ambiguity_normalize: bool,
    /// Random (S-class) and FREQUENCY (ambiguity) baselines.
    pub baselines: bool,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid {
            representations: vec![Representation::Word, Representation::Unif, Representation::Wght],
            classifiers: ["lr", "knn", "mlp"]
                .iter()
                .map(|k| k.parse().expect("known classifier"))
                .collect(),
            tasks: vec![Task::Sclass, Task::Ambiguity],
            seed: 1,
            sclass_normalize: false,
            ambiguity_normalize: true,
            baselines: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Recall curves computed from every S-class probe.
    pub factors: Vec<Factor>,
    /// Nearest-neighbor class diversity per representation; `None` skips it.
    pub neighbors_k: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            factors: vec![
                Factor::Dominance,
                Factor::NumClasses,
                Factor::Frequency,
                Factor::Typicality,
            ],
            neighbors_k: Some(5),
        }
    }
}

/// Declarative description of a full experiment grid. Relative paths are
/// resolved against the directory of the config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output: PathBuf,
    #[serde(default)]
    pub corpus: Option<CorpusSource>,
    /// Generate a synthetic corpus instead of reading one.
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    #[serde(default)]
    pub lexicon: LexiconConfig,
    #[serde(default)]
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub train: TrainGrid,
    #[serde(default)]
    pub probe: ProbeGrid,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Parses the file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        if let Some(c) = &mut self.corpus {
            fix(&mut c.path);
            if let Some(classes) = &mut c.classes {
                fix(classes);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.corpus, &self.synth) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either `corpus` or `synth`, not both".into()))
            }
            (None, None) => return Err(Error::Config("one of `corpus` or `synth` is required".into())),
            (Some(c), None) => {
                for p in std::iter::once(&c.path).chain(&c.classes) {
                    if !p.is_file() {
                        return Err(Error::Config(format!("{} does not exist", p.display())));
                    }
                }
            }
            (None, Some(spec)) => spec.validate()?,
        }
        if self.lexicon.min_word_freq == 0 {
            return Err(Error::Config("min_word_freq must be at least 1".into()));
        }
        if self.train.modes.is_empty() || self.train.dims.is_empty() {
            return Err(Error::Config("train.modes and train.dims must be non-empty".into()));
        }
        for &dim in &self.train.dims {
            TrainConfig {
                dim,
                ..self.train.params.clone()
            }
            .validate()?;
        }
        if self.probe.tasks.is_empty() {
            return Ok(());
        }
        if self.probe.representations.is_empty() || self.probe.classifiers.is_empty() {
            return Err(Error::Config(
                "probe.representations and probe.classifiers must be non-empty".into(),
            ));
        }
        let mut names = std::collections::HashSet::new();
        for kind in &self.probe.classifiers {
            kind.validate()?;
            if !names.insert(kind.name()) {
                return Err(Error::Config(format!("classifier `{}` is listed twice", kind.name())));
            }
        }
        if self.analysis.neighbors_k == Some(0) {
            return Err(Error::Config("neighbors_k must be at least 1".into()));
        }
        Ok(())
    }
}
