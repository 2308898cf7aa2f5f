use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data_io::SyntheticSpec;
use crate::error::{Error, Result};
use crate::kernel_dda::DdaConfig;
use crate::qblas_oracle::QblasConfig;
use crate::vqtf::VqtfConfig;

/// Transfer directions, in table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    SaSb,
    SbSa,
    MnistUsps,
    UspsMnist,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::SaSb, Task::SbSa, Task::MnistUsps, Task::UspsMnist];

    pub fn label(self) -> &'static str {
        match self {
            Task::SaSb => "S_A->S_B",
            Task::SbSa => "S_B->S_A",
            Task::MnistUsps => "MNIST->USPS",
            Task::UspsMnist => "USPS->MNIST",
        }
    }

    pub fn is_digits(self) -> bool {
        matches!(self, Task::MnistUsps | Task::UspsMnist)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        match key.as_str() {
            "sasb" => Ok(Task::SaSb),
            "sbsa" => Ok(Task::SbSa),
            "mnistusps" => Ok(Task::MnistUsps),
            "uspsmnist" => Ok(Task::UspsMnist),
            _ => Err(Error::Config(format!("unknown task '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Na,
    Tca,
    Jda,
    Bda,
    Vqtf,
    QblasTf,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Na,
        Method::Tca,
        Method::Jda,
        Method::Bda,
        Method::Vqtf,
        Method::QblasTf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Na => "NA",
            Method::Tca => "TCA",
            Method::Jda => "JDA",
            Method::Bda => "BDA",
            Method::Vqtf => "VQTF",
            Method::QblasTf => "QBLAS-TF",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        Method::ALL
            .into_iter()
            .find(|m| m.label().to_ascii_lowercase().replace('-', "") == key)
            .ok_or_else(|| Error::Config(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Md,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "md" | "markdown" => Ok(ReportFormat::Md),
            _ => Err(Error::Config(format!("unknown report format '{s}'"))),
        }
    }
}

/// Where the digit files live and how many samples to draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DigitsConfig {
    /// Directory with `train-images-idx3-ubyte`, `train-labels-idx1-ubyte`
    /// and a USPS text file named `usps`, `usps.txt` or `zip.train`.
    pub data_dir: Option<PathBuf>,
    pub n_mnist: usize,
    pub n_usps: usize,
    /// Use 2000 / 1800 samples instead of the subsample sizes.
    pub full: bool,
}

impl Default for DigitsConfig {
    fn default() -> Self {
        Self {
            data_dir: None,
            n_mnist: 500,
            n_usps: 450,
            full: false,
        }
    }
}

impl DigitsConfig {
    pub fn sizes(&self) -> (usize, usize) {
        if self.full {
            (2000, 1800)
        } else {
            (self.n_mnist, self.n_usps)
        }
    }
}

/// Complete description of a benchmark run. Every field has a default.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tasks: Vec<Task>,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Embedding dimension for every method; `None` picks 2 on synthetic
    /// tasks and 20 on digits.
    pub d: Option<usize>,
    pub synthetic: SyntheticSpec,
    /// Read synthetic bundles written by `gen-data` instead of generating.
    pub synthetic_cache: Option<PathBuf>,
    pub digits: DigitsConfig,
    pub dda: DdaConfig,
    pub vqtf: VqtfConfig,
    pub qblas: QblasConfig,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<ReportFormat>,
    /// Worker threads; `0` uses the available parallelism.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tasks: vec![Task::SaSb, Task::SbSa],
            methods: vec![Method::Na, Method::Tca, Method::Jda, Method::Bda, Method::Vqtf],
            seed: 7,
            d: None,
            synthetic: SyntheticSpec::default(),
            synthetic_cache: None,
            digits: DigitsConfig::default(),
            dda: DdaConfig::default(),
            vqtf: VqtfConfig::default(),
            qblas: QblasConfig::default(),
            output_dir: None,
            formats: vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Md],
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    /// Parse JSON, or TOML when the text does not start with `{`.
    pub fn from_text(text: &str) -> Result<Self> {
        let value = parse_value(text)?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Value> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        parse_value(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.tasks.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("need at least one task and one method".into()));
        }
        if self.d == Some(0) {
            return Err(Error::Config("d must be at least 1".into()));
        }
        self.synthetic.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    /// Embedding dimension used on `task`.
    pub fn d_for(&self, task: Task) -> usize {
        self.d.unwrap_or(if task.is_digits() { 20 } else { 2 })
    }
}

fn parse_value(text: &str) -> Result<Value> {
    if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    } else {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        serde_json::to_value(table).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Apply `key.path=value` to a config tree. The value is read as JSON when
/// it parses, else as a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.trim().split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            _ => {
                return Err(Error::Config(format!(
                    "'{path}': '{}' is not a table",
                    keys[..i].join(".")
                )))
            }
        };
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    Err(Error::Config("empty override key".into()))
}
