//! Plain `key = value` text format for trained cascades.
//!
//! ```text
//! version = 1
//! qubits = 2
//! layers = 3
//! entangler = ring
//! class_order = 0 1 2
//! feature_mean = 0.1 -0.3
//! feature_scale = 1.2 0.8
//! feature_constant = 1
//! stages = 2
//! stage.0.class = 0
//! stage.0.theta = 0.01 -0.4 ...
//! stage.0.bias = 0.02
//! stage.0.threshold = 0.333
//! stage.0.constant = none
//! ```
//!
//! Lines starting with `#` are ignored. Floats are written in shortest
//! round-trip form, so a model reads back bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::cascade::{CascadeModel, FeatureMap};
use super::BinaryVqcModel;
use crate::error::{Error, Result};
use crate::qsim::{AnsatzCircuit, Entangler};

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl CascadeModel {
    pub fn to_text(&self) -> String {
        let first = &self.stages[0].circuit;
        let mut s = String::from("# qtransfer cascade model\nversion = 1\n");
        let _ = writeln!(s, "qubits = {}", first.qubits());
        let _ = writeln!(s, "layers = {}", first.layers());
        let ent = match first.entangler() {
            Entangler::Ring => "ring",
            Entangler::None => "none",
        };
        let _ = writeln!(s, "entangler = {ent}");
        let _ = writeln!(s, "class_order = {}", join(&self.class_order));
        let _ = writeln!(s, "feature_mean = {}", join(&self.feature_map.mean));
        let _ = writeln!(s, "feature_scale = {}", join(&self.feature_map.scale));
        let _ = writeln!(s, "feature_constant = {}", self.feature_map.constant);
        let _ = writeln!(s, "stages = {}", self.stages.len());
        for (k, st) in self.stages.iter().enumerate() {
            let _ = writeln!(s, "stage.{k}.class = {}", st.class_id);
            let _ = writeln!(s, "stage.{k}.theta = {}", join(st.theta()));
            let _ = writeln!(s, "stage.{k}.bias = {}", st.bias);
            let _ = writeln!(s, "stage.{k}.threshold = {}", st.threshold);
            let c = match st.constant {
                None => "none",
                Some(true) => "true",
                Some(false) => "false",
            };
            let _ = writeln!(s, "stage.{k}.constant = {c}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut kv = HashMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("model line {}: missing '='", no + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| -> Result<&String> {
            kv.get(k)
                .ok_or_else(|| Error::Input(format!("model is missing key '{k}'")))
        };
        fn one<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Input(format!("model key '{k}': cannot parse '{v}'")))
        }
        fn many<T: FromStr>(k: &str, v: &str) -> Result<Vec<T>> {
            v.split_whitespace().map(|x| one(k, x)).collect()
        }
        let version: u32 = one("version", get("version")?)?;
        if version != 1 {
            return Err(Error::Input(format!("unsupported model version {version}")));
        }
        let qubits: usize = one("qubits", get("qubits")?)?;
        let layers: usize = one("layers", get("layers")?)?;
        let entangler = match get("entangler")?.as_str() {
            "ring" => Entangler::Ring,
            "none" => Entangler::None,
            other => return Err(Error::Input(format!("unknown entangler '{other}'"))),
        };
        let class_order: Vec<usize> = many("class_order", get("class_order")?)?;
        let feature_map = FeatureMap {
            mean: many("feature_mean", get("feature_mean")?)?,
            scale: many("feature_scale", get("feature_scale")?)?,
            constant: one("feature_constant", get("feature_constant")?)?,
        };
        if feature_map.mean.len() != feature_map.scale.len() {
            return Err(Error::Input("feature mean and scale lengths differ".into()));
        }
        let n_stages: usize = one("stages", get("stages")?)?;
        if class_order.len() < 2 || n_stages + 1 != class_order.len() {
            return Err(Error::Input(format!(
                "{n_stages} stages do not fit {} classes",
                class_order.len()
            )));
        }
        let mut stages = Vec::with_capacity(n_stages);
        for k in 0..n_stages {
            let key = |f: &str| format!("stage.{k}.{f}");
            let theta: Vec<f64> = many(&key("theta"), get(&key("theta"))?)?;
            let constant = match get(&key("constant"))?.as_str() {
                "none" => None,
                "true" => Some(true),
                "false" => Some(false),
                other => return Err(Error::Input(format!("stage {k}: bad constant flag '{other}'"))),
            };
            stages.push(BinaryVqcModel {
                class_id: one(&key("class"), get(&key("class"))?)?,
                circuit: AnsatzCircuit::new(qubits, layers, entangler, theta)?,
                bias: one(&key("bias"), get(&key("bias"))?)?,
                threshold: one(&key("threshold"), get(&key("threshold"))?)?,
                constant,
                loss_trace: vec![],
            });
        }
        Ok(Self {
            feature_map,
            class_order,
            stages,
        })
    }
}

pub fn write_cascade(model: &CascadeModel, path: &Path) -> Result<()> {
    std::fs::write(path, model.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_cascade(path: &Path) -> Result<CascadeModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CascadeModel::from_text(&text)
}

#[cfg(test)]
mod tests {
    use super::super::{fit_cascade, predict_cascade, TrainConfig};
    use super::*;
    use crate::kernel_dda::LabelVector;
    use nalgebra::DMatrix;

    #[test]
    fn round_trip_is_exact() {
        let z = DMatrix::from_fn(2, 9, |r, c| ((r * 7 + c * 3) % 5) as f64 * 0.37 - (c / 3) as f64);
        let y = LabelVector::new((0..9).map(|c| c / 3).collect(), 3).unwrap();
        let m = fit_cascade(
            &z,
            &y,
            &TrainConfig {
                epochs: 10,
                ..Default::default()
            },
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        write_cascade(&m, &path).unwrap();
        let back = read_cascade(&path).unwrap();
        assert_eq!(back.class_order, m.class_order);
        assert_eq!(back.feature_map, m.feature_map);
        for (a, b) in back.stages.iter().zip(&m.stages) {
            assert_eq!(a.theta(), b.theta());
            assert_eq!(a.bias, b.bias);
            assert_eq!(a.threshold, b.threshold);
        }
        assert_eq!(predict_cascade(&back, &z).unwrap(), predict_cascade(&m, &z).unwrap());
    }

    #[test]
    fn malformed_text_errors() {
        assert!(CascadeModel::from_text("version = 2").is_err());
        assert!(CascadeModel::from_text("garbage").is_err());
        assert!(CascadeModel::from_text("version = 1\nqubits = 2").is_err());
    }
}
