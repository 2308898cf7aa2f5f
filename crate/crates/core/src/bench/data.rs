use std::path::{Path, PathBuf};

use crate::data_io::{gen_synthetic, load_mnist_idx, load_usps, preprocess_digits, read_bundle, DatasetBundle};
use crate::error::{Error, Result};

use super::config::{ExperimentConfig, Task};

/// Environment variable consulted when `digits.data_dir` is unset.
pub const DATA_DIR_ENV: &str = "QTF_DATA_DIR";

const MNIST_IMAGES: [&str; 2] = ["train-images-idx3-ubyte", "train-images.idx3-ubyte"];
const MNIST_LABELS: [&str; 2] = ["train-labels-idx1-ubyte", "train-labels.idx1-ubyte"];
const USPS_FILES: [&str; 4] = ["usps", "usps.txt", "zip.train", "usps.train"];

/// File name used by `gen-data` and by `synthetic_cache` lookups.
pub fn cache_file_name(task: Task) -> String {
    format!(
        "{}.qtf",
        serde_json::to_value(task)
            .expect("task serializes")
            .as_str()
            .expect("string")
    )
}

fn first_existing(dir: &Path, names: &[&str]) -> Result<PathBuf> {
    names
        .iter()
        .map(|n| dir.join(n))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::io(dir.join(names[0]), std::io::Error::from(std::io::ErrorKind::NotFound)))
}

/// Directory holding MNIST and USPS files, if one is configured.
pub fn digits_dir(cfg: &ExperimentConfig) -> Option<PathBuf> {
    cfg.digits
        .data_dir
        .clone()
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}

/// Build the bundles for `tasks`, in the same order.
pub fn load_bundles(cfg: &ExperimentConfig, tasks: &[Task]) -> Result<Vec<DatasetBundle>> {
    let mut synthetic: Option<(DatasetBundle, DatasetBundle)> = None;
    let mut digits: Option<(DatasetBundle, DatasetBundle)> = None;
    let mut out = Vec::with_capacity(tasks.len());
    for &task in tasks {
        let bundle = if task.is_digits() {
            if digits.is_none() {
                let dir = digits_dir(cfg).ok_or_else(|| {
                    Error::io(
                        PathBuf::from(format!("${DATA_DIR_ENV}")),
                        std::io::Error::new(std::io::ErrorKind::NotFound, "no digits data directory configured"),
                    )
                })?;
                let mnist = load_mnist_idx(
                    &first_existing(&dir, &MNIST_IMAGES)?,
                    &first_existing(&dir, &MNIST_LABELS)?,
                )?;
                let usps = load_usps(&first_existing(&dir, &USPS_FILES)?)?;
                let (n_m, n_u) = cfg.digits.sizes();
                let (mu, um) = preprocess_digits(&mnist, &usps, n_m, n_u, cfg.seed)?;
                let tag = |b: DatasetBundle| b.with_provenance("data_dir", dir.display());
                digits = Some((tag(mu), tag(um)));
            }
            let (mu, um) = digits.as_ref().expect("loaded");
            if task == Task::MnistUsps {
                mu.clone()
            } else {
                um.clone()
            }
        } else if let Some(dir) = &cfg.synthetic_cache {
            let (b, seed) = read_bundle(&dir.join(cache_file_name(task)))?;
            b.with_provenance("cache_seed", seed)
        } else {
            if synthetic.is_none() {
                let (a, b) = gen_synthetic(&cfg.synthetic, cfg.seed)?;
                let spec = serde_json::to_string(&cfg.synthetic)?;
                let tag = |x: DatasetBundle| x.with_provenance("seed", cfg.seed).with_provenance("synthetic", &spec);
                synthetic = Some((
                    tag(DatasetBundle::from_domains(&a, &b)?),
                    tag(DatasetBundle::from_domains(&b, &a)?),
                ));
            }
            let (ab, ba) = synthetic.as_ref().expect("generated");
            if task == Task::SaSb {
                ab.clone()
            } else {
                ba.clone()
            }
        };
        out.push(bundle);
    }
    Ok(out)
}
