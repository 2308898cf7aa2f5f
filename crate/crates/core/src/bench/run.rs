use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data_io::DatasetBundle;
use crate::error::{Error, Result};
use crate::kernel_dda::{dda_fit_predict, no_adaptation, DataMatrix, DdaConfig, DdaVariant, LabelVector};
use crate::qblas_oracle::qblas_tf_reference;
use crate::vqtf::{vqtf_fit_predict, DiagnosticRecord};

use super::config::{ExperimentConfig, Method, Task};
use super::data::load_bundles;

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// One outer iteration of an alternating method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iter: usize,
    pub label_changes: usize,
    /// Eigenvalues of the solved projection (kept `rho_G` eigenvalues for
    /// the block-encoding reference).
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub task: Task,
    pub method: Method,
    pub seed: u64,
    pub accuracy: f64,
    pub n_source: usize,
    pub n_target: usize,
    pub trace: Vec<TracePoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<DiagnosticRecord>,
    /// Method configuration after task-level overrides.
    pub method_config: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTiming {
    pub task: Task,
    pub method: Method,
    pub wall_ms: u64,
}

/// Reproducible part of a report: identical bytes for identical configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub provenance: BTreeMap<String, BTreeMap<String, String>>,
    pub results: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub canonical: CanonicalReport,
    pub timing: Vec<RunTiming>,
    pub total_ms: u64,
}

impl PartialEq for ExperimentConfig {
    fn eq(&self, other: &Self) -> bool {
        self.to_value() == other.to_value()
    }
}

impl AccuracyReport {
    pub fn results(&self) -> &[RunResult] {
        &self.canonical.results
    }

    pub fn accuracy(&self, task: Task, method: Method) -> Option<f64> {
        self.results()
            .iter()
            .find(|r| r.task == task && r.method == method)
            .map(|r| r.accuracy)
    }

    pub fn wall_ms(&self, task: Task, method: Method) -> Option<u64> {
        self.timing
            .iter()
            .find(|t| t.task == task && t.method == method)
            .map(|t| t.wall_ms)
    }

    pub fn canonical_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.canonical)?)
    }
}

/// Labels and trace from one fit. Only `x` and `y_s` go in.
pub fn fit_method(
    method: Method,
    task: Task,
    cfg: &ExperimentConfig,
    x: &DataMatrix,
    y_s: &LabelVector,
) -> Result<(LabelVector, Vec<TracePoint>, Vec<DiagnosticRecord>, Value)> {
    let d = cfg.d_for(task);
    let dda = |variant: DdaVariant| -> Result<_> {
        let c = DdaConfig {
            variant,
            d,
            ..cfg.dda.clone()
        };
        let out = dda_fit_predict(x, y_s, &c)?;
        let trace = out
            .history
            .iter()
            .map(|h| TracePoint {
                iter: h.iter,
                label_changes: h.label_changes,
                values: h.eigvals.clone(),
            })
            .collect();
        Ok((out.labels, trace, Vec::new(), serde_json::to_value(&c)?))
    };
    match method {
        Method::Na => {
            let k = cfg.dda.knn_k;
            let echo = serde_json::json!({ "knn_k": k });
            Ok((no_adaptation(x, y_s, k)?, Vec::new(), Vec::new(), echo))
        }
        Method::Tca => dda(DdaVariant::Tca),
        Method::Jda => dda(DdaVariant::Jda),
        Method::Bda => dda(DdaVariant::Bda),
        Method::Vqtf => {
            let mut c = cfg.vqtf.clone();
            c.solver.d = d;
            let out = vqtf_fit_predict(x, y_s, &c)?;
            let trace = out
                .history
                .iter()
                .map(|h| TracePoint {
                    iter: h.iter,
                    label_changes: h.label_changes,
                    values: h.eigvals.clone(),
                })
                .collect();
            let diag = out.diagnostics();
            Ok((out.labels, trace, diag, serde_json::to_value(&c)?))
        }
        Method::QblasTf => {
            let c = crate::qblas_oracle::QblasConfig { d, ..cfg.qblas.clone() };
            let out = qblas_tf_reference(x, y_s, &c)?;
            let trace = out
                .history
                .iter()
                .map(|h| TracePoint {
                    iter: h.iter,
                    label_changes: h.label_changes,
                    values: h.kept.clone(),
                })
                .collect();
            Ok((out.labels, trace, Vec::new(), serde_json::to_value(&c)?))
        }
    }
}

/// Fit on the bundle's features and source labels, then score.
pub fn run_one(
    method: Method,
    task: Task,
    cfg: &ExperimentConfig,
    bundle: &DatasetBundle,
) -> Result<(RunResult, RunTiming)> {
    let start = Instant::now();
    let (labels, trace, diagnostics, method_config) = fit_method(method, task, cfg, &bundle.x, &bundle.y_s)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    // The only place the target truth is read.
    let accuracy = bundle.truth.accuracy(&labels)?;
    log::info!("{task} {method}: accuracy {accuracy:.4} in {wall_ms} ms");
    Ok((
        RunResult {
            task,
            method,
            seed: cfg.seed,
            accuracy,
            n_source: bundle.x.n_source(),
            n_target: bundle.x.n_target(),
            trace,
            diagnostics,
            method_config,
        },
        RunTiming { task, method, wall_ms },
    ))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AccuracyReport> {
    cfg.validate()?;
    let mut tasks = cfg.tasks.clone();
    tasks.sort();
    tasks.dedup();
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let bundles = load_bundles(cfg, &tasks)?;
    run_on_bundles(cfg, &tasks, &methods, &bundles)
}

/// Run every `(task, method)` pair over preloaded bundles, concurrently.
pub fn run_on_bundles(
    cfg: &ExperimentConfig,
    tasks: &[Task],
    methods: &[Method],
    bundles: &[DatasetBundle],
) -> Result<AccuracyReport> {
    if tasks.len() != bundles.len() {
        return Err(Error::Config(format!(
            "{} tasks but {} bundles",
            tasks.len(),
            bundles.len()
        )));
    }
    let start = Instant::now();
    let jobs: Vec<(usize, Method)> = (0..tasks.len())
        .flat_map(|t| methods.iter().map(move |&m| (t, m)))
        .collect();
    let threads = match cfg.threads {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(jobs.len())
    .max(1);
    let next = AtomicUsize::new(0);
    type Slot = Option<Result<(RunResult, RunTiming)>>;
    let slots: Mutex<Vec<Slot>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(t, m)) = jobs.get(i) else { break };
                let out = run_one(m, tasks[t], cfg, &bundles[t]);
                slots.lock().expect("result lock")[i] = Some(out);
            });
        }
    });
    let mut results = Vec::with_capacity(jobs.len());
    let mut timing = Vec::with_capacity(jobs.len());
    for slot in slots.into_inner().expect("result lock") {
        let (r, t) = slot.expect("every job ran")?;
        results.push(r);
        timing.push(t);
    }
    let provenance = tasks
        .iter()
        .zip(bundles)
        .map(|(t, b)| (t.label().to_string(), b.provenance.clone()))
        .collect();
    Ok(AccuracyReport {
        canonical: CanonicalReport {
            version: VERSION.to_string(),
            config: cfg.clone(),
            provenance,
            results,
        },
        timing,
        total_ms: start.elapsed().as_millis() as u64,
    })
}
