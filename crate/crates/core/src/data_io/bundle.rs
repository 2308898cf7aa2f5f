use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel_dda::{DataMatrix, LabelVector};

/// Labelled samples from one domain, one sample per column.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub name: String,
    pub features: DMatrix<f64>,
    pub labels: LabelVector,
}

impl Domain {
    pub fn new(name: impl Into<String>, features: DMatrix<f64>, labels: LabelVector) -> Result<Self> {
        if features.ncols() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} samples but {} labels",
                features.ncols(),
                labels.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }
}

/// Held-out target labels. Every read is counted so tests can prove the
/// fitting code never touched them.
#[derive(Debug)]
pub struct TargetTruth {
    labels: LabelVector,
    reads: AtomicUsize,
}

impl TargetTruth {
    fn new(labels: LabelVector) -> Self {
        Self {
            labels,
            reads: AtomicUsize::new(0),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::SeqCst)
    }

    /// Fraction of `predicted` equal to the truth.
    pub fn accuracy(&self, predicted: &LabelVector) -> Result<f64> {
        self.reads.fetch_add(1, Ordering::SeqCst);
        if predicted.len() != self.labels.len() {
            return Err(Error::Dimension(format!(
                "{} predictions for {} target samples",
                predicted.len(),
                self.labels.len()
            )));
        }
        Ok(1.0 - predicted.changes_from(&self.labels) as f64 / self.labels.len() as f64)
    }

    /// Uncounted access for persistence code.
    pub(crate) fn unread(&self) -> &LabelVector {
        &self.labels
    }

    /// Direct access; counted like a scoring call.
    pub fn labels(&self) -> &LabelVector {
        self.reads.fetch_add(1, Ordering::SeqCst);
        &self.labels
    }
}

impl Clone for TargetTruth {
    fn clone(&self) -> Self {
        Self::new(self.labels.clone())
    }
}

/// Source-plus-target problem. Fitting code gets [`DatasetBundle::x`] and
/// [`DatasetBundle::y_s`]; the target labels live behind [`TargetTruth`].
#[derive(Debug, Clone)]
pub struct DatasetBundle {
    pub name: String,
    pub x: DataMatrix,
    pub y_s: LabelVector,
    pub truth: TargetTruth,
    pub provenance: BTreeMap<String, String>,
}

impl DatasetBundle {
    pub fn from_domains(source: &Domain, target: &Domain) -> Result<Self> {
        let x = DataMatrix::from_domains(&source.features, &target.features)?;
        let n_classes = source.labels.n_classes().max(target.labels.n_classes());
        let y_s = LabelVector::new(source.labels.as_slice().to_vec(), n_classes)?;
        let y_t = LabelVector::new(target.labels.as_slice().to_vec(), n_classes)?;
        let mut provenance = BTreeMap::new();
        provenance.insert("source".into(), source.name.clone());
        provenance.insert("target".into(), target.name.clone());
        Ok(Self {
            name: format!("{}->{}", source.name, target.name),
            x,
            y_s,
            truth: TargetTruth::new(y_t),
            provenance,
        })
    }

    pub fn with_provenance(mut self, key: &str, value: impl ToString) -> Self {
        self.provenance.insert(key.into(), value.to_string());
        self
    }
}
