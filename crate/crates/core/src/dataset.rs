use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Class label in `1..=K`.
pub type Label = usize;

/// An `n x p` observation matrix with a class label per row.
///
/// Every label in `1..=K` occurs at least once and all entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    observations: DMatrix<f64>,
    labels: Vec<Label>,
    classes: usize,
}

impl LabeledDataset {
    /// Builds a dataset, inferring `K` as the largest label.
    pub fn new(observations: DMatrix<f64>, labels: Vec<Label>) -> Result<Self> {
        let k = labels.iter().copied().max().unwrap_or(0);
        Self::with_classes(observations, labels, k)
    }

    /// Builds a dataset over a fixed class set `1..=classes`.
    pub fn with_classes(
        observations: DMatrix<f64>,
        labels: Vec<Label>,
        classes: usize,
    ) -> Result<Self> {
        let n = observations.nrows();
        if labels.len() != n {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} observations",
                labels.len(),
                n
            )));
        }
        if observations.ncols() == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if classes < 2 {
            return Err(Error::InvalidDataset("at least two classes required".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > classes) {
            return Err(Error::InvalidDataset(format!(
                "label {bad} outside 1..={classes}"
            )));
        }
        if observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite observation".into()));
        }
        let counts = count_labels(&labels, classes);
        if let Some(k) = counts.iter().position(|&c| c == 0) {
            return Err(Error::EmptyClass(k + 1));
        }
        Ok(Self {
            observations,
            labels,
            classes,
        })
    }

    /// Convenience constructor from row vectors.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidDataset("ragged rows".into()));
        }
        let m = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        Self::new(m, labels)
    }

    pub fn n(&self) -> usize {
        self.observations.nrows()
    }

    pub fn p(&self) -> usize {
        self.observations.ncols()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn observations(&self) -> &DMatrix<f64> {
        &self.observations
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.observations.row(i).iter().copied().collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        count_labels(&self.labels, self.classes)
    }

    /// Row indices of each class, in ascending row order.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.classes];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l - 1].push(i);
        }
        out
    }

    /// Rows `indices`, keeping the class set. Fails if a class goes missing.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let m = self.observations.select_rows(indices.iter());
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::with_classes(m, labels, self.classes)
    }

    /// The dataset without row `i`.
    pub fn without(&self, i: usize) -> Result<Self> {
        let keep: Vec<usize> = (0..self.n()).filter(|&j| j != i).collect();
        self.subset(&keep)
    }

    /// Appends columns; `extra` must have `n` rows.
    pub fn with_extra_columns(&self, extra: &DMatrix<f64>) -> Result<Self> {
        if extra.nrows() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: extra.nrows(),
            });
        }
        let (n, p, q) = (self.n(), self.p(), extra.ncols());
        let m = DMatrix::from_fn(n, p + q, |i, j| {
            if j < p {
                self.observations[(i, j)]
            } else {
                extra[(i, j - p)]
            }
        });
        Self::with_classes(m, self.labels.clone(), self.classes)
    }

    /// Applies `f(label, value)` to every entry.
    pub fn map_entries(&self, f: impl Fn(Label, f64) -> f64) -> Result<Self> {
        let mut m = self.observations.clone();
        for i in 0..m.nrows() {
            let l = self.labels[i];
            for j in 0..m.ncols() {
                m[(i, j)] = f(l, m[(i, j)]);
            }
        }
        Self::with_classes(m, self.labels.clone(), self.classes)
    }

    /// Row-wise concatenation of datasets sharing `p` and the class set.
    pub fn concat(parts: &[&LabeledDataset]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDataset("nothing to concatenate".into()))?;
        let p = first.p();
        let classes = parts.iter().map(|d| d.classes).max().unwrap_or(0);
        if let Some(bad) = parts.iter().find(|d| d.p() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: bad.p(),
            });
        }
        let n: usize = parts.iter().map(|d| d.n()).sum();
        let mut m = DMatrix::zeros(n, p);
        let mut labels = Vec::with_capacity(n);
        let mut r = 0;
        for d in parts {
            m.rows_mut(r, d.n()).copy_from(&d.observations);
            labels.extend_from_slice(&d.labels);
            r += d.n();
        }
        Self::with_classes(m, labels, classes)
    }
}

fn count_labels(labels: &[Label], classes: usize) -> Vec<usize> {
    let mut counts = vec![0; classes];
    for &l in labels {
        if (1..=classes).contains(&l) {
            counts[l - 1] += 1;
        }
    }
    counts
}

/// Fraction of positions where `predicted` and `truth` disagree.
pub fn misclassification_rate(predicted: &[Label], truth: &[Label]) -> f64 {
    assert_eq!(predicted.len(), truth.len());
    if truth.is_empty() {
        return 0.0;
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    wrong as f64 / truth.len() as f64
}
