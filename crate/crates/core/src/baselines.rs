//! Reference classifiers: nearest centroid, componentwise median (L1) and
//! the componentwise quantile classifier (CQC).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{misclassification_rate, Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::quantile::{interpolate_sorted, quantile_loss, QuantileLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Centroid,
    Median,
    Cqc,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::Centroid => "centroid",
            BaselineKind::Median => "median",
            BaselineKind::Cqc => "cqc",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    kind: BaselineKind,
    /// `K x p` class parameters (means, medians or θ-quantiles).
    params: DMatrix<f64>,
    theta: Option<QuantileLevel>,
}

impl BaselineModel {
    pub(crate) fn from_parts(
        kind: BaselineKind,
        params: DMatrix<f64>,
        theta: Option<QuantileLevel>,
    ) -> Result<Self> {
        if params.nrows() < 2 || params.ncols() == 0 {
            return Err(Error::Parse("baseline needs K >= 2 rows and p >= 1 columns".into()));
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite baseline parameter".into()));
        }
        if kind == BaselineKind::Cqc && theta.is_none() {
            return Err(Error::Parse("cqc model without theta".into()));
        }
        Ok(Self {
            kind,
            params,
            theta,
        })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn params(&self) -> &DMatrix<f64> {
        &self.params
    }

    pub fn theta(&self) -> Option<QuantileLevel> {
        self.theta
    }

    pub fn classes(&self) -> usize {
        self.params.nrows()
    }

    pub fn p(&self) -> usize {
        self.params.ncols()
    }

    /// Per-class distances of `y`; smaller is closer.
    pub fn distances(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: y.len(),
            });
        }
        let row = |k: usize| self.params.row(k);
        Ok((0..self.classes())
            .map(|k| match self.kind {
                BaselineKind::Centroid => row(k)
                    .iter()
                    .zip(y)
                    .map(|(m, v)| (v - m) * (v - m))
                    .sum::<f64>(),
                BaselineKind::Median => row(k).iter().zip(y).map(|(m, v)| (v - m).abs()).sum(),
                BaselineKind::Cqc => {
                    let theta = self.theta.expect("cqc carries theta");
                    cqc_distance(y, row(k).iter().copied(), theta)
                }
            })
            .collect())
    }

    pub fn predict(&self, y: &[f64]) -> Result<Label> {
        let d = self.distances(y)?;
        Ok(argmin_first(&d) + 1)
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        (0..x.nrows())
            .map(|i| {
                let y: Vec<f64> = x.row(i).iter().copied().collect();
                self.predict(&y)
            })
            .collect()
    }
}

fn cqc_distance(y: &[f64], q: impl Iterator<Item = f64>, theta: QuantileLevel) -> f64 {
    y.iter()
        .zip(q)
        .map(|(&v, qj)| quantile_loss(v, qj, theta))
        .sum()
}

fn argmin_first(v: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k] < v[best] {
            best = k;
        }
    }
    best
}

/// Applies `stat` to each (class, column) sample.
fn per_class_columns(
    data: &LabeledDataset,
    stat: impl Fn(&mut Vec<f64>) -> f64,
) -> Result<DMatrix<f64>> {
    let members = data.class_indices();
    if let Some(k) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(k + 1));
    }
    let x = data.observations();
    let mut out = DMatrix::zeros(data.classes(), data.p());
    let mut buf = Vec::new();
    for (k, rows) in members.iter().enumerate() {
        for j in 0..data.p() {
            buf.clear();
            buf.extend(rows.iter().map(|&i| x[(i, j)]));
            out[(k, j)] = stat(&mut buf);
        }
    }
    Ok(out)
}

fn sorted_quantile(buf: &mut [f64], theta: f64) -> f64 {
    buf.sort_unstable_by(f64::total_cmp);
    interpolate_sorted(buf, theta)
}

pub fn fit_centroid(data: &LabeledDataset) -> Result<BaselineModel> {
    let params = per_class_columns(data, |v| v.iter().sum::<f64>() / v.len() as f64)?;
    Ok(BaselineModel {
        kind: BaselineKind::Centroid,
        params,
        theta: None,
    })
}

pub fn fit_median(data: &LabeledDataset) -> Result<BaselineModel> {
    let params = per_class_columns(data, |v| sorted_quantile(v, 0.5))?;
    Ok(BaselineModel {
        kind: BaselineKind::Median,
        params,
        theta: None,
    })
}

/// Componentwise quantile classifier at a fixed level.
pub fn fit_cqc_at(data: &LabeledDataset, theta: QuantileLevel) -> Result<BaselineModel> {
    let params = per_class_columns(data, |v| sorted_quantile(v, theta.value()))?;
    Ok(BaselineModel {
        kind: BaselineKind::Cqc,
        params,
        theta: Some(theta),
    })
}

/// CQC with the level chosen by minimal training (resubstitution) error;
/// ties go to the level closest to 0.5, then the smaller level.
pub fn fit_cqc(data: &LabeledDataset, theta_grid: &[QuantileLevel]) -> Result<BaselineModel> {
    if theta_grid.is_empty() {
        return Err(Error::InvalidConfig("empty theta grid".into()));
    }
    let mut best: Option<(f64, f64, f64, BaselineModel)> = None;
    for &theta in theta_grid {
        let model = fit_cqc_at(data, theta)?;
        let err = misclassification_rate(&model.predict_rows(data.observations())?, data.labels());
        let key = (err, (theta.value() - 0.5).abs(), theta.value());
        let better = match &best {
            None => true,
            Some((e, d, t, _)) => {
                key.0 < *e || (key.0 == *e && (key.1 < *d || (key.1 == *d && key.2 < *t)))
            }
        };
        if better {
            best = Some((key.0, key.1, key.2, model));
        }
    }
    Ok(best.expect("grid is nonempty").3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(t: f64) -> QuantileLevel {
        QuantileLevel::new(t).unwrap()
    }

    fn pair(a: Vec<f64>, b: Vec<f64>) -> LabeledDataset {
        LabeledDataset::from_rows(&[a, b], vec![1, 2]).unwrap()
    }

    #[test]
    fn centroid_nearest_and_ties() {
        let m = fit_centroid(&pair(vec![0.0, 0.0], vec![4.0, 0.0])).unwrap();
        assert_eq!(m.predict(&[1.0, 0.0]).unwrap(), 1);
        assert_eq!(m.predict(&[3.5, 1.0]).unwrap(), 2);
        assert_eq!(m.predict(&[2.0, 7.0]).unwrap(), 1);
    }

    #[test]
    fn centroid_recovers_constant_classes() {
        let data = LabeledDataset::from_rows(
            &[vec![1.0, 2.0], vec![1.0, 2.0], vec![-3.0, 0.5], vec![-3.0, 0.5]],
            vec![1, 1, 2, 2],
        )
        .unwrap();
        let m = fit_centroid(&data).unwrap();
        assert_eq!(m.params(), &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]));
    }

    #[test]
    fn median_is_l1_nearest() {
        let m = fit_median(&pair(vec![0.0, 0.0], vec![3.0, 3.0])).unwrap();
        assert_eq!(m.predict(&[1.0, 1.0]).unwrap(), 1);
        assert_eq!(m.predict(&[2.0, 2.5]).unwrap(), 2);
        // L1 distances 3 and 3
        assert_eq!(m.predict(&[3.0, 0.0]).unwrap(), 1);
    }

    #[test]
    fn cqc_separable_prefers_central_level() {
        let data = LabeledDataset::from_rows(
            &[vec![0.0], vec![0.2], vec![9.0], vec![9.4]],
            vec![1, 1, 2, 2],
        )
        .unwrap();
        let m = fit_cqc(&data, &QuantileLevel::default_grid()).unwrap();
        assert_eq!(m.theta(), Some(lvl(0.5)));
        assert_eq!(m.predict_rows(data.observations()).unwrap(), data.labels());
    }

    #[test]
    fn cqc_two_class_hand_evaluation() {
        // classes {0, 1} and {4}; θ = 0.25 quantiles are 0.25 and 4
        let data =
            LabeledDataset::from_rows(&[vec![0.0], vec![1.0], vec![4.0]], vec![1, 1, 2]).unwrap();
        let m = fit_cqc_at(&data, lvl(0.25)).unwrap();
        assert_eq!(m.params()[(0, 0)], 0.25);
        // y = 2: Φ1 = 0.25 * 1.75 = 0.4375, Φ2 = 0.75 * 2 = 1.5, d = 1.0625 > 0
        assert_eq!(m.predict(&[2.0]).unwrap(), 1);
        // y = 3: Φ1 = 0.6875, Φ2 = 0.75, d > 0
        assert_eq!(m.predict(&[3.0]).unwrap(), 1);
        // y = 3.5: Φ1 = 0.8125, Φ2 = 0.375, d < 0
        assert_eq!(m.predict(&[3.5]).unwrap(), 2);
        // y = -1: Φ1 = 0.9375, Φ2 = 3.75
        assert_eq!(m.predict(&[-1.0]).unwrap(), 1);
    }

    #[test]
    fn cqc_at_half_matches_median() {
        let data = LabeledDataset::from_rows(
            &[vec![0.0, 1.0], vec![2.0, -1.0], vec![3.0, 3.0], vec![5.0, 2.0]],
            vec![1, 1, 2, 2],
        )
        .unwrap();
        let med = fit_median(&data).unwrap();
        let cqc = fit_cqc(&data, &[QuantileLevel::MEDIAN]).unwrap();
        for y in [[0.0, 0.0], [2.5, 1.0], [4.0, 4.0], [1.0, 2.0]] {
            assert_eq!(med.predict(&y).unwrap(), cqc.predict(&y).unwrap());
        }
    }

    #[test]
    fn errors() {
        assert!(fit_cqc(&pair(vec![0.0], vec![1.0]), &[]).is_err());
        let m = fit_median(&pair(vec![0.0], vec![1.0])).unwrap();
        assert!(m.predict(&[0.0, 1.0]).is_err());
    }
}
