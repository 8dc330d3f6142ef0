//! Empirical quantiles and the asymmetric quantile (check) loss.
//!
//! Sample quantiles use linear interpolation between order statistics at
//! position `h = (n - 1) * theta + 1` (1-based), which is continuous in
//! `theta` and always lies within the sample range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A quantile level strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct QuantileLevel(f64);

impl QuantileLevel {
    pub fn new(theta: f64) -> Result<Self> {
        if theta > 0.0 && theta < 1.0 {
            Ok(Self(theta))
        } else {
            Err(Error::InvalidQuantileLevel(theta))
        }
    }

    pub const MEDIAN: QuantileLevel = QuantileLevel(0.5);

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `n` equally spaced levels `1/(n+1), ..., n/(n+1)`.
    pub fn uniform_grid(n: usize) -> Vec<QuantileLevel> {
        (1..=n)
            .map(|i| QuantileLevel(i as f64 / (n + 1) as f64))
            .collect()
    }

    /// The default selection grid `{0.05, 0.10, ..., 0.95}`.
    pub fn default_grid() -> Vec<QuantileLevel> {
        (1..=19).map(|i| QuantileLevel(i as f64 * 0.05)).collect()
    }
}

impl TryFrom<f64> for QuantileLevel {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        QuantileLevel::new(v)
    }
}

impl From<QuantileLevel> for f64 {
    fn from(q: QuantileLevel) -> f64 {
        q.0
    }
}

/// Nonempty sample stored in nondecreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample(Vec<f64>);

impl SortedSample {
    /// Sorts `values`. NaN entries are rejected.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Numerical("NaN in sample".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self(values))
    }

    pub fn from_sorted(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[0] > w[1]) {
            return Err(Error::UnsortedSample);
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn quantile(&self, theta: QuantileLevel) -> f64 {
        interpolate_sorted(&self.0, theta.value())
    }
}

/// Interpolated quantile of an already sorted, nonempty slice.
pub(crate) fn interpolate_sorted(sorted: &[f64], theta: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    // 0-based position of h = (n-1)θ + 1
    let pos = (n - 1) as f64 * theta;
    let lo = (pos.floor() as usize).min(n - 1);
    let frac = pos - lo as f64;
    if lo + 1 >= n || frac == 0.0 {
        return sorted[lo];
    }
    let (a, b) = (sorted[lo], sorted[lo + 1]);
    let v = a + frac * (b - a);
    v.clamp(a, b)
}

pub fn empirical_quantile(sample: &SortedSample, theta: QuantileLevel) -> f64 {
    sample.quantile(theta)
}

/// Quantile of an unsorted slice, sorting a scratch copy.
pub fn quantile_of(values: &[f64], theta: QuantileLevel) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut buf = values.to_vec();
    buf.sort_by(f64::total_cmp);
    Ok(interpolate_sorted(&buf, theta.value()))
}

/// Asymmetric quantile loss `{θ + (1 - 2θ) I(z < q)} |z - q|`.
#[inline]
pub fn quantile_loss(z: f64, q: f64, theta: QuantileLevel) -> f64 {
    let t = theta.value();
    let e = z - q;
    if e < 0.0 {
        (1.0 - t) * (-e)
    } else {
        t * e
    }
}

/// `Φ(θ; z | q2) - Φ(θ; z | q1)`; bounded above by `q2 - q1` when `q1 <= q2`.
#[inline]
pub fn loss_gap(z: f64, q1: f64, q2: f64, theta: QuantileLevel) -> f64 {
    quantile_loss(z, q2, theta) - quantile_loss(z, q1, theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lvl(t: f64) -> QuantileLevel {
        QuantileLevel::new(t).unwrap()
    }

    #[test]
    fn level_rejects_boundaries() {
        assert!(QuantileLevel::new(0.0).is_err());
        assert!(QuantileLevel::new(1.0).is_err());
        assert!(QuantileLevel::new(f64::NAN).is_err());
        assert!(QuantileLevel::new(-0.2).is_err());
        assert_eq!(QuantileLevel::new(0.3).unwrap().value(), 0.3);
    }

    #[test]
    fn default_grid_has_nineteen_points() {
        let g = QuantileLevel::default_grid();
        assert_eq!(g.len(), 19);
        assert!((g[0].value() - 0.05).abs() < 1e-15);
        assert!((g[18].value() - 0.95).abs() < 1e-15);
    }

    #[test]
    fn empirical_quantile_examples() {
        let single = SortedSample::from_sorted(vec![7.0]).unwrap();
        for t in [0.01, 0.5, 0.99] {
            assert_eq!(single.quantile(lvl(t)), 7.0);
        }
        let four = SortedSample::from_sorted(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((four.quantile(lvl(0.25)) - 1.75).abs() < 1e-15);
        let three = SortedSample::from_unsorted(vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!(three.quantile(lvl(0.5)), 2.0);
    }

    #[test]
    fn empty_and_unsorted_samples_are_rejected() {
        assert!(matches!(
            SortedSample::from_unsorted(vec![]),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            SortedSample::from_sorted(vec![2.0, 1.0]),
            Err(Error::UnsortedSample)
        ));
        assert!(matches!(quantile_of(&[], lvl(0.5)), Err(Error::EmptySample)));
    }

    #[test]
    fn ties_form_plateaus() {
        let s = SortedSample::from_sorted(vec![1.0, 2.0, 2.0, 2.0, 5.0]).unwrap();
        assert_eq!(s.quantile(lvl(0.3)), 2.0);
        assert_eq!(s.quantile(lvl(0.7)), 2.0);
    }

    #[test]
    fn quantile_loss_examples() {
        assert_eq!(quantile_loss(2.0, 2.0, lvl(0.7)), 0.0);
        assert!((quantile_loss(5.0, 2.0, lvl(0.3)) - 0.9).abs() < 1e-15);
        assert!((quantile_loss(1.0, 2.0, lvl(0.3)) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn loss_gap_examples() {
        let half = lvl(0.5);
        assert_eq!(loss_gap(1.0, 0.0, 2.0, half), 0.0);
        assert_eq!(loss_gap(-1.0, 0.0, 2.0, half), 1.0);
        assert_eq!(loss_gap(3.0, 0.0, 2.0, half), -1.0);
    }
}
