//! Unit-norm projection directions.
//!
//! Directions are drawn from seeded generators: uniformly on the sphere, or
//! as Gaussian perturbations of a center direction (typically the estimated
//! optimal direction between two class locations).

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabeledDataset};
use crate::error::{Error, Result};
use crate::quantile::{quantile_of, QuantileLevel};
use crate::seed::rng_from;

const DEGENERATE_TOL: f64 = 1e-12;

/// A unit vector in `R^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords`; fails on a zero or non-finite vector.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let norm = euclidean_norm(&coords);
        if !norm.is_finite() || norm <= DEGENERATE_TOL {
            return Err(Error::DegenerateDirection);
        }
        Ok(Self(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// The `j`-th canonical basis vector of `R^p`.
    pub fn basis(p: usize, j: usize) -> Self {
        let mut v = vec![0.0; p];
        v[j] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, y: &[f64]) -> f64 {
        self.0.iter().zip(y).map(|(a, b)| a * b).sum()
    }

    /// Angle to `other` in radians.
    pub fn angle_to(&self, other: &Direction) -> f64 {
        self.dot(&other.0).clamp(-1.0, 1.0).acos()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        let norm = euclidean_norm(&v);
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Parse(format!("direction norm {norm} is not 1")));
        }
        Ok(Self(v))
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Vec<f64> {
        d.0
    }
}

fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// A nonempty collection of directions of equal dimension, optionally
/// tagged with the index of the quantile level each belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    directions: Vec<Direction>,
    groups: Option<Vec<usize>>,
}

impl DirectionSet {
    pub fn new(directions: Vec<Direction>) -> Result<Self> {
        let p = directions
            .first()
            .map(Direction::dim)
            .ok_or_else(|| Error::InvalidConfig("empty direction set".into()))?;
        if let Some(d) = directions.iter().find(|d| d.dim() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: d.dim(),
            });
        }
        Ok(Self {
            directions,
            groups: None,
        })
    }

    pub fn grouped(directions: Vec<Direction>, groups: Vec<usize>) -> Result<Self> {
        if groups.len() != directions.len() {
            return Err(Error::InvalidConfig(
                "group index length differs from direction count".into(),
            ));
        }
        let mut set = Self::new(directions)?;
        set.groups = Some(groups);
        Ok(set)
    }

    /// The canonical basis `e_1, ..., e_p`.
    pub fn canonical(p: usize) -> Self {
        Self {
            directions: (0..p).map(|j| Direction::basis(p, j)).collect(),
            groups: None,
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn groups(&self) -> Option<&[usize]> {
        self.groups.as_deref()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Direction> {
        self.directions.iter()
    }

    /// Directions as the columns of a `p x S` matrix.
    pub fn as_columns(&self) -> DMatrix<f64> {
        let (p, s) = (self.dim(), self.len());
        DMatrix::from_fn(p, s, |j, k| self.directions[k].0[j])
    }
}

fn gaussian_vector<R: Rng>(rng: &mut R, p: usize) -> Vec<f64> {
    (0..p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `s` directions uniform on the unit `p`-sphere (normalized Gaussian draws).
pub fn sample_uniform_sphere(p: usize, s: usize, seed: u64) -> Result<DirectionSet> {
    if p == 0 || s == 0 {
        return Err(Error::InvalidConfig(
            "sphere sampling needs p >= 1 and s >= 1".into(),
        ));
    }
    let mut rng = rng_from(seed, &[]);
    let dirs = (0..s)
        .map(|_| loop {
            // a zero draw has probability zero; redraw if it happens
            if let Ok(d) = Direction::normalized(gaussian_vector(&mut rng, p)) {
                break d;
            }
        })
        .collect();
    DirectionSet::new(dirs)
}

/// `(mu2 - mu1) / ||mu2 - mu1||`.
pub fn optimal_direction(mu1: &[f64], mu2: &[f64]) -> Result<Direction> {
    if mu1.len() != mu2.len() {
        return Err(Error::DimensionMismatch {
            expected: mu1.len(),
            found: mu2.len(),
        });
    }
    let diff: Vec<f64> = mu2.iter().zip(mu1).map(|(b, a)| b - a).collect();
    Direction::normalized(diff)
}

/// How class locations are estimated for the optimal direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationEstimator {
    /// Componentwise θ-quantiles.
    #[default]
    Quantile,
    /// Componentwise means.
    Mean,
}

/// Componentwise location vector of class `k`.
pub fn class_location(
    data: &LabeledDataset,
    k: Label,
    theta: QuantileLevel,
    estimator: LocationEstimator,
) -> Result<Vec<f64>> {
    if k == 0 || k > data.classes() {
        return Err(Error::InvalidConfig(format!("no class {k}")));
    }
    let rows: Vec<usize> = data
        .labels()
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| (l == k).then_some(i))
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyClass(k));
    }
    let x = data.observations();
    (0..data.p())
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|&i| x[(i, j)]).collect();
            match estimator {
                LocationEstimator::Quantile => quantile_of(&col, theta),
                LocationEstimator::Mean => Ok(col.iter().sum::<f64>() / col.len() as f64),
            }
        })
        .collect()
}

/// Optimal direction from class `k1` towards class `k2`, with locations
/// estimated by componentwise θ-quantiles.
pub fn estimate_optimal_direction(
    data: &LabeledDataset,
    k1: Label,
    k2: Label,
    theta: QuantileLevel,
) -> Result<Direction> {
    estimate_optimal_direction_with(data, k1, k2, theta, LocationEstimator::Quantile)
}

pub fn estimate_optimal_direction_with(
    data: &LabeledDataset,
    k1: Label,
    k2: Label,
    theta: QuantileLevel,
    estimator: LocationEstimator,
) -> Result<Direction> {
    let mu1 = class_location(data, k1, theta, estimator)?;
    let mu2 = class_location(data, k2, theta, estimator)?;
    optimal_direction(&mu1, &mu2)
}

/// `s` directions `normalize(center + spread * g)` with standard normal `g`.
pub fn sample_around(center: &Direction, s: usize, spread: f64, seed: u64) -> Result<DirectionSet> {
    if s == 0 {
        return Err(Error::InvalidConfig("s must be positive".into()));
    }
    if spread.is_nan() || spread < 0.0 || spread.is_infinite() {
        return Err(Error::InvalidConfig(format!("invalid spread {spread}")));
    }
    if spread == 0.0 {
        return DirectionSet::new(vec![center.clone(); s]);
    }
    let p = center.dim();
    let mut rng = rng_from(seed, &[]);
    let dirs = (0..s)
        .map(|_| loop {
            let g = gaussian_vector(&mut rng, p);
            let v = center.0.iter().zip(&g).map(|(c, z)| c + spread * z).collect();
            if let Ok(d) = Direction::normalized(v) {
                break d;
            }
        })
        .collect();
    DirectionSet::new(dirs)
}
