//! The directional quantile classifier.
//!
//! A trained model holds, for each (quantile level, direction) pair, the
//! per-class directional quantiles of the training data and a weight. A new
//! point `y` gets the class score
//!
//! ```text
//! score_k(y) = sum_{r,s} w_rs * Φ(θ_r; u_rs·y | Q_k(θ_r; u_rs))
//! ```
//!
//! and is assigned to the class with the smallest score. The weights are the
//! unit-norm minimizer `-Δ̃ / ||Δ̃||` of the linear training criterion `w·Δ̃`,
//! where `Δ̃_rs` totals, over training points, the own-class loss minus the
//! best other-class loss along `u_rs`.
//!
//! `fit` picks a single quantile level from a grid by stratified k-fold
//! cross-validation, drawing a fresh direction set per level, then refits
//! on all data at the selected level.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Label, LabeledDataset};
use crate::directions::{
    estimate_optimal_direction_with, sample_around, sample_uniform_sphere, DirectionSet,
    LocationEstimator,
};
use crate::error::{Error, Result};
use crate::quantile::{interpolate_sorted, quantile_loss, QuantileLevel};
use crate::seed::{derive_seed, rng_from};

const FOLD_STREAM: u64 = 0xF01D;
const CV_STREAM: u64 = 0xC5;
const REFIT_STREAM: u64 = 0xEF17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionMode {
    /// Uniform on the unit sphere.
    Uniform,
    /// Gaussian perturbations around the estimated pairwise optimal directions.
    #[default]
    OptimalPerturbed,
}

impl std::str::FromStr for DirectionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "optimal-perturbed" | "optimal" => Ok(Self::OptimalPerturbed),
            other => Err(Error::Parse(format!("unknown direction mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqcConfig {
    pub theta_grid: Vec<QuantileLevel>,
    /// Directions drawn per quantile level; `None` means `max(p, n)`.
    pub directions_per_theta: Option<usize>,
    pub direction_mode: DirectionMode,
    pub spread: f64,
    pub cv_folds: usize,
    pub seed: u64,
    pub clip_nonnegative_weights: bool,
    pub location: LocationEstimator,
}

impl Default for DqcConfig {
    fn default() -> Self {
        Self {
            theta_grid: QuantileLevel::default_grid(),
            directions_per_theta: None,
            direction_mode: DirectionMode::OptimalPerturbed,
            spread: 0.25,
            cv_folds: 5,
            seed: 0,
            clip_nonnegative_weights: false,
            location: LocationEstimator::Quantile,
        }
    }
}

impl DqcConfig {
    pub fn validate(&self, data: &LabeledDataset) -> Result<()> {
        if self.theta_grid.is_empty() {
            return Err(Error::InvalidConfig("empty theta grid".into()));
        }
        let mut sorted: Vec<f64> = self.theta_grid.iter().map(|t| t.value()).collect();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("duplicate theta in grid".into()));
        }
        if self.directions_per_theta == Some(0) {
            return Err(Error::InvalidConfig("directions_per_theta must be positive".into()));
        }
        if !(self.spread >= 0.0 && self.spread.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid spread {}", self.spread)));
        }
        if self.theta_grid.len() > 1 && (self.cv_folds < 2 || self.cv_folds > data.n()) {
            return Err(Error::InvalidConfig(format!(
                "cv_folds must lie in 2..={}, got {}",
                data.n(),
                self.cv_folds
            )));
        }
        Ok(())
    }

    pub fn direction_count(&self, data: &LabeledDataset) -> usize {
        self.directions_per_theta
            .unwrap_or_else(|| data.p().max(data.n()))
    }
}

/// Cross-validation record for the level-selection step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaSelection {
    pub grid: Vec<QuantileLevel>,
    /// Misclassified held-out points per grid entry.
    pub cv_errors: Vec<usize>,
    pub selected: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedDqc {
    pub(crate) p: usize,
    pub(crate) classes: usize,
    pub(crate) thetas: Vec<QuantileLevel>,
    /// Grouped by index into `thetas`.
    pub(crate) directions: DirectionSet,
    pub(crate) weights: Vec<f64>,
    /// `K x S` directional quantiles.
    pub(crate) class_quantiles: DMatrix<f64>,
    pub(crate) priors: Vec<f64>,
    pub(crate) selection: Option<ThetaSelection>,
    pub(crate) config: Option<DqcConfig>,
    columns: DMatrix<f64>,
    level_of: Vec<QuantileLevel>,
}

/// How the direction weights of a model are set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    /// Closed-form minimizer, optionally clipped to nonnegative entries.
    Optimal { clip: bool },
    /// All weights equal to one.
    Unit,
}

/// Per-class θ-quantiles of the projections `u_s·x_i`, as a `K x S` matrix.
pub fn directional_class_quantiles(
    data: &LabeledDataset,
    theta: QuantileLevel,
    dirs: &DirectionSet,
) -> Result<DMatrix<f64>> {
    check_dim(data.p(), dirs.dim())?;
    let proj = data.observations() * dirs.as_columns();
    let levels = vec![theta; dirs.len()];
    quantiles_from_projection(&proj, data.labels(), data.classes(), &levels)
}

/// `Δ̃_s = Σ_k Σ_{i: l_i = k} [Φ_k(θ; u_s·x_i) - min_{k' != k} Φ_k'(θ; u_s·x_i)]`.
pub fn delta_tilde(
    data: &LabeledDataset,
    theta: QuantileLevel,
    dirs: &DirectionSet,
    q: &DMatrix<f64>,
) -> Result<Vec<f64>> {
    check_dim(data.p(), dirs.dim())?;
    if q.nrows() != data.classes() || q.ncols() != dirs.len() {
        return Err(Error::DimensionMismatch {
            expected: data.classes() * dirs.len(),
            found: q.nrows() * q.ncols(),
        });
    }
    let proj = data.observations() * dirs.as_columns();
    let levels = vec![theta; dirs.len()];
    Ok(delta_from_projection(&proj, data.labels(), q, &levels))
}

/// Unit-norm minimizer of `w·Δ̃`: `-Δ̃ / ||Δ̃||`.
///
/// A zero `Δ̃` gives the uniform vector `1/√S`. With `clip`, negative
/// entries are zeroed and the rest renormalized, falling back to uniform
/// when nothing positive remains.
pub fn solve_weights(delta: &[f64], clip: bool) -> Vec<f64> {
    let s = delta.len();
    let uniform = || vec![1.0 / (s as f64).sqrt(); s];
    if s == 0 {
        return Vec::new();
    }
    let norm = l2(delta);
    if norm == 0.0 || !norm.is_finite() {
        return uniform();
    }
    let mut w: Vec<f64> = delta.iter().map(|d| -d / norm).collect();
    if clip {
        w.iter_mut().for_each(|v| *v = v.max(0.0));
        let n = l2(&w);
        if n == 0.0 {
            return uniform();
        }
        w.iter_mut().for_each(|v| *v /= n);
    }
    w
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn quantiles_from_projection(
    proj: &DMatrix<f64>,
    labels: &[Label],
    classes: usize,
    levels: &[QuantileLevel],
) -> Result<DMatrix<f64>> {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l - 1].push(i);
    }
    if let Some(k) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyClass(k + 1));
    }
    let mut q = DMatrix::zeros(classes, proj.ncols());
    let mut buf = Vec::new();
    for (s, level) in levels.iter().enumerate() {
        let col = proj.column(s);
        for (k, rows) in members.iter().enumerate() {
            buf.clear();
            buf.extend(rows.iter().map(|&i| col[i]));
            buf.sort_unstable_by(f64::total_cmp);
            q[(k, s)] = interpolate_sorted(&buf, level.value());
        }
    }
    Ok(q)
}

fn delta_from_projection(
    proj: &DMatrix<f64>,
    labels: &[Label],
    q: &DMatrix<f64>,
    levels: &[QuantileLevel],
) -> Vec<f64> {
    let classes = q.nrows();
    let mut losses = vec![0.0; classes];
    (0..proj.ncols())
        .map(|s| {
            let col = proj.column(s);
            let theta = levels[s];
            let mut total = 0.0;
            for (i, &l) in labels.iter().enumerate() {
                for (k, loss) in losses.iter_mut().enumerate() {
                    *loss = quantile_loss(col[i], q[(k, s)], theta);
                }
                let own = losses[l - 1];
                let best_other = losses
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != l - 1)
                    .map(|(_, &v)| v)
                    .fold(f64::INFINITY, f64::min);
                total += own - best_other;
            }
            total
        })
        .collect()
}

fn argmin_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in scores.iter().enumerate().skip(1) {
        if v < scores[best] {
            best = k;
        }
    }
    best
}

impl TrainedDqc {
    /// Builds a model from explicit quantile levels and direction sets,
    /// computing class quantiles on `data` and weights per `rule`.
    ///
    /// Weights from [`WeightRule::Optimal`] have unit norm; [`WeightRule::Unit`]
    /// keeps every weight at one.
    pub fn from_levels(
        data: &LabeledDataset,
        levels: &[(QuantileLevel, DirectionSet)],
        rule: WeightRule,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidConfig("no quantile levels".into()));
        }
        let p = data.p();
        let mut dirs = Vec::new();
        let mut groups = Vec::new();
        let mut thetas = Vec::with_capacity(levels.len());
        for (r, (theta, set)) in levels.iter().enumerate() {
            check_dim(p, set.dim())?;
            thetas.push(*theta);
            dirs.extend(set.iter().cloned());
            groups.extend(std::iter::repeat_n(r, set.len()));
        }
        let directions = DirectionSet::grouped(dirs, groups)?;
        let level_of: Vec<QuantileLevel> = directions
            .groups()
            .unwrap_or_default()
            .iter()
            .map(|&r| thetas[r])
            .collect();
        let columns = directions.as_columns();
        let proj = data.observations() * &columns;
        let class_quantiles =
            quantiles_from_projection(&proj, data.labels(), data.classes(), &level_of)?;
        let weights = match rule {
            WeightRule::Unit => vec![1.0; directions.len()],
            WeightRule::Optimal { clip } => {
                let delta = delta_from_projection(&proj, data.labels(), &class_quantiles, &level_of);
                solve_weights(&delta, clip)
            }
        };
        let n = data.n() as f64;
        let priors = data.class_counts().iter().map(|&c| c as f64 / n).collect();
        Ok(Self {
            p,
            classes: data.classes(),
            thetas,
            directions,
            weights,
            class_quantiles,
            priors,
            selection: None,
            config: None,
            columns,
            level_of,
        })
    }

    /// Reassembles a model from stored parts (used by the model-file reader).
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        thetas: Vec<QuantileLevel>,
        directions: DirectionSet,
        weights: Vec<f64>,
        class_quantiles: DMatrix<f64>,
        priors: Vec<f64>,
        selection: Option<ThetaSelection>,
        config: Option<DqcConfig>,
    ) -> Result<Self> {
        let s = directions.len();
        let groups = directions
            .groups()
            .map(<[usize]>::to_vec)
            .unwrap_or_else(|| vec![0; s]);
        if groups.iter().any(|&r| r >= thetas.len()) {
            return Err(Error::Parse("direction group refers to a missing theta".into()));
        }
        if weights.len() != s || class_quantiles.ncols() != s {
            return Err(Error::Parse("weights/quantiles do not match direction count".into()));
        }
        if class_quantiles.nrows() != priors.len() || priors.len() < 2 {
            return Err(Error::Parse("class count mismatch".into()));
        }
        if class_quantiles.iter().chain(&weights).any(|v| !v.is_finite()) {
            return Err(Error::Parse("non-finite model entry".into()));
        }
        let level_of = groups.iter().map(|&r| thetas[r]).collect();
        let directions = DirectionSet::grouped(directions.directions().to_vec(), groups)?;
        Ok(Self {
            p: directions.dim(),
            classes: priors.len(),
            thetas,
            columns: directions.as_columns(),
            directions,
            weights,
            class_quantiles,
            priors,
            selection,
            config,
            level_of,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn thetas(&self) -> &[QuantileLevel] {
        &self.thetas
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn class_quantiles(&self) -> &DMatrix<f64> {
        &self.class_quantiles
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn selection(&self) -> Option<&ThetaSelection> {
        self.selection.as_ref()
    }

    pub fn config(&self) -> Option<&DqcConfig> {
        self.config.as_ref()
    }

    fn scores_from_projection(&self, z: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut scores = vec![0.0; self.classes];
        for (s, zs) in z.enumerate() {
            let w = self.weights[s];
            let theta = self.level_of[s];
            for (k, score) in scores.iter_mut().enumerate() {
                *score += w * quantile_loss(zs, self.class_quantiles[(k, s)], theta);
            }
        }
        scores
    }

    /// Weighted directional losses of `y` to each class.
    pub fn score(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.p, y.len())?;
        let z = self.directions.iter().map(|u| u.dot(y));
        Ok(self.scores_from_projection(z))
    }

    /// Class with the smallest score, ties to the smallest label.
    pub fn predict(&self, y: &[f64]) -> Result<Label> {
        Ok(argmin_first(&self.score(y)?) + 1)
    }

    /// Two-class discrepancy `score_2 - score_1`; positive means class 1.
    pub fn discrepancy(&self, y: &[f64]) -> Result<f64> {
        let s = self.score(y)?;
        Ok(s[1] - s[0])
    }

    /// Scores for each row of `x` (`m x p`).
    pub fn score_rows(&self, x: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
        check_dim(self.p, x.ncols())?;
        let proj = x * &self.columns;
        Ok((0..proj.nrows())
            .map(|i| self.scores_from_projection(proj.row(i).iter().copied()))
            .collect())
    }

    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        Ok(self
            .score_rows(x)?
            .iter()
            .map(|s| argmin_first(s) + 1)
            .collect())
    }
}

/// Stratified fold assignment: each class is shuffled and dealt round-robin
/// into `folds` buckets, continuing the rotation across classes.
pub fn stratified_folds(data: &LabeledDataset, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    use rand::seq::SliceRandom;
    let mut rng = rng_from(seed, &[FOLD_STREAM]);
    let mut out = vec![Vec::new(); folds];
    let mut slot = 0;
    for mut members in data.class_indices() {
        members.shuffle(&mut rng);
        for i in members {
            out[slot % folds].push(i);
            slot += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// Draws the direction set used at one quantile level.
pub fn draw_directions(
    data: &LabeledDataset,
    theta: QuantileLevel,
    count: usize,
    config: &DqcConfig,
    seed: u64,
) -> Result<DirectionSet> {
    let p = data.p();
    match config.direction_mode {
        DirectionMode::Uniform => sample_uniform_sphere(p, count, seed),
        DirectionMode::OptimalPerturbed => {
            let k = data.classes();
            let pairs: Vec<(Label, Label)> = (1..=k)
                .flat_map(|a| (a + 1..=k).map(move |b| (a, b)))
                .collect();
            let mut per_pair = Vec::with_capacity(pairs.len());
            for (idx, &(a, b)) in pairs.iter().enumerate() {
                let share = count / pairs.len() + usize::from(idx < count % pairs.len());
                if share == 0 {
                    per_pair.push(Vec::new());
                    continue;
                }
                let pair_seed = derive_seed(seed, &[idx as u64]);
                let set = match estimate_optimal_direction_with(data, a, b, theta, config.location)
                {
                    Ok(center) => sample_around(&center, share, config.spread, pair_seed)?,
                    // identical class locations: no preferred axis for this pair
                    Err(Error::DegenerateDirection) => sample_uniform_sphere(p, share, pair_seed)?,
                    Err(e) => return Err(e),
                };
                per_pair.push(set.directions().to_vec());
            }
            // round-robin interleave across pairs
            let mut dirs = Vec::with_capacity(count);
            let mut cursors = vec![0; pairs.len()];
            while dirs.len() < count {
                for (idx, list) in per_pair.iter().enumerate() {
                    if cursors[idx] < list.len() {
                        dirs.push(list[cursors[idx]].clone());
                        cursors[idx] += 1;
                    }
                }
            }
            DirectionSet::new(dirs)
        }
    }
}

fn fit_single_level(
    data: &LabeledDataset,
    theta: QuantileLevel,
    count: usize,
    config: &DqcConfig,
    seed: u64,
) -> Result<TrainedDqc> {
    let dirs = draw_directions(data, theta, count, config, seed)?;
    TrainedDqc::from_levels(
        data,
        &[(theta, dirs)],
        WeightRule::Optimal {
            clip: config.clip_nonnegative_weights,
        },
    )
}

/// Held-out misclassification count of a single-level model over `folds`.
fn cv_error_count(
    data: &LabeledDataset,
    folds: &[Vec<usize>],
    theta: QuantileLevel,
    grid_index: usize,
    count: usize,
    config: &DqcConfig,
) -> Result<usize> {
    let mut errors = 0;
    for (f, test) in folds.iter().enumerate() {
        let mut in_test = vec![false; data.n()];
        test.iter().for_each(|&i| in_test[i] = true);
        let train_idx: Vec<usize> = (0..data.n()).filter(|&i| !in_test[i]).collect();
        let train = data.subset(&train_idx).map_err(|e| match e {
            Error::EmptyClass(_) => Error::FoldDegenerate,
            other => other,
        })?;
        let seed = derive_seed(config.seed, &[CV_STREAM, grid_index as u64, f as u64]);
        let model = fit_single_level(&train, theta, count, config, seed)?;
        let x_test = data.observations().select_rows(test.iter());
        let predicted = model.predict_rows(&x_test)?;
        errors += predicted
            .iter()
            .zip(test)
            .filter(|(&pred, &i)| pred != data.labels()[i])
            .count();
    }
    Ok(errors)
}

/// Index of the best grid entry: fewest errors, then closest to 0.5, then smallest.
fn select_level(grid: &[QuantileLevel], errors: &[usize]) -> usize {
    let key = |r: usize| (errors[r], (grid[r].value() - 0.5).abs(), grid[r].value());
    (0..grid.len())
        .min_by(|&a, &b| {
            let (ea, da, ta) = key(a);
            let (eb, db, tb) = key(b);
            ea.cmp(&eb)
                .then(da.total_cmp(&db))
                .then(ta.total_cmp(&tb))
        })
        .unwrap_or(0)
}

/// Selects θ by stratified cross-validation and refits on all of `data`.
pub fn fit(data: &LabeledDataset, config: &DqcConfig) -> Result<TrainedDqc> {
    config.validate(data)?;
    let grid = &config.theta_grid;
    let count = config.direction_count(data);

    let selection = if grid.len() == 1 {
        None
    } else {
        if data.class_counts().iter().any(|&c| c < config.cv_folds) {
            return Err(Error::FoldDegenerate);
        }
        let folds = stratified_folds(data, config.cv_folds, config.seed);
        let cv_errors = grid
            .par_iter()
            .enumerate()
            .map(|(r, &theta)| cv_error_count(data, &folds, theta, r, count, config))
            .collect::<Result<Vec<_>>>()?;
        let selected = select_level(grid, &cv_errors);
        Some(ThetaSelection {
            grid: grid.clone(),
            cv_errors,
            selected,
        })
    };

    let chosen = selection.as_ref().map_or(0, |s| s.selected);
    let seed = derive_seed(config.seed, &[REFIT_STREAM, chosen as u64]);
    let mut model = fit_single_level(data, grid[chosen], count, config, seed)?;
    model.selection = selection;
    model.config = Some(config.clone());
    Ok(model)
}
