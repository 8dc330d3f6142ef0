//! Simulation scenarios, replicated benchmarks, leave-one-out validation and
//! noise augmentation.
//!
//! Scenario 1 draws both classes from a multivariate Student t with `df`
//! degrees of freedom (identity or random correlation scale), class 2
//! shifted by `shift` in every coordinate. Scenario 2 applies `log|x|` to
//! every entry afterwards; scenario 3 applies `log|x|` to class 1 and
//! `-log|x|` to class 2. Training and test sets are drawn independently in
//! the same way, `n/2` points per class each.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Beta, ChiSquared, Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_centroid, fit_cqc, fit_median, BaselineModel};
use crate::dataset::{misclassification_rate, Label, LabeledDataset};
use crate::dqc::{fit, DqcConfig, TrainedDqc};
use crate::error::{Error, Result};
use crate::quantile::QuantileLevel;
use crate::seed::{derive_seed, rng_from};

const CORR_STREAM: u64 = 0xC022;
const REP_STREAM: u64 = 0x2E9;
const DQC_STREAM: u64 = 0xD9C;

/// Random correlation matrix from the C-vine of partial correlations
/// (Joe 2006; Lewandowski, Kurowicka & Joe 2009) with `eta = 1`, i.e.
/// uniform over the set of `p x p` correlation matrices.
pub fn random_correlation_matrix(p: usize, seed: u64) -> Result<DMatrix<f64>> {
    if p == 0 {
        return Err(Error::InvalidConfig("p must be positive".into()));
    }
    let mut rng = rng_from(seed, &[CORR_STREAM]);
    let mut partial = DMatrix::<f64>::zeros(p, p);
    let mut corr = DMatrix::<f64>::identity(p, p);
    let mut beta = 1.0 + (p as f64 - 1.0) / 2.0;
    for k in 0..p.saturating_sub(1) {
        beta -= 0.5;
        let law = Beta::new(beta, beta)
            .map_err(|e| Error::Numerical(format!("beta({beta}): {e}")))?;
        for i in (k + 1)..p {
            let pc = 2.0 * law.sample(&mut rng) - 1.0;
            partial[(k, i)] = pc;
            let mut r = pc;
            for l in (0..k).rev() {
                let (a, b) = (partial[(l, i)], partial[(l, k)]);
                r = r * ((1.0 - a * a) * (1.0 - b * b)).sqrt() + a * b;
            }
            corr[(k, i)] = r;
            corr[(i, k)] = r;
        }
    }
    Ok(corr)
}

/// Square-root factor `L` with `L L^T = scale`; Cholesky when positive
/// definite, otherwise a clipped eigen-decomposition.
pub fn scale_factor(scale: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = scale.nrows();
    if scale.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: scale.ncols(),
        });
    }
    let asym = (0..p)
        .flat_map(|i| (0..i).map(move |j| (i, j)))
        .map(|(i, j)| (scale[(i, j)] - scale[(j, i)]).abs())
        .fold(0.0, f64::max);
    if !asym.is_finite() || asym > 1e-10 || scale.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveSemidefinite);
    }
    if let Some(ch) = scale.clone().cholesky() {
        return Ok(ch.l());
    }
    let eig = scale.clone().symmetric_eigen();
    let floor = -1e-10 * eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        return Err(Error::NotPositiveSemidefinite);
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
}

/// Multivariate Student t sampler: `shift + L g / sqrt(c / df)` with `g`
/// standard normal and `c ~ chi^2(df)` drawn once per row.
#[derive(Debug, Clone)]
pub struct MvtSampler {
    /// `None` for the identity scale.
    factor: Option<DMatrix<f64>>,
    p: usize,
    chi: ChiSquared<f64>,
    df: f64,
}

impl MvtSampler {
    pub fn new(scale: &DMatrix<f64>, df: f64) -> Result<Self> {
        let p = scale.nrows();
        let factor = if scale == &DMatrix::identity(p, scale.ncols()) {
            None
        } else {
            Some(scale_factor(scale)?)
        };
        Self::build(factor, p, df)
    }

    pub fn identity(p: usize, df: f64) -> Result<Self> {
        Self::build(None, p, df)
    }

    fn build(factor: Option<DMatrix<f64>>, p: usize, df: f64) -> Result<Self> {
        if df.is_nan() || df <= 0.0 || df.is_infinite() {
            return Err(Error::InvalidConfig(format!("degrees of freedom {df}")));
        }
        let chi = ChiSquared::new(df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(Self { factor, p, chi, df })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn draw_row<R: Rng>(&self, rng: &mut R, shift: &[f64], out: &mut [f64]) {
        let g: Vec<f64> = (0..self.p).map(|_| rng.sample(StandardNormal)).collect();
        let w = (self.chi.sample(rng) / self.df).sqrt();
        match &self.factor {
            None => {
                for j in 0..self.p {
                    out[j] = shift[j] + g[j] / w;
                }
            }
            Some(l) => {
                for j in 0..self.p {
                    let lg: f64 = (0..self.p).map(|c| l[(j, c)] * g[c]).sum();
                    out[j] = shift[j] + lg / w;
                }
            }
        }
    }

    /// `m` rows; rows are redrawn whenever `reject` says so.
    fn sample_with<R: Rng>(
        &self,
        rng: &mut R,
        m: usize,
        shift: &[f64],
        reject: impl Fn(&[f64]) -> bool,
    ) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(m, self.p);
        let mut row = vec![0.0; self.p];
        for i in 0..m {
            loop {
                self.draw_row(rng, shift, &mut row);
                if !reject(&row) {
                    break;
                }
            }
            for (j, v) in row.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        out
    }

    pub fn sample(&self, m: usize, shift: &[f64], seed: u64) -> Result<DMatrix<f64>> {
        if shift.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: shift.len(),
            });
        }
        let mut rng = rng_from(seed, &[]);
        Ok(self.sample_with(&mut rng, m, shift, |_| false))
    }
}

pub fn sample_mvt(
    m: usize,
    scale: &DMatrix<f64>,
    df: f64,
    shift: &[f64],
    seed: u64,
) -> Result<DMatrix<f64>> {
    MvtSampler::new(scale, df)?.sample(m, shift, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Scenario {
    /// Well-separated bounded blobs; every sensible classifier is perfect.
    Separable,
    Symmetric,
    SameSkew,
    OppositeSkew,
}

impl Scenario {
    pub fn number(self) -> u8 {
        match self {
            Scenario::Separable => 0,
            Scenario::Symmetric => 1,
            Scenario::SameSkew => 2,
            Scenario::OppositeSkew => 3,
        }
    }
}

impl TryFrom<u8> for Scenario {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Ok(match v {
            0 => Scenario::Separable,
            1 => Scenario::Symmetric,
            2 => Scenario::SameSkew,
            3 => Scenario::OppositeSkew,
            other => return Err(Error::InvalidConfig(format!("unknown scenario {other}"))),
        })
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.number()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Total size of each of the training and test sets.
    pub n: usize,
    pub p: usize,
    pub correlated: bool,
    pub shift: f64,
    pub df: f64,
    pub replications: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Symmetric,
            n: 100,
            p: 10,
            correlated: false,
            shift: 0.4,
            df: 3.0,
            replications: 100,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!("n = {} must be even and >= 4", self.n)));
        }
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be positive".into()));
        }
        if self.df.is_nan() || self.df <= 2.0 || self.df.is_infinite() {
            return Err(Error::InvalidConfig(format!("df = {} must exceed 2", self.df)));
        }
        if !self.shift.is_finite() {
            return Err(Error::InvalidConfig("shift must be finite".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be positive".into()));
        }
        Ok(())
    }
}

/// Reusable generator: the scale factor is computed once per config.
#[derive(Debug, Clone)]
pub struct ScenarioGenerator {
    config: ScenarioConfig,
    sampler: MvtSampler,
}

fn log_abs(x: f64) -> f64 {
    x.abs().ln()
}

impl ScenarioGenerator {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let sampler = if config.correlated {
            let corr = random_correlation_matrix(config.p, derive_seed(config.seed, &[config.p as u64]))?;
            MvtSampler::new(&corr, config.df)?
        } else {
            MvtSampler::identity(config.p, config.df)?
        };
        Ok(Self {
            config: config.clone(),
            sampler,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    fn draw_set<R: Rng>(&self, rng: &mut R) -> Result<LabeledDataset> {
        let c = &self.config;
        let (half, p) = (c.n / 2, c.p);
        let zero = vec![0.0; p];
        let shifted = vec![c.shift; p];
        let has_zero = |row: &[f64]| row.contains(&0.0);
        let (a, b) = match c.scenario {
            Scenario::Separable => {
                let noise = Uniform::new(-0.5, 0.5).map_err(|e| Error::Numerical(e.to_string()))?;
                let mut blob = |center: f64| {
                    DMatrix::from_fn(half, p, |_, _| center + noise.sample(&mut *rng))
                };
                let a = blob(0.0);
                (a, blob(10.0))
            }
            Scenario::Symmetric => (
                self.sampler.sample_with(rng, half, &zero, |_| false),
                self.sampler.sample_with(rng, half, &shifted, |_| false),
            ),
            Scenario::SameSkew => (
                self.sampler.sample_with(rng, half, &zero, has_zero).map(log_abs),
                self.sampler.sample_with(rng, half, &shifted, has_zero).map(log_abs),
            ),
            Scenario::OppositeSkew => (
                self.sampler.sample_with(rng, half, &zero, has_zero).map(log_abs),
                self.sampler
                    .sample_with(rng, half, &shifted, has_zero)
                    .map(|v| -log_abs(v)),
            ),
        };
        let mut x = DMatrix::zeros(2 * half, p);
        x.rows_mut(0, half).copy_from(&a);
        x.rows_mut(half, half).copy_from(&b);
        let labels: Vec<Label> = (0..2 * half).map(|i| if i < half { 1 } else { 2 }).collect();
        LabeledDataset::new(x, labels)
    }

    /// `(train, test)` for replication `rep`.
    pub fn generate(&self, rep: usize) -> Result<(LabeledDataset, LabeledDataset)> {
        let mut rng = rng_from(self.config.seed, &[REP_STREAM, rep as u64]);
        let train = self.draw_set(&mut rng)?;
        let test = self.draw_set(&mut rng)?;
        Ok((train, test))
    }
}

pub fn generate_scenario(
    config: &ScenarioConfig,
    replication_index: usize,
) -> Result<(LabeledDataset, LabeledDataset)> {
    ScenarioGenerator::new(config)?.generate(replication_index)
}

/// A classifier family with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Dqc(DqcConfig),
    Centroid,
    Median,
    Cqc(Vec<QuantileLevel>),
}

impl ClassifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Dqc(_) => "dqc",
            ClassifierSpec::Centroid => "centroid",
            ClassifierSpec::Median => "median",
            ClassifierSpec::Cqc(_) => "cqc",
        }
    }

    /// Parses a classifier name; DQC and CQC take `dqc_config` (and its grid).
    pub fn parse(name: &str, dqc_config: &DqcConfig) -> Result<Self> {
        match name.trim() {
            "dqc" => Ok(ClassifierSpec::Dqc(dqc_config.clone())),
            "centroid" => Ok(ClassifierSpec::Centroid),
            "median" => Ok(ClassifierSpec::Median),
            "cqc" => Ok(ClassifierSpec::Cqc(dqc_config.theta_grid.clone())),
            other => Err(Error::Parse(format!("unknown classifier '{other}'"))),
        }
    }

    pub fn fit(&self, data: &LabeledDataset) -> Result<FittedClassifier> {
        Ok(match self {
            ClassifierSpec::Dqc(c) => FittedClassifier::Dqc(fit(data, c)?),
            ClassifierSpec::Centroid => FittedClassifier::Baseline(fit_centroid(data)?),
            ClassifierSpec::Median => FittedClassifier::Baseline(fit_median(data)?),
            ClassifierSpec::Cqc(grid) => FittedClassifier::Baseline(fit_cqc(data, grid)?),
        })
    }

    fn reseeded(&self, seed: u64) -> Self {
        match self {
            ClassifierSpec::Dqc(c) => ClassifierSpec::Dqc(DqcConfig {
                seed,
                ..c.clone()
            }),
            other => other.clone(),
        }
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum FittedClassifier {
    Dqc(TrainedDqc),
    Baseline(BaselineModel),
}

impl FittedClassifier {
    pub fn predict_rows(&self, x: &DMatrix<f64>) -> Result<Vec<Label>> {
        match self {
            FittedClassifier::Dqc(m) => m.predict_rows(x),
            FittedClassifier::Baseline(m) => m.predict_rows(x),
        }
    }

    pub fn p(&self) -> usize {
        match self {
            FittedClassifier::Dqc(m) => m.p(),
            FittedClassifier::Baseline(m) => m.p(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub classifier: String,
    pub replication: usize,
    /// Test misclassification rate, or `None` when fitting failed.
    pub error_rate: Option<f64>,
    pub failure: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSummary {
    pub classifier: String,
    pub mean: f64,
    pub std_error: f64,
    pub completed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: ScenarioConfig,
    pub dqc_config: Option<DqcConfig>,
    pub rows: Vec<BenchmarkRow>,
    pub notes: Vec<String>,
}

impl BenchmarkReport {
    pub fn classifiers(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            if !names.contains(&r.classifier) {
                names.push(r.classifier.clone());
            }
        }
        names
    }

    pub fn summary(&self) -> Vec<ClassifierSummary> {
        self.classifiers()
            .into_iter()
            .map(|name| {
                let rates: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.classifier == name)
                    .filter_map(|r| r.error_rate)
                    .collect();
                let failed = self
                    .rows
                    .iter()
                    .filter(|r| r.classifier == name && r.error_rate.is_none())
                    .count();
                let m = rates.len();
                let mean = if m == 0 {
                    f64::NAN
                } else {
                    rates.iter().sum::<f64>() / m as f64
                };
                let std_error = if m < 2 {
                    0.0
                } else {
                    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
                    (var / m as f64).sqrt()
                };
                ClassifierSummary {
                    classifier: name,
                    mean,
                    std_error,
                    completed: m,
                    failed,
                }
            })
            .collect()
    }

    pub fn mean_error(&self, classifier: &str) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.classifier == classifier)
            .map(|s| s.mean)
    }
}

/// Fits every classifier on each replication's training set and records its
/// test misclassification rate. Replications run in parallel; rows come out
/// ordered by replication, then by the order of `classifiers`.
pub fn run_benchmark(
    config: &ScenarioConfig,
    classifiers: &[ClassifierSpec],
) -> Result<BenchmarkReport> {
    if classifiers.is_empty() {
        return Err(Error::InvalidConfig("no classifiers selected".into()));
    }
    let generator = ScenarioGenerator::new(config)?;
    let per_rep: Vec<Vec<BenchmarkRow>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| run_replication(&generator, classifiers, rep))
        .collect();
    let dqc_config = classifiers.iter().find_map(|c| match c {
        ClassifierSpec::Dqc(cfg) => Some(cfg.clone()),
        _ => None,
    });
    let mut notes = Vec::new();
    if classifiers.contains(&ClassifierSpec::Centroid) {
        notes.push("centroid: plain nearest class mean, no shrinkage".to_string());
    }
    if classifiers.iter().any(|c| matches!(c, ClassifierSpec::Cqc(_))) {
        notes.push("cqc: no skewness correction; level chosen by training error".to_string());
    }
    Ok(BenchmarkReport {
        config: config.clone(),
        dqc_config,
        rows: per_rep.into_iter().flatten().collect(),
        notes,
    })
}

fn run_replication(
    generator: &ScenarioGenerator,
    classifiers: &[ClassifierSpec],
    rep: usize,
) -> Vec<BenchmarkRow> {
    let data = generator.generate(rep);
    classifiers
        .iter()
        .map(|spec| {
            let start = Instant::now();
            let outcome = data.as_ref().map_err(|e| e.to_string()).and_then(|(train, test)| {
                let seed = match spec {
                    ClassifierSpec::Dqc(c) => {
                        derive_seed(c.seed, &[DQC_STREAM, generator.config.seed, rep as u64])
                    }
                    _ => 0,
                };
                spec.reseeded(seed)
                    .fit(train)
                    .and_then(|m| m.predict_rows(test.observations()))
                    .map(|pred| misclassification_rate(&pred, test.labels()))
                    .map_err(|e| e.to_string())
            });
            let seconds = start.elapsed().as_secs_f64();
            let (error_rate, failure) = match outcome {
                Ok(rate) => (Some(rate), None),
                Err(msg) => (None, Some(msg)),
            };
            BenchmarkRow {
                classifier: spec.name().to_string(),
                replication: rep,
                error_rate,
                failure,
                seconds,
            }
        })
        .collect()
}

/// Leave-one-out misclassification rate. A left-out point whose class has
/// no other member counts as misclassified.
pub fn loo_validate(data: &LabeledDataset, spec: &ClassifierSpec) -> Result<f64> {
    let n = data.n();
    if n < 2 {
        return Err(Error::InvalidDataset("leave-one-out needs n >= 2".into()));
    }
    let misses = (0..n)
        .into_par_iter()
        .map(|i| -> Result<bool> {
            let train = match data.without(i) {
                Ok(t) => t,
                Err(Error::EmptyClass(_)) => return Ok(true),
                Err(e) => return Err(e),
            };
            let model = spec.fit(&train)?;
            let y = data.observations().rows(i, 1).into_owned();
            Ok(model.predict_rows(&y)?[0] != data.labels()[i])
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(misses.iter().filter(|&&m| m).count() as f64 / n as f64)
}

/// Appends `extra` columns of independent standard normal noise.
pub fn augment_noise(data: &LabeledDataset, extra: usize, seed: u64) -> Result<LabeledDataset> {
    if extra == 0 {
        return Err(Error::InvalidConfig("extra must be positive".into()));
    }
    let mut rng = rng_from(seed, &[]);
    let noise = DMatrix::from_fn(data.n(), extra, |_, _| rng.sample::<f64, _>(StandardNormal));
    data.with_extra_columns(&noise)
}
