//! Exact correct-classification probability of the two-population quantile
//! rule along a fixed projection, and the quantile level that maximizes it.
//!
//! For two projected populations with θ-quantiles `Q_α(θ) <= Q_β(θ)`, the
//! quantile rule assigns `z` to α exactly when `z < Q̃(θ)`, where
//! `Q̃(θ) = θ Q_α(θ) + (1 - θ) Q_β(θ)` is the point at which both check
//! losses agree. The probability of a correct decision is therefore
//! `ψ(θ) = π_α G_α(Q̃) + π_β (1 - G_β(Q̃))`.

use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, LogNormal, Normal, StudentsT};

use crate::error::{Error, Result};
use crate::quantile::{interpolate_sorted, QuantileLevel, SortedSample};

/// A univariate law given by its CDF and quantile function.
pub trait UnivariateDistribution: Send + Sync + std::fmt::Debug {
    fn cdf(&self, x: f64) -> f64;
    fn quantile(&self, theta: f64) -> f64;
}

#[derive(Debug, Clone)]
pub struct Gaussian(Normal);

impl Gaussian {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        Normal::new(mean, sd)
            .map(Self)
            .map_err(|e| Error::InvalidConfig(format!("normal({mean}, {sd}): {e}")))
    }
}

impl UnivariateDistribution for Gaussian {
    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }
    fn quantile(&self, theta: f64) -> f64 {
        self.0.inverse_cdf(theta)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UniformLaw {
    lo: f64,
    hi: f64,
}

impl UniformLaw {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidConfig(format!("uniform({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }
}

impl UnivariateDistribution for UniformLaw {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }
    fn quantile(&self, theta: f64) -> f64 {
        self.lo + theta * (self.hi - self.lo)
    }
}

/// Log-normal law shifted right by `shift`.
#[derive(Debug, Clone)]
pub struct ShiftedLogNormal {
    law: LogNormal,
    shift: f64,
}

impl ShiftedLogNormal {
    pub fn new(mu: f64, sigma: f64, shift: f64) -> Result<Self> {
        let law = LogNormal::new(mu, sigma)
            .map_err(|e| Error::InvalidConfig(format!("lognormal({mu}, {sigma}): {e}")))?;
        Ok(Self { law, shift })
    }
}

impl UnivariateDistribution for ShiftedLogNormal {
    fn cdf(&self, x: f64) -> f64 {
        let z = x - self.shift;
        if z <= 0.0 {
            0.0
        } else {
            self.law.cdf(z)
        }
    }
    fn quantile(&self, theta: f64) -> f64 {
        self.law.inverse_cdf(theta) + self.shift
    }
}

#[derive(Debug, Clone)]
pub struct StudentLaw(StudentsT);

impl StudentLaw {
    pub fn new(df: f64, location: f64, scale: f64) -> Result<Self> {
        StudentsT::new(location, scale, df)
            .map(Self)
            .map_err(|e| Error::InvalidConfig(format!("t({df}, {location}, {scale}): {e}")))
    }
}

impl UnivariateDistribution for StudentLaw {
    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }
    fn quantile(&self, theta: f64) -> f64 {
        self.0.inverse_cdf(theta)
    }
}

/// Empirical law whose quantile function is the interpolated sample
/// quantile and whose CDF is its piecewise-linear inverse.
#[derive(Debug, Clone)]
pub struct EmpiricalLaw(SortedSample);

impl EmpiricalLaw {
    pub fn new(sample: SortedSample) -> Result<Self> {
        if sample.len() < 2 {
            return Err(Error::InvalidConfig(
                "empirical law needs at least two points".into(),
            ));
        }
        Ok(Self(sample))
    }
}

impl UnivariateDistribution for EmpiricalLaw {
    fn cdf(&self, x: f64) -> f64 {
        let v = self.0.values();
        let n = v.len();
        if x < v[0] {
            return 0.0;
        }
        if x >= v[n - 1] {
            return 1.0;
        }
        // last index with v[i] <= x
        let i = v.partition_point(|&a| a <= x) - 1;
        let (a, b) = (v[i], v[i + 1]);
        let frac = if b > a { (x - a) / (b - a) } else { 0.0 };
        ((i as f64 + frac) / (n - 1) as f64).clamp(0.0, 1.0)
    }
    fn quantile(&self, theta: f64) -> f64 {
        interpolate_sorted(self.0.values(), theta)
    }
}

/// Parses `family:a,b[,c]`: `normal:mean,sd`, `uniform:lo,hi`,
/// `lognormal:mu,sigma[,shift]`, `t:df[,location,scale]`.
pub fn parse_distribution(spec: &str) -> Result<Arc<dyn UnivariateDistribution>> {
    let (family, args) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("distribution '{spec}' lacks ':'")))?;
    let nums = args
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{s}' in '{spec}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    let arity = |lo: usize, hi: usize| {
        if nums.len() < lo || nums.len() > hi {
            Err(Error::Parse(format!("wrong parameter count in '{spec}'")))
        } else {
            Ok(())
        }
    };
    Ok(match family.trim() {
        "normal" => {
            arity(2, 2)?;
            Arc::new(Gaussian::new(nums[0], nums[1])?)
        }
        "uniform" => {
            arity(2, 2)?;
            Arc::new(UniformLaw::new(nums[0], nums[1])?)
        }
        "lognormal" => {
            arity(2, 3)?;
            Arc::new(ShiftedLogNormal::new(
                nums[0],
                nums[1],
                nums.get(2).copied().unwrap_or(0.0),
            )?)
        }
        "t" => {
            arity(1, 3)?;
            Arc::new(StudentLaw::new(
                nums[0],
                nums.get(1).copied().unwrap_or(0.0),
                nums.get(2).copied().unwrap_or(1.0),
            )?)
        }
        other => return Err(Error::Parse(format!("unknown distribution family '{other}'"))),
    })
}

/// Two populations with priors. The α/β roles are assigned per level:
/// α is whichever population has the smaller θ-quantile.
#[derive(Debug, Clone)]
pub struct PopulationPair {
    first: Arc<dyn UnivariateDistribution>,
    second: Arc<dyn UnivariateDistribution>,
    priors: (f64, f64),
}

impl PopulationPair {
    pub fn new(
        first: Arc<dyn UnivariateDistribution>,
        second: Arc<dyn UnivariateDistribution>,
        priors: (f64, f64),
    ) -> Result<Self> {
        let (a, b) = priors;
        if !(a >= 0.0 && b >= 0.0) || ((a + b) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "priors ({a}, {b}) must be nonnegative and sum to 1"
            )));
        }
        Ok(Self {
            first,
            second,
            priors,
        })
    }

    pub fn equal_priors(
        first: Arc<dyn UnivariateDistribution>,
        second: Arc<dyn UnivariateDistribution>,
    ) -> Self {
        Self {
            first,
            second,
            priors: (0.5, 0.5),
        }
    }

    /// `(α, β, π_α, π_β, Q_α(θ), Q_β(θ))` at level `theta`.
    fn ordered(
        &self,
        theta: f64,
    ) -> (&dyn UnivariateDistribution, &dyn UnivariateDistribution, f64, f64, f64, f64) {
        let q1 = self.first.quantile(theta);
        let q2 = self.second.quantile(theta);
        if q1 <= q2 {
            (&*self.first, &*self.second, self.priors.0, self.priors.1, q1, q2)
        } else {
            (&*self.second, &*self.first, self.priors.1, self.priors.0, q2, q1)
        }
    }
}

/// `Q̃(θ) = θ Q_α(θ) + (1 - θ) Q_β(θ)`.
pub fn q_tilde(theta: QuantileLevel, pair: &PopulationPair) -> f64 {
    let t = theta.value();
    let (_, _, _, _, qa, qb) = pair.ordered(t);
    t * qa + (1.0 - t) * qb
}

/// Probability that the quantile rule at level `theta` classifies correctly.
pub fn correct_prob(theta: QuantileLevel, pair: &PopulationPair) -> f64 {
    let t = theta.value();
    let (alpha, beta, pa, pb, qa, qb) = pair.ordered(t);
    let qt = t * qa + (1.0 - t) * qb;
    pa * alpha.cdf(qt) + pb * (1.0 - beta.cdf(qt))
}

/// `1 - correct_prob`.
pub fn misclassification_prob(theta: QuantileLevel, pair: &PopulationPair) -> f64 {
    1.0 - correct_prob(theta, pair)
}

/// `(θ, ψ(θ))` on `grid`.
pub fn psi_curve(pair: &PopulationPair, grid: &[QuantileLevel]) -> Vec<(f64, f64)> {
    grid.iter()
        .map(|&t| (t.value(), correct_prob(t, pair)))
        .collect()
}

const SCAN_POINTS: usize = 199;

/// Maximizes `ψ` over `(0, 1)`: a 199-point scan locates the best cell,
/// then golden-section search refines within the neighbouring grid cells
/// down to width `tolerance`.
pub fn optimal_theta(pair: &PopulationPair, tolerance: f64) -> Result<(QuantileLevel, f64)> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidConfig(format!("tolerance {tolerance} must be positive")));
    }
    let eval = |t: f64| -> Result<f64> {
        let v = correct_prob(QuantileLevel::new(t)?, pair);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numerical(format!("psi({t}) is not finite")))
        }
    };
    let step = 1.0 / (SCAN_POINTS + 1) as f64;
    let mut best = (step, eval(step)?);
    for i in 2..=SCAN_POINTS {
        let t = i as f64 * step;
        let v = eval(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }

    let mut lo = (best.0 - step).max(step * 1e-6);
    let mut hi = (best.0 + step).min(1.0 - step * 1e-6);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while hi - lo > tolerance {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = eval(mid)?;
    let (t, v) = [(c, fc), (d, fd), (mid, fm)]
        .into_iter()
        .fold(best, |acc, cand| if cand.1 > acc.1 { cand } else { acc });
    Ok((QuantileLevel::new(t)?, v))
}
