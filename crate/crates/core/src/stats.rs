//! Empirical angle distributions: ECDF, Kolmogorov–Smirnov distance to `Ξ`,
//! binned χ² against the density, and convergence tables over radii.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::geometry::NormalizedTarget;
use crate::group::{collect_thetas, BallSpec, GroupElement, GroupError, Workers};
use crate::theory::{ball_main_term, density_mass, xi, TheoryContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no angle samples")]
    NoData,
    #[error("at least 2 bins are required, got {0}")]
    TooFewBins(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One orbit element with a defined angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleSample {
    pub gamma: GroupElement,
    pub theta: f64,
    /// `ρ(z0, γz0)`
    pub dist: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AngleCollection {
    pub samples: Vec<AngleSample>,
    pub undefined: u64,
}

impl AngleCollection {
    pub fn thetas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.theta).collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ThetaCollection {
    pub thetas: Vec<f64>,
    pub undefined: u64,
}

/// Empirical distribution function of a sample of angles.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::NoData);
        }
        values.sort_by(f64::total_cmp);
        Ok(Ecdf { sorted: values })
    }

    pub fn from_samples(samples: &[AngleSample]) -> Result<Self, StatsError> {
        Ecdf::new(samples.iter().map(|s| s.theta).collect())
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `≤ omega`.
    pub fn eval(&self, omega: f64) -> f64 {
        self.sorted.partition_point(|&t| t <= omega) as f64 / self.len() as f64
    }

    /// `sup |ECDF - F|`, evaluated at every sample value and its left limit.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.len() as f64;
        let mut worst = 0.0f64;
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == v {
                j += 1;
            }
            let f = cdf(v);
            worst = worst.max((i as f64 / n - f).abs()).max((j as f64 / n - f).abs());
            i = j;
        }
        worst
    }
}

pub fn ecdf(samples: &[AngleSample], omega: f64) -> Result<f64, StatsError> {
    Ok(Ecdf::from_samples(samples)?.eval(omega))
}

/// Kolmogorov–Smirnov distance between the sample and `Ξ_{x*,y*}`.
pub fn ks_distance(samples: &[AngleSample], target: &NormalizedTarget) -> Result<f64, StatsError> {
    Ok(Ecdf::from_samples(samples)?.ks_distance(|w| xi(target, w)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinRow {
    pub lo: f64,
    pub hi: f64,
    pub observed: u64,
    pub expected: f64,
    /// Expected count below 5: left out of the statistic.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub bins: Vec<BinRow>,
}

impl ChiSquare {
    /// Bins contributing to the statistic.
    pub fn used_bins(&self) -> usize {
        self.bins.iter().filter(|b| !b.flagged).count()
    }
}

/// Minimum expected count for a bin to enter the χ² statistic.
pub const MIN_EXPECTED: f64 = 5.0;

/// Equal-width bins on `[-π/2, π/2]`, `[lo, hi)` except the last which is
/// closed; expected counts from `(1/π) ∫ ρ` over each bin.
pub fn chi_square_bins(thetas: &[f64], ctx: &TheoryContext, bins: usize) -> Result<ChiSquare, StatsError> {
    if bins < 2 {
        return Err(StatsError::TooFewBins(bins));
    }
    if thetas.is_empty() {
        return Err(StatsError::NoData);
    }
    let width = PI / bins as f64;
    let mut observed = vec![0u64; bins];
    for &t in thetas {
        let k = (((t + FRAC_PI_2) / width).floor().max(0.0) as usize).min(bins - 1);
        observed[k] += 1;
    }
    let n = thetas.len() as f64;
    let mut statistic = 0.0;
    let rows = observed
        .into_iter()
        .enumerate()
        .map(|(k, obs)| {
            let lo = -FRAC_PI_2 + k as f64 * width;
            let hi = if k + 1 == bins { FRAC_PI_2 } else { lo + width };
            let expected = n * density_mass(ctx, lo, hi);
            let flagged = expected < MIN_EXPECTED;
            if !flagged {
                statistic += (obs as f64 - expected).powi(2) / expected;
            }
            BinRow { lo, hi, observed: obs, expected, flagged }
        })
        .collect();
    Ok(ChiSquare { statistic, bins: rows })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub radius: f64,
    pub count: u64,
    pub main_term: f64,
    /// `|count / main_term - 1|`
    pub rel_error: f64,
    /// `None` when every element of the ball has an undefined angle.
    pub ks_distance: Option<f64>,
    pub undefined_count: u64,
}

/// Ball count, main term and KS distance for each radius.
pub fn convergence_table(
    ctx: &TheoryContext,
    radii: &[f64],
    workers: Workers,
) -> Result<Vec<ConvergenceRow>, StatsError> {
    let target = ctx.target();
    radii
        .iter()
        .map(|&radius| {
            let spec = BallSpec::from_radius(ctx.level(), ctx.z0(), radius)?;
            let ThetaCollection { thetas, undefined } = collect_thetas(&spec, ctx.z1(), workers)?;
            let count = thetas.len() as u64 + undefined;
            let main_term = ball_main_term(ctx.level(), radius);
            let ks_distance = match Ecdf::new(thetas) {
                Ok(e) => Some(e.ks_distance(|w| xi(&target, w))),
                Err(_) => None,
            };
            Ok(ConvergenceRow {
                radius,
                count,
                main_term,
                rel_error: (count as f64 / main_term - 1.0).abs(),
                ks_distance,
                undefined_count: undefined,
            })
        })
        .collect()
}
