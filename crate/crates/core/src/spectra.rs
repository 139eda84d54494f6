//! Binary entropy and information-spectrum quantities.
//!
//! The finite-`n` exceedance probability `Pr[(1/n) log2 1/P(X^n) >= R]` is
//! computed exactly over type classes. Its large-`n` limit for a Bernoulli
//! mixture is a nonincreasing step function with one drop per distinct
//! component entropy.

use crate::error::{invalid, Error, Result};
use crate::sources::{build_type_table, SourceModel};

/// Bisection stops once the bracket is narrower than this.
pub const ENTROPY_INVERSE_TOLERANCE: f64 = 1e-12;

pub(crate) fn entropy_unchecked(u: f64) -> f64 {
    // Fold onto [0, 1/2] so that h(u) and h(1 - u) share one evaluation.
    let v = if u > 0.5 { 1.0 - u } else { u };
    if v <= 0.0 {
        return 0.0;
    }
    let w = 1.0 - v;
    -(v * v.log2()) - w * ((-v).ln_1p() / std::f64::consts::LN_2)
}

/// Binary entropy `h(u)` in bits.
pub fn binary_entropy(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(invalid(format!("binary entropy needs u in [0, 1], got {u}")));
    }
    Ok(entropy_unchecked(u))
}

/// The unique `d` in `[0, 1/2]` with `h(d) = t`.
pub fn binary_entropy_inv(t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid(format!("inverse binary entropy needs t in [0, 1], got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t == 1.0 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > ENTROPY_INVERSE_TOLERANCE * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy_unchecked(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Nonincreasing piecewise-constant function of the rate.
///
/// `F(R) = levels[i]` for `thresholds[i-1] <= R < thresholds[i]`, so a
/// threshold already carries the lower level.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    thresholds: Vec<f64>,
    levels: Vec<f64>,
}

impl StepFunction {
    pub fn new(thresholds: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.len() != thresholds.len() + 1 {
            return Err(invalid("a step function needs one more level than thresholds"));
        }
        if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("thresholds must be strictly increasing"));
        }
        if levels.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(invalid("levels must be strictly decreasing"));
        }
        if levels[0] > 1.0 || *levels.last().unwrap() < 0.0 {
            return Err(invalid("levels must lie in [0, 1]"));
        }
        Ok(Self { thresholds, levels })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn eval(&self, rate: f64) -> f64 {
        let i = self.thresholds.partition_point(|&t| t <= rate);
        self.levels[i]
    }

    /// Smallest `R >= 0` with `F(R) <= level`, or `None` if no level is low
    /// enough.
    pub fn first_rate_at_or_below(&self, level: f64) -> Option<f64> {
        let i = self.levels.iter().position(|&l| l <= level)?;
        Some(if i == 0 { 0.0 } else { self.thresholds[i - 1].max(0.0) })
    }
}

/// Finite-`n` exceedance curve `R -> F_n(R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExceedanceCurve {
    pub n: usize,
    pub points: Vec<(f64, f64)>,
    pub exact: bool,
}

/// `Pr[(1/n) log2 1/P(X^n) >= rate]`, summed exactly over type classes.
pub fn spectral_cdf_exact(model: &SourceModel, n: usize, rate: f64) -> Result<f64> {
    let table = build_type_table(model, n)?;
    Ok(table.fraction_where(|row| row.rate(n) >= rate))
}

/// Evaluates [`spectral_cdf_exact`] on a grid, sharing one type table.
pub fn exceedance_curve(model: &SourceModel, n: usize, rates: &[f64]) -> Result<ExceedanceCurve> {
    let table = build_type_table(model, n)?;
    let points = rates
        .iter()
        .map(|&r| (r, table.fraction_where(|row| row.rate(n) >= r)))
        .collect();
    Ok(ExceedanceCurve { n, points, exact: true })
}

/// Large-`n` limit of the exceedance probability for a Bernoulli mixture.
pub fn asymptotic_spectral_cdf(model: &SourceModel) -> StepFunction {
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for c in model.components() {
        let h = entropy_unchecked(c.p);
        match steps.iter_mut().find(|(t, _)| *t == h) {
            Some((_, w)) => *w += c.weight,
            None => steps.push((h, c.weight)),
        }
    }
    steps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut levels = vec![1.0];
    let mut remaining = 1.0;
    for (i, (_, w)) in steps.iter().enumerate() {
        remaining -= w;
        levels.push(if i + 1 == steps.len() { 0.0 } else { remaining });
    }
    let thresholds = steps.into_iter().map(|(t, _)| t).collect();
    StepFunction::new(thresholds, levels).expect("mixture weights yield a valid step function")
}

/// Empirical `(1 - tail)`-quantile of the samples at the largest block
/// length that has at least [`PLIMSUP_MIN_SAMPLES`] values.
///
/// A diagnostic only: no finite procedure certifies a limit in probability.
pub fn plimsup_estimate(samples: &[(usize, Vec<f64>)], tail: f64) -> Result<f64> {
    if !(tail > 0.0 && tail < 0.5) {
        return Err(invalid(format!("tail must lie in (0, 0.5), got {tail}")));
    }
    let (_, values) = samples
        .iter()
        .filter(|(_, v)| v.len() >= PLIMSUP_MIN_SAMPLES)
        .max_by_key(|(n, _)| *n)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "p-limsup estimation needs a block length with at least {PLIMSUP_MIN_SAMPLES} samples"
            ))
        })?;
    if values.iter().any(|v| v.is_nan()) {
        return Err(invalid("samples contain NaN"));
    }
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(lower_quantile(&sorted, 1.0 - tail))
}

pub const PLIMSUP_MIN_SAMPLES: usize = 100;

/// Inverse empirical CDF: smallest sample `x` with `F(x) >= q`.
pub(crate) fn lower_quantile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let idx = ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
    sorted[idx]
}
