//! The eps -> 0 limit of regularized integrals.
//!
//! Values on a decreasing schedule are extrapolated to eps = 0 with Neville's
//! scheme (polynomial in eps). On a geometric schedule this is Richardson
//! extrapolation.

use crate::quadrature::QuadratureResult;
use crate::{Complex64, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EpsSchedule {
    eps_values: Vec<f64>,
    extrapolation_order: usize,
}

impl Default for EpsSchedule {
    /// eps_k = 0.1 * 2^-k for k = 0..=12, order 4.
    fn default() -> Self {
        Self::geometric(0.1, 0.5, 13, 4).expect("default schedule is valid")
    }
}

impl EpsSchedule {
    pub fn new(eps_values: Vec<f64>, extrapolation_order: usize) -> Result<Self> {
        if eps_values.is_empty() {
            return Err(Error::InvalidInput("empty eps schedule".into()));
        }
        if eps_values.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::InvalidInput("eps values must be positive".into()));
        }
        if eps_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput("eps values must strictly decrease".into()));
        }
        if extrapolation_order + 1 > eps_values.len() {
            return Err(Error::InvalidInput(format!(
                "order {extrapolation_order} needs at least {} eps values",
                extrapolation_order + 1
            )));
        }
        Ok(Self {
            eps_values,
            extrapolation_order,
        })
    }

    pub fn geometric(eps0: f64, ratio: f64, count: usize, order: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidInput(format!("ratio must be in (0, 1), got {ratio}")));
        }
        let values = (0..count).map(|k| eps0 * ratio.powi(k as i32)).collect();
        Self::new(values, order)
    }

    pub fn eps_values(&self) -> &[f64] {
        &self.eps_values
    }

    pub fn extrapolation_order(&self) -> usize {
        self.extrapolation_order
    }
}

/// Limit estimate together with the per-eps values it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsLimit {
    pub result: QuadratureResult,
    pub trace: Vec<(f64, Complex64)>,
}

/// Neville value at 0 of the interpolant through `(x_i, y_i)`; also returns
/// the value from the first `len - 1` points.
fn neville_at_zero(x: &[f64], y: &[Complex64]) -> (Complex64, Complex64) {
    let m = x.len();
    let mut p = y.to_vec();
    let mut prev = p[0];
    for k in 1..m {
        prev = p[0];
        for i in 0..m - k {
            p[i] = (p[i] * x[i + k] - p[i + 1] * x[i]) / (x[i + k] - x[i]);
        }
    }
    if m == 1 {
        prev = p[0];
    }
    (p[0], prev)
}

/// Sum of |weights| of the extrapolation functional, the factor by which
/// errors in the inputs can be amplified.
fn amplification(x: &[f64]) -> f64 {
    // Lagrange basis at 0
    (0..x.len())
        .map(|i| {
            x.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (xj / (xj - x[i])).abs())
                .product::<f64>()
        })
        .sum()
}

/// Evaluate `integral` on the schedule and extrapolate to eps = 0.
pub fn eps_limit_traced<I>(mut integral: I, schedule: &EpsSchedule) -> Result<EpsLimit>
where
    I: FnMut(f64) -> Result<QuadratureResult>,
{
    let eps = &schedule.eps_values;
    let order = schedule.extrapolation_order;
    let mut values = Vec::with_capacity(eps.len());
    let mut errs = Vec::with_capacity(eps.len());
    let mut evaluations = 0;
    let mut converged = true;
    let mut inner_divergent = false;
    for &e in eps {
        let r = integral(e)?;
        values.push(r.value);
        errs.push(r.error_estimate);
        evaluations += r.evaluations;
        converged &= r.converged;
        inner_divergent |= r.divergence_suspected;
    }

    let mut estimates = Vec::new();
    let mut last_correction = 0.0;
    for j in order..eps.len() {
        let lo = j - order;
        let (v, lower) = neville_at_zero(&eps[lo..=j], &values[lo..=j]);
        last_correction = (v - lower).norm();
        estimates.push(v);
    }
    let value = *estimates.last().expect("schedule has order + 1 points");
    let corrections: Vec<f64> = estimates.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    let growing = corrections.len() >= 3 && {
        let c = &corrections[corrections.len() - 3..];
        c[0] < c[1] && c[1] < c[2] && c[2] > 1e-8 * (1.0 + value.norm())
    };
    let lo = eps.len() - order - 1;
    let noise = amplification(&eps[lo..]) * errs[lo..].iter().cloned().fold(0.0, f64::max);
    let drift = corrections.last().copied().unwrap_or(0.0);
    let mut result = QuadratureResult::new(
        value,
        last_correction.max(drift) + noise,
        evaluations.max(1),
        converged,
    );
    result.divergence_suspected = growing || inner_divergent || !value.re.is_finite();
    Ok(EpsLimit {
        result,
        trace: eps.iter().copied().zip(values).collect(),
    })
}

/// Extrapolate a plain function of eps to eps = 0.
pub fn eps_limit<I>(mut integral: I, schedule: &EpsSchedule) -> Result<QuadratureResult>
where
    I: FnMut(f64) -> Result<Complex64>,
{
    Ok(eps_limit_traced(
        |e| Ok(QuadratureResult::new(integral(e)?, 0.0, 1, true)),
        schedule,
    )?
    .result)
}
