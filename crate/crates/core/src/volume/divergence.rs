//! Growth of truncated one-dimensional integrals near the ideal boundary.
//!
//! The finiteness of a volume near a graph boundary reduces to a model
//! integral `int_0^delta phi(x) dx`. Truncating at `tau` and watching how
//! `I(tau)` grows as `tau -> 0` separates convergent, power-law, logarithmic
//! and doubly logarithmic behaviour.

use crate::quadrature::{integrate, QuadratureResult, Tolerance};
use crate::{Complex64, Error, Result};

/// Number of trailing cutoffs used by the fits.
pub const FIT_WINDOW: usize = 8;

/// Smallest admissible cutoff.
pub const MIN_CUTOFF: f64 = 1e-12;

/// A second model whose residual is within this factor of the best one makes
/// the classification ambiguous.
pub const AMBIGUITY_RATIO: f64 = 2.0;

const PIECE_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-14 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceFamily {
    /// `x^{beta - 3/2}`: a planar graph `x_1 = C x_2^beta`.
    Reg2D { beta: f64 },
    /// `x^{alpha - 1}`: a graph with `|g(x_3)| <= C x_3^{1 + alpha}`.
    Reg3D { alpha: f64 },
    /// `1 / (-x ln x)`: the graph `g(x_3) = -x_3 / ln x_3`.
    LogExample,
}

impl DivergenceFamily {
    pub fn integrand(&self, x: f64) -> f64 {
        match *self {
            DivergenceFamily::Reg2D { beta } => x.powf(beta - 1.5),
            DivergenceFamily::Reg3D { alpha } => x.powf(alpha - 1.0),
            DivergenceFamily::LogExample => -1.0 / (x * x.ln()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DivergenceFamily::Reg2D { .. } => "reg2d",
            DivergenceFamily::Reg3D { .. } => "reg3d",
            DivergenceFamily::LogExample => "logexample",
        }
    }

    fn check(&self, delta: f64) -> Result<()> {
        let upper = match self {
            DivergenceFamily::LogExample => 1.0,
            _ => f64::INFINITY,
        };
        if !(delta > MIN_CUTOFF && delta < upper) {
            return Err(Error::InvalidInput(format!(
                "{}: delta must lie in ({MIN_CUTOFF}, {upper}), got {delta}",
                self.name()
            )));
        }
        match *self {
            DivergenceFamily::Reg2D { beta: p } | DivergenceFamily::Reg3D { alpha: p } if !p.is_finite() => {
                Err(Error::InvalidInput(format!("{}: exponent must be finite", self.name())))
            }
            _ => Ok(()),
        }
    }
}

/// Fitted growth of `I(tau)` in `L = ln(1/tau)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthModel {
    /// `I = a - b tau^q`, `q > 0`.
    Convergent { exponent: f64 },
    /// `I = a + b tau^-p`, `p > 0`.
    PowerLaw(f64),
    /// `I = a + b L`.
    Log,
    /// `I = a + b ln L`.
    LogLog,
}

impl GrowthModel {
    pub fn label(&self) -> String {
        match self {
            GrowthModel::Convergent { .. } => "Convergent".into(),
            GrowthModel::PowerLaw(p) => format!("PowerLaw({p:.4})"),
            GrowthModel::Log => "Log".into(),
            GrowthModel::LogLog => "LogLog".into(),
        }
    }

    pub fn is_convergent(&self) -> bool {
        matches!(self, GrowthModel::Convergent { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceProfile {
    pub family: DivergenceFamily,
    pub delta: f64,
    pub cutoffs: Vec<f64>,
    pub values: Vec<f64>,
    pub fitted_model: GrowthModel,
    pub fit_residual: f64,
    /// Every model fit with its residual, best first.
    pub candidates: Vec<(GrowthModel, f64)>,
    pub ambiguous: bool,
}

/// `2^-j` for every `j >= 1` with `MIN_CUTOFF < 2^-j < delta`.
pub fn default_cutoffs(delta: f64) -> Vec<f64> {
    (1..64)
        .map(|j| 0.5f64.powi(j))
        .filter(|&t| t < delta && t > MIN_CUTOFF)
        .collect()
}

/// `I(tau) = int_tau^delta phi(x) dx` for the family's model integrand.
pub fn truncated_integral(family: DivergenceFamily, delta: f64, tau: f64) -> Result<QuadratureResult> {
    family.check(delta)?;
    if !(tau > MIN_CUTOFF && tau <= delta) {
        return Err(Error::InvalidInput(format!("cutoff must lie in ({MIN_CUTOFF}, {delta}], got {tau}")));
    }
    // bisect geometrically so every panel sees a bounded dynamic range
    let mut acc = QuadratureResult::zero();
    let mut lo = tau;
    while lo < delta {
        let hi = (2.0 * lo).min(delta);
        acc = acc.combine(integrate(|x| Ok(Complex64::new(family.integrand(x), 0.0)), lo, hi, PIECE_TOL)?);
        lo = hi;
    }
    Ok(acc)
}

/// Least-squares fit of `y = a + b phi`; returns the RMS residual.
fn linear_residual(phi: &[f64], y: &[f64]) -> f64 {
    let m = y.len() as f64;
    let pm = phi.iter().sum::<f64>() / m;
    let ym = y.iter().sum::<f64>() / m;
    let sxx: f64 = phi.iter().map(|p| (p - pm).powi(2)).sum();
    let sxy: f64 = phi.iter().zip(y).map(|(p, v)| (p - pm) * (v - ym)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = ym - b * pm;
    let ss: f64 = phi.iter().zip(y).map(|(p, v)| (v - a - b * p).powi(2)).sum();
    (ss / m).sqrt()
}

fn power_residual(ls: &[f64], y: &[f64], p: f64) -> f64 {
    let l_ref = ls[ls.len() - 1];
    let phi: Vec<f64> = ls.iter().map(|l| (p * (l - l_ref)).exp()).collect();
    linear_residual(&phi, y)
}

/// Best exponent of `a + b e^{pL}` with `sign * p` in `[0.005, 4]`.
fn fit_power(ls: &[f64], y: &[f64], sign: f64) -> (f64, f64) {
    const LO: f64 = 0.005;
    const HI: f64 = 4.0;
    const GRID: usize = 120;
    let at = |u: f64| power_residual(ls, y, sign * u.exp());
    let (ulo, uhi) = (LO.ln(), HI.ln());
    let step = (uhi - ulo) / GRID as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..=GRID {
        let r = at(ulo + i as f64 * step);
        if r < best.1 {
            best = (i, r);
        }
    }
    // golden-section refinement on the bracketing grid cells
    let mut a = ulo + (best.0.saturating_sub(1)) as f64 * step;
    let mut b = (ulo + (best.0 + 1) as f64 * step).min(uhi);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (at(c), at(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = at(d);
        }
    }
    let u = 0.5 * (a + b);
    let r = at(u);
    if r <= best.1 {
        (sign * u.exp(), r)
    } else {
        (sign * (ulo + best.0 as f64 * step).exp(), best.1)
    }
}

/// Truncated integrals on `cutoffs` and the best-fitting growth model.
pub fn divergence_profile(family: DivergenceFamily, delta: f64, cutoffs: &[f64]) -> Result<DivergenceProfile> {
    family.check(delta)?;
    if cutoffs.len() < FIT_WINDOW {
        return Err(Error::InvalidInput(format!("need at least {FIT_WINDOW} cutoffs, got {}", cutoffs.len())));
    }
    if cutoffs.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidInput("cutoffs must strictly decrease".into()));
    }
    if !(cutoffs[0] <= delta && cutoffs[cutoffs.len() - 1] > MIN_CUTOFF) {
        return Err(Error::InvalidInput(format!("cutoffs must lie in ({MIN_CUTOFF}, {delta}]")));
    }
    let mut values = Vec::with_capacity(cutoffs.len());
    let mut running = truncated_integral(family, delta, cutoffs[0])?.value.re;
    values.push(running);
    for w in cutoffs.windows(2) {
        running += truncated_integral(family, w[0], w[1])?.value.re;
        values.push(running);
    }

    let m = cutoffs.len();
    let ls: Vec<f64> = cutoffs[m - FIT_WINDOW..].iter().map(|t| (1.0 / t).ln()).collect();
    let y = &values[m - FIT_WINDOW..];
    let scale = 1.0 + y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let floor = 1e-12 * scale;

    let mut candidates = Vec::with_capacity(4);
    candidates.push((GrowthModel::Log, linear_residual(&ls, y)));
    let lnl: Vec<f64> = ls.iter().map(|l| l.ln()).collect();
    candidates.push((GrowthModel::LogLog, linear_residual(&lnl, y)));
    let (p, r) = fit_power(&ls, y, 1.0);
    candidates.push((GrowthModel::PowerLaw(p), r));
    let (p, r) = fit_power(&ls, y, -1.0);
    candidates.push((GrowthModel::Convergent { exponent: -p }, r));
    for c in candidates.iter_mut() {
        c.1 = c.1.max(floor);
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let ambiguous = candidates[1].1 < AMBIGUITY_RATIO * candidates[0].1;
    Ok(DivergenceProfile {
        family,
        delta,
        cutoffs: cutoffs.to_vec(),
        values,
        fitted_model: candidates[0].0,
        fit_residual: candidates[0].1,
        candidates,
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs_are_dyadic() {
        let c = default_cutoffs(0.5);
        assert_eq!(c[0], 0.25);
        assert!(c.last().copied().unwrap() > MIN_CUTOFF);
        assert!(c.len() >= 30);
    }

    #[test]
    fn truncated_matches_antiderivative() {
        let delta: f64 = 0.5;
        let tau: f64 = 1e-6;
        let r = truncated_integral(DivergenceFamily::Reg2D { beta: 0.4 }, delta, tau).unwrap();
        let exact = (tau.powf(-0.1) - delta.powf(-0.1)) / 0.1;
        assert!((r.value.re - exact).abs() < 1e-12 * exact);
        let r = truncated_integral(DivergenceFamily::LogExample, delta, (-std::f64::consts::E).exp()).unwrap();
        assert!((r.value.re - (1.0 - 2f64.ln().ln())).abs() < 1e-12);
    }

    #[test]
    fn classifications() {
        let cut = default_cutoffs(0.5);
        let p = divergence_profile(DivergenceFamily::Reg2D { beta: 0.4 }, 0.5, &cut).unwrap();
        match p.fitted_model {
            GrowthModel::PowerLaw(e) => assert!((e - 0.1).abs() < 1e-4, "{e}"),
            m => panic!("{m:?}"),
        }
        assert!(!p.ambiguous);
        let p = divergence_profile(DivergenceFamily::Reg2D { beta: 0.5 }, 0.5, &cut).unwrap();
        assert_eq!(p.fitted_model, GrowthModel::Log);
        let p = divergence_profile(DivergenceFamily::Reg2D { beta: 0.6 }, 0.5, &cut).unwrap();
        match p.fitted_model {
            GrowthModel::Convergent { exponent } => assert!((exponent - 0.1).abs() < 1e-4),
            m => panic!("{m:?}"),
        }
        let p = divergence_profile(DivergenceFamily::LogExample, 0.5, &cut).unwrap();
        assert_eq!(p.fitted_model, GrowthModel::LogLog, "{:?}", p.candidates);
        assert!(p.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_bad_input() {
        let cut = default_cutoffs(0.5);
        assert!(divergence_profile(DivergenceFamily::LogExample, 1.5, &cut).is_err());
        assert!(divergence_profile(DivergenceFamily::Reg3D { alpha: 0.1 }, 0.5, &cut[..4]).is_err());
        let mut rev = cut.clone();
        rev.reverse();
        assert!(divergence_profile(DivergenceFamily::Reg3D { alpha: 0.1 }, 0.5, &rev).is_err());
    }
}
