//! Adaptive Gauss-Kronrod quadrature for complex-valued integrands of a real
//! variable.
//!
//! G7/K15 on each interval; the interval with the largest error estimate is
//! bisected until the global estimate meets the tolerance or the subdivision
//! cap is hit. Error estimates are rescaled as in QUADPACK's QK routines.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Complex64, Error, Result};

/// Maximum number of live subintervals.
pub const MAX_INTERVALS: usize = 1 << 15;

/// A panel whose error estimate is within this factor of its noise floor
/// (roundoff plus inner quadrature error) is not bisected further.
const NOISE_MARGIN: f64 = 4.0;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the center.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Absolute and relative tolerance; the target is `max(abs, rel * |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Result<Self> {
        if !(abs >= 0.0 && rel >= 0.0) || (abs == 0.0 && rel == 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerances must be non-negative and not both zero: abs {abs}, rel {rel}"
            )));
        }
        Ok(Self { abs, rel })
    }

    pub fn abs(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn target(&self, value: Complex64) -> f64 {
        self.abs.max(self.rel * value.norm())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

/// Value, error estimate and cost of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub evaluations: usize,
    /// Tolerance met.
    pub converged: bool,
    /// Set by limit procedures when the sequence appears not to converge.
    pub divergence_suspected: bool,
}

impl QuadratureResult {
    pub fn new(value: Complex64, error_estimate: f64, evaluations: usize, converged: bool) -> Self {
        Self {
            value,
            error_estimate,
            evaluations,
            converged,
            divergence_suspected: false,
        }
    }

    /// Sum of two independent pieces.
    pub fn combine(self, other: QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
            divergence_suspected: self.divergence_suspected || other.divergence_suspected,
        }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), 0.0, 0, true)
    }

    pub fn scale(mut self, factor: Complex64) -> Self {
        self.value *= factor;
        self.error_estimate *= factor.norm();
        self
    }
}

pub(crate) fn finite(z: Complex64, t: f64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite { re: t, im: 0.0 })
    }
}

/// One G7/K15 panel on `[a, b]`: Kronrod value, rescaled error, and the
/// roundoff floor of that error.
pub fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64, f64)>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    gk15_noisy(&mut |x| Ok((f(x)?, 0.0)), a, b)
}

/// G7/K15 for an integrand that returns a value and its own error (an inner
/// quadrature). The integrated inner error is added to the floor.
fn gk15_noisy<F>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64, f64)>
where
    F: FnMut(f64) -> Result<(Complex64, f64)>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<(Complex64, f64)> {
        let (v, e) = f(x)?;
        Ok((finite(v, x)?, e))
    };
    let (fc, ec) = eval(center)?;
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut noise = ec * WGK[7];
    let mut fv = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 7];
    for (j, node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let (f1, e1) = eval(center - dx)?;
        let (f2, e2) = eval(center + dx)?;
        fv[j] = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        noise += (e1 + e2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        res_asc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let h = half.abs();
    let result = kron * half;
    res_abs *= h;
    res_asc *= h;
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let mut floor = noise * h;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        floor += 50.0 * f64::EPSILON * res_abs;
    }
    Ok((result, err.max(floor), floor))
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    floor: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// The orientation is respected (`b < a` flips the sign). Integrand errors and
/// non-finite values abort the integration. When the subdivision cap is hit,
/// or the remaining error is roundoff that bisection cannot reduce, the best
/// estimate is returned with `converged = false`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    adapt(&mut |x| Ok((f(x)?, 0.0)), a, b, tol)
}

/// Outer layer of an iterated integral: `f` returns an inner quadrature
/// result, whose error estimate is integrated into the outer one. Bisection
/// stops when the outer error is dominated by inner error.
pub fn integrate_nested<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<QuadratureResult>,
{
    adapt(
        &mut |x| {
            let r = f(x)?;
            Ok((r.value, r.error_estimate))
        },
        a,
        b,
        tol,
    )
}

fn adapt<F>(f: &mut F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<(Complex64, f64)>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult::new(Complex64::new(0.0, 0.0), 0.0, 1, true));
    }
    let (value, err, floor) = gk15_noisy(f, a, b)?;
    let mut evals = 15;
    let mut total = value;
    let mut total_err = err;
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, err, floor });
    // panels at their noise floor, kept out of the bisection queue
    let mut settled: Vec<Panel> = Vec::new();

    while total_err > tol.target(total) {
        if heap.len() + settled.len() >= MAX_INTERVALS {
            return Ok(finish(heap, settled, evals, false));
        }
        let Some(worst) = heap.pop() else {
            return Ok(finish(heap, settled, evals, false));
        };
        let min_width = 64.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs());
        if (worst.b - worst.a).abs() <= min_width.max(1e-300) || worst.err <= NOISE_MARGIN * worst.floor {
            settled.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1, f1) = gk15_noisy(f, worst.a, mid)?;
        let (v2, e2, f2) = gk15_noisy(f, mid, worst.b)?;
        evals += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1, floor: f1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2, floor: f2 });
        // resum periodically so cancellation in the running totals cannot drift
        if heap.len() % 64 == 0 {
            total = heap.iter().chain(&settled).map(|p| p.value).sum();
            total_err = heap.iter().chain(&settled).map(|p| p.err).sum();
        }
    }
    Ok(finish(heap, settled, evals, true))
}

/// Resum all panels in order of position, for bit-stable results.
fn finish(heap: BinaryHeap<Panel>, settled: Vec<Panel>, evals: usize, converged: bool) -> QuadratureResult {
    let mut panels = heap.into_vec();
    panels.extend(settled);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: Complex64 = panels.iter().map(|p| p.value).sum();
    let err: f64 = panels.iter().map(|p| p.err).sum();
    QuadratureResult::new(value, err, evals, converged)
}

/// Integrate over consecutive pieces `[p0, p1], [p1, p2], ...`, giving each
/// piece an equal share of the absolute tolerance.
pub fn integrate_pieces<F>(mut f: F, points: &[f64], tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    let share = Tolerance {
        abs: tol.abs / pieces,
        rel: tol.rel,
    };
    let mut acc = QuadratureResult::zero();
    for w in points.windows(2) {
        acc = acc.combine(integrate(&mut f, w[0], w[1], share)?);
    }
    Ok(acc)
}
