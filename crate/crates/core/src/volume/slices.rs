//! Slice integrals: the density integrated over all coordinates but one.
//!
//! Klein families are sliced by circles or spheres `|x| = r`, flattened
//! families by hyperplanes `x_n = const`. Each slice has a closed form (up to
//! one adaptive integral for the three-dimensional boxes) that continues
//! analytically in the remaining variable.

use std::f64::consts::{PI, TAU};

use super::polygon::{self, AnalyticMeasure};
use super::{eval_poly, DomainSpec, HolderProfile};
use crate::density::{klein_exact_radial, lower_pow, SINGULAR_BAND};
use crate::quadrature::{integrate, QuadratureResult, Tolerance};
use crate::{Complex64, Error, Result};

/// Tolerance used for the transverse integral inside a slice.
const SLICE_TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-12 };

fn ball_geometry(center: &[f64; 3]) -> f64 {
    center.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Radii at which the real angular measure of a Klein family has kinks; the
/// last entry is the outer radius.
pub(crate) fn radial_breakpoints(domain: &DomainSpec) -> Result<Vec<f64>> {
    match domain {
        DomainSpec::Sector2D { r_outer, .. } => Ok(vec![*r_outer]),
        DomainSpec::Polygon2D { vertices } => Ok(polygon::breakpoints(&polygon::ccw(vertices))),
        DomainSpec::Ball3D { center, radius } => {
            let d = ball_geometry(center);
            if d == 0.0 {
                Ok(vec![*radius])
            } else {
                let mut b = vec![(d - radius).abs(), d + radius];
                b.retain(|&r| r > 0.0);
                Ok(b)
            }
        }
        other => Err(Error::Unsupported(format!("{} is not a Klein-chart family", other.name()))),
    }
}

fn ball_cap(d: f64, radius: f64, r: Complex64) -> Complex64 {
    let h = (r * r + d * d - radius * radius) / (2.0 * d * r);
    TAU * (1.0 - h)
}

/// Angular measure of the slice `|x| = r` for real `r > 0`: an angle in 2D, a
/// solid angle in 3D.
pub(crate) fn measure_real(domain: &DomainSpec, r: f64) -> Result<f64> {
    match domain {
        DomainSpec::Sector2D { theta, r_outer, .. } => Ok(if r < *r_outer { *theta } else { 0.0 }),
        DomainSpec::Polygon2D { vertices } => Ok(polygon::angular_measure(&polygon::ccw(vertices), r)),
        DomainSpec::Ball3D { center, radius } => {
            let d = ball_geometry(center);
            if d == 0.0 {
                return Ok(if r < *radius { 2.0 * TAU } else { 0.0 });
            }
            let h = (r * r + d * d - radius * radius) / (2.0 * d * r);
            Ok(if h <= -1.0 {
                2.0 * TAU
            } else if h >= 1.0 {
                0.0
            } else {
                TAU * (1.0 - h)
            })
        }
        other => Err(Error::Unsupported(format!("{} is not a Klein-chart family", other.name()))),
    }
}

/// Analytic continuation of the angular measure from the breakpoint piece
/// containing `r_ref`.
pub(crate) enum MeasureNear {
    Constant(f64),
    Polygon(AnalyticMeasure),
    Cap { d: f64, radius: f64 },
}

impl MeasureNear {
    pub(crate) fn new(domain: &DomainSpec, r_ref: f64) -> Result<Self> {
        Ok(match domain {
            DomainSpec::Polygon2D { vertices } => {
                MeasureNear::Polygon(AnalyticMeasure::new(&polygon::ccw(vertices), r_ref))
            }
            DomainSpec::Ball3D { center, radius } => {
                let d = ball_geometry(center);
                let f = measure_real(domain, r_ref)?;
                if d > 0.0 && f > 0.0 && f < 2.0 * TAU {
                    MeasureNear::Cap { d, radius: *radius }
                } else {
                    MeasureNear::Constant(f)
                }
            }
            _ => MeasureNear::Constant(measure_real(domain, r_ref)?),
        })
    }

    pub(crate) fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            MeasureNear::Constant(f) => Complex64::new(*f, 0.0),
            MeasureNear::Polygon(m) => m.eval(z),
            MeasureNear::Cap { d, radius } => ball_cap(*d, *radius, z),
        }
    }
}

/// Angular measure `F(r)` of a Klein-chart family. Real `r` gives the
/// geometric value; complex `r` the continuation from the piece containing
/// `Re r`.
pub fn angular_measure(domain: &DomainSpec, r: Complex64) -> Result<Complex64> {
    domain.validate()?;
    if !(r.re > 0.0) {
        return Err(Error::Domain(format!("angular measure needs Re r > 0, got {r}")));
    }
    if r.im == 0.0 {
        return Ok(Complex64::new(measure_real(domain, r.re)?, 0.0));
    }
    let bps = radial_breakpoints(domain)?;
    if let Some(b) = bps.iter().find(|&&b| (b - r.re).abs() <= r.im.abs()) {
        return Err(Error::Domain(format!(
            "r = {r} is within its imaginary part of the breakpoint {b}"
        )));
    }
    Ok(MeasureNear::new(domain, r.re)?.eval(r))
}

fn strip_core(x1: f64, lo: Complex64, hi: Complex64, x3: Complex64) -> Result<Complex64> {
    let t = x3 - 1.0;
    let s2 = t * t + x1 * x1;
    if !(s2.re > 0.0) {
        return Err(Error::Domain(format!(
            "x3 = {x3} leaves the region where the strip antiderivative is analytic"
        )));
    }
    let s = s2.sqrt();
    let atan = |x2: Complex64| -> Result<Complex64> {
        let w = x2 / s;
        if w.re.abs() < 0.05 && w.im.abs() > 0.9 {
            return Err(Error::Domain(format!("arctan argument {w} is close to its branch cut")));
        }
        Ok(w.atan())
    };
    Ok((atan(hi)? - atan(lo)?) / s)
}

fn check_height(x3: Complex64) -> Result<()> {
    if x3.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: vec![x3.re, x3.im],
            what: "hyperplane x_n = 0",
        });
    }
    Ok(())
}

/// `int_{x2_lo}^{x2_hi} dV dx_2` at fixed `x_1` and complex `x_3` in the
/// three-dimensional flattened chart, in closed form:
/// `(1 / (2 x_3^2)) (1/s) [arctan(x_2 / s)]`, `s^2 = x_1^2 + (x_3 - 1)^2`.
pub fn transverse_strip(x1: f64, x2_lo: f64, x2_hi: f64, x3: Complex64) -> Result<Complex64> {
    check_height(x3)?;
    let v = strip_core(x1, Complex64::new(x2_lo, 0.0), Complex64::new(x2_hi, 0.0), x3)?;
    Ok(v / (2.0 * x3 * x3))
}

fn real_height(domain: &DomainSpec, xn: Complex64, delta: f64) -> Result<f64> {
    if xn.im != 0.0 {
        return Err(Error::Domain(format!(
            "{} slices are not analytic; x_n must be real, got {xn}",
            domain.name()
        )));
    }
    if !(xn.re > 0.0 && xn.re <= delta) {
        return Err(Error::Domain(format!("x_n = {} outside (0, {delta}]", xn.re)));
    }
    Ok(xn.re)
}

pub(crate) fn holder3_profile(profile: HolderProfile, coeff: f64, x3: f64) -> f64 {
    match profile {
        HolderProfile::Power { alpha } => coeff * x3.powf(1.0 + alpha),
        HolderProfile::Log => -coeff * x3 / x3.ln(),
    }
}

/// Slice integral with the error estimate of its transverse quadrature.
pub(crate) fn slice_result(domain: &DomainSpec, xn: Complex64, tol: Tolerance) -> Result<QuadratureResult> {
    let exact = |v: Complex64| QuadratureResult::new(v, 0.0, 1, true);
    match domain {
        DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::Ball3D { .. } => {
            let n = domain.dim();
            let f = angular_measure(domain, xn)?;
            Ok(exact(f * xn.powi(n as i32 - 1) * klein_exact_radial(xn, n)?))
        }
        DomainSpec::Box3D { x1, x2, .. } => {
            check_height(xn)?;
            let r = integrate(
                |u| strip_core(u, Complex64::new(x2[0], 0.0), Complex64::new(x2[1], 0.0), xn),
                x1[0],
                x1[1],
                tol,
            )?;
            Ok(r.scale((2.0 * xn * xn).inv()))
        }
        DomainSpec::Wedge3D { a, b, c, d, .. } => {
            check_height(xn)?;
            let r = integrate(
                |u| {
                    let lo = eval_poly(c, u);
                    let hi = lo + eval_poly(d, u) * xn;
                    strip_core(u, Complex64::new(lo, 0.0), hi, xn)
                },
                *a,
                *b,
                tol,
            )?;
            Ok(r.scale((2.0 * xn * xn).inv()))
        }
        DomainSpec::Cone3D { k, .. } => {
            check_height(xn)?;
            let q = xn / (k * (1.0 - xn));
            Ok(exact(PI / (2.0 * xn * xn) * (1.0 + q * q).ln()))
        }
        DomainSpec::HolderGraph2D { beta, coeff, delta } => {
            let x2 = real_height(domain, xn, *delta)?;
            let g = coeff * x2.powf(*beta);
            let inner = (g / (1.0 - x2).abs()).asinh();
            Ok(exact(inner / (2.0 * lower_pow(Complex64::new(-x2, 0.0), 1.5))))
        }
        DomainSpec::HolderGraph3D { profile, coeff, a, b, delta } => {
            let x3 = real_height(domain, xn, *delta)?;
            let g = holder3_profile(*profile, *coeff, x3);
            let r = integrate(
                |u| strip_core(u, Complex64::new(0.0, 0.0), Complex64::new(g, 0.0), xn),
                *a,
                *b,
                tol,
            )?;
            Ok(r.scale(Complex64::new(1.0 / (2.0 * x3 * x3), 0.0)))
        }
    }
}

/// Integral of the exact density over the slice at `x_n` (Klein families: the
/// radial integrand `F(r) r^{n-1} (1 - r^2)^{-(n+1)/2}` at `r = x_n`).
pub fn slice_integral(domain: &DomainSpec, xn: Complex64, n: usize) -> Result<Complex64> {
    domain.check(n)?;
    Ok(slice_result(domain, xn, SLICE_TOL)?.value)
}
