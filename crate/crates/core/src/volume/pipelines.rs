//! The three ways of computing a volume.
//!
//! - [`mu_contour`]: integrate the analytic slice function along a path that
//!   passes above the singular point.
//! - [`mu_eps`]: integrate a regularized density over the real domain for a
//!   schedule of eps values and extrapolate to eps = 0.
//! - [`mu_direct`]: plain (possibly improper) integration for domains that lie
//!   on one side of the ideal boundary.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use super::polygon::{self, P2};
use super::slices::{holder3_profile, measure_real, radial_breakpoints, slice_result, MeasureNear};
use super::{eval_poly, DomainSpec};
use crate::contour::{build_contour, integrate_path, integrate_path_points, tracked_power_integrand, Segment};
use crate::density::{density_flattened_exact, density_klein_exact, klein_eps_radial, DensityKind, DensityVariant};
use crate::extrapolate::{eps_limit_traced, EpsLimit, EpsSchedule};
use crate::geometry::{alpha, Model};
use crate::quadrature::{integrate, integrate_nested, integrate_pieces, QuadratureResult, Tolerance};
use crate::{Complex64, Error, Result};

/// Detour radius as a fraction of the distance to the nearest breakpoint.
const DETOUR_FRACTION: f64 = 0.1;

/// Share of the tolerance handed to an inner quadrature.
const INNER_SHARE: f64 = 0.01;

fn inner(tol: Tolerance, length: f64) -> Tolerance {
    Tolerance {
        abs: (tol.abs * INNER_SHARE / length.max(1e-300)).max(1e-15),
        rel: (tol.rel * INNER_SHARE).max(1e-13),
    }
}

fn klein_crossing(domain: &DomainSpec) -> Result<(Vec<f64>, f64)> {
    let bps = radial_breakpoints(domain)?;
    let r_max = bps.iter().copied().fold(0.0, f64::max);
    Ok((bps, r_max))
}

fn pieces_with(bps: &[f64], extra: &[f64], r_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0, r_max];
    pts.extend(bps.iter().chain(extra).copied().filter(|&b| b > 0.0 && b < r_max));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Contour value of a Klein family with the given detour radius.
fn klein_contour_once(domain: &DomainSpec, delta: f64, tol: Tolerance) -> Result<QuadratureResult> {
    let n = domain.dim();
    let (bps, r_max) = klein_crossing(domain)?;
    let c = build_contour(0.0, r_max, &[1.0], delta)?.split_at(&bps);
    let near = MeasureNear::new(domain, 1.0)?;
    let segments = c.segments().to_vec();
    let measure = |p: crate::contour::PathPoint| -> Result<Complex64> {
        match segments[p.segment] {
            Segment::Arc { .. } => Ok(near.eval(p.z)),
            Segment::Line { .. } => Ok(Complex64::new(measure_real(domain, p.z.re)?, 0.0)),
        }
    };
    if n == 2 {
        let tp = tracked_power_integrand(|z: Complex64| 1.0 - z * z, 1.5, &c)?;
        integrate_path_points(|p| Ok(measure(p)? * p.z * tp.eval_at(p)?), &c, tol)
    } else {
        integrate_path_points(
            |p| {
                let w = 1.0 - p.z * p.z;
                Ok(measure(p)? * p.z * p.z / (w * w))
            },
            &c,
            tol,
        )
    }
}

fn flattened_contour_once(domain: &DomainSpec, height: f64, delta: f64, tol: Tolerance) -> Result<QuadratureResult> {
    let c = build_contour(-height, height, &[0.0], delta)?;
    let tin = inner(tol, 2.0 * height);
    integrate_path(|z| Ok(slice_result(domain, z, tin)?.value), &c, tol)
}

/// Volume by integrating the slice function along the detour contour.
///
/// The integral is evaluated for two detour radii; if they disagree beyond
/// the error estimates the slice is not analytic near the singular point and
/// [`Error::DeformationFailed`] is returned.
pub fn mu_contour(domain: &DomainSpec, n: usize, tol: Tolerance) -> Result<QuadratureResult> {
    domain.check(n)?;
    let (delta, run): (f64, Box<dyn Fn(f64) -> Result<QuadratureResult> + '_>) = match domain {
        DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::Ball3D { .. } => {
            let (bps, r_max) = klein_crossing(domain)?;
            if r_max < 1.0 {
                // nothing to detour around
                let pts = pieces_with(&bps, &[], r_max);
                return integrate_pieces(|r| slice_result(domain, Complex64::new(r, 0.0), tol).map(|q| q.value), &pts, tol);
            }
            let gap = bps
                .iter()
                .chain(std::iter::once(&0.0))
                .map(|b| (b - 1.0).abs())
                .fold(f64::INFINITY, f64::min);
            (DETOUR_FRACTION * gap, Box::new(move |d| klein_contour_once(domain, d, tol)))
        }
        DomainSpec::Box3D { delta: h, .. } | DomainSpec::Wedge3D { delta: h, .. } => {
            let h = *h;
            (DETOUR_FRACTION * h, Box::new(move |d| flattened_contour_once(domain, h, d, tol)))
        }
        other => {
            return Err(Error::Unsupported(format!(
                "{} has no analytic slice near the singular set",
                other.name()
            )))
        }
    };
    let first = run(delta)?;
    let second = run(0.5 * delta)?;
    let spread = (first.value - second.value).norm();
    let allowed = 10.0 * (first.error_estimate + second.error_estimate) + 1e-9 * (1.0 + first.value.norm());
    if spread > allowed {
        return Err(Error::DeformationFailed { spread, tol: allowed });
    }
    Ok(first)
}

/// Evaluate a flattened-chart variant at a Klein point through the Cayley
/// reflection, times the Jacobian. `gap` is `1 - |y|^2`, passed separately
/// because forming it from `y` loses the digits that matter near the pole.
fn pulled_back(variant: &DensityVariant, y: &[f64], gap: f64) -> Result<Complex64> {
    let n = y.len();
    let a = alpha(y);
    if a < 1e-18 {
        return Err(Error::Singular {
            point: y.to_vec(),
            what: "Cayley reflection center e_n",
        });
    }
    let mut x = [0.0; 3];
    for i in 0..n {
        x[i] = 2.0 * y[i] / a;
    }
    // 2 (y_n - 1) / a + 1, rewritten without cancellation
    x[n - 1] = -gap / a;
    let v = variant.eval_flattened(&x[..n - 1], Complex64::new(x[n - 1], 0.0))?;
    Ok(v * (2.0 / a).powi(n as i32))
}

/// Angular pieces of width at most pi/2 covering the domain.
fn theta_chunks(domain: &DomainSpec) -> Vec<(f64, f64)> {
    let mut cuts = match domain {
        DomainSpec::Sector2D { theta, start_angle, .. } => vec![*start_angle, start_angle + theta],
        DomainSpec::Polygon2D { vertices } => {
            let mut c: Vec<f64> = vertices
                .iter()
                .filter(|v| v[0] != 0.0 || v[1] != 0.0)
                .map(|v| v[1].atan2(v[0]).rem_euclid(TAU))
                .collect();
            c.push(0.0);
            c.push(TAU);
            c
        }
        _ => vec![0.0, TAU],
    };
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let k = ((w[1] - w[0]) / FRAC_PI_2).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / k as f64;
        for i in 0..k {
            out.push((w[0] + i as f64 * h, w[0] + (i + 1) as f64 * h));
        }
    }
    out
}

fn ray_intervals_2d(domain: &DomainSpec, ccw: &[P2], u: P2) -> Vec<(f64, f64)> {
    match domain {
        DomainSpec::Sector2D { r_outer, .. } => vec![(0.0, *r_outer)],
        _ => polygon::ray_intervals(ccw, u),
    }
}

/// Directions from the origin that meet a ball, in spherical angles
/// (`psi` from the x3 axis, `phi` in the x1 x2 plane).
///
/// Small balls far from the origin subtend a tiny solid angle; clipping the
/// angular integration to it keeps the quadrature nodes on the ball.
struct BallCone {
    /// `None` when the origin lies inside the ball.
    cone: Option<Cone>,
}

struct Cone {
    psi_c: f64,
    phi_c: f64,
    cos_max: f64,
    /// Azimuthal half-width; `None` when the cone contains an axis pole.
    dphi: Option<f64>,
}

impl BallCone {
    fn new(center: &[f64; 3], radius: f64) -> Self {
        let d = center.iter().map(|v| v * v).sum::<f64>().sqrt();
        if d <= radius {
            return Self { cone: None };
        }
        let half = (radius / d).asin();
        let psi_c = (center[2] / d).clamp(-1.0, 1.0).acos();
        let dphi = if psi_c - half <= 0.0 || psi_c + half >= PI {
            None
        } else {
            Some((half.sin() / psi_c.sin()).min(1.0).asin())
        };
        Self {
            cone: Some(Cone {
                psi_c,
                phi_c: center[1].atan2(center[0]).rem_euclid(TAU),
                cos_max: half.cos(),
                dphi,
            }),
        }
    }

    /// Parts of `[a, b]` (inside `[0, 2 pi]`) whose azimuth can meet the ball.
    fn phi_pieces(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let Some(Cone { phi_c, dphi: Some(w), .. }) = self.cone else {
            return vec![(a, b)];
        };
        let mut out = Vec::new();
        for shift in [-TAU, 0.0, TAU] {
            let (lo, hi) = ((phi_c - w + shift).max(a), (phi_c + w + shift).min(b));
            if hi > lo {
                out.push((lo, hi));
            }
        }
        out
    }

    /// Polar angles in `[a, b]` whose ray at azimuth `phi` meets the ball.
    fn psi_range(&self, phi: f64, a: f64, b: f64) -> Option<(f64, f64)> {
        let Some(c) = &self.cone else {
            return Some((a, b));
        };
        // cos(angle to centre) = A sin(psi) + B cos(psi)
        let (aa, bb) = (c.psi_c.sin() * (phi - c.phi_c).cos(), c.psi_c.cos());
        let norm = aa.hypot(bb);
        if norm <= c.cos_max {
            return None;
        }
        let mid = aa.atan2(bb);
        let w = (c.cos_max / norm).acos();
        // near a pole atan2 may land on -pi instead of pi
        [-TAU, 0.0, TAU]
            .into_iter()
            .map(|shift| ((mid + shift - w).max(a), (mid + shift + w).min(b)))
            .filter(|(lo, hi)| hi > lo)
            .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
    }
}

fn ray_ball(center: &[f64; 3], radius: f64, u: [f64; 3]) -> Option<(f64, f64)> {
    let b: f64 = (0..3).map(|i| u[i] * center[i]).sum();
    let c2: f64 = center.iter().map(|v| v * v).sum();
    let disc = b * b - (c2 - radius * radius);
    if disc <= 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let (t0, t1) = (b - sq, b + sq);
    if t1 <= 0.0 {
        None
    } else {
        Some((t0.max(0.0), t1))
    }
}

fn radial<F>(dens: &mut F, lo: f64, hi: f64, power: i32, point: &dyn Fn(f64) -> [f64; 3], n: usize, tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(&[f64], f64) -> Result<Complex64>,
{
    let mut pts = vec![lo];
    if lo < 1.0 && hi > 1.0 {
        pts.push(1.0);
    }
    pts.push(hi);
    integrate_pieces(
        |r| {
            let y = point(r);
            Ok(r.powi(power) * dens(&y[..n], (1.0 - r) * (1.0 + r))?)
        },
        &pts,
        tol,
    )
}

/// Nested polar integral over a Klein-chart domain.
///
/// With `transport`, each angular chunk is moved by an isometry fixing the
/// origin so that it points away from e_n before `dens` is evaluated, which
/// keeps the Cayley image of the chunk bounded. `dens` receives the point and
/// `1 - |y|^2`.
fn klein_polar<F>(domain: &DomainSpec, tol: Tolerance, transport: bool, mut dens: F) -> Result<QuadratureResult>
where
    F: FnMut(&[f64], f64) -> Result<Complex64>,
{
    match domain {
        DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } => {
            let ccw = match domain {
                DomainSpec::Polygon2D { vertices } => polygon::ccw(vertices),
                _ => Vec::new(),
            };
            let chunks = theta_chunks(domain);
            let share = tol.scaled(1.0 / chunks.len() as f64);
            let mut acc = QuadratureResult::zero();
            for (a, b) in chunks {
                let rot = if transport { -FRAC_PI_2 - 0.5 * (a + b) } else { 0.0 };
                let tin = inner(share, b - a);
                let r = integrate_nested(
                    |th| {
                        let u = [th.cos(), th.sin()];
                        let v = [(th + rot).cos(), (th + rot).sin()];
                        let mut sum = QuadratureResult::zero();
                        for (lo, hi) in ray_intervals_2d(domain, &ccw, u) {
                            let point = |r: f64| [r * v[0], r * v[1], 0.0];
                            sum = sum.combine(radial(&mut dens, lo, hi, 1, &point, 2, tin)?);
                        }
                        Ok(sum)
                    },
                    a,
                    b,
                    share,
                )?;
                acc = acc.combine(r);
            }
            Ok(acc)
        }
        DomainSpec::Ball3D { center, radius } => {
            let cone = BallCone::new(center, *radius);
            let share = tol.scaled(0.125);
            let mut acc = QuadratureResult::zero();
            for k in 0..4 {
                let (qa, qb) = (k as f64 * FRAC_PI_2, (k + 1) as f64 * FRAC_PI_2);
                for (sa, sb, upper) in [(0.0, FRAC_PI_2, true), (FRAC_PI_2, PI, false)] {
                    let flip = transport && upper;
                    for (pa, pb) in cone.phi_pieces(qa, qb) {
                        let tmid = inner(share, pb - pa);
                        let r = integrate_nested(
                            |ph| {
                                let Some((lo_s, hi_s)) = cone.psi_range(ph, sa, sb) else {
                                    return Ok(QuadratureResult::zero());
                                };
                                let (sp, cp) = ph.sin_cos();
                                integrate_nested(
                                    |ps| {
                                        let (ss, cs) = ps.sin_cos();
                                        let u = [ss * cp, ss * sp, cs];
                                        let v = if flip { [u[0], -u[1], -u[2]] } else { u };
                                        match ray_ball(center, *radius, u) {
                                            None => Ok(QuadratureResult::zero()),
                                            Some((lo, hi)) => {
                                                let point = |r: f64| [r * v[0], r * v[1], r * v[2]];
                                                let tin = inner(tmid, hi_s - lo_s);
                                                Ok(radial(&mut dens, lo, hi, 2, &point, 3, tin)?
                                                    .scale(Complex64::new(ss, 0.0)))
                                            }
                                        }
                                    },
                                    lo_s,
                                    hi_s,
                                    tmid,
                                )
                            },
                            pa,
                            pb,
                            share,
                        )?;
                        acc = acc.combine(r);
                    }
                }
            }
            Ok(acc)
        }
        other => Err(Error::Unsupported(format!("{} is not a Klein-chart family", other.name()))),
    }
}

/// Integral of a regularized density over the real domain at one eps.
fn eps_integral(domain: &DomainSpec, variant: &DensityVariant, tol: Tolerance) -> Result<QuadratureResult> {
    let n = domain.dim();
    match (domain, variant.kind()) {
        (DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::Ball3D { .. }, DensityKind::KleinEps) => {
            let (bps, r_max) = klein_crossing(domain)?;
            let pts = pieces_with(&bps, &[1.0], r_max);
            let eps = variant.eps();
            integrate_pieces(
                |r| {
                    let f = measure_real(domain, r)?;
                    Ok(f * r.powi(n as i32 - 1) * klein_eps_radial(Complex64::new(r, 0.0), n, eps)?)
                },
                &pts,
                tol,
            )
        }
        (DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::Ball3D { .. }, _) => {
            klein_polar(domain, tol, true, |y, gap| pulled_back(variant, y, gap))
        }
        (DomainSpec::Box3D { x1, x2, delta }, kind) => {
            let dens = |p: [f64; 3]| -> Result<Complex64> {
                if kind == DensityKind::KleinEps {
                    variant.eval_in(Model::Flattened, &p)
                } else {
                    variant.eval_flattened(&p[..2], Complex64::new(p[2], 0.0))
                }
            };
            let t2 = inner(tol, x1[1] - x1[0]);
            let t3 = inner(t2, x2[1] - x2[0]);
            integrate_nested(
                |u| {
                    integrate_nested(
                        |v| integrate_pieces(|w| dens([u, v, w]), &[-delta, 0.0, *delta], t3),
                        x2[0],
                        x2[1],
                        t2,
                    )
                },
                x1[0],
                x1[1],
                tol,
            )
        }
        (DomainSpec::Wedge3D { a, b, c, d, delta }, kind) => {
            let dens = |p: [f64; 3]| -> Result<Complex64> {
                if kind == DensityKind::KleinEps {
                    variant.eval_in(Model::Flattened, &p)
                } else {
                    variant.eval_flattened(&p[..2], Complex64::new(p[2], 0.0))
                }
            };
            let t2 = inner(tol, b - a);
            let t3 = inner(t2, 2.0 * delta);
            integrate_nested(
                |u| {
                    let lo = eval_poly(c, u);
                    let slope = eval_poly(d, u);
                    let mut acc = QuadratureResult::zero();
                    for (w0, w1) in [(-delta, 0.0), (0.0, *delta)] {
                        let part = integrate_nested(|w| integrate(|v| dens([u, v, w]), lo, lo + slope * w, t3), w0, w1, t2.scaled(0.5))?;
                        acc = acc.combine(part);
                    }
                    Ok(acc)
                },
                *a,
                *b,
                tol,
            )
        }
        (other, _) => Err(Error::Unsupported(format!(
            "{} lies on one side of the ideal boundary; use mu_direct",
            other.name()
        ))),
    }
}

/// eps-limit volume with the per-eps values.
pub fn mu_eps_traced(
    domain: &DomainSpec,
    n: usize,
    kind: DensityKind,
    schedule: &EpsSchedule,
    tol: Tolerance,
) -> Result<EpsLimit> {
    domain.check(n)?;
    if !kind.is_regularized() {
        return Err(Error::InvalidInput(format!("{} is not a regularized density", kind.name())));
    }
    let per_eps = tol.scaled(0.02);
    eps_limit_traced(
        |eps| {
            let variant = DensityVariant::new(kind, n, eps)?;
            eps_integral(domain, &variant, per_eps)
        },
        schedule,
    )
}

/// Volume as the eps -> 0 limit of the integral of a regularized density.
pub fn mu_eps(
    domain: &DomainSpec,
    n: usize,
    kind: DensityKind,
    schedule: &EpsSchedule,
    tol: Tolerance,
) -> Result<QuadratureResult> {
    Ok(mu_eps_traced(domain, n, kind, schedule, tol)?.result)
}

/// Most geometric truncation steps for improper integrals.
const TRUNCATION_STEPS: usize = 40;

/// Smallest truncation point, kept well clear of the density's singular band.
const TRUNCATION_FLOOR: f64 = 1e-10;

/// `int_0^h f` for an integrand that may blow up at 0: partial integrals over
/// `[h 2^-j, h]` and an Aitken estimate of the geometric tail.
fn improper_at_zero<F>(mut f: F, h: f64, tol: Tolerance) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<QuadratureResult>,
{
    let steps = ((h / TRUNCATION_FLOOR).log2().floor() as usize).clamp(4, TRUNCATION_STEPS);
    let share = tol.scaled(1.0 / steps as f64);
    let mut sums = Vec::with_capacity(steps);
    let mut acc = QuadratureResult::zero();
    let mut hi = h;
    for _ in 0..steps {
        let lo = 0.5 * hi;
        acc = acc.combine(integrate_nested(&mut f, lo, hi, share)?);
        sums.push(acc.value);
        hi = lo;
    }
    let aitken = |s0: Complex64, s1: Complex64, s2: Complex64| {
        let d1 = s1 - s0;
        let d2 = s2 - s1;
        let den = d2 - d1;
        if den.norm() <= 1e-300 {
            s2
        } else {
            s2 - d2 * d2 / den
        }
    };
    let m = sums.len();
    let a_last = aitken(sums[m - 3], sums[m - 2], sums[m - 1]);
    let a_prev = aitken(sums[m - 4], sums[m - 3], sums[m - 2]);
    let d_last = (sums[m - 1] - sums[m - 2]).norm();
    let d_prev = (sums[m - 2] - sums[m - 3]).norm();
    let drift = (a_last - a_prev).norm();
    let ratio = if d_prev > 0.0 { d_last / d_prev } else { 0.0 };
    let mut out = QuadratureResult::new(a_last, acc.error_estimate + drift, acc.evaluations, acc.converged);
    out.divergence_suspected = ratio >= 1.0 - 1e-9 || drift > tol.target(a_last).max(1e-8 * (1.0 + a_last.norm()));
    Ok(out)
}

/// Volume of a domain on one side of the ideal boundary by plain adaptive
/// integration of the exact density. Boundary contact with `x_n = 0` is
/// handled as an improper integral.
pub fn mu_direct(domain: &DomainSpec, n: usize, tol: Tolerance) -> Result<QuadratureResult> {
    domain.check(n)?;
    match domain {
        DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::Ball3D { .. } => {
            let (_, r_max) = klein_crossing(domain)?;
            if r_max > 1.0 && measure_real(domain, 1.0)? > 0.0 {
                return Err(Error::Domain(format!(
                    "{} meets the unit sphere; use mu_contour or mu_eps",
                    domain.name()
                )));
            }
            klein_polar(domain, tol, false, |y, _| density_klein_exact(y))
        }
        DomainSpec::Cone3D { k, delta } => {
            let tin = inner(tol, *delta);
            improper_at_zero(
                |x3| {
                    integrate(
                        |r| Ok(TAU * r * density_flattened_exact(&[r, 0.0], Complex64::new(x3, 0.0))?),
                        0.0,
                        x3 / k,
                        tin,
                    )
                },
                *delta,
                tol,
            )
        }
        DomainSpec::HolderGraph2D { beta, coeff, delta } => {
            let tin = inner(tol, *delta);
            improper_at_zero(
                |x2| {
                    let g = coeff * x2.powf(*beta);
                    integrate(|x1| density_flattened_exact(&[x1], Complex64::new(x2, 0.0)), 0.0, g, tin)
                },
                *delta,
                tol,
            )
        }
        DomainSpec::HolderGraph3D { profile, coeff, a, b, delta } => {
            let t1 = inner(tol, *delta);
            let t2 = inner(t1, b - a);
            improper_at_zero(
                |x3| {
                    let g = holder3_profile(*profile, *coeff, x3);
                    let xn = Complex64::new(x3, 0.0);
                    integrate_nested(
                        |x1| integrate(|x2| density_flattened_exact(&[x1, x2], xn), 0.0, g, t2),
                        *a,
                        *b,
                        t1,
                    )
                },
                *delta,
                tol,
            )
        }
        other => Err(Error::Domain(format!(
            "{} straddles the hyperplane x_n = 0; use mu_contour or mu_eps",
            other.name()
        ))),
    }
}
