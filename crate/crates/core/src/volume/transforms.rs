//! Isometry invariance and finite additivity checks.

use super::polygon::{self, P2};
use super::{mu_contour, DomainSpec};
use crate::geometry::{apply_isometry, Isometry, IsometryKind, ModelPoint};
use crate::quadrature::{QuadratureResult, Tolerance};
use crate::{Error, Result};

/// Entries of a matrix this close to the target pattern count as equal.
const PATTERN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Invariance {
    pub image: DomainSpec,
    pub mu_u: QuadratureResult,
    pub mu_gu: QuadratureResult,
    pub deviation: f64,
}

/// How to cut a domain in two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Split {
    /// A sector along the ray at this angle.
    Angle(f64),
    /// A polygon by the line `normal . x = offset`.
    Line { normal: [f64; 2], offset: f64 },
    /// A box or wedge by the plane `x_{axis+1} = value` (`axis` 0 or 1).
    Plane { axis: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Additivity {
    pub parts: (DomainSpec, DomainSpec),
    pub whole: QuadratureResult,
    pub first: QuadratureResult,
    pub second: QuadratureResult,
    pub deviation: f64,
}

fn unsupported(domain: &DomainSpec, what: &str) -> Error {
    Error::Unsupported(format!("{what} of a {} is outside the supported families", domain.name()))
}

/// Spatial block of a Lorentz matrix that fixes the origin of the Klein
/// chart, i.e. an orthogonal map of the spatial coordinates.
fn orthogonal_block(g: &Isometry) -> Option<Vec<Vec<f64>>> {
    let m = g.matrix();
    let n = m.len() - 1;
    if (m[0][0] - 1.0).abs() > PATTERN_TOL || (1..=n).any(|i| m[0][i].abs() > PATTERN_TOL || m[i][0].abs() > PATTERN_TOL) {
        return None;
    }
    Some((1..=n).map(|i| m[i][1..].to_vec()).collect())
}

/// Image of a domain under an isometry, when it stays in a supported family.
pub fn image_domain(domain: &DomainSpec, g: &Isometry) -> Result<DomainSpec> {
    if g.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            got: g.dim(),
        });
    }
    domain.validate()?;
    let image = match domain {
        DomainSpec::Polygon2D { vertices } => {
            if g.kind() == IsometryKind::LorentzMatrix {
                // a projective map sends the segment between two vertices to the
                // image segment only if the line at infinity misses it
                let w: Vec<f64> = vertices.iter().map(|v| g.lifted_weight(v)).collect();
                let same_sign = w.iter().all(|&x| x > PATTERN_TOL) || w.iter().all(|&x| x < -PATTERN_TOL);
                if !same_sign {
                    return Err(unsupported(domain, "projective image crossing infinity"));
                }
            }
            let mut out = Vec::with_capacity(vertices.len());
            for v in vertices {
                let p = apply_isometry(g, &ModelPoint::klein(v)?)?;
                out.push([p.coords()[0], p.coords()[1]]);
            }
            DomainSpec::Polygon2D { vertices: out }
        }
        DomainSpec::Sector2D { theta, r_outer, start_angle } => {
            let q = orthogonal_block(g).ok_or_else(|| unsupported(domain, "image under a map moving the origin"))?;
            let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
            let phi = q[1][0].atan2(q[0][0]);
            let start = if det > 0.0 {
                start_angle + phi
            } else {
                // reflection: theta -> phi - theta
                phi - start_angle - theta
            };
            DomainSpec::Sector2D {
                theta: *theta,
                r_outer: *r_outer,
                start_angle: start,
            }
        }
        DomainSpec::Ball3D { center, radius } => {
            let q = orthogonal_block(g).ok_or_else(|| unsupported(domain, "image under a map moving the origin"))?;
            let mut c = [0.0; 3];
            for (i, ci) in c.iter_mut().enumerate() {
                *ci = (0..3).map(|j| q[i][j] * center[j]).sum();
            }
            DomainSpec::Ball3D {
                center: c,
                radius: *radius,
            }
        }
        DomainSpec::Box3D { x1, x2, delta } => {
            // only sign flips of x1, x2 fix e_3 and keep boxes boxes
            let m = g.matrix();
            let diag_ok = (0..4).all(|i| (0..4).all(|j| i == j || m[i][j].abs() <= PATTERN_TOL));
            let fixed = (m[0][0] - 1.0).abs() <= PATTERN_TOL && (m[3][3] - 1.0).abs() <= PATTERN_TOL;
            let signs = [m[1][1], m[2][2]];
            if !(diag_ok && fixed && signs.iter().all(|s| (s.abs() - 1.0).abs() <= PATTERN_TOL)) {
                return Err(unsupported(domain, "image under a map other than an axis reflection"));
            }
            let flip = |r: &[f64; 2], s: f64| if s > 0.0 { *r } else { [-r[1], -r[0]] };
            DomainSpec::Box3D {
                x1: flip(x1, signs[0]),
                x2: flip(x2, signs[1]),
                delta: *delta,
            }
        }
        _ => return Err(unsupported(domain, "isometric image")),
    };
    image.validate()?;
    Ok(image)
}

/// Volumes of `U` and `gU` by the contour pipeline.
pub fn mu_invariance_test(domain: &DomainSpec, g: &Isometry, n: usize, tol: Tolerance) -> Result<Invariance> {
    domain.check(n)?;
    let image = image_domain(domain, g)?;
    let mu_u = mu_contour(domain, n, tol)?;
    let mu_gu = mu_contour(&image, n, tol)?;
    Ok(Invariance {
        deviation: (mu_u.value - mu_gu.value).norm(),
        image,
        mu_u,
        mu_gu,
    })
}

fn polygon_part(v: Vec<P2>) -> Result<DomainSpec> {
    if v.len() < 3 || polygon::signed_area(&v).abs() < 1e-14 {
        return Err(Error::Domain("split leaves an empty piece".into()));
    }
    let d = DomainSpec::Polygon2D { vertices: v };
    d.validate()?;
    Ok(d)
}

/// Cut a domain into two pieces of the same family.
pub fn split_domain(domain: &DomainSpec, split: &Split) -> Result<(DomainSpec, DomainSpec)> {
    domain.validate()?;
    let bad_split = || Error::InvalidInput(format!("{split:?} does not cut a {}", domain.name()));
    match (domain, *split) {
        (DomainSpec::Sector2D { theta, r_outer, start_angle }, Split::Angle(phi)) => {
            let rel = (phi - start_angle).rem_euclid(std::f64::consts::TAU);
            if !(rel > 0.0 && rel < *theta) {
                return Err(bad_split());
            }
            Ok((
                DomainSpec::Sector2D {
                    theta: rel,
                    r_outer: *r_outer,
                    start_angle: *start_angle,
                },
                DomainSpec::Sector2D {
                    theta: theta - rel,
                    r_outer: *r_outer,
                    start_angle: start_angle + rel,
                },
            ))
        }
        (DomainSpec::Polygon2D { vertices }, Split::Line { normal, offset }) => {
            let v = polygon::ccw(vertices);
            let a = polygon::clip_half_plane(&v, normal, offset);
            let b = polygon::clip_half_plane(&v, [-normal[0], -normal[1]], -offset);
            Ok((polygon_part(a)?, polygon_part(b)?))
        }
        (DomainSpec::Box3D { x1, x2, delta }, Split::Plane { axis, value }) => {
            let range = if axis == 0 { x1 } else if axis == 1 { x2 } else { return Err(bad_split()) };
            if !(value > range[0] && value < range[1]) {
                return Err(bad_split());
            }
            let piece = |r: [f64; 2]| {
                if axis == 0 {
                    DomainSpec::Box3D { x1: r, x2: *x2, delta: *delta }
                } else {
                    DomainSpec::Box3D { x1: *x1, x2: r, delta: *delta }
                }
            };
            Ok((piece([range[0], value]), piece([value, range[1]])))
        }
        (DomainSpec::Wedge3D { a, b, c, d, delta }, Split::Plane { axis: 0, value }) => {
            if !(value > *a && value < *b) {
                return Err(bad_split());
            }
            let piece = |lo: f64, hi: f64| DomainSpec::Wedge3D {
                a: lo,
                b: hi,
                c: c.clone(),
                d: d.clone(),
                delta: *delta,
            };
            Ok((piece(*a, value), piece(value, *b)))
        }
        _ => Err(bad_split()),
    }
}

/// `|mu(U) - mu(U_1) - mu(U_2)|` with all three by the contour pipeline.
pub fn additivity_test(domain: &DomainSpec, split: &Split, n: usize, tol: Tolerance) -> Result<Additivity> {
    domain.check(n)?;
    let parts = split_domain(domain, split)?;
    let whole = mu_contour(domain, n, tol)?;
    let first = mu_contour(&parts.0, n, tol)?;
    let second = mu_contour(&parts.1, n, tol)?;
    Ok(Additivity {
        deviation: (whole.value - first.value - second.value).norm(),
        parts,
        whole,
        first,
        second,
    })
}
