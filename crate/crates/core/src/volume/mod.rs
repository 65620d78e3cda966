//! Domain families and the volume pipelines.
//!
//! Klein-chart families (sector, polygon, ball) are reduced to polar form, so
//! the singular set is the circle or sphere `r = 1`. Flattened-chart families
//! sit near the hyperplane `x_n = 0`, which is where the ideal boundary goes
//! under the Cayley reflection.

mod divergence;
mod pipelines;
pub(crate) mod polygon;
mod slices;
mod transforms;

pub use divergence::{
    default_cutoffs, divergence_profile, truncated_integral, DivergenceFamily, DivergenceProfile, GrowthModel,
};
pub use pipelines::{mu_contour, mu_direct, mu_eps, mu_eps_traced};
pub use slices::{angular_measure, slice_integral, transverse_strip};
pub use transforms::{additivity_test, image_domain, mu_invariance_test, split_domain, Additivity, Invariance, Split};

use crate::geometry::Model;
use crate::{Error, Result};
use polygon::P2;

/// Distance to the unit sphere below which a boundary counts as tangent.
pub const TRANSVERSALITY_TOL: f64 = 1e-9;

/// Largest polynomial degree allowed for the wedge profile functions.
pub const MAX_WEDGE_DEGREE: usize = 4;

/// The profile `g(x_3)` bounding a three-dimensional Hölder graph domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HolderProfile {
    /// `C x_3^{1 + alpha}`.
    Power { alpha: f64 },
    /// `-C x_3 / ln x_3`, which is C^1 but no better.
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// Klein sector `0 <= r <= r_outer`, `start <= theta <= start + theta`.
    Sector2D { theta: f64, r_outer: f64, start_angle: f64 },
    /// Klein polygon, vertices in either orientation.
    Polygon2D { vertices: Vec<P2> },
    /// Flattened `0 <= x_2 <= delta`, `0 <= x_1 <= C x_2^beta`.
    HolderGraph2D { beta: f64, coeff: f64, delta: f64 },
    /// Flattened `x1 x x2 x [-delta, delta]`.
    Box3D { x1: [f64; 2], x2: [f64; 2], delta: f64 },
    /// Flattened `a <= x_1 <= b`, `|x_3| <= delta`, `x_2` from `c(x_1)` to
    /// `c(x_1) + d(x_1) x_3` (oriented). `c` and `d` are coefficient lists,
    /// lowest degree first.
    Wedge3D { a: f64, b: f64, c: Vec<f64>, d: Vec<f64>, delta: f64 },
    /// Flattened cone `0 <= x_3 <= delta`, `x_3 >= k |(x_1, x_2)|`.
    Cone3D { k: f64, delta: f64 },
    /// Flattened `a <= x_1 <= b`, `0 <= x_3 <= delta`, `0 <= x_2 <= g(x_3)`.
    HolderGraph3D { profile: HolderProfile, coeff: f64, a: f64, b: f64, delta: f64 },
    /// Klein ball.
    Ball3D { center: [f64; 3], radius: f64 },
}

fn bad(msg: String) -> Error {
    Error::InvalidInput(msg)
}

fn finite(vals: &[f64]) -> bool {
    vals.iter().all(|v| v.is_finite())
}

fn check_height(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(bad(format!("height delta must lie in (0, 1), got {delta}")))
    }
}

fn not_tangent(r: f64, what: &str) -> Result<()> {
    if (r - 1.0).abs() < TRANSVERSALITY_TOL {
        Err(Error::Domain(format!("{what} at radius {r} touches the unit sphere")))
    } else {
        Ok(())
    }
}

impl DomainSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Sector2D { .. } => "sector2d",
            DomainSpec::Polygon2D { .. } => "polygon2d",
            DomainSpec::HolderGraph2D { .. } => "holder2d",
            DomainSpec::Box3D { .. } => "box3d",
            DomainSpec::Wedge3D { .. } => "wedge3d",
            DomainSpec::Cone3D { .. } => "cone3d",
            DomainSpec::HolderGraph3D { .. } => "holder3d",
            DomainSpec::Ball3D { .. } => "ball3d",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::HolderGraph2D { .. } => 2,
            _ => 3,
        }
    }

    /// Chart in which the domain is described.
    pub fn model(&self) -> Model {
        match self {
            DomainSpec::Sector2D { .. } | DomainSpec::Polygon2D { .. } | DomainSpec::Ball3D { .. } => Model::Klein,
            _ => Model::Flattened,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Sector2D { theta, r_outer, start_angle } => {
                if !finite(&[*theta, *r_outer, *start_angle]) {
                    return Err(bad("sector parameters must be finite".into()));
                }
                if !(*theta > 0.0 && *theta <= std::f64::consts::TAU + 1e-12) {
                    return Err(bad(format!("sector angle must lie in (0, 2pi], got {theta}")));
                }
                if !(*r_outer > 0.0) {
                    return Err(bad(format!("sector radius must be > 0, got {r_outer}")));
                }
                not_tangent(*r_outer, "sector arc")
            }
            DomainSpec::Polygon2D { vertices } => {
                if vertices.len() < 3 {
                    return Err(bad("a polygon needs at least three vertices".into()));
                }
                if !vertices.iter().all(|v| finite(v)) {
                    return Err(bad("polygon vertices must be finite".into()));
                }
                if polygon::signed_area(vertices).abs() < 1e-14 {
                    return Err(bad("polygon has zero area".into()));
                }
                if !polygon::is_simple(vertices) {
                    return Err(bad("polygon edges cross".into()));
                }
                for v in vertices {
                    not_tangent(polygon::dot(*v, *v).sqrt(), "polygon vertex")?;
                }
                for (a, b) in polygon::edges(vertices) {
                    let (p, inside) = polygon::foot(a, b);
                    if inside {
                        not_tangent(p, "polygon edge")?;
                    }
                }
                Ok(())
            }
            DomainSpec::HolderGraph2D { beta, coeff, delta } => {
                if !(finite(&[*beta, *coeff]) && *beta > 0.0 && *coeff > 0.0) {
                    return Err(bad(format!("need beta > 0 and C > 0, got {beta}, {coeff}")));
                }
                check_height(*delta)
            }
            DomainSpec::Box3D { x1, x2, delta } => {
                if !(finite(x1) && finite(x2) && x1[0] < x1[1] && x2[0] < x2[1]) {
                    return Err(bad(format!("box needs ordered finite ranges, got {x1:?} x {x2:?}")));
                }
                check_height(*delta)
            }
            DomainSpec::Wedge3D { a, b, c, d, delta } => {
                if !(finite(&[*a, *b]) && a < b) {
                    return Err(bad(format!("wedge needs a < b, got [{a}, {b}]")));
                }
                for (name, p) in [("c", c), ("d", d)] {
                    if p.is_empty() || p.len() > MAX_WEDGE_DEGREE + 1 || !finite(p) {
                        return Err(bad(format!(
                            "wedge {name} must have 1..={} finite coefficients",
                            MAX_WEDGE_DEGREE + 1
                        )));
                    }
                }
                check_height(*delta)
            }
            DomainSpec::Cone3D { k, delta } => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(bad(format!("cone slope must be > 0, got {k}")));
                }
                check_height(*delta)
            }
            DomainSpec::HolderGraph3D { profile, coeff, a, b, delta } => {
                if let HolderProfile::Power { alpha } = profile {
                    if !(alpha.is_finite() && *alpha >= 0.0) {
                        return Err(bad(format!("need alpha >= 0, got {alpha}")));
                    }
                }
                if !(finite(&[*coeff, *a, *b]) && *coeff > 0.0 && a < b) {
                    return Err(bad(format!("need C > 0 and a < b, got {coeff}, [{a}, {b}]")));
                }
                check_height(*delta)
            }
            DomainSpec::Ball3D { center, radius } => {
                if !(finite(center) && radius.is_finite() && *radius > 0.0) {
                    return Err(bad(format!("ball needs a finite center and radius > 0, got {radius}")));
                }
                let d = center.iter().map(|v| v * v).sum::<f64>().sqrt();
                not_tangent(d + radius, "ball")?;
                not_tangent((d - radius).abs(), "ball")
            }
        }
    }

    pub(crate) fn check(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: n,
            });
        }
        self.validate()
    }
}

pub(crate) fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let ok = DomainSpec::Sector2D {
            theta: 1.0,
            r_outer: 2.0,
            start_angle: 0.0,
        };
        assert!(ok.validate().is_ok());
        let tangent = DomainSpec::Sector2D {
            theta: 1.0,
            r_outer: 1.0,
            start_angle: 0.0,
        };
        assert!(matches!(tangent.validate(), Err(Error::Domain(_))));
        let tall = DomainSpec::Box3D {
            x1: [0.0, 1.0],
            x2: [0.0, 1.0],
            delta: 1.0,
        };
        assert!(tall.validate().is_err());
        let on_circle = DomainSpec::Polygon2D {
            vertices: vec![[1.0, 0.0], [2.0, 0.0], [2.0, 1.0]],
        };
        assert!(on_circle.validate().is_err());
        let touching_edge = DomainSpec::Polygon2D {
            vertices: vec![[-2.0, 1.0], [2.0, 1.0], [0.0, 3.0]],
        };
        assert!(touching_edge.validate().is_err());
        let high_degree = DomainSpec::Wedge3D {
            a: 0.0,
            b: 1.0,
            c: vec![0.0; 6],
            d: vec![1.0],
            delta: 0.5,
        };
        assert!(high_degree.validate().is_err());
        let tangent_ball = DomainSpec::Ball3D {
            center: [0.0, 0.0, 0.5],
            radius: 0.5,
        };
        assert!(tangent_ball.validate().is_err());
        assert!(ok.check(3).is_err());
    }

    #[test]
    fn horner() {
        assert_eq!(eval_poly(&[1.0, 2.0, 3.0], 2.0), 17.0);
    }
}
