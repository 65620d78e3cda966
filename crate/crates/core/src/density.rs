//! Volume-form densities of the extended hyperbolic space.
//!
//! Branch rule: every fractional power uses the principal branch, and a base
//! lying on the negative real axis is read as the limit from `Im < 0`
//! (argument `-pi`). On the Lorentz side this yields the factor `i^{n+1}` in
//! the Klein chart and `(-i)^{n+1}` for `(-1)^{(n+1)/2}` in the flattened chart,
//! which is the sign produced by the upper-half-plane detour.
//!
//! Orientation signs of Cayley pullbacks are dropped.

use crate::geometry::{alpha, cayley_coords, cayley_jacobian_abs, norm_sq, Model};
use crate::{check_dim, Complex64, Error, Result};

/// Distance to a singular set below which densities refuse to evaluate.
pub const SINGULAR_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityKind {
    KleinExact,
    KleinEps,
    FlattenedExact,
    FlattenedEps,
    MuEps,
}

impl DensityKind {
    pub fn is_regularized(self) -> bool {
        matches!(self, Self::KleinEps | Self::FlattenedEps | Self::MuEps)
    }

    /// Chart in which the density is written.
    pub fn native_model(self) -> Model {
        match self {
            Self::KleinExact | Self::KleinEps => Model::Klein,
            _ => Model::Flattened,
        }
    }

    /// The density this one converges to as eps -> 0.
    pub fn exact_limit(self) -> Self {
        match self {
            Self::KleinExact | Self::KleinEps => Self::KleinExact,
            _ => Self::FlattenedExact,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::KleinExact => "klein-exact",
            Self::KleinEps => "klein-eps",
            Self::FlattenedExact => "flattened-exact",
            Self::FlattenedEps => "flattened-eps",
            Self::MuEps => "mu-eps",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::KleinExact,
            Self::KleinEps,
            Self::FlattenedExact,
            Self::FlattenedEps,
            Self::MuEps,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// A density variant at a fixed dimension and regularization parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityVariant {
    kind: DensityKind,
    eps: f64,
    dim: usize,
}

impl DensityVariant {
    pub fn new(kind: DensityKind, dim: usize, eps: f64) -> Result<Self> {
        check_dim(dim)?;
        if kind.is_regularized() && !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "{} needs eps > 0, got {eps}",
                kind.name()
            )));
        }
        let eps = if kind.is_regularized() { eps } else { 0.0 };
        Ok(Self { kind, eps, dim })
    }

    pub fn exact(kind: DensityKind, dim: usize) -> Result<Self> {
        Self::new(kind.exact_limit(), dim, 0.0)
    }

    pub fn kind(&self) -> DensityKind {
        self.kind
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate at real coordinates `x` given in chart `model`, pulling the
    /// density back through the Cayley reflection when the charts differ.
    pub fn eval_in(&self, model: Model, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let native = self.kind.native_model();
        if model == native {
            return self.eval_native(x);
        }
        if model == Model::Ambient {
            return Err(Error::InvalidInput("densities live on affine charts".into()));
        }
        if native == Model::Klein {
            return self.klein_at_flattened(x);
        }
        let y = cayley_coords(x)?;
        Ok(self.eval_native(&y)? * cayley_jacobian_abs(x))
    }

    /// Klein densities at a flattened point. `1 - |y|^2 = -4 x_n / alpha(x)`
    /// is used directly: forming `|y|^2` from the image point would lose the
    /// digits that resolve the eps-scale peak.
    fn klein_at_flattened(&self, x: &[f64]) -> Result<Complex64> {
        let n = self.dim;
        let a = alpha(x);
        if a < SINGULAR_BAND {
            return Err(Error::Singular {
                point: x.to_vec(),
                what: "Cayley center e_n",
            });
        }
        let gap = -4.0 * x[n - 1] / a;
        let v = match self.kind {
            DensityKind::KleinEps => {
                let d = d_eps(self.eps);
                d * (d * d - 1.0 + gap).powf(-half_power(n))
            }
            _ => {
                if gap.abs() < SINGULAR_BAND {
                    return Err(Error::Singular {
                        point: x.to_vec(),
                        what: "unit sphere of the Klein chart",
                    });
                }
                lower_pow(Complex64::new(gap, 0.0), -half_power(n))
            }
        };
        checked(v * cayley_jacobian_abs(x), x)
    }

    fn eval_native(&self, x: &[f64]) -> Result<Complex64> {
        let n = self.dim;
        match self.kind {
            DensityKind::KleinExact => density_klein_exact(x),
            DensityKind::KleinEps => density_klein_eps(x, self.eps),
            DensityKind::FlattenedExact => {
                density_flattened_exact(&x[..n - 1], Complex64::new(x[n - 1], 0.0))
            }
            DensityKind::FlattenedEps => {
                density_flattened_eps(&x[..n - 1], Complex64::new(x[n - 1], 0.0), self.eps)
            }
            DensityKind::MuEps => {
                density_mu_eps(&x[..n - 1], Complex64::new(x[n - 1], 0.0), self.eps)
            }
        }
    }

    /// Evaluate a flattened-chart variant with complex `x_n`.
    pub fn eval_flattened(&self, transverse: &[f64], xn: Complex64) -> Result<Complex64> {
        if transverse.len() + 1 != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim - 1,
                got: transverse.len(),
            });
        }
        match self.kind {
            DensityKind::FlattenedExact => density_flattened_exact(transverse, xn),
            DensityKind::FlattenedEps => density_flattened_eps(transverse, xn, self.eps),
            DensityKind::MuEps => density_mu_eps(transverse, xn, self.eps),
            k => Err(Error::InvalidInput(format!(
                "{} is not a flattened-chart density",
                k.name()
            ))),
        }
    }
}

/// `w^p` on the principal branch, with the negative real axis read from below.
pub fn lower_pow(w: Complex64, p: f64) -> Complex64 {
    if p.fract() == 0.0 && p.abs() < 64.0 {
        return w.powi(p as i32);
    }
    let arg = if w.im == 0.0 && w.re < 0.0 {
        -std::f64::consts::PI
    } else {
        w.im.atan2(w.re)
    };
    Complex64::from_polar(w.norm().powf(p), arg * p)
}

fn checked(z: Complex64, x: &[f64]) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite {
            re: x.first().copied().unwrap_or(f64::NAN),
            im: z.im,
        })
    }
}

fn half_power(n: usize) -> f64 {
    (n as f64 + 1.0) / 2.0
}

/// `dV_K = dx / (1 - |x|^2)^{(n+1)/2}` at a real Klein point.
pub fn density_klein_exact(x: &[f64]) -> Result<Complex64> {
    check_dim(x.len())?;
    let s = 1.0 - norm_sq(x);
    if s.abs() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: x.to_vec(),
            what: "unit sphere of the Klein chart",
        });
    }
    checked(lower_pow(Complex64::new(s, 0.0), -half_power(x.len())), x)
}

/// Klein-chart exact density as a function of a complex radius `r`.
pub fn klein_exact_radial(r: Complex64, n: usize) -> Result<Complex64> {
    check_dim(n)?;
    let s = Complex64::new(1.0, 0.0) - r * r;
    if s.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: vec![r.re, r.im],
            what: "unit sphere of the Klein chart",
        });
    }
    Ok(lower_pow(s, -half_power(n)))
}

/// `d_eps = 1 - eps i`.
pub fn d_eps(eps: f64) -> Complex64 {
    Complex64::new(1.0, -eps)
}

/// `dV_eps = d_eps dx / (d_eps^2 - |x|^2)^{(n+1)/2}`.
pub fn density_klein_eps(x: &[f64], eps: f64) -> Result<Complex64> {
    check_dim(x.len())?;
    klein_eps_radial(Complex64::new(norm_sq(x).sqrt(), 0.0), x.len(), eps)
}

/// Regularized Klein density as a function of a complex radius.
pub fn klein_eps_radial(r: Complex64, n: usize, eps: f64) -> Result<Complex64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let d = d_eps(eps);
    let base = d * d - r * r;
    assert!(base.norm() > 0.0, "d_eps^2 - r^2 vanished at r = {r}");
    Ok(d * base.powf(-half_power(n)))
}

fn complex_alpha(transverse: &[f64], xn: Complex64) -> Complex64 {
    let rho2: f64 = transverse.iter().map(|v| v * v).sum();
    let t = xn - 1.0;
    t * t + rho2
}

fn alpha_power(a: Complex64, n: usize) -> Complex64 {
    // (n-1)/2 is 1/2 or 1; the principal root is continuous for Re(alpha) > 0
    if n == 3 {
        a
    } else {
        a.powf((n as f64 - 1.0) / 2.0)
    }
}

/// `dV = dx / (2 (-x_n)^{(n+1)/2} alpha^{(n-1)/2})`, the Cayley pullback of the
/// Klein density, at a flattened point with possibly complex `x_n`.
pub fn density_flattened_exact(transverse: &[f64], xn: Complex64) -> Result<Complex64> {
    let n = transverse.len() + 1;
    check_dim(n)?;
    if xn.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: point_of(transverse, xn),
            what: "hyperplane x_n = 0",
        });
    }
    let a = complex_alpha(transverse, xn);
    if a.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: point_of(transverse, xn),
            what: "Cayley center e_n",
        });
    }
    let den = 2.0 * lower_pow(-xn, half_power(n)) * alpha_power(a, n);
    checked(den.inv(), transverse)
}

/// `d~V_eps = (1 - eps i) dx / (2 (c alpha - x_n)^{(n+1)/2} alpha^{(n-1)/2})` with
/// `c = (-eps^2 - 2 eps i)/4`.
pub fn density_flattened_eps(transverse: &[f64], xn: Complex64, eps: f64) -> Result<Complex64> {
    let n = transverse.len() + 1;
    check_dim(n)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let a = complex_alpha(transverse, xn);
    if a.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: point_of(transverse, xn),
            what: "Cayley center e_n",
        });
    }
    let c = Complex64::new(-eps * eps, -2.0 * eps) / 4.0;
    let base = c * a - xn;
    if base.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: point_of(transverse, xn),
            what: "pole of the regularized flattened density",
        });
    }
    let den = 2.0 * lower_pow(base, half_power(n)) * alpha_power(a, n);
    checked(d_eps(eps) / den, transverse)
}

/// `d mu_eps = dx / (2 (-x_n - eps i)^{(n+1)/2} alpha^{(n-1)/2})`.
pub fn density_mu_eps(transverse: &[f64], xn: Complex64, eps: f64) -> Result<Complex64> {
    let n = transverse.len() + 1;
    check_dim(n)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    let a = complex_alpha(transverse, xn);
    if a.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: point_of(transverse, xn),
            what: "Cayley center e_n",
        });
    }
    let base = -xn - Complex64::new(0.0, eps);
    if base.norm() < SINGULAR_BAND {
        return Err(Error::Singular {
            point: point_of(transverse, xn),
            what: "pole of mu_eps",
        });
    }
    let den = 2.0 * lower_pow(base, half_power(n)) * alpha_power(a, n);
    checked(den.inv(), transverse)
}

fn point_of(transverse: &[f64], xn: Complex64) -> Vec<f64> {
    let mut p = transverse.to_vec();
    p.push(xn.re);
    p
}

/// Poles in `x_n` of a regularized flattened density along the line with the
/// given real transverse coordinates.
///
/// `MuEps` has the single pole `-eps i`. `FlattenedEps` has the two roots of
/// `c (rho^2 + (x_n - 1)^2) = x_n`, returned nearest first. Their product is
/// `rho^2 + 1`, so only the near root lies below the real axis; the far root
/// (about `1 + 2i/eps`) is the image of the pole next to e_n.
pub fn poles_in_xn(variant: &DensityVariant, transverse: &[f64]) -> Result<Vec<Complex64>> {
    if transverse.len() + 1 != variant.dim {
        return Err(Error::DimensionMismatch {
            expected: variant.dim - 1,
            got: transverse.len(),
        });
    }
    let eps = variant.eps;
    match variant.kind {
        DensityKind::MuEps => Ok(vec![Complex64::new(0.0, -eps)]),
        DensityKind::FlattenedEps => {
            let c = Complex64::new(-eps * eps, -2.0 * eps) / 4.0;
            let rho2: f64 = transverse.iter().map(|v| v * v).sum();
            // c x^2 - (2c + 1) x + c (rho^2 + 1) = 0
            let qa = c;
            let qb = -(2.0 * c + 1.0);
            let qc = c * (rho2 + 1.0);
            let mut s = (qb * qb - 4.0 * qa * qc).sqrt();
            if (qb.conj() * s).re < 0.0 {
                s = -s;
            }
            let q = -(qb + s) / 2.0;
            let mut roots = vec![q / qa, qc / q];
            roots.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            Ok(roots)
        }
        k => Err(Error::InvalidInput(format!(
            "poles are tabulated for mu-eps and flattened-eps, not {}",
            k.name()
        ))),
    }
}
