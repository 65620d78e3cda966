//! Models of the extended hyperbolic space and the maps between them.
//!
//! Three coordinate charts are used:
//! - `Ambient`: Minkowski space R^{n,1} with `<x,y> = -x0 y0 + x1 y1 + ... + xn yn`.
//! - `Klein`: the affine chart {1} x R^n; the unit ball is H^n, its exterior L^n.
//! - `Flattened`: the image of the Klein chart under the Cayley reflection
//!   through the sphere of radius sqrt(2) about e_n. The ideal boundary becomes
//!   the hyperplane x_n = 0, with H^n below and L^n above.

use crate::{check_dim, Error, Result};

/// Radius of the exclusion ball around e_n for the Cayley reflection.
pub const CAYLEY_EXCLUSION: f64 = 1e-9;

/// Entrywise tolerance for the Lorentz constraint `A^T J A = J`.
pub const LORENTZ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Ambient,
    Klein,
    Flattened,
}

/// Which side of the ideal boundary a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Hyperbolic,
    Lorentz,
    LightCone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    coords: Vec<f64>,
    model: Model,
    dim: usize,
}

impl ModelPoint {
    pub fn new(model: Model, dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = match model {
            Model::Ambient => dim + 1,
            Model::Klein | Model::Flattened => dim,
        };
        if coords.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self { coords, model, dim })
    }

    pub fn klein(coords: &[f64]) -> Result<Self> {
        Self::new(Model::Klein, coords.len(), coords.to_vec())
    }

    pub fn flattened(coords: &[f64]) -> Result<Self> {
        Self::new(Model::Flattened, coords.len(), coords.to_vec())
    }

    pub fn ambient(coords: &[f64]) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidInput("empty ambient point".into()));
        }
        Self::new(Model::Ambient, coords.len() - 1, coords.to_vec())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side of the ideal boundary, with `tol` as the light-cone band.
    pub fn side(&self, tol: f64) -> Side {
        let s = match self.model {
            Model::Klein => norm_sq(&self.coords) - 1.0,
            Model::Flattened => self.coords[self.dim - 1],
            Model::Ambient => {
                let q = minkowski_form(&self.coords, &self.coords);
                if self.coords[0] == 0.0 {
                    // ideal points of the affine chart are spacelike directions
                    return Side::Lorentz;
                }
                q / (self.coords[0] * self.coords[0])
            }
        };
        if s.abs() <= tol {
            Side::LightCone
        } else if s < 0.0 {
            Side::Hyperbolic
        } else {
            Side::Lorentz
        }
    }
}

pub(crate) fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn minkowski_form(x: &[f64], y: &[f64]) -> f64 {
    -x[0] * y[0] + x[1..].iter().zip(&y[1..]).map(|(a, b)| a * b).sum::<f64>()
}

/// Minkowski inner product of two ambient points.
pub fn minkowski_inner(x: &ModelPoint, y: &ModelPoint) -> Result<f64> {
    for p in [x, y] {
        if p.model != Model::Ambient {
            return Err(Error::InvalidInput(format!(
                "minkowski_inner needs ambient points, got {:?}",
                p.model
            )));
        }
    }
    if x.coords.len() != y.coords.len() {
        return Err(Error::DimensionMismatch {
            expected: x.coords.len(),
            got: y.coords.len(),
        });
    }
    Ok(minkowski_form(&x.coords, &y.coords))
}

/// `|x - e_n|^2` for a point given by raw coordinates.
pub fn alpha(x: &[f64]) -> f64 {
    let n = x.len();
    x[..n - 1].iter().map(|v| v * v).sum::<f64>() + (x[n - 1] - 1.0).powi(2)
}

/// Cayley reflection on raw coordinates. The map is an involution.
pub fn cayley_coords(x: &[f64]) -> Result<Vec<f64>> {
    let a = alpha(x);
    if a.sqrt() < CAYLEY_EXCLUSION {
        return Err(Error::Singular {
            point: x.to_vec(),
            what: "Cayley reflection center e_n",
        });
    }
    let n = x.len();
    let mut y: Vec<f64> = x.iter().map(|v| 2.0 * v / a).collect();
    y[n - 1] = 2.0 * (x[n - 1] - 1.0) / a + 1.0;
    Ok(y)
}

/// Absolute Jacobian determinant of the Cayley reflection at `x`: `(2/alpha)^n`.
pub fn cayley_jacobian_abs(x: &[f64]) -> f64 {
    (2.0 / alpha(x)).powi(x.len() as i32)
}

/// The Cayley reflection between the Klein and flattened charts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyMap {
    dim: usize,
}

impl CayleyMap {
    pub const RADIUS_SQ: f64 = 2.0;

    pub fn new(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[self.dim - 1] = 1.0;
        e
    }

    pub fn apply(&self, p: &ModelPoint) -> Result<ModelPoint> {
        if p.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim,
            });
        }
        cayley(p)
    }
}

/// Send a Klein point to the flattened chart or back.
pub fn cayley(p: &ModelPoint) -> Result<ModelPoint> {
    let model = match p.model {
        Model::Klein => Model::Flattened,
        Model::Flattened => Model::Klein,
        Model::Ambient => {
            return Err(Error::InvalidInput(
                "the Cayley reflection acts on Klein or flattened points".into(),
            ))
        }
    };
    Ok(ModelPoint {
        coords: cayley_coords(&p.coords)?,
        model,
        dim: p.dim,
    })
}

/// `(r - 1)/(r + 1)`: where the ray `theta_1 = pi` of radius `r` lands on the
/// x_n axis of the flattened chart.
pub fn axis_coordinate_map(r: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(format!("axis map needs r > 0, got {r}")));
    }
    Ok((r - 1.0) / (r + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsometryKind {
    /// A matrix preserving the Minkowski form, acting projectively.
    LorentzMatrix,
    /// Reflection of the flattened chart through a hyperplane containing the
    /// x_n axis; stored by its (n+1)x(n+1) block-diagonal matrix.
    FlattenedReflection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    matrix: Vec<Vec<f64>>,
    kind: IsometryKind,
}

impl Isometry {
    pub fn from_matrix(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n1 = matrix.len();
        if n1 < 3 || matrix.iter().any(|r| r.len() != n1) {
            return Err(Error::InvalidInput("isometry matrix must be square".into()));
        }
        check_dim(n1 - 1)?;
        let g = Self {
            matrix,
            kind: IsometryKind::LorentzMatrix,
        };
        let dev = g.lorentz_defect();
        if dev > LORENTZ_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix violates A^T J A = J by {dev:e}"
            )));
        }
        Ok(g)
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            matrix: identity(n + 1),
            kind: IsometryKind::LorentzMatrix,
        })
    }

    /// Boost mixing x_0 with the spatial coordinate `axis` (1-based, 1..=n).
    pub fn boost(n: usize, axis: usize, t: f64) -> Result<Self> {
        check_dim(n)?;
        check_axis(n, axis)?;
        let mut m = identity(n + 1);
        m[0][0] = t.cosh();
        m[axis][axis] = t.cosh();
        m[0][axis] = t.sinh();
        m[axis][0] = t.sinh();
        Ok(Self {
            matrix: m,
            kind: IsometryKind::LorentzMatrix,
        })
    }

    /// Rotation by `angle` in the spatial plane of axes `i`, `j` (1-based).
    pub fn rotation(n: usize, i: usize, j: usize, angle: f64) -> Result<Self> {
        check_dim(n)?;
        check_axis(n, i)?;
        check_axis(n, j)?;
        if i == j {
            return Err(Error::InvalidInput("rotation needs two distinct axes".into()));
        }
        let (s, c) = angle.sin_cos();
        let mut m = identity(n + 1);
        m[i][i] = c;
        m[j][j] = c;
        m[i][j] = -s;
        m[j][i] = s;
        Ok(Self {
            matrix: m,
            kind: IsometryKind::LorentzMatrix,
        })
    }

    /// Spatial reflection `x_axis -> -x_axis` as a Lorentz matrix.
    pub fn reflection(n: usize, axis: usize) -> Result<Self> {
        check_dim(n)?;
        check_axis(n, axis)?;
        let mut m = identity(n + 1);
        m[axis][axis] = -1.0;
        Ok(Self {
            matrix: m,
            kind: IsometryKind::LorentzMatrix,
        })
    }

    /// Reflection of the flattened chart in the coordinate hyperplane
    /// `x_axis = 0`, which contains e_n whenever `axis < n`.
    pub fn flattened_reflection(n: usize, axis: usize) -> Result<Self> {
        check_dim(n)?;
        check_axis(n, axis)?;
        if axis == n {
            return Err(Error::InvalidInput(
                "flattened reflections must fix a hyperplane through e_n".into(),
            ));
        }
        let mut m = identity(n + 1);
        m[axis][axis] = -1.0;
        Ok(Self {
            matrix: m,
            kind: IsometryKind::FlattenedReflection,
        })
    }

    pub fn kind(&self) -> IsometryKind {
        self.kind
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.len() - 1
    }

    /// `self` after `other`. The result is a plain Lorentz matrix.
    pub fn compose(&self, other: &Isometry) -> Result<Isometry> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let n1 = self.matrix.len();
        let mut m = vec![vec![0.0; n1]; n1];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..n1).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        Ok(Isometry {
            matrix: m,
            kind: IsometryKind::LorentzMatrix,
        })
    }

    /// Largest entry of `|A^T J A - J|`.
    pub fn lorentz_defect(&self) -> f64 {
        let n1 = self.matrix.len();
        let j = |k: usize| if k == 0 { -1.0 } else { 1.0 };
        let mut worst: f64 = 0.0;
        for a in 0..n1 {
            for b in 0..n1 {
                let v: f64 = (0..n1)
                    .map(|k| self.matrix[k][a] * j(k) * self.matrix[k][b])
                    .sum();
                let target = if a == b { j(a) } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    fn mul(&self, v: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Projective action on Klein coordinates.
    pub(crate) fn act_klein(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut lifted = Vec::with_capacity(x.len() + 1);
        lifted.push(1.0);
        lifted.extend_from_slice(x);
        let img = self.mul(&lifted);
        let scale = img.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if img[0].abs() <= 1e-14 * scale.max(1.0) {
            return Err(Error::Domain(format!(
                "image of {x:?} lies at projective infinity"
            )));
        }
        Ok(img[1..].iter().map(|v| v / img[0]).collect())
    }

    /// Homogeneous first coordinate of the lifted image, used to check that a
    /// polygon does not straddle the line sent to infinity.
    pub(crate) fn lifted_weight(&self, x: &[f64]) -> f64 {
        self.matrix[0][0] + x.iter().zip(&self.matrix[0][1..]).map(|(a, b)| a * b).sum::<f64>()
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn check_axis(n: usize, axis: usize) -> Result<()> {
    if axis == 0 || axis > n {
        return Err(Error::InvalidInput(format!(
            "spatial axis must be in 1..={n}, got {axis}"
        )));
    }
    Ok(())
}

/// Apply an isometry to a point, returning the image in the same chart.
pub fn apply_isometry(g: &Isometry, p: &ModelPoint) -> Result<ModelPoint> {
    if g.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: p.dim,
        });
    }
    let coords = match (g.kind, p.model) {
        (IsometryKind::FlattenedReflection, Model::Ambient) => {
            return Err(Error::InvalidInput(
                "flattened reflections do not act on ambient points".into(),
            ))
        }
        // the reflection hyperplane contains the axis of the Cayley map, so it
        // acts by the same linear map in both affine charts
        (IsometryKind::FlattenedReflection, _) => g.mul(&{
            let mut v = vec![1.0];
            v.extend_from_slice(&p.coords);
            v
        })[1..]
            .to_vec(),
        (IsometryKind::LorentzMatrix, Model::Ambient) => g.mul(&p.coords),
        (IsometryKind::LorentzMatrix, Model::Klein) => g.act_klein(&p.coords)?,
        (IsometryKind::LorentzMatrix, Model::Flattened) => {
            let k = cayley_coords(&p.coords)?;
            cayley_coords(&g.act_klein(&k)?)?
        }
    };
    Ok(ModelPoint {
        coords,
        model: p.model,
        dim: p.dim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn minkowski_examples() {
        let e0 = ModelPoint::ambient(&[1.0, 0.0, 0.0]).unwrap();
        let e1 = ModelPoint::ambient(&[0.0, 1.0, 0.0]).unwrap();
        let null = ModelPoint::ambient(&[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(minkowski_inner(&e0, &e0).unwrap(), -1.0);
        assert_eq!(minkowski_inner(&e1, &e1).unwrap(), 1.0);
        assert_eq!(minkowski_inner(&null, &null).unwrap(), 0.0);
        let big = ModelPoint::ambient(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            minkowski_inner(&e0, &big),
            Err(Error::DimensionMismatch { .. })
        ));
        let k = ModelPoint::klein(&[0.1, 0.2]).unwrap();
        assert!(minkowski_inner(&k, &k).is_err());
    }

    #[test]
    fn cayley_examples() {
        let o = cayley(&ModelPoint::klein(&[0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(o.model(), Model::Flattened);
        assert!(close(o.coords(), &[0.0, -1.0], 1e-15));
        let f = cayley(&ModelPoint::klein(&[1.0, 0.0]).unwrap()).unwrap();
        assert!(close(f.coords(), &[1.0, 0.0], 1e-15));
        let p = ModelPoint::klein(&[0.3, 0.4]).unwrap();
        let back = cayley(&cayley(&p).unwrap()).unwrap();
        assert!(close(back.coords(), p.coords(), 1e-12));
        assert_eq!(back.model(), Model::Klein);
    }

    #[test]
    fn cayley_rejects_center() {
        let e = ModelPoint::flattened(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(cayley(&e), Err(Error::Singular { .. })));
        let near = ModelPoint::klein(&[0.0, 1.0 + 5e-10]).unwrap();
        assert!(cayley(&near).is_err());
    }

    #[test]
    fn axis_map() {
        assert_eq!(axis_coordinate_map(1.0).unwrap(), 0.0);
        assert_eq!(axis_coordinate_map(3.0).unwrap(), 0.5);
        assert!(axis_coordinate_map(0.0).is_err());
        assert!(axis_coordinate_map(-2.0).is_err());
        let vals: Vec<f64> = (1..=50)
            .map(|k| axis_coordinate_map(0.1 * k as f64).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn isometry_examples() {
        let p = ModelPoint::klein(&[0.5, 0.2]).unwrap();
        let id = Isometry::identity(2).unwrap();
        assert_eq!(apply_isometry(&id, &p).unwrap(), p);

        let boost = Isometry::boost(2, 1, 1.0).unwrap();
        let o = ModelPoint::klein(&[0.0, 0.0]).unwrap();
        let img = apply_isometry(&boost, &o).unwrap();
        assert!(close(img.coords(), &[1.0_f64.tanh(), 0.0], 1e-15));
        assert_eq!(img.side(0.0), Side::Hyperbolic);

        let g0 = Isometry::flattened_reflection(3, 1).unwrap();
        let q = ModelPoint::flattened(&[0.1, 0.2, 0.3]).unwrap();
        let r = apply_isometry(&g0, &q).unwrap();
        assert!(close(r.coords(), &[-0.1, 0.2, 0.3], 0.0));
        let amb = ModelPoint::ambient(&[1.0, 0.1, 0.2, 0.3]).unwrap();
        assert!(apply_isometry(&g0, &amb).is_err());
        assert!(Isometry::flattened_reflection(3, 3).is_err());
    }

    #[test]
    fn projective_infinity_is_an_error() {
        // cosh t + sinh t * x1 = 0 at x1 = -coth t
        let t: f64 = 0.5;
        let g = Isometry::boost(2, 1, t).unwrap();
        let p = ModelPoint::klein(&[-1.0 / t.tanh(), 0.3]).unwrap();
        assert!(matches!(apply_isometry(&g, &p), Err(Error::Domain(_))));
    }

    #[test]
    fn from_matrix_checks_lorentz() {
        let bad = vec![
            vec![1.0, 0.5, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert!(Isometry::from_matrix(bad).is_err());
        let b = Isometry::boost(2, 2, 0.3).unwrap();
        assert!(Isometry::from_matrix(b.matrix().to_vec()).is_ok());
    }

    #[test]
    fn classification_commutes_with_cayley() {
        for &(x, y) in &[(0.2, 0.3), (0.0, -0.9), (1.5, 0.2), (-0.3, 2.0), (0.1, -3.0)] {
            let k = ModelPoint::klein(&[x, y]).unwrap();
            let f = cayley(&k).unwrap();
            assert_eq!(k.side(1e-12), f.side(1e-12), "({x}, {y})");
        }
    }
}
