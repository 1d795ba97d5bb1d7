//! The hyperbolic plane in the hyperboloid model.
//!
//! Points live on the upper sheet `t² − x² − y² = 1` of Minkowski space with
//! the form `⟨u, v⟩ = −u_t v_t + u_x v_x + u_y v_y`. Isometries are the
//! matrices of `SO⁺(2,1)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the sheet equation accepted by [`HPoint::new`].
pub const SHEET_TOL: f64 = 1e-12;
/// Entrywise tolerance for `MᵀJM = J`.
pub const ISOMETRY_TOL: f64 = 1e-9;

const DIRECTION_EPS: f64 = 1e-14;

/// Minkowski bilinear form of signature (−, +, +).
#[inline]
pub fn minkowski(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    -u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// Norm of a spacelike (tangent) vector; negative squares clamp to zero.
#[inline]
pub fn tangent_norm(v: &Vector3<f64>) -> f64 {
    minkowski(v, v).max(0.0).sqrt()
}

fn j_matrix() -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
}

/// A point of H².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct HPoint(Vector3<f64>);

impl HPoint {
    pub const ORIGIN: HPoint = HPoint(Vector3::new(1.0, 0.0, 0.0));

    /// Validating constructor; the coordinates must already lie on the sheet.
    pub fn new(t: f64, x: f64, y: f64) -> Result<Self> {
        let v = Vector3::new(t, x, y);
        if !(t > 0.0) || !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidInput(format!("({t}, {x}, {y}) is not on the upper sheet")));
        }
        let residual = (t * t - x * x - y * y - 1.0).abs();
        if residual > SHEET_TOL * (1.0 + t * t) {
            return Err(Error::InvalidInput(format!(
                "({t}, {x}, {y}) violates the sheet equation by {residual:e}"
            )));
        }
        Ok(Self::project(v))
    }

    /// Lift spatial coordinates to the sheet.
    pub fn from_spatial(x: f64, y: f64) -> Self {
        HPoint(Vector3::new((1.0 + x * x + y * y).sqrt(), x, y))
    }

    /// Point at distance `r` from the origin in direction `theta`.
    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::from_spatial(r.sinh() * theta.cos(), r.sinh() * theta.sin())
    }

    /// Renormalize an approximate point onto the sheet.
    pub(crate) fn project(v: Vector3<f64>) -> Self {
        Self::from_spatial(v[1], v[2])
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn t(&self) -> f64 {
        self.0[0]
    }
    pub fn x(&self) -> f64 {
        self.0[1]
    }
    pub fn y(&self) -> f64 {
        self.0[2]
    }

    /// Logarithm map: the tangent vector at `self` pointing to `q` with norm `d(self, q)`.
    pub fn log(&self, q: &HPoint) -> Vector3<f64> {
        let diff = q.0 - self.0;
        let sq = minkowski(&diff, &diff).max(0.0);
        // component of q − p orthogonal to p
        let u = diff - self.0 * (sq / 2.0);
        let sinh_d = tangent_norm(&u);
        if sinh_d == 0.0 {
            return Vector3::zeros();
        }
        let d = 2.0 * (sq.sqrt() / 2.0).asinh();
        u * (d / sinh_d)
    }

    /// Exponential map from `self` along the tangent vector `v`.
    pub fn exp(&self, v: &Vector3<f64>) -> HPoint {
        let n = tangent_norm(v);
        if n == 0.0 {
            return *self;
        }
        HPoint::project(self.0 * n.cosh() + v * (n.sinh() / n))
    }
}

impl TryFrom<[f64; 3]> for HPoint {
    type Error = Error;
    fn try_from(c: [f64; 3]) -> Result<Self> {
        HPoint::new(c[0], c[1], c[2])
    }
}

impl From<HPoint> for [f64; 3] {
    fn from(p: HPoint) -> Self {
        [p.0[0], p.0[1], p.0[2]]
    }
}

/// Hyperbolic distance, computed from the Minkowski norm of `p − q` so that
/// small distances keep full relative precision.
pub fn h_distance(p: &HPoint, q: &HPoint) -> f64 {
    let diff = p.0 - q.0;
    let sq = minkowski(&diff, &diff).max(0.0);
    2.0 * (sq.sqrt() / 2.0).asinh()
}

/// Point at arclength `t · d(p, q)` from `p` on the geodesic `[p, q]`.
pub fn h_geodesic_point(p: &HPoint, q: &HPoint, t: f64) -> HPoint {
    if t == 0.0 {
        return *p;
    }
    if t == 1.0 {
        return *q;
    }
    p.exp(&(p.log(q) * t))
}

/// Unsigned angle between two tangent vectors of the same point.
pub fn tangent_angle(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let na = tangent_norm(a);
    let nb = tangent_norm(b);
    let dot = minkowski(a, b);
    let cross = (na * na * nb * nb - dot * dot).max(0.0).sqrt();
    cross.atan2(dot)
}

/// Angle at `apex` between the geodesics towards `u` and `v`.
pub fn h_angle(apex: &HPoint, u: &HPoint, v: &HPoint) -> Result<f64> {
    let a = apex.log(u);
    let b = apex.log(v);
    if tangent_norm(&a) < DIRECTION_EPS || tangent_norm(&b) < DIRECTION_EPS {
        return Err(Error::UndefinedDirection);
    }
    Ok(tangent_angle(&a, &b))
}

/// Orientation-preserving isometry of H² as a matrix of `SO⁺(2,1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HIsometry(Matrix3<f64>);

impl HIsometry {
    pub fn identity() -> Self {
        HIsometry(Matrix3::identity())
    }

    /// Validating constructor.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        let iso = HIsometry(m);
        let defect = iso.form_defect();
        if defect > ISOMETRY_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix does not preserve the Minkowski form (defect {defect:e})"
            )));
        }
        if !(m[(0, 0)] > 0.0) {
            return Err(Error::InvalidInput("matrix swaps the sheets of the hyperboloid".into()));
        }
        Ok(iso)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Largest entry of `MᵀJM − J`.
    pub fn form_defect(&self) -> f64 {
        let j = j_matrix();
        (self.0.transpose() * j * self.0 - j).abs().max()
    }

    /// Translation of length `d` along the geodesic through the origin with direction `theta`.
    pub fn translation(d: f64, theta: f64) -> Self {
        let r = Self::rotation(theta);
        let tx = HIsometry(Matrix3::new(
            d.cosh(),
            d.sinh(),
            0.0,
            d.sinh(),
            d.cosh(),
            0.0,
            0.0,
            0.0,
            1.0,
        ));
        r.compose(&tx).compose(&r.inverse())
    }

    /// Rotation by `theta` about the origin.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        HIsometry(Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c))
    }

    /// Rotation by `theta` about `center`.
    pub fn rotation_about(center: &HPoint, theta: f64) -> Self {
        let to_center = Self::origin_to(center);
        to_center.compose(&Self::rotation(theta)).compose(&to_center.inverse())
    }

    /// The transvection moving the origin to `p` along the connecting geodesic.
    pub fn origin_to(p: &HPoint) -> Self {
        let d = h_distance(&HPoint::ORIGIN, p);
        Self::translation(d, p.y().atan2(p.x()))
    }

    /// Unique orientation-preserving isometry sending `p ↦ p2` and the
    /// direction of `q` at `p` to the direction of `q2` at `p2`.
    pub fn from_frames(p: &HPoint, q: &HPoint, p2: &HPoint, q2: &HPoint) -> Result<Self> {
        let src = frame(p, q)?;
        let dst = frame(p2, q2)?;
        let j = j_matrix();
        // src is J-orthonormal: src⁻¹ = J srcᵀ J
        let inv = j * src.transpose() * j;
        Ok(HIsometry(dst * inv))
    }

    pub fn apply(&self, p: &HPoint) -> HPoint {
        HPoint::project(self.0 * p.0)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &HIsometry) -> HIsometry {
        HIsometry(self.0 * other.0)
    }

    pub fn inverse(&self) -> HIsometry {
        let j = j_matrix();
        HIsometry(j * self.0.transpose() * j)
    }

    /// Entrywise distance to the identity matrix.
    pub fn distance_to_identity(&self) -> f64 {
        (self.0 - Matrix3::identity()).abs().max()
    }

    /// Translation length `inf_x d(x, Mx)`; zero for elliptic and parabolic elements.
    pub fn translation_length(&self) -> f64 {
        // trace of the adjoint representation equals 1 + 2 cosh(L)
        let tr = self.0.trace();
        if tr <= 3.0 {
            0.0
        } else {
            ((tr - 1.0) / 2.0).acosh()
        }
    }
}

/// J-orthonormal frame `[p | u | n]` with `u` the unit tangent towards `q`.
fn frame(p: &HPoint, q: &HPoint) -> Result<Matrix3<f64>> {
    let u = p.log(q);
    let nu = tangent_norm(&u);
    if nu < DIRECTION_EPS {
        return Err(Error::UndefinedDirection);
    }
    let u = u / nu;
    let j = j_matrix();
    let mut n = j * p.0.cross(&u);
    n /= tangent_norm(&n);
    let m = Matrix3::from_columns(&[p.0, u, n]);
    if m.determinant() < 0.0 {
        Ok(Matrix3::from_columns(&[p.0, u, -n]))
    } else {
        Ok(m)
    }
}

/// Side of the oriented geodesic line through `a` and `b` on which `p` lies
/// (positive to the left for the orientation used by comparison embeddings).
pub fn line_side(a: &HPoint, b: &HPoint, p: &HPoint) -> f64 {
    Matrix3::from_columns(&[a.0, b.0, p.0]).determinant()
}

/// Whether the geodesic segments `[p, q]` and `[a, b]` meet.
pub fn segments_cross(p: &HPoint, q: &HPoint, a: &HPoint, b: &HPoint) -> bool {
    let s1 = line_side(a, b, p);
    let s2 = line_side(a, b, q);
    let s3 = line_side(p, q, a);
    let s4 = line_side(p, q, b);
    s1 * s2 <= 0.0 && s3 * s4 <= 0.0
}
