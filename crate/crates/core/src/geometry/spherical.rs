//! The unit sphere S².

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ANTIPODAL_EPS: f64 = 1e-14;

/// A point of the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct SPoint(Vector3<f64>);

impl SPoint {
    /// Normalizes `(x, y, z)`; the zero vector maps to the north pole.
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self::from_vector(Vector3::new(x, y, z))
    }

    pub fn from_vector(v: Vector3<f64>) -> Self {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            SPoint(Vector3::z())
        } else {
            SPoint(v / n)
        }
    }

    /// Point with colatitude `theta` and longitude `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        SPoint::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
    }

    pub fn coords(&self) -> &Vector3<f64> {
        &self.0
    }

    pub fn antipode(&self) -> SPoint {
        SPoint(-self.0)
    }

    /// Tangent vector at `self` towards `q` with norm `d(self, q)`.
    pub fn log(&self, q: &SPoint) -> Vector3<f64> {
        let tangent = q.0 - self.0 * self.0.dot(&q.0);
        let n = tangent.norm();
        if n == 0.0 {
            return Vector3::zeros();
        }
        tangent * (s_distance(self, q) / n)
    }

    pub fn exp(&self, v: &Vector3<f64>) -> SPoint {
        let n = v.norm();
        if n == 0.0 {
            return *self;
        }
        SPoint::from_vector(self.0 * n.cos() + v * (n.sin() / n))
    }

    /// Rotate a tangent vector at `self` counterclockwise by `theta`
    /// (as seen from outside the sphere).
    pub fn rotate_tangent(&self, v: &Vector3<f64>, theta: f64) -> Vector3<f64> {
        let (s, c) = theta.sin_cos();
        v * c + self.0.cross(v) * s
    }
}

impl From<[f64; 3]> for SPoint {
    fn from(c: [f64; 3]) -> Self {
        SPoint::new(c[0], c[1], c[2])
    }
}

impl From<SPoint> for [f64; 3] {
    fn from(p: SPoint) -> Self {
        [p.0[0], p.0[1], p.0[2]]
    }
}

/// Great-circle distance.
pub fn s_distance(p: &SPoint, q: &SPoint) -> f64 {
    p.0.cross(&q.0).norm().atan2(p.0.dot(&q.0))
}

/// Point at arclength `t · d(p, q)` from `p`.
pub fn s_geodesic_point(p: &SPoint, q: &SPoint, t: f64) -> Result<SPoint> {
    if p.0.cross(&q.0).norm() < ANTIPODAL_EPS && p.0.dot(&q.0) < 0.0 {
        return Err(Error::NonUniqueGeodesic);
    }
    if t == 0.0 {
        return Ok(*p);
    }
    if t == 1.0 {
        return Ok(*q);
    }
    Ok(p.exp(&(p.log(q) * t)))
}

/// Angle at `apex` between the great-circle arcs towards `u` and `v`.
pub fn s_angle(apex: &SPoint, u: &SPoint, v: &SPoint) -> Result<f64> {
    let a = u.0 - apex.0 * apex.0.dot(&u.0);
    let b = v.0 - apex.0 * apex.0.dot(&v.0);
    if a.norm() < ANTIPODAL_EPS || b.norm() < ANTIPODAL_EPS {
        return Err(Error::UndefinedDirection);
    }
    Ok(a.cross(&b).norm().atan2(a.dot(&b)))
}

/// Counterclockwise angle at `apex` from the direction of `from` to the
/// direction of `to`, in `[0, 2π)`.
pub fn s_oriented_angle(apex: &SPoint, from: &SPoint, to: &SPoint) -> Result<f64> {
    let a = from.0 - apex.0 * apex.0.dot(&from.0);
    let b = to.0 - apex.0 * apex.0.dot(&to.0);
    if a.norm() < ANTIPODAL_EPS || b.norm() < ANTIPODAL_EPS {
        return Err(Error::UndefinedDirection);
    }
    let ang = apex.0.dot(&a.cross(&b)).atan2(a.dot(&b));
    Ok(if ang < 0.0 { ang + std::f64::consts::TAU } else { ang })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn distances() {
        let e1 = SPoint::new(1.0, 0.0, 0.0);
        let e2 = SPoint::new(0.0, 1.0, 0.0);
        assert_eq!(s_distance(&e1, &e1), 0.0);
        assert_abs_diff_eq!(s_distance(&e1, &e2), FRAC_PI_2, epsilon = 1e-15);
        assert_abs_diff_eq!(s_distance(&e1, &e1.antipode()), PI, epsilon = 1e-15);
    }

    #[test]
    fn antipodal_geodesic_is_rejected() {
        let e1 = SPoint::new(1.0, 0.0, 0.0);
        assert_eq!(s_geodesic_point(&e1, &e1.antipode(), 0.5), Err(Error::NonUniqueGeodesic));
    }

    #[test]
    fn slerp_midpoint() {
        let e1 = SPoint::new(1.0, 0.0, 0.0);
        let e2 = SPoint::new(0.0, 1.0, 0.0);
        let m = s_geodesic_point(&e1, &e2, 0.5).unwrap();
        assert_abs_diff_eq!(s_distance(&m, &e1), PI / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s_distance(&m, &e2), PI / 4.0, epsilon = 1e-14);
    }

    #[test]
    fn oriented_angles_sum_to_full_turn() {
        let n = SPoint::new(0.0, 0.0, 1.0);
        let a = SPoint::from_angles(1.0, 0.0);
        let b = SPoint::from_angles(1.0, 1.0);
        let ab = s_oriented_angle(&n, &a, &b).unwrap();
        let ba = s_oriented_angle(&n, &b, &a).unwrap();
        assert_abs_diff_eq!(ab, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ab + ba, 2.0 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(s_angle(&n, &a, &b).unwrap(), 1.0, epsilon = 1e-12);
    }
}
