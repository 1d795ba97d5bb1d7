//! Triangles in the model planes and their comparison data.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::hyperbolic::HPoint;
use crate::error::{Error, Result};

/// Slack below which a triangle inequality is treated as an equality.
pub const FLAT_EPS: f64 = 1e-12;
/// Excess over the triangle inequality tolerated by [`TriangleShape::new`].
pub const SHAPE_TOL: f64 = 1e-10;

/// Curvature of a model plane `M_κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kappa {
    Hyperbolic,
    Euclidean,
    Spherical,
}

impl Kappa {
    pub fn value(self) -> i8 {
        match self {
            Kappa::Hyperbolic => -1,
            Kappa::Euclidean => 0,
            Kappa::Spherical => 1,
        }
    }

    pub fn from_value(k: i8) -> Result<Self> {
        match k {
            -1 => Ok(Kappa::Hyperbolic),
            0 => Ok(Kappa::Euclidean),
            1 => Ok(Kappa::Spherical),
            other => Err(Error::InvalidInput(format!("unsupported curvature {other}"))),
        }
    }

    /// Twice the diameter `D_κ` of the model plane.
    pub fn perimeter_bound(self) -> f64 {
        match self {
            Kappa::Spherical => TAU,
            _ => f64::INFINITY,
        }
    }

    /// `sin_κ`-type function entering the half-angle formula.
    fn sn(self, x: f64) -> f64 {
        match self {
            Kappa::Hyperbolic => x.sinh(),
            Kappa::Euclidean => x,
            Kappa::Spherical => x.sin(),
        }
    }
}

/// Side lengths `(a, b, c)` of a triangle in `M_κ`; `a` is opposite the
/// first vertex, `b` the second, `c` the third.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleShape {
    pub kappa: Kappa,
    pub sides: [f64; 3],
}

impl TriangleShape {
    pub fn new(kappa: Kappa, sides: [f64; 3]) -> Result<Self> {
        if sides.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidShape(format!("sides {sides:?} must be finite and nonnegative")));
        }
        let [a, b, c] = sides;
        let scale = 1.0 + a.max(b).max(c);
        for (i, excess) in [a - b - c, b - c - a, c - a - b].into_iter().enumerate() {
            if excess > SHAPE_TOL * scale {
                return Err(Error::InvalidShape(format!(
                    "side {i} of {sides:?} exceeds the sum of the others by {excess:e}"
                )));
            }
        }
        let perimeter = a + b + c;
        if perimeter >= kappa.perimeter_bound() {
            return Err(Error::NoComparisonTriangle { perimeter });
        }
        Ok(TriangleShape { kappa, sides })
    }

    pub fn hyperbolic(sides: [f64; 3]) -> Result<Self> {
        Self::new(Kappa::Hyperbolic, sides)
    }

    pub fn perimeter(&self) -> f64 {
        self.sides.iter().sum()
    }

    /// Slack `min_i (sum of the other two − side_i)`; zero for flat triangles.
    pub fn slack(&self) -> f64 {
        let [a, b, c] = self.sides;
        (b + c - a).min(c + a - b).min(a + b - c)
    }

    pub fn is_flat(&self) -> bool {
        self.slack() <= FLAT_EPS * (1.0 + self.perimeter())
    }

    /// Index of the first longest side.
    pub fn longest_side(&self) -> usize {
        let mut best = 0;
        for i in 1..3 {
            if self.sides[i] > self.sides[best] {
                best = i;
            }
        }
        best
    }
}

/// Interior angles opposite the three sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleAngles {
    pub angles: [f64; 3],
    pub flat: bool,
}

impl TriangleAngles {
    pub fn sum(&self) -> f64 {
        self.angles.iter().sum()
    }
}

/// The `(π, 0, 0)` pattern with `π` opposite the given side.
pub fn flat_pattern(long_side: usize) -> [f64; 3] {
    let mut angles = [0.0; 3];
    angles[long_side] = PI;
    angles
}

/// Angles of a model triangle via the half-angle form of the law of cosines,
/// which stays accurate for thin and tiny triangles.
pub fn triangle_angles(shape: &TriangleShape) -> TriangleAngles {
    if shape.is_flat() {
        return TriangleAngles { angles: flat_pattern(shape.longest_side()), flat: true };
    }
    let [a, b, c] = shape.sides;
    let s = (a + b + c) / 2.0;
    let k = shape.kappa;
    let sn = |x: f64| k.sn(x.max(0.0));
    let half = |opp: f64, o1: f64, o2: f64| {
        let num = sn(s - o1) * sn(s - o2);
        let den = sn(s) * sn(s - opp);
        2.0 * num.sqrt().atan2(den.sqrt())
    };
    TriangleAngles { angles: [half(a, b, c), half(b, c, a), half(c, a, b)], flat: false }
}

/// Angle at the vertex joining sides `a` and `b` in the `M_κ` triangle with
/// opposite side `c`.
pub fn comparison_angle(kappa: Kappa, a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidShape(format!("comparison angle needs positive adjacent sides, got ({a}, {b})")));
    }
    let shape = TriangleShape::new(kappa, [c, a, b])?;
    if c == 0.0 {
        return Ok(0.0);
    }
    if shape.is_flat() {
        // the vertex opposite c is straight only when c is the long side
        return Ok(if c >= a.max(b) { PI } else { 0.0 });
    }
    Ok(triangle_angles(&shape).angles[0])
}

/// Comparison triangle of a hyperbolic shape placed with the first vertex
/// at the origin and the second on the positive x-axis. The third vertex has
/// positive y, so the output is counterclockwise. The flag reports flatness.
pub fn embed_comparison_triangle(shape: &TriangleShape) -> Result<([HPoint; 3], bool)> {
    if shape.kappa != Kappa::Hyperbolic {
        return Err(Error::InvalidShape("embedding is only provided for κ = −1".into()));
    }
    let [_, b, c] = shape.sides;
    let angles = triangle_angles(shape);
    // angle at the first vertex; for a flat shape choose the straight/degenerate limit
    let alpha = if angles.flat {
        let [a, _, _] = shape.sides;
        if c == 0.0 || b == 0.0 {
            0.0
        } else if a >= b.max(c) {
            PI
        } else {
            0.0
        }
    } else {
        angles.angles[0]
    };
    let v0 = HPoint::ORIGIN;
    let v1 = HPoint::from_polar(c, 0.0);
    let v2 = HPoint::from_polar(b, alpha);
    Ok(([v0, v1, v2], angles.flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::hyperbolic::{h_angle, h_distance};
    use approx::assert_abs_diff_eq;

    /// Plain law of cosines, kept independent of the half-angle implementation.
    fn law_of_cosines(a: f64, b: f64, c: f64) -> f64 {
        ((b.cosh() * c.cosh() - a.cosh()) / (b.sinh() * c.sinh())).acos()
    }

    #[test]
    fn equilateral_unit_triangle() {
        let expected = law_of_cosines(1.0, 1.0, 1.0);
        assert_abs_diff_eq!(expected, 0.918_797_872_178, epsilon = 1e-11);
        let t = triangle_angles(&TriangleShape::hyperbolic([1.0, 1.0, 1.0]).unwrap());
        for a in t.angles {
            assert_abs_diff_eq!(a, expected, epsilon = 1e-13);
        }
        assert!(!t.flat);
    }

    #[test]
    fn thin_isoceles_tends_to_right_angles() {
        let eps = 1e-4;
        let t = triangle_angles(&TriangleShape::hyperbolic([1.0 + eps, 1.0 + eps, eps]).unwrap());
        assert!((t.angles[0] - PI / 2.0).abs() < 0.01);
        assert!((t.angles[1] - PI / 2.0).abs() < 0.01);
        assert!(t.angles[2] < 0.01);
    }

    #[test]
    fn tiny_equilateral_is_euclidean() {
        let eps = 1e-3;
        let t = triangle_angles(&TriangleShape::hyperbolic([eps; 3]).unwrap());
        for a in t.angles {
            assert!((a - PI / 3.0).abs() < 1e-5);
        }
    }

    #[test]
    fn flat_shapes_are_flagged() {
        let t = triangle_angles(&TriangleShape::hyperbolic([2.0, 1.0, 1.0]).unwrap());
        assert!(t.flat);
        assert_eq!(t.angles, [PI, 0.0, 0.0]);
        let z = triangle_angles(&TriangleShape::hyperbolic([0.0; 3]).unwrap());
        assert!(z.flat);
        assert_abs_diff_eq!(z.sum(), PI);
    }

    #[test]
    fn comparison_angle_examples() {
        assert_abs_diff_eq!(
            comparison_angle(Kappa::Hyperbolic, 1.0, 1.0, 1.0).unwrap(),
            law_of_cosines(1.0, 1.0, 1.0),
            epsilon = 1e-13
        );
        assert_abs_diff_eq!(comparison_angle(Kappa::Euclidean, 3.0, 4.0, 5.0).unwrap(), PI / 2.0, epsilon = 1e-14);
        assert_eq!(comparison_angle(Kappa::Hyperbolic, 0.8, 0.8, 0.0).unwrap(), 0.0);
        assert!(matches!(
            comparison_angle(Kappa::Spherical, 3.0, 3.0, 1.0),
            Err(Error::NoComparisonTriangle { .. })
        ));
    }

    #[test]
    fn spherical_right_triangle() {
        // octant triangle: all sides and angles π/2
        let t = triangle_angles(&TriangleShape::new(Kappa::Spherical, [PI / 2.0; 3]).unwrap());
        for a in t.angles {
            assert_abs_diff_eq!(a, PI / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn triangle_inequality_is_enforced() {
        assert!(TriangleShape::hyperbolic([3.0, 1.0, 1.0]).is_err());
        assert!(TriangleShape::hyperbolic([-1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn embedding_round_trip() {
        let shape = TriangleShape::hyperbolic([1.0, 1.0, 1.0]).unwrap();
        let ([p0, p1, p2], flat) = embed_comparison_triangle(&shape).unwrap();
        assert!(!flat);
        assert_abs_diff_eq!(h_distance(&p1, &p2), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(h_distance(&p2, &p0), 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(h_distance(&p0, &p1), 1.0, epsilon = 1e-10);
        assert!(p2.y() > 0.0);
        let angle = h_angle(&p0, &p1, &p2).unwrap();
        assert_abs_diff_eq!(angle, law_of_cosines(1.0, 1.0, 1.0), epsilon = 1e-9);
    }

    #[test]
    fn embedding_with_zero_side() {
        let l = 0.9;
        let shape = TriangleShape::hyperbolic([l, l, 0.0]).unwrap();
        let ([p0, p1, p2], flat) = embed_comparison_triangle(&shape).unwrap();
        assert!(flat);
        assert_abs_diff_eq!(h_distance(&p0, &p1), 0.0);
        assert_abs_diff_eq!(h_distance(&p1, &p2), l, epsilon = 1e-12);
        assert_abs_diff_eq!(h_distance(&p0, &p2), l, epsilon = 1e-12);
    }
}
