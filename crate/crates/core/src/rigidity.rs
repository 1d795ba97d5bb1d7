//! Rigidity detection at a vertex, and spherical polygon tools: enclosing
//! radius, corner cutting and majorization by convex polygons.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{comparison_angle, s_angle, s_distance, s_geodesic_point, s_oriented_angle, triangle_angles};
use crate::geometry::{Kappa, SPoint, TriangleShape};
use crate::surface::{GainTriangulation, FLAT_TOL};
use crate::target::{EquivariantMap, Representation};

pub const DEFAULT_TOL: f64 = 1e-6;
/// Slack on interior angles `≤ π` when deciding convexity during gluing.
const CONVEX_SLACK: f64 = 1e-11;
/// Interior angles at least this far below `π` count as genuine corners.
pub const PERSISTENCE_GAP: f64 = 1e-6;

/// Numeric data of the link of a vertex: one entry per corner, in cyclic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkPolygon {
    pub vertex: usize,
    /// `α_j`: angle at `F(x)` between consecutive neighbour images.
    pub alpha: Vec<f64>,
    /// `α̃_j`: the matching comparison angles.
    pub alpha_tilde: Vec<f64>,
    /// `∠_{F(x)}(y_j, y_{j+2})`.
    pub span: Vec<f64>,
    /// Corners lying in flat faces.
    pub degenerate_corners: Vec<usize>,
}

impl LinkPolygon {
    pub fn comparison_perimeter(&self) -> f64 {
        self.alpha_tilde.iter().sum()
    }
}

pub fn link_polygon(
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
    vertex: usize,
) -> Result<LinkPolygon> {
    let corners = t.cyclic_corners()?;
    let corners = corners
        .get(vertex)
        .ok_or_else(|| Error::InvalidInput(format!("vertex {vertex} out of range")))?;
    let target = &rep.target;
    let x = f.image(vertex);
    // y_j is the far end of the first ray of corner j
    let ys = corners
        .iter()
        .map(|c| {
            let (w, gain) = t.half_edge_neighbour(c.first);
            rep.apply_word(&gain, f.image(w))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = ys.len();
    let radii = ys.iter().map(|y| target.distance(x, y)).collect::<Result<Vec<_>>>()?;
    if let Some(j) = radii.iter().position(|r| *r <= FLAT_TOL) {
        return Err(Error::InvalidInput(format!(
            "edge {} at vertex {vertex} has zero length",
            corners[j].first.edge
        )));
    }
    let mut alpha = Vec::with_capacity(n);
    let mut alpha_tilde = Vec::with_capacity(n);
    let mut span = Vec::with_capacity(n);
    let mut degenerate = Vec::new();
    for j in 0..n {
        let (a, b) = (&ys[j], &ys[(j + 1) % n]);
        alpha.push(target.angle(x, a, b)?);
        let opposite = target.distance(a, b)?;
        let shape = TriangleShape::new(Kappa::Hyperbolic, [opposite, radii[j], radii[(j + 1) % n]])?;
        if shape.is_flat() || shape.slack() <= FLAT_TOL {
            degenerate.push(j);
        }
        alpha_tilde.push(comparison_angle(Kappa::Hyperbolic, radii[j], radii[(j + 1) % n], opposite)?);
        span.push(target.angle(x, a, &ys[(j + 2) % n])?);
    }
    Ok(LinkPolygon { vertex, alpha, alpha_tilde, span, degenerate_corners: degenerate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RigidityStatus {
    Rigid,
    NotRigid,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityVerdict {
    pub status: RigidityStatus,
    /// `Σ α̃_j − 2π`.
    pub angle_sum_residual: f64,
    /// `α̃_j − α_j`.
    pub equality_residuals: Vec<f64>,
    pub local_geodesic_residuals: Vec<f64>,
    pub tol: f64,
}

/// `|α_j + α_{j+1} − ∠(y_j, y_{j+2})|`.
pub fn local_geodesic_test(link: &LinkPolygon) -> Vec<f64> {
    let n = link.alpha.len();
    (0..n).map(|j| (link.alpha[j] + link.alpha[(j + 1) % n] - link.span[j]).abs()).collect()
}

pub fn rigidity_detect(link: &LinkPolygon, tol: f64) -> RigidityVerdict {
    let angle_sum_residual = link.comparison_perimeter() - TAU;
    let equality_residuals: Vec<f64> = link.alpha_tilde.iter().zip(&link.alpha).map(|(at, a)| at - a).collect();
    let local = local_geodesic_test(link);
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let status = if angle_sum_residual >= 10.0 * tol {
        RigidityStatus::NotRigid
    } else if angle_sum_residual.abs() <= tol
        && max_abs(&equality_residuals) <= tol
        && max_abs(&local) <= tol
        && link.degenerate_corners.is_empty()
    {
        RigidityStatus::Rigid
    } else {
        RigidityStatus::Inconclusive
    };
    RigidityVerdict { status, angle_sum_residual, equality_residuals, local_geodesic_residuals: local, tol }
}

/// A closed geodesic polygon on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalPolygon {
    vertices: Vec<SPoint>,
}

impl SphericalPolygon {
    pub fn new(vertices: Vec<SPoint>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput(format!("a polygon needs 3 vertices, got {}", vertices.len())));
        }
        let n = vertices.len();
        for i in 0..n {
            let (p, q) = (&vertices[i], &vertices[(i + 1) % n]);
            if p.coords().dot(q.coords()) < 0.0 && p.coords().cross(q.coords()).norm() < 1e-12 {
                return Err(Error::NonUniqueGeodesic);
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[SPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn side_lengths(&self) -> Vec<f64> {
        let n = self.len();
        (0..n).map(|i| s_distance(&self.vertices[i], &self.vertices[(i + 1) % n])).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.side_lengths().iter().sum()
    }

    /// Interior angles, reading the vertex order as counterclockwise seen
    /// from outside the sphere.
    pub fn angles(&self) -> Result<Vec<f64>> {
        (0..self.len()).map(|i| interior_angle(&self.vertices, i)).collect()
    }

    /// Point at fraction `t` along side `i` (from vertex `i` to `i + 1`).
    pub fn side_point(&self, i: usize, t: f64) -> Result<SPoint> {
        let n = self.len();
        s_geodesic_point(&self.vertices[i % n], &self.vertices[(i + 1) % n], t)
    }
}

fn interior_angle(v: &[SPoint], i: usize) -> Result<f64> {
    let n = v.len();
    s_oriented_angle(&v[i], &v[(i + 1) % n], &v[(i + n - 1) % n])
}

/// Largest distance from `c` to the arc `[a b]`: an endpoint, unless the
/// arc passes the point farthest from `c` on its great circle.
fn arc_max_distance(c: &SPoint, a: &SPoint, b: &SPoint) -> f64 {
    let ends = s_distance(c, a).max(s_distance(c, b));
    let len = s_distance(a, b);
    let tangent = a.log(b);
    if len <= 0.0 || tangent.norm() == 0.0 {
        return ends;
    }
    let w = tangent / tangent.norm();
    let (ca, cw) = (c.coords().dot(a.coords()), c.coords().dot(&w));
    let mut t = cw.atan2(ca) + PI;
    if t >= TAU {
        t -= TAU;
    }
    if t <= len {
        ends.max(PI - ca.hypot(cw).min(1.0).acos())
    } else {
        ends
    }
}

fn curve_max_distance(p: &SphericalPolygon, c: &SPoint) -> f64 {
    let v = p.vertices();
    let n = v.len();
    (0..n).map(|i| arc_max_distance(c, &v[i], &v[(i + 1) % n])).fold(0.0, f64::max)
}

fn vertex_max_distance(p: &SphericalPolygon, c: &SPoint) -> f64 {
    p.vertices().iter().map(|v| s_distance(c, v)).fold(0.0, f64::max)
}

/// Pattern search over centres, moving along tangent directions.
fn refine_centre<F: Fn(&SPoint) -> f64>(start: SPoint, value: f64, objective: F) -> (SPoint, f64) {
    let (mut c, mut best) = (start, value);
    let mut step = 0.1;
    while step > 1e-12 {
        let basis = tangent_basis(&c);
        let mut improved = false;
        for k in 0..8 {
            let phi = k as f64 * PI / 4.0;
            let dir = basis.0 * phi.cos() + basis.1 * phi.sin();
            let trial = c.exp(&(dir * step));
            let val = objective(&trial);
            if val < best {
                best = val;
                c = trial;
                improved = true;
                break;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (c, best)
}

fn tangent_basis(c: &SPoint) -> (Vector3<f64>, Vector3<f64>) {
    let p = c.coords();
    let helper = if p.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = (helper - p * p.dot(&helper)).normalize();
    (e1, p.cross(&e1))
}

/// Radius of the smallest cap containing the polygon curve, with its centre.
/// The radius is the exact farthest-point distance at the returned centre,
/// so it bounds the optimum from above.
pub fn spherical_polygon_radius(p: &SphericalPolygon) -> (f64, SPoint) {
    let v = p.vertices();
    let n = v.len();
    let mut candidates = Vec::new();
    let sum: Vector3<f64> = v.iter().map(|x| *x.coords()).sum();
    if sum.norm() > 1e-12 {
        candidates.push(SPoint::from_vector(sum));
    }
    for i in 0..n {
        for j in i + 1..n {
            let m = v[i].coords() + v[j].coords();
            if m.norm() > 1e-12 {
                candidates.push(SPoint::from_vector(m));
            }
            for k in j + 1..n {
                let normal = (v[j].coords() - v[i].coords()).cross(&(v[k].coords() - v[i].coords()));
                if normal.norm() > 1e-14 {
                    candidates.push(SPoint::from_vector(normal));
                    candidates.push(SPoint::from_vector(-normal));
                }
            }
        }
    }
    // the optimal cap of the vertex set is spanned by two or three of them;
    // below a hemisphere, caps are convex and also hold the sides
    let (mut centre, mut radius) = (v[0], f64::INFINITY);
    for c in &candidates {
        let r = vertex_max_distance(p, c);
        if r < radius {
            radius = r;
            centre = *c;
        }
    }
    let exact = curve_max_distance(p, &centre);
    if exact < PI / 2.0 {
        return (exact, centre);
    }
    let (mut centre, mut radius) = (centre, exact);
    for c in &candidates {
        let r = curve_max_distance(p, c);
        if r < radius {
            radius = r;
            centre = *c;
        }
    }
    let (centre, radius) = refine_centre(centre, radius, |c| curve_max_distance(p, c));
    (radius, centre)
}

/// Cut the corner at `index`: move `ε` towards each neighbour and replace the
/// vertex by the midpoint of the two cut points.
pub fn vertex_perturb(p: &SphericalPolygon, index: usize, eps: f64) -> Result<SphericalPolygon> {
    let v = p.vertices();
    let n = v.len();
    if index >= n {
        return Err(Error::InvalidInput(format!("vertex {index} out of range")));
    }
    let (prev, cur, next) = (&v[(index + n - 1) % n], &v[index], &v[(index + 1) % n]);
    let angle = s_angle(cur, prev, next)?;
    if angle >= PI - 1e-6 {
        return Err(Error::NoAngle(index));
    }
    let (a, b) = (s_distance(cur, prev), s_distance(cur, next));
    if !(eps > 0.0 && eps < a && eps < b) {
        return Err(Error::InvalidInput(format!("epsilon {eps} must lie below the adjacent sides {a} and {b}")));
    }
    let q1 = s_geodesic_point(cur, prev, eps / a)?;
    let q3 = s_geodesic_point(cur, next, eps / b)?;
    let mut out = v.to_vec();
    out[index] = s_geodesic_point(&q1, &q3, 0.5)?;
    SphericalPolygon::new(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Majorization {
    /// Convex, counterclockwise, with the input's cyclic side lengths.
    pub polygon: SphericalPolygon,
    /// Whether the majorizing polygon keeps a genuine corner at each vertex.
    pub angle_persistence: Vec<bool>,
    pub angles: Vec<f64>,
    /// Number of reflex gluings that were straightened.
    pub straightened: usize,
}

/// Convex polygon in `S²` whose vertex distances dominate those of `p`,
/// with the same side lengths.
pub fn majorize_spherical_polygon(p: &SphericalPolygon) -> Result<Majorization> {
    let perimeter = p.perimeter();
    if perimeter >= TAU {
        return Err(Error::PerimeterTooLong(perimeter));
    }
    let v = p.vertices();
    let n = v.len();
    let d: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| s_distance(&v[i], &v[j])).collect()).collect();
    let mut straightened = 0;
    let out = majorize_distances(&d, &mut straightened)?;
    let polygon = SphericalPolygon::new(out)?;
    let angles = polygon.angles()?;
    let angle_persistence = angles.iter().map(|a| *a < PI - PERSISTENCE_GAP).collect();
    Ok(Majorization { polygon, angle_persistence, angles, straightened })
}

fn submatrix(d: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    idx.iter().map(|&i| idx.iter().map(|&j| d[i][j]).collect()).collect()
}

fn unit_toward(p: &SPoint, q: &SPoint) -> Result<Vector3<f64>> {
    let t = p.log(q);
    if t.norm() == 0.0 {
        return Err(Error::UndefinedDirection);
    }
    Ok(t / t.norm())
}

/// Angles `(at v0, at v1, at v2)` of the model triangle with the given vertex distances.
fn model_angles(d01: f64, d12: f64, d02: f64) -> Result<[f64; 3]> {
    let shape = TriangleShape::new(Kappa::Spherical, [d12, d02, d01])?;
    Ok(triangle_angles(&shape).angles)
}

/// Convex polygon realizing the side lengths of a polygon in some CAT(1)
/// space, given only the distances between its vertices there. The triangle
/// `[0 1 2]` is split off, the rest majorized recursively and the two glued
/// along `[0 2]`; a reflex vertex of the gluing is a geodesic point of the
/// glued region, so it is dropped, the `(N−1)`-gon majorized in the glued
/// region's own metric, and the vertex put back on its side.
fn majorize_distances(d: &[Vec<f64>], straightened: &mut usize) -> Result<Vec<SPoint>> {
    let n = d.len();
    if n == 3 {
        let a = model_angles(d[0][1], d[1][2], d[0][2])?;
        let p0 = SPoint::new(0.0, 0.0, 1.0);
        let p1 = p0.exp(&(Vector3::x() * d[0][1]));
        let p2 = p0.exp(&(p0.rotate_tangent(&Vector3::x(), a[0]) * d[0][2]));
        return Ok(vec![p0, p1, p2]);
    }
    let rest: Vec<usize> = std::iter::once(0).chain(2..n).collect();
    let q = majorize_distances(&submatrix(d, &rest), straightened)?;
    let a = model_angles(d[0][1], d[1][2], d[0][2])?;
    // the triangle goes on the right of q0 → q1, outside the convex remainder
    let dir = q[0].rotate_tangent(&unit_toward(&q[0], &q[1])?, -a[0]);
    let apex = q[0].exp(&(dir * d[0][1]));
    let mut glued = Vec::with_capacity(n);
    glued.push(q[0]);
    glued.push(apex);
    glued.extend_from_slice(&q[1..]);
    let at0 = interior_angle(&q, 0)? + a[0];
    let at2 = interior_angle(&q, 1)? + a[2];
    if at0.max(at2) <= PI + CONVEX_SLACK {
        return Ok(glued);
    }
    let reflex = if at0 >= at2 { 0 } else { 2 };
    *straightened += 1;
    let dz = glued_region_distances(&glued)?;
    let keep: Vec<usize> = (0..n).filter(|&i| i != reflex).collect();
    let reduced = majorize_distances(&submatrix(&dz, &keep), straightened)?;
    // reinsert the dropped vertex on the side joining its neighbours
    let prev = (reflex + n - 1) % n;
    let pos = keep.iter().position(|&i| i == prev).expect("neighbour kept");
    let (u, w) = (reduced[pos], reduced[(pos + 1) % keep.len()]);
    let along = dz[prev][(reflex + 1) % n];
    let t = if along > 0.0 { d[prev][reflex] / along } else { 0.0 };
    let back = s_geodesic_point(&u, &w, t.clamp(0.0, 1.0))?;
    let mut out = reduced;
    out.insert(pos + 1, back);
    // restore the original index order when the dropped vertex was 0
    if reflex == 0 {
        out.rotate_left(pos + 1);
    }
    Ok(out)
}

/// Intrinsic vertex distances in the union of the triangle `[g0 g1 g2]` and
/// the convex polygon `[g0 g2 g3 …]`, via shortest paths over the
/// visibility graph.
fn glued_region_distances(g: &[SPoint]) -> Result<Vec<Vec<f64>>> {
    let n = g.len();
    let in_triangle = |i: usize| i <= 2;
    let in_rest = |i: usize| i != 1;
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for i in 0..n {
        d[i][i] = 0.0;
        for j in i + 1..n {
            let visible = (in_triangle(i) && in_triangle(j))
                || (in_rest(i) && in_rest(j))
                || crosses_shared_side(&g[0], &g[2], &g[1], &g[if i == 1 { j } else { i }]);
            if visible {
                d[i][j] = s_distance(&g[i], &g[j]);
                d[j][i] = d[i][j];
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    if d.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("glued region is disconnected".into()));
    }
    Ok(d)
}

/// Whether the arc `[u v]` meets the great circle of `[a b]` inside `[a b]`.
fn crosses_shared_side(a: &SPoint, b: &SPoint, u: &SPoint, v: &SPoint) -> bool {
    let normal = a.coords().cross(b.coords());
    let (su, sv) = (u.coords().dot(&normal), v.coords().dot(&normal));
    if su * sv > 0.0 {
        return false;
    }
    let x = u.coords() * sv.abs() + v.coords() * su.abs();
    if x.norm() < 1e-15 {
        return false;
    }
    let x = SPoint::from_vector(x);
    s_distance(a, &x) + s_distance(&x, b) - s_distance(a, b) <= 1e-12
}

/// `min_n max_i |⟨v_i, n⟩|` over unit normals: zero exactly when the vertices
/// lie on one great circle.
pub fn great_circle_deviation(p: &SphericalPolygon) -> f64 {
    let v = p.vertices();
    let n = v.len();
    let m = DMatrix::from_fn(n, 3, |i, j| v[i].coords()[j]);
    let objective = |c: &SPoint| v.iter().map(|x| x.coords().dot(c.coords()).abs()).fold(0.0, f64::max);
    let mut starts = Vec::new();
    let svd = m.svd(false, true);
    if let Some(vt) = svd.v_t {
        let k = (0..svd.singular_values.len())
            .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
            .unwrap_or(0);
        starts.push(SPoint::new(vt[(k, 0)], vt[(k, 1)], vt[(k, 2)]));
    }
    for i in 0..n {
        for j in i + 1..n {
            let c = v[i].coords().cross(v[j].coords());
            if c.norm() > 1e-12 {
                starts.push(SPoint::from_vector(c));
            }
        }
    }
    let mut best = f64::INFINITY;
    for s in starts {
        let (_, val) = refine_centre(s, objective(&s), objective);
        best = best.min(val);
    }
    best
}
