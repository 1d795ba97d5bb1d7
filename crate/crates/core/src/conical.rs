//! The conical hyperbolic surface of a metric triangulation, its curvature
//! certificate, and the domination check for the induced map.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::hyperbolic::segments_cross;
use crate::geometry::{embed_comparison_triangle, h_distance, h_geodesic_point, triangle_angles, HIsometry, HPoint};
use crate::geometry::{Kappa, TriangleShape};
use crate::surface::{flatten_report, lifted_face, FlattenReport, GainTriangulation, LengthFunction};
use crate::target::{EquivariantMap, Representation, Target, TargetIsometry, TargetPoint};
use crate::word::Word;

/// Certificate slack on `θ_v − 2π`.
pub const CURVATURE_TOL: f64 = 1e-9;
/// Slack on `d_X ≤ d_C` for sampled pairs.
pub const LIPSCHITZ_TOL: f64 = 1e-9;
/// Pairs closer than this enter the ratio statistic only through the
/// absolute excess: far from the origin, coordinates carry `~1e−16·e^r`
/// absolute error, which swamps the quotient of two tiny distances.
pub const RATIO_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicalSurface {
    pub genus: usize,
    pub lengths: LengthFunction,
    pub shapes: Vec<TriangleShape>,
    pub corner_angles: Vec<[f64; 3]>,
    pub face_areas: Vec<f64>,
    pub cone_angles: Vec<f64>,
    pub total_area: f64,
    pub flatten: FlattenReport,
}

impl ConicalSurface {
    pub fn is_degenerate(&self) -> bool {
        !self.flatten.is_empty()
    }

    pub fn face_is_flat(&self, face: usize) -> bool {
        self.flatten.flat_faces.contains(&face)
    }

    /// `min_v (θ_v − 2π)`.
    pub fn margin(&self) -> f64 {
        self.cone_angles.iter().map(|a| a - TAU).fold(f64::INFINITY, f64::min)
    }
}

/// Glue the model triangles of `(T, ℓ)` into a cone surface.
pub fn build_conical(t: &GainTriangulation, l: &LengthFunction, genus: usize) -> Result<ConicalSurface> {
    let flatten = flatten_report(t, l)?;
    let mut shapes = Vec::with_capacity(t.faces.len());
    let mut corner_angles = Vec::with_capacity(t.faces.len());
    let mut face_areas = Vec::with_capacity(t.faces.len());
    for f in 0..t.faces.len() {
        let sides = l.face_sides(t, f);
        let shape = TriangleShape::new(Kappa::Hyperbolic, sides)?;
        let angles = if flatten.flat_faces.contains(&f) {
            let mut pattern = [0.0; 3];
            pattern[shape.longest_side()] = PI;
            pattern
        } else {
            triangle_angles(&shape).angles
        };
        face_areas.push((PI - angles.iter().sum::<f64>()).max(0.0));
        shapes.push(shape);
        corner_angles.push(angles);
    }
    let mut cone_angles = vec![0.0; t.vertex_count];
    for (f, angles) in corner_angles.iter().enumerate() {
        for (k, v) in t.face_vertices(f).into_iter().enumerate() {
            cone_angles[v] += angles[k];
        }
    }
    let total_area = face_areas.iter().sum();
    Ok(ConicalSurface { genus, lengths: l.clone(), shapes, corner_angles, face_areas, cone_angles, total_area, flatten })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CertificateStatus {
    CurvatureAtMostMinusOne,
    Fails { vertices: Vec<usize> },
    Degenerate { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureCertificate {
    #[serde(flatten)]
    pub status: CertificateStatus,
    pub margin: f64,
}

impl CurvatureCertificate {
    pub fn passed(&self) -> bool {
        matches!(self.status, CertificateStatus::CurvatureAtMostMinusOne)
    }
}

/// Curvature ≤ −1 holds iff every cone angle is at least 2π.
pub fn curvature_certificate(c: &ConicalSurface) -> CurvatureCertificate {
    let margin = c.margin();
    if !c.flatten.flat_edges.is_empty() {
        return CurvatureCertificate {
            status: CertificateStatus::Degenerate {
                reason: format!("{} edge(s) have zero length", c.flatten.flat_edges.len()),
            },
            margin,
        };
    }
    let failing: Vec<usize> =
        (0..c.cone_angles.len()).filter(|&v| c.cone_angles[v] - TAU < -CURVATURE_TOL).collect();
    let status = if failing.is_empty() {
        CertificateStatus::CurvatureAtMostMinusOne
    } else {
        CertificateStatus::Fails { vertices: failing }
    };
    CurvatureCertificate { status, margin }
}

/// `|area + Σ_v (θ_v − 2π) − 4π(g − 1)|`.
pub fn gauss_bonnet_residual(c: &ConicalSurface) -> f64 {
    let defect: f64 = c.cone_angles.iter().map(|a| a - TAU).sum();
    (c.total_area + defect - 2.0 * TAU * (c.genus as f64 - 1.0)).abs()
}

/// Point with barycentric-style coordinates `λ` in a triangle given by three
/// points: first the point at `λ₂ / (λ₁ + λ₂)` along `[p₁ p₂]`, then the point
/// at fraction `λ₁ + λ₂` from `p₀` towards it.
pub fn cone_point<P, G>(p: &[P; 3], lambda: [f64; 3], geodesic: G) -> Result<P>
where
    P: Clone,
    G: Fn(&P, &P, f64) -> Result<P>,
{
    if lambda.iter().any(|x| !(x.is_finite() && *x >= -1e-15)) || (lambda.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("invalid barycentric coordinates {lambda:?}")));
    }
    let tail = lambda[1] + lambda[2];
    if tail <= 0.0 {
        return Ok(p[0].clone());
    }
    let side = geodesic(&p[1], &p[2], lambda[2] / tail)?;
    geodesic(&p[0], &side, tail.min(1.0))
}

/// Chart of a non-flat face in H².
pub fn face_chart(c: &ConicalSurface, face: usize) -> Result<[HPoint; 3]> {
    if c.face_is_flat(face) {
        return Err(Error::DegenerateChart(face));
    }
    Ok(embed_comparison_triangle(&c.shapes[face])?.0)
}

/// Image in X of the chart point with coordinates `λ` in `face`.
pub fn domination_map_eval(
    c: &ConicalSurface,
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
    face: usize,
    lambda: [f64; 3],
) -> Result<TargetPoint> {
    if c.face_is_flat(face) {
        return Err(Error::DegenerateChart(face));
    }
    let verts = lifted_face(t, rep, f, face)?;
    cone_point(&verts, lambda, |a, b, s| rep.target.geodesic_point(a, b, s))
}

pub fn chart_point(chart: &[HPoint; 3], lambda: [f64; 3]) -> Result<HPoint> {
    cone_point(chart, lambda, |a, b, s| Ok(h_geodesic_point(a, b, s)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pairs: usize,
    pub max_ratio: f64,
    pub max_excess: f64,
}

impl PairStats {
    pub(crate) fn record(&mut self, d_x: f64, d_c: f64) {
        self.pairs += 1;
        self.max_excess = self.max_excess.max(d_x - d_c);
        if d_c >= RATIO_FLOOR {
            self.max_ratio = self.max_ratio.max(d_x / d_c);
        }
    }

    pub(crate) fn merge(&mut self, o: &PairStats) {
        self.pairs += o.pairs;
        self.max_ratio = self.max_ratio.max(o.max_ratio);
        self.max_excess = self.max_excess.max(o.max_excess);
    }

    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0 + LIPSCHITZ_TOL && self.max_excess <= LIPSCHITZ_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub samples: usize,
    pub max_ratio: f64,
    pub max_excess: f64,
    pub per_face: Vec<PairStats>,
    pub cross_edge: PairStats,
    /// Cross-edge pairs whose chart distance was routed through an edge endpoint.
    pub routed_pairs: usize,
    #[serde(rename = "pass")]
    pub passed: bool,
}

/// Random coordinates: a quarter of the samples sit on a side (including
/// vertices), the rest are uniform in the simplex.
pub fn sample_lambda(rng: &mut ChaCha8Rng) -> [f64; 3] {
    if rng.random_bool(0.25) {
        let k = rng.random_range(0..3usize);
        let s: f64 = if rng.random_bool(0.2) { rng.random_range(0..2usize) as f64 } else { rng.random_range(0.0..1.0) };
        let mut l = [0.0; 3];
        l[(k + 1) % 3] = s;
        l[(k + 2) % 3] = 1.0 - s;
        l
    } else {
        let a: f64 = -rng.random_range(f64::EPSILON..1.0f64).ln();
        let b: f64 = -rng.random_range(f64::EPSILON..1.0f64).ln();
        let c: f64 = -rng.random_range(f64::EPSILON..1.0f64).ln();
        let s = a + b + c;
        [a / s, b / s, c / s]
    }
}

/// Charts of the two faces sharing an edge, unfolded into one picture. The
/// shared side (side `m1` of `f1`, side `m2` of `f2`) lies on the x-axis,
/// centred at the origin, with `f1` above and `f2` below; keeping every vertex
/// near the origin avoids the cancellation of moving a far chart into place.
pub fn edge_pair_charts(
    c: &ConicalSurface,
    f1: usize,
    m1: usize,
    f2: usize,
    m2: usize,
) -> Result<([HPoint; 3], [HPoint; 3])> {
    for f in [f1, f2] {
        if c.face_is_flat(f) {
            return Err(Error::DegenerateChart(f));
        }
    }
    // side m runs from corner m to corner m + 1 and is opposite corner m + 2
    let len = c.shapes[f1].sides[(m1 + 2) % 3];
    if len <= 0.0 {
        return Err(Error::InvalidShape("shared edge has zero length".into()));
    }
    let to_a = HIsometry::translation(len / 2.0, PI);
    let a = to_a.apply(&HPoint::ORIGIN);
    let b = HPoint::from_polar(len / 2.0, 0.0);
    // third vertex of f1: turn counterclockwise from a→b by the angle at a
    let c1 = to_a.apply(&HPoint::from_polar(c.shapes[f1].sides[(m1 + 1) % 3], c.corner_angles[f1][m1]));
    // f2 meets a at its corner m2 + 1; turn clockwise
    let k = (m2 + 1) % 3;
    let c2 = to_a.apply(&HPoint::from_polar(c.shapes[f2].sides[m2], -c.corner_angles[f2][k]));
    let mut chart1 = [a; 3];
    chart1[m1] = a;
    chart1[(m1 + 1) % 3] = b;
    chart1[(m1 + 2) % 3] = c1;
    let mut chart2 = [a; 3];
    chart2[m2] = b;
    chart2[k] = a;
    chart2[(m2 + 2) % 3] = c2;
    Ok((chart1, chart2))
}

/// Deck element carrying the lift of `f2` onto the lift of `f1` across the
/// shared edge (`f1` side `m1`, `f2` side `m2`).
pub fn adjacency_word(t: &GainTriangulation, f1: usize, m1: usize, f2: usize, m2: usize) -> Word {
    let w1 = t.face_corner_words(f1);
    let w2 = t.face_corner_words(f2);
    // corner m1 of f1 is the same lift as corner m2 + 1 of f2
    w1[m1].mul(&w2[(m2 + 1) % 3].inverse())
}

/// Isometry moving a face image near the origin. Exp/log far out in the
/// hyperboloid lose about e^(2r) ulps, which the ratio test would see.
pub(crate) fn recentre(im: &[TargetPoint; 3], target: &Target) -> TargetIsometry {
    match (im[0].as_h2(), im[1].as_h2(), im[2].as_h2()) {
        (Some(a), Some(b), Some(c)) => TargetIsometry::H2(centring(&[*a, *b, *c])),
        _ => target.identity(),
    }
}

fn centring(v: &[HPoint; 3]) -> HIsometry {
    let third = 1.0 / 3.0;
    let centre = cone_point(v, [third; 3], |a, b, s| Ok(h_geodesic_point(a, b, s))).unwrap_or(v[0]);
    HIsometry::origin_to(&centre).inverse()
}

fn centred_chart(chart: &[HPoint; 3]) -> [HPoint; 3] {
    let g = centring(chart);
    [g.apply(&chart[0]), g.apply(&chart[1]), g.apply(&chart[2])]
}

pub(crate) fn apply_face(g: &TargetIsometry, im: &[TargetPoint; 3], target: &Target) -> Result<[TargetPoint; 3]> {
    Ok([g.apply(&im[0], target)?, g.apply(&im[1], target)?, g.apply(&im[2], target)?])
}

/// Sample pairs within faces and across shared edges and compare distances
/// in X with chart distances in the cone surface.
pub fn lipschitz_sample_check(
    c: &ConicalSurface,
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
    n_pairs: usize,
    seed: u64,
) -> Result<DominationReport> {
    if c.is_degenerate() {
        return Err(Error::DegenerateChart(c.flatten.flat_faces.first().copied().unwrap_or(0)));
    }
    let target = &rep.target;
    let nf = t.faces.len();
    let charts: Vec<[HPoint; 3]> =
        (0..nf).map(|k| face_chart(c, k).map(|ch| centred_chart(&ch))).collect::<Result<_>>()?;
    let images: Vec<[TargetPoint; 3]> = (0..nf).map(|k| lifted_face(t, rep, f, k)).collect::<Result<_>>()?;
    let recentring: Vec<TargetIsometry> = images.iter().map(|im| recentre(im, target)).collect();
    let centred: Vec<[TargetPoint; 3]> =
        images.iter().zip(&recentring).map(|(im, g)| apply_face(g, im, target)).collect::<Result<_>>()?;
    let geo = |a: &TargetPoint, b: &TargetPoint, s: f64| target.geodesic_point(a, b, s);
    let uses = t.edge_uses();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_face = vec![PairStats::default(); nf];
    let mut cross = PairStats::default();
    let mut routed = 0;
    let within = n_pairs / 2;
    for _ in 0..within {
        let k = rng.random_range(0..nf);
        let (l1, l2) = (sample_lambda(&mut rng), sample_lambda(&mut rng));
        let d_c = h_distance(&chart_point(&charts[k], l1)?, &chart_point(&charts[k], l2)?);
        let x1 = cone_point(&centred[k], l1, geo)?;
        let x2 = cone_point(&centred[k], l2, geo)?;
        per_face[k].record(target.distance(&x1, &x2)?, d_c);
    }
    for _ in within..n_pairs {
        let e = rng.random_range(0..t.edges.len());
        let (f1, m1) = uses[e][0];
        let (f2, m2) = uses[e][1];
        let (chart1, chart2) = edge_pair_charts(c, f1, m1, f2, m2)?;
        // interpolate in the base lift of f2, then move it next to f1
        let delta = rep.evaluate_word(&adjacency_word(t, f1, m1, f2, m2))?;
        let (l1, l2) = (sample_lambda(&mut rng), sample_lambda(&mut rng));
        let p1 = chart_point(&chart1, l1)?;
        let p2 = chart_point(&chart2, l2)?;
        let (a, b) = (chart1[m1], chart1[(m1 + 1) % 3]);
        let d_c = if segments_cross(&p1, &p2, &a, &b) {
            h_distance(&p1, &p2)
        } else {
            routed += 1;
            (h_distance(&p1, &a) + h_distance(&a, &p2)).min(h_distance(&p1, &b) + h_distance(&b, &p2))
        };
        // shared recentring applied to the vertices, so interpolation happens near the origin
        let to_f1 = recentring[f1].compose(&delta)?;
        let lifted = apply_face(&to_f1, &images[f2], target)?;
        let x1 = cone_point(&centred[f1], l1, geo)?;
        let x2 = cone_point(&lifted, l2, geo)?;
        cross.record(target.distance(&x1, &x2)?, d_c);
    }
    let mut all = cross.clone();
    for s in &per_face {
        all.merge(s);
    }
    Ok(DominationReport {
        samples: n_pairs,
        max_ratio: all.max_ratio,
        max_excess: all.max_excess,
        passed: all.passed(),
        per_face,
        cross_edge: cross,
        routed_pairs: routed,
    })
}

/// Check that every face's lifted image triangle has exactly the face's side lengths.
pub fn face_consistency(
    c: &ConicalSurface,
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..t.faces.len() {
        let v = lifted_face(t, rep, f, k)?;
        let sides = [
            rep.target.distance(&v[1], &v[2])?,
            rep.target.distance(&v[2], &v[0])?,
            rep.target.distance(&v[0], &v[1])?,
        ];
        for i in 0..3 {
            worst = worst.max((sides[i] - c.shapes[k].sides[i]).abs());
        }
    }
    Ok(worst)
}
