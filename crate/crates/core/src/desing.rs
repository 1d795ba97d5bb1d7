//! Degenerate length functions: classification, the uniform `ℓ + ε`
//! perturbation, the side maps `Δ_ε → Δ`, and the choice of `ε`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conical::{
    adjacency_word, build_conical, edge_pair_charts, face_chart, ConicalSurface, DominationReport, PairStats,
};
use crate::error::{Error, Result};
use crate::geometry::hyperbolic::segments_cross;
use crate::geometry::{embed_comparison_triangle, h_distance, h_geodesic_point, HPoint, TriangleShape};
use crate::surface::{flatten_report, lifted_face, GainTriangulation, LengthFunction, FLAT_TOL};
use crate::target::{EquivariantMap, Representation, TargetPoint};

/// Slack on `θ = 2π` for the rigidity-eligible subcase.
pub const RIGIDITY_ANGLE_TOL: f64 = 1e-6;
/// Required margin `θ − 2π` after perturbation.
pub const PERTURBED_MARGIN: f64 = 1e-9;
/// Number of halvings tried by [`choose_epsilon`].
pub const EPSILON_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum DegeneracyClass {
    NonDegenerate,
    FlatFaceNoFlatEdge { cone_angle_exceeds_2pi: bool, flat_face_count: usize },
    SomeEdgeFlattened,
    AllEdgesFlattened,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    #[serde(flatten)]
    pub class: DegeneracyClass,
    /// No flat edge, every cone angle equal to `2π`, exactly one flat face.
    pub rigidity_eligible: bool,
    /// Some face has all three edges at zero while other edges are positive.
    pub nonstandard: bool,
    pub flat_faces: Vec<usize>,
    pub flat_edges: Vec<usize>,
}

pub fn classify_degeneracy(t: &GainTriangulation, l: &LengthFunction, cone_angles: &[f64]) -> Result<Degeneracy> {
    let report = flatten_report(t, l)?;
    let n_flat_edges = report.flat_edges.len();
    let margin = cone_angles.iter().map(|a| a - TAU).fold(f64::INFINITY, f64::min);
    let class = if n_flat_edges == t.edges.len() {
        DegeneracyClass::AllEdgesFlattened
    } else if n_flat_edges > 0 {
        DegeneracyClass::SomeEdgeFlattened
    } else if !report.flat_faces.is_empty() {
        DegeneracyClass::FlatFaceNoFlatEdge {
            cone_angle_exceeds_2pi: margin > RIGIDITY_ANGLE_TOL,
            flat_face_count: report.flat_faces.len(),
        }
    } else {
        DegeneracyClass::NonDegenerate
    };
    let rigidity_eligible = n_flat_edges == 0
        && report.flat_faces.len() == 1
        && cone_angles.iter().all(|a| (a - TAU).abs() <= RIGIDITY_ANGLE_TOL);
    let nonstandard = class == DegeneracyClass::SomeEdgeFlattened
        && (0..t.faces.len()).any(|f| t.faces[f].sides.iter().all(|s| l.lengths[s.edge] <= FLAT_TOL));
    Ok(Degeneracy { class, rigidity_eligible, nonstandard, flat_faces: report.flat_faces, flat_edges: report.flat_edges })
}

/// `ℓ + ε` on every edge.
pub fn perturb(l: &LengthFunction, eps: f64) -> Result<LengthFunction> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {eps}")));
    }
    Ok(LengthFunction::new(l.lengths.iter().map(|x| x + eps).collect()))
}

/// Side map of `Δ_ε → Δ`: a side of length `l + ε` is projected onto the
/// middle stretch `[ε/2, l + ε/2]`, then shifted back.
pub fn side_reparam(l: f64, eps: f64, s: f64) -> Result<f64> {
    let max = l + eps;
    if !(s >= 0.0 && s <= max) {
        return Err(Error::OutOfRange { s, max });
    }
    Ok((s - eps / 2.0).clamp(0.0, l))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleDomination {
    pub epsilon: f64,
    #[serde(flatten)]
    pub stats: PairStats,
    #[serde(rename = "pass")]
    pub passed: bool,
}

/// Point at arclength `s` along side `k` (opposite corner `k`) of an embedded triangle.
fn side_point(chart: &[HPoint; 3], sides: &[f64; 3], k: usize, s: f64) -> HPoint {
    let (p, q) = (chart[(k + 1) % 3], chart[(k + 2) % 3]);
    if sides[k] <= 0.0 {
        return p;
    }
    h_geodesic_point(&p, &q, (s / sides[k]).clamp(0.0, 1.0))
}

/// Sample pairs of side points of `Δ_ε`, send them through [`side_reparam`]
/// and compare distances in the two embedded triangles.
pub fn triangle_domination_check(
    shape: &TriangleShape,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<TriangleDomination> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {eps}")));
    }
    let base = shape.sides;
    let grown = TriangleShape::new(shape.kappa, base.map(|x| x + eps))?;
    let (chart, _) = embed_comparison_triangle(shape)?;
    let (chart_eps, _) = embed_comparison_triangle(&grown)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = PairStats::default();
    for _ in 0..n_samples {
        let (i, j) = (rng.random_range(0..3usize), rng.random_range(0..3usize));
        let si = rng.random_range(0.0..=grown.sides[i]);
        let sj = rng.random_range(0.0..=grown.sides[j]);
        let d_pre = h_distance(&side_point(&chart_eps, &grown.sides, i, si), &side_point(&chart_eps, &grown.sides, j, sj));
        let ri = side_reparam(base[i], eps, si)?;
        let rj = side_reparam(base[j], eps, sj)?;
        let d_img = h_distance(&side_point(&chart, &base, i, ri), &side_point(&chart, &base, j, rj));
        stats.record(d_img, d_pre);
    }
    let passed = stats.passed();
    Ok(TriangleDomination { epsilon: eps, stats, passed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub epsilon: f64,
    /// `min_v θ_v − 2π` of the perturbed surface.
    pub predicted_margin: f64,
    /// Corner angles of the perturbed surface minus those of the original.
    pub angle_deltas: Vec<[f64; 3]>,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EpsilonChoice {
    Perturb(PerturbationPlan),
    /// θ = 2π with a single flat face: handled by the rigidity argument.
    Rigidity,
    /// ℓ ≡ 0: the map is constant, trivially dominated.
    FixedPointConstant,
}

/// Halve `ε` from 1 until the perturbed cone angles clear `2π`.
pub fn choose_epsilon(t: &GainTriangulation, l: &LengthFunction, c: &ConicalSurface) -> Result<EpsilonChoice> {
    let deg = classify_degeneracy(t, l, &c.cone_angles)?;
    if deg.class == DegeneracyClass::AllEdgesFlattened {
        return Ok(EpsilonChoice::FixedPointConstant);
    }
    if deg.rigidity_eligible {
        return Ok(EpsilonChoice::Rigidity);
    }
    if deg.class == DegeneracyClass::NonDegenerate {
        return Err(Error::InvalidInput("length function is not degenerate".into()));
    }
    let floor = match deg.class {
        DegeneracyClass::FlatFaceNoFlatEdge { cone_angle_exceeds_2pi: true, .. } => {
            PERTURBED_MARGIN.max(c.margin() / 2.0)
        }
        _ => PERTURBED_MARGIN,
    };
    let mut eps = 1.0;
    let mut last_margin = f64::NEG_INFINITY;
    for step in 0..EPSILON_STEPS {
        let grown = build_conical(t, &perturb(l, eps)?, c.genus)?;
        last_margin = grown.margin();
        if last_margin > floor && grown.flatten.is_empty() {
            let angle_deltas = grown
                .corner_angles
                .iter()
                .zip(&c.corner_angles)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]])
                .collect();
            return Ok(EpsilonChoice::Perturb(PerturbationPlan {
                epsilon: eps,
                predicted_margin: last_margin,
                angle_deltas,
                halvings: step,
            }));
        }
        eps /= 2.0;
    }
    Err(Error::NoAdmissibleEpsilon { steps: EPSILON_STEPS, last_margin })
}

/// Image in X of the point at arclength `s` along face side `m` of `C`.
fn image_side_point(
    rep: &Representation,
    images: &[TargetPoint; 3],
    len: f64,
    m: usize,
    s: f64,
) -> Result<TargetPoint> {
    let (p, q) = (&images[m], &images[(m + 1) % 3]);
    if len <= 0.0 {
        return Ok(p.clone());
    }
    rep.target.geodesic_point(p, q, (s / len).clamp(0.0, 1.0))
}

/// Side `m` of a face runs from corner `m` to corner `m + 1`.
fn face_side_length(c: &ConicalSurface, face: usize, m: usize) -> f64 {
    c.shapes[face].sides[(m + 2) % 3]
}

fn chart_side_point(chart: &[HPoint; 3], len: f64, m: usize, s: f64) -> HPoint {
    if len <= 0.0 {
        return chart[m];
    }
    h_geodesic_point(&chart[m], &chart[(m + 1) % 3], (s / len).clamp(0.0, 1.0))
}

/// Sampled check that the composite `C′ → C → X` is 1-Lipschitz on the
/// 1-skeleton: side points of `C′` are reparametrized onto the sides of `C`
/// and sent along the image geodesics of `F`.
pub fn composite_lipschitz_check(
    c_prime: &ConicalSurface,
    c: &ConicalSurface,
    eps: f64,
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
    n_pairs: usize,
    seed: u64,
) -> Result<DominationReport> {
    if c_prime.is_degenerate() {
        return Err(Error::DegenerateChart(c_prime.flatten.flat_faces.first().copied().unwrap_or(0)));
    }
    let nf = t.faces.len();
    let charts: Vec<[HPoint; 3]> = (0..nf).map(|k| face_chart(c_prime, k)).collect::<Result<_>>()?;
    let images: Vec<[TargetPoint; 3]> = (0..nf).map(|k| lifted_face(t, rep, f, k)).collect::<Result<_>>()?;
    let uses = t.edge_uses();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut per_face = vec![PairStats::default(); nf];
    let mut cross = PairStats::default();
    let mut routed = 0;
    // a side point of C′ in both charts and in X
    let sample = |rng: &mut ChaCha8Rng, face: usize| -> Result<(usize, f64, f64)> {
        let m = rng.random_range(0..3usize);
        let s = rng.random_range(0.0..=face_side_length(c_prime, face, m));
        Ok((m, s, side_reparam(face_side_length(c, face, m), eps, s)?))
    };
    let within = n_pairs / 2;
    for _ in 0..within {
        let k = rng.random_range(0..nf);
        let (m1, s1, r1) = sample(&mut rng, k)?;
        let (m2, s2, r2) = sample(&mut rng, k)?;
        let p1 = chart_side_point(&charts[k], face_side_length(c_prime, k, m1), m1, s1);
        let p2 = chart_side_point(&charts[k], face_side_length(c_prime, k, m2), m2, s2);
        let x1 = image_side_point(rep, &images[k], face_side_length(c, k, m1), m1, r1)?;
        let x2 = image_side_point(rep, &images[k], face_side_length(c, k, m2), m2, r2)?;
        per_face[k].record(rep.target.distance(&x1, &x2)?, h_distance(&p1, &p2));
    }
    for _ in within..n_pairs {
        let e = rng.random_range(0..t.edges.len());
        let (f1, e1) = uses[e][0];
        let (f2, e2) = uses[e][1];
        let (chart1, chart2) = edge_pair_charts(c_prime, f1, e1, f2, e2)?;
        let delta = rep.evaluate_word(&adjacency_word(t, f1, e1, f2, e2))?;
        let (m1, s1, r1) = sample(&mut rng, f1)?;
        let (m2, s2, r2) = sample(&mut rng, f2)?;
        let p1 = chart_side_point(&chart1, face_side_length(c_prime, f1, m1), m1, s1);
        let p2 = chart_side_point(&chart2, face_side_length(c_prime, f2, m2), m2, s2);
        let (a, b) = (chart1[e1], chart1[(e1 + 1) % 3]);
        let d_c = if segments_cross(&p1, &p2, &a, &b) {
            h_distance(&p1, &p2)
        } else {
            routed += 1;
            (h_distance(&p1, &a) + h_distance(&a, &p2)).min(h_distance(&p1, &b) + h_distance(&b, &p2))
        };
        let x1 = image_side_point(rep, &images[f1], face_side_length(c, f1, m1), m1, r1)?;
        let x2 = delta.apply(&image_side_point(rep, &images[f2], face_side_length(c, f2, m2), m2, r2)?, &rep.target)?;
        cross.record(rep.target.distance(&x1, &x2)?, d_c);
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
