//! Discrete energy of equivariant maps and its minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::hyperbolic::{minkowski, tangent_norm};
use crate::geometry::{HIsometry, HPoint};
use crate::surface::GainTriangulation;
use crate::target::{EquivariantMap, Representation, Target, TargetIsometry, TargetPoint, TreePoint};
use crate::word::Letter;

/// Energy below which a converged map counts as a fixed point.
pub const CONSTANT_ENERGY: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CoordinateDescent,
    Proximal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub method: Method,
    /// Moreau–Yosida weights, strictly increasing.
    pub lambda_schedule: Vec<f64>,
    /// Sweep cap for coordinate descent, inner sweep cap per proximal step.
    pub max_iter: usize,
    pub tol: f64,
    /// Floor of the divergence radius; the radius is this value times
    /// `max(1, initial diameter)`.
    pub divergence_radius: f64,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            method: Method::CoordinateDescent,
            lambda_schedule: default_lambda_schedule(),
            max_iter: 20_000,
            tol: 1e-9,
            divergence_radius: 1e4,
            seed: 0,
        }
    }
}

/// `λ_k = 2^k` for `k = 0 … 39`.
pub fn default_lambda_schedule() -> Vec<f64> {
    (0..40).map(|k| 2f64.powi(k)).collect()
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {}", self.tol)));
        }
        if self.lambda_schedule.is_empty() || self.lambda_schedule.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::InvalidInput("lambda schedule must be nonempty and positive".into()));
        }
        if self.lambda_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("lambda schedule must be strictly increasing".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be positive".into()));
        }
        if !(self.divergence_radius > 0.0) {
            return Err(Error::InvalidInput("divergence radius must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    FixedPointConstant,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceReason {
    RadiusExceeded,
    IterationCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub energy: f64,
    pub max_residual: f64,
    /// Largest distance of an image from its initial position.
    pub displacement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutcome {
    pub map: EquivariantMap,
    pub energy: f64,
    pub residual: Vec<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub divergence: Option<DivergenceReason>,
    pub trace: Vec<TraceEntry>,
}

impl SolveOutcome {
    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    /// Whether the displacement column of the trace never decreases.
    pub fn displacement_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].displacement >= w[0].displacement - 1e-12)
    }

    /// Whether the energy column never increases (beyond `1e−15` relative slack).
    pub fn energy_monotone(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].energy <= w[0].energy + 1e-15 * (1.0 + w[0].energy))
    }
}

/// Starting map for the solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Map(EquivariantMap),
    Random { seed: u64 },
}

/// Precomputed edge isometries and vertex stars.
#[derive(Debug, Clone)]
pub struct Stars {
    /// `(tail, head, ρ(gain))` per edge.
    edges: Vec<(usize, usize, TargetIsometry)>,
    /// Per vertex: `(neighbour vertex, isometry)` with neighbour image `iso · F(neighbour)`.
    stars: Vec<Vec<(usize, TargetIsometry)>>,
}

impl Stars {
    pub fn new(t: &GainTriangulation, rep: &Representation) -> Result<Self> {
        let mut edges = Vec::with_capacity(t.edges.len());
        let mut stars = vec![Vec::new(); t.vertex_count];
        for e in &t.edges {
            let iso = rep.evaluate_word(&e.gain)?;
            stars[e.tail].push((e.head, iso.clone()));
            stars[e.head].push((e.tail, iso.inverse()));
            edges.push((e.tail, e.head, iso));
        }
        Ok(Stars { edges, stars })
    }

    pub fn neighbour_images(&self, target: &Target, f: &EquivariantMap, u: usize) -> Result<Vec<TargetPoint>> {
        self.stars[u].iter().map(|(w, iso)| iso.apply(f.image(*w), target)).collect()
    }

    pub fn edge_lengths(&self, target: &Target, f: &EquivariantMap) -> Result<Vec<f64>> {
        self.edges
            .iter()
            .map(|(u, w, iso)| {
                let head = iso.apply(f.image(*w), target)?;
                target.distance(f.image(*u), &head)
            })
            .collect()
    }

    pub fn energy(&self, target: &Target, f: &EquivariantMap) -> Result<f64> {
        Ok(self.edge_lengths(target, f)?.iter().map(|l| l * l).sum())
    }

    pub fn residuals(&self, target: &Target, f: &EquivariantMap) -> Result<Vec<f64>> {
        (0..self.stars.len())
            .map(|u| {
                let ys = self.neighbour_images(target, f, u)?;
                let w = vec![1.0; ys.len()];
                local_residual(target, f.image(u), &ys, &w)
            })
            .collect()
    }
}

/// `Σ_e ℓ_F(e)²`.
pub fn energy(t: &GainTriangulation, rep: &Representation, f: &EquivariantMap) -> Result<f64> {
    Stars::new(t, rep)?.energy(&rep.target, f)
}

/// Violation of the harmonic critical inequality at each vertex.
pub fn critical_residual(t: &GainTriangulation, rep: &Representation, f: &EquivariantMap) -> Result<Vec<f64>> {
    Stars::new(t, rep)?.residuals(&rep.target, f)
}

/// `sup_v Σ wᵢ |z yᵢ| cos∠(v, yᵢ)` over unit directions `v` at `z`, clamped at 0.
///
/// On H² the supremum is the norm of `Σ wᵢ log_z(yᵢ)`. On a tree the
/// directions are the finitely many germs at `z` and the cosines are ±1.
pub fn local_residual(target: &Target, z: &TargetPoint, ys: &[TargetPoint], weights: &[f64]) -> Result<f64> {
    match (target, z) {
        (Target::H2, TargetPoint::H2(p)) => {
            let mut g = nalgebra::Vector3::zeros();
            for (y, w) in ys.iter().zip(weights) {
                let q = y.as_h2().ok_or(Error::MixedTargets)?;
                g += p.log(q) * *w;
            }
            Ok(tangent_norm(&g))
        }
        (Target::Tree(t), TargetPoint::Tree(p)) => {
            let mut data = Vec::with_capacity(ys.len());
            for (y, w) in ys.iter().zip(weights) {
                let q = y.as_tree().ok_or(Error::MixedTargets)?;
                data.push((t.germ(p, q), w * t.distance(p, q)));
            }
            let best = t
                .germs_at(p)
                .into_iter()
                .map(|g| tree_moment(&data, g))
                .fold(0.0, f64::max);
            Ok(best)
        }
        _ => Err(Error::MixedTargets),
    }
}

fn tree_moment(data: &[(Option<Letter>, f64)], g: Letter) -> f64 {
    data.iter()
        .map(|(h, wd)| match h {
            Some(h) if *h == g => *wd,
            Some(_) => -*wd,
            None => 0.0,
        })
        .sum()
}

/// Minimizer of `z ↦ Σ wᵢ d(z, yᵢ)²`, started from `start`.
///
/// H²: Newton iteration with the exact Hessian of `d²` and Armijo
/// backtracking, run to stationarity. Tree: exact convex walk.
pub fn weighted_barycenter(
    target: &Target,
    ys: &[TargetPoint],
    weights: &[f64],
    start: &TargetPoint,
) -> Result<TargetPoint> {
    if ys.is_empty() {
        return Err(Error::InvalidInput("barycenter of an empty set".into()));
    }
    match (target, start) {
        (Target::H2, TargetPoint::H2(p0)) => {
            let pts: Vec<HPoint> =
                ys.iter().map(|y| y.as_h2().copied().ok_or(Error::MixedTargets)).collect::<Result<_>>()?;
            Ok(TargetPoint::H2(h2_barycenter(&pts, weights, p0)))
        }
        (Target::Tree(t), TargetPoint::Tree(p0)) => {
            let pts: Vec<TreePoint> =
                ys.iter().map(|y| y.as_tree().cloned().ok_or(Error::MixedTargets)).collect::<Result<_>>()?;
            Ok(TargetPoint::Tree(t.weighted_barycenter(&pts, weights, p0)))
        }
        _ => Err(Error::MixedTargets),
    }
}

/// Unit-weight barycenter step from `start`.
pub fn vertex_barycenter_step(target: &Target, ys: &[TargetPoint], start: &TargetPoint) -> Result<TargetPoint> {
    weighted_barycenter(target, ys, &vec![1.0; ys.len()], start)
}

fn h2_barycenter(ys: &[HPoint], w: &[f64], start: &HPoint) -> HPoint {
    let f = |z: &HPoint| {
        ys.iter().zip(w).map(|(y, a)| a * crate::geometry::h_distance(z, y).powi(2)).sum::<f64>()
    };
    // gradient of ½f (negated) and its Hessian in an orthonormal frame at z
    let newton = |z: &HPoint| {
        let m = *HIsometry::origin_to(z).matrix();
        let (e1, e2) = (m.column(1).into_owned(), m.column(2).into_owned());
        let mut g = nalgebra::Vector2::zeros();
        let mut h = nalgebra::Matrix2::zeros();
        for (y, a) in ys.iter().zip(w) {
            let v = z.log(y);
            let c = nalgebra::Vector2::new(minkowski(&v, &e1), minkowski(&v, &e2));
            let d = c.norm();
            g += c * *a;
            // ½d² has eigenvalue 1 along the geodesic to y and d·coth d across it
            let across = if d < 1e-8 { 1.0 + d * d / 3.0 } else { d / d.tanh() };
            let mut hy = nalgebra::Matrix2::identity() * across;
            if d > 0.0 {
                let u = c / d;
                hy += u * u.transpose() * (1.0 - across);
            }
            h += hy * *a;
        }
        let s = h.try_inverse().map(|hi| hi * g).unwrap_or(g);
        (g, s, e1 * s[0] + e2 * s[1])
    };
    let total: f64 = w.iter().sum();
    let mut z = *start;
    let mut fz = f(&z);
    for _ in 0..200 {
        let (g, s, step) = newton(&z);
        if g.norm() <= 1e-15 * total * (1.0 + z.t()) {
            break;
        }
        let slope = 2.0 * g.dot(&s);
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = z.exp(&(step * t));
            let fc = f(&cand);
            if fc < fz && fc <= fz - 1e-4 * t * slope {
                z = cand;
                fz = fc;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            // the decrease is below the rounding of f; keep the Newton step
            // while the gradient still shrinks
            let cand = z.exp(&step);
            let fc = f(&cand);
            if fc <= fz + 1024.0 * f64::EPSILON * fz.max(1.0) && newton(&cand).0.norm() < g.norm() {
                z = cand;
                fz = fc;
            } else {
                break;
            }
        }
    }
    z
}

/// A random point near the base point: H² within distance 1 of the origin,
/// trees within two edges of the identity.
pub fn random_point(target: &Target, rng: &mut ChaCha8Rng) -> TargetPoint {
    match target {
        Target::H2 => {
            let r: f64 = rng.random_range(0.0..1.0);
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            TargetPoint::H2(HPoint::from_polar(r, th))
        }
        Target::Tree(t) => {
            let letters: Vec<Letter> = t.letters().collect();
            let mut v = crate::word::Word::identity();
            let steps = rng.random_range(0..2usize);
            for _ in 0..steps {
                v = v.push(letters[rng.random_range(0..letters.len())]);
            }
            let l = letters[rng.random_range(0..letters.len())];
            let off = rng.random_range(0.0..t.len(l));
            TargetPoint::Tree(t.on_edge(&v, l, off).expect("offset inside edge"))
        }
    }
}

pub fn random_map(target: &Target, vertex_count: usize, seed: u64) -> EquivariantMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EquivariantMap::new((0..vertex_count).map(|_| random_point(target, &mut rng)).collect())
}

struct State<'a> {
    target: &'a Target,
    stars: &'a Stars,
    initial: EquivariantMap,
    radius: f64,
}

impl State<'_> {
    fn displacement(&self, f: &EquivariantMap) -> Result<f64> {
        let mut d: f64 = 0.0;
        for (a, b) in f.images.iter().zip(&self.initial.images) {
            d = d.max(self.target.distance(a, b)?);
        }
        Ok(d)
    }

    /// Move vertex `u` toward `b` along the geodesic, backtracking until the
    /// objective decreases. Near a critical point the decrease drops below the
    /// rounding of the objective, so the full step is also accepted when the
    /// objective is unchanged to working precision and `residual` shrinks.
    /// Returns whether a move was accepted.
    fn line_search<F, R>(
        &self,
        f: &mut EquivariantMap,
        u: usize,
        b: &TargetPoint,
        objective: F,
        residual: R,
    ) -> Result<bool>
    where
        F: Fn(&EquivariantMap) -> Result<f64>,
        R: Fn(&EquivariantMap) -> Result<f64>,
    {
        let current = f.images[u].clone();
        if self.target.distance(&current, b)? == 0.0 {
            return Ok(false);
        }
        let base = objective(f)?;
        let before = residual(f)?;
        f.images[u] = b.clone();
        let full = objective(f)?;
        let slack = 1024.0 * f64::EPSILON * base.abs().max(1.0);
        if full < base || (full <= base + slack && residual(f)? < before) {
            return Ok(true);
        }
        let mut t = 0.5;
        for _ in 1..50 {
            f.images[u] = self.target.geodesic_point(&current, b, t)?;
            if objective(f)? < base {
                return Ok(true);
            }
            t *= 0.5;
        }
        f.images[u] = current;
        Ok(false)
    }

    fn energy(&self, f: &EquivariantMap) -> Result<f64> {
        self.stars.energy(self.target, f)
    }
}

/// Minimize the energy over equivariant maps.
pub fn solve_harmonic(
    t: &GainTriangulation,
    rep: &Representation,
    init: &Init,
    params: &SolverParams,
) -> Result<SolveOutcome> {
    params.validate()?;
    let target = &rep.target;
    let stars = Stars::new(t, rep)?;
    let f0 = match init {
        Init::Map(m) => {
            if m.images.len() != t.vertex_count {
                return Err(Error::InvalidInput(format!(
                    "initial map has {} images for {} vertices",
                    m.images.len(),
                    t.vertex_count
                )));
            }
            m.clone()
        }
        Init::Random { seed } => random_map(target, t.vertex_count, *seed),
    };
    let mut diameter: f64 = 0.0;
    for a in &f0.images {
        for b in &f0.images {
            diameter = diameter.max(target.distance(a, b)?);
        }
    }
    let state = State {
        target,
        stars: &stars,
        initial: f0.clone(),
        radius: params.divergence_radius * diameter.max(1.0),
    };
    match params.method {
        Method::CoordinateDescent => coordinate_descent(&state, f0, params),
        Method::Proximal => proximal(&state, f0, params),
    }
}

fn finish(
    state: &State<'_>,
    f: EquivariantMap,
    iterations: usize,
    trace: Vec<TraceEntry>,
    params: &SolverParams,
    divergence: Option<DivergenceReason>,
) -> Result<SolveOutcome> {
    let energy = state.energy(&f)?;
    let residual = state.stars.residuals(state.target, &f)?;
    let max_res = residual.iter().copied().fold(0.0, f64::max);
    let (status, divergence) = match divergence {
        Some(r) => (SolveStatus::Diverged, Some(r)),
        None if max_res <= params.tol => {
            if energy < CONSTANT_ENERGY {
                (SolveStatus::FixedPointConstant, None)
            } else {
                (SolveStatus::Converged, None)
            }
        }
        None => (SolveStatus::Diverged, Some(DivergenceReason::IterationCap)),
    };
    Ok(SolveOutcome { map: f, energy, residual, status, iterations, divergence, trace })
}

fn coordinate_descent(state: &State<'_>, mut f: EquivariantMap, params: &SolverParams) -> Result<SolveOutcome> {
    let target = state.target;
    let mut trace = Vec::new();
    let record = |f: &EquivariantMap, it: usize, trace: &mut Vec<TraceEntry>| -> Result<f64> {
        let res = state.stars.residuals(target, f)?.into_iter().fold(0.0, f64::max);
        trace.push(TraceEntry {
            iteration: it,
            energy: state.energy(f)?,
            max_residual: res,
            displacement: state.displacement(f)?,
        });
        Ok(res)
    };
    let mut res = record(&f, 0, &mut trace)?;
    for sweep in 1..=params.max_iter {
        if res <= params.tol {
            return finish(state, f, sweep - 1, trace, params, None);
        }
        let mut moved = false;
        for u in 0..f.images.len() {
            let ys = state.stars.neighbour_images(target, &f, u)?;
            let b = vertex_barycenter_step(target, &ys, f.image(u))?;
            moved |= state.line_search(&mut f, u, &b, |g| state.energy(g), |g| {
                let ys = state.stars.neighbour_images(target, g, u)?;
                local_residual(target, g.image(u), &ys, &vec![1.0; ys.len()])
            })?;
        }
        res = record(&f, sweep, &mut trace)?;
        if trace.last().map(|e| e.displacement).unwrap_or(0.0) > state.radius {
            return finish(state, f, sweep, trace, params, Some(DivergenceReason::RadiusExceeded));
        }
        if !moved {
            // no descent possible at working precision
            break;
        }
    }
    let it = trace.last().map(|e| e.iteration).unwrap_or(0);
    finish(state, f, it, trace, params, None)
}

fn proximal(state: &State<'_>, mut f: EquivariantMap, params: &SolverParams) -> Result<SolveOutcome> {
    let target = state.target;
    let mut trace = vec![TraceEntry {
        iteration: 0,
        energy: state.energy(&f)?,
        max_residual: state.stars.residuals(target, &f)?.into_iter().fold(0.0, f64::max),
        displacement: 0.0,
    }];
    let mut total_sweeps = 0;
    for (k, &lambda) in params.lambda_schedule.iter().enumerate() {
        let anchor = f.clone();
        // Φ(y) = λ E(y) + Σ_v d(anchor_v, y_v)²
        let objective = |g: &EquivariantMap| -> Result<f64> {
            let mut prox = 0.0;
            for (a, b) in anchor.images.iter().zip(&g.images) {
                prox += target.distance(a, b)?.powi(2);
            }
            Ok(lambda * state.energy(g)? + prox)
        };
        for _ in 0..params.max_iter {
            total_sweeps += 1;
            let mut moved = false;
            let mut inner_res: f64 = 0.0;
            for u in 0..f.images.len() {
                let mut ys = state.stars.neighbour_images(target, &f, u)?;
                let mut w = vec![lambda; ys.len()];
                ys.push(anchor.images[u].clone());
                w.push(1.0);
                let r = local_residual(target, f.image(u), &ys, &w)? / lambda;
                inner_res = inner_res.max(r);
                if r <= 0.1 * params.tol {
                    continue;
                }
                let b = weighted_barycenter(target, &ys, &w, f.image(u))?;
                moved |= state.line_search(&mut f, u, &b, objective, |g| {
                    let mut ys = state.stars.neighbour_images(target, g, u)?;
                    ys.push(anchor.images[u].clone());
                    local_residual(target, g.image(u), &ys, &w)
                })?;
            }
            if inner_res <= 0.1 * params.tol || !moved {
                break;
            }
        }
        let energy = state.energy(&f)?;
        let res = state.stars.residuals(target, &f)?.into_iter().fold(0.0, f64::max);
        let displacement = state.displacement(&f)?;
        trace.push(TraceEntry { iteration: k + 1, energy, max_residual: res, displacement });
        if displacement > state.radius {
            return finish(state, f, total_sweeps, trace, params, Some(DivergenceReason::RadiusExceeded));
        }
    }
    finish(state, f, total_sweeps, trace, params, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{h_distance, HIsometry};
    use crate::surface::{riemann_triangulation, Edge, Face, GainTriangulation};
    use crate::target::TreeSpace;
    use crate::word::{SurfaceGroup, Word};

    fn tree_rep() -> (GainTriangulation, Representation) {
        let t = riemann_triangulation(2).unwrap();
        let tree = TreeSpace::unit(2);
        let p = |s: &str| TargetIsometry::Tree(Word::parse_tree(s, 2).unwrap());
        let images = vec![p("xy"), p("e"), p("xY"), p("e")];
        let rep = Representation::new(SurfaceGroup::new(2).unwrap(), Target::Tree(tree), images).unwrap();
        (t, rep)
    }

    #[test]
    fn trivial_representation_has_zero_energy() {
        let t = riemann_triangulation(2).unwrap();
        let rep = Representation::trivial(SurfaceGroup::new(2).unwrap(), Target::H2);
        let f = EquivariantMap::constant(1, TargetPoint::H2(HPoint::from_polar(0.4, 1.0)));
        assert_eq!(energy(&t, &rep, &f).unwrap(), 0.0);
        assert_eq!(critical_residual(&t, &rep, &f).unwrap(), vec![0.0]);
        let out = solve_harmonic(&t, &rep, &Init::Random { seed: 3 }, &SolverParams::default()).unwrap();
        assert_eq!(out.status, SolveStatus::FixedPointConstant);
        assert_eq!(out.energy, 0.0);
    }

    #[test]
    fn tree_energy_by_enumeration() {
        let (t, rep) = tree_rep();
        let tree = TreeSpace::unit(2);
        // oracle: each edge contributes the word length of its image gain squared (at e)
        let oracle: f64 = t
            .edges
            .iter()
            .map(|e| {
                let TargetIsometry::Tree(w) = rep.evaluate_word(&e.gain).unwrap() else { unreachable!() };
                (w.len() as f64).powi(2)
            })
            .sum();
        let f = EquivariantMap::constant(1, TargetPoint::Tree(TreePoint::identity()));
        let e = energy(&t, &rep, &f).unwrap();
        assert_eq!(e, oracle);
        assert_eq!(e, 20.0);
        assert_eq!(critical_residual(&t, &rep, &f).unwrap(), vec![0.0]);
        // homogeneity: scaling edge lengths by s scales energy by s²
        let scaled = Representation::new(rep.group, Target::Tree(TreeSpace::new(2, vec![3.0, 3.0]).unwrap()), rep.images.clone())
            .unwrap();
        assert_eq!(energy(&t, &scaled, &f).unwrap(), 9.0 * e);
        let _ = tree;
    }

    fn loop_surface() -> GainTriangulation {
        // a single loop with every other structure stripped; only stars matter here
        GainTriangulation {
            genus: 2,
            vertex_count: 1,
            edges: vec![Edge { tail: 0, head: 0, gain: Word::letter(Letter::pos(0)) }],
            faces: Vec::<Face>::new(),
        }
    }

    #[test]
    fn loop_residual_vanishes_on_axis() {
        let t = loop_surface();
        let tr = HIsometry::translation(1.2, 0.0);
        let images = vec![
            TargetIsometry::H2(tr),
            TargetIsometry::H2(HIsometry::identity()),
            TargetIsometry::H2(HIsometry::identity()),
            TargetIsometry::H2(HIsometry::identity()),
        ];
        let rep = Representation::new_unchecked(SurfaceGroup::new(2).unwrap(), Target::H2, images).unwrap();
        let on = EquivariantMap::constant(1, TargetPoint::H2(HPoint::from_polar(0.7, 0.0)));
        assert!(critical_residual(&t, &rep, &on).unwrap()[0] < 1e-12);
        let off = EquivariantMap::constant(1, TargetPoint::H2(HPoint::from_polar(0.7, 1.0)));
        let r = critical_residual(&t, &rep, &off).unwrap()[0];
        assert!(r > 0.1);
        // finite-difference oracle: residual = |∇E| / 2
        let p = HPoint::from_polar(0.7, 1.0);
        let e_at = |q: HPoint| h_distance(&q, &tr.apply(&q)).powi(2);
        let h = 1e-6;
        let frame = |v: nalgebra::Vector3<f64>| p.exp(&v);
        let basis = tangent_basis(&p);
        let grad: Vec<f64> =
            basis.iter().map(|b| (e_at(frame(*b * h)) - e_at(frame(*b * -h))) / (2.0 * h)).collect();
        let norm = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
        assert!((norm / 2.0 - r).abs() < 1e-5, "{} vs {}", norm / 2.0, r);
    }

    pub(crate) fn tangent_basis(p: &HPoint) -> [nalgebra::Vector3<f64>; 2] {
        let iso = HIsometry::origin_to(p);
        let m = iso.matrix();
        [m.column(1).into_owned(), m.column(2).into_owned()]
    }

    #[test]
    fn barycenter_examples() {
        let a = TargetPoint::H2(HPoint::from_polar(1.0, 0.3));
        let b = TargetPoint::H2(HPoint::from_polar(2.0, 2.3));
        let only = vertex_barycenter_step(&Target::H2, &[a.clone()], &b).unwrap();
        assert!(Target::H2.distance(&only, &a).unwrap() < 1e-12);
        let mid = vertex_barycenter_step(&Target::H2, &[a.clone(), b.clone()], &a).unwrap();
        let m = Target::H2.geodesic_point(&a, &b, 0.5).unwrap();
        assert!(Target::H2.distance(&mid, &m).unwrap() < 1e-10);
    }

    #[test]
    fn tree_solutions_lie_on_shared_segment() {
        let (t, rep) = tree_rep();
        let tree = TreeSpace::unit(2);
        let e = TreePoint::identity();
        let x = TreePoint::vertex(Word::parse_tree("x", 2).unwrap());
        for seed in 0..10 {
            let out = solve_harmonic(&t, &rep, &Init::Random { seed }, &SolverParams::default()).unwrap();
            assert_eq!(out.status, SolveStatus::Converged);
            assert!((out.energy - 20.0).abs() < 1e-9);
            let z = out.map.image(0).as_tree().unwrap();
            let off_segment = tree.distance(z, &e) + tree.distance(z, &x) - 1.0;
            assert!(off_segment < 1e-9);
            assert!(out.energy_monotone());
        }
    }
}
