//! Configuration, shipped fixtures, the end-to-end run and its report.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::conical::{
    build_conical, curvature_certificate, gauss_bonnet_residual, lipschitz_sample_check, CurvatureCertificate,
    DominationReport,
};
use crate::desing::{
    choose_epsilon, classify_degeneracy, composite_lipschitz_check, perturb, Degeneracy, DegeneracyClass,
    EpsilonChoice,
};
use crate::error::{Error, Result};
use crate::fixtures;
use crate::geometry::HIsometry;
use crate::harmonic::{solve_harmonic, DivergenceReason, Init, Method, SolveOutcome, SolveStatus, SolverParams};
use crate::rigidity::{link_polygon, rigidity_detect, LinkPolygon, RigidityVerdict, DEFAULT_TOL};
use crate::surface::{length_function_from_map, riemann_triangulation, validate, FlattenReport, GainTriangulation};
use crate::target::sl2::{isometry_from_sl2, sl2_from_isometry};
use crate::target::{EquivariantMap, RelatorCheck, Representation, Target, TargetIsometry, TreeSpace};
use crate::word::{SurfaceGroup, Word};

pub const CERTIFIED: &str = "conical domination certified; smooth uniformization out of scope";
pub const NOT_CERTIFIED: &str = "domination not certified";
pub const DIVERGED: &str = "diverged";
pub const DIVERGED_NOTE: &str =
    "the solver diverged; the analysis of representations fixing a boundary point is out of scope";
pub const TRIVIAL_NOTE: &str = "the equivariant map is constant: trivially dominated by any Fuchsian representation";
pub const NONSTANDARD_NOTE: &str = "nonstandard degeneracy: a face has all edges at zero length";

pub const FIXTURE_NAMES: [&str; 7] = [
    "fuchsian_octagon_g2",
    "tree_overlapping_axes",
    "trivial_rep",
    "elliptic_rotations",
    "hyperbolic_cyclic_divergent",
    "mixed_elliptic_hyperbolic",
    "parabolic_cyclic_divergent",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    H2,
    Tree {
        rank: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        edge_lengths: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TriangulationConfig {
    /// Only `"riemann"` is recognised.
    Named(String),
    Explicit(GainTriangulation),
}

impl Default for TriangulationConfig {
    fn default() -> Self {
        TriangulationConfig::Named("riemann".into())
    }
}

/// Image of one generator: an `SL(2, ℝ)` matrix (rows) or a tree word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorImage {
    Matrix([[f64; 2]; 2]),
    Word(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    /// Every vertex at the target's base point.
    #[default]
    BasePoint,
    Random {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub pairs: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { pairs: 10_000, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub genus: usize,
    #[serde(default)]
    pub triangulation: TriangulationConfig,
    pub target: TargetConfig,
    pub representation: Vec<GeneratorImage>,
    #[serde(default)]
    pub init: InitConfig,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub sampling: SamplingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(&serde_json::to_value(self).expect("config serializes"))
    }

    pub fn triangulation(&self) -> Result<GainTriangulation> {
        let t = match &self.triangulation {
            TriangulationConfig::Named(n) if n == "riemann" => riemann_triangulation(self.genus)?,
            TriangulationConfig::Named(n) => return Err(Error::InvalidInput(format!("unknown triangulation `{n}`"))),
            TriangulationConfig::Explicit(t) => t.clone(),
        };
        if t.genus != self.genus {
            return Err(Error::InvalidInput(format!("triangulation has genus {}, config {}", t.genus, self.genus)));
        }
        let diag = validate(&t);
        if !diag.is_valid() {
            return Err(Error::InvalidInput(format!("invalid triangulation: {:?}", diag.violations)));
        }
        Ok(t)
    }

    /// Parse the generator images and run the relator check.
    pub fn representation(&self) -> Result<Representation> {
        let group = SurfaceGroup::new(self.genus)?;
        let (target, images) = match &self.target {
            TargetConfig::H2 => {
                let images = self
                    .representation
                    .iter()
                    .map(|g| match g {
                        GeneratorImage::Matrix(m) => {
                            isometry_from_sl2(&Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])).map(TargetIsometry::H2)
                        }
                        GeneratorImage::Word(w) => {
                            Err(Error::InvalidInput(format!("H² generators must be matrices, got word `{w}`")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (Target::H2, images)
            }
            TargetConfig::Tree { rank, edge_lengths } => {
                let tree = match edge_lengths {
                    Some(l) => TreeSpace::new(*rank, l.clone())?,
                    None => TreeSpace::unit(*rank),
                };
                let images = self
                    .representation
                    .iter()
                    .map(|g| match g {
                        GeneratorImage::Word(w) => Word::parse_tree(w, *rank).map(TargetIsometry::Tree),
                        GeneratorImage::Matrix(_) => {
                            Err(Error::InvalidInput("tree generators must be words".into()))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                (Target::Tree(tree), images)
            }
        };
        Representation::new(group, target, images)
    }

    fn init(&self, rep: &Representation, vertex_count: usize) -> Init {
        match self.init {
            InitConfig::BasePoint => Init::Map(EquivariantMap::constant(vertex_count, rep.target.base_point())),
            InitConfig::Random { seed } => Init::Random { seed },
        }
    }
}

fn h2_config(name: &str, gens: &[HIsometry]) -> PipelineConfig {
    let rows = gens
        .iter()
        .map(|g| {
            let m = sl2_from_isometry(g);
            GeneratorImage::Matrix([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
        })
        .collect();
    config(name, TargetConfig::H2, rows)
}

fn config(name: &str, target: TargetConfig, representation: Vec<GeneratorImage>) -> PipelineConfig {
    PipelineConfig {
        name: Some(name.into()),
        genus: 2,
        triangulation: TriangulationConfig::default(),
        target,
        representation,
        init: InitConfig::BasePoint,
        solver: SolverParams::default(),
        sampling: SamplingConfig::default(),
        output: None,
    }
}

pub fn emit_fixture(name: &str) -> Result<PipelineConfig> {
    let id = HIsometry::identity();
    Ok(match name {
        "fuchsian_octagon_g2" => {
            let rows = fixtures::octagon_sl2()
                .iter()
                .map(|m| GeneratorImage::Matrix([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]))
                .collect();
            config(name, TargetConfig::H2, rows)
        }
        "tree_overlapping_axes" => config(
            name,
            TargetConfig::Tree { rank: 2, edge_lengths: None },
            ["xy", "e", "xY", "e"].iter().map(|w| GeneratorImage::Word((*w).into())).collect(),
        ),
        "trivial_rep" => h2_config(name, &[id; 4]),
        "elliptic_rotations" => h2_config(name, &fixtures::elliptic_rotations()),
        "hyperbolic_cyclic_divergent" => h2_config(name, &fixtures::hyperbolic_cyclic()),
        "mixed_elliptic_hyperbolic" => h2_config(name, &fixtures::mixed_elliptic_hyperbolic()),
        "parabolic_cyclic_divergent" => h2_config(name, &fixtures::parabolic_cyclic()),
        other => return Err(Error::UnknownFixture(other.into())),
    })
}

/// Which part of the pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Solve,
    Certify,
    Desing,
    Rigidity,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub method: Method,
    pub status: SolveStatus,
    pub energy: f64,
    pub iterations: usize,
    pub max_residual: f64,
    pub divergence: Option<DivergenceReason>,
    pub energy_monotone: bool,
    pub displacement_monotone: bool,
    pub final_displacement: f64,
}

impl SolverSummary {
    fn new(method: Method, out: &SolveOutcome) -> Self {
        SolverSummary {
            method,
            status: out.status,
            energy: out.energy,
            iterations: out.iterations,
            max_residual: out.max_residual(),
            divergence: out.divergence,
            energy_monotone: out.energy_monotone(),
            displacement_monotone: out.displacement_monotone(),
            final_displacement: out.trace.last().map_or(0.0, |e| e.displacement),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSection {
    pub lengths: Vec<f64>,
    pub flatten: FlattenReport,
    pub cone_angles: Vec<f64>,
    pub total_area: f64,
    pub gauss_bonnet_residual: f64,
    pub certificate: CurvatureCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesingSection {
    pub choice: EpsilonChoice,
    pub perturbed_cone_angles: Option<Vec<f64>>,
    pub perturbed_certificate: Option<CurvatureCertificate>,
    pub composite_domination: Option<DominationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigiditySection {
    pub verdict: RigidityVerdict,
    pub link: LinkPolygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub harmdom: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub status: String,
    pub notes: Vec<String>,
    pub versions: Versions,
    pub config: PipelineConfig,
    pub relator: RelatorCheck,
    pub solver: SolverSummary,
    pub surface: Option<SurfaceSection>,
    pub degeneracy: Option<Degeneracy>,
    pub desingularization: Option<DesingSection>,
    pub domination: Option<DominationReport>,
    pub rigidity: Option<RigiditySection>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        to_canonical_json(&serde_json::to_value(self).expect("report serializes"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("report: {e}")))
    }

    pub fn diverged(&self) -> bool {
        self.solver.status == SolveStatus::Diverged
    }

    pub fn certified(&self) -> bool {
        self.status == CERTIFIED
    }
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    run_stage(config, Stage::Full)
}

/// `solve → build → classify →` certificate, domination and rigidity, or
/// the perturbation path for degenerate length functions.
pub fn run_stage(config: &PipelineConfig, stage: Stage) -> Result<PipelineReport> {
    let t = config.triangulation()?;
    let rep = config.representation()?;
    let relator = rep.relator_check()?;
    let out = solve_harmonic(&t, &rep, &config.init(&rep, t.vertex_count), &config.solver)?;
    let mut report = PipelineReport {
        status: NOT_CERTIFIED.into(),
        notes: Vec::new(),
        versions: Versions { harmdom: env!("CARGO_PKG_VERSION").into() },
        config: config.clone(),
        relator,
        solver: SolverSummary::new(config.solver.method, &out),
        surface: None,
        degeneracy: None,
        desingularization: None,
        domination: None,
        rigidity: None,
    };
    if out.status == SolveStatus::Diverged {
        report.status = DIVERGED.into();
        report.notes.push(DIVERGED_NOTE.into());
        return Ok(report);
    }
    if stage == Stage::Solve {
        report.status = "solved".into();
        return Ok(report);
    }
    let (pairs, seed) = (config.sampling.pairs, config.sampling.seed);
    let l = length_function_from_map(&t, &rep, &out.map)?;
    let c = build_conical(&t, &l, t.genus)?;
    let certificate = curvature_certificate(&c);
    report.surface = Some(SurfaceSection {
        lengths: l.lengths.clone(),
        flatten: c.flatten.clone(),
        cone_angles: c.cone_angles.clone(),
        total_area: c.total_area,
        gauss_bonnet_residual: gauss_bonnet_residual(&c),
        certificate: certificate.clone(),
    });
    let deg = classify_degeneracy(&t, &l, &c.cone_angles)?;
    if deg.nonstandard {
        report.notes.push(NONSTANDARD_NOTE.into());
    }
    report.degeneracy = Some(deg.clone());
    let mut certified = false;
    let mut rigidity_wanted = matches!(stage, Stage::Rigidity | Stage::Full);
    if deg.class == DegeneracyClass::NonDegenerate {
        if matches!(stage, Stage::Certify | Stage::Full) {
            let dom = lipschitz_sample_check(&c, &t, &rep, &out.map, pairs, seed)?;
            certified = certificate.passed() && dom.passed;
            report.domination = Some(dom);
        }
    } else if matches!(stage, Stage::Desing | Stage::Full | Stage::Certify) {
        let choice = choose_epsilon(&t, &l, &c)?;
        let mut section = DesingSection {
            choice: choice.clone(),
            perturbed_cone_angles: None,
            perturbed_certificate: None,
            composite_domination: None,
        };
        match &choice {
            EpsilonChoice::FixedPointConstant => {
                report.notes.push(TRIVIAL_NOTE.into());
                certified = true;
                rigidity_wanted = false;
            }
            EpsilonChoice::Rigidity => rigidity_wanted = true,
            EpsilonChoice::Perturb(plan) => {
                let cp = build_conical(&t, &perturb(&l, plan.epsilon)?, t.genus)?;
                let cert = curvature_certificate(&cp);
                let dom = composite_lipschitz_check(&cp, &c, plan.epsilon, &t, &rep, &out.map, pairs, seed)?;
                certified = cert.passed() && dom.passed;
                section.perturbed_cone_angles = Some(cp.cone_angles.clone());
                section.perturbed_certificate = Some(cert);
                section.composite_domination = Some(dom);
                rigidity_wanted = false;
            }
        }
        report.desingularization = Some(section);
    }
    if rigidity_wanted && deg.flat_edges.is_empty() {
        let mut sections = Vec::new();
        for v in 0..t.vertex_count {
            let link = link_polygon(&t, &rep, &out.map, v)?;
            let verdict = rigidity_detect(&link, DEFAULT_TOL);
            sections.push(RigiditySection { verdict, link });
        }
        // report the vertex with the largest angle-sum residual
        report.rigidity = sections.into_iter().max_by(|a, b| {
            a.verdict.angle_sum_residual.total_cmp(&b.verdict.angle_sum_residual)
        });
    } else if rigidity_wanted {
        report.notes.push("rigidity test skipped: some edge has zero length".into());
    }
    if certified {
        report.status = CERTIFIED.into();
    } else if stage == Stage::Rigidity || stage == Stage::Desing {
        report.status = format!("{stage:?} stage complete").to_lowercase();
    }
    Ok(report)
}

/// Pretty JSON with sorted keys and every float written with 17 significant
/// digits, so identical inputs give identical bytes.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format!("{:.16e}", n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&m[*k], depth + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let v = serde_json::json!({"b": 0.1, "a": [1, 2.5e-300], "c": "x\"y"});
        let s = to_canonical_json(&v);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn fixtures_round_trip_and_parse() {
        for name in FIXTURE_NAMES {
            let c = emit_fixture(name).unwrap();
            let back = PipelineConfig::from_json(&c.to_json()).unwrap();
            assert_eq!(back, c, "{name}");
            back.representation().unwrap();
            back.triangulation().unwrap();
        }
        assert_eq!(emit_fixture("nope"), Err(Error::UnknownFixture("nope".into())));
    }

    #[test]
    fn schema_violations_are_rejected() {
        let mut v = serde_json::to_value(emit_fixture("trivial_rep").unwrap()).unwrap();
        v["colour"] = Value::from("blue");
        assert!(PipelineConfig::from_json(&v.to_string()).is_err());
        let mut c = emit_fixture("trivial_rep").unwrap();
        c.representation[0] = GeneratorImage::Matrix([[2.0, 0.0], [0.0, 2.0]]);
        assert!(c.representation().is_err());
        let mut c = emit_fixture("fuchsian_octagon_g2").unwrap();
        c.representation.swap(0, 1);
        assert!(matches!(c.representation(), Err(Error::RelatorCheck(_))));
    }
}
