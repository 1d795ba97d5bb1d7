//! Discrete harmonic equivariant maps from a triangulated closed surface into
//! CAT(−1) targets, the conical hyperbolic surfaces they induce, and sampled
//! certificates that the induced map is 1-Lipschitz.

pub mod conical;
pub mod desing;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod harmonic;
pub mod pipeline;
pub mod rigidity;
pub mod surface;
pub mod target;
pub mod word;

pub use conical::{
    build_conical, curvature_certificate, gauss_bonnet_residual, lipschitz_sample_check, ConicalSurface,
    CurvatureCertificate, DominationReport,
};
pub use desing::{choose_epsilon, classify_degeneracy, perturb, DegeneracyClass, EpsilonChoice, PerturbationPlan};
pub use error::{Error, Result};
pub use geometry::{HIsometry, HPoint, Kappa, SPoint, TriangleShape};
pub use harmonic::{solve_harmonic, Init, Method, SolveOutcome, SolveStatus, SolverParams};
pub use pipeline::{emit_fixture, run_pipeline, run_stage, PipelineConfig, PipelineReport, Stage};
pub use rigidity::{
    link_polygon, majorize_spherical_polygon, rigidity_detect, spherical_polygon_radius, LinkPolygon,
    RigidityStatus, RigidityVerdict, SphericalPolygon,
};
pub use surface::{riemann_triangulation, GainTriangulation, LengthFunction};
pub use target::{EquivariantMap, Representation, Target, TargetIsometry, TargetPoint};
pub use word::{SurfaceGroup, Word};
