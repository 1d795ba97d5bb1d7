use harmdom::pipeline::{CERTIFIED, DIVERGED, DIVERGED_NOTE, FIXTURE_NAMES, NONSTANDARD_NOTE, TRIVIAL_NOTE};
use harmdom::*;

fn report(name: &str) -> PipelineReport {
    run_pipeline(&emit_fixture(name).unwrap()).unwrap()
}

#[test]
fn reports_are_deterministic_and_round_trip() {
    for name in ["fuchsian_octagon_g2", "tree_overlapping_axes", "elliptic_rotations"] {
        let a = report(name).to_json();
        let b = report(name).to_json();
        assert_eq!(a, b, "{name} is not deterministic");
        let parsed = PipelineReport::from_json(&a).unwrap();
        assert_eq!(parsed.to_json(), a);
    }
}

#[test]
fn emitted_fixtures_reparse_identically() {
    for name in FIXTURE_NAMES {
        let c = emit_fixture(name).unwrap();
        let again = PipelineConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_json(), c.to_json());
    }
    assert!(emit_fixture("no_such_fixture").is_err());
}

#[test]
fn fixture_statuses() {
    let octagon = report("fuchsian_octagon_g2");
    assert_eq!(octagon.status, CERTIFIED);
    assert!(octagon.domination.as_ref().unwrap().passed);
    assert_eq!(octagon.rigidity.as_ref().unwrap().verdict.status, RigidityStatus::Rigid);

    let trivial = report("trivial_rep");
    assert!(trivial.certified());
    assert!(trivial.notes.iter().any(|n| n == TRIVIAL_NOTE));

    let tree = report("tree_overlapping_axes");
    assert!(tree.certified());
    assert!(tree.notes.iter().any(|n| n == NONSTANDARD_NOTE));
    let desing = tree.desingularization.as_ref().unwrap();
    assert!(matches!(desing.choice, EpsilonChoice::Perturb(_)));
    assert!(desing.composite_domination.as_ref().unwrap().passed);

    for name in ["elliptic_rotations", "mixed_elliptic_hyperbolic"] {
        let r = report(name);
        assert!(r.certified(), "{name}");
        assert_eq!(r.rigidity.as_ref().unwrap().verdict.status, RigidityStatus::NotRigid);
    }
}

#[test]
fn parabolic_fixture_diverges() {
    let mut config = emit_fixture("parabolic_cyclic_divergent").unwrap();
    // a short cap keeps the debug build quick; the sweep cap is a divergence reason of its own
    config.solver.max_iter = 2000;
    let r = run_pipeline(&config).unwrap();
    assert!(r.diverged());
    assert_eq!(r.status, DIVERGED);
    assert!(r.notes.iter().any(|n| n == DIVERGED_NOTE));
    assert!(r.solver.displacement_monotone);
    assert!(r.surface.is_none());
}

#[test]
fn stages_stop_where_asked() {
    let config = emit_fixture("fuchsian_octagon_g2").unwrap();
    let solve = run_stage(&config, Stage::Solve).unwrap();
    assert!(solve.surface.is_none() && solve.domination.is_none() && solve.rigidity.is_none());
    let certify = run_stage(&config, Stage::Certify).unwrap();
    assert!(certify.domination.is_some() && certify.rigidity.is_none());
    let rigidity = run_stage(&config, Stage::Rigidity).unwrap();
    assert!(rigidity.rigidity.is_some());
}
