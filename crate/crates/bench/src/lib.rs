//! Benchmark inputs shared by the criterion targets.

use std::f64::consts::TAU;

use harmdom::surface::length_function_from_map;
use harmdom::{
    build_conical, fixtures, riemann_triangulation, solve_harmonic, ConicalSurface, EquivariantMap, GainTriangulation,
    Init, Representation, SPoint, SolverParams, SphericalPolygon,
};

pub struct Solved {
    pub triangulation: GainTriangulation,
    pub representation: Representation,
    pub map: EquivariantMap,
    pub surface: ConicalSurface,
}

pub fn octagon_start() -> (GainTriangulation, Representation, Init) {
    let t = riemann_triangulation(2).expect("genus 2");
    let rep = fixtures::octagon_representation();
    let init = Init::Map(EquivariantMap::constant(1, rep.target.base_point()));
    (t, rep, init)
}

pub fn solved_octagon() -> Solved {
    let (t, rep, init) = octagon_start();
    let out = solve_harmonic(&t, &rep, &init, &SolverParams::default()).expect("octagon solves");
    let l = length_function_from_map(&t, &rep, &out.map).expect("lengths");
    let surface = build_conical(&t, &l, 2).expect("surface");
    Solved { triangulation: t, representation: rep, map: out.map, surface }
}

/// A non-convex `n`-gon around the north pole with one vertex pulled in.
pub fn dented_polygon(n: usize) -> SphericalPolygon {
    let pts = (0..n)
        .map(|k| {
            let r = if k == 1 { 0.3 } else { 0.9 };
            SPoint::from_angles(r, k as f64 * TAU / n as f64)
        })
        .collect();
    SphericalPolygon::new(pts).expect("valid polygon")
}
