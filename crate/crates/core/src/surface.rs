//! Gain triangulations of closed surfaces and length functions on them.
//!
//! The universal cover is never built. A directed edge from `u` to `w` with
//! gain `γ` stands for the lifted edge from the base lift of `u` to `γ` times
//! the base lift of `w`; reversing the edge inverts the gain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::target::{EquivariantMap, Representation, TargetPoint};
use crate::word::{SurfaceGroup, Word};

/// Tolerance on `ℓ(e₁) − ℓ(e₂) − ℓ(e₃)` for flatness, and on zero lengths.
pub const FLAT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    #[serde(with = "surface_word")]
    pub gain: Word,
}

/// An edge used by a face, in a given orientation, with the gain the face sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub edge: usize,
    pub forward: bool,
    #[serde(with = "surface_word")]
    pub gain: Word,
}

/// Three directed edges `v0 → v1 → v2 → v0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub sides: [DirectedEdge; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainTriangulation {
    pub genus: usize,
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    pub faces: Vec<Face>,
}

mod surface_word {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Word, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&w.to_surface_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        // genus bound is checked by validate; accept any index here
        Word::parse_surface(&s, usize::MAX / 4).map_err(serde::de::Error::custom)
    }
}

impl GainTriangulation {
    pub fn group(&self) -> Result<SurfaceGroup> {
        SurfaceGroup::new(self.genus)
    }

    /// Tail vertex of a directed edge.
    pub fn dtail(&self, d: &DirectedEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.tail
        } else {
            e.head
        }
    }

    pub fn dhead(&self, d: &DirectedEdge) -> usize {
        let e = &self.edges[d.edge];
        if d.forward {
            e.head
        } else {
            e.tail
        }
    }

    /// Gain of a directed edge derived from the stored edge gain.
    pub fn dgain(&self, d: &DirectedEdge) -> Word {
        let g = &self.edges[d.edge].gain;
        if d.forward {
            g.clone()
        } else {
            g.inverse()
        }
    }

    pub fn directed(&self, edge: usize, forward: bool) -> DirectedEdge {
        let g = &self.edges[edge].gain;
        DirectedEdge { edge, forward, gain: if forward { g.clone() } else { g.inverse() } }
    }

    /// Corner vertices `(v0, v1, v2)` of a face.
    pub fn face_vertices(&self, face: usize) -> [usize; 3] {
        let s = &self.faces[face].sides;
        [self.dtail(&s[0]), self.dtail(&s[1]), self.dtail(&s[2])]
    }

    /// Deck elements placing the three corners of the lifted face: the lift of
    /// corner `k` is `w_k · x̃_{v_k}`.
    pub fn face_corner_words(&self, face: usize) -> [Word; 3] {
        let s = &self.faces[face].sides;
        let w1 = self.dgain(&s[0]);
        let w2 = w1.mul(&self.dgain(&s[1]));
        [Word::identity(), w1, w2]
    }

    /// Edge indices opposite corners `(v0, v1, v2)`.
    pub fn face_opposite_edges(&self, face: usize) -> [usize; 3] {
        let s = &self.faces[face].sides;
        [s[1].edge, s[2].edge, s[0].edge]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// Corners `(face, corner index)` incident to each vertex.
    pub fn vertex_corners(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.vertex_count];
        for f in 0..self.faces.len() {
            for (k, v) in self.face_vertices(f).into_iter().enumerate() {
                out[v].push((f, k));
            }
        }
        out
    }
}

/// One end of an edge, seen as a ray leaving the vertex at that end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HalfEdge {
    pub edge: usize,
    pub at_head: bool,
}

/// A face corner with the two rays bounding it, in counterclockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corner {
    pub face: usize,
    pub index: usize,
    pub first: HalfEdge,
    pub second: HalfEdge,
}

impl GainTriangulation {
    /// Vertex at the end of `h` and the deck element placing the far endpoint,
    /// relative to the base lift of the near endpoint.
    pub fn half_edge_neighbour(&self, h: HalfEdge) -> (usize, Word) {
        let e = &self.edges[h.edge];
        if h.at_head {
            (e.tail, e.gain.inverse())
        } else {
            (e.head, e.gain.clone())
        }
    }

    pub fn half_edge_vertex(&self, h: HalfEdge) -> usize {
        let e = &self.edges[h.edge];
        if h.at_head {
            e.head
        } else {
            e.tail
        }
    }

    /// Corner `k` of `face`: bounded by the ray along side `k` (leaving `v_k`)
    /// and the ray back along side `k + 2` (arriving at `v_k`).
    pub fn corner(&self, face: usize, k: usize) -> Corner {
        let s = &self.faces[face].sides;
        let out = &s[k];
        let back = &s[(k + 2) % 3];
        Corner {
            face,
            index: k,
            first: HalfEdge { edge: out.edge, at_head: !out.forward },
            second: HalfEdge { edge: back.edge, at_head: back.forward },
        }
    }

    /// Corners around each vertex in cyclic (counterclockwise) order, each
    /// corner followed by the one sharing its second ray.
    pub fn cyclic_corners(&self) -> Result<Vec<Vec<Corner>>> {
        let all: Vec<Corner> =
            (0..self.faces.len()).flat_map(|f| (0..3).map(move |k| (f, k))).map(|(f, k)| self.corner(f, k)).collect();
        let by_first: std::collections::HashMap<HalfEdge, usize> =
            all.iter().enumerate().map(|(i, c)| (c.first, i)).collect();
        if by_first.len() != all.len() {
            return Err(Error::InvalidInput("triangulation is not consistently oriented".into()));
        }
        let mut seen = vec![false; all.len()];
        let mut out = vec![Vec::new(); self.vertex_count];
        for start in 0..all.len() {
            if seen[start] {
                continue;
            }
            let v = self.half_edge_vertex(all[start].first);
            if !out[v].is_empty() {
                return Err(Error::InvalidInput(format!("vertex {v} has a disconnected link")));
            }
            let mut cur = start;
            loop {
                seen[cur] = true;
                out[v].push(all[cur]);
                cur = *by_first.get(&all[cur].second).ok_or_else(|| {
                    Error::InvalidInput("a corner ray is not shared with a neighbouring face".into())
                })?;
                if cur == start {
                    break;
                }
                if seen[cur] {
                    return Err(Error::InvalidInput("corner cycle does not close".into()));
                }
            }
        }
        Ok(out)
    }

    /// For each edge, the two `(face, side index)` uses.
    pub fn edge_uses(&self) -> Vec<Vec<(usize, usize)>> {
        let mut uses = vec![Vec::new(); self.edges.len()];
        for (f, face) in self.faces.iter().enumerate() {
            for (m, s) in face.sides.iter().enumerate() {
                uses[s.edge].push((f, m));
            }
        }
        uses
    }

    /// Move the base lift of `v` to `k · x̃_v`: gains of edges leaving `v` are
    /// premultiplied by `k⁻¹`, gains of edges arriving postmultiplied by `k`.
    pub fn rerooted(&self, v: usize, k: &Word) -> GainTriangulation {
        let mut t = self.clone();
        for e in &mut t.edges {
            if e.tail == v {
                e.gain = k.inverse().mul(&e.gain);
            }
            if e.head == v {
                e.gain = e.gain.mul(k);
            }
        }
        for f in 0..t.faces.len() {
            for m in 0..3 {
                let d = &t.faces[f].sides[m];
                let fresh = t.directed(d.edge, d.forward);
                t.faces[f].sides[m] = fresh;
            }
        }
        t
    }
}

/// One-vertex triangulation obtained by folding the standard `4g`-gon with
/// boundary word `a₁ b₁ a₁⁻¹ b₁⁻¹ ⋯`, coned off from corner 0.
///
/// Edge `2i` carries `a_{i+1}`, edge `2i + 1` carries `b_{i+1}`; the remaining
/// edges are the diagonals from corner 0 to corner `k` (`k = 2 … 4g − 2`) with
/// gain the length-`k` prefix of the boundary word.
pub fn riemann_triangulation(genus: usize) -> Result<GainTriangulation> {
    let group = SurfaceGroup::new(genus)?;
    let letters = group.boundary_letters();
    let n = 4 * genus;
    let mut edges: Vec<Edge> = (0..2 * genus)
        .map(|g| Edge { tail: 0, head: 0, gain: Word::letter(crate::word::Letter::pos(g)) })
        .collect();
    let prefix = |k: usize| Word::from_letters(letters[..k].iter().copied());
    let diag_base = edges.len();
    for k in 2..=n - 2 {
        edges.push(Edge { tail: 0, head: 0, gain: prefix(k) });
    }
    let diag = |k: usize| diag_base + (k - 2);
    let mut t = GainTriangulation { genus, vertex_count: 1, edges, faces: Vec::new() };
    let side = |t: &GainTriangulation, k: usize| {
        let l = letters[k];
        t.directed(l.generator, !l.inverse)
    };
    let mut faces = Vec::with_capacity(n - 2);
    for k in 1..=n - 2 {
        let first = if k == 1 { side(&t, 0) } else { t.directed(diag(k), true) };
        let middle = side(&t, k);
        let last = if k + 1 == n - 1 { side(&t, n - 1) } else { t.directed(diag(k + 1), false) };
        faces.push(Face { sides: [first, middle, last] });
    }
    t.faces = faces;
    Ok(t)
}

/// One failed invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    VertexOutOfRange { edge: usize },
    EdgeOutOfRange { face: usize },
    BrokenFaceCycle { face: usize },
    EdgeUseCount { edge: usize, uses: usize },
    GainMismatch { face: usize, side: usize },
    FaceGainNotTrivial { face: usize, product: String },
    EulerCharacteristic { expected: i64, found: i64 },
    FaceEdgeCount { faces: usize, edges: usize },
    GainOutOfGroup { edge: usize },
    BadGenus { genus: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub violations: Vec<Violation>,
}

impl Diagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every structural invariant, collecting all violations.
pub fn validate(t: &GainTriangulation) -> Diagnostics {
    let mut v = Vec::new();
    let group = match t.group() {
        Ok(g) => Some(g),
        Err(_) => {
            v.push(Violation::BadGenus { genus: t.genus });
            None
        }
    };
    for (i, e) in t.edges.iter().enumerate() {
        if e.tail >= t.vertex_count || e.head >= t.vertex_count {
            v.push(Violation::VertexOutOfRange { edge: i });
        }
        if e.gain.letters().iter().any(|l| l.generator >= 2 * t.genus) {
            v.push(Violation::GainOutOfGroup { edge: i });
        }
    }
    let mut uses = vec![0usize; t.edges.len()];
    for (f, face) in t.faces.iter().enumerate() {
        if face.sides.iter().any(|s| s.edge >= t.edges.len()) {
            v.push(Violation::EdgeOutOfRange { face: f });
            continue;
        }
        if t.edges.iter().any(|e| e.tail >= t.vertex_count || e.head >= t.vertex_count) {
            // cycle checks are meaningless with dangling endpoints
        } else {
            for k in 0..3 {
                if t.dhead(&face.sides[k]) != t.dtail(&face.sides[(k + 1) % 3]) {
                    v.push(Violation::BrokenFaceCycle { face: f });
                    break;
                }
            }
        }
        for (k, s) in face.sides.iter().enumerate() {
            uses[s.edge] += 1;
            if s.gain != t.dgain(s) {
                v.push(Violation::GainMismatch { face: f, side: k });
            }
        }
        if let Some(group) = &group {
            let product = face.sides.iter().fold(Word::identity(), |acc, s| acc.mul(&s.gain));
            if !group.is_relator_conjugate(&product) {
                v.push(Violation::FaceGainNotTrivial { face: f, product: product.to_surface_string() });
            }
        }
    }
    for (i, &u) in uses.iter().enumerate() {
        if u != 2 {
            v.push(Violation::EdgeUseCount { edge: i, uses: u });
        }
    }
    let expected = 2 - 2 * t.genus as i64;
    let found = t.euler_characteristic();
    if expected != found {
        v.push(Violation::EulerCharacteristic { expected, found });
    }
    if 3 * t.faces.len() != 2 * t.edges.len() {
        v.push(Violation::FaceEdgeCount { faces: t.faces.len(), edges: t.edges.len() });
    }
    Diagnostics { violations: v }
}

/// Nonnegative lengths indexed by edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthFunction {
    pub lengths: Vec<f64>,
}

impl LengthFunction {
    pub fn new(lengths: Vec<f64>) -> Self {
        LengthFunction { lengths }
    }

    pub fn constant(t: &GainTriangulation, value: f64) -> Self {
        LengthFunction { lengths: vec![value; t.edges.len()] }
    }

    /// Side lengths `(a, b, c)` opposite the corners `(v0, v1, v2)` of a face.
    pub fn face_sides(&self, t: &GainTriangulation, face: usize) -> [f64; 3] {
        t.face_opposite_edges(face).map(|e| self.lengths[e])
    }

    /// Largest triangle-inequality excess over all faces, with its face.
    pub fn max_excess(&self, t: &GainTriangulation) -> (usize, f64) {
        let mut worst = (0, f64::NEG_INFINITY);
        for f in 0..t.faces.len() {
            let [a, b, c] = self.face_sides(t, f);
            let excess = (a - b - c).max(b - c - a).max(c - a - b);
            if excess > worst.1 {
                worst = (f, excess);
            }
        }
        worst
    }

    pub fn check(&self, t: &GainTriangulation) -> Result<()> {
        if self.lengths.len() != t.edges.len() {
            return Err(Error::InvalidInput(format!(
                "length function has {} entries for {} edges",
                self.lengths.len(),
                t.edges.len()
            )));
        }
        if let Some(bad) = self.lengths.iter().position(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidInput(format!("edge {bad} has invalid length {}", self.lengths[bad])));
        }
        let (face, excess) = self.max_excess(t);
        if excess > FLAT_TOL {
            return Err(Error::NotALengthFunction { face, excess });
        }
        Ok(())
    }
}

/// `ℓ_F(e) = d_X(F(u), ρ(γ) F(w))` for each edge `u → w` with gain `γ`.
pub fn length_function_from_map(
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
) -> Result<LengthFunction> {
    let lengths = t
        .edges
        .iter()
        .map(|e| {
            let head = rep.apply_word(&e.gain, f.image(e.head))?;
            rep.target.distance(f.image(e.tail), &head)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LengthFunction { lengths })
}

/// Images of the three lifted corners of a face under the equivariant map.
pub fn lifted_face(
    t: &GainTriangulation,
    rep: &Representation,
    f: &EquivariantMap,
    face: usize,
) -> Result<[TargetPoint; 3]> {
    let verts = t.face_vertices(face);
    let words = t.face_corner_words(face);
    let mut out = Vec::with_capacity(3);
    for k in 0..3 {
        out.push(rep.apply_word(&words[k], f.image(verts[k]))?);
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

/// Faces and edges where a length function degenerates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlattenReport {
    pub flat_faces: Vec<usize>,
    pub flat_edges: Vec<usize>,
}

impl FlattenReport {
    pub fn is_empty(&self) -> bool {
        self.flat_faces.is_empty() && self.flat_edges.is_empty()
    }
}

pub fn flatten_report(t: &GainTriangulation, l: &LengthFunction) -> Result<FlattenReport> {
    l.check(t)?;
    let flat_edges: Vec<usize> = (0..t.edges.len()).filter(|&e| l.lengths[e] <= FLAT_TOL).collect();
    let flat_faces = (0..t.faces.len())
        .filter(|&f| {
            let [a, b, c] = l.face_sides(t, f);
            (a - b - c).max(b - c - a).max(c - a - b) >= -FLAT_TOL
        })
        .collect();
    Ok(FlattenReport { flat_faces, flat_edges })
}
