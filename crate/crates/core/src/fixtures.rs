//! Concrete representations used by the shipped fixtures.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{h_distance, HIsometry, HPoint};
use crate::target::sl2::{isometry_from_sl2, sl2_from_isometry};
use crate::target::{Representation, Target, TargetIsometry, TreeSpace};
use crate::word::{SurfaceGroup, Word};

/// Circumradius of the regular octagon with interior angles π/4.
pub fn octagon_circumradius() -> f64 {
    let c = 1.0 / (PI / 8.0).tan();
    (c * c).acosh()
}

/// Corners `c_0, …, c_7` of the regular octagon, counterclockwise, placed
/// with `c_0` at the origin so the generators stay well conditioned.
pub fn octagon_corners() -> [HPoint; 8] {
    let r = octagon_circumradius();
    let centred: [HPoint; 8] = std::array::from_fn(|k| HPoint::from_polar(r, TAU * k as f64 / 8.0));
    let back = HIsometry::origin_to(&centred[0]).inverse();
    let mut c = centred.map(|p| back.apply(&p));
    c[0] = HPoint::ORIGIN;
    c
}

/// Centre of the octagon returned by [`octagon_corners`].
pub fn octagon_centre() -> HPoint {
    let c0 = HPoint::from_polar(octagon_circumradius(), 0.0);
    HIsometry::origin_to(&c0).inverse().apply(&HPoint::ORIGIN)
}

/// The isometry agreeing with `f` on the frame at `p` pointing to `q`.
fn refit(f: impl Fn(&HPoint) -> HPoint, p: &HPoint, q: &HPoint) -> Result<HIsometry> {
    HIsometry::from_frames(p, q, &f(p), &f(q))
}

/// Side-pairing construction of the generators; loses a few digits.
fn approximate_generators(c: &[HPoint; 8]) -> Result<Vec<HIsometry>> {
    let (p, q) = (c[0], c[1]);
    // side 0 is paired with side 2, side 1 with side 3
    let ta = HIsometry::from_frames(&c[0], &c[1], &c[3], &c[2])?;
    let tb = HIsometry::from_frames(&c[1], &c[2], &c[4], &c[3])?;
    let (tai, tbi) = (ta.inverse(), tb.inverse());
    // T_a = A B A⁻¹ and T_b = A B A⁻¹ B⁻¹ A⁻¹
    let a1 = refit(|x| tai.apply(&tbi.apply(&ta.apply(x))), &p, &q)?;
    let a1i = a1.inverse();
    let b1 = refit(|x| a1i.apply(&tbi.apply(&ta.apply(x))), &p, &q)?;
    // [a₁, b₁] = T_b A
    let g = refit(|x| tb.apply(&a1.apply(x)), &p, &q)?;
    let gi = g.inverse();
    // the second block's side pairings are the first block's rotated by π
    let rot = HIsometry::rotation_about(&octagon_centre(), PI);
    let roti = rot.inverse();
    let a2 = refit(|x| gi.apply(&rot.apply(&a1.apply(&roti.apply(&g.apply(x))))), &p, &q)?;
    let b2 = refit(|x| gi.apply(&rot.apply(&b1.apply(&roti.apply(&g.apply(x))))), &p, &q)?;
    Ok(vec![a1, b1, a2, b2])
}

/// Generators of the genus-2 surface group whose fundamental domain is the
/// regular octagon with boundary word `a₁ b₁ a₁⁻¹ b₁⁻¹ a₂ b₂ a₂⁻¹ b₂⁻¹`, so that
/// the prefix `P_k` of length `k` carries corner 0 to corner `k`.
///
/// `P_k` sends the edge `c₀c₁` to a tessellation edge at `c_k`, and those
/// edges are spaced by the corner angle π/4. Each prefix is snapped to its
/// exact frame and the generators are recovered as `P_k⁻¹ P_{k+1}`.
pub fn octagon_generators() -> Result<Vec<HIsometry>> {
    let c = octagon_corners();
    let approx = approximate_generators(&c)?;
    let letters = SurfaceGroup::new(2)?.boundary_letters();
    let mut prefix = HIsometry::identity();
    let mut exact = vec![HIsometry::identity()];
    for k in 1..=6 {
        let l = letters[k - 1];
        let m = if l.inverse { approx[l.generator].inverse() } else { approx[l.generator] };
        prefix = prefix.compose(&m);
        let image = prefix.apply(&c[1]);
        let snapped = (0..8)
            .map(|j| HIsometry::rotation_about(&c[k], PI / 4.0 * j as f64).apply(&c[(k + 1) % 8]))
            .min_by(|x, y| h_distance(x, &image).total_cmp(&h_distance(y, &image)))
            .expect("eight candidates");
        exact.push(HIsometry::from_frames(&c[0], &c[1], &c[k], &snapped)?);
    }
    let quotient = |k: usize| {
        let (lo, hi) = (exact[k].inverse(), exact[k + 1]);
        refit(|x| lo.apply(&hi.apply(x)), &c[0], &c[1])
    };
    Ok(vec![exact[1], quotient(1)?, quotient(4)?, quotient(5)?])
}

fn h2_images(gens: &[HIsometry]) -> Vec<TargetIsometry> {
    gens.iter().map(|m| TargetIsometry::H2(*m)).collect()
}

/// Holonomy of the regular octagon surface.
pub fn octagon_representation() -> Representation {
    let gens = octagon_generators().expect("regular octagon is non-degenerate");
    Representation::new(SurfaceGroup::new(2).expect("genus 2"), Target::H2, h2_images(&gens))
        .expect("octagon holonomy satisfies the relator")
}

/// SL(2, ℝ) lifts of the octagon generators.
pub fn octagon_sl2() -> Vec<Matrix2<f64>> {
    let gens = octagon_generators().expect("regular octagon is non-degenerate");
    gens.iter().map(sl2_from_isometry).collect()
}

fn commutator(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix2<f64> {
    let ai = a.try_inverse().expect("det 1");
    let bi = b.try_inverse().expect("det 1");
    a * b * ai * bi
}

fn sl2_exp(x: &Matrix2<f64>) -> Matrix2<f64> {
    // traceless X: X² = −det(X) I
    let d = -x.determinant();
    let (c, s) = if d > 0.0 {
        let r = d.sqrt();
        (r.cosh(), r.sinh() / r)
    } else if d < 0.0 {
        let r = (-d).sqrt();
        (r.cos(), r.sin() / r)
    } else {
        (1.0, 1.0)
    };
    Matrix2::identity() * c + x * s
}

fn sl2_basis(p: &[f64]) -> Matrix2<f64> {
    Matrix2::new(p[0], p[1], p[2], -p[0])
}

/// Lifts of a genus-2 representation after multiplying `a₁, b₁, a₂` by random
/// elements of size `size`, with `(a₂, b₂)` corrected by Gauss–Newton so the
/// relator holds again.
pub fn perturbed_sl2(base: &[Matrix2<f64>], size: f64, seed: u64) -> Result<Vec<Matrix2<f64>>> {
    if base.len() != 4 {
        return Err(Error::InvalidInput("perturbation is implemented for genus 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens = base.to_vec();
    for g in gens.iter_mut().take(3) {
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(-size..size)).collect();
        *g *= sl2_exp(&sl2_basis(&p));
    }
    let sign = {
        let r0 = commutator(&base[0], &base[1]) * commutator(&base[2], &base[3]);
        r0.trace().signum()
    };
    let c1 = commutator(&gens[0], &gens[1]);
    let residual = |a2: &Matrix2<f64>, b2: &Matrix2<f64>| {
        let r = c1 * commutator(a2, b2) * sign;
        DVector::from_vec(vec![r[(0, 0)] - 1.0, r[(0, 1)], r[(1, 0)]])
    };
    let (mut a2, mut b2) = (gens[2], gens[3]);
    for _ in 0..50 {
        let r = residual(&a2, &b2);
        if r.norm() < 1e-15 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(3, 6);
        for k in 0..6 {
            let mut p = [0.0; 3];
            p[k % 3] = h;
            let step = sl2_exp(&sl2_basis(&p));
            let (pa, pb) = if k < 3 { (a2 * step, b2) } else { (a2, b2 * step) };
            let mut q = [0.0; 3];
            q[k % 3] = -h;
            let back = sl2_exp(&sl2_basis(&q));
            let (ma, mb) = if k < 3 { (a2 * back, b2) } else { (a2, b2 * back) };
            let col = (residual(&pa, &pb) - residual(&ma, &mb)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let delta = jac.pseudo_inverse(1e-12).map_err(|e| Error::InvalidInput(e.to_string()))? * (-r);
        a2 *= sl2_exp(&sl2_basis(&[delta[0], delta[1], delta[2]]));
        b2 *= sl2_exp(&sl2_basis(&[delta[3], delta[4], delta[5]]));
    }
    gens[2] = a2;
    gens[3] = b2;
    Ok(gens)
}

pub fn representation_from_sl2(genus: usize, mats: &[Matrix2<f64>]) -> Result<Representation> {
    let images = mats.iter().map(|m| isometry_from_sl2(m).map(TargetIsometry::H2)).collect::<Result<Vec<_>>>()?;
    Representation::new(SurfaceGroup::new(genus)?, Target::H2, images)
}

/// Genus-2 images `(a, b, b, a)`: the relator reduces freely to the identity.
fn swapped_pair(a: HIsometry, b: HIsometry) -> Vec<HIsometry> {
    vec![a, b, b, a]
}

/// Two elliptic generators with distinct fixed points.
pub fn elliptic_rotations() -> Vec<HIsometry> {
    let p = HPoint::from_polar(0.6, 0.0);
    let q = HPoint::from_polar(0.6, 2.0);
    swapped_pair(HIsometry::rotation_about(&p, 2.0 * PI / 3.0), HIsometry::rotation_about(&q, 2.0 * PI / 5.0))
}

/// An elliptic and a hyperbolic generator.
pub fn mixed_elliptic_hyperbolic() -> Vec<HIsometry> {
    let p = HPoint::from_polar(0.4, 1.0);
    swapped_pair(HIsometry::rotation_about(&p, PI / 2.0), HIsometry::translation(1.1, 0.0))
}

/// A single hyperbolic translation on `a₁`, identity elsewhere.
pub fn hyperbolic_cyclic() -> Vec<HIsometry> {
    let id = HIsometry::identity();
    vec![HIsometry::translation(1.0, 0.0), id, id, id]
}

/// A single parabolic on `a₁`, identity elsewhere: the energy infimum is
/// approached only at the fixed boundary point.
pub fn parabolic_cyclic() -> Vec<HIsometry> {
    let id = HIsometry::identity();
    let g = isometry_from_sl2(&Matrix2::new(1.0, 1.0, 0.0, 1.0)).expect("unipotent has det 1");
    vec![g, id, id, id]
}

pub fn h2_representation(genus: usize, gens: &[HIsometry]) -> Result<Representation> {
    Representation::new(SurfaceGroup::new(genus)?, Target::H2, h2_images(gens))
}

/// `ρ(a₁) = xy`, `ρ(a₂) = xy⁻¹` on the unit rank-2 tree, identity elsewhere.
pub fn tree_overlapping_axes() -> Representation {
    let w = |s: &str| TargetIsometry::Tree(Word::parse_tree(s, 2).expect("static word"));
    Representation::new(
        SurfaceGroup::new(2).expect("genus 2"),
        Target::Tree(TreeSpace::unit(2)),
        vec![w("xy"), w("e"), w("xY"), w("e")],
    )
    .expect("relator is freely trivial")
}
