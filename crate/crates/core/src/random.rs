//! Seeded generators for test inputs: vectors of given norm, Γ generators,
//! and random isometry words.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::factor::{reflection_matrix, Transvection};
use crate::isometry::Isometry;
use crate::lattice::Lattice;
use crate::matrix::{unit, vadd, QMat, QVec};
use crate::rat::Rat;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small(rng: &mut Rng64, bound: i64) -> Rat {
    Rat::int(rng.gen_range(-bound..=bound))
}

/// Random integral vector supported away from `skip`, with entries in [−bound, bound].
fn random_support(lat: &Lattice, rng: &mut Rng64, skip: &[usize], bound: i64, density: f64) -> QVec {
    (0..lat.rank())
        .map(|i| if skip.contains(&i) || !rng.gen_bool(density) { Rat::zero() } else { small(rng, bound) })
        .collect()
}

/// A primitive vector e1 + b·e2 + z of norm `norm` (first plane), z random
/// and orthogonal to the first plane; `norm` must have the parity of the lattice.
pub fn vector_of_norm(lat: &Lattice, rng: &mut Rng64, norm: i64, bound: i64) -> QVec {
    let (p, q) = lat.planes()[0];
    let mut v = random_support(lat, rng, &[p, q], bound, 0.4);
    let zz = lat.norm(&v);
    // −2b + (z,z) = N
    let b = (zz - Rat::int(norm)) / Rat::int(2);
    assert!(b.is_integer(), "norm parity does not match the lattice");
    v[p] = Rat::one();
    v[q] = b;
    v
}

/// A random Eichler transvection E(e, a): e a frame vector, a ⊥ e with small entries.
pub fn random_transvection(lat: &Lattice, rng: &mut Rng64, bound: i64) -> QMat {
    let planes = lat.planes();
    let &(p, q) = planes.choose(rng).expect("lattice has hyperbolic planes");
    let (e_idx, partner) = if rng.gen_bool(0.5) { (p, q) } else { (q, p) };
    let e = unit(lat.rank(), e_idx);
    let mut a = random_support(lat, rng, &[partner], bound, 0.3);
    if a.iter().all(|x| x.is_zero()) {
        let others: Vec<usize> = (0..lat.rank()).filter(|&i| i != e_idx && i != partner).collect();
        a[*others.choose(rng).expect("rank > 2")] = Rat::one();
    }
    Transvection::new(lat, e, a).matrix()
}

/// A transvection word of the given length applied to `v`.
pub fn scramble(lat: &Lattice, rng: &mut Rng64, v: &[Rat], len: usize) -> QVec {
    let mut out = v.to_vec();
    for _ in 0..len {
        out = random_transvection(lat, rng, 1).mul_vec(&out);
    }
    out
}

/// ±ρ_u for a primitive u (with a δ-component when present) of norm N,
/// 0 < |N| ≤ max_norm, signed so the orientation character is +1.
pub fn random_signed_reflection(lat: &Lattice, rng: &mut Rng64, max_norm: i64) -> QMat {
    let (p, q) = lat.planes()[0];
    loop {
        let mut u = random_support(lat, rng, &[p, q], 1, 0.3);
        if let Some(d) = lat.delta() {
            u[d] = small(rng, 1);
        }
        let half = rng.gen_range(1..=max_norm / 2);
        let norm = if rng.gen_bool(0.5) { 2 * half } else { -2 * half };
        let b = (lat.norm(&u) - Rat::int(norm)) / Rat::int(2);
        if !b.is_integer() {
            continue;
        }
        u[p] = Rat::one();
        u[q] = b;
        let r = reflection_matrix(lat, &u);
        return if norm > 0 { r.neg() } else { r };
    }
}

/// An integral element of Γ: −ρ_{u+δ} with (u,u) = 2d+2, or ρ_r for a root r ∈ L.
pub fn random_gamma_element(lat: &Lattice, rng: &mut Rng64) -> QMat {
    let delta = lat.delta_vector().expect("lattice has delta");
    let d = -(lat.norm(&delta) / Rat::int(2));
    let dl = lat.delta().expect("lattice has delta");
    let l = lat.l_part().expect("lattice has delta");
    if rng.gen_bool(0.5) {
        let target = (Rat::int(2) * &d + Rat::int(2)).to_i64().expect("small");
        let v = vector_of_norm(&l, rng, target, 1);
        let u = lat.embed_l(&scramble(&l, rng, &v, 2));
        reflection_matrix(lat, &vadd(&u, &delta)).neg()
    } else {
        let v = vector_of_norm(&l, rng, -2, 1);
        let r = lat.embed_l(&scramble(&l, rng, &v, 2));
        debug_assert!(r[dl].is_zero());
        reflection_matrix(lat, &r)
    }
}

/// A word of 1..=max_len generators drawn from transvections, signed
/// reflections of norm |N| ≤ 12, and integral Γ elements.
pub fn random_oplus_word(lat: &Lattice, rng: &mut Rng64, max_len: usize) -> Isometry {
    let len = rng.gen_range(1..=max_len);
    let mut m = QMat::identity(lat.rank());
    for _ in 0..len {
        let g = match rng.gen_range(0..3) {
            0 => random_transvection(lat, rng, 2),
            1 => random_signed_reflection(lat, rng, 12),
            _ => random_gamma_element(lat, rng),
        };
        m = m.mul(&g);
    }
    Isometry::new(lat, m).expect("product of isometries")
}

/// A product of `len` reflections in random anisotropic vectors with entries in [−bound, bound].
pub fn random_reflection_word(lat: &Lattice, rng: &mut Rng64, len: usize, bound: i64) -> Isometry {
    let mut m = QMat::identity(lat.rank());
    let mut done = 0;
    while done < len {
        let u: QVec = (0..lat.rank()).map(|_| small(rng, bound)).collect();
        if lat.norm(&u).is_zero() {
            continue;
        }
        m = m.mul(&reflection_matrix(lat, &u));
        done += 1;
    }
    Isometry::new(lat, m).expect("product of reflections")
}

/// A random vector with entries in [−bound, bound].
pub fn random_vector(n: usize, rng: &mut Rng64, bound: i64) -> QVec {
    (0..n).map(|_| small(rng, bound)).collect()
}

/// A random rational vector with numerators in [−bound, bound] and denominators in 1..=den.
pub fn random_rational_vector(n: usize, rng: &mut Rng64, bound: i64, den: i64) -> QVec {
    (0..n).map(|_| Rat::new(rng.gen_range(-bound..=bound), rng.gen_range(1..=den))).collect()
}
