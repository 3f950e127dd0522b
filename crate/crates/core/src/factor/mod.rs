//! Reflections, Eichler transvections, Witt maps, Cartan–Dieudonné, and the
//! factorization of rational isometries of L + Z delta into monodromy
//! operators and reflections.

mod decompose;
mod eichler;

pub use decompose::{decompose, evaluate_normal_form, verify_normal_form, NormalForm, VerifyFailure, VerifyReport};
pub use eichler::{
    eichler_move, eichler_normal_form, eichler_transvection, move_into_l, move_rational_into_lq, positive_reflection_rewrite,
    EichlerMove, RationalMove, Transvection, TransvectionWord,
};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::isometry::Isometry;
use crate::lattice::Lattice;
use crate::matrix::{dot, is_zero_vec, primitive_on_ray, vadd, vscale, vsub, QMat, QVec};
use crate::rat::Rat;

/// A reflection, stored by the primitive integral vector on its line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReflectionDatum {
    pub u: QVec,
    pub norm: Rat,
}

impl ReflectionDatum {
    pub fn new(lat: &Lattice, u: &[Rat]) -> Result<ReflectionDatum> {
        check_dim(lat.rank(), u.len())?;
        if is_zero_vec(u) || lat.norm(u).is_zero() {
            return Err(Error::Isotropic("reflection vector"));
        }
        let (p, _) = primitive_on_ray(u);
        let norm = lat.norm(&p);
        Ok(ReflectionDatum { u: p, norm })
    }

    pub fn matrix(&self, lat: &Lattice) -> QMat {
        reflection_matrix(lat, &self.u)
    }
}

/// `x ↦ x − 2(u,x)/(u,u) u`; `u` must be anisotropic.
pub fn reflection_matrix(lat: &Lattice, u: &[Rat]) -> QMat {
    let gu = lat.dual(u);
    let c = Rat::int(2) / lat.norm(u);
    let n = lat.rank();
    let mut m = QMat::identity(n);
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        let cu = &c * ui;
        for (j, gj) in gu.iter().enumerate() {
            if !gj.is_zero() {
                m[(i, j)] -= &cu * gj;
            }
        }
    }
    m
}

pub fn reflect(lat: &Lattice, u: &[Rat]) -> Result<Isometry> {
    check_dim(lat.rank(), u.len())?;
    if lat.norm(u).is_zero() {
        return Err(Error::Isotropic("reflection vector"));
    }
    Ok(Isometry::trusted(lat, reflection_matrix(lat, u)))
}

pub fn reflect_vec(lat: &Lattice, u: &[Rat], x: &[Rat]) -> QVec {
    let c = Rat::int(2) * lat.pair(u, x) / lat.norm(u);
    vsub(x, &vscale(&c, u))
}

/// An isometry sending `x` to `y` (equal nonzero norms): ρ_{x−y} when x−y is
/// anisotropic, otherwise −ρ_{x+y}; the identity when x = y.
pub fn witt_map(lat: &Lattice, x: &[Rat], y: &[Rat]) -> Result<Isometry> {
    check_dim(lat.rank(), x.len())?;
    check_dim(lat.rank(), y.len())?;
    let nx = lat.norm(x);
    if nx != lat.norm(y) {
        return Err(Error::NormMismatch(nx.to_string(), lat.norm(y).to_string()));
    }
    if nx.is_zero() {
        return Err(Error::Isotropic("witt_map argument"));
    }
    if x == y {
        return Ok(Isometry::identity(lat.rank()));
    }
    let d = vsub(x, y);
    if !lat.norm(&d).is_zero() {
        return Ok(Isometry::trusted(lat, reflection_matrix(lat, &d)));
    }
    let s = vadd(x, y);
    assert!(!lat.norm(&s).is_zero(), "x-y and x+y both isotropic with (x,x) != 0");
    Ok(Isometry::trusted(lat, reflection_matrix(lat, &s).neg()))
}

/// Writes `f` as an ordered product ρ_{u_1} ⋯ ρ_{u_k} of at most rank(V) reflections.
pub fn cartan_dieudonne(lat: &Lattice, f: &Isometry) -> Result<Vec<ReflectionDatum>> {
    check_dim(lat.rank(), f.rank())?;
    let n = lat.rank();
    let mut h = f.matrix().clone();
    // h acts trivially on the orthogonal complement of span(w)
    let mut w: Vec<QVec> = (0..n).map(|i| crate::matrix::unit(n, i)).collect();
    let mut out: Vec<QVec> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_cd);
    while !h.is_identity() {
        let moved: Vec<QVec> = w.iter().map(|x| vsub(x, &h.mul_vec(x))).collect();
        let all_isotropic =
            (0..moved.len()).all(|i| (i..moved.len()).all(|j| lat.pair(&moved[i], &moved[j]).is_zero()));
        if all_isotropic {
            // (1 − h)W totally isotropic: h is in SO and W has even dimension;
            // one extra reflection makes the next step regular.
            let v = find_vector(&w, &mut rng, |v| !lat.norm(v).is_zero())
                .ok_or_else(|| Error::Internal("no anisotropic vector in a nondegenerate space".into()))?;
            h = reflection_matrix(lat, &v).mul(&h);
            out.push(v);
            continue;
        }
        let x = find_vector(&w, &mut rng, |x| {
            !lat.norm(x).is_zero() && !lat.norm(&vsub(x, &h.mul_vec(x))).is_zero()
        })
        .ok_or_else(|| Error::Internal("Cartan–Dieudonné candidate search exhausted".into()))?;
        let d = vsub(&x, &h.mul_vec(&x));
        h = reflection_matrix(lat, &d).mul(&h);
        out.push(d);
        // restrict to span(w) ∩ x^⊥
        let gx = lat.dual(&x);
        let pairings: Vec<Rat> = w.iter().map(|b| dot(&gx, b)).collect();
        let j = pairings.iter().position(|p| !p.is_zero()).expect("x is anisotropic and lies in span(w)");
        let wj = w[j].clone();
        let pj = pairings[j].clone();
        w = w
            .iter()
            .zip(&pairings)
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, (b, p))| if p.is_zero() { b.clone() } else { vsub(b, &vscale(&(p / &pj), &wj)) })
            .collect();
    }
    if out.len() > n {
        return Err(Error::Internal(format!("Cartan–Dieudonné produced {} > {} reflections", out.len(), n)));
    }
    out.iter().map(|u| ReflectionDatum::new(lat, u)).collect()
}

/// Deterministic search through span(basis): basis vectors, sums and
/// differences of pairs, then seeded random small combinations.
fn find_vector(basis: &[QVec], rng: &mut ChaCha8Rng, ok: impl Fn(&QVec) -> bool) -> Option<QVec> {
    for b in basis {
        if ok(b) {
            return Some(b.clone());
        }
    }
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            for c in [vadd(&basis[i], &basis[j]), vsub(&basis[i], &basis[j])] {
                if ok(&c) {
                    return Some(c);
                }
            }
        }
    }
    let dim = basis[0].len();
    for _ in 0..4096 {
        let mut v = vec![Rat::zero(); dim];
        for b in basis {
            let c = Rat::int(rng.gen_range(-7..=7));
            if !c.is_zero() {
                v = vadd(&v, &vscale(&c, b));
            }
        }
        if ok(&v) {
            return Some(v);
        }
    }
    None
}

/// Product ρ_{u_1} ⋯ ρ_{u_k}.
pub fn reflection_product(lat: &Lattice, us: &[ReflectionDatum]) -> QMat {
    us.iter().fold(QMat::identity(lat.rank()), |acc, r| acc.mul(&r.matrix(lat)))
}

/// −id on the first hyperbolic plane, id elsewhere.
pub(crate) fn minus_id_first_plane(lat: &Lattice) -> Result<QMat> {
    let &(p, q) = lat.planes().first().ok_or(Error::NoHyperbolicPlanes)?;
    let mut m = QMat::identity(lat.rank());
    m[(p, p)] = -Rat::one();
    m[(q, q)] = -Rat::one();
    Ok(m)
}
