//! Factorization φ = (−1)^k γ_k ρ_{u_k} ⋯ γ_1 ρ_{u_1} γ_0 with γ_i ∈ Γ and
//! u_i ∈ L primitive of positive norm.
//!
//! Pipeline for φ ∈ O⁺(Λ_Q), Λ = L ⊕ Zδ, (δ,δ) = −2d:
//! 1. if the L-part of φ(δ) is isotropic, replace φ by s∘φ with s = −ρ_{u'+δ} ∈ Γ;
//! 2. move φ(δ) and the reference r₀(δ), r₀ = −ρ_{u₀+δ}, into L_Q and match them
//!    by a Witt map, leaving a residue ψ that fixes δ;
//! 3. every factor in O(L_Q) goes through Cartan–Dieudonné; reflections in
//!    negative vectors are rewritten as (integral isometry)·(positive reflection);
//! 4. integral pieces are collected into the γ's, with −1 absorbed where an
//!    O(L) piece reverses orientation.

use num_traits::{One, Zero};
use serde::Serialize;

use super::eichler::{move_rational_into_lq, positive_reflection_rewrite};
use super::{cartan_dieudonne, reflection_matrix, witt_map};
use crate::error::{check_dim, Error, Result};
use crate::isometry::{is_isometry, membership, nu, Group, Isometry};
use crate::lattice::Lattice;
use crate::matrix::{content, is_zero_vec, primitive_on_ray, vadd, QMat, QVec};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub k: usize,
    /// γ_0, …, γ_k as matrices on Λ.
    pub gammas: Vec<QMat>,
    /// u_1, …, u_k in Λ coordinates (δ-coordinate zero).
    pub us: Vec<QVec>,
}

enum Piece {
    Gamma(QMat),
    /// integral isometry of L (extended by id on δ), orientation not yet fixed
    Ol(QMat),
    Refl(QVec),
}

/// Decomposes φ ∈ O⁺(Λ_Q) for a lattice of the form L ⊕ Zδ with L unimodular.
pub fn decompose(lat: &Lattice, phi: &Isometry) -> Result<NormalForm> {
    check_dim(lat.rank(), phi.rank())?;
    let dpos = lat.delta().ok_or(Error::NoDelta)?;
    let l = lat.l_part()?;
    if !l.is_unimodular() {
        return Err(Error::Precondition("L must be unimodular".into()));
    }
    if l.planes().len() < 2 {
        return Err(Error::NoHyperbolicPlanes);
    }
    let n = lat.rank();
    if nu(lat, phi.matrix()) != 1 {
        return Err(Error::OrientationReversing);
    }
    if let Some(nf) = fast_path(lat, phi)? {
        return Ok(nf);
    }

    let delta = lat.delta_vector()?;
    let d = -(lat.norm(&delta) / Rat::int(2));
    let dp1 = &d + &Rat::one();
    let minus_rho = |u: &QVec| reflection_matrix(lat, &vadd(u, &delta)).neg();

    let mut pieces: Vec<Piece> = Vec::new();

    // step 1: make the L-part of φ(δ) anisotropic
    let mut phi1 = phi.matrix().clone();
    let lambda = lat.project_l(&phi1.mul_vec(&delta));
    if l.norm(&lambda).is_zero() {
        let u1 = lat.embed_l(&orthogonal_norm_vector(&l, &lambda, &dp1)?);
        let s = minus_rho(&u1);
        phi1 = s.mul(&phi1);
        pieces.push(Piece::Gamma(s));
    }

    // step 2
    let u0 = lat.embed_l(&l.plane_vector(0, &Rat::one(), &-dp1.clone()));
    let r0 = minus_rho(&u0);
    let m1 = move_rational_into_lq(lat, &r0.mul_vec(&delta))?;
    let vref = m1.g.apply(&r0.mul_vec(&delta));
    let m2 = move_rational_into_lq(lat, &phi1.mul_vec(&delta))?;
    let x2 = m2.g.apply(&phi1.mul_vec(&delta));
    debug_assert!(vref[dpos].is_zero() && x2[dpos].is_zero());
    let h3l = witt_map(&l, &lat.project_l(&x2), &lat.project_l(&vref))?;
    let h3 = lat.extend_from_l(h3l.matrix());
    let inv = |m: &QMat| Isometry::trusted(lat, m.clone()).inverse(lat).into_matrix();
    // ψ = r0 · g1⁻¹ · h3 · g2 · φ1 fixes δ
    let psi = r0.mul(&inv(m1.g.matrix())).mul(&h3).mul(m2.g.matrix()).mul(&phi1);
    if psi.mul_vec(&delta) != delta {
        return Err(Error::Internal("residue does not fix delta".into()));
    }
    // φ1 = f2⁻¹ · h2⁻¹ · h3⁻¹ · h1 · f1 · r0 · ψ
    let rational = [inv(m2.f.matrix()), inv(m2.h.matrix()), inv(&h3), m1.h.matrix().clone(), m1.f.matrix().clone(), r0, psi];
    for (i, m) in rational.into_iter().enumerate() {
        // indices 1, 3, 5 are in Γ; the others fix δ and preserve L_Q
        if i % 2 == 1 {
            pieces.push(Piece::Gamma(m));
        } else {
            split_in_l(lat, &l, &m, &mut pieces)?;
        }
    }

    // step 4
    let mut sigma = 1i32;
    let mut acc = QMat::identity(n);
    let mut gammas_rev: Vec<QMat> = Vec::new();
    let mut us_rev: Vec<QVec> = Vec::new();
    for p in pieces {
        match p {
            Piece::Gamma(g) => acc = acc.mul(&g),
            Piece::Ol(h) => {
                if nu(lat, &h) == 1 {
                    acc = acc.mul(&h);
                } else {
                    sigma = -sigma;
                    acc = acc.mul(&h.neg());
                }
            }
            Piece::Refl(w) => {
                gammas_rev.push(std::mem::replace(&mut acc, QMat::identity(n)));
                us_rev.push(w);
            }
        }
    }
    gammas_rev.push(acc);
    let k = us_rev.len();
    if sigma != if k % 2 == 0 { 1 } else { -1 } {
        return Err(Error::Internal("global sign does not match the number of reflections".into()));
    }
    gammas_rev.reverse();
    us_rev.reverse();
    let nf = NormalForm { k, gammas: gammas_rev, us: us_rev };
    let report = verify_normal_form(lat, &nf, phi);
    if !report.ok {
        return Err(Error::Internal(format!("certificate failed verification: {:?}", report.failures)));
    }
    Ok(nf)
}

fn fast_path(lat: &Lattice, phi: &Isometry) -> Result<Option<NormalForm>> {
    let n = lat.rank();
    if phi.is_integral() && membership(lat, phi, Group::Gamma)?.member {
        return Ok(Some(NormalForm { k: 0, gammas: vec![phi.matrix().clone()], us: vec![] }));
    }
    // φ = −ρ_u with u ∈ L positive
    let m = phi.matrix().neg();
    let diff = QMat::identity(n).sub(&m);
    if diff.rank() == 1 {
        let col = diff.columns().into_iter().find(|c| !is_zero_vec(c)).expect("rank one");
        let (u, _) = primitive_on_ray(&col);
        let d = lat.delta().expect("checked by caller");
        if u[d].is_zero() && lat.norm(&u).is_positive() && reflection_matrix(lat, &u) == m {
            return Ok(Some(NormalForm { k: 1, gammas: vec![QMat::identity(n), QMat::identity(n)], us: vec![u] }));
        }
    }
    Ok(None)
}

/// A vector of norm `norm` in L orthogonal to the isotropic vector `lambda`.
fn orthogonal_norm_vector(l: &Lattice, lambda: &[Rat], dp1: &Rat) -> Result<QVec> {
    for (i, &(a, b)) in l.planes().iter().enumerate() {
        if lambda[a].is_zero() && lambda[b].is_zero() {
            return Ok(l.plane_vector(i, &Rat::one(), &-dp1.clone()));
        }
    }
    // λ ≠ 0 here; its primitive multiple reduces to e1 of the first plane, and
    // the second plane is orthogonal to that.
    let (prim, _) = primitive_on_ray(lambda);
    let (word, nf) = super::eichler::eichler_normal_form(l, &prim)?;
    if l.pair(&nf, &l.plane_vector(1, &Rat::one(), &Rat::zero())) != Rat::zero()
        || l.pair(&nf, &l.plane_vector(1, &Rat::zero(), &Rat::one())) != Rat::zero()
    {
        return Err(Error::Internal("isotropic normal form meets the helper plane".into()));
    }
    let w = word.inverse().apply(l, &l.plane_vector(1, &Rat::one(), &-dp1.clone()));
    debug_assert!(l.pair(&w, lambda).is_zero());
    Ok(w)
}

/// Splits a rational isometry of Λ that fixes δ into O(L) pieces and positive reflections.
fn split_in_l(lat: &Lattice, l: &Lattice, m: &QMat, out: &mut Vec<Piece>) -> Result<()> {
    if m.is_identity() {
        return Ok(());
    }
    let dpos = lat.delta().expect("lattice has delta");
    let idx: Vec<usize> = (0..lat.rank()).filter(|&i| i != dpos).collect();
    let ml = m.submatrix(&idx, &idx);
    if !is_isometry(l, &ml) {
        return Err(Error::Internal("factor does not restrict to an isometry of L".into()));
    }
    let f = Isometry::trusted(l, ml);
    for r in cartan_dieudonne(l, &f)? {
        if r.norm.is_positive() {
            out.push(Piece::Refl(lat.embed_l(&r.u)));
        } else {
            let (h, w) = positive_reflection_rewrite(l, &r.u)?;
            out.push(Piece::Ol(lat.extend_from_l(h.matrix())));
            out.push(Piece::Refl(lat.embed_l(&w)));
        }
    }
    Ok(())
}

/// (−1)^k γ_k ρ_{u_k} ⋯ ρ_{u_1} γ_0
pub fn evaluate_normal_form(lat: &Lattice, nf: &NormalForm) -> Result<QMat> {
    if nf.gammas.len() != nf.us.len() + 1 || nf.k != nf.us.len() {
        return Err(Error::Precondition("a normal form needs k reflections and k+1 gammas".into()));
    }
    for g in &nf.gammas {
        check_dim(lat.rank(), g.rows())?;
        check_dim(lat.rank(), g.cols())?;
    }
    let mut m = nf.gammas[nf.k].clone();
    for i in (0..nf.k).rev() {
        let u = &nf.us[i];
        check_dim(lat.rank(), u.len())?;
        if lat.norm(u).is_zero() {
            return Err(Error::Isotropic("reflection vector"));
        }
        m = m.mul(&reflection_matrix(lat, u)).mul(&nf.gammas[i]);
    }
    Ok(if nf.k % 2 == 1 { m.neg() } else { m })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyFailure {
    /// "shape", "gamma", "u" or "product"
    pub factor: &'static str,
    pub index: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub failures: Vec<VerifyFailure>,
}

pub fn verify_normal_form(lat: &Lattice, nf: &NormalForm, phi: &Isometry) -> VerifyReport {
    let mut failures = Vec::new();
    let fail = |factor, index, reason: String| VerifyFailure { factor, index, reason };
    if nf.gammas.len() != nf.us.len() + 1 || nf.k != nf.us.len() {
        failures.push(fail("shape", 0, format!("k={}, {} gammas, {} us", nf.k, nf.gammas.len(), nf.us.len())));
        return VerifyReport { ok: false, failures };
    }
    let n = lat.rank();
    for (i, g) in nf.gammas.iter().enumerate() {
        if g.rows() != n || g.cols() != n {
            failures.push(fail("gamma", i, "wrong dimensions".into()));
            continue;
        }
        let reason = match Isometry::new(lat, g.clone()) {
            Err(_) => Some("not an isometry".to_string()),
            Ok(iso) => match membership(lat, &iso, Group::Gamma) {
                Ok(m) if m.member => None,
                Ok(m) => Some(format!("not in Gamma (failed {})", m.failed.unwrap_or("?"))),
                Err(e) => Some(e.to_string()),
            },
        };
        if let Some(r) = reason {
            failures.push(fail("gamma", i, r));
        }
    }
    let dpos = lat.delta();
    for (i, u) in nf.us.iter().enumerate() {
        let idx = i + 1;
        if u.len() != n {
            failures.push(fail("u", idx, "wrong dimensions".into()));
            continue;
        }
        if dpos.is_some_and(|d| !u[d].is_zero()) {
            failures.push(fail("u", idx, "not in L".into()));
        } else if is_zero_vec(u) || !lat.is_primitive(u) || !content(u).is_one() {
            failures.push(fail("u", idx, "not primitive integral".into()));
        } else if lat.norm(u) < Rat::int(2) {
            failures.push(fail("u", idx, format!("norm {} < 2", lat.norm(u))));
        }
    }
    if failures.is_empty() {
        match evaluate_normal_form(lat, nf) {
            Ok(m) if &m == phi.matrix() => {}
            Ok(_) => failures.push(fail("product", 0, "recomposition differs from the input".into())),
            Err(e) => failures.push(fail("product", 0, e.to_string())),
        }
    }
    VerifyReport { ok: failures.is_empty(), failures }
}
