//! Mukai vectors (r, c, s) on a K3 surface, κ-classes, the structure-sheaf
//! reflection, cup and Pontryagin products, and r-cyclic certificates.
//!
//! The pairing is ⟨(r,c,s),(r',c',s')⟩ = (c,c') − rs' − r's, so (1,0,0) and
//! (0,0,1) play the roles of α and β in the extended K3 lattice.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::factor::{eichler_move, reflection_matrix};
use crate::isometry::{is_in, nu, Group, Isometry};
use crate::lattice::{Lattice, Preset};
use crate::matrix::{vadd, vneg, vscale, QMat, QVec};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MukaiVector {
    pub r: Rat,
    pub c: QVec,
    pub s: Rat,
}

fn k3() -> Lattice {
    Lattice::preset(&Preset::K3)
}

impl MukaiVector {
    pub fn new(r: Rat, c: QVec, s: Rat) -> Result<MukaiVector> {
        check_dim(22, c.len())?;
        Ok(MukaiVector { r, c, s })
    }

    pub fn check(&self) -> Result<()> {
        check_dim(22, self.c.len())
    }

    /// Coordinates on the Mukai preset: r at 0, c at 1..23, s at 23.
    pub fn to_vec(&self) -> QVec {
        let mut v = Vec::with_capacity(24);
        v.push(self.r.clone());
        v.extend_from_slice(&self.c);
        v.push(self.s.clone());
        v
    }

    pub fn from_vec(v: &[Rat]) -> Result<MukaiVector> {
        check_dim(24, v.len())?;
        Ok(MukaiVector { r: v[0].clone(), c: v[1..23].to_vec(), s: v[23].clone() })
    }

    fn zero() -> MukaiVector {
        MukaiVector { r: Rat::zero(), c: vec![Rat::zero(); 22], s: Rat::zero() }
    }
}

pub fn mukai_pair(a: &MukaiVector, b: &MukaiVector) -> Result<Rat> {
    a.check()?;
    b.check()?;
    Ok(k3().pair(&a.c, &b.c) - &a.r * &b.s - &b.r * &a.s)
}

/// v = ch·√td = (r, c₁, ch₂ + r)
pub fn mukai_v(r: &Rat, c1: &[Rat], ch2: &Rat) -> Result<MukaiVector> {
    MukaiVector::new(r.clone(), c1.to_vec(), ch2 + r)
}

/// κ = ch·exp(−c₁/r) = (r, 0, ch₂ − (c₁,c₁)/2r). For r < 0 this equals −κ(F[1]).
pub fn kappa(r: &Rat, c1: &[Rat], ch2: &Rat) -> Result<MukaiVector> {
    if r.is_zero() {
        return Err(Error::Zero("r"));
    }
    check_dim(22, c1.len())?;
    let s = ch2 - &(k3().norm(c1) / (Rat::int(2) * r));
    MukaiVector::new(r.clone(), vec![Rat::zero(); 22], s)
}

/// ρ_u for u = (1,0,1): (r,c,s) ↦ (−s,c,−r)
pub fn structure_sheaf_reflection(x: &MukaiVector) -> MukaiVector {
    MukaiVector { r: -&x.s, c: x.c.clone(), s: -&x.r }
}

pub fn k3_cup(a: &MukaiVector, b: &MukaiVector) -> Result<MukaiVector> {
    a.check()?;
    b.check()?;
    let c = vadd(&vscale(&a.r, &b.c), &vscale(&b.r, &a.c));
    let s = &a.r * &b.s + &b.r * &a.s + k3().pair(&a.c, &b.c);
    MukaiVector::new(&a.r * &b.r, c, s)
}

/// (r,c,s) ⋆ (r',c',s') = (rs' + r's + (c,c'), sc' + s'c, ss')
pub fn k3_star(a: &MukaiVector, b: &MukaiVector) -> Result<MukaiVector> {
    a.check()?;
    b.check()?;
    let r = &a.r * &b.s + &b.r * &a.s + k3().pair(&a.c, &b.c);
    let c = vadd(&vscale(&a.s, &b.c), &vscale(&b.s, &a.c));
    MukaiVector::new(r, c, &a.s * &b.s)
}

/// The ⋆-product as the conjugate of cup by −ρ_{(1,0,1)}.
pub fn k3_star_by_conjugation(a: &MukaiVector, b: &MukaiVector) -> Result<MukaiVector> {
    let t = |x: &MukaiVector| {
        let y = structure_sheaf_reflection(x);
        MukaiVector { r: -y.r, c: vneg(&y.c), s: -y.s }
    };
    Ok(t(&k3_cup(&t(a), &t(b))?))
}

pub fn star_unit() -> MukaiVector {
    MukaiVector { s: Rat::one(), ..MukaiVector::zero() }
}

pub fn cup_unit() -> MukaiVector {
    MukaiVector { r: Rat::one(), ..MukaiVector::zero() }
}

/// f = −g∘ρ_u with (u,u) = 2r > 0, u primitive of divisibility 1, g a monodromy operator.
#[derive(Clone, Debug)]
pub struct CyclicCertificate {
    pub u: QVec,
    pub r: Rat,
    pub g: Isometry,
    pub f: Isometry,
}

/// Γ when the lattice has a δ summand, otherwise O⁺.
fn monodromy_group(lat: &Lattice) -> Group {
    if lat.delta().is_some() {
        Group::Gamma
    } else {
        Group::OPlus
    }
}

fn check_u(lat: &Lattice, u: &[Rat]) -> Result<Rat> {
    check_dim(lat.rank(), u.len())?;
    let norm = lat.norm(u);
    if !norm.is_positive() || !norm.is_integer() || !(&norm / &Rat::int(2)).is_integer() {
        return Err(Error::BadNorm(format!("(u,u) = {norm} is not a positive even integer")));
    }
    if !lat.is_primitive(u) {
        return Err(Error::BadNorm("u is not primitive".into()));
    }
    let div = lat.divisibility(u)?;
    if div != 1.into() {
        return Err(Error::BadDivisibility(format!("div(u) = {div}")));
    }
    Ok(norm / Rat::int(2))
}

pub fn make_cyclic(lat: &Lattice, u: &[Rat], g: &Isometry) -> Result<CyclicCertificate> {
    let r = check_u(lat, u)?;
    check_dim(lat.rank(), g.rank())?;
    if !is_in(lat, g, monodromy_group(lat)) {
        return Err(Error::BadMonodromy);
    }
    let f = g.matrix().mul(&reflection_matrix(lat, u)).neg();
    let f = Isometry::new(lat, f)?;
    if nu(lat, f.matrix()) != 1 {
        return Err(Error::Internal("−g ρ_u reverses orientation".into()));
    }
    Ok(CyclicCertificate { u: u.to_vec(), r, g: g.clone(), f })
}

pub fn verify_cyclic(lat: &Lattice, f: &Isometry, cert: &CyclicCertificate) -> bool {
    let Ok(r) = check_u(lat, &cert.u) else { return false };
    r == cert.r
        && is_in(lat, &cert.g, monodromy_group(lat))
        && cert.g.matrix().mul(&reflection_matrix(lat, &cert.u)).neg() == *f.matrix()
        && nu(lat, f.matrix()) == 1
}

/// (h₁, h₂) ∈ O⁺(L) with h₁ ∘ (−ρ_u) ∘ h₂ = −ρ_{u'}, checked exactly.
pub fn double_orbit_connect(lat: &Lattice, u: &[Rat], u2: &[Rat]) -> Result<(Isometry, Isometry)> {
    check_dim(lat.rank(), u.len())?;
    check_dim(lat.rank(), u2.len())?;
    let (n1, n2) = (lat.norm(u), lat.norm(u2));
    if n1 != n2 {
        return Err(Error::NormMismatch(n1.to_string(), n2.to_string()));
    }
    if !n1.is_positive() {
        return Err(Error::BadNorm(format!("(u,u) = {n1} is not positive")));
    }
    let mv = eichler_move(lat, u, u2)?;
    let h1 = mv.g;
    let h2 = h1.inverse(lat);
    let lhs = h1.matrix().mul(&reflection_matrix(lat, u).neg()).mul(h2.matrix());
    if lhs != reflection_matrix(lat, u2).neg() {
        return Err(Error::Internal("double orbit identity failed".into()));
    }
    if !is_in(lat, &h1, Group::OPlus) || !is_in(lat, &h2, Group::OPlus) {
        return Err(Error::Internal("connecting isometries are not in O+".into()));
    }
    Ok((h1, h2))
}

/// A cyclic certificate for −ρ_u with u = e₁ − r·e₂ of norm 2r.
pub fn canonical_cyclic(lat: &Lattice, r: i64) -> Result<CyclicCertificate> {
    if r < 1 {
        return Err(Error::BadNorm(format!("r = {r} must be positive")));
    }
    let u = lat.canonical_vector(&Rat::int(2 * r))?;
    make_cyclic(lat, &u, &Isometry::identity(lat.rank()))
}

/// The rank n!·rⁿ of the induced kernel on K3^[n].
pub fn fm_kernel_rank(n: u32, r: i64) -> Rat {
    crate::llv::kernel_rank(n, r)
}

/// The Mukai pairing restricted to the Mukai preset, as a matrix.
pub fn mukai_gram() -> QMat {
    Lattice::preset(&Preset::Mukai).gram().clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{unit, vint};

    fn mv(r: i64, c: QVec, s: i64) -> MukaiVector {
        MukaiVector::new(Rat::int(r), c, Rat::int(s)).unwrap()
    }

    fn zero_c() -> QVec {
        vec![Rat::zero(); 22]
    }

    #[test]
    fn pairing_examples() {
        let o = mv(1, zero_c(), 1);
        assert_eq!(mukai_pair(&o, &o).unwrap(), Rat::int(-2));
        assert_eq!(mukai_pair(&cup_unit(), &star_unit()).unwrap(), Rat::int(-1));
        let a = mv(3, unit(22, 0), -2);
        let b = mv(-1, vint(&[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]), 5);
        let lat = Lattice::preset(&Preset::Mukai);
        assert_eq!(mukai_pair(&a, &b).unwrap(), lat.pair(&a.to_vec(), &b.to_vec()));
        assert_eq!(lat.signature(), (4, 20));
    }

    #[test]
    fn kappa_examples() {
        let c1 = vint(&[1, -2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(k3().norm(&c1), Rat::int(4));
        let k = kappa(&Rat::int(2), &c1, &Rat::int(7)).unwrap();
        assert_eq!(k, mv(2, zero_c(), 6));
        assert_eq!(kappa(&Rat::int(2), &vneg(&c1), &Rat::int(7)).unwrap(), k);
        // negative rank: κ(F) = −κ(F[1])
        let neg = kappa(&Rat::int(-3), &c1, &Rat::int(1)).unwrap();
        let shifted = kappa(&Rat::int(3), &vneg(&c1), &Rat::int(-1)).unwrap();
        assert_eq!(neg, MukaiVector { r: -shifted.r, c: vneg(&shifted.c), s: -shifted.s });
    }

    #[test]
    fn products() {
        let l = mv(0, unit(22, 0), 0);
        let m = mv(0, unit(22, 1), 0);
        assert_eq!(k3_star(&l, &m).unwrap(), mv(-1, zero_c(), 0));
        let x = mv(2, vint(&[1, 0, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]), -5);
        assert_eq!(k3_star(&x, &star_unit()).unwrap(), x);
        assert_eq!(k3_cup(&cup_unit(), &x).unwrap(), x);
        assert_eq!(k3_star(&x, &l).unwrap(), k3_star_by_conjugation(&x, &l).unwrap());
        assert_eq!(structure_sheaf_reflection(&cup_unit()), mv(0, zero_c(), -1));
    }

    #[test]
    fn cyclic_basics() {
        let lat = Lattice::preset(&Preset::K3);
        let cert = canonical_cyclic(&lat, 1).unwrap();
        assert_eq!(cert.r, Rat::one());
        assert!(verify_cyclic(&lat, &cert.f, &cert));
        let mut bad = cert.clone();
        bad.u[7] = Rat::one();
        assert!(!verify_cyclic(&lat, &cert.f, &bad));
        assert_eq!(fm_kernel_rank(3, 2), Rat::int(48));
    }
}
