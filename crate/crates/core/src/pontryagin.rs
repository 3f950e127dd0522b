//! The Verbitsky subring modeled as S_[n] of an LLV space: cup product through
//! Ψ, the involution ρ_τ, the Pontryagin product ⋆ and the μ_t action.
//!
//! Degrees are h̃-eigenvalues internally. Eigenvalue 2j corresponds to
//! cohomological degree 2n + 2j.

use std::collections::HashMap;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::lattice::Lattice;
use crate::llv::LlvSpace;
use crate::matrix::{unit, QMat, QVec};
use crate::random::Rng64;
use crate::rat::Rat;
use crate::snrep::{SnSpace, SparseOp};

#[derive(Clone, Debug)]
pub struct ShModel {
    sp: SnSpace,
    llv: LlvSpace,
    c_x: Rat,
    weights: Vec<i64>,
    e_ops: Vec<SparseOp>,
    /// Ψ-monomials (indices into the base basis) forming a basis, by degree
    monos: Vec<Vec<u16>>,
    /// S-coordinates → coordinates over `monos`
    to_monos: QMat,
    rho_tau: QMat,
}

/// One row of the reduced echelon basis used for greedy independence.
struct Echelon {
    rows: Vec<(usize, QVec)>,
}

impl Echelon {
    fn reduce(&self, v: &[Rat]) -> QVec {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            let f = v[*p].clone();
            if f.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        v
    }

    fn insert(&mut self, v: &[Rat]) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else { return false };
        let inv = r[p].recip();
        let row: QVec = r.iter().map(|x| x * &inv).collect();
        for (_, other) in self.rows.iter_mut() {
            let f = other[p].clone();
            if !f.is_zero() {
                for (x, y) in other.iter_mut().zip(&row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.rows.push((p, row));
        true
    }
}

fn multisets(r: usize, k: usize, mut visit: impl FnMut(&[u16]) -> bool) {
    fn go(r: usize, k: usize, start: usize, cur: &mut Vec<u16>, visit: &mut dyn FnMut(&[u16]) -> bool) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        for i in start..r {
            cur.push(i as u16);
            let stop = go(r, k, i, cur, visit);
            cur.pop();
            if stop {
                return true;
            }
        }
        false
    }
    go(r, k, 0, &mut Vec::new(), &mut visit);
}

impl ShModel {
    /// The model for the LLV space of `base` and power n; c_X = 1.
    pub fn new(base: &Lattice, n: usize) -> Result<ShModel> {
        let llv = LlvSpace::new(base);
        let sp = SnSpace::over_llv(&llv, n)?;
        let d = llv.dim();
        if n % 2 == 0 && d % 2 == 0 {
            return Err(Error::EvenDimensionalGuard);
        }
        let r = base.rank();
        let weights = sp.weights()?;
        let e_ops: Vec<SparseOp> =
            (0..r).map(|i| sp.derivation(&llv.e_op(&unit(r, i))?)).collect::<Result<_>>()?;
        let mut cache: HashMap<Vec<u16>, QVec> = HashMap::new();
        cache.insert(vec![], sp.psi(&[])?);
        fn psi_mono(m: &[u16], e_ops: &[SparseOp], cache: &mut HashMap<Vec<u16>, QVec>) -> QVec {
            if let Some(v) = cache.get(m) {
                return v.clone();
            }
            let (last, prefix) = m.split_last().expect("nonempty");
            let v = e_ops[*last as usize].apply(&psi_mono(prefix, e_ops, cache));
            cache.insert(m.to_vec(), v.clone());
            v
        }
        let mut monos = Vec::new();
        let mut cols = Vec::new();
        for k in 0..=2 * n {
            let target = weights.iter().filter(|&&w| w == 2 * k as i64 - 2 * n as i64).count();
            let mut ech = Echelon { rows: vec![] };
            let mut found = 0;
            multisets(r, k, |m| {
                let v = psi_mono(m, &e_ops, &mut cache);
                if ech.insert(&v) {
                    monos.push(m.to_vec());
                    cols.push(v);
                    found += 1;
                }
                found == target
            });
            if found != target {
                return Err(Error::Internal(format!("degree {k}: found {found} of {target} Ψ-monomials")));
            }
        }
        let dim = sp.dim();
        let to_monos = QMat::from_columns(dim, &cols)
            .inverse()
            .ok_or_else(|| Error::Internal("Ψ-monomials do not span S_[n]".into()))?;
        let rho_tau = sp.restrict_sym(&llv.tau())?;
        Ok(ShModel { sp, llv, c_x: Rat::one(), weights, e_ops, monos, to_monos, rho_tau })
    }

    pub fn space(&self) -> &SnSpace {
        &self.sp
    }

    pub fn llv(&self) -> &LlvSpace {
        &self.llv
    }

    pub fn n(&self) -> usize {
        self.sp.n()
    }

    pub fn dim(&self) -> usize {
        self.sp.dim()
    }

    pub fn c_x(&self) -> &Rat {
        &self.c_x
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn psi_monomials(&self) -> &[Vec<u16>] {
        &self.monos
    }

    /// Ψ(λ₁⋯λ_k)
    pub fn psi(&self, lambdas: &[QVec]) -> Result<QVec> {
        self.sp.psi(lambdas)
    }

    /// Ψ of a monomial in the base basis vectors.
    pub fn psi_basis(&self, m: &[u16]) -> QVec {
        let mut v = self.unit_cup();
        for &i in m.iter().rev() {
            v = self.e_ops[i as usize].apply(&v);
        }
        v
    }

    /// Ψ(1) = α^n/n!
    pub fn unit_cup(&self) -> QVec {
        self.sp.psi(&[]).expect("LLV model")
    }

    /// ρ_τ(Ψ(1)) = β^n/n!, which is c_X[pt]/n!
    pub fn unit_star(&self) -> QVec {
        self.rho_tau.mul_vec(&self.unit_cup())
    }

    pub fn rho_tau(&self, x: &[Rat]) -> QVec {
        self.rho_tau.mul_vec(x)
    }

    pub fn rho_tau_matrix(&self) -> &QMat {
        &self.rho_tau
    }

    /// The h̃-eigenvalue of a homogeneous nonzero element.
    pub fn degree(&self, x: &[Rat]) -> Option<i64> {
        let mut ws = x.iter().zip(&self.weights).filter(|(c, _)| !c.is_zero()).map(|(_, &w)| w);
        let first = ws.next()?;
        ws.all(|w| w == first).then_some(first)
    }

    /// Cohomological degree of a homogeneous nonzero element.
    pub fn cohomological_degree(&self, x: &[Rat]) -> Option<i64> {
        self.degree(x).map(|w| w + 2 * self.n() as i64)
    }

    /// Coordinates over the Ψ-monomial basis.
    pub fn monomial_coords(&self, x: &[Rat]) -> QVec {
        self.to_monos.mul_vec(x)
    }

    pub fn cup(&self, x: &[Rat], y: &[Rat]) -> Result<QVec> {
        check_dim(self.dim(), x.len())?;
        check_dim(self.dim(), y.len())?;
        let c = self.monomial_coords(x);
        let mut cache: HashMap<&[u16], QVec> = HashMap::new();
        let mut out = vec![Rat::zero(); self.dim()];
        for (m, cm) in self.monos.iter().zip(&c) {
            if cm.is_zero() {
                continue;
            }
            let v = self.word(m, y, &mut cache);
            for (o, t) in out.iter_mut().zip(&v) {
                if !t.is_zero() {
                    *o += cm * t;
                }
            }
        }
        Ok(out)
    }

    fn word<'a>(&self, m: &'a [u16], y: &[Rat], cache: &mut HashMap<&'a [u16], QVec>) -> QVec {
        if m.is_empty() {
            return y.to_vec();
        }
        if let Some(v) = cache.get(m) {
            return v.clone();
        }
        let (last, prefix) = m.split_last().expect("nonempty");
        let v = self.e_ops[*last as usize].apply(&self.word(prefix, y, cache));
        cache.insert(m, v.clone());
        v
    }

    /// x ⋆ y = ρ_τ(ρ_τ x ∪ ρ_τ y)
    pub fn star(&self, x: &[Rat], y: &[Rat]) -> Result<QVec> {
        Ok(self.rho_tau(&self.cup(&self.rho_tau(x), &self.rho_tau(y))?))
    }

    /// Multiplies the eigenvalue-2j part by t^j.
    pub fn mu_action(&self, t: &Rat, x: &[Rat]) -> Result<QVec> {
        if t.is_zero() {
            return Err(Error::Zero("t"));
        }
        check_dim(self.dim(), x.len())?;
        Ok(x.iter().zip(&self.weights).map(|(c, &w)| c * &t.pow((w / 2) as i32)).collect())
    }

    pub fn random_element(&self, rng: &mut Rng64, bound: i64, density: f64) -> QVec {
        (0..self.dim())
            .map(|_| if rng.gen_bool(density) { Rat::int(rng.gen_range(-bound..=bound)) } else { Rat::zero() })
            .collect()
    }

    /// A random homogeneous element of the given eigenvalue.
    pub fn random_homogeneous(&self, rng: &mut Rng64, weight: i64, bound: i64) -> QVec {
        self.weights.iter().map(|&w| if w == weight { Rat::int(rng.gen_range(-bound..=bound)) } else { Rat::zero() }).collect()
    }

    /// (μ_t g, kind) with μ_t g fixing α (graded) or sending α to β (anti-graded).
    pub fn normalize(&self, g: &QMat) -> Result<(QMat, GradingKind, Rat)> {
        check_dim(self.llv.dim(), g.rows())?;
        if !self.llv.is_isometry(g) {
            return Err(Error::NotIsometry);
        }
        let b = self.llv.beta_index();
        let (kind, t) = if self.llv.is_graded(g) {
            (GradingKind::Graded, g[(0, 0)].clone())
        } else if self.llv.is_degree_reversing(g) {
            (GradingKind::AntiGraded, g[(b, 0)].recip())
        } else {
            return Err(Error::NotGraded);
        };
        Ok((self.llv.mu(&t)?.mul(g), kind, t))
    }

    /// Multiplicativity of ρ_{μ_t g}: cup → cup for graded g, cup → ⋆ for anti-graded g.
    pub fn conjugation_check(&self, g: &QMat, rng: &mut Rng64, samples: usize) -> Result<ConjugationReport> {
        let (gn, kind, t) = self.normalize(g)?;
        let rho = self.sp.restrict_sym(&gn)?;
        let mut holds = true;
        for _ in 0..samples {
            let x = self.random_element(rng, 2, 0.05);
            let y = self.random_element(rng, 2, 0.05);
            let lhs = rho.mul_vec(&self.cup(&x, &y)?);
            let (rx, ry) = (rho.mul_vec(&x), rho.mul_vec(&y));
            let rhs = match kind {
                GradingKind::Graded => self.cup(&rx, &ry)?,
                GradingKind::AntiGraded => self.star(&rx, &ry)?,
            };
            if lhs != rhs {
                holds = false;
                break;
            }
        }
        let unit = rho.mul_vec(&self.unit_cup());
        let unit_ok = match kind {
            GradingKind::Graded => unit == self.unit_cup(),
            GradingKind::AntiGraded => unit == self.unit_star(),
        };
        Ok(ConjugationReport { kind, t, holds: holds && unit_ok, samples })
    }

    /// Whether the product ρ'(ρ'⁻¹x ∪ ρ'⁻¹y), built from a degree-reversing g, equals ⋆.
    pub fn star_independence(&self, g: &QMat, rng: &mut Rng64, samples: usize) -> Result<bool> {
        let (gn, kind, _) = self.normalize(g)?;
        if kind != GradingKind::AntiGraded {
            return Err(Error::NotDegreeReversing);
        }
        let rho = self.sp.restrict_sym(&gn)?;
        let ginv = self.llv.space().gram_inv().mul(&gn.transpose()).mul(self.llv.space().gram());
        let rho_inv = self.sp.restrict_sym(&ginv)?;
        for _ in 0..samples {
            let x = self.random_element(rng, 2, 0.05);
            let y = self.random_element(rng, 2, 0.05);
            let via_g = rho.mul_vec(&self.cup(&rho_inv.mul_vec(&x), &rho_inv.mul_vec(&y))?);
            if via_g != self.star(&x, &y)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The ⋆-table of Ψ-basis elements of the given cohomological degree.
    pub fn star_table(&self, coh_degree: i64) -> Result<Vec<Vec<QVec>>> {
        let w = coh_degree - 2 * self.n() as i64;
        let basis: Vec<QVec> = self
            .monos
            .iter()
            .map(|m| self.psi_basis(m))
            .filter(|v| self.degree(v) == Some(w))
            .collect();
        basis.iter().map(|x| basis.iter().map(|y| self.star(x, y)).collect()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GradingKind {
    Graded,
    AntiGraded,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugationReport {
    pub kind: GradingKind,
    pub t: Rat,
    pub holds: bool,
    pub samples: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Preset;
    use crate::random::rng;

    #[test]
    fn k3_model_table() {
        let k3 = Lattice::preset(&Preset::K3);
        let m = ShModel::new(&k3, 1).unwrap();
        assert_eq!(m.dim(), 24);
        let one = m.unit_cup();
        assert_eq!(m.unit_star(), m.llv().beta());
        for i in 0..22 {
            for j in 0..22 {
                let x = m.psi(&[unit(22, i)]).unwrap();
                let y = m.psi(&[unit(22, j)]).unwrap();
                let want: QVec = one.iter().map(|c| c * &k3.gram()[(i, j)]).collect();
                assert_eq!(m.star(&x, &y).unwrap(), want);
            }
        }
    }

    #[test]
    fn kummer_model_ring_axioms() {
        let m = ShModel::new(&Lattice::preset(&Preset::Kummer(2)), 2).unwrap();
        let mut r = rng(5);
        for _ in 0..5 {
            let x = m.random_element(&mut r, 2, 0.3);
            let y = m.random_element(&mut r, 2, 0.3);
            let z = m.random_element(&mut r, 2, 0.3);
            assert_eq!(m.cup(&m.cup(&x, &y).unwrap(), &z).unwrap(), m.cup(&x, &m.cup(&y, &z).unwrap()).unwrap());
            assert_eq!(m.cup(&x, &y).unwrap(), m.cup(&y, &x).unwrap());
            assert_eq!(m.star(&x, &m.unit_star()).unwrap(), x);
            assert_eq!(m.cup(&m.unit_cup(), &x).unwrap(), x);
        }
    }

    #[test]
    fn mu_scales_unit() {
        let m = ShModel::new(&Lattice::preset(&Preset::Kummer(2)), 2).unwrap();
        let t = Rat::int(3);
        let u = m.unit_cup();
        assert_eq!(m.mu_action(&t, &u).unwrap(), u.iter().map(|c| c * &Rat::new(1, 9)).collect::<Vec<_>>());
        let lhs = m.sp.restrict_sym(&m.llv.mu(&t).unwrap()).unwrap().mul_vec(&u);
        assert_eq!(lhs, m.mu_action(&t, &u).unwrap());
    }
}
