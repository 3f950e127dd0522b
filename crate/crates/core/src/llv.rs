//! The extended lattice Qα ⊕ Λ_Q ⊕ Qβ and its operators.
//!
//! Basis order (α, Λ-basis, β). The grading operator h̃ multiplies α by −2,
//! β by 2 and Λ by 0, so [h̃, e_λ] = 2e_λ.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::isometry::is_isometry;
use crate::lattice::{Lattice, Preset};
use crate::matrix::{is_zero_vec, QMat, QVec};
use crate::rat::Rat;

#[derive(Clone, Debug)]
pub struct LlvSpace {
    base: Lattice,
    space: Lattice,
}

impl LlvSpace {
    pub fn new(base: &Lattice) -> LlvSpace {
        LlvSpace { base: base.clone(), space: base.llv() }
    }

    pub fn base(&self) -> &Lattice {
        &self.base
    }

    /// The extended lattice itself (rank of the base + 2).
    pub fn space(&self) -> &Lattice {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.rank()
    }

    pub fn beta_index(&self) -> usize {
        self.dim() - 1
    }

    pub fn alpha(&self) -> QVec {
        crate::matrix::unit(self.dim(), 0)
    }

    pub fn beta(&self) -> QVec {
        crate::matrix::unit(self.dim(), self.beta_index())
    }

    /// r·α + λ + s·β
    pub fn vector(&self, r: &Rat, lambda: &[Rat], s: &Rat) -> QVec {
        let mut v = Vec::with_capacity(self.dim());
        v.push(r.clone());
        v.extend_from_slice(lambda);
        v.push(s.clone());
        v
    }

    pub fn embed(&self, lambda: &[Rat]) -> QVec {
        self.vector(&Rat::zero(), lambda, &Rat::zero())
    }

    /// (α-coefficient, Λ-part, β-coefficient)
    pub fn split(&self, v: &[Rat]) -> (Rat, QVec, Rat) {
        let b = self.beta_index();
        (v[0].clone(), v[1..b].to_vec(), v[b].clone())
    }

    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        self.space.pair(x, y)
    }

    pub fn is_isometry(&self, m: &QMat) -> bool {
        is_isometry(&self.space, m)
    }

    /// e_λ: α ↦ λ, λ' ↦ (λ,λ')β, β ↦ 0.
    pub fn e_op(&self, lambda: &[Rat]) -> Result<QMat> {
        check_dim(self.base.rank(), lambda.len())?;
        let n = self.dim();
        let b = self.beta_index();
        let gl = self.base.dual(lambda);
        let mut m = QMat::zeros(n, n);
        for (i, x) in lambda.iter().enumerate() {
            m[(i + 1, 0)] = x.clone();
        }
        for (j, x) in gl.iter().enumerate() {
            m[(b, j + 1)] = x.clone();
        }
        Ok(m)
    }

    /// B_λ = exp(e_λ) = 1 + e_λ + e_λ²/2.
    pub fn b_field(&self, lambda: &[Rat]) -> Result<QMat> {
        let e = self.e_op(lambda)?;
        let e2 = e.mul(&e);
        Ok(QMat::identity(self.dim()).add(&e).add(&e2.scale(&Rat::new(1, 2))))
    }

    pub fn grading(&self) -> QMat {
        let mut d = vec![Rat::zero(); self.dim()];
        d[0] = Rat::int(-2);
        d[self.beta_index()] = Rat::int(2);
        QMat::diag(&d)
    }

    /// Swaps α and β and negates Λ.
    pub fn tau(&self) -> QMat {
        let n = self.dim();
        let b = self.beta_index();
        let mut m = QMat::scalar(n, Rat::int(-1));
        m[(0, 0)] = Rat::zero();
        m[(b, b)] = Rat::zero();
        m[(b, 0)] = Rat::one();
        m[(0, b)] = Rat::one();
        m
    }

    /// μ_t: α ↦ t⁻¹α, β ↦ tβ, identity on Λ.
    pub fn mu(&self, t: &Rat) -> Result<QMat> {
        if t.is_zero() {
            return Err(Error::Zero("t"));
        }
        let mut m = QMat::identity(self.dim());
        m[(0, 0)] = t.recip();
        let b = self.beta_index();
        m[(b, b)] = t.clone();
        Ok(m)
    }

    /// Extends an endomorphism of Λ by the identity on α and β.
    pub fn extend(&self, g: &QMat) -> Result<QMat> {
        check_dim(self.base.rank(), g.rows())?;
        let n = self.dim();
        let b = self.beta_index();
        Ok(QMat::from_fn(n, n, |i, j| {
            if i == 0 || i == b || j == 0 || j == b {
                if i == j {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            } else {
                g[(i - 1, j - 1)].clone()
            }
        }))
    }

    pub fn is_graded(&self, m: &QMat) -> bool {
        let h = self.grading();
        m.mul(&h) == h.mul(m)
    }

    pub fn is_degree_reversing(&self, m: &QMat) -> bool {
        let h = self.grading();
        m.mul(&h) == h.mul(m).neg()
    }

    /// r·α + λ + ((λ,λ)/2r)·β, the image of β under a kernel of rank r.
    pub fn fm_beta_image(&self, r: &Rat, lambda: &[Rat]) -> Result<QVec> {
        if r.is_zero() {
            return Err(Error::Zero("r"));
        }
        check_dim(self.base.rank(), lambda.len())?;
        let s = self.base.norm(lambda) / (Rat::int(2) * r);
        Ok(self.vector(r, lambda, &s))
    }

    /// B_{−λ_Y/r} ∘ Φ̃ ∘ B_{−λ_X/r} and whether the result is degree-reversing.
    pub fn normalize_fm(&self, phi: &QMat, r: &Rat, lambda_x: &[Rat], lambda_y: &[Rat]) -> Result<(QMat, bool)> {
        if r.is_zero() {
            return Err(Error::Zero("r"));
        }
        check_dim(self.dim(), phi.rows())?;
        check_dim(self.dim(), phi.cols())?;
        if !self.is_isometry(phi) {
            return Err(Error::NotIsometry);
        }
        let minus_over_r = -r.recip();
        let scale = |v: &[Rat]| -> QVec { v.iter().map(|x| x * &minus_over_r).collect() };
        let out = self.b_field(&scale(lambda_y))?.mul(phi).mul(&self.b_field(&scale(lambda_x))?);
        let rev = self.is_degree_reversing(&out);
        Ok((out, rev))
    }

    /// For a degree-reversing isometry with φ̃(β) = tα and (λ,λ) ≠ 0: the dual
    /// Lefschetz operator 2ψ/(t(λ,λ)), ψ = φ̃⁻¹ e_{φ̃(λ)} φ̃, with the identities checked.
    pub fn dual_lefschetz(&self, phi: &QMat, lambda: &[Rat]) -> Result<LefschetzReport> {
        check_dim(self.dim(), phi.rows())?;
        check_dim(self.base.rank(), lambda.len())?;
        if !self.is_isometry(phi) {
            return Err(Error::NotIsometry);
        }
        if !self.is_degree_reversing(phi) {
            return Err(Error::NotDegreeReversing);
        }
        let ll = self.base.norm(lambda);
        if ll.is_zero() {
            return Err(Error::Isotropic("lambda"));
        }
        let t = phi.column(self.beta_index())[0].clone();
        let phi_inv = self.space.gram_inv().mul(&phi.transpose()).mul(self.space.gram());
        let (_, img, _) = self.split(&phi.mul_vec(&self.embed(lambda)));
        let psi = phi_inv.mul(&self.e_op(&img)?).mul(phi);
        let e = self.e_op(lambda)?;
        let h = self.grading();
        let c = &t * &ll / Rat::int(2);
        let psi_relation = e.commutator(&psi) == h.scale(&c);
        let psi_degree = h.commutator(&psi) == psi.scale(&Rat::int(-2));
        let f = psi.scale(&(Rat::int(2) / (&t * &ll)));
        let sl2 = [e.commutator(&f) == h, h.commutator(&e) == e.scale(&Rat::int(2)), h.commutator(&f) == f.scale(&Rat::int(-2))];
        let kills_alpha = is_zero_vec(&f.mul_vec(&self.alpha()));
        Ok(LefschetzReport { t, dual: f, psi_relation, psi_degree, sl2, kills_alpha })
    }
}

#[derive(Clone, Debug)]
pub struct LefschetzReport {
    pub t: Rat,
    pub dual: QMat,
    /// [e_λ, ψ] = (t(λ,λ)/2)·h̃
    pub psi_relation: bool,
    /// [h̃, ψ] = −2ψ
    pub psi_degree: bool,
    /// [e,f] = h, [h,e] = 2e, [h,f] = −2f
    pub sl2: [bool; 3],
    pub kills_alpha: bool,
}

impl LefschetzReport {
    pub fn ok(&self) -> bool {
        self.psi_relation && self.psi_degree && self.sl2.iter().all(|&b| b) && self.kills_alpha
    }
}

/// The extended lattices of K3 (rank 24) and K3^[n] (rank 25) with the maps between them.
#[derive(Clone, Debug)]
pub struct HilbertPair {
    pub n: u32,
    pub k3: LlvSpace,
    pub k3n: LlvSpace,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelC1 {
    pub e1: QVec,
    pub e2: QVec,
    pub rank: Rat,
}

impl HilbertPair {
    pub fn new(n: u32) -> Result<HilbertPair> {
        if n < 2 {
            return Err(Error::Precondition("n must be at least 2".into()));
        }
        Ok(HilbertPair {
            n,
            k3: LlvSpace::new(&Lattice::preset(&Preset::K3)),
            k3n: LlvSpace::new(&Lattice::preset(&Preset::K3n(n))),
        })
    }

    fn delta_index(&self) -> usize {
        23
    }

    /// θ̃: 25×24, α ↦ α, β ↦ β, Λ_K3 ↦ δ^⊥.
    pub fn theta_tilde(&self) -> QMat {
        let mut m = QMat::zeros(25, 24);
        for i in 0..23 {
            m[(i, i)] = Rat::one();
        }
        m[(24, 23)] = Rat::one();
        m
    }

    /// θ on H²: Λ_K3 → Λ_K3 ⊕ Zδ.
    pub fn theta(&self, a: &[Rat]) -> Result<QVec> {
        check_dim(22, a.len())?;
        let mut v = a.to_vec();
        v.push(Rat::zero());
        Ok(v)
    }

    /// δ as a vector of the K3^[n] lattice.
    pub fn delta(&self) -> QVec {
        crate::matrix::unit(23, 22)
    }

    /// ι̃_g with ι̃_g θ̃ = θ̃ g and ι̃_g(δ) = δ; `g` acts on the rank-24 extended K3 lattice.
    pub fn iota_tilde(&self, g: &QMat) -> Result<QMat> {
        check_dim(24, g.rows())?;
        check_dim(24, g.cols())?;
        let map = |i: usize| if i < 23 { Some(i) } else if i == 24 { Some(23) } else { None };
        let d = self.delta_index();
        Ok(QMat::from_fn(25, 25, |i, j| match (map(i), map(j)) {
            (Some(a), Some(b)) => g[(a, b)].clone(),
            _ if i == d && j == d => Rat::one(),
            _ => Rat::zero(),
        }))
    }

    /// ι̃ of an isometry of Λ_K3, extended by the identity on α and β first.
    pub fn iota_tilde_h2(&self, g: &QMat) -> Result<QMat> {
        self.iota_tilde(&self.k3.extend(g)?)
    }

    /// det^{n+1} · B_{−δ/2} ∘ ι̃_φ ∘ B_{δ/2}.
    pub fn hilb_lift(&self, phi: &QMat, det: i32) -> Result<QMat> {
        check_dim(24, phi.rows())?;
        if !self.k3.is_isometry(phi) {
            return Err(Error::NotIsometry);
        }
        if det != phi.det().signum() {
            return Err(Error::Precondition(format!("det(phi) is {}, not {det}", phi.det().signum())));
        }
        let half: QVec = self.delta().iter().map(|x| x / &Rat::int(2)).collect();
        let minus_half: QVec = half.iter().map(|x| -x).collect();
        let core = self.k3n.b_field(&minus_half)?.mul(&self.iota_tilde(phi)?).mul(&self.k3n.b_field(&half)?);
        Ok(if det == -1 && (self.n + 1) % 2 == 1 { core.neg() } else { core })
    }

    /// e1 = R(θ(a1)/r + δ/2), e2 = R(θ(a2)/r − δ/2) with R = n!·rⁿ.
    pub fn kernel_c1_solve(&self, r: i64, a1: &[Rat], a2: &[Rat]) -> Result<KernelC1> {
        if r < 1 {
            return Err(Error::Precondition("r must be positive".into()));
        }
        let rr = Rat::int(r);
        let big_r = kernel_rank(self.n, r);
        let half_delta: QVec = self.delta().iter().map(|x| x / &Rat::int(2)).collect();
        let t1 = self.theta(a1)?;
        let t2 = self.theta(a2)?;
        let e1: QVec = t1.iter().zip(&half_delta).map(|(x, d)| &big_r * &(x / &rr + d)).collect();
        let e2: QVec = t2.iter().zip(&half_delta).map(|(x, d)| &big_r * &(x / &rr - d)).collect();
        // λ_i = θ(a_i)/r ± δ/2 − e_i/R must vanish
        let l1_zero = t1.iter().zip(&half_delta).zip(&e1).all(|((x, d), e)| (x / &rr + d - e / &big_r).is_zero());
        let l2_zero = t2.iter().zip(&half_delta).zip(&e2).all(|((x, d), e)| (x / &rr - d - e / &big_r).is_zero());
        if !(l1_zero && l2_zero) {
            return Err(Error::Internal("lambda_i do not vanish".into()));
        }
        Ok(KernelC1 { e1, e2, rank: big_r })
    }

    /// For an isometry ϕ of the extended K3 lattice: with φ = B_{a2/r} ϕ B_{a1/r},
    /// checks B_{−e2/R} ∘ hilb_lift(φ) ∘ B_{−e1/R} = det(ϕ)^{n+1} ι̃_ϕ.
    pub fn kernel_c1_identity(&self, varphi: &QMat, r: i64, a1: &[Rat], a2: &[Rat]) -> Result<bool> {
        let kc = self.kernel_c1_solve(r, a1, a2)?;
        let rr = Rat::int(r);
        let over = |v: &[Rat], c: &Rat| -> QVec { v.iter().map(|x| x / c).collect() };
        let phi = self.k3.b_field(&over(a2, &rr))?.mul(varphi).mul(&self.k3.b_field(&over(a1, &rr))?);
        let det = varphi.det().signum();
        let neg = |v: &QVec| -> QVec { v.iter().map(|x| -x).collect() };
        let lhs = self
            .k3n
            .b_field(&neg(&over(&kc.e2, &kc.rank)))?
            .mul(&self.hilb_lift(&phi, det)?)
            .mul(&self.k3n.b_field(&neg(&over(&kc.e1, &kc.rank)))?);
        let mut rhs = self.iota_tilde(varphi)?;
        if det == -1 && (self.n + 1) % 2 == 1 {
            rhs = rhs.neg();
        }
        Ok(lhs == rhs)
    }
}

/// n!·rⁿ, the rank of the induced kernel on the Hilbert scheme.
pub fn kernel_rank(n: u32, r: i64) -> Rat {
    let fact: Rat = (1..=n as i64).map(Rat::int).product();
    fact * Rat::int(r).pow(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::vint;

    fn k3n2() -> LlvSpace {
        LlvSpace::new(&Lattice::preset(&Preset::K3n(2)))
    }

    #[test]
    fn e_op_basics() {
        let s = k3n2();
        let lam = vint(&[1, 2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let e = s.e_op(&lam).unwrap();
        assert_eq!(e.mul_vec(&s.alpha()), s.embed(&lam));
        let e2a = e.mul(&e).mul_vec(&s.alpha());
        let mut want = vec![Rat::zero(); 25];
        want[24] = s.base().norm(&lam);
        assert_eq!(e2a, want);
        assert!(e.mul(&e).mul(&e).is_zero());
        let h = s.grading();
        assert_eq!(h.commutator(&e), e.scale(&Rat::int(2)));
    }

    #[test]
    fn tau_and_mu() {
        let s = k3n2();
        let t = s.tau();
        assert!(t.mul(&t).is_identity());
        assert!(s.is_degree_reversing(&t));
        assert_eq!(t.det(), Rat::one());
        let m = s.mu(&Rat::new(2, 3)).unwrap().mul(&s.mu(&Rat::int(3)).unwrap());
        assert_eq!(m, s.mu(&Rat::int(2)).unwrap());
        assert!(s.mu(&Rat::zero()).is_err());
    }

    #[test]
    fn b_field_on_fm_line() {
        let s = k3n2();
        let lam = vint(&[1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        let r = Rat::int(2);
        let v = s.fm_beta_image(&r, &lam).unwrap();
        assert!(s.pair(&v, &v).is_zero());
        let back: QVec = lam.iter().map(|x| -(x / &r)).collect();
        let img = s.b_field(&back).unwrap().mul_vec(&v);
        assert_eq!(img, crate::matrix::vscale(&r, &s.alpha()));
    }

    #[test]
    fn kernel_rank_values() {
        assert_eq!(kernel_rank(2, 2), Rat::int(8));
        assert_eq!(kernel_rank(3, 2), Rat::int(48));
    }
}
