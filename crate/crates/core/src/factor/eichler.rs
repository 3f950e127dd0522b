//! Eichler transvections and the orbit moves built from them.
//!
//! Pivot conventions for the normal form: the first frame plane U1 = (e1, e2)
//! carries the result, the second U2 = (f1, f2) is the helper, and all other
//! basis vectors form M. A vector reduces to
//! `g·e1 + b·e2 + z`, where g = div(x), U2-part zero, and z ∈ M has
//! coordinates in [0, g). Two vectors share a normal form exactly when they have
//! equal norm, divisibility and discriminant class.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{minus_id_first_plane, witt_map};
use crate::error::{check_dim, Error, Result};
use crate::isometry::Isometry;
use crate::lattice::Lattice;
use crate::matrix::{content, dot, is_integral_vec, is_zero_vec, unit, vneg, vscale, QMat, QVec};
use crate::rat::{common_denominator, Rat};

/// E(e,a): x ↦ x − (a,x)e + (e,x)a − ½(a,a)(e,x)e, for e isotropic and a ⊥ e.
#[derive(Clone, Debug)]
pub struct Transvection {
    pub e: QVec,
    pub a: QVec,
    ge: QVec,
    ga: QVec,
    half_aa: Rat,
}

impl Transvection {
    /// No checks: `e` should be isotropic and orthogonal to `a`.
    pub fn new(lat: &Lattice, e: QVec, a: QVec) -> Transvection {
        let ge = lat.dual(&e);
        let ga = lat.dual(&a);
        let half_aa = dot(&ga, &a) / Rat::int(2);
        Transvection { e, a, ge, ga, half_aa }
    }

    pub fn apply(&self, x: &[Rat]) -> QVec {
        let ax = dot(&self.ga, x);
        let ex = dot(&self.ge, x);
        if ax.is_zero() && ex.is_zero() {
            return x.to_vec();
        }
        let ce = -(&ax + &self.half_aa * &ex);
        let mut out = x.to_vec();
        for (o, (ei, ai)) in out.iter_mut().zip(self.e.iter().zip(&self.a)) {
            if !ei.is_zero() {
                *o += &ce * ei;
            }
            if !ai.is_zero() && !ex.is_zero() {
                *o += &ex * ai;
            }
        }
        out
    }

    /// Replaces `m` by `E ∘ m`.
    pub fn left_apply(&self, m: &mut QMat) {
        let n = m.rows();
        for j in 0..m.cols() {
            let col = m.column(j);
            let img = self.apply(&col);
            for i in 0..n {
                m[(i, j)] = img[i].clone();
            }
        }
    }

    pub fn matrix(&self) -> QMat {
        let mut m = QMat::identity(self.e.len());
        self.left_apply(&mut m);
        m
    }
}

pub fn eichler_transvection(lat: &Lattice, e: &[Rat], a: &[Rat]) -> Result<Isometry> {
    check_dim(lat.rank(), e.len())?;
    check_dim(lat.rank(), a.len())?;
    if !is_integral_vec(e) || !is_integral_vec(a) {
        return Err(Error::NotIntegral("transvection data"));
    }
    if !lat.norm(e).is_zero() {
        return Err(Error::Precondition("e must be isotropic".into()));
    }
    if !lat.pair(e, a).is_zero() {
        return Err(Error::Precondition("a must be orthogonal to e".into()));
    }
    let m = Transvection::new(lat, e.to_vec(), a.to_vec()).matrix();
    if !m.is_integral() {
        return Err(Error::NotIntegral("transvection (odd (a,a))"));
    }
    Ok(Isometry::trusted(lat, m))
}

/// A word of transvections; `steps[0]` is applied first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransvectionWord {
    pub steps: Vec<(QVec, QVec)>,
}

impl TransvectionWord {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn matrix(&self, lat: &Lattice) -> QMat {
        let mut m = QMat::identity(lat.rank());
        for (e, a) in &self.steps {
            Transvection::new(lat, e.clone(), a.clone()).left_apply(&mut m);
        }
        m
    }

    pub fn apply(&self, lat: &Lattice, x: &[Rat]) -> QVec {
        self.steps.iter().fold(x.to_vec(), |v, (e, a)| Transvection::new(lat, e.clone(), a.clone()).apply(&v))
    }

    /// E(e,a)⁻¹ = E(e,−a), applied in reverse order.
    pub fn inverse(&self) -> TransvectionWord {
        TransvectionWord { steps: self.steps.iter().rev().map(|(e, a)| (e.clone(), vneg(a))).collect() }
    }

    /// `other` after `self`.
    pub fn then(mut self, other: &TransvectionWord) -> TransvectionWord {
        self.steps.extend(other.steps.iter().cloned());
        self
    }
}

struct Frame {
    e1: usize,
    e2: usize,
    f1: usize,
    f2: usize,
    rest: Vec<usize>,
}

impl Frame {
    fn of(lat: &Lattice) -> Result<Frame> {
        let planes = lat.planes();
        if planes.len() < 2 {
            return Err(Error::NoHyperbolicPlanes);
        }
        let (e1, e2) = planes[0];
        let (f1, f2) = planes[1];
        let rest = (0..lat.rank()).filter(|i| ![e1, e2, f1, f2].contains(i)).collect();
        Ok(Frame { e1, e2, f1, f2, rest })
    }
}

struct Reducer<'a> {
    lat: &'a Lattice,
    fr: Frame,
    x: QVec,
    word: TransvectionWord,
}

fn int(x: &Rat) -> BigInt {
    x.to_bigint()
}

impl Reducer<'_> {
    fn apply(&mut self, e: QVec, a: QVec) {
        if is_zero_vec(&a) {
            return;
        }
        let t = Transvection::new(self.lat, e.clone(), a.clone());
        self.x = t.apply(&self.x);
        self.word.steps.push((e, a));
    }

    fn n(&self) -> usize {
        self.lat.rank()
    }

    fn scaled_unit(&self, i: usize, k: &BigInt) -> QVec {
        vscale(&Rat::from(k.clone()), &unit(self.n(), i))
    }

    // X = [[a1, a2], [-b2, b1]] with a1 = x[e1], b1 = x[e2], a2 = x[f1], b2 = x[f2]
    fn x00(&self) -> BigInt {
        int(&self.x[self.fr.e1])
    }
    fn x01(&self) -> BigInt {
        int(&self.x[self.fr.f1])
    }
    fn x10(&self) -> BigInt {
        -int(&self.x[self.fr.f2])
    }
    fn x11(&self) -> BigInt {
        int(&self.x[self.fr.e2])
    }

    /// column 1 += k · column 2, via E(e1, k f2)
    fn col1_add(&mut self, k: &BigInt) {
        let (e, a) = (unit(self.n(), self.fr.e1), self.scaled_unit(self.fr.f2, k));
        self.apply(e, a);
    }
    /// column 2 += k · column 1, via E(e2, −k f1)
    fn col2_add(&mut self, k: &BigInt) {
        let (e, a) = (unit(self.n(), self.fr.e2), self.scaled_unit(self.fr.f1, &-k));
        self.apply(e, a);
    }
    /// row 1 += k · row 2, via E(e1, −k f1)
    fn row1_add(&mut self, k: &BigInt) {
        let (e, a) = (unit(self.n(), self.fr.e1), self.scaled_unit(self.fr.f1, &-k));
        self.apply(e, a);
    }
    /// row 2 += k · row 1, via E(e2, k f2)
    fn row2_add(&mut self, k: &BigInt) {
        let (e, a) = (unit(self.n(), self.fr.e2), self.scaled_unit(self.fr.f2, k));
        self.apply(e, a);
    }

    /// Brings X to diag(g, b) with g = gcd of its entries, g ≥ 0 and g | b.
    fn diagonalize(&mut self) {
        loop {
            // clear X01 with column operations
            while !self.x01().is_zero() {
                if self.x00().is_zero() {
                    self.col1_add(&BigInt::one());
                    continue;
                }
                let q = self.x01().div_floor(&self.x00());
                self.col2_add(&-q);
                if self.x01().is_zero() {
                    break;
                }
                let q = self.x00().div_floor(&self.x01());
                self.col1_add(&-q);
            }
            // clear X10 with row operations
            while !self.x10().is_zero() {
                if self.x00().is_zero() {
                    self.row1_add(&BigInt::one());
                    continue;
                }
                let q = self.x10().div_floor(&self.x00());
                self.row2_add(&-q);
                if self.x10().is_zero() {
                    break;
                }
                let q = self.x00().div_floor(&self.x10());
                self.row1_add(&-q);
            }
            if !self.x01().is_zero() {
                continue;
            }
            let (a, b) = (self.x00(), self.x11());
            if !a.is_zero() && !(&b % &a).is_zero() || a.is_zero() && !b.is_zero() {
                self.row1_add(&BigInt::one());
                continue;
            }
            break;
        }
        if self.x00().is_negative() {
            // −I on X as the square of the rotation (r1, r2) ↦ (−r2, r1)
            for _ in 0..2 {
                self.row1_add(&-BigInt::one());
                self.row2_add(&BigInt::one());
                self.row1_add(&-BigInt::one());
            }
        }
    }

    fn reduce(&mut self) -> Result<BigInt> {
        let div = self.lat.divisibility(&self.x)?;
        self.diagonalize();
        if self.x00() != div {
            // put div(x) into the f1 coordinate with E(f1, a), a ⊥ f1; here (f1, x) = 0
            // so the move is x ↦ x − (a,x) f1
            let gx = self.lat.dual(&self.x);
            let idx: Vec<usize> = (0..self.n()).filter(|&i| i != self.fr.f2).collect();
            let vals: Vec<BigInt> = idx.iter().map(|&i| int(&gx[i])).collect();
            let (g, coeffs) = bezout(&vals);
            debug_assert_eq!(g, div);
            let mut a = vec![Rat::zero(); self.n()];
            for (&i, c) in idx.iter().zip(coeffs) {
                a[i] = Rat::from(-c);
            }
            let e = unit(self.n(), self.fr.f1);
            self.apply(e, a);
            debug_assert_eq!(int(&self.x[self.fr.f1]), div);
            self.diagonalize();
        }
        if self.x00() != div {
            return Err(Error::Internal("Eichler reduction did not reach the divisibility".into()));
        }
        // reduce the M-part modulo div with E(e2, v), v ∈ M: z ↦ z − div·v
        let mut v = vec![Rat::zero(); self.n()];
        for &i in &self.fr.rest {
            v[i] = Rat::from(int(&self.x[i]).div_floor(&div));
        }
        let e = unit(self.n(), self.fr.e2);
        self.apply(e, v);
        Ok(div)
    }
}

/// Extended gcd of a list: (g, c) with Σ c_i v_i = g ≥ 0.
fn bezout(vals: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    let mut g = BigInt::zero();
    let mut coeffs = vec![BigInt::zero(); vals.len()];
    for (i, v) in vals.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let e = g.extended_gcd(v);
        // e.gcd = e.x * g + e.y * v
        for c in coeffs.iter_mut().take(i) {
            *c *= &e.x;
        }
        coeffs[i] = e.y.clone();
        g = e.gcd;
    }
    if g.is_negative() {
        g = -g;
        for c in coeffs.iter_mut() {
            *c = -&*c;
        }
    }
    (g, coeffs)
}

/// The transvection word reducing `x` to its normal form, and that normal form.
pub fn eichler_normal_form(lat: &Lattice, x: &[Rat]) -> Result<(TransvectionWord, QVec)> {
    check_dim(lat.rank(), x.len())?;
    if !lat.is_primitive(x) {
        return Err(Error::Precondition("vector must be primitive and integral".into()));
    }
    let fr = Frame::of(lat)?;
    let mut r = Reducer { lat, fr, x: x.to_vec(), word: TransvectionWord::default() };
    r.reduce()?;
    Ok((r.word, r.x))
}

#[derive(Clone, Debug)]
pub struct EichlerMove {
    pub g: Isometry,
    pub word: TransvectionWord,
}

/// A product of transvections sending `x` to `y`.
pub fn eichler_move(lat: &Lattice, x: &[Rat], y: &[Rat]) -> Result<EichlerMove> {
    check_dim(lat.rank(), x.len())?;
    check_dim(lat.rank(), y.len())?;
    if lat.planes().len() < 2 {
        return Err(Error::NoHyperbolicPlanes);
    }
    let (nx, ny) = (lat.norm(x), lat.norm(y));
    if nx != ny {
        return Err(Error::NormMismatch(nx.to_string(), ny.to_string()));
    }
    let (dx, dy) = (lat.divisibility(x)?, lat.divisibility(y)?);
    if dx != dy {
        return Err(Error::DivisibilityMismatch(dx.to_string(), dy.to_string()));
    }
    let (wx, nfx) = eichler_normal_form(lat, x)?;
    let (wy, nfy) = eichler_normal_form(lat, y)?;
    if nfx != nfy {
        return Err(Error::DiscClassMismatch);
    }
    let word = wx.then(&wy.inverse());
    let g = Isometry::trusted(lat, word.matrix(lat));
    debug_assert_eq!(g.apply(x), y);
    Ok(EichlerMove { g, word })
}

/// ρ_u = h·ρ_w with h ∈ O(L) and (w,w) = −(u,u) > 0, for L unimodular.
pub fn positive_reflection_rewrite(lat: &Lattice, u: &[Rat]) -> Result<(Isometry, QVec)> {
    check_dim(lat.rank(), u.len())?;
    if !lat.is_unimodular() {
        return Err(Error::Precondition("lattice must be unimodular".into()));
    }
    if !lat.is_primitive(u) {
        return Err(Error::Precondition("u must be primitive and integral".into()));
    }
    let norm = lat.norm(u);
    if !norm.is_negative() {
        return Err(Error::BadNorm(format!("(u,u) = {norm} must be negative")));
    }
    let m = -(&norm / &Rat::int(2));
    let target = lat.plane_vector(0, &Rat::one(), &m);
    let mv = eichler_move(lat, u, &target)?;
    let g = mv.g.matrix();
    let g_inv = mv.g.inverse(lat);
    let h = g_inv.matrix().mul(&minus_id_first_plane(lat)?).mul(g);
    let w = g_inv.apply(&lat.plane_vector(0, &Rat::one(), &-m));
    Ok((Isometry::trusted(lat, h), w))
}

/// For α = λ + kδ with λ primitive in L: a transvection word g ∈ Γ with g(α)
/// the canonical vector of norm (α,α) in the first plane of L.
pub fn move_into_l(lat: &Lattice, alpha: &[Rat]) -> Result<EichlerMove> {
    check_dim(lat.rank(), alpha.len())?;
    lat.delta().ok_or(Error::NoDelta)?;
    if !is_integral_vec(alpha) {
        return Err(Error::NotIntegral("alpha"));
    }
    let lambda = lat.project_l(alpha);
    if is_zero_vec(&lambda) || !content(&lambda).is_one() {
        return Err(Error::NonPrimitiveLambda);
    }
    let target = lat.canonical_vector(&lat.norm(alpha))?;
    eichler_move(lat, alpha, &target)
}

#[derive(Clone, Debug)]
pub struct RationalMove {
    /// g = h ∘ f
    pub g: Isometry,
    /// f ∈ O(L_Q), extended by the identity on δ
    pub f: Isometry,
    /// h ∈ Γ, a transvection word
    pub h: Isometry,
}

/// For x = λ + tδ with (λ,λ) ≠ 0: g = h∘f with g(x) ∈ L_Q.
pub fn move_rational_into_lq(lat: &Lattice, x: &[Rat]) -> Result<RationalMove> {
    check_dim(lat.rank(), x.len())?;
    lat.delta().ok_or(Error::NoDelta)?;
    let lambda = lat.project_l(x);
    let l = lat.l_part()?;
    let norm = l.norm(&lambda);
    if norm.is_zero() {
        return Err(Error::IsotropicLambda);
    }
    let q = Rat::from(common_denominator(x.iter()));
    let qx = vscale(&q, x);
    let ql = lat.project_l(&qx);
    let f = if content(&ql).is_one() {
        Isometry::identity(lat.rank())
    } else {
        let target = l.canonical_vector(&l.norm(&ql))?;
        let fl = witt_map(&l, &ql, &target)?;
        Isometry::trusted(lat, lat.extend_from_l(fl.matrix()))
    };
    let h = move_into_l(lat, &f.apply(&qx))?.g;
    let g = h.compose(&f);
    debug_assert!(lat.norm(&g.apply(x)) == lat.norm(x));
    Ok(RationalMove { g, f, h })
}
