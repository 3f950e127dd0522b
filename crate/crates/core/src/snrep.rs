//! Symmetric powers of a quadratic space and the subspace S_[n] spanned by
//! n-th powers of isotropic vectors.
//!
//! An element of Sym^k V is a polynomial of degree k in the basis vectors,
//! stored densely over sorted monomials. S_[n] is computed as the kernel of the
//! contraction Δ = Σ G_ij ∂_i ∂_j. Coordinates on S_[n] are the values at the
//! free monomials of the row-reduced Δ, so reading coordinates is a projection.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::isometry::is_isometry;
use crate::lattice::Lattice;
use crate::llv::LlvSpace;
use crate::matrix::{is_zero_vec, unit, vadd, vscale, QMat, QVec};
use crate::random::Rng64;
use crate::rat::Rat;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Degree {
    monos: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
    /// idx·d + var ↦ index of the product in the next degree
    up: Vec<usize>,
    /// idx·d + var ↦ index after removing one copy of var, or NONE
    down: Vec<usize>,
}

fn monomials(d: usize, k: usize) -> Vec<Vec<u16>> {
    fn go(d: usize, k: usize, start: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i as u16);
            go(d, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(d, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// (variable, multiplicity) runs of a sorted monomial.
fn runs(m: &[u16]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &v in m {
        match out.last_mut() {
            Some((u, c)) if *u == v as usize => *c += 1,
            _ => out.push((v as usize, 1)),
        }
    }
    out
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r
}

/// C(d+n−1, n) − C(d+n−3, n−2)
pub fn expected_dim(d: usize, n: usize) -> u128 {
    let (d, n) = (d as u64, n as u64);
    let full = binomial(d + n - 1, n);
    if n < 2 {
        full
    } else {
        full - binomial(d + n - 3, n - 2)
    }
}

fn factorial(n: usize) -> Rat {
    (1..=n as i64).map(Rat::int).product()
}

fn sparse_columns(m: &QMat) -> Vec<Vec<(usize, Rat)>> {
    (0..m.cols())
        .map(|j| (0..m.rows()).filter(|&i| !m[(i, j)].is_zero()).map(|i| (i, m[(i, j)].clone())).collect())
        .collect()
}

fn permanent(m: &[Vec<Rat>]) -> Rat {
    fn go(m: &[Vec<Rat>], row: usize, used: &mut Vec<bool>) -> Rat {
        if row == m.len() {
            return Rat::one();
        }
        let mut acc = Rat::zero();
        for j in 0..m.len() {
            if used[j] || m[row][j].is_zero() {
                continue;
            }
            used[j] = true;
            acc += &m[row][j] * &go(m, row + 1, used);
            used[j] = false;
        }
        acc
    }
    go(m, 0, &mut vec![false; m.len()])
}

/// Sym^k V for k = 0..=n over a fixed Gram matrix.
#[derive(Clone, Debug)]
pub struct SymSpace {
    d: usize,
    n: usize,
    gram: QMat,
    degrees: Vec<Degree>,
}

impl SymSpace {
    pub fn new(gram: &QMat, n: usize) -> SymSpace {
        let d = gram.rows();
        let mut degrees: Vec<Degree> = (0..=n)
            .map(|k| {
                let monos = monomials(d, k);
                let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
                Degree { monos, index, up: vec![], down: vec![] }
            })
            .collect();
        for k in 0..=n {
            let mut up = Vec::new();
            let mut down = Vec::new();
            for m in &degrees[k].monos {
                for v in 0..d as u16 {
                    if k < n {
                        let mut p = m.clone();
                        let pos = p.partition_point(|&x| x <= v);
                        p.insert(pos, v);
                        up.push(degrees[k + 1].index[&p]);
                    }
                    if k > 0 {
                        down.push(match m.iter().position(|&x| x == v) {
                            Some(pos) => {
                                let mut q = m.clone();
                                q.remove(pos);
                                degrees[k - 1].index[&q]
                            }
                            None => NONE,
                        });
                    }
                }
            }
            degrees[k].up = up;
            degrees[k].down = down;
        }
        SymSpace { d, n, gram: gram.clone(), degrees }
    }

    pub fn base_dim(&self) -> usize {
        self.d
    }

    pub fn power_n(&self) -> usize {
        self.n
    }

    pub fn dim(&self, k: usize) -> usize {
        self.degrees[k].monos.len()
    }

    pub fn monomial(&self, k: usize, i: usize) -> &[u16] {
        &self.degrees[k].monos[i]
    }

    pub fn index_of(&self, m: &[u16]) -> Option<usize> {
        let mut s = m.to_vec();
        s.sort_unstable();
        self.degrees.get(s.len())?.index.get(&s).copied()
    }

    fn mul_sparse(&self, k: usize, p: &[Rat], v: &[(usize, Rat)]) -> QVec {
        let deg = &self.degrees[k];
        let mut out = vec![Rat::zero(); self.dim(k + 1)];
        for (i, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, x) in v {
                out[deg.up[i * self.d + j]] += c * x;
            }
        }
        out
    }

    /// p·v for p of degree k and v ∈ V.
    pub fn mul_linear(&self, k: usize, p: &[Rat], v: &[Rat]) -> QVec {
        let sv: Vec<(usize, Rat)> = v.iter().cloned().enumerate().filter(|(_, x)| !x.is_zero()).collect();
        self.mul_sparse(k, p, &sv)
    }

    /// v^k
    pub fn power(&self, v: &[Rat], k: usize) -> QVec {
        let mut p = vec![Rat::one()];
        for j in 0..k {
            p = self.mul_linear(j, &p, v);
        }
        p
    }

    /// The directional derivative Σ ξ_j ∂_j of a degree-k polynomial.
    pub fn derivative(&self, k: usize, p: &[Rat], xi: &[Rat]) -> QVec {
        let deg = &self.degrees[k];
        let mut out = vec![Rat::zero(); self.dim(k - 1)];
        for (i, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, mult) in runs(&deg.monos[i]) {
                if !xi[j].is_zero() {
                    out[deg.down[i * self.d + j]] += c * &xi[j] * Rat::int(mult as i64);
                }
            }
        }
        out
    }

    /// Sym^n(f) on a degree-n polynomial, f: V → V' given by its matrix.
    pub fn apply_map(&self, target: &SymSpace, f: &QMat, p: &[Rat]) -> QVec {
        let cols = sparse_columns(f);
        let mut out = vec![Rat::zero(); target.dim(self.n)];
        for (i, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut acc = vec![c.clone()];
            for (k, &a) in self.degrees[self.n].monos[i].iter().enumerate() {
                acc = target.mul_sparse(k, &acc, &cols[a as usize]);
            }
            for (o, x) in out.iter_mut().zip(acc) {
                if !x.is_zero() {
                    *o += x;
                }
            }
        }
        out
    }

    /// The derivation action of X ∈ End(V) on a degree-n polynomial.
    pub fn derivation(&self, x: &QMat, p: &[Rat]) -> QVec {
        self.derivation_sparse(&sparse_columns(x), p)
    }

    fn derivation_sparse(&self, cols: &[Vec<(usize, Rat)>], p: &[Rat]) -> QVec {
        let n = self.n;
        let top = &self.degrees[n];
        let below = &self.degrees[n - 1];
        let mut out = vec![Rat::zero(); self.dim(n)];
        for (idx, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, mult) in runs(&top.monos[idx]) {
                if cols[j].is_empty() {
                    continue;
                }
                let q = top.down[idx * self.d + j];
                let cm = c * &Rat::int(mult as i64);
                for (i, x) in &cols[j] {
                    out[below.up[q * self.d + i]] += &cm * x;
                }
            }
        }
        out
    }

    /// Σ G_ij ∂_i ∂_j, degree n → n − 2.
    pub fn contraction(&self, p: &[Rat]) -> QVec {
        let n = self.n;
        if n < 2 {
            return vec![];
        }
        let d = self.d;
        let top = &self.degrees[n];
        let mid = &self.degrees[n - 1];
        let mut out = vec![Rat::zero(); self.dim(n - 2)];
        for (idx, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = runs(&top.monos[idx]);
            for &(j, cj) in &r {
                let q = top.down[idx * d + j];
                for &(i, ci) in &r {
                    let g = &self.gram[(i, j)];
                    if g.is_zero() {
                        continue;
                    }
                    let ci = if i == j { ci - 1 } else { ci };
                    if ci == 0 {
                        continue;
                    }
                    let t = mid.down[q * d + i];
                    out[t] += c * g * Rat::int((ci * cj) as i64);
                }
            }
        }
        out
    }

    pub fn contraction_matrix(&self) -> QMat {
        let n = self.n;
        let cols: Vec<QVec> = (0..self.dim(n)).map(|i| self.contraction(&unit(self.dim(n), i))).collect();
        QMat::from_columns(self.dim(n - 2), &cols)
    }

    /// ⟨v₁⋯v_n, w₁⋯w_n⟩ = perm[(v_i, w_j)], extended bilinearly.
    pub fn pair(&self, p: &[Rat], q: &[Rat]) -> Rat {
        let top = &self.degrees[self.n];
        let sq: Vec<usize> = (0..q.len()).filter(|&j| !q[j].is_zero()).collect();
        let mut acc = Rat::zero();
        for (i, x) in p.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let a = &top.monos[i];
            for &j in &sq {
                let b = &top.monos[j];
                let m: Vec<Vec<Rat>> =
                    a.iter().map(|&s| b.iter().map(|&t| self.gram[(s as usize, t as usize)].clone()).collect()).collect();
                let pm = permanent(&m);
                if !pm.is_zero() {
                    acc += x * &q[j] * pm;
                }
            }
        }
        acc
    }
}

/// A linear operator stored by sparse columns.
#[derive(Clone, Debug)]
pub struct SparseOp {
    rows: usize,
    cols: Vec<Vec<(usize, Rat)>>,
}

impl SparseOp {
    pub fn apply(&self, x: &[Rat]) -> QVec {
        let mut out = vec![Rat::zero(); self.rows];
        for (c, xc) in self.cols.iter().zip(x) {
            if xc.is_zero() {
                continue;
            }
            for (i, v) in c {
                out[*i] += xc * v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> QMat {
        let mut m = QMat::zeros(self.rows, self.cols.len());
        for (j, c) in self.cols.iter().enumerate() {
            for (i, v) in c {
                m[(*i, j)] = v.clone();
            }
        }
        m
    }
}

/// S_[n]V ⊂ Sym^n V.
#[derive(Clone, Debug)]
pub struct SnSpace {
    lattice: Lattice,
    llv: Option<LlvSpace>,
    sym: SymSpace,
    basis: Vec<Vec<(usize, Rat)>>,
    free: Vec<usize>,
}

impl SnSpace {
    pub fn new(lat: &Lattice, n: usize) -> Result<SnSpace> {
        if n == 0 {
            return Err(Error::Precondition("n must be at least 1".into()));
        }
        let sym = SymSpace::new(lat.gram(), n);
        let top = sym.dim(n);
        let (basis, free) = if n < 2 {
            ((0..top).map(|i| vec![(i, Rat::one())]).collect(), (0..top).collect())
        } else {
            let (r, pivots) = sym.contraction_matrix().rref();
            let mut is_pivot = vec![false; top];
            for &p in &pivots {
                is_pivot[p] = true;
            }
            let free: Vec<usize> = (0..top).filter(|&j| !is_pivot[j]).collect();
            let basis = free
                .iter()
                .map(|&f| {
                    let mut v = vec![(f, Rat::one())];
                    for (row, &p) in pivots.iter().enumerate() {
                        let x = &r[(row, f)];
                        if !x.is_zero() {
                            v.push((p, -x));
                        }
                    }
                    v
                })
                .collect();
            (basis, free)
        };
        Ok(SnSpace { lattice: lat.clone(), llv: None, sym, basis, free })
    }

    /// S_[n] of an LLV space; this enables Ψ and the grading.
    pub fn over_llv(space: &LlvSpace, n: usize) -> Result<SnSpace> {
        let mut s = SnSpace::new(space.space(), n)?;
        s.llv = Some(space.clone());
        Ok(s)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn llv(&self) -> Option<&LlvSpace> {
        self.llv.as_ref()
    }

    fn llv_or_err(&self) -> Result<&LlvSpace> {
        self.llv.as_ref().ok_or_else(|| Error::Precondition("S_[n] is not built over an LLV space".into()))
    }

    pub fn sym(&self) -> &SymSpace {
        &self.sym
    }

    pub fn n(&self) -> usize {
        self.sym.n
    }

    pub fn base_dim(&self) -> usize {
        self.sym.d
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn sym_dim(&self) -> usize {
        self.sym.dim(self.n())
    }

    /// The monomial whose coefficient is the i-th coordinate.
    pub fn free_monomial(&self, i: usize) -> &[u16] {
        self.sym.monomial(self.n(), self.free[i])
    }

    pub fn to_sym(&self, s: &[Rat]) -> QVec {
        let mut out = vec![Rat::zero(); self.sym_dim()];
        for (c, b) in s.iter().zip(&self.basis) {
            if c.is_zero() {
                continue;
            }
            for (i, x) in b {
                out[*i] += c * x;
            }
        }
        out
    }

    /// Coordinates of a polynomial known to lie in S_[n].
    pub fn coords_unchecked(&self, p: &[Rat]) -> QVec {
        self.free.iter().map(|&i| p[i].clone()).collect()
    }

    pub fn coords(&self, p: &[Rat]) -> Result<QVec> {
        check_dim(self.sym_dim(), p.len())?;
        if self.n() >= 2 && !is_zero_vec(&self.sym.contraction(p)) {
            return Err(Error::Precondition("polynomial is not in S_[n]".into()));
        }
        Ok(self.coords_unchecked(p))
    }

    pub fn contains(&self, p: &[Rat]) -> bool {
        self.n() < 2 || is_zero_vec(&self.sym.contraction(p))
    }

    /// v^n in S-coordinates; v must be isotropic.
    pub fn power(&self, v: &[Rat]) -> Result<QVec> {
        check_dim(self.base_dim(), v.len())?;
        if !self.lattice.norm(v).is_zero() && self.n() >= 2 {
            return Err(Error::Precondition("v is not isotropic".into()));
        }
        Ok(self.coords_unchecked(&self.sym.power(v, self.n())))
    }

    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        self.sym.pair(&self.to_sym(x), &self.to_sym(y))
    }

    /// Gram matrix of b_[n] on the S-basis.
    pub fn gram(&self) -> QMat {
        let polys: Vec<QVec> = (0..self.dim()).map(|i| self.to_sym(&unit(self.dim(), i))).collect();
        let n = self.dim();
        let mut g = QMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = self.sym.pair(&polys[i], &polys[j]);
                g[(i, j)] = x.clone();
                g[(j, i)] = x;
            }
        }
        g
    }

    /// Sym^n(f) restricted to S_[n], for an isometry f: V → V' of the underlying lattices.
    pub fn restrict_between(&self, target: &SnSpace, f: &QMat) -> Result<QMat> {
        check_dim(target.base_dim(), f.rows())?;
        check_dim(self.base_dim(), f.cols())?;
        if f.transpose().mul(target.lattice.gram()).mul(f) != *self.lattice.gram() {
            return Err(Error::NotIsometry);
        }
        if self.n() != target.n() {
            return Err(Error::Precondition("symmetric powers differ".into()));
        }
        let cols: Vec<QVec> = self
            .basis
            .iter()
            .map(|b| {
                let mut p = vec![Rat::zero(); self.sym_dim()];
                for (i, x) in b {
                    p[*i] = x.clone();
                }
                target.coords_unchecked(&self.sym.apply_map(&target.sym, f, &p))
            })
            .collect();
        Ok(QMat::from_columns(target.dim(), &cols))
    }

    pub fn restrict_sym(&self, f: &QMat) -> Result<QMat> {
        check_dim(self.base_dim(), f.rows())?;
        if !is_isometry(&self.lattice, f) {
            return Err(Error::NotIsometry);
        }
        self.restrict_between(self, f)
    }

    /// The derivation action of X ∈ End(V) on S_[n], for X in the orthogonal Lie algebra.
    pub fn derivation(&self, x: &QMat) -> Result<SparseOp> {
        check_dim(self.base_dim(), x.rows())?;
        let g = self.lattice.gram();
        if !x.transpose().mul(g).add(&g.mul(x)).is_zero() {
            return Err(Error::Precondition("operator is not skew-adjoint".into()));
        }
        Ok(self.derivation_unchecked(x))
    }

    fn derivation_unchecked(&self, x: &QMat) -> SparseOp {
        let xc = sparse_columns(x);
        let cols = self
            .basis
            .iter()
            .map(|b| {
                let mut p = vec![Rat::zero(); self.sym_dim()];
                for (i, v) in b {
                    p[*i] = v.clone();
                }
                let img = self.sym.derivation_sparse(&xc, &p);
                self.free.iter().enumerate().filter(|(_, &f)| !img[f].is_zero()).map(|(k, &f)| (k, img[f].clone())).collect()
            })
            .collect();
        SparseOp { rows: self.dim(), cols }
    }

    /// Ψ(λ₁⋯λ_k) = e_{λ₁}⋯e_{λ_k}(α^n/n!), in S-coordinates.
    pub fn psi(&self, lambdas: &[QVec]) -> Result<QVec> {
        let llv = self.llv_or_err()?;
        let n = self.n();
        if lambdas.len() > 2 * n {
            return Ok(vec![Rat::zero(); self.dim()]);
        }
        let mut p = self.sym.power(&llv.alpha(), n);
        let inv = factorial(n).recip();
        p.iter_mut().for_each(|x| *x *= &inv);
        for l in lambdas.iter().rev() {
            p = self.sym.derivation(&llv.e_op(l)?, &p);
        }
        Ok(self.coords_unchecked(&p))
    }

    /// The h̃-weight of each S-basis vector (the basis is homogeneous).
    pub fn weights(&self) -> Result<Vec<i64>> {
        let llv = self.llv_or_err()?;
        let h = llv.grading();
        Ok((0..self.dim())
            .map(|i| self.free_monomial(i).iter().map(|&v| h[(v as usize, v as usize)].to_i64().expect("small")).sum())
            .collect())
    }

    /// The induced grading operator on S_[n] (diagonal in the S-basis).
    pub fn grading(&self) -> Result<QMat> {
        let w = self.weights()?;
        Ok(QMat::diag(&w.into_iter().map(Rat::int).collect::<Vec<_>>()))
    }

    /// Rank of the span of sampled n-th powers of isotropic vectors. The
    /// samples are integral, and the rank is certified modulo a prime first.
    pub fn isotropic_span_rank(&self, rng: &mut Rng64, samples: usize) -> Result<usize> {
        let (a, b) = hyperbolic_pair(&self.lattice)?;
        let comp = complement_basis(&self.lattice, &a, &b);
        let den = comp.iter().chain([&a, &b]).flat_map(|v| v.iter()).fold(BigInt::one(), |acc, x| acc.lcm(&x.denom()));
        let mut rows = Vec::with_capacity(samples + 1);
        // the parametrization below misses the line through b
        let bb = vscale(&Rat::from_bigint(den.clone()), &b);
        rows.push(self.coords_unchecked(&self.sym.power(&bb, self.n())));
        for _ in 0..samples {
            let s = Rat::int(rng.gen_range(1..=3));
            let mut x = vec![Rat::zero(); self.base_dim()];
            for c in &comp {
                let k = Rat::int(rng.gen_range(-3..=3));
                if !k.is_zero() {
                    x = vadd(&x, &vscale(&k, c));
                }
            }
            let nx = self.lattice.norm(&x);
            let v = vadd(&vadd(&vscale(&s, &a), &x), &vscale(&(nx / (Rat::int(2) * &s)), &b));
            let v = vscale(&Rat::from_bigint(den.clone()), &v);
            debug_assert!(self.lattice.norm(&v).is_zero());
            let p = self.sym.power(&v, self.n());
            if !self.contains(&p) {
                return Err(Error::Internal("isotropic power outside S_[n]".into()));
            }
            rows.push(self.coords_unchecked(&p));
        }
        let r = rank_mod_p(&rows);
        if r == Some(self.dim()) {
            return Ok(r.unwrap_or(0));
        }
        Ok(QMat::from_rows(rows).rank())
    }
}

const PRIME: u64 = 2_305_843_009_213_693_951; // 2^61 − 1

fn mod_p(x: &Rat) -> Option<u64> {
    let p = BigInt::from(PRIME);
    let num = x.numer().mod_floor(&p).to_u64()?;
    let den = x.denom().mod_floor(&p).to_u64()?;
    if den == 0 {
        return None;
    }
    Some(mulmod(num, powmod(den, PRIME - 2)))
}

fn mulmod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % PRIME as u128) as u64
}

fn powmod(mut a: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a);
        }
        a = mulmod(a, a);
        e >>= 1;
    }
    r
}

/// Rank of the rows modulo 2^61 − 1; a lower bound for the rank over Q.
fn rank_mod_p(rows: &[QVec]) -> Option<usize> {
    let mut m: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(mod_p).collect::<Option<Vec<_>>>()).collect::<Option<_>>()?;
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(rank, p);
        let inv = powmod(m[rank][c], PRIME - 2);
        let pivot: Vec<u64> = m[rank].iter().map(|&x| mulmod(x, inv)).collect();
        for row in m.iter_mut().skip(rank + 1) {
            let f = row[c];
            if f == 0 {
                continue;
            }
            for (x, &y) in row.iter_mut().zip(&pivot) {
                *x = (*x + PRIME - mulmod(f, y)) % PRIME;
            }
        }
        m[rank] = pivot;
        rank += 1;
    }
    Some(rank)
}

/// Isotropic a, b with (a, b) = −1: from a documented hyperbolic plane, or by
/// a search over small vectors.
pub fn hyperbolic_pair(lat: &Lattice) -> Result<(QVec, QVec)> {
    let g = lat.gram();
    let d = lat.rank();
    for &(p, q) in lat.planes() {
        if g[(p, p)].is_zero() && g[(q, q)].is_zero() && g[(p, q)] == Rat::int(-1) {
            return Ok((unit(d, p), unit(d, q)));
        }
    }
    let total = 3usize.checked_pow(d as u32).filter(|&t| t <= 3usize.pow(9)).ok_or(Error::NoIsotropicFrame)?;
    for code in 1..total {
        let mut c = code;
        let a: QVec = (0..d)
            .map(|_| {
                let x = (c % 3) as i64 - 1;
                c /= 3;
                Rat::int(x)
            })
            .collect();
        if !lat.norm(&a).is_zero() {
            continue;
        }
        let ga = lat.dual(&a);
        let Some(i) = ga.iter().position(|x| !x.is_zero()) else { continue };
        let y = unit(d, i);
        let cy = ga[i].clone();
        // b' = y − ((y,y)/2c)·a is isotropic with (a, b') = c
        let b1 = vadd(&y, &vscale(&(-(lat.norm(&y) / (Rat::int(2) * &cy))), &a));
        let b = vscale(&(-cy.recip()), &b1);
        return Ok((a, b));
    }
    Err(Error::NoIsotropicFrame)
}

/// A basis of ⟨a, b⟩^⊥ for a hyperbolic pair with (a, b) = −1.
fn complement_basis(lat: &Lattice, a: &[Rat], b: &[Rat]) -> Vec<QVec> {
    let d = lat.rank();
    let mut out: Vec<QVec> = Vec::new();
    for i in 0..d {
        let y = unit(d, i);
        let p = vadd(&vadd(&y, &vscale(&lat.pair(&y, b), a)), &vscale(&lat.pair(&y, a), b));
        let mut trial = out.clone();
        trial.push(p.clone());
        if QMat::from_rows(trial).rank() == out.len() + 1 {
            out.push(p);
        }
        if out.len() == d - 2 {
            break;
        }
    }
    out
}

/// The isometry recovered from a map on S_[n], with det(f)^n-twist ε:
/// Φ = ε·S_[n](f) where ε = 1 for n odd and ε = det f for n even.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub f: QMat,
    pub eps: i32,
    pub scalars: Vec<Rat>,
}

/// The w with P = c·w^n, if P is a pure power.
fn pure_power(sym: &SymSpace, p: &[Rat]) -> Result<(QVec, Rat)> {
    let n = sym.n;
    let d = sym.d;
    if is_zero_vec(p) {
        return Err(Error::NotDecomposable);
    }
    for shift in 0..4i64 {
        let xi: QVec = (0..d as i64).map(|j| Rat::int(1 + ((j * 7 + shift * 13) % 11))).collect();
        let mut q = p.to_vec();
        for k in (2..=n).rev() {
            q = sym.derivative(k, &q, &xi);
        }
        if is_zero_vec(&q) {
            continue;
        }
        let wn = sym.power(&q, n);
        let Some(i) = wn.iter().position(|x| !x.is_zero()) else { continue };
        let c = &p[i] / &wn[i];
        if wn.iter().zip(p).all(|(x, y)| &(x * &c) == y) {
            return Ok((q, c));
        }
        return Err(Error::NotDecomposable);
    }
    Err(Error::NotDecomposable)
}

/// Recovers f with Φ = ε·S_[n](f) from a map Φ: S_[n]V₁ → S_[n]V₂ in S-coordinates.
pub fn recover(src: &SnSpace, dst: &SnSpace, phi: &QMat) -> Result<Recovery> {
    let n = src.n();
    let d = src.base_dim();
    check_dim(dst.base_dim(), d)?;
    check_dim(src.dim(), phi.cols())?;
    check_dim(dst.dim(), phi.rows())?;
    if n % 2 == 0 && d % 2 == 0 {
        return Err(Error::EvenDimensionalGuard);
    }
    let (a, b) = hyperbolic_pair(&src.lattice)?;
    let mut vs = vec![a.clone(), b.clone()];
    for x in complement_basis(&src.lattice, &a, &b) {
        let nx = src.lattice.norm(&x) / Rat::int(2);
        vs.push(vadd(&vadd(&a, &x), &vscale(&nx, &b)));
    }
    let mut ws = Vec::with_capacity(d);
    let mut cs = Vec::with_capacity(d);
    for v in &vs {
        let img = dst.to_sym(&phi.mul_vec(&src.power(v)?));
        let (w, c) = pure_power(&dst.sym, &img)?;
        ws.push(w);
        cs.push(c);
    }
    let v_inv = QMat::from_columns(d, &vs).inverse().ok_or_else(|| Error::Internal("spanning set is dependent".into()))?;
    let eps_choices: &[i32] = if n % 2 == 1 { &[1] } else { &[1, -1] };
    let mut last = Error::ScalarInconsistency;
    for &eps in eps_choices {
        let e = Rat::int(eps as i64);
        let Some(sb) = (&e * &cs[1]).nth_root(n as u32) else { continue };
        let wb = &ws[1];
        let mut scalars = Vec::with_capacity(d);
        let mut ok = true;
        for (i, (v, w)) in vs.iter().zip(&ws).enumerate() {
            let s = if i == 1 {
                sb.clone()
            } else {
                let ww = dst.lattice.pair(w, wb);
                if ww.is_zero() {
                    ok = false;
                    break;
                }
                src.lattice.pair(v, &b) / (&sb * &ww)
            };
            if s.pow(n as i32) != &e * &cs[i] {
                ok = false;
                break;
            }
            scalars.push(s);
        }
        if !ok {
            continue;
        }
        let cols: Vec<QVec> = ws.iter().zip(&scalars).map(|(w, s)| vscale(s, w)).collect();
        let mut f = QMat::from_columns(d, &cols).mul(&v_inv);
        if n % 2 == 0 && f.det().signum() != eps {
            f = f.neg();
        }
        let s = match src.restrict_between(dst, &f) {
            Ok(s) => s,
            Err(_) => {
                last = Error::NotConjugating("recovered map is not an isometry".into());
                continue;
            }
        };
        if s.scale(&e) != *phi {
            last = Error::NotConjugating("S_[n](f) differs from the input".into());
            continue;
        }
        return Ok(Recovery { f, eps, scalars });
    }
    Err(last)
}

/// H̃(S(f₂)∘Φ∘S(f₁)) = f₂∘H̃(Φ)∘f₁, times det(f₁)det(f₂) when n is even.
pub fn compose_rule_check(sp: &SnSpace, f1: &QMat, f2: &QMat, phi: &QMat) -> Result<bool> {
    let base = recover(sp, sp, phi)?.f;
    let composed = sp.restrict_sym(f2)?.mul(phi).mul(&sp.restrict_sym(f1)?);
    let lhs = recover(sp, sp, &composed)?.f;
    let mut rhs = f2.mul(&base).mul(f1);
    if sp.n() % 2 == 0 && f1.det().signum() * f2.det().signum() == -1 {
        rhs = rhs.neg();
    }
    Ok(lhs == rhs)
}

fn commutation_parity(m: &QMat, h_src: &QMat, h_dst: &QMat) -> Option<u8> {
    let left = m.mul(h_src);
    let right = h_dst.mul(m);
    if left == right {
        Some(0)
    } else if left == right.neg() {
        Some(1)
    } else {
        None
    }
}

/// The k ∈ {0, 1} with φ h = (−1)^k h φ on S_[n] and φ̃ h̃ = (−1)^k h̃ φ̃ on V;
/// both sides must agree.
pub fn grading_correspondence(sp: &SnSpace, phi: &QMat, phi_tilde: &QMat) -> Result<u8> {
    let llv = sp.llv_or_err()?;
    check_dim(sp.dim(), phi.rows())?;
    check_dim(sp.base_dim(), phi_tilde.rows())?;
    let h = sp.grading()?;
    let ht = llv.grading();
    let ks = commutation_parity(phi, &h, &h);
    let kv = commutation_parity(phi_tilde, &ht, &ht);
    match (ks, kv) {
        (Some(a), Some(b)) if a == b => Ok(a),
        (None, None) => Err(Error::NotGraded),
        _ => Err(Error::Internal("grading relations disagree between S_[n] and V".into())),
    }
}

/// η_f on the Ψ-model, which is S_[n](f) itself since the model is S_[n].
pub fn eta(sp: &SnSpace, f: &QMat) -> Result<QMat> {
    sp.restrict_sym(f)
}

#[derive(Clone, Debug, Serialize)]
pub struct Proportionality {
    /// η_τ maps the degree-2 part isomorphically onto the degree-(4n−2) part
    pub eta_tau_iso: bool,
    /// the c with (φ∘η_τ)(Ψ(λ)) = c·Ψ(H̃₀(λ)) for all λ
    pub scalar: Rat,
}

/// For a degree-reversing isometry φ̃ of the LLV space: compares the degree-2
/// restriction of S_[n](φ̃)∘η_τ with the Λ-block H̃₀ of the map recovered from S_[n](φ̃).
pub fn proportionality_check_degree2(sp: &SnSpace, phi_tilde: &QMat) -> Result<Proportionality> {
    let llv = sp.llv_or_err()?.clone();
    if !llv.is_degree_reversing(phi_tilde) {
        return Err(Error::NotDegreeReversing);
    }
    let n = sp.n();
    let r = llv.base().rank();
    let w = sp.weights()?;
    let low = 2 - 2 * n as i64;
    let high = 2 * n as i64 - 2;
    let eta_tau = eta(sp, &llv.tau())?;
    let psi_basis: Vec<QVec> = (0..r).map(|i| sp.psi(&[unit(r, i)])).collect::<Result<_>>()?;
    let images: Vec<QVec> = psi_basis.iter().map(|x| eta_tau.mul_vec(x)).collect();
    let in_high = images.iter().all(|y| y.iter().zip(&w).all(|(c, &k)| c.is_zero() || k == high));
    let eta_tau_iso = in_high && QMat::from_rows(images.clone()).rank() == r;
    let phi = sp.restrict_sym(phi_tilde)?;
    let rec = recover(sp, sp, &phi)?;
    let h0 = QMat::from_fn(r, r, |i, j| rec.f[(i + 1, j + 1)].clone());
    // read μ from the α^{n−1}x_i coefficients
    let alpha_pow = vec![0u16; n - 1];
    let fact = factorial(n - 1);
    let mut mu_cols = Vec::with_capacity(r);
    for x in &psi_basis {
        let y = phi.mul_vec(&eta_tau.mul_vec(x));
        if !y.iter().zip(&w).all(|(c, &k)| c.is_zero() || k == low) {
            return Err(Error::Internal("image left the degree-2 part".into()));
        }
        let full = sp.to_sym(&y);
        let mu: QVec = (0..r)
            .map(|i| {
                let mut m = alpha_pow.clone();
                m.push(i as u16 + 1);
                &full[sp.sym.index_of(&m).expect("monomial")] * &fact
            })
            .collect();
        if sp.psi(&[mu.clone()])? != y {
            return Err(Error::Internal("degree-2 image is not a Ψ-image".into()));
        }
        mu_cols.push(mu);
    }
    let m = QMat::from_columns(r, &mu_cols);
    let (i0, j0) = (0..r)
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .find(|&(i, j)| !h0[(i, j)].is_zero())
        .ok_or_else(|| Error::Internal("H0 vanishes".into()))?;
    let scalar = &m[(i0, j0)] / &h0[(i0, j0)];
    if scalar.is_zero() || h0.scale(&scalar) != m {
        return Err(Error::Internal("restrictions are not proportional".into()));
    }
    Ok(Proportionality { eta_tau_iso, scalar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::vint;

    fn small_lattice(d: usize) -> Lattice {
        // U ⊕ U ⊕ diag(2, −2, …)
        let mut g = QMat::zeros(d, d);
        for p in [0, 2] {
            if p + 1 < d {
                g[(p, p + 1)] = Rat::int(-1);
                g[(p + 1, p)] = Rat::int(-1);
            }
        }
        for i in 4..d {
            g[(i, i)] = Rat::int(if i % 2 == 0 { 2 } else { -2 });
        }
        Lattice::custom(None, g).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(expected_dim(25, 2), 324);
        assert_eq!(expected_dim(5, 3), 30);
        for (d, n) in [(5, 1), (5, 2), (5, 3), (7, 2), (6, 3)] {
            let s = SnSpace::new(&small_lattice(d), n).unwrap();
            assert_eq!(s.dim() as u128, expected_dim(d, n), "d={d} n={n}");
        }
    }

    #[test]
    fn contraction_kills_isotropic_powers() {
        let lat = small_lattice(5);
        let s = SnSpace::new(&lat, 3).unwrap();
        let v = vint(&[1, 1, 0, 0, 1]);
        assert!(lat.norm(&v).is_zero());
        assert!(s.contains(&s.sym.power(&v, 3)));
        let w = vint(&[0, 0, 0, 0, 1]);
        assert!(!s.contains(&s.sym.power(&w, 3)));
    }

    #[test]
    fn pairing_of_powers() {
        let lat = small_lattice(5);
        let sym = SymSpace::new(lat.gram(), 2);
        let v = vint(&[1, 2, 0, 1, 1]);
        let w = vint(&[0, 1, 3, 1, -1]);
        let vw = lat.pair(&v, &w);
        assert_eq!(sym.pair(&sym.power(&v, 2), &sym.power(&w, 2)), Rat::int(2) * &vw * &vw);
    }

    #[test]
    fn hyperbolic_pair_search() {
        let mut g = QMat::zeros(3, 3);
        g[(0, 0)] = Rat::int(2);
        g[(1, 1)] = Rat::int(-2);
        g[(2, 2)] = Rat::int(2);
        let lat = Lattice::custom(None, g).unwrap();
        let (a, b) = hyperbolic_pair(&lat).unwrap();
        assert!(lat.norm(&a).is_zero() && lat.norm(&b).is_zero());
        assert_eq!(lat.pair(&a, &b), Rat::int(-1));
    }

    #[test]
    fn recover_identity() {
        let s = SnSpace::new(&small_lattice(5), 3).unwrap();
        let r = recover(&s, &s, &QMat::identity(s.dim())).unwrap();
        assert!(r.f.is_identity());
    }
}
