//! Integral lattices, the named presets, and the discriminant group.
//!
//! Basis orders:
//! - `U`: (e1, e2) with (e1,e1)=(e2,e2)=0, (e1,e2)=-1.
//! - `E8neg`: simple roots in Bourbaki order, Gram = -(Cartan matrix).
//! - `K3`: U1, U2, U3 (indices 0..6), then two copies of E8(-1) (6..22).
//! - `K3n(n)`: the K3 basis followed by delta (index 22), (delta,delta) = 2-2n.
//! - `Kummer(n)`: U1, U2, U3, then delta (index 6), (delta,delta) = 2-2n.
//! - `Mukai`: alpha (index 0), the K3 basis (1..23), beta (index 23); the
//!   pair (alpha, beta) spans a fourth hyperbolic plane.
//!
//! For the positive-cone character every preset with hyperbolic planes uses the
//! vectors e1-e2 of its planes (each of norm 2).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{check_dim, Error, Result};
use crate::matrix::{content, dot, is_integral_vec, is_zero_vec, smith_normal_form, vsub, QMat, QVec};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    U,
    E8Neg,
    K3,
    K3n(u32),
    Kummer(u32),
    Mukai,
}

impl Preset {
    /// Accepts `u`, `e8neg`, `k3`, `k3n:2`, `k3n(2)`, `kummer:3`, `mukai` (case-insensitive).
    pub fn parse(s: &str) -> Result<Preset> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.find([':', '(']) {
            Some(i) => (&lower[..i], Some(lower[i + 1..].trim_end_matches(')').trim())),
            None => (lower.as_str(), None),
        };
        let n = |arg: Option<&str>| -> Result<u32> {
            let n: u32 = arg.and_then(|a| a.parse().ok()).ok_or_else(|| Error::UnknownPreset(s.to_string()))?;
            if n < 2 {
                return Err(Error::Precondition(format!("{head} needs n >= 2")));
            }
            Ok(n)
        };
        match (head, arg) {
            ("u", None) => Ok(Preset::U),
            ("e8neg" | "e8(-1)", None) => Ok(Preset::E8Neg),
            ("k3", None) => Ok(Preset::K3),
            ("k3n", a) => Ok(Preset::K3n(n(a)?)),
            ("kummer", a) => Ok(Preset::Kummer(n(a)?)),
            ("mukai", None) => Ok(Preset::Mukai),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }

    pub fn tag(&self) -> String {
        match self {
            Preset::U => "U".into(),
            Preset::E8Neg => "E8neg".into(),
            Preset::K3 => "K3".into(),
            Preset::K3n(n) => format!("K3n:{n}"),
            Preset::Kummer(n) => format!("Kummer:{n}"),
            Preset::Mukai => "Mukai".into(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

/// Gram matrix of E8(-1): simple roots 1..8 in Bourbaki order
/// (chain 1-3-4-5-6-7-8, node 2 attached to 4).
pub const E8_NEG: [[i64; 8]; 8] = [
    [-2, 0, 1, 0, 0, 0, 0, 0],
    [0, -2, 0, 1, 0, 0, 0, 0],
    [1, 0, -2, 1, 0, 0, 0, 0],
    [0, 1, 1, -2, 1, 0, 0, 0],
    [0, 0, 0, 1, -2, 1, 0, 0],
    [0, 0, 0, 0, 1, -2, 1, 0],
    [0, 0, 0, 0, 0, 1, -2, 1],
    [0, 0, 0, 0, 0, 0, 1, -2],
];

pub const U_GRAM: [[i64; 2]; 2] = [[0, -1], [-1, 0]];

#[derive(Clone, Debug)]
pub struct Lattice {
    name: Option<String>,
    preset: Option<Preset>,
    gram: QMat,
    gram_inv: QMat,
    planes: Vec<(usize, usize)>,
    delta: Option<usize>,
    positive: Vec<QVec>,
    signature: (usize, usize),
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Lattice) -> bool {
        self.gram == other.gram && self.name == other.name
    }
}

fn block_sum(blocks: &[QMat]) -> QMat {
    blocks.iter().skip(1).fold(blocks[0].clone(), |acc, b| acc.direct_sum(b))
}

fn u_block() -> QMat {
    QMat::from_i64_rows(&U_GRAM.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn e8_block() -> QMat {
    QMat::from_i64_rows(&E8_NEG.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

fn k3_gram() -> QMat {
    block_sum(&[u_block(), u_block(), u_block(), e8_block(), e8_block()])
}

impl Lattice {
    pub fn preset(p: &Preset) -> Lattice {
        let one = |x: i64| QMat::from_i64_rows(&[vec![x]]);
        let (gram, planes, delta) = match p {
            Preset::U => (u_block(), vec![(0, 1)], None),
            Preset::E8Neg => (e8_block(), vec![], None),
            Preset::K3 => (k3_gram(), vec![(0, 1), (2, 3), (4, 5)], None),
            Preset::K3n(n) => {
                (k3_gram().direct_sum(&one(2 - 2 * *n as i64)), vec![(0, 1), (2, 3), (4, 5)], Some(22))
            }
            Preset::Kummer(n) => (
                block_sum(&[u_block(), u_block(), u_block(), one(2 - 2 * *n as i64)]),
                vec![(0, 1), (2, 3), (4, 5)],
                Some(6),
            ),
            Preset::Mukai => {
                let k3 = k3_gram();
                let mut g = QMat::zeros(24, 24);
                for i in 0..22 {
                    for j in 0..22 {
                        g[(i + 1, j + 1)] = k3[(i, j)].clone();
                    }
                }
                g[(0, 23)] = Rat::int(-1);
                g[(23, 0)] = Rat::int(-1);
                (g, vec![(1, 2), (3, 4), (5, 6), (0, 23)], None)
            }
        };
        let mut lat = Lattice::build(Some(p.tag()), gram).expect("preset Gram matrices are valid");
        lat.preset = Some(p.clone());
        lat.planes = planes;
        lat.delta = delta;
        lat.positive = lat.planes.iter().map(|&(a, b)| plane_positive(lat.rank(), a, b)).collect();
        debug_assert_eq!(lat.positive.len(), lat.signature.0);
        lat
    }

    pub fn from_preset_name(s: &str) -> Result<Lattice> {
        Ok(Lattice::preset(&Preset::parse(s)?))
    }

    /// A lattice from an integral Gram matrix. If `name` parses as a preset the
    /// Gram matrix must match it, and the preset structure is attached.
    pub fn custom(name: Option<String>, gram: QMat) -> Result<Lattice> {
        if let Some(n) = &name {
            if let Ok(p) = Preset::parse(n) {
                let lat = Lattice::preset(&p);
                if lat.gram != gram {
                    return Err(Error::PresetMismatch(n.clone()));
                }
                return Ok(lat);
            }
        }
        Lattice::build(name, gram)
    }

    fn build(name: Option<String>, gram: QMat) -> Result<Lattice> {
        if !gram.is_square() || gram.rows() == 0 {
            return Err(Error::NotSymmetric);
        }
        if !gram.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        if !gram.is_integral() {
            return Err(Error::NonIntegralGram);
        }
        let gram_inv = gram.inverse().ok_or(Error::Degenerate)?;
        let diag = orthogonal_basis(&gram);
        let pos = diag.iter().filter(|(_, n)| n.is_positive()).count();
        let signature = (pos, gram.rows() - pos);
        let positive = diag.into_iter().filter(|(_, n)| n.is_positive()).map(|(v, _)| v).collect();
        Ok(Lattice { name, preset: None, gram, gram_inv, planes: vec![], delta: None, positive, signature })
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn preset_tag(&self) -> Option<&Preset> {
        self.preset.as_ref()
    }

    pub fn gram(&self) -> &QMat {
        &self.gram
    }

    pub fn gram_inv(&self) -> &QMat {
        &self.gram_inv
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn det(&self) -> Rat {
        self.gram.det()
    }

    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram[(i, i)].to_bigint().is_even())
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Hyperbolic planes (e1, e2) of the documented frame, first plane first.
    pub fn planes(&self) -> &[(usize, usize)] {
        &self.planes
    }

    pub fn delta(&self) -> Option<usize> {
        self.delta
    }

    /// Basis of the fixed positive-definite subspace used for the orientation character.
    pub fn positive_frame(&self) -> &[QVec] {
        &self.positive
    }

    pub fn pair(&self, x: &[Rat], y: &[Rat]) -> Rat {
        self.gram.bilinear(x, y)
    }

    pub fn try_pair(&self, x: &[Rat], y: &[Rat]) -> Result<Rat> {
        check_dim(self.rank(), x.len())?;
        check_dim(self.rank(), y.len())?;
        Ok(self.pair(x, y))
    }

    pub fn norm(&self, x: &[Rat]) -> Rat {
        self.pair(x, x)
    }

    /// `G x`, the pairing functional of x in coordinates.
    pub fn dual(&self, x: &[Rat]) -> QVec {
        self.gram.mul_vec(x)
    }

    /// Positive generator of {(x, y) : y integral}.
    pub fn divisibility(&self, x: &[Rat]) -> Result<BigInt> {
        check_dim(self.rank(), x.len())?;
        if !is_integral_vec(x) {
            return Err(Error::NotIntegral("vector"));
        }
        if is_zero_vec(x) {
            return Err(Error::Zero("vector"));
        }
        Ok(content(&self.dual(x)))
    }

    pub fn is_primitive(&self, x: &[Rat]) -> bool {
        is_integral_vec(x) && !is_zero_vec(x) && content(x).is_one()
    }

    /// The vector a*e1 + b*e2 in plane `i` of the frame.
    pub fn plane_vector(&self, i: usize, a: &Rat, b: &Rat) -> QVec {
        let (p, q) = self.planes[i];
        let mut v = vec![Rat::zero(); self.rank()];
        v[p] = a.clone();
        v[q] = b.clone();
        v
    }

    /// e1 - (N/2) e2 in the first plane.
    pub fn canonical_vector(&self, norm: &Rat) -> Result<QVec> {
        if self.planes.is_empty() {
            return Err(Error::NoHyperbolicPlanes);
        }
        Ok(self.plane_vector(0, &Rat::one(), &(-(norm / &Rat::int(2)))))
    }

    /// The sublattice orthogonal to delta, for lattices of the form L + Z delta.
    pub fn l_part(&self) -> Result<Lattice> {
        let d = self.delta.ok_or(Error::NoDelta)?;
        let idx: Vec<usize> = (0..self.rank()).filter(|&i| i != d).collect();
        let gram = self.gram.submatrix(&idx, &idx);
        let mut l = Lattice::build(self.name.as_ref().map(|n| format!("{n}/L")), gram)?;
        l.planes = self.planes.clone();
        l.positive = l.planes.iter().map(|&(a, b)| plane_positive(l.rank(), a, b)).collect();
        if l.positive.len() != l.signature.0 {
            let diag = orthogonal_basis(&l.gram);
            l.positive = diag.into_iter().filter(|(_, n)| n.is_positive()).map(|(v, _)| v).collect();
        }
        Ok(l)
    }

    /// Coordinates of an L-vector inside this lattice (delta coordinate 0).
    pub fn embed_l(&self, v: &[Rat]) -> QVec {
        let d = self.delta.expect("lattice has delta");
        let mut out = v.to_vec();
        out.insert(d, Rat::zero());
        out
    }

    /// Drops the delta coordinate.
    pub fn project_l(&self, v: &[Rat]) -> QVec {
        let d = self.delta.expect("lattice has delta");
        let mut out = v.to_vec();
        out.remove(d);
        out
    }

    /// Extends an isometry of L by the identity on delta.
    pub fn extend_from_l(&self, m: &QMat) -> QMat {
        let d = self.delta.expect("lattice has delta");
        let n = self.rank();
        let map = |i: usize| if i < d { i } else { i - 1 };
        QMat::from_fn(n, n, |i, j| {
            if i == d || j == d {
                if i == j {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            } else {
                m[(map(i), map(j))].clone()
            }
        })
    }

    pub fn delta_vector(&self) -> Result<QVec> {
        let d = self.delta.ok_or(Error::NoDelta)?;
        let mut v = vec![Rat::zero(); self.rank()];
        v[d] = Rat::one();
        Ok(v)
    }

    pub fn disc_group(&self) -> DiscGroup {
        DiscGroup::of(self)
    }

    /// Qα ⊕ self ⊕ Qβ with α, β isotropic and (α,β) = −1; α at index 0, β last.
    /// The frame planes are shifted by one, with (α, β) appended as the last plane.
    pub fn llv(&self) -> Lattice {
        let r = self.rank();
        let mut g = QMat::zeros(r + 2, r + 2);
        for i in 0..r {
            for j in 0..r {
                g[(i + 1, j + 1)] = self.gram[(i, j)].clone();
            }
        }
        g[(0, r + 1)] = Rat::int(-1);
        g[(r + 1, 0)] = Rat::int(-1);
        let label = match (&self.preset, &self.name) {
            (Some(p), _) => p.tag(),
            (None, Some(n)) => n.clone(),
            (None, None) => "custom".into(),
        };
        let mut lat = Lattice::build(Some(format!("llv({label})")), g).expect("extension of a valid Gram matrix");
        lat.planes = self.planes.iter().map(|&(a, b)| (a + 1, b + 1)).chain([(0, r + 1)]).collect();
        let shift = |v: &QVec| -> QVec {
            let mut out = vec![Rat::zero(); r + 2];
            out[1..=r].clone_from_slice(v);
            out
        };
        let mut positive: Vec<QVec> = self.positive.iter().map(shift).collect();
        positive.push(plane_positive(r + 2, 0, r + 1));
        lat.positive = positive;
        lat
    }
}

fn plane_positive(rank: usize, a: usize, b: usize) -> QVec {
    let mut v = vec![Rat::zero(); rank];
    v[a] = Rat::one();
    v[b] = Rat::int(-1);
    v
}

/// Congruence diagonalization over Q: a basis of mutually orthogonal vectors
/// with their norms.
pub fn orthogonal_basis(gram: &QMat) -> Vec<(QVec, Rat)> {
    let n = gram.rows();
    let mut basis: Vec<QVec> = (0..n).map(|i| crate::matrix::unit(n, i)).collect();
    let pair = |x: &QVec, y: &QVec| gram.bilinear(x, y);
    let mut out = Vec::with_capacity(n);
    while !basis.is_empty() {
        let idx = match basis.iter().position(|b| !pair(b, b).is_zero()) {
            Some(i) => i,
            None => {
                // all remaining vectors isotropic: x+y has norm 2(x,y) for some pair
                let mut found = None;
                'o: for i in 0..basis.len() {
                    for j in i + 1..basis.len() {
                        if !pair(&basis[i], &basis[j]).is_zero() {
                            found = Some((i, j));
                            break 'o;
                        }
                    }
                }
                let (i, j) = found.expect("degenerate form");
                basis[i] = crate::matrix::vadd(&basis[i], &basis[j]);
                i
            }
        };
        let v = basis.swap_remove(idx);
        let nv = pair(&v, &v);
        for b in basis.iter_mut() {
            let c = &pair(&v, b) / &nv;
            if !c.is_zero() {
                *b = vsub(b, &crate::matrix::vscale(&c, &v));
            }
        }
        out.push((v, nv));
    }
    out
}

/// Λ*/Λ as a product of cyclic groups, with generator lifts in Λ*.
#[derive(Clone, Debug)]
pub struct DiscGroup {
    pub divisors: Vec<BigInt>,
    pub generators: Vec<QVec>,
    // inverse of the Smith transform V restricted to the nontrivial factors
    coord_rows: Vec<QVec>,
}

impl DiscGroup {
    fn of(lat: &Lattice) -> DiscGroup {
        let a: Vec<Vec<BigInt>> =
            (0..lat.rank()).map(|i| lat.gram.row(i).iter().map(|x| x.to_bigint()).collect()).collect();
        let snf = smith_normal_form(&a);
        let n = lat.rank();
        let v = QMat::from_fn(n, n, |i, j| Rat::from(snf.v[i][j].clone()));
        let v_inv = v.inverse().expect("Smith transforms are unimodular");
        let mut divisors = Vec::new();
        let mut generators = Vec::new();
        let mut coord_rows = Vec::new();
        for (i, d) in snf.diag.iter().enumerate() {
            if d.abs() > BigInt::one() {
                let dr = Rat::from(d.abs());
                divisors.push(d.abs());
                generators.push(v.column(i).iter().map(|x| x / &dr).collect());
                coord_rows.push(v_inv.row_vec(i));
            }
        }
        DiscGroup { divisors, generators, coord_rows }
    }

    pub fn order(&self) -> BigInt {
        self.divisors.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.divisors.is_empty()
    }

    /// Coordinates of a dual vector in terms of the generators, reduced mod the divisors.
    pub fn coordinates(&self, y: &[Rat]) -> Vec<BigInt> {
        self.coord_rows
            .iter()
            .zip(&self.divisors)
            .map(|(row, d)| {
                let c = dot(row, y) * Rat::from(d.clone());
                assert!(c.is_integer(), "vector is not in the dual lattice");
                c.to_bigint().mod_floor(d)
            })
            .collect()
    }

    /// Induced action of an integral isometry: column i holds the image of generator i.
    pub fn action_matrix(&self, g: &QMat) -> Vec<Vec<BigInt>> {
        let cols: Vec<Vec<BigInt>> = self.generators.iter().map(|x| self.coordinates(&g.mul_vec(x))).collect();
        let k = self.divisors.len();
        (0..k).map(|i| (0..k).map(|j| cols[j][i].clone()).collect()).collect()
    }

    /// Classifies the action as multiplication by +1, -1, or neither. On groups
    /// of exponent at most 2 the two scalars coincide and +1 is reported.
    pub fn classify(&self, g: &QMat) -> DiscAction {
        let a = self.action_matrix(g);
        let k = self.divisors.len();
        let scalar = |s: i64| {
            (0..k).all(|i| {
                (0..k).all(|j| {
                    let want = if i == j { BigInt::from(s).mod_floor(&self.divisors[i]) } else { BigInt::zero() };
                    a[i][j] == want
                })
            })
        };
        if scalar(1) {
            DiscAction::Plus
        } else if scalar(-1) {
            DiscAction::Minus
        } else {
            DiscAction::Other(a)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiscAction {
    Plus,
    Minus,
    Other(Vec<Vec<BigInt>>),
    NotApplicable,
}

impl DiscAction {
    pub fn label(&self) -> &'static str {
        match self {
            DiscAction::Plus => "+1",
            DiscAction::Minus => "-1",
            DiscAction::Other(_) => "other",
            DiscAction::NotApplicable => "n/a",
        }
    }

    pub fn sign(&self) -> Option<i32> {
        match self {
            DiscAction::Plus => Some(1),
            DiscAction::Minus => Some(-1),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{unit, vint};

    #[test]
    fn e8_constant_validates() {
        let e8 = Lattice::preset(&Preset::E8Neg);
        assert_eq!(e8.det(), Rat::one());
        assert!(e8.is_even());
        assert_eq!(e8.signature(), (0, 8));
    }

    #[test]
    fn preset_shapes() {
        let k3 = Lattice::preset(&Preset::K3);
        assert_eq!((k3.rank(), k3.signature()), (22, (3, 19)));
        assert!(k3.is_unimodular());
        let k3n = Lattice::preset(&Preset::K3n(2));
        assert_eq!((k3n.rank(), k3n.signature()), (23, (3, 20)));
        assert_eq!(k3n.disc_group().divisors, vec![BigInt::from(2)]);
        let m = Lattice::preset(&Preset::Mukai);
        assert_eq!(m.signature(), (4, 20));
        let u = Lattice::preset(&Preset::U);
        assert_eq!(u.det(), Rat::int(-1));
        let ku = Lattice::preset(&Preset::Kummer(3));
        assert_eq!(ku.signature(), (3, 4));
        assert_eq!(ku.disc_group().divisors, vec![BigInt::from(4)]);
    }

    #[test]
    fn pairing_conventions() {
        let u = Lattice::preset(&Preset::U);
        assert_eq!(u.pair(&vint(&[1, 0]), &vint(&[0, 1])), Rat::int(-1));
        let k3n = Lattice::preset(&Preset::K3n(4));
        let d = k3n.delta_vector().unwrap();
        assert_eq!(k3n.norm(&d), Rat::int(-6));
        assert_eq!(k3n.divisibility(&d).unwrap(), BigInt::from(6));
        assert_eq!(u.divisibility(&unit(2, 0)).unwrap(), BigInt::one());
        assert!(u.divisibility(&vint(&[0, 0])).is_err());
    }

    #[test]
    fn parse_presets() {
        assert_eq!(Preset::parse("k3n:2").unwrap(), Preset::K3n(2));
        assert_eq!(Preset::parse("K3n(5)").unwrap(), Preset::K3n(5));
        assert_eq!(Preset::parse("Kummer:3").unwrap(), Preset::Kummer(3));
        assert!(Preset::parse("k3n:1").is_err());
        assert!(Preset::parse("foo").is_err());
    }

    #[test]
    fn custom_rejects_bad_gram() {
        let bad = QMat::from_i64_rows(&[vec![0, 1], vec![2, 0]]);
        assert_eq!(Lattice::custom(None, bad), Err(Error::NotSymmetric));
        let deg = QMat::from_i64_rows(&[vec![2, 2], vec![2, 2]]);
        assert_eq!(Lattice::custom(None, deg), Err(Error::Degenerate));
        let mismatch = QMat::from_i64_rows(&[vec![2]]);
        assert!(matches!(Lattice::custom(Some("K3".into()), mismatch), Err(Error::PresetMismatch(_))));
    }
}
