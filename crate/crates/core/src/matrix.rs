//! Dense exact matrices over Q and a few integer-matrix tools.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rat::{common_denominator, Rat};

pub type QVec = Vec<Rat>;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for QMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for QMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> QMat {
        QMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> QMat {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn scalar(n: usize, c: Rat) -> QMat {
        let mut m = QMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rat) -> QMat {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> QMat {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        QMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> QMat {
        QMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| Rat::int(x)).collect()).collect())
    }

    pub fn from_columns(n_rows: usize, cols: &[QVec]) -> QMat {
        let mut m = QMat::zeros(n_rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), n_rows);
            for (i, x) in c.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn diag(entries: &[Rat]) -> QMat {
        let mut m = QMat::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    /// `u vᵀ`
    pub fn outer(u: &[Rat], v: &[Rat]) -> QMat {
        QMat::from_fn(u.len(), v.len(), |i, j| &u[i] * &v[j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vec(&self, i: usize) -> QVec {
        self.row(i).to_vec()
    }

    pub fn column(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<QVec> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row_vec(i)).collect()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn transpose(&self) -> QMat {
        QMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &QMat) -> QMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        self.mul_scaled(other).unwrap_or_else(|| self.mul_generic(other))
    }

    fn mul_generic(&self, other: &QMat) -> QMat {
        let mut out = QMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let t = a * b;
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    /// The product over i128 after clearing denominators row-wise in `self` and
    /// column-wise in `other`; None if anything could overflow.
    fn mul_scaled(&self, other: &QMat) -> Option<QMat> {
        let (a, da, ma) = integer_rows(self)?;
        let (b, db, mb) = integer_rows(&other.transpose())?;
        let k = self.cols;
        (ma as u128).checked_mul(mb as u128)?.checked_mul(k.max(1) as u128).filter(|&x| x < i128::MAX as u128)?;
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            let ra = &a[i * k..(i + 1) * k];
            for j in 0..other.cols {
                let rb = &b[j * k..(j + 1) * k];
                let s: i128 = ra.iter().zip(rb).map(|(&x, &y)| x as i128 * y as i128).sum();
                data.push(Rat::from_i128(s, da[i] as i128 * db[j] as i128));
            }
        }
        Some(QMat { rows: self.rows, cols: other.cols, data })
    }

    pub fn mul_vec(&self, v: &[Rat]) -> QVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        let mut out = vec![Rat::zero(); self.rows];
        for (j, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    /// `vᵀ M`
    pub fn vec_mul(&self, v: &[Rat]) -> QVec {
        assert_eq!(self.rows, v.len());
        let mut out = vec![Rat::zero(); self.cols];
        for (i, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += x * a;
                }
            }
        }
        out
    }

    /// `uᵀ M v`
    pub fn bilinear(&self, u: &[Rat], v: &[Rat]) -> Rat {
        dot(u, &self.mul_vec(v))
    }

    pub fn add(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMat) -> QMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn neg(&self) -> QMat {
        QMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    /// `[A, B] = AB − BA`
    pub fn commutator(&self, other: &QMat) -> QMat {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { self[(i, j)].is_one() } else { self[(i, j)].is_zero() })
            })
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> QMat {
        QMat::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn direct_sum(&self, other: &QMat) -> QMat {
        let mut m = QMat::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                m[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            if !inv.is_one() {
                for j in c..m.cols {
                    if !m[(r, j)].is_zero() {
                        m[(r, j)] = &m[(r, j)] * &inv;
                    }
                }
            }
            let pivot_row: Vec<(usize, Rat)> =
                (c..m.cols).filter(|&j| !m[(r, j)].is_zero()).map(|j| (j, m[(r, j)].clone())).collect();
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let f = m[(i, c)].clone();
                if f.is_zero() {
                    continue;
                }
                for (j, x) in &pivot_row {
                    let t = &f * x;
                    m[(i, *j)] -= t;
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel, one column per free variable. Each basis
    /// vector has a 1 at its free position and 0 at every other free position.
    pub fn kernel(&self) -> Vec<QVec> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&j| !is_pivot[j]) {
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for (row, &p) in pivots.iter().enumerate() {
                let x = &r[(row, free)];
                if !x.is_zero() {
                    v[p] = -x;
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Free (non-pivot) columns of the row echelon form.
    pub fn free_columns(&self) -> Vec<usize> {
        let pivots = self.rref().1;
        (0..self.cols).filter(|j| !pivots.contains(j)).collect()
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut aug = QMat::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rat::one();
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(QMat::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    pub fn det(&self) -> Rat {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut m = self.clone();
        let n = m.rows;
        let mut det = Rat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else { return Rat::zero() };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det *= &piv;
            let inv = piv.recip();
            for i in c + 1..n {
                let f = &m[(i, c)] * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in c..n {
                    let x = &m[(c, j)];
                    if !x.is_zero() {
                        let t = &f * x;
                        m[(i, j)] -= t;
                    }
                }
            }
        }
        det
    }

    /// Some solution of `self · x = b`, if one exists.
    pub fn solve(&self, b: &[Rat]) -> Option<QVec> {
        assert_eq!(self.rows, b.len());
        let mut aug = QMat::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r[(row, self.cols)].clone();
        }
        Some(x)
    }

    pub fn pow(&self, e: u32) -> QMat {
        let mut acc = QMat::identity(self.rows);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

/// Each row scaled by the lcm of its denominators: row-major integer entries,
/// the row denominators, and the largest absolute entry.
fn integer_rows(m: &QMat) -> Option<(Vec<i64>, Vec<i64>, u64)> {
    let mut ints = Vec::with_capacity(m.rows * m.cols);
    let mut dens = Vec::with_capacity(m.rows);
    let mut max = 0u64;
    for i in 0..m.rows {
        let row = m.row(i);
        let mut l = 1i64;
        for x in row {
            let (_, d) = x.small_parts()?;
            l = (l / l.gcd(&d)).checked_mul(d)?;
        }
        for x in row {
            let (n, d) = x.small_parts()?;
            let v = n.checked_mul(l / d)?;
            max = max.max(v.unsigned_abs());
            ints.push(v);
        }
        dens.push(l);
    }
    Some((ints, dens, max))
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let mut s = Rat::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

pub fn vadd(a: &[Rat], b: &[Rat]) -> QVec {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vsub(a: &[Rat], b: &[Rat]) -> QVec {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vscale(c: &Rat, a: &[Rat]) -> QVec {
    a.iter().map(|x| c * x).collect()
}

pub fn vneg(a: &[Rat]) -> QVec {
    a.iter().map(|x| -x).collect()
}

pub fn vzero(n: usize) -> QVec {
    vec![Rat::zero(); n]
}

pub fn unit(n: usize, i: usize) -> QVec {
    let mut v = vzero(n);
    v[i] = Rat::one();
    v
}

pub fn vint(xs: &[i64]) -> QVec {
    xs.iter().map(|&x| Rat::int(x)).collect()
}

pub fn is_zero_vec(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn is_integral_vec(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_integer())
}

/// gcd of the entries of an integral vector (0 for the zero vector).
pub fn content(a: &[Rat]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, x| g.gcd(&x.to_bigint()))
}

/// The primitive integral vector on the ray through `a`, and the positive
/// scalar `c` with `a = c · result`. Panics on the zero vector.
pub fn primitive_on_ray(a: &[Rat]) -> (QVec, Rat) {
    assert!(!is_zero_vec(a), "zero vector has no primitive multiple");
    let den = common_denominator(a);
    let scaled: QVec = a.iter().map(|x| x * &Rat::from(den.clone())).collect();
    let g = content(&scaled);
    let g_r = Rat::from(g.clone());
    let prim = scaled.iter().map(|x| x / &g_r).collect();
    (prim, Rat::frac(g, den))
}

/// Smith normal form `u · a · v = diag` of an integer matrix.
pub struct Snf {
    pub diag: Vec<BigInt>,
    pub u: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

fn ident_big(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

pub fn smith_normal_form(a: &[Vec<BigInt>]) -> Snf {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut d: Vec<Vec<BigInt>> = a.to_vec();
    let mut u = ident_big(m);
    let mut v = ident_big(n);

    fn row_op(x: &mut [Vec<BigInt>], dst: usize, src: usize, k: &BigInt) {
        // row dst -= k * row src
        let src_row = x[src].clone();
        for (a, b) in x[dst].iter_mut().zip(&src_row) {
            *a -= k * b;
        }
    }
    fn col_op(x: &mut [Vec<BigInt>], dst: usize, src: usize, k: &BigInt) {
        for row in x.iter_mut() {
            let t = k * &row[src];
            row[dst] -= t;
        }
    }
    fn swap_cols(x: &mut [Vec<BigInt>], a: usize, b: usize) {
        for row in x.iter_mut() {
            row.swap(a, b);
        }
    }

    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry in the remaining block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[i][j].is_zero() && best.is_none_or(|(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);
        let mut done = true;
        for i in t + 1..m {
            if !d[i][t].is_zero() {
                let q = d[i][t].div_floor(&d[t][t]);
                row_op(&mut d, i, t, &q);
                row_op(&mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    done = false;
                }
            }
        }
        for j in t + 1..n {
            if !d[t][j].is_zero() {
                let q = d[t][j].div_floor(&d[t][t]);
                col_op(&mut d, j, t, &q);
                col_op(&mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    done = false;
                }
            }
        }
        if !done {
            continue;
        }
        // enforce divisibility of the rest of the block by the pivot
        let mut bad = None;
        'outer: for i in t + 1..m {
            for j in t + 1..n {
                if !(&d[i][j] % &d[t][t]).is_zero() {
                    bad = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = bad {
            let minus_one = -BigInt::one();
            row_op(&mut d, t, i, &minus_one);
            row_op(&mut u, t, i, &minus_one);
            continue;
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
        t += 1;
    }
    let diag = (0..m.min(n)).map(|i| d[i][i].clone()).collect();
    Snf { diag, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(rows: &[Vec<i64>]) -> QMat {
        QMat::from_i64_rows(rows)
    }

    #[test]
    fn scaled_product_matches_generic() {
        let a = QMat::from_fn(4, 5, |i, j| Rat::new(i as i64 * 3 - j as i64, (i + 2 * j + 1) as i64));
        let b = QMat::from_fn(5, 3, |i, j| Rat::new(7 - (i * j) as i64, (j + 1) as i64));
        assert_eq!(a.mul_scaled(&b).unwrap(), a.mul_generic(&b));
        let big = QMat::from_fn(3, 3, |i, j| Rat::int(if i == j { i64::MAX } else { 3 }));
        assert!(big.mul_scaled(&big).is_none());
        assert_eq!(big.mul(&big), big.mul_generic(&big));
    }

    #[test]
    fn inverse_and_det() {
        let a = q(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        assert_eq!(a.det(), Rat::int(18));
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert!(q(&[vec![1, 2], vec![2, 4]]).inverse().is_none());
    }

    #[test]
    fn kernel_basis() {
        let a = q(&[vec![1, 2, 3], vec![2, 4, 6]]);
        let k = a.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(is_zero_vec(&a.mul_vec(v)));
        }
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = q(&[vec![1, 1], vec![1, -1]]);
        assert_eq!(a.solve(&vint(&[3, 1])).unwrap(), vint(&[2, 1]));
        let b = q(&[vec![1, 1], vec![2, 2]]);
        assert!(b.solve(&vint(&[1, 3])).is_none());
    }

    #[test]
    fn snf_small() {
        let a: Vec<Vec<BigInt>> =
            [[2, 4, 4], [-6, 6, 12], [10, -4, -16]].iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let s = smith_normal_form(&a);
        let expect: Vec<BigInt> = [2, 6, 12].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(s.diag, expect);
        // u a v = diag
        let mul = |x: &Vec<Vec<BigInt>>, y: &Vec<Vec<BigInt>>| -> Vec<Vec<BigInt>> {
            (0..x.len())
                .map(|i| (0..y[0].len()).map(|j| (0..y.len()).map(|k| &x[i][k] * &y[k][j]).sum()).collect())
                .collect()
        };
        let p = mul(&mul(&s.u, &a), &s.v);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { s.diag[i].clone() } else { BigInt::zero() };
                assert_eq!(p[i][j], want);
            }
        }
    }

    #[test]
    fn primitive_ray() {
        let (p, c) = primitive_on_ray(&[Rat::new(1, 2), Rat::new(3, 4), Rat::zero()]);
        assert_eq!(p, vint(&[2, 3, 0]));
        assert_eq!(c, Rat::new(1, 4));
    }
}
