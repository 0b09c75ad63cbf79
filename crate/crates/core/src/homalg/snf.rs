//! Smith normal form over the integers.
//!
//! Alternating row and column Hermite forms, then gcd steps on the
//! diagonal. The elimination runs on `i128` with checked arithmetic and
//! restarts on big integers if any intermediate value overflows, so results are exact
//! for every input whose transforms fit back into `i64`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::IntMatrix;

/// `d = u · a · v` with `u`, `v` unimodular and `d` diagonal, `d₁ | d₂ | …`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snf {
    pub u: IntMatrix,
    /// Inverse of `u`, tracked alongside it.
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    /// Diagonal entries, length `min(rows, cols)`, all non-negative.
    pub diag: Vec<i64>,
    pub rank: usize,
}

impl Snf {
    pub fn d_matrix(&self, rows: usize, cols: usize) -> IntMatrix {
        let mut d = IntMatrix::zeros(rows, cols);
        for (i, &x) in self.diag.iter().enumerate() {
            d.set(i, i, x);
        }
        d
    }
}

trait Scalar: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_i64(&self) -> Option<i64>;
    fn is_zero(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn neg(&self) -> Self;
    fn div_trunc(&self, other: &Self) -> Self;
    /// Quotient rounded towards negative infinity.
    fn div_floor(&self, other: &Self) -> Self;
    fn rem_is_zero(&self, other: &Self) -> bool;
    /// `p * x + q * y`
    fn lin(p: &Self, x: &Self, q: &Self, y: &Self) -> Option<Self>;

    fn cmp_abs(a: &Self, b: &Self) -> std::cmp::Ordering;

    /// Nearest integer to `y / x`.
    fn div_round(y: &Self, x: &Self) -> Option<Self> {
        let two = Self::from_i64(2);
        let z = Self::zero();
        let num = Self::lin(&two, y, &Self::one(), x)?;
        let den = Self::lin(&two, x, &z, &z)?;
        Some(num.div_floor(&den))
    }

    /// `(g, s, t)` with `g = s * a + t * b = gcd(a, b) > 0`, for `a, b` not
    /// both zero.
    fn ext_gcd(a: &Self, b: &Self) -> Option<(Self, Self, Self)> {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (Self::one(), Self::zero());
        let (mut t0, mut t1) = (Self::zero(), Self::one());
        let minus_one = Self::one().neg();
        while !r1.is_zero() {
            let q = r0.div_trunc(&r1);
            let mq = q.neg();
            let r2 = Self::lin(&Self::one(), &r0, &mq, &r1)?;
            let s2 = Self::lin(&Self::one(), &s0, &mq, &s1)?;
            let t2 = Self::lin(&Self::one(), &t0, &mq, &t1)?;
            (r0, r1, s0, s1, t0, t1) = (r1, r2, s1, s2, t1, t2);
        }
        if r0.is_negative() {
            let z = Self::zero();
            let f = |x: &Self| Self::lin(&minus_one, x, &z, &z);
            return Some((f(&r0)?, f(&s0)?, f(&t0)?));
        }
        Some((r0, s0, t0))
    }
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(*self).ok()
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn div_trunc(&self, other: &Self) -> Self {
        *self / *other
    }
    fn div_floor(&self, other: &Self) -> Self {
        Integer::div_floor(self, other)
    }
    fn rem_is_zero(&self, other: &Self) -> bool {
        *self % *other == 0
    }
    fn cmp_abs(a: &Self, b: &Self) -> std::cmp::Ordering {
        a.unsigned_abs().cmp(&b.unsigned_abs())
    }
    fn lin(p: &Self, x: &Self, q: &Self, y: &Self) -> Option<Self> {
        p.checked_mul(*x)?.checked_add(q.checked_mul(*y)?)
    }
}

impl Scalar for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn to_i64(&self) -> Option<i64> {
        ToPrimitive::to_i64(self)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn div_trunc(&self, other: &Self) -> Self {
        self / other
    }
    fn div_floor(&self, other: &Self) -> Self {
        Integer::div_floor(self, other)
    }
    fn rem_is_zero(&self, other: &Self) -> bool {
        Zero::is_zero(&(self % other))
    }
    fn cmp_abs(a: &Self, b: &Self) -> std::cmp::Ordering {
        a.abs().cmp(&b.abs())
    }
    fn lin(p: &Self, x: &Self, q: &Self, y: &Self) -> Option<Self> {
        Some(p * x + q * y)
    }
}

/// A unimodular 2×2 block `[[p, q], [r, s]]`.
type Block<T> = [T; 4];

struct Work<T> {
    a: Vec<Vec<T>>,
    u: Vec<Vec<T>>,
    u_inv: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
    m: usize,
    n: usize,
}

/// Rows or columns of the working matrix.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Rows,
    Cols,
}

impl<T: Scalar> Work<T> {
    fn new(mat: &IntMatrix) -> Self {
        let (m, n) = (mat.rows(), mat.cols());
        let ident = |k: usize| -> Vec<Vec<T>> {
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { T::one() } else { T::zero() }).collect())
                .collect()
        };
        Work {
            a: (0..m)
                .map(|i| (0..n).map(|j| T::from_i64(mat.get(i, j))).collect())
                .collect(),
            u: ident(m),
            u_inv: ident(m),
            v: ident(n),
            m,
            n,
        }
    }

    fn lines(&self, ax: Axis) -> usize {
        match ax {
            Axis::Rows => self.m,
            Axis::Cols => self.n,
        }
    }

    fn at(&self, ax: Axis, line: usize, pos: usize) -> &T {
        match ax {
            Axis::Rows => &self.a[line][pos],
            Axis::Cols => &self.a[pos][line],
        }
    }

    /// `line_i ← p·line_i + q·line_k`, `line_k ← r·line_i + s·line_k`.
    fn combine(&mut self, ax: Axis, i: usize, k: usize, blk: &Block<T>) -> Option<()> {
        let [p, q, r, s] = blk;
        let pair = |x: &T, y: &T| -> Option<(T, T)> { Some((T::lin(p, x, q, y)?, T::lin(r, x, s, y)?)) };
        match ax {
            Axis::Rows => {
                for mat in [&mut self.a, &mut self.u] {
                    for c in 0..mat[i].len() {
                        let (x, y) = pair(&mat[i][c], &mat[k][c])?;
                        mat[i][c] = x;
                        mat[k][c] = y;
                    }
                }
                // U⁻¹ picks up the inverse block on columns i, k
                let det = T::lin(p, s, &q.neg(), r)?;
                let z = T::zero();
                let sc = |x: &T| T::lin(&det, x, &z, &z);
                let (ip, iq, ir, is) = (sc(s)?, sc(&q.neg())?, sc(&r.neg())?, sc(p)?);
                for row in self.u_inv.iter_mut() {
                    let x = T::lin(&row[i], &ip, &row[k], &ir)?;
                    let y = T::lin(&row[i], &iq, &row[k], &is)?;
                    row[i] = x;
                    row[k] = y;
                }
            }
            Axis::Cols => {
                for mat in [&mut self.a, &mut self.v] {
                    for row in mat.iter_mut() {
                        let (x, y) = pair(&row[i], &row[k])?;
                        row[i] = x;
                        row[k] = y;
                    }
                }
            }
        }
        Some(())
    }

    fn negate(&mut self, ax: Axis, t: usize) {
        match ax {
            Axis::Rows => {
                for x in self.a[t].iter_mut().chain(self.u[t].iter_mut()) {
                    *x = x.neg();
                }
                for row in self.u_inv.iter_mut() {
                    row[t] = row[t].neg();
                }
            }
            Axis::Cols => {
                for row in self.a.iter_mut().chain(self.v.iter_mut()) {
                    row[t] = row[t].neg();
                }
            }
        }
    }

    /// Hermite normal form along `ax`: echelon form with positive pivots
    /// and the entries before each pivot reduced to at most half of it.
    fn hermite(&mut self, ax: Axis) -> Option<()> {
        let other = match ax {
            Axis::Rows => self.n,
            Axis::Cols => self.m,
        };
        let (zero, one) = (T::zero(), T::one());
        let mut r = 0;
        for j in 0..other {
            if r == self.lines(ax) {
                break;
            }
            // Euclid down the column, always dividing by the smallest entry
            loop {
                let best = (r..self.lines(ax))
                    .filter(|&i| !self.at(ax, i, j).is_zero())
                    .min_by(|&i, &k| T::cmp_abs(self.at(ax, i, j), self.at(ax, k, j)));
                let Some(b) = best else { break };
                if b != r {
                    self.combine(ax, r, b, &[zero.clone(), one.clone(), one.clone(), zero.clone()])?;
                }
                let x = self.at(ax, r, j).clone();
                let mut done = true;
                for i in r + 1..self.lines(ax) {
                    let y = self.at(ax, i, j);
                    if y.is_zero() {
                        continue;
                    }
                    let q = T::div_round(y, &x)?;
                    self.combine(ax, r, i, &[one.clone(), zero.clone(), q.neg(), one.clone()])?;
                    done &= self.at(ax, i, j).is_zero();
                }
                if done {
                    break;
                }
            }
            if self.at(ax, r, j).is_zero() {
                continue;
            }
            if self.at(ax, r, j).is_negative() {
                self.negate(ax, r);
            }
            let piv = self.at(ax, r, j).clone();
            for k in 0..r {
                let q = T::div_round(self.at(ax, k, j), &piv)?;
                if !q.is_zero() {
                    self.combine(ax, k, r, &[one.clone(), q.neg(), zero.clone(), one.clone()])?;
                }
            }
            r += 1;
        }
        Some(())
    }

    fn is_diagonal(&self) -> bool {
        (0..self.m).all(|i| (0..self.n).all(|j| i == j || self.a[i][j].is_zero()))
    }

    fn run(&mut self) -> Option<()> {
        // alternating Hermite forms shrink the leading pivot until the
        // matrix is diagonal, with the nonzero entries first
        loop {
            self.hermite(Axis::Rows)?;
            self.hermite(Axis::Cols)?;
            if self.is_diagonal() {
                break;
            }
        }
        let lim = self.m.min(self.n);
        let one = T::one();
        for i in 0..lim {
            for j in i + 1..lim {
                let (a, b) = (self.a[i][i].clone(), self.a[j][j].clone());
                if a.is_zero() || b.rem_is_zero(&a) {
                    continue;
                }
                // diag(a, b) → diag(g, ab/g)
                let (g, s, t) = T::ext_gcd(&a, &b)?;
                let (bg, ag) = (b.div_trunc(&g), a.div_trunc(&g));
                let z = T::zero();
                let tbg = T::lin(&t, &bg, &z, &z)?.neg();
                let sag = T::lin(&s, &ag, &z, &z)?;
                self.combine(Axis::Rows, i, j, &[s, t, bg.neg(), ag])?;
                self.combine(Axis::Cols, i, j, &[one.clone(), one.clone(), tbg, sag])?;
                if self.a[j][j].is_negative() {
                    self.negate(Axis::Rows, j);
                }
            }
        }
        Some(())
    }

    fn finish(self) -> Option<Snf> {
        let conv = |rows: &Vec<Vec<T>>, r: usize, c: usize| -> Option<IntMatrix> {
            let mut out = IntMatrix::zeros(r, c);
            for i in 0..r {
                for j in 0..c {
                    out.set(i, j, rows[i][j].to_i64()?);
                }
            }
            Some(out)
        };
        let lim = self.m.min(self.n);
        let mut diag = Vec::with_capacity(lim);
        for t in 0..lim {
            diag.push(self.a[t][t].to_i64()?);
        }
        let rank = diag.iter().filter(|&&d| d != 0).count();
        Some(Snf {
            u: conv(&self.u, self.m, self.m)?,
            u_inv: conv(&self.u_inv, self.m, self.m)?,
            v: conv(&self.v, self.n, self.n)?,
            diag,
            rank,
        })
    }
}

/// Smith normal form of `a` with `i64` transforms, or `None` when they do
/// not fit.
pub fn try_smith_normal_form(a: &IntMatrix) -> Option<Snf> {
    let mut w: Work<i128> = Work::new(a);
    if w.run().is_some() {
        if let Some(s) = w.finish() {
            return Some(s);
        }
    }
    let mut w: Work<BigInt> = Work::new(a);
    w.run().expect("big-integer elimination cannot overflow");
    w.finish()
}

/// Smith normal form of `a`.
///
/// Panics if the unimodular transforms do not fit in `i64`. That does not
/// happen for the matrices the rest of the crate builds; arbitrary input
/// should go through [`smith_normal_form_exact`].
pub fn smith_normal_form(a: &IntMatrix) -> Snf {
    try_smith_normal_form(a).expect("Smith normal form transforms do not fit in i64")
}

/// [`Snf`] with big-integer entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigSnf {
    pub u: Vec<Vec<BigInt>>,
    pub u_inv: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
    pub diag: Vec<BigInt>,
    pub rank: usize,
}

/// Smith normal form with exact transforms; never fails.
pub fn smith_normal_form_exact(a: &IntMatrix) -> BigSnf {
    let mut w: Work<BigInt> = Work::new(a);
    w.run().expect("big-integer elimination cannot overflow");
    let lim = w.m.min(w.n);
    let diag: Vec<BigInt> = (0..lim).map(|t| w.a[t][t].clone()).collect();
    let rank = diag.iter().filter(|d| !Zero::is_zero(*d)).count();
    BigSnf {
        u: w.u,
        u_inv: w.u_inv,
        v: w.v,
        diag,
        rank,
    }
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub(crate) fn determinant(a: &IntMatrix) -> BigInt {
    let n = a.rows();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut m: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from(a.get(i, j))).collect())
        .collect();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if Zero::is_zero(&m[k][k]) {
            let Some(p) = (k + 1..n).find(|&i| !Zero::is_zero(&m[i][k])) else {
                return BigInt::from(0);
            };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = Integer::div_floor(&v, &prev);
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(a: &IntMatrix) -> Snf {
        let s = smith_normal_form(a);
        let d = s.u.mul(a).mul(&s.v);
        assert_eq!(d, s.d_matrix(a.rows(), a.cols()));
        assert_eq!(s.u.mul(&s.u_inv), IntMatrix::identity(a.rows()));
        s
    }

    #[test]
    fn identity_is_fixed() {
        let s = check(&IntMatrix::identity(3));
        assert_eq!(s.diag, vec![1, 1, 1]);
    }

    #[test]
    fn two_by_two_example() {
        let a = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]], 2);
        assert_eq!(check(&a).diag, vec![2, 4]);
    }

    #[test]
    fn zero_matrix() {
        let s = check(&IntMatrix::zeros(2, 3));
        assert_eq!(s.diag, vec![0, 0]);
        assert_eq!(s.rank, 0);
    }

    #[test]
    fn needs_divisibility_fix() {
        // diag(2, 3) is not in normal form: 1 | 6.
        let a = IntMatrix::diagonal(&[2, 3]);
        assert_eq!(check(&a).diag, vec![1, 6]);
    }

    #[test]
    fn bareiss_determinant() {
        let a = IntMatrix::from_rows(&[vec![2, 4], vec![6, 8]], 2);
        assert_eq!(determinant(&a), BigInt::from(-8));
        let b = IntMatrix::from_rows(&[vec![0, 1, 2], vec![1, 0, 3], vec![4, -3, 8]], 3);
        assert_eq!(determinant(&b), BigInt::from(-2));
    }
}
