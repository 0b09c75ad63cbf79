//! Ring-aware linear solving and kernels.
//!
//! Over `ℤ` everything goes through the Smith normal form. Over `ℤ/m` with
//! `m` composite the system is lifted to `ℤ` with congruence columns `m·I`.
//! Over a prime field plain Gaussian elimination is used.

use super::matrix::IntMatrix;
use super::ring::Ring;
use super::snf::smith_normal_form;

pub fn inv_mod(a: i64, p: i64) -> i64 {
    // Fermat; p is a small prime
    let mut result = 1i64;
    let mut base = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Reduced row echelon form over `ℤ/p`. Returns the reduced rows and the
/// pivot column of each nonzero row.
pub(crate) fn rref_mod_p(a: &IntMatrix, p: i64) -> (Vec<Vec<i64>>, Vec<usize>) {
    let (m, n) = (a.rows(), a.cols());
    let mut rows: Vec<Vec<i64>> = (0..m)
        .map(|i| a.row(i).iter().map(|&x| x.rem_euclid(p)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(pr) = (r..m).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = inv_mod(rows[r][c], p);
        for x in rows[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m {
            if i != r && rows[i][c] != 0 {
                let f = rows[i][c];
                for j in 0..n {
                    rows[i][j] = (rows[i][j] - f * rows[r][j]).rem_euclid(p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank_mod_p(a: &IntMatrix, p: i64) -> usize {
    rref_mod_p(a, p).1.len()
}

fn solve_field(a: &IntMatrix, b: &[i64], p: i64) -> Option<Vec<i64>> {
    let n = a.cols();
    let aug = a.hstack(&IntMatrix::from_cols(&[b.to_vec()], a.rows()));
    let (rows, pivots) = rref_mod_p(&aug, p);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![0; n];
    for (row, &c) in rows.iter().zip(&pivots) {
        x[c] = row[n];
    }
    Some(x)
}

fn kernel_field(a: &IntMatrix, p: i64) -> IntMatrix {
    let n = a.cols();
    let (rows, pivots) = rref_mod_p(a, p);
    let mut is_pivot = vec![None; n];
    for (i, &c) in pivots.iter().enumerate() {
        is_pivot[c] = Some(i);
    }
    let mut basis = Vec::new();
    for f in 0..n {
        if is_pivot[f].is_some() {
            continue;
        }
        let mut v = vec![0; n];
        v[f] = 1;
        for (row, &c) in rows.iter().zip(&pivots) {
            v[c] = (-row[f]).rem_euclid(p);
        }
        basis.push(v);
    }
    IntMatrix::from_cols(&basis, n)
}

fn solve_integers(a: &IntMatrix, b: &[i64]) -> Option<Vec<i64>> {
    let s = smith_normal_form(a);
    let c = s.u.mul_vec(b);
    let mut y = vec![0i64; a.cols()];
    for (i, &ci) in c.iter().enumerate() {
        let d = s.diag.get(i).copied().unwrap_or(0);
        if d == 0 {
            if ci != 0 {
                return None;
            }
        } else {
            if ci % d != 0 {
                return None;
            }
            y[i] = ci / d;
        }
    }
    Some(s.v.mul_vec(&y))
}

fn kernel_integers(a: &IntMatrix) -> IntMatrix {
    let s = smith_normal_form(a);
    let cols: Vec<usize> = (s.rank..a.cols()).collect();
    s.v.select_cols(&cols)
}

fn with_congruence(a: &IntMatrix, m: i64) -> IntMatrix {
    a.reduce_mod(m).hstack(&IntMatrix::identity(a.rows()).scale(m))
}

/// Some `x` with `a·x = b` over `ring`, if one exists.
pub fn solve(ring: Ring, a: &IntMatrix, b: &[i64]) -> Option<Vec<i64>> {
    assert_eq!(a.rows(), b.len(), "solve: shape mismatch");
    if a.cols() == 0 {
        return if b.iter().all(|&x| ring.reduce(x) == 0) {
            Some(Vec::new())
        } else {
            None
        };
    }
    match ring {
        Ring::Integers => solve_integers(a, b),
        Ring::Mod(m) => {
            let m = m as i64;
            if let Some(p) = ring.field_prime() {
                return solve_field(a, b, p);
            }
            let lifted = with_congruence(a, m);
            let rhs: Vec<i64> = b.iter().map(|x| x.rem_euclid(m)).collect();
            let x = solve_integers(&lifted, &rhs)?;
            Some(x[..a.cols()].iter().map(|v| v.rem_euclid(m)).collect())
        }
    }
}

/// Generators (as columns) of `{x : a·x = 0}` over `ring`.
///
/// Over `ℤ` and prime fields the columns form a basis; over `ℤ/m` with `m`
/// composite they only generate.
pub fn kernel(ring: Ring, a: &IntMatrix) -> IntMatrix {
    let n = a.cols();
    if a.rows() == 0 {
        return IntMatrix::identity(n);
    }
    match ring {
        Ring::Integers => kernel_integers(a),
        Ring::Mod(m) => {
            let m = m as i64;
            if let Some(p) = ring.field_prime() {
                return kernel_field(a, p);
            }
            let k = kernel_integers(&with_congruence(a, m));
            let top: Vec<usize> = (0..n).collect();
            let k = k.select_rows(&top).reduce_mod(m);
            let keep: Vec<usize> = (0..k.cols()).filter(|&j| k.col(j).iter().any(|&v| v != 0)).collect();
            k.select_cols(&keep)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_solve_respects_divisibility() {
        let a = IntMatrix::from_rows(&[vec![2]], 1);
        assert_eq!(solve(Ring::Integers, &a, &[4]), Some(vec![2]));
        assert_eq!(solve(Ring::Integers, &a, &[3]), None);
        assert_eq!(solve(Ring::Mod(5), &a, &[3]), Some(vec![4]));
        // 2x = 1 has no solution mod 4, 2x = 2 does
        assert_eq!(solve(Ring::Mod(4), &a, &[1]), None);
        let x = solve(Ring::Mod(4), &a, &[2]).unwrap();
        assert_eq!((2 * x[0]).rem_euclid(4), 2);
    }

    #[test]
    fn kernels() {
        let a = IntMatrix::from_rows(&[vec![1, 1]], 2);
        let k = kernel(Ring::Integers, &a);
        assert_eq!(k.cols(), 1);
        assert!(a.mul(&k).is_zero());
        // 2x = 0 mod 4 has kernel {0, 2}
        let b = IntMatrix::from_rows(&[vec![2]], 1);
        let k = kernel(Ring::Mod(4), &b);
        assert_eq!(k.cols(), 1);
        assert_eq!(k.get(0, 0), 2);
        let k = kernel(Ring::Mod(2), &b);
        assert_eq!(k.cols(), 1);
    }
}
