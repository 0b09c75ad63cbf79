use flasque::homalg::{smith_normal_form, smith_normal_form_exact, try_smith_normal_form, IntMatrix};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

/// Fraction-free Gaussian elimination in i128.
fn det(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| a[i][k] != 0) else {
            return 0;
        };
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).filter(|m| m.count_ones() as usize == k).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
}

/// `d_1 ⋯ d_k` is the gcd of the `k × k` minors.
fn determinantal_diagonal(rows: &[Vec<i64>]) -> Vec<i64> {
    let (r, c) = (rows.len(), rows[0].len());
    let mut out = Vec::new();
    let mut prev = 1i128;
    for k in 1..=r.min(c) {
        let mut g = 0i128;
        for rs in subsets(r, k) {
            for cs in subsets(c, k) {
                let minor: Vec<Vec<i128>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j] as i128).collect()).collect();
                g = g.gcd(&det(&minor));
            }
        }
        if g == 0 {
            out.extend(std::iter::repeat(0).take(r.min(c) - out.len()));
            break;
        }
        out.push((g / prev) as i64);
        prev = g;
    }
    out
}

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-50i64..=50, c), r))
}

type Big = Vec<Vec<BigInt>>;

fn big(rows: &[Vec<i64>]) -> Big {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn mul(a: &Big, b: &Big) -> Big {
    a.iter()
        .map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * &row[j]).sum()).collect())
        .collect()
}

fn identity(n: usize) -> Big {
    (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect()).collect()
}

/// Bareiss over BigInt.
fn big_det(m: &Big) -> BigInt {
    let n = m.len();
    let mut a = m.clone();
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| !a[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if piv != k {
            a.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diagonalizes_unimodularly(rows in matrix(8)) {
        let a = IntMatrix::from_rows(&rows, rows[0].len());
        let (m, n) = (a.rows(), a.cols());
        let s = smith_normal_form_exact(&a);
        let d = mul(&mul(&s.u, &big(&rows)), &s.v);
        for i in 0..m {
            for j in 0..n {
                if i != j {
                    prop_assert!(d[i][j].is_zero());
                }
            }
        }
        let ds: Vec<BigInt> = (0..m.min(n)).map(|i| d[i][i].clone()).collect();
        prop_assert_eq!(&ds, &s.diag);
        prop_assert!(ds.iter().all(|x| !x.is_negative()));
        for w in ds.windows(2) {
            let divides = if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() };
            prop_assert!(divides, "{:?}", ds);
        }
        prop_assert_eq!(big_det(&s.u).abs(), BigInt::from(1));
        prop_assert_eq!(big_det(&s.v).abs(), BigInt::from(1));
        prop_assert_eq!(mul(&s.u, &s.u_inv), identity(m));
        prop_assert_eq!(s.rank, ds.iter().filter(|x| !x.is_zero()).count());

        // the i64 variant, when its transforms fit, agrees on the diagonal
        if let Some(t) = try_smith_normal_form(&a) {
            let td: Vec<BigInt> = t.diag[..m.min(n)].iter().map(|&x| BigInt::from(x)).collect();
            prop_assert_eq!(td, ds);
            let u: Big = (0..m).map(|i| (0..m).map(|j| BigInt::from(t.u.get(i, j))).collect()).collect();
            let v: Big = (0..n).map(|i| (0..n).map(|j| BigInt::from(t.v.get(i, j))).collect()).collect();
            let e = mul(&mul(&u, &big(&rows)), &v);
            prop_assert!((0..m).all(|i| (0..n).all(|j| i == j || e[i][j].is_zero())));
        }
    }

    #[test]
    fn matches_determinantal_divisors(rows in matrix(5)) {
        let a = IntMatrix::from_rows(&rows, rows[0].len());
        let s = smith_normal_form_exact(&a);
        let want: Vec<BigInt> = determinantal_diagonal(&rows).into_iter().map(BigInt::from).collect();
        prop_assert_eq!(s.diag, want);
    }
}

#[test]
fn low_rank_eight_by_eight() {
    // rank 2 built as a product, entries well inside i64
    let u: Vec<Vec<i64>> = (0..8).map(|i| vec![i as i64 - 3, 2 * i as i64 + 1]).collect();
    let v = [vec![1i64, -2, 3, 0, 5, 7, -1, 4], vec![6, 2, -4, 8, 0, 2, 2, 10]];
    let rows: Vec<Vec<i64>> = u.iter().map(|r| (0..8).map(|j| r[0] * v[0][j] + r[1] * v[1][j]).collect()).collect();
    let s = smith_normal_form(&IntMatrix::from_rows(&rows, 8));
    assert_eq!(s.rank, 2);
    assert_eq!(&s.diag[..8], &determinantal_diagonal(&rows)[..]);
}
