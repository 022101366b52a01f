//! Smith normal form of integer matrices by row/column reduction with
//! pivoting on the smallest nonzero entry. Arbitrary-precision entries, so
//! intermediate growth cannot overflow.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone)]
pub struct SmithForm {
    /// diagonal entries d_1 | d_2 | ... (nonnegative), padded with zeros
    pub diag: Vec<BigInt>,
    /// left transform: u * m * v = diag(diag)
    pub u: Vec<Vec<BigInt>>,
    /// inverse of the left transform
    pub u_inv: Vec<Vec<BigInt>>,
    /// right transform
    pub v: Vec<Vec<BigInt>>,
    pub rows: usize,
    pub cols: usize,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

fn swap_rows(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    m.swap(a, b);
}

fn swap_cols(m: &mut [Vec<BigInt>], a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

// row a += q * row b
fn add_row(m: &mut [Vec<BigInt>], a: usize, b: usize, q: &BigInt) {
    for j in 0..m[a].len() {
        let t = &m[b][j] * q;
        m[a][j] += t;
    }
}

// col a += q * col b
fn add_col(m: &mut [Vec<BigInt>], a: usize, b: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let t = &row[b] * q;
        row[a] += t;
    }
}

fn negate_row(m: &mut [Vec<BigInt>], a: usize) {
    for x in m[a].iter_mut() {
        *x = -x.clone();
    }
}

fn negate_col(m: &mut [Vec<BigInt>], a: usize) {
    for row in m.iter_mut() {
        row[a] = -row[a].clone();
    }
}

/// Compute the Smith normal form of an integer matrix given as rows.
pub fn smith(mat: &[Vec<i64>]) -> SmithForm {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut m: Vec<Vec<BigInt>> = mat
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut u = identity(rows);
    let mut u_inv = identity(rows);
    let mut v = identity(cols);

    let mut k = 0;
    while k < rows.min(cols) {
        // pivot: smallest nonzero |entry| in the trailing block
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if !m[i][j].is_zero()
                    && pivot
                        .map(|(pi, pj)| m[i][j].abs() < m[pi][pj].abs())
                        .unwrap_or(true)
                {
                    pivot = Some((i, j));
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(p) => p,
            None => break,
        };
        if pi != k {
            swap_rows(&mut m, pi, k);
            swap_rows(&mut u, pi, k);
            swap_cols(&mut u_inv, pi, k);
        }
        if pj != k {
            swap_cols(&mut m, pj, k);
            swap_rows(&mut v, pj, k); // v applied on the right: track as row swaps of v^T; see below
        }
        // clear column k
        let mut dirty = false;
        for i in k + 1..rows {
            if !m[i][k].is_zero() {
                let q = -(&m[i][k] / &m[k][k]);
                add_row(&mut m, i, k, &q);
                add_row(&mut u, i, k, &q);
                add_col(&mut u_inv, k, i, &(-&q));
                if !m[i][k].is_zero() {
                    dirty = true;
                }
            }
        }
        // clear row k
        for j in k + 1..cols {
            if !m[k][j].is_zero() {
                let q = -(&m[k][j] / &m[k][k]);
                add_col(&mut m, j, k, &q);
                add_row(&mut v, j, k, &q);
                if !m[k][j].is_zero() {
                    dirty = true;
                }
            }
        }
        if dirty {
            continue; // remainders left; re-pivot on a smaller entry
        }
        // divisibility sweep: fold any non-divisible entry into column k
        let d = m[k][k].clone();
        let mut fixed = true;
        'scan: for i in k + 1..rows {
            for j in k + 1..cols {
                if (&m[i][j] % &d) != BigInt::zero() {
                    add_row(&mut m, k, i, &BigInt::one());
                    add_row(&mut u, k, i, &BigInt::one());
                    add_col(&mut u_inv, i, k, &BigInt::from(-1));
                    fixed = false;
                    break 'scan;
                }
            }
        }
        if fixed {
            if m[k][k].is_negative() {
                negate_row(&mut m, k);
                negate_row(&mut u, k);
                negate_col(&mut u_inv, k);
            }
            k += 1;
        }
    }

    // v was accumulated transposed (rows track column ops); transpose back
    let mut vt = identity(cols);
    for i in 0..cols {
        for j in 0..cols {
            vt[i][j] = v[j][i].clone();
        }
    }

    let diag = (0..rows.min(cols)).map(|i| m[i][i].clone()).collect();
    SmithForm {
        diag,
        u,
        u_inv,
        v: vt,
        rows,
        cols,
    }
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let k = if n == 0 { 0 } else { a[0].len() };
    let m = if b.is_empty() { 0 } else { b[0].len() };
    let mut out = vec![vec![BigInt::zero(); m]; n];
    for i in 0..n {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..m {
                let t = &a[i][l] * &b[l][j];
                out[i][j] += t;
            }
        }
    }
    out
}
