//! Dense exact linear algebra over the rationals: solve, invert, rank, det.

use super::Q;
use num_traits::{One, Zero};

pub type QMat = Vec<Vec<Q>>;

pub fn qmat_from_i64(rows: &[Vec<i64>]) -> QMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect())
        .collect()
}

pub fn identity(n: usize) -> QMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Q::one() } else { Q::zero() })
                .collect()
        })
        .collect()
}

pub fn mul(a: &QMat, b: &QMat) -> QMat {
    let m = a.len();
    let k = b.len();
    let n = if k == 0 { 0 } else { b[0].len() };
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &QMat, x: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn transpose(a: &QMat) -> QMat {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    (0..n).map(|j| (0..m).map(|i| a[i][j].clone()).collect()).collect()
}

/// Reduced row echelon form; returns (rref, pivot columns).
pub fn rref(a: &QMat) -> (QMat, Vec<usize>) {
    let mut m = a.clone();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let src = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(src.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (m, pivots)
}

pub fn rank(a: &QMat) -> usize {
    rref(a).1.len()
}

pub fn det(a: &QMat) -> Q {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(c, p);
            d = -d;
        }
        d = d * m[c][c].clone();
        let inv = Q::one() / &m[c][c];
        for i in c + 1..n {
            if !m[i][c].is_zero() {
                let f = &m[i][c] * &inv;
                let src = m[c].clone();
                for (x, y) in m[i].iter_mut().zip(src.iter()) {
                    *x = &*x - &(&f * y);
                }
            }
        }
    }
    d
}

/// One solution of A x = b, if consistent.
pub fn solve(a: &QMat, b: &[Q]) -> Option<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let aug: QMat = (0..rows)
        .map(|i| {
            let mut row = a[i].clone();
            row.push(b[i].clone());
            row
        })
        .collect();
    let (r, pivots) = rref(&aug);
    // Inconsistent if a pivot lands in the last column.
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = r[i][cols].clone();
    }
    Some(x)
}

pub fn inverse(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let aug: QMat = (0..n)
        .map(|i| {
            let mut row = a[i].clone();
            for j in 0..n {
                row.push(if i == j { Q::one() } else { Q::zero() });
            }
            row
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| i != c) {
        return None;
    }
    Some((0..n).map(|i| r[i][n..].to_vec()).collect())
}

/// Basis of the null space of A.
pub fn null_space(a: &QMat) -> Vec<Vec<Q>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let (r, pivots) = rref(a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r[i][f].clone();
            }
            v
        })
        .collect()
}
