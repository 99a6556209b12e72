//! Smith normal form over the integers with unimodular transforms.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

pub type ZMat = Vec<Vec<BigInt>>;

/// U * A * V = D with U, V unimodular and D diagonal with d1 | d2 | ...
#[derive(Debug, Clone)]
pub struct SnfDecomposition {
    pub a: ZMat,
    pub u: ZMat,
    pub v: ZMat,
    pub d: ZMat,
}

pub fn zmat_from_i64(rows: &[Vec<i64>]) -> ZMat {
    rows.iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect()
}

fn identity(n: usize) -> ZMat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

pub fn zmat_mul(a: &ZMat, b: &ZMat) -> ZMat {
    let (m, k) = (a.len(), b.len());
    let n = if k == 0 { 0 } else { b[0].len() };
    (0..m)
        .map(|i| {
            (0..n)
                .map(|j| (0..k).map(|t| &a[i][t] * &b[t][j]).sum())
                .collect()
        })
        .collect()
}

/// Determinant by fraction-free Gaussian elimination (Bareiss).
pub fn zmat_det(a: &ZMat) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut prev = BigInt::one();
    let mut sign = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let swap = (k + 1..n).find(|&i| !m[i][k].is_zero());
            match swap {
                Some(i) => {
                    m.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Smith normal form. Row operations are mirrored on U, column operations
/// on V, so U*A*V = D is maintained as an invariant throughout.
pub fn snf(a: &ZMat) -> SnfDecomposition {
    let m = a.len();
    let k = if m == 0 { 0 } else { a[0].len() };
    let mut d = a.clone();
    let mut u = identity(m);
    let mut v = identity(k);

    let rows = m;
    let cols = k;
    let mut t = 0;
    while t < rows.min(cols) {
        // Find a pivot: nonzero entry of smallest absolute value in d[t.., t..].
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[i][j].is_zero()
                    && pivot.is_none_or(|(pi, pj)| d[i][j].abs() < d[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        d.swap(t, pi);
        u.swap(t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);

        // Clear row and column t; restart whenever a remainder appears.
        let mut clean = true;
        for i in t + 1..rows {
            if !d[i][t].is_zero() {
                let q = div_round(&d[i][t], &d[t][t]);
                row_sub(&mut d, i, t, &q);
                row_sub(&mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    clean = false;
                }
            }
        }
        for j in t + 1..cols {
            if !d[t][j].is_zero() {
                let q = div_round(&d[t][j], &d[t][t]);
                col_sub(&mut d, j, t, &q);
                col_sub(&mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // Enforce divisibility of the trailing block by the pivot.
        let mut fixed = true;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&d[i][j] % &d[t][t]).is_zero() {
                    // add row i to row t and restart this pivot
                    let one = BigInt::one();
                    row_add(&mut d, t, i, &one);
                    row_add(&mut u, t, i, &one);
                    fixed = false;
                    break 'outer;
                }
            }
        }
        if fixed {
            if d[t][t].is_negative() {
                for x in d[t].iter_mut() {
                    *x = -std::mem::take(x);
                }
                for x in u[t].iter_mut() {
                    *x = -std::mem::take(x);
                }
            }
            t += 1;
        }
    }
    SnfDecomposition {
        a: a.clone(),
        u,
        v,
        d,
    }
}

fn swap_cols(m: &mut ZMat, a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

fn row_sub(m: &mut ZMat, i: usize, t: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let tr = m[t].clone();
    for (x, y) in m[i].iter_mut().zip(tr.iter()) {
        *x -= q * y;
    }
}

fn row_add(m: &mut ZMat, i: usize, t: usize, q: &BigInt) {
    let tr = m[t].clone();
    for (x, y) in m[i].iter_mut().zip(tr.iter()) {
        *x += q * y;
    }
}

fn col_sub(m: &mut ZMat, j: usize, t: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let y = row[t].clone();
        row[j] -= q * y;
    }
}

/// Rounded division so remainders shrink fast.
fn div_round(a: &BigInt, b: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    let (q, r) = num_integer::Integer::div_mod_floor(a, b);
    if &(r * two) > &b.abs() {
        q + BigInt::one()
    } else {
        q
    }
}

impl SnfDecomposition {
    /// Diagonal entries of D (invariant factors, zeros at the end).
    pub fn diagonal(&self) -> Vec<BigInt> {
        let m = self.d.len();
        let k = if m == 0 { 0 } else { self.d[0].len() };
        (0..m.min(k)).map(|i| self.d[i][i].clone()).collect()
    }

    /// Cokernel of A viewed as a map Z^cols -> Z^rows by left multiplication
    /// (i.e. Z^rows / column span): torsion invariant factors > 1, free rank.
    pub fn cokernel(&self) -> (Vec<BigInt>, usize) {
        let rows = self.d.len();
        let diag = self.diagonal();
        let nonzero = diag.iter().filter(|x| !x.is_zero()).count();
        let torsion = diag
            .iter()
            .filter(|x| !x.is_zero() && !x.is_one())
            .cloned()
            .collect();
        (torsion, rows - nonzero)
    }

    pub fn check(&self) -> bool {
        let uav = zmat_mul(&zmat_mul(&self.u, &self.a), &self.v);
        if uav != self.d {
            return false;
        }
        if zmat_det(&self.u).abs() != BigInt::one() || zmat_det(&self.v).abs() != BigInt::one() {
            return false;
        }
        let diag = self.diagonal();
        for w in diag.windows(2) {
            if !w[0].is_zero() && !w[1].is_zero() && !(&w[1] % &w[0]).is_zero() {
                return false;
            }
            if w[0].is_zero() && !w[1].is_zero() {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_of_diag_2_3() {
        let a = zmat_from_i64(&[vec![2, 0], vec![0, 3]]);
        let s = snf(&a);
        assert!(s.check());
        assert_eq!(s.diagonal(), vec![BigInt::one(), BigInt::from(6)]);
    }

    #[test]
    fn snf_identity_case() {
        let a = zmat_from_i64(&[vec![1]]);
        let s = snf(&a);
        assert!(s.check());
        assert_eq!(s.d, zmat_from_i64(&[vec![1]]));
    }

    #[test]
    fn snf_column_1_2() {
        let a = zmat_from_i64(&[vec![1], vec![2]]);
        let s = snf(&a);
        assert!(s.check());
        assert_eq!(s.diagonal(), vec![BigInt::one()]);
        let (torsion, free) = s.cokernel();
        assert!(torsion.is_empty());
        assert_eq!(free, 1);
    }

    #[test]
    fn snf_weighted_p112() {
        // column (1,1,2)^T: cokernel Z^2, no torsion
        let a = zmat_from_i64(&[vec![1], vec![1], vec![2]]);
        let s = snf(&a);
        assert!(s.check());
        let (torsion, free) = s.cokernel();
        assert!(torsion.is_empty());
        assert_eq!(free, 2);
    }

    #[test]
    fn snf_random_small() {
        // deterministic pseudo-random matrices, entries in [-5, 5]
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..60 {
            let m = (next() % 5 + 1) as usize;
            let k = (next() % 5 + 1) as usize;
            let a: ZMat = (0..m)
                .map(|_| (0..k).map(|_| BigInt::from(next() % 11) - 5).collect())
                .collect();
            let s = snf(&a);
            assert!(s.check(), "snf invariant failed for {a:?}");
        }
    }
}
