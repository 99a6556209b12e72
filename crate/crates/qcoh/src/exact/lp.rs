//! Exact rational linear programming (dense tableau simplex, Bland's rule)
//! and cone-membership predicates built on it.

use super::Q;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal(Q),
}

/// Maximize c.y subject to A y = b, y >= 0, everything exact.
///
/// Two-phase dense simplex with Bland's anti-cycling rule; sizes here are
/// tiny (tens of variables), so no effort is spent on sparsity.
pub fn lp_max(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Result<LpOutcome, LpError> {
    let m = a.len();
    let n = if m == 0 { c.len() } else { a[0].len() };
    if b.len() != m || c.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(LpError::DimensionMismatch(format!(
            "A is {m}x{}, b has {}, c has {}",
            a.first().map_or(n, |r| r.len()),
            b.len(),
            c.len()
        )));
    }
    if m == 0 {
        // No constraints: optimum is 0 unless some objective coefficient is
        // positive (then unbounded).
        return Ok(if c.iter().any(|x| x.is_positive()) {
            LpOutcome::Unbounded
        } else {
            LpOutcome::Optimal(Q::zero())
        });
    }

    // Tableau: columns = n structural + m artificial, rows = m constraints.
    // Normalize b >= 0 so the artificial basis is feasible.
    let total = n + m;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut rhs: Vec<Q> = Vec::with_capacity(m);
    for i in 0..m {
        let neg = b[i].is_negative();
        let mut row: Vec<Q> = (0..total).map(|_| Q::zero()).collect();
        for j in 0..n {
            row[j] = if neg { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[n + i] = Q::one();
        t.push(row);
        rhs.push(if neg { -b[i].clone() } else { b[i].clone() });
    }
    let mut basis: Vec<usize> = (n..total).collect();

    // Phase 1: minimize sum of artificials == maximize -(sum of artificials).
    let phase1_cost: Vec<Q> = (0..total)
        .map(|j| if j >= n { -Q::one() } else { Q::zero() })
        .collect();
    let opt1 = run_simplex(&mut t, &mut rhs, &mut basis, &phase1_cost, total);
    debug_assert!(opt1 != SimplexEnd::Unbounded);
    let phase1_value: Q = basis
        .iter()
        .zip(rhs.iter())
        .filter(|(&bi, _)| bi >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if !phase1_value.is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive remaining artificials out of the basis when possible; rows where
    // that fails are redundant constraints with zero rhs and can stay (their
    // artificial is pinned at zero and never re-enters: we forbid artificial
    // columns in phase 2 pivoting by giving them cost 0 and excluding them).
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut rhs, &mut basis, i, j);
            }
        }
    }

    // Phase 2: original objective, artificial columns frozen.
    let phase2_cost: Vec<Q> = (0..total)
        .map(|j| if j < n { c[j].clone() } else { Q::zero() })
        .collect();
    match run_simplex(&mut t, &mut rhs, &mut basis, &phase2_cost, n) {
        SimplexEnd::Unbounded => Ok(LpOutcome::Unbounded),
        SimplexEnd::Optimal => {
            let mut val = Q::zero();
            for (i, &bi) in basis.iter().enumerate() {
                if bi < n {
                    val += &phase2_cost[bi] * &rhs[i];
                }
            }
            Ok(LpOutcome::Optimal(val))
        }
    }
}

#[derive(PartialEq)]
enum SimplexEnd {
    Optimal,
    Unbounded,
}

/// Simplex iterations with Bland's rule; only columns < allowed may enter.
fn run_simplex(
    t: &mut [Vec<Q>],
    rhs: &mut [Q],
    basis: &mut [usize],
    cost: &[Q],
    allowed: usize,
) -> SimplexEnd {
    loop {
        // Reduced costs: c_j - c_B . B^{-1} A_j (tableau already in B^{-1}A form).
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut red = cost[j].clone();
            for (i, &bi) in basis.iter().enumerate() {
                red -= &cost[bi] * &t[i][j];
            }
            red.is_positive()
        });
        let Some(j) = entering else {
            return SimplexEnd::Optimal;
        };
        // Ratio test, Bland: smallest basis index among ties.
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &rhs[i] / &t[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((i, _)) = leave else {
            return SimplexEnd::Unbounded;
        };
        pivot(t, rhs, basis, i, j);
    }
}

fn pivot(t: &mut [Vec<Q>], rhs: &mut [Q], basis: &mut [usize], i: usize, j: usize) {
    let p = t[i][j].clone();
    for x in t[i].iter_mut() {
        *x = &*x / &p;
    }
    rhs[i] = &rhs[i] / &p;
    for k in 0..t.len() {
        if k != i && !t[k][j].is_zero() {
            let f = t[k][j].clone();
            let src = t[i].clone();
            for (x, y) in t[k].iter_mut().zip(src.iter()) {
                *x = &*x - &(&f * y);
            }
            rhs[k] = &rhs[k] - &(&f * &rhs[i]);
        }
    }
    basis[i] = j;
}

/// Exact membership of x in the open (all coefficients > 0) or closed
/// (all coefficients >= 0) span of the generators.
pub fn cone_member(x: &[Q], gens: &[Vec<Q>], open: bool) -> Result<bool, LpError> {
    let r = x.len();
    if gens.iter().any(|g| g.len() != r) {
        return Err(LpError::DimensionMismatch(
            "generator dimension differs from target".into(),
        ));
    }
    let k = gens.len();
    if k == 0 {
        // Empty sum of strictly/weakly positive multiples is {0}.
        return Ok(x.iter().all(|v| v.is_zero()));
    }
    if !open {
        // Feasibility of G lambda = x, lambda >= 0.
        let a: Vec<Vec<Q>> = (0..r).map(|i| gens.iter().map(|g| g[i].clone()).collect()).collect();
        let c = vec![Q::zero(); k];
        return Ok(lp_max(&a, x, &c)? != LpOutcome::Infeasible);
    }
    // Open: write lambda_i = s_i + t; maximize t over G s + t (sum g_i) = x,
    // s >= 0, t >= 0. Membership iff the optimum is positive (or unbounded).
    let mut a: Vec<Vec<Q>> = Vec::with_capacity(r);
    for i in 0..r {
        let mut row: Vec<Q> = gens.iter().map(|g| g[i].clone()).collect();
        let sum: Q = gens.iter().map(|g| g[i].clone()).sum();
        row.push(sum);
        a.push(row);
    }
    let mut c = vec![Q::zero(); k + 1];
    c[k] = Q::one();
    Ok(match lp_max(&a, x, &c)? {
        LpOutcome::Infeasible => false,
        LpOutcome::Unbounded => true,
        LpOutcome::Optimal(v) => v.is_positive(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qq};

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn line_positive_span() {
        assert!(cone_member(&v(&[1]), &[v(&[1]), v(&[1])], true).unwrap());
    }

    #[test]
    fn boundary_point() {
        assert!(!cone_member(&v(&[0]), &[v(&[1])], true).unwrap());
        assert!(cone_member(&v(&[0]), &[v(&[1])], false).unwrap());
    }

    #[test]
    fn weighted_rho_in_closed_cone() {
        // rho-hat = 4 against the P(1,1,2) generators (1),(1),(2)
        assert!(cone_member(&v(&[4]), &[v(&[1]), v(&[1]), v(&[2])], false).unwrap());
    }

    #[test]
    fn full_line_from_opposite_gens() {
        // 0 is interior to the span of {1, -1}
        assert!(cone_member(&v(&[0]), &[v(&[1]), v(&[-1])], true).unwrap());
        assert!(!cone_member(&v(&[1, 0]), &[v(&[0, 1])], false).unwrap());
    }

    #[test]
    fn planar_cones() {
        let gens = vec![v(&[1, 0]), v(&[1, 2])];
        assert!(cone_member(&v(&[2, 1]), &gens, true).unwrap());
        assert!(cone_member(&v(&[1, 2]), &gens, false).unwrap());
        assert!(!cone_member(&v(&[1, 2]), &[v(&[1, 0]), v(&[0, -1])], false).unwrap());
        assert!(!cone_member(&v(&[-1, 0]), &gens, false).unwrap());
        // boundary ray: in closed, not in open
        assert!(cone_member(&v(&[3, 0]), &gens, false).unwrap());
        assert!(!cone_member(&v(&[3, 0]), &gens, true).unwrap());
    }

    #[test]
    fn rational_data() {
        let gens = vec![vec![qq(1, 2), qi(0)], vec![qi(0), qq(3, 1)]];
        assert!(cone_member(&[qq(1, 4), qq(1, 7)], &gens, true).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(cone_member(&v(&[1, 0]), &[v(&[1])], false).is_err());
    }
}
