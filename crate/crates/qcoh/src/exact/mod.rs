//! Scalar backends and polynomial/series/lattice arithmetic shared by all
//! other modules: exact rationals, arbitrary-precision complex floats,
//! Laurent polynomials, truncated (q, q-bar) series, Smith normal form,
//! rational functions in one parameter, and exact linear programming.

pub mod bigc;
pub mod biseries;
pub mod laurent;
pub mod lp;
pub mod matq;
pub mod ratfun;
pub mod snf;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::ops::{Add, Mul, Neg, Sub};

/// Exact rational scalar used everywhere an answer is rational.
pub type Q = num_rational::BigRational;

/// Minimal commutative-ring bound for the generic containers.
pub trait Ring:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Neg<Output = T>
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
{
}

/// Rational from an integer.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Rational p/q.
pub fn qq(p: i64, q: i64) -> Q {
    Q::new(BigInt::from(p), BigInt::from(q))
}

/// Serialize a rational as "p/q" (plain "p" when the denominator is 1).
pub fn q_to_string(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse "p/q" or "p".
pub fn q_from_string(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|e| format!("bad numerator {num:?}: {e}"))?;
    let d: BigInt = den.parse().map_err(|e| format!("bad denominator {den:?}: {e}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Q::new(n, d))
}

/// Fractional part in [0, 1): x - floor(x).
pub fn frac(x: &Q) -> Q {
    x - Q::from_integer(x.floor().to_integer())
}

/// True when x is an integer.
pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Ceiling as a rational integer.
pub fn ceil_q(x: &Q) -> BigInt {
    x.ceil().to_integer()
}

/// Exact n-th Bernoulli number (B1 = -1/2 convention), via the defining
/// recurrence sum_{j<=n} C(n+1,j) B_j = 0.
pub fn bernoulli(n: usize) -> Q {
    let mut b: Vec<Q> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut acc = Q::zero();
        let mut binom = BigInt::one(); // C(m+1, j), starting at j = 0
        for (j, bj) in b.iter().enumerate().take(m) {
            acc += Q::from_integer(binom.clone()) * bj;
            binom = &binom * BigInt::from((m + 1 - j) as u64) / BigInt::from(j as u64 + 1);
        }
        let bm = if m == 0 {
            Q::one()
        } else {
            -acc / Q::from_integer(BigInt::from(m as u64 + 1))
        };
        b.push(bm);
    }
    b[n].clone()
}

/// abs of a rational.
pub fn q_abs(x: &Q) -> Q {
    x.abs()
}
