//! Truncated bivariate series in (q, q-bar) over a generic (possibly
//! non-commutative, e.g. matrix) coefficient ring. Truncation is by total
//! degree; multiplication preserves operand order.

use super::Ring;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

pub const UNBOUNDED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct BiSeries<S> {
    order: u32,
    terms: BTreeMap<(u32, u32), S>,
}

impl<S: Ring> BiSeries<S> {
    pub fn new(order: u32) -> Self {
        BiSeries {
            order,
            terms: BTreeMap::new(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn monomial(order: u32, n: u32, m: u32, coeff: S) -> Self {
        let mut s = Self::new(order);
        s.insert_add(n, m, coeff);
        s
    }

    pub fn constant(order: u32, c: S) -> Self {
        Self::monomial(order, 0, 0, c)
    }

    pub fn coeff(&self, n: u32, m: u32) -> S {
        self.terms.get(&(n, m)).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &S)> {
        self.terms.iter()
    }

    pub fn insert_add(&mut self, n: u32, m: u32, coeff: S) {
        if coeff.is_zero() || n.saturating_add(m) > self.order {
            return;
        }
        let e = self.terms.entry((n, m)).or_insert_with(S::zero);
        *e = e.clone() + coeff;
        if e.is_zero() {
            self.terms.remove(&(n, m));
        }
    }

    pub fn truncate(&self, order: u32) -> Self {
        let mut out = Self::new(order.min(self.order));
        for (&(n, m), c) in &self.terms {
            if n.saturating_add(m) <= out.order {
                out.terms.insert((n, m), c.clone());
            }
        }
        out
    }

    /// Swap q and q-bar.
    pub fn swap_vars(&self) -> Self {
        let mut out = Self::new(self.order);
        for (&(n, m), c) in &self.terms {
            out.terms.insert((m, n), c.clone());
        }
        out
    }

    pub fn map_coeffs<T: Ring, F: Fn(&S) -> T>(&self, f: F) -> BiSeries<T> {
        let mut out = BiSeries::new(self.order);
        for (&(n, m), c) in &self.terms {
            let c2 = f(c);
            if !c2.is_zero() {
                out.terms.insert((n, m), c2);
            }
        }
        out
    }

    /// Multiply coefficient at (n, m) by f(n, m) (e.g. Euler operators).
    pub fn scale_by_degree<F: Fn(u32, u32, &S) -> S>(&self, f: F) -> Self {
        let mut out = Self::new(self.order);
        for (&(n, m), c) in &self.terms {
            let c2 = f(n, m, c);
            if !c2.is_zero() {
                out.terms.insert((n, m), c2);
            }
        }
        out
    }

    /// Geometric-series inverse for series with unit constant term:
    /// (u + N)^{-1} = u^{-1} sum (-N u^{-1})^k, exact at the truncation order.
    /// Requires the constant term to be S::one().
    pub fn inverse_unipotent(&self) -> Self {
        assert!(
            self.coeff(0, 0) == S::one(),
            "inverse_unipotent requires constant term 1"
        );
        let order = self.order;
        let nilp = self.clone() - Self::constant(order, S::one());
        let mut acc = Self::constant(order, S::one());
        let mut pow = Self::constant(order, S::one());
        for _ in 0..order {
            pow = pow * (-nilp.clone());
            if pow.terms.is_empty() {
                break;
            }
            acc = acc + pow.clone();
        }
        acc
    }
}

impl<S: Ring> Add for BiSeries<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = self.truncate(order);
        for ((n, m), c) in rhs.terms {
            out.insert_add(n, m, c);
        }
        out
    }
}

impl<S: Ring> Sub for BiSeries<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Ring> Neg for BiSeries<S> {
    type Output = Self;
    fn neg(self) -> Self {
        BiSeries {
            order: self.order,
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl<S: Ring> Mul for BiSeries<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = Self::new(order);
        for (&(n1, m1), c1) in &self.terms {
            for (&(n2, m2), c2) in &rhs.terms {
                let (n, m) = (n1 + n2, m1 + m2);
                if n + m <= order {
                    out.insert_add(n, m, c1.clone() * c2.clone());
                }
            }
        }
        out
    }
}

impl<S: Ring> Zero for BiSeries<S> {
    fn zero() -> Self {
        Self::new(UNBOUNDED)
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Ring> One for BiSeries<S> {
    fn one() -> Self {
        Self::constant(UNBOUNDED, S::one())
    }
}
