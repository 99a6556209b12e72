//! Sparse Laurent polynomials in one formal variable over a generic ring.

use super::Ring;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly<S> {
    terms: BTreeMap<i64, S>,
}

impl<S: Ring> LaurentPoly<S> {
    pub fn new() -> Self {
        LaurentPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(exp: i64, coeff: S) -> Self {
        let mut t = BTreeMap::new();
        if !coeff.is_zero() {
            t.insert(exp, coeff);
        }
        LaurentPoly { terms: t }
    }

    pub fn constant(c: S) -> Self {
        Self::monomial(0, c)
    }

    pub fn coeff(&self, exp: i64) -> S {
        self.terms.get(&exp).cloned().unwrap_or_else(S::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &S)> {
        self.terms.iter()
    }

    pub fn insert_add(&mut self, exp: i64, coeff: S) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exp).or_insert_with(S::zero);
        *entry = entry.clone() + coeff;
        if entry.is_zero() {
            self.terms.remove(&exp);
        }
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Unique decomposition into the part with exponents >= 1 and the part
    /// with exponents <= 0.
    pub fn split(&self) -> (Self, Self) {
        let mut pos = Self::new();
        let mut nonpos = Self::new();
        for (&e, c) in &self.terms {
            if e >= 1 {
                pos.terms.insert(e, c.clone());
            } else {
                nonpos.terms.insert(e, c.clone());
            }
        }
        (pos, nonpos)
    }

    /// Apply a map to every term; the map may move exponents and rescale
    /// coefficients (used e.g. for z -> -1/z substitutions).
    pub fn transform<F: Fn(i64, &S) -> (i64, S)>(&self, f: F) -> Self {
        let mut out = Self::new();
        for (&e, c) in &self.terms {
            let (e2, c2) = f(e, c);
            out.insert_add(e2, c2);
        }
        out
    }

    pub fn map_coeffs<T: Ring, F: Fn(&S) -> T>(&self, f: F) -> LaurentPoly<T> {
        let mut out = LaurentPoly::new();
        for (&e, c) in &self.terms {
            let c2 = f(c);
            if !c2.is_zero() {
                out.terms.insert(e, c2);
            }
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map_coeffs(|c| c.clone() * s.clone())
    }
}

impl<S: Ring> Default for LaurentPoly<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Ring> Add for LaurentPoly<S> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (e, c) in rhs.terms {
            self.insert_add(e, c);
        }
        self
    }
}

impl<S: Ring> Sub for LaurentPoly<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<S: Ring> Neg for LaurentPoly<S> {
    type Output = Self;
    fn neg(self) -> Self {
        LaurentPoly {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
        }
    }
}

impl<S: Ring> Mul for LaurentPoly<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::new();
        for (&e1, c1) in &self.terms {
            for (&e2, c2) in &rhs.terms {
                out.insert_add(e1 + e2, c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl<S: Ring> Zero for LaurentPoly<S> {
    fn zero() -> Self {
        Self::new()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<S: Ring> One for LaurentPoly<S> {
    fn one() -> Self {
        Self::constant(S::one())
    }
}
