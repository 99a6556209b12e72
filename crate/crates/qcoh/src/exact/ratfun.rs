//! Dense univariate polynomials over the rationals and reduced rational
//! functions in one parameter.

use super::Q;
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RatFunError {
    #[error("rational function is not constant: ({num})/({den})")]
    NotConstant { num: String, den: String },
    #[error("division by zero rational function")]
    DivisionByZero,
}

/// Coefficients in ascending degree, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn constant(c: Q) -> Self {
        Poly::new(vec![c])
    }

    pub fn var() -> Self {
        Poly::new(vec![Q::zero(), Q::one()])
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Q> {
        self.0.last()
    }

    pub fn coeff(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn scale(&self, s: &Q) -> Self {
        Poly::new(self.0.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * Q::from_integer((i as i64 + 1).into()))
                .collect(),
        )
    }

    /// Euclidean division: (quotient, remainder).
    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lead = d.leading().unwrap().clone();
        let mut rem = self.0.clone();
        let mut quot = vec![Q::zero(); self.0.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let k = rem.len() - 1 - dd;
            let f = rem.last().unwrap() / &lead;
            if !f.is_zero() {
                quot[k] = f.clone();
                for (i, c) in d.0.iter().enumerate() {
                    let idx = k + i;
                    rem[idx] = &rem[idx] - &(&f * c);
                }
            }
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
            if rem.len() <= dd {
                break;
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic gcd.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        match a.leading() {
            Some(l) if !l.is_one() => {
                let inv = Q::one() / l;
                a.scale(&inv)
            }
            _ => a,
        }
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly(vec![])
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Q::one())
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        let n = self.0.len().max(rhs.0.len());
        Poly::new(
            (0..n)
                .map(|i| self.coeff(i) + rhs.coeff(i))
                .collect::<Vec<_>>(),
        )
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }
}

/// Reduced rational function: gcd(num, den) = 1, den monic and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    pub fn new(num: Poly, den: Poly) -> Result<Self, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return RatFun {
                num: Poly::zero(),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, _) = num.divrem(&g);
        let (den, _) = den.divrem(&g);
        let lead = den.leading().unwrap().clone();
        let inv = Q::one() / &lead;
        RatFun {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFun {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn from_q(c: Q) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn var() -> Self {
        Self::from_poly(Poly::var())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// The constant value of f if f is constant as a rational function.
    pub fn constant_value(&self) -> Result<Q, RatFunError> {
        if self.num.is_zero() {
            return Ok(Q::zero());
        }
        if self.num.degree() == Some(0) && self.den.degree() == Some(0) {
            return Ok(self.num.coeff(0) / self.den.coeff(0));
        }
        Err(RatFunError::NotConstant {
            num: format!("{:?}", self.num.coeffs()),
            den: format!("{:?}", self.den.coeffs()),
        })
    }

    pub fn derivative(&self) -> RatFun {
        let n = self.num.clone();
        let d = self.den.clone();
        let num = n.derivative() * d.clone() - n * d.derivative();
        let den = d.clone() * d;
        Self::reduced(num, den)
    }

    pub fn eval(&self, x: &Q) -> Option<Q> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x) / d)
        }
    }

    pub fn inverse(&self) -> Result<RatFun, RatFunError> {
        if self.num.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        Ok(Self::reduced(self.den.clone(), self.num.clone()))
    }
}

impl Zero for RatFun {
    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for RatFun {
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
}

impl Add for RatFun {
    type Output = RatFun;
    fn add(self, rhs: RatFun) -> RatFun {
        RatFun::reduced(
            self.num.clone() * rhs.den.clone() + rhs.num.clone() * self.den.clone(),
            self.den * rhs.den,
        )
    }
}

impl Sub for RatFun {
    type Output = RatFun;
    fn sub(self, rhs: RatFun) -> RatFun {
        self + (-rhs)
    }
}

impl Neg for RatFun {
    type Output = RatFun;
    fn neg(self) -> RatFun {
        RatFun {
            num: -self.num,
            den: self.den,
        }
    }
}

impl Mul for RatFun {
    type Output = RatFun;
    fn mul(self, rhs: RatFun) -> RatFun {
        RatFun::reduced(self.num * rhs.num, self.den * rhs.den)
    }
}

impl Div for RatFun {
    type Output = RatFun;
    fn div(self, rhs: RatFun) -> RatFun {
        assert!(!rhs.num.is_zero(), "division by zero rational function");
        RatFun::reduced(self.num * rhs.den, self.den * rhs.num)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    fn p(coeffs: &[i64]) -> Poly {
        Poly::new(coeffs.iter().map(|&c| qi(c)).collect())
    }

    #[test]
    fn constant_detection() {
        // (2t+2)/(t+1) = 2
        let f = RatFun::new(p(&[2, 2]), p(&[1, 1])).unwrap();
        assert_eq!(f.constant_value().unwrap(), qi(2));
        // (t^2-1)/(t-1) = t+1, not constant
        let g = RatFun::new(p(&[-1, 0, 1]), p(&[-1, 1])).unwrap();
        assert!(matches!(
            g.constant_value(),
            Err(RatFunError::NotConstant { .. })
        ));
    }

    #[test]
    fn localization_style_sum() {
        // 1/t + 1/(-t) + t/t -> 1
        let t = RatFun::var();
        let s = t.clone().inverse().unwrap()
            + RatFun::new(Poly::one(), p(&[0, -1])).unwrap()
            + t.clone() / t;
        assert_eq!(s.constant_value().unwrap(), qi(1));
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dt (1/t) = -1/t^2
        let f = RatFun::var().inverse().unwrap();
        let df = f.derivative();
        assert_eq!(df, RatFun::new(p(&[-1]), p(&[0, 0, 1])).unwrap());
    }

    #[test]
    fn poly_divrem_gcd() {
        let a = p(&[-1, 0, 1]); // t^2 - 1
        let b = p(&[1, 1]); // t + 1
        let (q, r) = a.divrem(&b);
        assert_eq!(q, p(&[-1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&b), b);
    }
}
