//! Arbitrary-precision complex scalar backend (MPFR/MPC via `rug`), plus the
//! special-function values needed by the characteristic-class machinery:
//! Gamma at positive rationals, digamma, Hurwitz zeta at integer arguments,
//! and Taylor expansions of Gamma(a + x) around rational a > 0.

use super::{bernoulli, Q};
use num_traits::{One, Signed, Zero};
use rug::float::Constant;
use rug::ops::{CompleteRound, Pow};
use rug::{Complex, Float};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub const DEFAULT_PREC: u32 = 256;
const MIN_PREC: u32 = 64;

#[derive(Debug, Clone)]
pub struct BigC(pub Complex);

fn join_prec(a: &BigC, b: &BigC) -> u32 {
    a.0.prec().0.max(b.0.prec().0)
}

pub fn float_from_q(x: &Q, prec: u32) -> Float {
    let r = rug::Rational::from_str_radix(&format!("{}/{}", x.numer(), x.denom()), 10)
        .expect("rational conversion");
    Float::with_val(prec, r)
}

impl BigC {
    pub fn new(re: Float, im: Float) -> Self {
        let prec = re.prec().max(im.prec());
        BigC(Complex::with_val(prec, (re, im)))
    }

    pub fn from_q(x: &Q, prec: u32) -> Self {
        BigC(Complex::with_val(prec, float_from_q(x, prec)))
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        BigC(Complex::with_val(prec, x))
    }

    pub fn from_i64(x: i64, prec: u32) -> Self {
        BigC(Complex::with_val(prec, x))
    }

    pub fn zero_p(prec: u32) -> Self {
        BigC(Complex::with_val(prec.max(MIN_PREC), 0))
    }

    pub fn one_p(prec: u32) -> Self {
        BigC(Complex::with_val(prec.max(MIN_PREC), 1))
    }

    pub fn i(prec: u32) -> Self {
        BigC(Complex::with_val(prec, (0, 1)))
    }

    pub fn pi(prec: u32) -> Float {
        Float::with_val(prec, Constant::Pi)
    }

    pub fn euler_gamma(prec: u32) -> Float {
        Float::with_val(prec, Constant::Euler)
    }

    pub fn prec(&self) -> u32 {
        self.0.prec().0
    }

    pub fn re(&self) -> &Float {
        self.0.real()
    }

    pub fn im(&self) -> &Float {
        self.0.imag()
    }

    pub fn conj(&self) -> Self {
        BigC(self.0.clone().conj())
    }

    pub fn abs(&self) -> Float {
        self.0.clone().abs().into_real_imag().0
    }

    pub fn exp(&self) -> Self {
        BigC(self.0.clone().exp())
    }

    pub fn ln(&self) -> Self {
        BigC(self.0.clone().ln())
    }

    pub fn sqrt(&self) -> Self {
        BigC(self.0.clone().sqrt())
    }

    pub fn powi(&self, k: i64) -> Self {
        if k == 0 {
            return BigC::one_p(self.prec());
        }
        let base = if k > 0 { self.clone() } else { self.inv() };
        let mut acc = BigC::one_p(self.prec());
        for _ in 0..k.unsigned_abs() {
            acc = acc * base.clone();
        }
        acc
    }

    pub fn inv(&self) -> Self {
        BigC(Complex::with_val(self.prec(), self.0.clone().recip()))
    }

    pub fn scale_f(&self, f: &Float) -> Self {
        BigC((&self.0 * f).complete((self.prec().max(f.prec()), self.prec().max(f.prec()))))
    }

    pub fn from_re(f: Float) -> Self {
        let prec = f.prec();
        BigC(Complex::with_val(prec, f))
    }

    /// e^{2 pi i f} for rational f, computed from exact 2*pi*f.
    pub fn exp_2pi_i_q(f: &Q, prec: u32) -> Self {
        let t: Float = Self::pi(prec) * 2u32 * float_from_q(f, prec);
        let (s, c) = t.sin_cos(Float::new(prec));
        BigC::new(c, s)
    }

    /// z^e with an explicitly supplied branch of log z (exact for the
    /// spec'd branch conventions, e.g. Im log z = pi).
    pub fn pow_with_log(log_z: &BigC, e: &Q, prec: u32) -> Self {
        let exp = BigC::from_q(e, prec) * log_z.clone();
        exp.exp()
    }

    pub fn is_zero_c(&self) -> bool {
        self.0.real().is_zero() && self.0.imag().is_zero()
    }
}

impl PartialEq for BigC {
    fn eq(&self, other: &Self) -> bool {
        self.0.real() == other.0.real() && self.0.imag() == other.0.imag()
    }
}

impl Add for BigC {
    type Output = BigC;
    fn add(self, rhs: BigC) -> BigC {
        let p = join_prec(&self, &rhs);
        BigC((&self.0 + &rhs.0).complete((p, p)))
    }
}

impl Sub for BigC {
    type Output = BigC;
    fn sub(self, rhs: BigC) -> BigC {
        let p = join_prec(&self, &rhs);
        BigC((&self.0 - &rhs.0).complete((p, p)))
    }
}

impl Mul for BigC {
    type Output = BigC;
    fn mul(self, rhs: BigC) -> BigC {
        let p = join_prec(&self, &rhs);
        BigC((&self.0 * &rhs.0).complete((p, p)))
    }
}

impl Div for BigC {
    type Output = BigC;
    fn div(self, rhs: BigC) -> BigC {
        let p = join_prec(&self, &rhs);
        BigC((&self.0 / &rhs.0).complete((p, p)))
    }
}

impl Neg for BigC {
    type Output = BigC;
    fn neg(self) -> BigC {
        BigC(-self.0)
    }
}

impl Zero for BigC {
    fn zero() -> Self {
        BigC::zero_p(MIN_PREC)
    }
    fn is_zero(&self) -> bool {
        self.is_zero_c()
    }
}

impl One for BigC {
    fn one() -> Self {
        BigC::one_p(MIN_PREC)
    }
}

/// Default comparison tolerance 2^{-prec/2}.
pub fn tol(prec: u32) -> Float {
    Float::with_val(prec, 1) >> (prec / 2)
}

pub fn float_tiny(prec: u32, bits: u32) -> Float {
    Float::with_val(prec, 1) >> bits
}

/// Gamma(a) for rational a > 0.
pub fn gamma_q(a: &Q, prec: u32) -> Float {
    assert!(a.is_positive(), "gamma_q requires a > 0, got {a}");
    float_from_q(a, prec).gamma()
}

/// digamma(a) for rational a > 0.
pub fn digamma_q(a: &Q, prec: u32) -> Float {
    assert!(a.is_positive(), "digamma_q requires a > 0");
    float_from_q(a, prec).digamma()
}

/// Hurwitz zeta(k, a) = sum_{j>=0} (a+j)^{-k} for integer k >= 2, rational
/// a > 0, by Euler-Maclaurin with exact Bernoulli numbers. The truncation
/// point doubles until the correction tail is below the target accuracy.
pub fn hurwitz_zeta(k: u32, a: &Q, prec: u32) -> Float {
    assert!(k >= 2, "hurwitz_zeta needs k >= 2");
    assert!(a.is_positive(), "hurwitz_zeta needs a > 0");
    let wp = prec + 48;
    let target = Float::with_val(wp, 1) >> (prec + 16);
    let af = float_from_q(a, wp);
    let mut n: u32 = 32.max(prec / 4);
    loop {
        // direct part
        let mut sum = Float::new(wp);
        for j in 0..n {
            let base = af.clone() + j;
            sum += base.pow(-(k as i64));
        }
        let an = af.clone() + n;
        // integral + half terms
        sum += an.clone().pow(-((k as i64) - 1)) / (k - 1);
        sum += an.clone().pow(-(k as i64)) / 2u32;
        // Euler-Maclaurin corrections
        let mut rising = Float::with_val(wp, k); // (k)(k+1)...(k+2r-2), starts at r=1 term: k
        let mut ok = false;
        let mut corr = Float::new(wp);
        for r in 1..=96u32 {
            let b2r = bernoulli(2 * r as usize);
            let mut fact = Float::with_val(wp, 1);
            for t in 1..=(2 * r) {
                fact *= t;
            }
            let term = float_from_q(&b2r, wp) / fact
                * rising.clone()
                * an.clone().pow(-((k + 2 * r) as i64 - 1));
            let term_abs = term.clone().abs();
            corr += term;
            if term_abs < target {
                ok = true;
                break;
            }
            // extend rising factorial by the next two factors
            rising *= (k + 2 * r - 1) * (k + 2 * r);
        }
        if ok {
            let mut out = sum + corr;
            out.set_prec(prec);
            return out;
        }
        n *= 2;
    }
}

/// Taylor coefficients g_0..g_order of Gamma(a + x) around rational a > 0:
/// Gamma(a + x) = sum_j g_j x^j, exact nilpotent-argument expansion driver.
pub fn gamma_taylor(a: &Q, order: usize, prec: u32) -> Vec<Float> {
    let wp = prec + 32;
    // log Gamma(a + x) - log Gamma(a) = psi(a) x + sum_{j>=2} (-1)^j zeta(j,a)/j x^j
    let mut logc: Vec<Float> = Vec::with_capacity(order + 1);
    logc.push(Float::new(wp));
    if order >= 1 {
        logc.push(digamma_q(a, wp));
    }
    for j in 2..=order {
        let z = hurwitz_zeta(j as u32, a, wp);
        let mut c = z / (j as u32);
        if j % 2 == 1 {
            c = -c;
        }
        logc.push(c);
    }
    // exponentiate the series: E' = L' E
    let mut e: Vec<Float> = vec![Float::new(wp); order + 1];
    e[0] = Float::with_val(wp, 1);
    for jj in 1..=order {
        let mut acc = Float::new(wp);
        for t in 1..=jj {
            acc += logc[t].clone() * (t as u32) * e[jj - t].clone();
        }
        e[jj] = acc / (jj as u32);
    }
    let g = gamma_q(a, wp);
    e.into_iter()
        .map(|c| {
            let mut x = c * g.clone();
            x.set_prec(prec);
            x
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{qi, qq};

    #[test]
    fn reflection_formula_random_points() {
        let prec = 192;
        let pi = BigC::pi(prec);
        let mut state = 0xABCDu64;
        for _ in 0..20 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let num = (state >> 33) % 997 + 1;
            let x = qq(num as i64, 998); // in (0,1)
            let lhs = gamma_q(&x, prec) * gamma_q(&(qi(1) - &x), prec);
            let rhs = pi.clone() / (pi.clone() * float_from_q(&x, prec)).sin();
            let err = (lhs - rhs).abs();
            assert!(err < tol(prec - 32), "reflection failed at {x}: {err}");
        }
    }

    #[test]
    fn hurwitz_matches_mpfr_zeta() {
        // zeta(3, 1) = zeta(3)
        let prec = 256;
        let h = hurwitz_zeta(3, &qi(1), prec);
        let z = Float::with_val(prec, 3).zeta();
        assert!((h - z).abs() < tol(prec));
        // zeta(2, 1/2) = pi^2/2
        let h2 = hurwitz_zeta(2, &qq(1, 2), prec);
        let target = BigC::pi(prec).square() / 2u32;
        assert!((h2 - target).abs() < tol(prec));
    }

    #[test]
    fn gamma_taylor_at_one() {
        // Gamma(1+x) = 1 - gamma x + (gamma^2/2 + pi^2/12) x^2 - ...
        let prec = 256;
        let g = gamma_taylor(&qi(1), 2, prec);
        let egamma = BigC::euler_gamma(prec);
        assert!((g[0].clone() - 1u32).abs() < tol(prec));
        assert!((g[1].clone() + egamma.clone()).abs() < tol(prec));
        let expect = egamma.clone().square() / 2u32 + BigC::pi(prec).square() / 12u32;
        assert!((g[2].clone() - expect).abs() < tol(prec));
    }

    #[test]
    fn phases_and_powers() {
        let prec = 128;
        let half = qq(1, 2);
        let w = BigC::exp_2pi_i_q(&half, prec); // e^{pi i} = -1
        assert!((w.re().clone() + 1u32).abs() < tol(prec));
        assert!(w.im().clone().abs() < tol(prec));
        let i = BigC::i(prec);
        let m1 = i.powi(2);
        assert!((m1.re().clone() + 1u32).abs() < tol(prec));
    }
}
