//! Hypergeometric mirror series: the cohomology-valued I-function with
//! exact rational coefficients, the mirror map, the Galois monodromy
//! identity, the closed H-function form, and a numeric oscillatory-integral
//! check of the thimble / structure-sheaf correspondence in dimension one.

use crate::classes::{series_inverse, ClassCtx, OrbC};
use crate::cohomology::{dbar, MPoly, Mono, OrbifoldCohomology};
use crate::exact::bigc::{float_from_q, gamma_taylor, BigC};
use crate::exact::{frac, q_to_string, qi, qq, Q};
use crate::toric::{age_of_line_bundle, keff_enumerate, EffClass, ToricError};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rug::Float;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MirrorError {
    #[error("denominator factor not invertible (internal error)")]
    NonInvertibleDenominator,
    #[error("I-function asymptotics violated: {0}")]
    AsymptoticsViolated(String),
    #[error("homogeneity check failed at d = {0}")]
    HomogeneityViolated(String),
    #[error("no Box sector matches an effective class (internal error)")]
    SectorNotFound,
    #[error("oscillatory check requires a one-dimensional stack")]
    DimensionNotOne,
    #[error("quadrature did not converge")]
    QuadratureNotConverged,
    #[error(transparent)]
    Toric(#[from] ToricError),
}

/// One q^d coefficient of the I-function: a Laurent polynomial in z whose
/// coefficients are exact classes on the sector of d.
#[derive(Debug, Clone)]
pub struct ITerm {
    pub d: Vec<Q>,
    pub degree: Q,
    pub sector: usize,
    /// z-exponent -> coordinates in the sector ring.
    pub z_poly: BTreeMap<i64, Vec<Q>>,
}

/// Truncated I-function. The prefactor exp(sum_a pbar_a log q_a / z) is
/// kept symbolic; only the d-sum is stored.
#[derive(Debug, Clone)]
pub struct IFunctionSeries {
    pub bound: Q,
    pub terms: Vec<ITerm>,
}

fn sector_of(oc: &OrbifoldCohomology, eff: &EffClass) -> Result<usize, MirrorError> {
    let candidates: Vec<usize> = oc
        .sectors
        .iter()
        .filter(|s| s.pairings_frac == eff.sector_frac)
        .map(|s| s.id)
        .collect();
    match candidates.len() {
        1 => Ok(candidates[0]),
        0 => Err(MirrorError::SectorNotFound),
        _ => {
            // disambiguate by the torsion class in N
            let cls = oc.fan.n_class(&eff.d);
            candidates
                .into_iter()
                .find(|&v| oc.sectors[v].v_class.torsion == cls.torsion)
                .ok_or(MirrorError::SectorNotFound)
        }
    }
}

fn zpoly_mul_factor(
    oc: &OrbifoldCohomology,
    v: usize,
    poly: &BTreeMap<i64, Vec<Q>>,
    delta: &[Q],
    c: &Q,
) -> BTreeMap<i64, Vec<Q>> {
    // multiply by (delta + c z)
    let ring = &oc.rings[v];
    let mut out: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for (e, coords) in poly {
        let dpart = ring.cup_coords(delta, coords);
        add_into(&mut out, *e, &dpart);
        if !c.is_zero() {
            let zpart: Vec<Q> = coords.iter().map(|x| x * c).collect();
            add_into(&mut out, e + 1, &zpart);
        }
    }
    out
}

fn zpoly_div_factor(
    oc: &OrbifoldCohomology,
    v: usize,
    poly: &BTreeMap<i64, Vec<Q>>,
    delta: &[Q],
    c: &Q,
) -> Result<BTreeMap<i64, Vec<Q>>, MirrorError> {
    // multiply by (delta + c z)^{-1} = sum_{k>=0} (-1)^k delta^k / (c z)^{k+1}
    if c.is_zero() {
        return Err(MirrorError::NonInvertibleDenominator);
    }
    let ring = &oc.rings[v];
    let n_v = ring.n_v;
    let mut out: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
    for (e, coords) in poly {
        let mut pow = coords.clone();
        for k in 0..=n_v {
            let scale = if k % 2 == 0 { Q::one() } else { -Q::one() }
                / num_traits::pow::pow(c.clone(), k + 1);
            let scaled: Vec<Q> = pow.iter().map(|x| x * &scale).collect();
            add_into(&mut out, e - (k as i64) - 1, &scaled);
            if k < n_v {
                pow = ring.cup_coords(delta, &pow);
            }
        }
    }
    Ok(out)
}

fn add_into(map: &mut BTreeMap<i64, Vec<Q>>, e: i64, coords: &[Q]) {
    if coords.iter().all(|x| x.is_zero()) {
        return;
    }
    let entry = map
        .entry(e)
        .or_insert_with(|| vec![Q::zero(); coords.len()]);
    for (a, b) in entry.iter_mut().zip(coords) {
        *a += b;
    }
    if entry.iter().all(|x| x.is_zero()) {
        map.remove(&e);
    }
}

/// Integers nu with lo <= nu < hi.
fn int_range(lo: &Q, hi: &Q) -> Vec<i64> {
    let start = lo.ceil().to_integer().to_i64().expect("small range");
    let end = hi.ceil().to_integer().to_i64().expect("small range");
    (start..end).collect()
}

/// The truncated I-function over the exact backend.
pub fn i_function(oc: &OrbifoldCohomology, bound: &Q) -> Result<IFunctionSeries, MirrorError> {
    let effs = keff_enumerate(&oc.fan, &oc.frame, bound)?;
    let mut terms = Vec::new();
    for eff in &effs {
        let v = sector_of(oc, eff)?;
        let ring = &oc.rings[v];
        let mut poly: BTreeMap<i64, Vec<Q>> = BTreeMap::new();
        let mut unit = vec![Q::zero(); ring.dim()];
        unit[0] = Q::one();
        poly.insert(0, unit);
        for i in 0..oc.fan.data.m {
            let pairing = oc.fan.data.pair(i, &eff.d);
            let delta = ring.coords(&dbar(&oc.frame, ring.nvars, i));
            if pairing < Q::zero() {
                for nu in int_range(&pairing, &Q::zero()) {
                    let c = &pairing - qi(nu);
                    poly = zpoly_mul_factor(oc, v, &poly, &delta, &c);
                }
            } else if pairing > Q::zero() {
                for nu in int_range(&Q::zero(), &pairing) {
                    let c = &pairing - qi(nu);
                    poly = zpoly_div_factor(oc, v, &poly, &delta, &c)?;
                }
            }
        }
        // homogeneity: z-exponent + class degree = -<rho,d> - age(v)
        let rho_pair: Q = oc
            .frame
            .rho_hat
            .iter()
            .zip(&eff.d)
            .map(|(a, b)| a * b)
            .sum();
        let target = -rho_pair - oc.sectors[v].age.clone();
        for (e, coords) in &poly {
            for (t, x) in coords.iter().enumerate() {
                if !x.is_zero() && qi(*e) + qi(ring.degrees[t] as i64) != target {
                    return Err(MirrorError::HomogeneityViolated(format!("{:?}", eff.d)));
                }
            }
        }
        terms.push(ITerm {
            d: eff.d.clone(),
            degree: eff.degree.clone(),
            sector: v,
            z_poly: poly,
        });
    }
    Ok(IFunctionSeries {
        bound: bound.clone(),
        terms,
    })
}

/// The mirror map tau(q): the logarithmic part is always sum_a (log q_a)
/// pbar_a; `corrections` lists the z^{-1} coefficients of the nonzero
/// effective classes, each constrained to degree <= 2.
#[derive(Debug, Clone)]
pub struct MirrorMap {
    pub corrections: Vec<(Vec<Q>, usize, Vec<Q>)>,
}

pub fn mirror_map(
    oc: &OrbifoldCohomology,
    ifs: &IFunctionSeries,
) -> Result<MirrorMap, MirrorError> {
    let mut corrections = Vec::new();
    for term in &ifs.terms {
        let is_zero_class = term.d.iter().all(|x| x.is_zero());
        if is_zero_class {
            // the d = 0 coefficient must be exactly 1
            let ring = &oc.rings[term.sector];
            let mut unit = vec![Q::zero(); ring.dim()];
            unit[0] = Q::one();
            if term.z_poly.len() != 1 || term.z_poly.get(&0) != Some(&unit) {
                return Err(MirrorError::AsymptoticsViolated(
                    "d = 0 coefficient differs from 1".into(),
                ));
            }
            continue;
        }
        if let Some((max_e, _)) = term.z_poly.iter().next_back() {
            if *max_e >= 0 {
                return Err(MirrorError::AsymptoticsViolated(format!(
                    "z^{} appears at d = ({})",
                    max_e,
                    term.d
                        .iter()
                        .map(q_to_string)
                        .collect::<Vec<_>>()
                        .join(", ")
                )));
            }
        }
        if let Some(coords) = term.z_poly.get(&-1) {
            let ring = &oc.rings[term.sector];
            let age = &oc.sectors[term.sector].age;
            for (t, x) in coords.iter().enumerate() {
                if !x.is_zero() && qi(ring.degrees[t] as i64) + age.clone() > Q::one() {
                    return Err(MirrorError::AsymptoticsViolated(format!(
                        "z^-1 coefficient escapes degree 2 at d = ({})",
                        term.d
                            .iter()
                            .map(q_to_string)
                            .collect::<Vec<_>>()
                            .join(", ")
                    )));
                }
            }
            corrections.push((term.d.clone(), term.sector, coords.clone()));
        }
    }
    Ok(MirrorMap { corrections })
}

/// Exact check of the monodromy identity: the phase picked up by q^d must
/// match the Galois root-of-unity on the sector of d, for every term.
pub fn galois_monodromy_check(
    oc: &OrbifoldCohomology,
    xi: &[i64],
    ifs: &IFunctionSeries,
) -> (bool, Option<Vec<Q>>) {
    for term in &ifs.terms {
        let pairing: Q = xi
            .iter()
            .zip(&term.d)
            .map(|(&c, x)| qi(c) * x)
            .sum();
        let lhs = frac(&-pairing);
        let rhs = age_of_line_bundle(xi, &oc.sectors[term.sector]);
        if lhs != rhs {
            return (false, Some(term.d.clone()));
        }
    }
    (true, None)
}

/// 1/Gamma(a + x) as a truncated series in the nilpotent x, valid for any
/// rational a (poles of Gamma give vanishing leading coefficients).
pub fn recip_gamma_series(a: &Q, order: usize, prec: u32) -> Vec<BigC> {
    if a.is_positive() {
        let g: Vec<BigC> = gamma_taylor(a, order, prec)
            .into_iter()
            .map(BigC::from_re)
            .collect();
        series_inverse(&g, prec)
    } else {
        // 1/Gamma(a + x) = (a + x) / Gamma(a + 1 + x)
        let rec = recip_gamma_series(&(a.clone() + Q::one()), order, prec);
        let mut out = vec![BigC::zero_p(prec); order + 1];
        for (k, x) in rec.iter().enumerate() {
            out[k] = out[k].clone() + x.clone() * BigC::from_q(a, prec);
            if k + 1 <= order {
                out[k + 1] = out[k + 1].clone() + x.clone();
            }
        }
        out
    }
}

fn log_z_branch(z: &Q, prec: u32) -> BigC {
    // branch Im log z = pi for negative real z
    assert!(z.is_negative(), "the oscillatory branch expects z < 0");
    let ln = float_from_q(&-z.clone(), prec).ln();
    BigC::new(ln, BigC::pi(prec))
}

fn nilpotent_class_from_series(
    ctx: &ClassCtx,
    v: usize,
    coeffs: &[BigC],
    delta: &[BigC],
) -> Vec<BigC> {
    let ring = &ctx.oc.rings[v];
    let mut cls = vec![BigC::zero_p(ctx.prec); ring.dim()];
    let mut pow = vec![BigC::zero_p(ctx.prec); ring.dim()];
    pow[0] = BigC::one_p(ctx.prec);
    for (k, ck) in coeffs.iter().enumerate().take(ring.n_v + 1) {
        if k > 0 {
            pow = ctx.cup_v(v, delta, &pow);
        }
        for (t, p) in pow.iter().enumerate() {
            cls[t] = cls[t].clone() + p.clone() * ck.clone();
        }
    }
    cls
}

/// Closed form of the H-function at numeric (q, z), z < 0, q_a > 0.
pub fn h_closed(
    ctx: &ClassCtx,
    ifs: &IFunctionSeries,
    q: &[Q],
    z: &Q,
) -> Result<OrbC, MirrorError> {
    let oc = ctx.oc;
    let prec = ctx.prec;
    let n = oc.fan.n;
    let log_z = log_z_branch(z, prec);
    let two_pi_i = BigC::i(prec).scale_f(&(BigC::pi(prec) * 2u32));
    let log_q: Vec<BigC> = q
        .iter()
        .map(|qa| {
            assert!(qa.is_positive(), "q must be positive real");
            BigC::from_re(float_from_q(qa, prec).ln())
        })
        .collect();
    // log x_a = log q_a - rho_a log z
    let log_x: Vec<BigC> = (0..oc.fan.data.r)
        .map(|a| {
            log_q[a].clone()
                - log_z.clone() * BigC::from_q(&oc.frame.rho_coords[a], prec)
        })
        .collect();
    let mut out = ctx.zero_class();
    for term in &ifs.terms {
        let w = oc.sectors[term.sector].inv;
        let ring = &oc.rings[w];
        // scalar prod_a x_a^{<p_a, d>}
        let mut expo = BigC::zero_p(prec);
        for (a, lx) in log_x.iter().enumerate() {
            let pd: Q = oc.frame.p[a]
                .iter()
                .zip(&term.d)
                .map(|(&c, x)| qi(c) * x)
                .sum();
            expo = expo + lx.clone() * BigC::from_q(&pd, prec);
        }
        let scalar = expo.exp();
        // class exponent sum_a (log x_a / 2 pi i) pbar_a restricted to w
        let mut base = vec![BigC::zero_p(prec); ring.dim()];
        base[0] = scalar;
        let mut exp_class = vec![BigC::zero_p(prec); ring.dim()];
        for a in 0..oc.fan.data.r {
            let mut p = MPoly::zero(ring.nvars);
            p.insert(Mono::var(ring.nvars, a), Q::one());
            let coords = ring.coords(&p);
            let coeff = log_x[a].clone() / two_pi_i.clone();
            for (t, c) in coords.iter().enumerate() {
                exp_class[t] =
                    exp_class[t].clone() + BigC::from_q(c, prec) * coeff.clone();
            }
        }
        let mut cls = ctx.cup_exp_v(w, &exp_class, &base);
        // reciprocal Gamma factors
        for i in 0..oc.fan.data.m {
            let pairing = oc.fan.data.pair(i, &term.d);
            let coeffs = recip_gamma_series(&(Q::one() + pairing), ring.n_v, prec);
            // substitute x -> Dbar_i / (2 pi i)
            let delta: Vec<BigC> = ring
                .coords(&dbar(&oc.frame, ring.nvars, i))
                .iter()
                .map(|q2| BigC::from_q(q2, prec) / two_pi_i.clone())
                .collect();
            let factor = nilpotent_class_from_series(ctx, w, &coeffs, &delta);
            cls = ctx.cup_v(w, &factor, &cls);
        }
        for (t, x) in cls.iter().enumerate() {
            out[w][t] = out[w][t].clone() + x.clone();
        }
    }
    // prefix (2 pi)^{n/2} z^{-n/2}
    let pref = ((BigC::pi(prec) * 2u32).ln() * Float::with_val(prec, n) / 2u32).exp();
    let zpow = (-(log_z * BigC::from_q(&qq(n as i64, 2), prec))).exp();
    Ok(ctx.scale_class(&out, &(zpow.scale_f(&pref))))
}

/// H-function computed the long way: numeric I, then z^mu, z^{-rho},
/// Gamma-class inverse, degree rescaling and inv*.
pub fn h_from_i(
    ctx: &ClassCtx,
    ifs: &IFunctionSeries,
    q: &[Q],
    z: &Q,
) -> Result<OrbC, MirrorError> {
    let oc = ctx.oc;
    let prec = ctx.prec;
    let n = oc.fan.n;
    let log_z = log_z_branch(z, prec);
    let z_num = log_z.clone().exp();
    let two_pi_i = BigC::i(prec).scale_f(&(BigC::pi(prec) * 2u32));
    let log_q: Vec<BigC> = q
        .iter()
        .map(|qa| BigC::from_re(float_from_q(qa, prec).ln()))
        .collect();
    // numeric I-function (including the symbolic prefactor)
    let mut i_val = ctx.zero_class();
    for term in &ifs.terms {
        let v = term.sector;
        let mut qd = BigC::zero_p(prec);
        for (a, lq) in log_q.iter().enumerate() {
            let pd: Q = oc.frame.p[a]
                .iter()
                .zip(&term.d)
                .map(|(&c, x)| qi(c) * x)
                .sum();
            qd = qd + lq.clone() * BigC::from_q(&pd, prec);
        }
        let qd = qd.exp();
        for (e, coords) in &term.z_poly {
            let zp = (log_z.clone() * BigC::from_i64(*e, prec)).exp();
            for (t, x) in coords.iter().enumerate() {
                i_val[v][t] = i_val[v][t].clone()
                    + BigC::from_q(x, prec) * zp.clone() * qd.clone();
            }
        }
    }
    // prefactor exp(sum_a pbar_a log q_a / z)
    for v in 0..i_val.len() {
        let ring = &oc.rings[v];
        let mut cls = vec![BigC::zero_p(prec); ring.dim()];
        for a in 0..oc.fan.data.r {
            let mut p = MPoly::zero(ring.nvars);
            p.insert(Mono::var(ring.nvars, a), Q::one());
            let coords = ring.coords(&p);
            let coeff = log_q[a].clone() / z_num.clone();
            for (t, c) in coords.iter().enumerate() {
                cls[t] = cls[t].clone() + BigC::from_q(c, prec) * coeff.clone();
            }
        }
        i_val[v] = ctx.cup_exp_v(v, &cls, &i_val[v]);
    }
    // z^mu with mu = deg + age - n/2
    for v in 0..i_val.len() {
        let ring = &oc.rings[v];
        let age = &oc.sectors[v].age;
        for (t, x) in i_val[v].iter_mut().enumerate() {
            let mu = qi(ring.degrees[t] as i64) + age.clone() - qq(n as i64, 2);
            *x = x.clone() * (log_z.clone() * BigC::from_q(&mu, prec)).exp();
        }
    }
    // z^{-rho}
    for v in 0..i_val.len() {
        let ring = &oc.rings[v];
        let mut p = MPoly::zero(ring.nvars);
        for (a, c) in oc.frame.rho_coords.iter().enumerate() {
            p.insert(Mono::var(ring.nvars, a), c.clone());
        }
        let rho: Vec<BigC> = ring
            .coords(&p)
            .iter()
            .map(|q2| -(BigC::from_q(q2, prec) * log_z.clone()))
            .collect();
        i_val[v] = ctx.cup_exp_v(v, &rho, &i_val[v]);
    }
    // Gamma-class inverse
    let gamma = ctx.gamma_hat();
    for v in 0..i_val.len() {
        let ginv = class_inverse(ctx, v, &gamma[v]);
        i_val[v] = ctx.cup_v(v, &ginv, &i_val[v]);
    }
    // (2 pi i)^{-deg/2}
    for v in 0..i_val.len() {
        let ring = &oc.rings[v];
        for (t, x) in i_val[v].iter_mut().enumerate() {
            *x = x.clone() * two_pi_i.powi(-(ring.degrees[t] as i64));
        }
    }
    let mut out = ctx.inv_star(&i_val);
    let pref = ((BigC::pi(prec) * 2u32).ln() * Float::with_val(prec, n) / 2u32).exp();
    out = ctx.scale_class(&out, &BigC::from_re(pref));
    Ok(out)
}

/// Inverse of a class with invertible degree-0 part, via the nilpotent
/// geometric series.
pub fn class_inverse(ctx: &ClassCtx, v: usize, u: &[BigC]) -> Vec<BigC> {
    let ring = &ctx.oc.rings[v];
    let c0 = u[0].clone();
    let c0_inv = c0.inv();
    // u = c0 (1 + nu)
    let mut nu: Vec<BigC> = u.iter().map(|x| x.clone() * c0_inv.clone()).collect();
    nu[0] = BigC::zero_p(ctx.prec);
    let mut out = vec![BigC::zero_p(ctx.prec); ring.dim()];
    out[0] = BigC::one_p(ctx.prec);
    let mut pow = out.clone();
    for k in 1..=ring.n_v {
        pow = ctx.cup_v(v, &nu, &pow);
        let sign = if k % 2 == 0 {
            BigC::one_p(ctx.prec)
        } else {
            -BigC::one_p(ctx.prec)
        };
        for (o, p) in out.iter_mut().zip(&pow) {
            *o = o.clone() + p.clone() * sign.clone();
        }
    }
    out.into_iter().map(|x| x * c0_inv.clone()).collect()
}

/// Worst coordinate difference between the two H-function assemblies.
pub fn h_consistency_residual(
    ctx: &ClassCtx,
    ifs: &IFunctionSeries,
    q: &[Q],
    z: &Q,
) -> Result<Float, MirrorError> {
    let a = h_closed(ctx, ifs, q, z)?;
    let b = h_from_i(ctx, ifs, q, z)?;
    Ok(ctx.class_residual(&a, &b))
}

/// Result of the oscillatory-integral comparison.
#[derive(Debug, Clone)]
pub struct OscReport {
    pub lhs: Float,
    pub rhs: BigC,
    pub residual: Float,
}

/// Quadrature of (-2 pi z)^{-1/2} int_0^inf e^{W_q(y)/z} dy/y over the
/// positive-real thimble in log coordinates, for n = 1.
pub fn thimble_integral_1d(
    ctx: &ClassCtx,
    q: &Q,
    z: &Q,
    use_alt_splitting: bool,
) -> Result<Float, MirrorError> {
    let oc = ctx.oc;
    let prec = ctx.prec;
    if oc.fan.n != 1 {
        return Err(MirrorError::DimensionNotOne);
    }
    assert!(q.is_positive() && z.is_negative());
    let ell = if use_alt_splitting {
        &oc.frame.ell_alt
    } else {
        &oc.frame.ell
    };
    // W(e^u) = sum_i q^{ell_i} e^{b_i u}
    let coeffs: Vec<Float> = (0..oc.fan.data.m)
        .map(|i| {
            (float_from_q(q, prec).ln() * float_from_q(&ell[i][0], prec)).exp()
        })
        .collect();
    let bs: Vec<i64> = oc.fan.b.iter().map(|b| b.free[0]).collect();
    let zf = float_from_q(z, prec);
    let w_over_z = |u: &Float| -> Float {
        let mut w = Float::new(prec);
        for (c, &b) in coeffs.iter().zip(&bs) {
            w += c.clone() * (u.clone() * b).exp();
        }
        w / zf.clone()
    };
    // find a cutoff where the integrand is negligible
    let threshold = Float::with_val(prec, (prec as f64) * 0.7 + 64.0);
    let mut u_max = Float::with_val(prec, 4);
    while -w_over_z(&u_max) < threshold || -w_over_z(&(-u_max.clone())) < threshold {
        u_max *= 2u32;
        if u_max > 4096u32 {
            return Err(MirrorError::QuadratureNotConverged);
        }
    }
    // trapezoid with step halving (integrand decays doubly exponentially)
    let target = Float::with_val(prec, 1) >> 96;
    let mut h = Float::with_val(prec, 1) / 4u32;
    let mut prev: Option<Float> = None;
    for _ in 0..24 {
        let steps = (u_max.clone() / h.clone())
            .to_f64()
            .ceil() as i64;
        let mut sum = w_over_z(&Float::new(prec)).exp();
        for k in 1..=steps {
            let u = h.clone() * Float::with_val(prec, k);
            sum += w_over_z(&u).exp();
            sum += w_over_z(&(-u)).exp();
        }
        let integral = sum * h.clone();
        if let Some(p) = prev {
            if (integral.clone() - p).abs() < target {
                let norm = (-(zf.clone()) * 2u32 * BigC::pi(prec)).sqrt().recip();
                return Ok(integral * norm);
            }
        }
        prev = Some(integral);
        h /= 2u32;
    }
    Err(MirrorError::QuadratureNotConverged)
}

/// Compare the thimble integral with int_{IX} H(q,z) Td.
pub fn oscillatory_check_1d(
    ctx: &ClassCtx,
    ifs: &IFunctionSeries,
    q: &Q,
    z: &Q,
) -> Result<OscReport, MirrorError> {
    if ctx.oc.fan.n != 1 {
        return Err(MirrorError::DimensionNotOne);
    }
    let lhs = thimble_integral_1d(ctx, q, z, false)?;
    let h = h_closed(ctx, ifs, &[q.clone()], z)?;
    let rhs = ctx.integrate(&ctx.cup(&h, &ctx.todd()));
    let residual = (rhs.clone() - BigC::from_re(lhs.clone())).abs();
    Ok(OscReport { lhs, rhs, residual })
}
