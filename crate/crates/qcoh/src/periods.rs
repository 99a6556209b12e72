//! Integral periods in the conformal limit: the weight filtration on the
//! lattice, classified lattice vectors from K-classes, affine period
//! formulas, and point classes of (possibly stacky) torus-fixed points via
//! orbifold Riemann-Roch.

use crate::classes::{ClassCtx, KClass, OrbC};
use crate::exact::bigc::{gamma_q, tol, BigC};
use crate::exact::{frac, matq, qi, Q};
use crate::exact::snf::{snf, zmat_from_i64};
use crate::toric::FanStructure;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rug::Float;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PeriodError {
    #[error("vector is not in the required filtration level")]
    NotInFiltrationLevel,
    #[error("invalid character: {0}")]
    CharacterInvalid(String),
}

/// A lattice vector Psi(V) with its position in the filtrations.
#[derive(Debug, Clone)]
pub struct LatticeVector {
    pub vector: OrbC,
    /// In the rank-one sublattice piece: annihilated by cup with rho.
    pub in_vz1: bool,
    /// Annihilated by cup with every degree-2 class of the untwisted sector.
    pub in_ker_h2: bool,
    /// Smallest k with the vector in W_k (bottom is -n for the zero vector).
    pub filtration: i64,
}

/// Affine period of a lattice vector A in W_{-n+2}: constant term
/// a0^{-1}(A,1), linear coefficients in the twisted coordinates, and the
/// curve class [C] paired against the nef basis.
#[derive(Debug, Clone)]
pub struct PeriodForm {
    pub const_term: BigC,
    /// Small-denominator rational reconstruction of the constant term.
    pub const_rational: Option<Q>,
    /// (sector, coefficient of the H^0(X_v) coordinate of tau).
    pub twisted_linear: Vec<(usize, BigC)>,
    /// [C] cap p_a for each nef basis element.
    pub curve_class: Vec<BigC>,
}

/// Index of the untwisted sector.
pub fn untwisted_sector(ctx: &ClassCtx) -> usize {
    ctx.oc
        .sectors
        .iter()
        .position(|s| s.d_rep.iter().all(|x| x.is_zero()))
        .expect("untwisted sector present")
}

/// Unit of orbifold cohomology (1 on the untwisted sector only).
fn orb_unit(ctx: &ClassCtx) -> OrbC {
    let mut u = ctx.zero_class();
    u[untwisted_sector(ctx)][0] = BigC::one_p(ctx.prec);
    u
}

/// (2 pi i)^n / (2 pi)^{n/2}.
pub fn a0_scalar(ctx: &ClassCtx) -> BigC {
    let prec = ctx.prec;
    let n = ctx.oc.fan.n as i64;
    let two_pi_i = BigC::i(prec).scale_f(&(BigC::pi(prec) * 2u32));
    let half_pow = ((BigC::pi(prec) * 2u32).ln() * Float::with_val(prec, n) / 2u32).exp();
    two_pi_i.powi(n) * BigC::from_re(half_pow).inv()
}

/// A0 = a0 [pt] on the untwisted sector, the image of the structure sheaf
/// of a non-stacky point.
pub fn a0_vector(ctx: &ClassCtx) -> OrbC {
    let v0 = untwisted_sector(ctx);
    let mut a = ctx.zero_class();
    a[v0] = point_of_sector(ctx, v0);
    ctx.scale_class(&a, &a0_scalar(ctx))
}

/// Coordinates of [pt] on sector v (top class normalized to integral 1).
fn point_of_sector(ctx: &ClassCtx, v: usize) -> Vec<BigC> {
    let ring = &ctx.oc.rings[v];
    let tops: Vec<usize> = (0..ring.dim())
        .filter(|&t| ring.degrees[t] as usize == ring.n_v)
        .collect();
    assert_eq!(tops.len(), 1, "top cohomology of a sector is one-dimensional");
    let t = tops[0];
    let mut out = vec![BigC::zero_p(ctx.prec); ring.dim()];
    out[t] = BigC::from_q(&(Q::one() / ring.integrals[t].clone()), ctx.prec);
    out
}

/// Smallest k with a in W_k = (+)_v H^{>= n_v - k}(X_v); -n for zero.
pub fn filtration_level(ctx: &ClassCtx, a: &OrbC) -> i64 {
    let tol = tol(ctx.prec);
    let mut level = -(ctx.oc.fan.n as i64);
    for (v, ring) in ctx.oc.rings.iter().enumerate() {
        for (t, x) in a[v].iter().enumerate() {
            if x.abs() > tol {
                level = level.max(ring.n_v as i64 - 2 * ring.degrees[t] as i64);
            }
        }
    }
    level
}

/// Cumulative weight filtration: distinct levels k with the basis elements
/// (sector, index) lying in W_k.
pub fn weight_filtration(ctx: &ClassCtx) -> Vec<(i64, Vec<(usize, usize)>)> {
    let mut levels: Vec<i64> = Vec::new();
    let mut elems: Vec<(i64, usize, usize)> = Vec::new();
    for (v, ring) in ctx.oc.rings.iter().enumerate() {
        for t in 0..ring.dim() {
            let k = ring.n_v as i64 - 2 * ring.degrees[t] as i64;
            elems.push((k, v, t));
            if !levels.contains(&k) {
                levels.push(k);
            }
        }
    }
    levels.sort_unstable();
    levels
        .into_iter()
        .map(|k| {
            let members = elems
                .iter()
                .filter(|(l, _, _)| *l <= k)
                .map(|&(_, v, t)| (v, t))
                .collect();
            (k, members)
        })
        .collect()
}

fn cup_rho(ctx: &ClassCtx, a: &OrbC) -> OrbC {
    (0..a.len())
        .map(|v| ctx.cup_v(v, &ctx.rho_class_v(v), &a[v]))
        .collect()
}

fn max_abs(ctx: &ClassCtx, a: &OrbC) -> Float {
    let mut m = Float::new(ctx.prec);
    for av in a {
        for x in av {
            if x.abs() > m {
                m = x.abs();
            }
        }
    }
    m
}

/// Classify Psi(V) for each K-class.
pub fn lattice_vectors(ctx: &ClassCtx, bundles: &[KClass]) -> Vec<LatticeVector> {
    let tol = tol(ctx.prec);
    bundles
        .iter()
        .map(|k| {
            let vector = ctx.psi(k);
            let in_vz1 = max_abs(ctx, &cup_rho(ctx, &vector)) < tol;
            let mut in_ker_h2 = true;
            for a in 0..ctx.oc.fan.data.r {
                let xi: Vec<i64> = ctx.oc.frame.p[a].clone();
                let cupped: OrbC = (0..vector.len())
                    .map(|v| {
                        let pa: Vec<BigC> = ctx
                            .xi_class_v(v, &xi)
                            .iter()
                            .map(|q2| BigC::from_q(q2, ctx.prec))
                            .collect();
                        ctx.cup_v(v, &pa, &vector[v])
                    })
                    .collect();
                if max_abs(ctx, &cupped) >= tol {
                    in_ker_h2 = false;
                    break;
                }
            }
            let filtration = filtration_level(ctx, &vector);
            LatticeVector {
                vector,
                in_vz1,
                in_ker_h2,
                filtration,
            }
        })
        .collect()
}

/// Continued-fraction reconstruction of a real value as a small rational.
pub fn rational_reconstruct(x: &BigC, _prec: u32) -> Option<Q> {
    let tol = 1e-9;
    if x.im().to_f64().abs() > tol {
        return None;
    }
    let target = x.re().to_f64();
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, target.round() as i64, 1i64);
    let mut rem = target - target.round();
    for _ in 0..24 {
        if (p1 as f64 / q1 as f64 - target).abs() < tol && q1.abs() <= 1_000_000 {
            return Some(Q::new(p1.into(), q1.into()));
        }
        if rem.abs() < 1e-15 {
            break;
        }
        let inv = 1.0 / rem;
        let a = inv.floor() as i64;
        rem = inv - inv.floor();
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if q1 > 1_000_000 {
            break;
        }
    }
    None
}

/// [C] cap xi for the curve class of A: 2 pi i a0^{-1} int_X (xi-bar cup A).
pub fn curve_pairing(ctx: &ClassCtx, a: &OrbC, xi: &[i64]) -> BigC {
    let v0 = untwisted_sector(ctx);
    let ring = &ctx.oc.rings[v0];
    let xi_cls: Vec<BigC> = ctx
        .xi_class_v(v0, xi)
        .iter()
        .map(|q2| BigC::from_q(q2, ctx.prec))
        .collect();
    let cup = ctx.cup_v(v0, &xi_cls, &a[v0]);
    let mut int = BigC::zero_p(ctx.prec);
    for (x, w) in cup.iter().zip(&ring.integrals) {
        int = int + x.clone() * BigC::from_q(w, ctx.prec);
    }
    let two_pi_i = BigC::i(ctx.prec).scale_f(&(BigC::pi(ctx.prec) * 2u32));
    two_pi_i * a0_scalar(ctx).inv() * int
}

/// The affine period of a lattice vector A in W_{-n+2}.
pub fn period_form(ctx: &ClassCtx, a: &OrbC) -> Result<PeriodForm, PeriodError> {
    let n = ctx.oc.fan.n as i64;
    if filtration_level(ctx, a) > -n + 2 {
        return Err(PeriodError::NotInFiltrationLevel);
    }
    let a0inv = a0_scalar(ctx).inv();
    let const_term = a0inv.clone() * ctx.pairing_orb(a, &orb_unit(ctx));
    let const_rational = rational_reconstruct(&const_term, ctx.prec);
    let v0 = untwisted_sector(ctx);
    let mut twisted_linear = Vec::new();
    for (v, sector) in ctx.oc.sectors.iter().enumerate() {
        if v == v0 || sector.age > Q::one() {
            continue;
        }
        // sector integral of A over inv(v)
        let w = sector.inv;
        let ring = &ctx.oc.rings[w];
        let mut int = BigC::zero_p(ctx.prec);
        for (x, wgt) in a[w].iter().zip(&ring.integrals) {
            int = int + x.clone() * BigC::from_q(wgt, ctx.prec);
        }
        // phase e^{i pi (1 - age(inv(v)))} from the z^{-mu} pairing
        let phase = BigC::exp_2pi_i_q(
            &((Q::one() - ctx.oc.sectors[w].age.clone()) / qi(2)),
            ctx.prec,
        );
        twisted_linear.push((v, -(phase * a0inv.clone() * int)));
    }
    let r = ctx.oc.fan.data.r;
    let curve_class = (0..r)
        .map(|b| {
            let xi: Vec<i64> = ctx.oc.frame.p[b].clone();
            curve_pairing(ctx, a, &xi)
        })
        .collect();
    Ok(PeriodForm {
        const_term,
        const_rational,
        twisted_linear,
        curve_class,
    })
}

/// Integral classes pulled back from the coarse space: N_a e_a with N_a the
/// least multiplier clearing all sector ages of e_a.
pub fn coarse_integral_basis(fan: &FanStructure) -> Vec<Vec<i64>> {
    let sectors = crate::toric::box_sectors(fan);
    (0..fan.data.r)
        .map(|a| {
            let mut lcm = 1i64;
            for s in &sectors {
                let den = s.d_rep[a].denom().to_i64().expect("small denominator");
                lcm = lcm.lcm(&den);
            }
            let mut xi = vec![0i64; fan.data.r];
            xi[a] = lcm;
            xi
        })
        .collect()
}

/// The image A_{(y,V)} of O_y tensor V for a torus-fixed point y (given by
/// a minimal anticone) and a character of its abelian isotropy group, via
/// the orbifold Riemann-Roch sum over group elements.
pub fn point_class(
    ctx: &ClassCtx,
    anticone_index: usize,
    character: &[Q],
) -> Result<OrbC, PeriodError> {
    let fan = &ctx.oc.fan;
    let prec = ctx.prec;
    let n = fan.n as i64;
    let anticone = &fan.minimal_anticones[anticone_index];
    let d_rows: Vec<Vec<i64>> = anticone.iter().map(|&i| fan.data.d[i].clone()).collect();
    let dec = snf(&zmat_from_i64(&d_rows));
    let diag: Vec<i64> = dec
        .diagonal()
        .iter()
        .map(|x| x.to_i64().expect("small invariant factor").abs())
        .collect();
    let gens: Vec<usize> = (0..diag.len()).filter(|&k| diag[k] > 1).collect();
    if character.len() != gens.len() {
        return Err(PeriodError::CharacterInvalid(format!(
            "expected {} phases, got {}",
            gens.len(),
            character.len()
        )));
    }
    for (c, &k) in character.iter().zip(&gens) {
        if !(c * qi(diag[k])).is_integer() {
            return Err(PeriodError::CharacterInvalid(format!(
                "phase {} is not a multiple of 1/{}",
                crate::exact::q_to_string(c),
                diag[k]
            )));
        }
    }
    let order: i64 = diag.iter().product();
    // group elements: d(t) = V (t_k / s_k) over t_k in [0, s_k)
    let v_mat: Vec<Vec<Q>> = dec
        .v
        .iter()
        .map(|row| row.iter().map(|x| Q::from_integer(x.clone())).collect())
        .collect();
    let r = fan.data.r;
    let mut out = ctx.zero_class();
    let mut t = vec![0i64; r];
    loop {
        // d for this group element
        let frac_t: Vec<Q> = (0..r).map(|k| Q::new(t[k].into(), diag[k].into())).collect();
        let d = matq::mat_vec(&v_mat, &frac_t);
        // character phase on this element
        let mut chi = Q::zero();
        for (c, &k) in character.iter().zip(&gens) {
            chi += c * qi(t[k]);
        }
        // locate the sector
        let fracs: Vec<Q> = (0..fan.data.m).map(|i| frac(&fan.data.pair(i, &d))).collect();
        let candidates: Vec<usize> = ctx
            .oc
            .sectors
            .iter()
            .filter(|s| s.pairings_frac == fracs)
            .map(|s| s.id)
            .collect();
        let v = if candidates.len() == 1 {
            candidates[0]
        } else {
            let cls = fan.n_class(&d);
            *candidates
                .iter()
                .find(|&&w| ctx.oc.sectors[w].v_class.torsion == cls.torsion)
                .expect("sector of group element")
        };
        let sector = &ctx.oc.sectors[v];
        // weight (-1)^{n + n_v + age} Tr(char(g^{-1})) / (|G| prod Gamma(f_j))
        let exponent = qi(n) + qi(sector.n_v as i64) + sector.age.clone();
        let sign = BigC::exp_2pi_i_q(&(-exponent / qi(2)), prec);
        let tr = BigC::exp_2pi_i_q(&-chi, prec);
        let mut gamma_prod = Float::with_val(prec, order);
        for f in &sector.pairings_frac {
            if !f.is_zero() {
                gamma_prod *= gamma_q(f, prec);
            }
        }
        let weight = sign * tr * BigC::from_re(gamma_prod).inv();
        let pt = point_of_sector(ctx, v);
        for (o, p) in out[v].iter_mut().zip(&pt) {
            *o = o.clone() + p.clone() * weight.clone();
        }
        // next tuple
        let mut k = 0;
        loop {
            if k == r {
                let scaled = ctx.scale_class(&out, &a0_scalar(ctx));
                return Ok(scaled);
            }
            t[k] += 1;
            if t[k] < diag[k] {
                break;
            }
            t[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::OrbifoldCohomology;
    use crate::exact::qq;
    use crate::toric::{box_sectors, nef_frame, validate, StackyData};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const PREC: u32 = 256;

    fn setup(r: usize, d: Vec<Vec<i64>>, eta: Vec<Q>) -> OrbifoldCohomology {
        let data = StackyData::new(r, d, eta, None).unwrap();
        let fan = validate(&data).unwrap();
        let frame = nef_frame(&fan).unwrap();
        let sectors = box_sectors(&fan);
        OrbifoldCohomology::build(fan, frame, sectors, 7).unwrap()
    }

    fn p1() -> OrbifoldCohomology {
        setup(1, vec![vec![1], vec![1]], vec![qi(1)])
    }

    fn p12() -> OrbifoldCohomology {
        setup(1, vec![vec![1], vec![2]], vec![qi(1)])
    }

    fn p112() -> OrbifoldCohomology {
        setup(1, vec![vec![1], vec![1], vec![2]], vec![qi(1)])
    }

    fn p1xp1() -> OrbifoldCohomology {
        setup(
            2,
            vec![vec![1, 0], vec![1, 0], vec![0, 1], vec![0, 1]],
            vec![qi(1), qi(1)],
        )
    }

    fn f3() -> OrbifoldCohomology {
        setup(
            2,
            vec![vec![1, 0], vec![-3, 1], vec![1, 0], vec![0, 1]],
            vec![qi(1), qi(1)],
        )
    }

    #[test]
    fn a0_matches_structure_sheaf_on_p1() {
        let oc = p1();
        let ctx = ClassCtx::new(&oc, PREC);
        let ox = KClass::line(vec![0]).sub(&KClass::line(vec![-1]));
        let psi = ctx.psi(&ox);
        let a0 = a0_vector(&ctx);
        assert!(ctx.class_residual(&psi, &a0) < tol(PREC));
        // a0 = (A0, 1)_orb = 2 pi i / sqrt(2 pi)
        let pair = ctx.pairing_orb(&a0, &orb_unit(&ctx));
        let expect = a0_scalar(&ctx);
        assert!((pair - expect).abs() < tol(PREC));
    }

    #[test]
    fn a0_galois_invariant_all_fixtures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for oc in [p1(), p12(), p112(), p1xp1(), f3()] {
            let ctx = ClassCtx::new(&oc, PREC);
            let a0 = a0_vector(&ctx);
            for _ in 0..5 {
                let xi: Vec<i64> =
                    (0..oc.fan.data.r).map(|_| rng.gen_range(-4..=4)).collect();
                let moved = ctx.galois(&xi, &a0);
                let resid = ctx.class_residual(&moved, &a0);
                assert!(resid < Float::with_val(PREC, 1e-10), "residual {resid}");
            }
        }
    }

    #[test]
    fn lattice_classification_p1() {
        let oc = p1();
        let ctx = ClassCtx::new(&oc, PREC);
        let o = KClass::line(vec![0]);
        let ox = KClass::line(vec![0]).sub(&KClass::line(vec![-1]));
        let zero = KClass { terms: vec![] };
        let classified = lattice_vectors(&ctx, &[o, ox, zero]);
        assert!(!classified[0].in_vz1);
        assert_eq!(classified[0].filtration, 1);
        assert!(classified[1].in_vz1);
        assert!(classified[1].in_ker_h2);
        assert_eq!(classified[1].filtration, -1);
        assert_eq!(classified[2].filtration, -1);
    }

    #[test]
    fn period_of_a0_is_one() {
        for oc in [p1(), p12(), p1xp1()] {
            let ctx = ClassCtx::new(&oc, PREC);
            let a0 = a0_vector(&ctx);
            let form = period_form(&ctx, &a0).unwrap();
            assert_eq!(form.const_rational, Some(Q::one()));
            for (_, c) in &form.twisted_linear {
                assert!(c.abs() < tol(PREC));
            }
            for c in &form.curve_class {
                assert!(c.abs() < tol(PREC));
            }
        }
    }

    #[test]
    fn stacky_point_periods_p12() {
        let oc = p12();
        let ctx = ClassCtx::new(&oc, PREC);
        let stacky = oc
            .fan
            .minimal_anticones
            .iter()
            .position(|s| s == &vec![1usize])
            .expect("anticone {2}");
        // trivial character
        let a = point_class(&ctx, stacky, &[Q::zero()]).unwrap();
        let form = period_form(&ctx, &a).unwrap();
        assert_eq!(form.const_rational, Some(qq(1, 2)));
        // nontrivial Z/2 character
        let b = point_class(&ctx, stacky, &[qq(1, 2)]).unwrap();
        let form_b = period_form(&ctx, &b).unwrap();
        assert_eq!(form_b.const_rational, Some(qq(1, 2)));
        assert_eq!(form_b.twisted_linear.len(), 1);
        let expect = -(Float::with_val(PREC, 2) * BigC::pi(PREC).sqrt()).recip();
        let got = &form_b.twisted_linear[0].1;
        assert!(
            (got.clone() - BigC::from_re(expect)).abs() < Float::with_val(PREC, 1e-10),
            "coefficient {got:?}"
        );
    }

    #[test]
    fn stacky_point_periods_p112() {
        let oc = p112();
        let ctx = ClassCtx::new(&oc, PREC);
        let stacky = oc
            .fan
            .minimal_anticones
            .iter()
            .position(|s| s == &vec![2usize])
            .expect("anticone {3}");
        let b = point_class(&ctx, stacky, &[qq(1, 2)]).unwrap();
        let form = period_form(&ctx, &b).unwrap();
        assert_eq!(form.const_rational, Some(qq(1, 2)));
        // twisted coefficient -1 / (2 Gamma(1/2)^2) = -1 / (2 pi)
        let expect = -(BigC::pi(PREC) * 2u32).recip();
        let got = &form.twisted_linear[0].1;
        assert!(
            (got.clone() - BigC::from_re(expect)).abs() < Float::with_val(PREC, 1e-10),
            "coefficient {got:?}"
        );
    }

    #[test]
    fn point_class_trivial_character_on_nonstacky_point() {
        for oc in [p1(), p12(), p112()] {
            let ctx = ClassCtx::new(&oc, PREC);
            let idx = oc
                .fan
                .multiplicities
                .iter()
                .position(|m| m.is_one())
                .expect("non-stacky fixed point");
            let a = point_class(&ctx, idx, &[]).unwrap();
            let a0 = a0_vector(&ctx);
            let resid = ctx.class_residual(&a, &a0);
            assert!(resid < Float::with_val(PREC, 1e-10), "residual {resid}");
        }
    }

    #[test]
    fn character_validation() {
        let oc = p12();
        let ctx = ClassCtx::new(&oc, PREC);
        let stacky = oc
            .fan
            .minimal_anticones
            .iter()
            .position(|s| s == &vec![1usize])
            .unwrap();
        assert!(matches!(
            point_class(&ctx, stacky, &[]),
            Err(PeriodError::CharacterInvalid(_))
        ));
        assert!(matches!(
            point_class(&ctx, stacky, &[qq(1, 3)]),
            Err(PeriodError::CharacterInvalid(_))
        ));
    }

    #[test]
    fn curve_class_integrality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for oc in [p1xp1(), f3(), p12(), p112()] {
            let ctx = ClassCtx::new(&oc, PREC);
            let base = coarse_integral_basis(&oc.fan);
            for a in 0..oc.fan.data.r {
                let mut lower = vec![0i64; oc.fan.data.r];
                lower[a] = -1;
                let vec = ctx.add_class(
                    &ctx.psi(&KClass::line(vec![0; oc.fan.data.r])),
                    &ctx.scale_class(
                        &ctx.psi(&KClass::line(lower)),
                        &-BigC::one_p(PREC),
                    ),
                );
                if filtration_level(&ctx, &vec) > -(oc.fan.n as i64) + 2 {
                    continue;
                }
                for _ in 0..5 {
                    let coeffs: Vec<i64> =
                        (0..oc.fan.data.r).map(|_| rng.gen_range(-3..=3)).collect();
                    let mut xi = vec![0i64; oc.fan.data.r];
                    for (c, b) in coeffs.iter().zip(&base) {
                        for (x, y) in xi.iter_mut().zip(b) {
                            *x += c * y;
                        }
                    }
                    let pairing = curve_pairing(&ctx, &vec, &xi);
                    let nearest = pairing.re().to_f64().round();
                    let resid = (pairing - BigC::from_re(Float::with_val(PREC, nearest))).abs();
                    assert!(resid < Float::with_val(PREC, 1e-10), "residual {resid}");
                }
            }
        }
    }

    #[test]
    fn weight_filtration_structure() {
        let oc = p12();
        let ctx = ClassCtx::new(&oc, PREC);
        let filt = weight_filtration(&ctx);
        // levels nested
        for w in filt.windows(2) {
            assert!(w[0].1.len() < w[1].1.len());
            assert!(w[0].1.iter().all(|e| w[1].1.contains(e)));
        }
        // bottom level is H^{2n} of the untwisted sector
        assert_eq!(filt[0].0, -1);
        // cup with a coarse Kahler class lowers the level by at least two
        let xi = &coarse_integral_basis(&oc.fan)[0];
        let psi_o = ctx.psi(&KClass::line(vec![0]));
        let lvl = filtration_level(&ctx, &psi_o);
        let cupped: OrbC = (0..psi_o.len())
            .map(|v| {
                let cls: Vec<BigC> = ctx
                    .xi_class_v(v, xi)
                    .iter()
                    .map(|q2| BigC::from_q(q2, PREC))
                    .collect();
                ctx.cup_v(v, &cls, &psi_o[v])
            })
            .collect();
        assert!(filtration_level(&ctx, &cupped) <= lvl - 2);
    }
}
