//! End-to-end acceptance suite: every top-level guarantee of the crate is
//! exercised here, one pass/fail line per criterion, with all tolerances
//! pinned in this file.

use num_traits::{One, Zero};
use qcoh::classes::{ClassCtx, KClass};
use qcoh::cohomology::{
    integrate, lefschetz_identity_check, lefschetz_sl2, MPoly, Mono, OrbifoldCohomology,
};
use qcoh::exact::bigc::BigC;
use qcoh::exact::{qi, qq, Q};
use qcoh::mirror::{
    galois_monodromy_check, i_function, mirror_map, oscillatory_check_1d, thimble_integral_1d,
};
use qcoh::periods::a0_vector;
use qcoh::toric::{box_sectors, nef_frame, validate, weak_fano_check, StackyData};
use qcoh::ttstar::{
    self, b_btilde, j_series, metric, metric_matrix_report, pde_check, s_matrix, z_mono, Mat2, Zl,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use std::time::Instant;

const PREC: u32 = 256;
const TOL_RESIDUAL: f64 = 1e-10; // criteria 5, 6, 11
const TOL_OSC: f64 = 1e-6; // criterion 8, series comparison
const TOL_BESSEL: f64 = 1e-8; // criterion 8, quadrature validation

fn fixture(r: usize, d: Vec<Vec<i64>>) -> OrbifoldCohomology {
    let eta = vec![Q::one(); r];
    let data = StackyData::new(r, d, eta, None).unwrap();
    let fan = validate(&data).unwrap();
    let frame = nef_frame(&fan).unwrap();
    let sectors = box_sectors(&fan);
    OrbifoldCohomology::build(fan, frame, sectors, 7).unwrap()
}

fn p1() -> OrbifoldCohomology {
    fixture(1, vec![vec![1], vec![1]])
}
fn p12() -> OrbifoldCohomology {
    fixture(1, vec![vec![1], vec![2]])
}
fn p112() -> OrbifoldCohomology {
    fixture(1, vec![vec![1], vec![1], vec![2]])
}
fn f3() -> OrbifoldCohomology {
    fixture(2, vec![vec![1, 0], vec![-3, 1], vec![1, 0], vec![0, 1]])
}

fn tolf(x: f64) -> Float {
    Float::with_val(PREC, x)
}

type Outcome = Result<(), String>;

fn criterion_01_metric_table() -> Outcome {
    let start = Instant::now();
    let ms = metric(6).map_err(|e| format!("metric(6) failed: {e}"))?;
    let expected_f6_constant = qq(15268380040196927, 251942400000);
    if ms.f[6].coeff(0) != expected_f6_constant {
        return Err("F_6 constant coefficient mismatch".into());
    }
    for n in 0..=6usize {
        // monic of degree 2n+1 with the frozen full coefficient table
        // checked in the library unit tests; here we re-pin the shape and
        // two full polynomials.
        if ms.f[n].max_exp() != Some(2 * n as i64 + 1) || ms.f[n].coeff(2 * n as i64 + 1) != qi(1)
        {
            return Err(format!("F_{n} is not monic of degree {}", 2 * n + 1));
        }
    }
    let f1: Vec<Q> = ms.f_coeffs(1);
    if f1 != vec![qi(8), qi(8), qi(4), qi(1)] {
        return Err("F_1 != a^3 + 4a^2 + 8a + 8".into());
    }
    let f2: Vec<Q> = ms.f_coeffs(2);
    if f2
        != vec![
            qq(145, 4),
            qq(145, 2),
            qq(129, 2),
            qq(121, 4),
            qi(8),
            qi(1),
        ]
    {
        return Err("F_2 coefficient table mismatch".into());
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 60 {
        return Err(format!("runtime {elapsed:?} exceeds 60 s"));
    }
    Ok(())
}

fn criterion_02_pde_residual() -> Outcome {
    let ms = metric(5).map_err(|e| format!("metric(5) failed: {e}"))?;
    let resid = pde_check(&ms, 5);
    if resid.iter().all(|x| x.is_zero()) {
        Ok(())
    } else {
        Err("PDE residual is not identically zero through s^5".into())
    }
}

fn zl(terms: &[(i64, i64, &str)]) -> Zl {
    let mut out = Zl::zero();
    for &(zk, ak, c) in terms {
        out = out + z_mono(zk, ak, qcoh::exact::q_from_string(c).unwrap());
    }
    out
}

fn criterion_03_birkhoff_display() -> Outcome {
    let bb = b_btilde(3).map_err(|e| format!("factorization failed: {e}"))?;
    // the five displayed matrices: qbar, q qbar, qbar^2, q qbar^2, qbar^3
    let cases: Vec<((u32, u32), [[Zl; 2]; 2])> = vec![
        (
            (0, 1),
            [
                [zl(&[(2, 0, "1"), (2, 1, "1")]), zl(&[(3, -1, "1")])],
                [
                    zl(&[(1, 0, "2"), (1, 1, "2"), (1, 2, "1")]),
                    zl(&[(2, -1, "2"), (2, 0, "1")]),
                ],
            ],
        ),
        (
            (1, 1),
            [
                [
                    Zl::zero(),
                    zl(&[(1, -2, "-8"), (1, -1, "-8"), (1, 0, "-2")]),
                ],
                [Zl::zero(), Zl::zero()],
            ],
        ),
        (
            (0, 2),
            [
                [
                    zl(&[(4, 0, "1/4"), (4, 1, "1/2")]),
                    zl(&[(5, -1, "1/4")]),
                ],
                [
                    zl(&[(3, 0, "3/4"), (3, 1, "3/2"), (3, 2, "1/2")]),
                    zl(&[(4, -1, "3/4"), (4, 0, "1/4")]),
                ],
            ],
        ),
        (
            (1, 2),
            [
                [
                    zl(&[(2, 0, "33/4"), (2, 1, "17/2"), (2, 2, "9/2"), (2, 3, "1")]),
                    zl(&[
                        (3, -2, "-8"),
                        (3, -1, "-31/4"),
                        (3, 0, "-3"),
                        (3, 1, "-1/2"),
                    ]),
                ],
                [
                    zl(&[
                        (1, 0, "25/2"),
                        (1, 1, "25"),
                        (1, 2, "17"),
                        (1, 3, "6"),
                        (1, 4, "1"),
                    ]),
                    zl(&[
                        (2, -2, "-16"),
                        (2, -1, "-39/2"),
                        (2, 0, "-45/4"),
                        (2, 1, "-7/2"),
                        (2, 2, "-1/2"),
                    ]),
                ],
            ],
        ),
        (
            (0, 3),
            [
                [
                    zl(&[(6, 0, "1/36"), (6, 1, "1/12")]),
                    zl(&[(7, -1, "1/36")]),
                ],
                [
                    zl(&[(5, 0, "11/108"), (5, 1, "11/36"), (5, 2, "1/12")]),
                    zl(&[(6, -1, "11/108"), (6, 0, "1/36")]),
                ],
            ],
        ),
    ];
    for ((n, m), entries) in cases {
        if bb.coeff(n, m) != Mat2(entries) {
            return Err(format!("B*Btilde mismatch at bidegree ({n},{m})"));
        }
    }
    Ok(())
}

fn criterion_04_dual_oracle_s_matrix() -> Outcome {
    // s_matrix internally compares the closed form against the assembled
    // form at every bidegree up to the requested total order.
    s_matrix(6)
        .map(|_| ())
        .map_err(|e| format!("dual-oracle disagreement: {e}"))
}

fn criterion_05_riemann_roch_mukai() -> Outcome {
    let bound = tolf(TOL_RESIDUAL);
    for (name, oc) in [("P1", p1()), ("P(1,2)", p12()), ("P(1,1,2)", p112())] {
        let ctx = ClassCtx::new(&oc, PREC);
        let r = oc.fan.data.r;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let xi1: Vec<i64> = (0..r).map(|_| rng.gen_range(-3..=3)).collect();
            let xi2: Vec<i64> = (0..r).map(|_| rng.gen_range(-3..=3)).collect();
            let v1 = KClass::line(xi1.clone());
            let v2 = KClass::line(xi2.clone());
            let (chi, round_resid) = ctx
                .chi_rr(&v1, &v2)
                .map_err(|e| format!("{name}: chi not near an integer: {e}"))?;
            if round_resid >= bound {
                return Err(format!("{name}: chi rounding residual {round_resid}"));
            }
            let pairing = ctx.pairing_v_space(&ctx.psi(&v1), &ctx.psi(&v2));
            let chi_c = BigC::from_q(&Q::from_integer(chi), PREC);
            let diff = (pairing - chi_c).abs();
            if diff >= bound {
                return Err(format!(
                    "{name}: |(Psi,Psi) - chi| = {diff} for xi1={xi1:?}, xi2={xi2:?}"
                ));
            }
        }
        // classical oracles
        let (chi_o, _) = ctx
            .chi_rr(&KClass::line(vec![0; r]), &KClass::line(vec![0; r]))
            .map_err(|e| e.to_string())?;
        if !chi_o.is_one() {
            return Err(format!("{name}: chi(O) = {chi_o} != 1"));
        }
    }
    let oc = p1();
    let ctx = ClassCtx::new(&oc, PREC);
    for k in 0..=4i64 {
        let (chi, _) = ctx
            .chi_rr(&KClass::line(vec![k]), &KClass::line(vec![0]))
            .map_err(|e| e.to_string())?;
        if chi != (k + 1).into() {
            return Err(format!("chi(O_P1({k})) = {chi} != {}", k + 1));
        }
    }
    Ok(())
}

fn criterion_06_galois_equivariance() -> Outcome {
    let bound = tolf(TOL_RESIDUAL);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (name, oc) in [
        ("P1", p1()),
        ("P(1,2)", p12()),
        ("P(1,1,2)", p112()),
        ("F3", f3()),
    ] {
        let ctx = ClassCtx::new(&oc, PREC);
        let r = oc.fan.data.r;
        let a0 = a0_vector(&ctx);
        for _ in 0..5 {
            let xi: Vec<i64> = (0..r).map(|_| rng.gen_range(-4..=4)).collect();
            let v: Vec<i64> = (0..r).map(|_| rng.gen_range(-2..=2)).collect();
            let k = KClass::line(v.clone());
            let neg: Vec<i64> = xi.iter().map(|x| -x).collect();
            let twisted = ctx.psi(&k.tensor(&KClass::line(neg)));
            let moved = ctx.galois(&xi, &ctx.psi(&k));
            let resid = ctx.class_residual(&twisted, &moved);
            if resid >= bound {
                return Err(format!("{name}: twist residual {resid} at xi={xi:?}"));
            }
            let a0_resid = ctx.class_residual(&ctx.galois(&xi, &a0), &a0);
            if a0_resid >= bound {
                return Err(format!("{name}: A0 not invariant, residual {a0_resid}"));
            }
        }
    }
    Ok(())
}

fn criterion_07_i_function_identities() -> Outcome {
    // (a) exact match against the scalar double series on P1 through q^5
    let oc = p1();
    let ifs = i_function(&oc, &qi(5)).map_err(|e| e.to_string())?;
    let (j0, j1) = j_series(5);
    for k in 0..=5u32 {
        let term = ifs
            .terms
            .iter()
            .find(|t| t.d == vec![qi(k as i64)])
            .ok_or_else(|| format!("missing class d={k}"))?;
        let e0 = -2 * (k as i64);
        let got0 = term
            .z_poly
            .get(&e0)
            .map(|c| c[0].clone())
            .unwrap_or_else(Q::zero);
        if got0 != j0.coeff(k, 0).coeff(e0).coeff(0) {
            return Err(format!("component 0 mismatch at q^{k}"));
        }
        if k > 0 {
            let got1 = term
                .z_poly
                .get(&(e0 - 1))
                .map(|c| c[1].clone())
                .unwrap_or_else(Q::zero);
            if got1 != j1.coeff(k, 0).coeff(e0).coeff(0) {
                return Err(format!("component 1 mismatch at q^{k}"));
            }
        }
    }
    // (b) exact monodromy identity through bound 3 on all fixtures
    for (name, oc) in [
        ("P1", p1()),
        ("P(1,2)", p12()),
        ("P(1,1,2)", p112()),
        ("F3", f3()),
    ] {
        let ifs = i_function(&oc, &qi(3)).map_err(|e| format!("{name}: {e}"))?;
        let r = oc.fan.data.r;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let xi: Vec<i64> = (0..r).map(|_| rng.gen_range(-4..=4)).collect();
            let (ok, bad) = galois_monodromy_check(&oc, &xi, &ifs);
            if !ok {
                return Err(format!("{name}: monodromy fails at d={bad:?}, xi={xi:?}"));
            }
        }
    }
    // (c) structural: the mirror map lands in degree <= 2 on the weak-Fano
    // fixtures (enforced exactly inside mirror_map)
    for (name, oc) in [("P1", p1()), ("P(1,2)", p12()), ("P(1,1,2)", p112())] {
        let ifs = i_function(&oc, &qi(3)).map_err(|e| format!("{name}: {e}"))?;
        mirror_map(&oc, &ifs).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(())
}

fn criterion_08_oscillatory() -> Outcome {
    let start = Instant::now();
    let oc = p1();
    let ctx = ClassCtx::new(&oc, PREC);
    let q = qq(1, 100);
    // quadrature validated against the Bessel-K closed form
    let lhs = thimble_integral_1d(&ctx, &q, &qi(-1), false).map_err(|e| e.to_string())?;
    let x = Float::with_val(PREC, 4u32).sqrt() / 10u32; // 2 sqrt(q) = 2/10
    let bessel = {
        let gamma = BigC::euler_gamma(PREC);
        let t = x.clone() * x.clone() / 4u32;
        let mut i0 = Float::with_val(PREC, 1);
        let mut sum = Float::new(PREC);
        let mut term = Float::with_val(PREC, 1);
        let mut hk = Float::new(PREC);
        for k in 1..200u32 {
            term *= t.clone() / k / k;
            i0 += term.clone();
            hk += Float::with_val(PREC, 1) / k;
            sum += term.clone() * hk.clone();
            if term < tolf(1e-70) {
                break;
            }
        }
        -((x.clone() / 2u32).ln() + gamma) * i0 + sum
    };
    let k0_oracle = bessel * 2u32 / (BigC::pi(PREC) * 2u32).sqrt();
    let quad_resid = (lhs - k0_oracle).abs();
    if quad_resid >= tolf(TOL_BESSEL) {
        return Err(format!("quadrature vs Bessel residual {quad_resid}"));
    }
    // thimble integral vs series right-hand side
    let ifs = i_function(&oc, &qi(8)).map_err(|e| e.to_string())?;
    let report = oscillatory_check_1d(&ctx, &ifs, &q, &qi(-1)).map_err(|e| e.to_string())?;
    if report.residual >= tolf(TOL_OSC) {
        return Err(format!("LHS vs RHS residual {}", report.residual));
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= 10 {
        return Err(format!("runtime {elapsed:?} exceeds 10 s"));
    }
    Ok(())
}

fn criterion_09_combinatorics() -> Outcome {
    // pinned Box tables
    let oc = p12();
    let ages: Vec<Q> = oc.sectors.iter().map(|s| s.age.clone()).collect();
    let nvs: Vec<usize> = oc.sectors.iter().map(|s| s.n_v).collect();
    if ages != vec![Q::zero(), qq(1, 2)] || nvs != vec![1, 0] {
        return Err("P(1,2) Box table mismatch".into());
    }
    let oc = p112();
    let ages: Vec<Q> = oc.sectors.iter().map(|s| s.age.clone()).collect();
    let nvs: Vec<usize> = oc.sectors.iter().map(|s| s.n_v).collect();
    if ages != vec![Q::zero(), Q::one()] || nvs != vec![2, 0] {
        return Err("P(1,1,2) Box table mismatch".into());
    }
    // age duality and the dimension count on all weak-Fano fixtures
    for (name, oc) in [("P1", p1()), ("P(1,2)", p12()), ("P(1,1,2)", p112())] {
        let frame = &oc.frame;
        let wf = weak_fano_check(&oc.fan, frame).map_err(|e| e.to_string())?;
        if !(wf.rho_hat_in_cl_ctilde && wf.rho_nef) {
            return Err(format!("{name}: expected weak Fano"));
        }
        for s in &oc.sectors {
            let dual = &oc.sectors[s.inv];
            if s.age.clone() + dual.age.clone() != qi((oc.fan.n - s.n_v) as i64) {
                return Err(format!("{name}: age duality fails on sector {}", s.id));
            }
        }
        let total: usize = oc.total_dim();
        // scaled_volume() is already n! times the lattice volume
        let expected = Q::from_integer(oc.fan.torsion_order()) * oc.fan.scaled_volume();
        if qi(total as i64) != expected {
            return Err(format!(
                "{name}: total dim {total} != |N_tor| n! Vol = {expected}"
            ));
        }
    }
    Ok(())
}

fn criterion_10_integration_oracle() -> Outcome {
    // two independently seeded localization runs agree exactly
    for (name, oc) in [("P(1,1,2)", p112()), ("F3", f3())] {
        let v = &oc.sectors[0];
        let mut p = MPoly::zero(oc.frame.r_prime);
        let top: Vec<u32> = match oc.fan.data.r {
            1 => vec![oc.fan.n as u32],
            _ => vec![1, 1],
        };
        p.insert(Mono(top), Q::one());
        let i1 = integrate(&oc.fan, &oc.frame, v, &p, 101).map_err(|e| e.to_string())?;
        let i2 = integrate(&oc.fan, &oc.frame, v, &p, 202).map_err(|e| e.to_string())?;
        if i1 != i2 {
            return Err(format!("{name}: seeds disagree: {i1} vs {i2}"));
        }
    }
    // pinned values
    let oc = p112();
    let mut p = MPoly::zero(1);
    p.insert(Mono(vec![2]), Q::one());
    let val = integrate(&oc.fan, &oc.frame, &oc.sectors[0], &p, 7).map_err(|e| e.to_string())?;
    if val != qq(1, 2) {
        return Err(format!("int_P(1,1,2) pbar^2 = {val} != 1/2"));
    }
    let oc = p1();
    let mut p = MPoly::zero(1);
    p.insert(Mono(vec![1]), Q::one());
    let val = integrate(&oc.fan, &oc.frame, &oc.sectors[0], &p, 7).map_err(|e| e.to_string())?;
    if val != Q::one() {
        return Err(format!("int_P1 pbar = {val} != 1"));
    }
    Ok(())
}

fn criterion_11_property_suites() -> Outcome {
    let bound = tolf(TOL_RESIDUAL);
    // kappa is an involution and anticommutes with degree-2 cup products
    for (name, oc) in [("P1", p1()), ("P(1,2)", p12())] {
        let ctx = ClassCtx::new(&oc, PREC);
        let psi = ctx.psi(&KClass::line(vec![1]));
        let twice = ctx.kappa(&ctx.kappa(&psi));
        if ctx.class_residual(&twice, &psi) >= bound {
            return Err(format!("{name}: kappa^2 != id"));
        }
        // kappa(rho cup a) = -rho cup kappa(a)
        let rho_cup = |a: &qcoh::classes::OrbC| -> qcoh::classes::OrbC {
            (0..a.len())
                .map(|v| ctx.cup_v(v, &ctx.rho_class_v(v), &a[v]))
                .collect()
        };
        let lhs = ctx.kappa(&rho_cup(&psi));
        let rhs = ctx.scale_class(&rho_cup(&ctx.kappa(&psi)), &-BigC::one_p(PREC));
        if ctx.class_residual(&lhs, &rhs) >= bound {
            return Err(format!("{name}: kappa does not anticommute with cup"));
        }
    }
    // metric matrix is diagonal with determinant one
    let report = metric_matrix_report(3).map_err(|e| e.to_string())?;
    if !report.off_diagonal_zero || !report.det_is_one {
        return Err("metric matrix is not diag(h, h^{-1})".into());
    }
    // F_n degree/leading pattern
    let ms = metric(4).map_err(|e| e.to_string())?;
    for n in 0..=4usize {
        if ms.f[n].max_exp() != Some(2 * n as i64 + 1)
            || ms.f[n].coeff(2 * n as i64 + 1) != qi(1)
            || ms.f[n].min_exp().map(|e| e < 0).unwrap_or(true)
        {
            return Err(format!("F_{n} degree/leading pattern violated"));
        }
    }
    // sl2 identity coefficients (-1)^{k+j} j!/(k+j)! on hard-Lefschetz data
    for (name, oc, omega) in [
        ("P1", p1(), vec![Q::one()]),
        ("P(1,1,2)", p112(), vec![Q::one()]),
    ] {
        let ring = &oc.rings[0];
        let mut p = MPoly::zero(ring.nvars);
        for (a, c) in omega.iter().enumerate() {
            p.insert(Mono::var(ring.nvars, a), c.clone());
        }
        let sl2 = lefschetz_sl2(ring, &ring.coords(&p)).map_err(|e| e.to_string())?;
        let pairs = lefschetz_identity_check(ring, &sl2).map_err(|e| e.to_string())?;
        if pairs.is_empty() {
            return Err(format!("{name}: no (k, j) pairs were checked"));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("01 metric table F_0..F_6 exact", criterion_01_metric_table),
        ("02 tt* PDE residual zero through s^5", criterion_02_pde_residual),
        ("03 Birkhoff factor display exact", criterion_03_birkhoff_display),
        ("04 dual-oracle S-matrix to (3,3)", criterion_04_dual_oracle_s_matrix),
        ("05 Riemann-Roch / Mukai pairing", criterion_05_riemann_roch_mukai),
        ("06 Galois equivariance and A0 invariance", criterion_06_galois_equivariance),
        ("07 I-function identities", criterion_07_i_function_identities),
        ("08 oscillatory integral vs series", criterion_08_oscillatory),
        ("09 Box/age/dimension combinatorics", criterion_09_combinatorics),
        ("10 localization integration oracle", criterion_10_integration_oracle),
        ("11 structural property suites", criterion_11_property_suites),
    ];
    let mut failures = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(()) => println!("criterion {name}: pass"),
            Err(msg) => {
                println!("criterion {name}: FAIL ({msg})");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
