//! `qcoh` — command-line front end: stacky-fan validation, Box sectors,
//! nef frames, exact sector integrals, Riemann-Roch pairings, Gamma-class
//! vectors, mirror hypergeometric series, oscillatory-integral checks, the
//! P^1 tt* metric table, and integral periods.

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use qcoh::classes::{ClassCtx, KClass, OrbC};
use qcoh::cohomology::OrbifoldCohomology;
use qcoh::exact::bigc::{BigC, DEFAULT_PREC};
use num_traits::{One, Zero};
use qcoh::exact::{q_from_string, q_to_string, Q};
use qcoh::mirror::{
    galois_monodromy_check, i_function, mirror_map, oscillatory_check_1d, MirrorError,
};
use qcoh::periods::{a0_vector, curve_pairing, lattice_vectors, period_form};
use qcoh::toric::{
    box_sectors, keff_enumerate, nef_frame, validate, weak_fano_check, StackyData, ToricError,
};
use qcoh::ttstar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_TOLERANCE: u8 = 3;

#[derive(Parser)]
#[command(name = "qcoh", version, about = "exact toric-orbifold calculator")]
struct Cli {
    /// Working precision in bits (overrides QCOH_PREC).
    #[arg(long, global = true)]
    prec: Option<u32>,
    /// RNG seed; echoed in output for reproducibility.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a stacky fan and print a summary.
    Validate { file: String },
    /// Print the Box sectors with ages and dimension counts.
    Box { file: String },
    /// Print the nef frame: basis, divisor matrix, splittings, rho-hat.
    Cone { file: String },
    /// Weak-Fano report for the anticanonical class.
    Weakfano { file: String },
    /// Enumerate effective classes up to a degree bound.
    Keff {
        file: String,
        #[arg(long, default_value = "3")]
        bound: String,
    },
    /// Exact integral of a monomial in the nef generators over a sector.
    Integrate {
        file: String,
        #[arg(long, default_value_t = 0)]
        sector: usize,
        /// Exponents of the nef generators, comma separated.
        #[arg(long)]
        monomial: String,
    },
    /// Holomorphic Euler pairing chi(V1, V2) by orbifold Riemann-Roch.
    Chi {
        file: String,
        #[arg(long)]
        v1: String,
        #[arg(long)]
        v2: String,
    },
    /// Gamma-class vector Psi(V) per sector.
    Psi {
        file: String,
        #[arg(long)]
        bundle: String,
    },
    /// Check the Galois twist identity and A0 invariance.
    GaloisCheck {
        file: String,
        #[arg(long)]
        bundle: Option<String>,
        /// Twist class xi; omitted => 5 seeded random twists.
        #[arg(long)]
        xi: Option<String>,
    },
    /// Truncated cohomology-valued I-function.
    Ifunction {
        file: String,
        #[arg(long = "q-order", default_value = "3")]
        q_order: String,
    },
    /// Mirror map corrections (errors when asymptotics fail).
    Mirrormap {
        file: String,
        #[arg(long = "q-order", default_value = "3")]
        q_order: String,
    },
    /// Exact Galois monodromy identity on the I-function.
    MonodromyCheck {
        file: String,
        #[arg(long)]
        xi: Option<String>,
        #[arg(long = "q-order", default_value = "3")]
        q_order: String,
    },
    /// Oscillatory-integral pairing check (one-dimensional stacks).
    Oscint {
        file: String,
        #[arg(long)]
        q: String,
        #[arg(long, default_value = "-1", allow_hyphen_values = true)]
        z: String,
        #[arg(long = "q-order", default_value = "8")]
        q_order: String,
    },
    /// tt* metric expansion of P^1: the polynomials F_0..F_N.
    P1ttstar {
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long)]
        check_pde: bool,
        #[arg(long, conflicts_with = "latex")]
        json: bool,
        #[arg(long)]
        latex: bool,
    },
    /// Classified lattice vectors and affine periods.
    Periods {
        file: String,
        /// Bundle expressions separated by '|'.
        #[arg(long)]
        bundles: String,
        /// Coarse Kahler coordinates for evaluating curve-class pairings.
        #[arg(long)]
        tau: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prec = cli
        .prec
        .or_else(|| std::env::var("QCOH_PREC").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(DEFAULT_PREC);
    match run(&cli, prec) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = classify_error(&e);
            ExitCode::from(code)
        }
    }
}

fn classify_error(e: &anyhow::Error) -> u8 {
    if let Some(te) = e.downcast_ref::<ToricError>() {
        return match te {
            ToricError::NoNefBasis | ToricError::NonNefBasis(_, _) | ToricError::Lp(_) => {
                EXIT_COMPUTE
            }
            _ => EXIT_INPUT,
        };
    }
    if let Some(me) = e.downcast_ref::<MirrorError>() {
        return match me {
            MirrorError::Toric(_) => EXIT_INPUT,
            MirrorError::QuadratureNotConverged => EXIT_TOLERANCE,
            _ => EXIT_COMPUTE,
        };
    }
    if e.downcast_ref::<std::io::Error>().is_some()
        || e.downcast_ref::<serde_json::Error>().is_some()
    {
        return EXIT_INPUT;
    }
    if e.to_string().starts_with("input:") {
        return EXIT_INPUT;
    }
    EXIT_COMPUTE
}

fn load(file: &str) -> anyhow::Result<StackyData> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {file}"))?;
    Ok(StackyData::from_json(&text)?)
}

fn build(file: &str, seed: u64) -> anyhow::Result<OrbifoldCohomology> {
    let data = load(file)?;
    let fan = validate(&data)?;
    let frame = nef_frame(&fan)?;
    let sectors = box_sectors(&fan);
    OrbifoldCohomology::build(fan, frame, sectors, seed).map_err(|e| anyhow!("{e}"))
}

fn parse_q(s: &str) -> anyhow::Result<Q> {
    q_from_string(s.trim()).map_err(|e| anyhow!("input: bad rational '{s}': {e}"))
}

fn parse_ivec(s: &str, r: usize) -> anyhow::Result<Vec<i64>> {
    let v: Vec<i64> = s
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| anyhow!("input: bad integer vector '{s}': {e}"))?;
    if v.len() != r {
        return Err(anyhow!("input: expected {r} coordinates in '{s}'"));
    }
    Ok(v)
}

/// Bundle expression: line-bundle coordinate lists combined with '+'/'-'
/// separated by spaces, e.g. "0,0 - -1,0".
fn parse_bundle(s: &str, r: usize) -> anyhow::Result<KClass> {
    let mut terms = Vec::new();
    let mut sign = 1i64;
    let mut expecting_coords = true;
    for token in s.split_whitespace() {
        match token {
            "+" if !expecting_coords => {
                sign = 1;
                expecting_coords = true;
            }
            "-" if !expecting_coords => {
                sign = -1;
                expecting_coords = true;
            }
            coords if expecting_coords => {
                terms.push((sign, parse_ivec(coords, r)?));
                expecting_coords = false;
            }
            other => return Err(anyhow!("input: unexpected token '{other}' in bundle")),
        }
    }
    if terms.is_empty() || expecting_coords {
        return Err(anyhow!("input: empty bundle expression '{s}'"));
    }
    Ok(KClass { terms })
}

fn c_json(x: &BigC, prec: u32) -> Value {
    json!({
        "re": x.re().to_string_radix(10, Some(24)),
        "im": x.im().to_string_radix(10, Some(24)),
        "prec": prec,
    })
}

fn f_json(x: &rug::Float) -> Value {
    Value::String(x.to_string_radix(10, Some(24)))
}

fn qvec_json(v: &[Q]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(q_to_string(x))).collect())
}

fn class_json(ctx: &ClassCtx, a: &OrbC) -> Value {
    let mut sectors = Vec::new();
    for (v, ring) in ctx.oc.rings.iter().enumerate() {
        let coeffs: Vec<Value> = a[v].iter().map(|x| c_json(x, ctx.prec)).collect();
        let monomials: Vec<String> = ring
            .basis
            .iter()
            .map(|m| {
                m.0.iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| format!("p{}^{}", i + 1, e))
                    .collect::<Vec<_>>()
                    .join("*")
            })
            .map(|s| if s.is_empty() { "1".into() } else { s })
            .collect();
        sectors.push(json!({"sector": v, "monomials": monomials, "coeffs": coeffs}));
    }
    Value::Array(sectors)
}

fn emit(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: &Cli, prec: u32) -> anyhow::Result<ExitCode> {
    let seed = cli.seed;
    match &cli.command {
        Command::Validate { file } => {
            let data = load(file)?;
            let fan = validate(&data)?;
            let sectors = box_sectors(&fan);
            emit(&json!({
                "name": data.name,
                "rank": data.r,
                "rays": data.m,
                "m_prime": fan.m_prime,
                "dimension": fan.n,
                "torsion": fan.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                "box_size": sectors.len(),
                "minimal_anticones": fan.minimal_anticones,
                "multiplicities": fan.multiplicities.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Box { file } => {
            let data = load(file)?;
            let fan = validate(&data)?;
            let sectors = box_sectors(&fan);
            let total_dim: usize = sectors.iter().map(|s| s.n_v + 1).sum::<usize>();
            let rows: Vec<Value> = sectors
                .iter()
                .map(|s| {
                    json!({
                        "id": s.id,
                        "d_rep": qvec_json(&s.d_rep),
                        "age": q_to_string(&s.age),
                        "n_v": s.n_v,
                        "fix": s.fix,
                        "inv": s.inv,
                    })
                })
                .collect();
            emit(&json!({
                "sectors": rows,
                "naive_total_dim": total_dim,
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Cone { file } => {
            let data = load(file)?;
            let fan = validate(&data)?;
            let frame = nef_frame(&fan)?;
            emit(&json!({
                "p": frame.p,
                "m_matrix": frame.m_matrix.iter().map(|r| qvec_json(r)).collect::<Vec<_>>(),
                "ell": frame.ell.iter().map(|r| qvec_json(r)).collect::<Vec<_>>(),
                "ell_alt": frame.ell_alt.iter().map(|r| qvec_json(r)).collect::<Vec<_>>(),
                "rho_hat": qvec_json(&frame.rho_hat),
                "rho_coords": qvec_json(&frame.rho_coords),
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Weakfano { file } => {
            let data = load(file)?;
            let fan = validate(&data)?;
            let frame = nef_frame(&fan)?;
            let report = weak_fano_check(&fan, &frame)?;
            emit(&json!({
                "rho_hat_in_cl_ctilde": report.rho_hat_in_cl_ctilde,
                "rho_nef": report.rho_nef,
                "ages_of_rays": report.ages_of_bj.iter().map(q_to_string).collect::<Vec<_>>(),
                "weak_fano": report.rho_hat_in_cl_ctilde && report.rho_nef,
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Keff { file, bound } => {
            let data = load(file)?;
            let fan = validate(&data)?;
            let frame = nef_frame(&fan)?;
            let bound = parse_q(bound)?;
            let classes = keff_enumerate(&fan, &frame, &bound)?;
            let rows: Vec<Value> = classes
                .iter()
                .map(|c| {
                    json!({
                        "d": qvec_json(&c.d),
                        "degree": q_to_string(&c.degree),
                        "sector_frac": qvec_json(&c.sector_frac),
                    })
                })
                .collect();
            emit(&json!({"bound": q_to_string(&bound), "classes": rows, "seed": seed}));
            Ok(ExitCode::SUCCESS)
        }
        Command::Integrate {
            file,
            sector,
            monomial,
        } => {
            let oc = build(file, seed)?;
            if *sector >= oc.rings.len() {
                return Err(anyhow!("input: no sector {sector}"));
            }
            let ring = &oc.rings[*sector];
            let exps: Vec<i64> = monomial
                .split(',')
                .map(|x| x.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|e| anyhow!("input: bad monomial '{monomial}': {e}"))?;
            if exps.len() != ring.nvars || exps.iter().any(|&e| e < 0) {
                return Err(anyhow!(
                    "input: monomial needs {} nonnegative exponents",
                    ring.nvars
                ));
            }
            let mut p = qcoh::cohomology::MPoly::zero(ring.nvars);
            p.insert(
                qcoh::cohomology::Mono(exps.iter().map(|&e| e as u32).collect()),
                Q::one(),
            );
            let coords = ring.coords(&p);
            let value = ring.integral_coords(&coords);
            emit(&json!({
                "sector": sector,
                "monomial": exps,
                "integral": q_to_string(&value),
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Chi { file, v1, v2 } => {
            let oc = build(file, seed)?;
            let ctx = ClassCtx::new(&oc, prec);
            let k1 = parse_bundle(v1, oc.fan.data.r)?;
            let k2 = parse_bundle(v2, oc.fan.data.r)?;
            let (chi, resid) = ctx
                .chi_rr(&k1, &k2)
                .map_err(|e| anyhow!("chi computation failed: {e}"))?;
            emit(&json!({
                "chi": chi.to_string(),
                "rounding_residual": f_json(&resid),
                "prec": prec,
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Psi { file, bundle } => {
            let oc = build(file, seed)?;
            let ctx = ClassCtx::new(&oc, prec);
            let k = parse_bundle(bundle, oc.fan.data.r)?;
            let psi = ctx.psi(&k);
            emit(&json!({"psi": class_json(&ctx, &psi), "prec": prec, "seed": seed}));
            Ok(ExitCode::SUCCESS)
        }
        Command::GaloisCheck { file, bundle, xi } => {
            let oc = build(file, seed)?;
            let ctx = ClassCtx::new(&oc, prec);
            let r = oc.fan.data.r;
            let k = match bundle {
                Some(b) => parse_bundle(b, r)?,
                None => KClass::line(vec![0; r]),
            };
            let twists: Vec<Vec<i64>> = match xi {
                Some(s) => vec![parse_ivec(s, r)?],
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..5)
                        .map(|_| (0..r).map(|_| rng.gen_range(-4..=4)).collect())
                        .collect()
                }
            };
            let psi = ctx.psi(&k);
            let a0 = a0_vector(&ctx);
            let bound = rug::Float::with_val(prec, 1e-10);
            let mut rows = Vec::new();
            let mut ok = true;
            for t in &twists {
                let neg: Vec<i64> = t.iter().map(|x| -x).collect();
                let twisted = ctx.psi(&k.tensor(&KClass::line(neg)));
                let moved = ctx.galois(t, &psi);
                let resid = ctx.class_residual(&twisted, &moved);
                let a0_resid = ctx.class_residual(&ctx.galois(t, &a0), &a0);
                ok &= resid < bound && a0_resid < bound;
                rows.push(json!({
                    "xi": t,
                    "twist_residual": f_json(&resid),
                    "a0_residual": f_json(&a0_resid),
                }));
            }
            emit(&json!({"checks": rows, "ok": ok, "prec": prec, "seed": seed}));
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_TOLERANCE)
            })
        }
        Command::Ifunction { file, q_order } => {
            let oc = build(file, seed)?;
            let bound = parse_q(q_order)?;
            let ifs = i_function(&oc, &bound)?;
            let rows: Vec<Value> = ifs
                .terms
                .iter()
                .map(|t| {
                    let z_poly: serde_json::Map<String, Value> = t
                        .z_poly
                        .iter()
                        .map(|(e, coords)| (e.to_string(), qvec_json(coords)))
                        .collect();
                    json!({"d": qvec_json(&t.d), "sector": t.sector, "z_poly": z_poly})
                })
                .collect();
            emit(&json!({"q_order": q_to_string(&bound), "terms": rows, "seed": seed}));
            Ok(ExitCode::SUCCESS)
        }
        Command::Mirrormap { file, q_order } => {
            let oc = build(file, seed)?;
            let bound = parse_q(q_order)?;
            let ifs = i_function(&oc, &bound)?;
            let mm = mirror_map(&oc, &ifs)?;
            let rows: Vec<Value> = mm
                .corrections
                .iter()
                .map(|(d, v, coords)| {
                    json!({"d": qvec_json(d), "sector": v, "class": qvec_json(coords)})
                })
                .collect();
            emit(&json!({
                "log_part": "sum_a (log q_a) pbar_a",
                "corrections": rows,
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::MonodromyCheck { file, xi, q_order } => {
            let oc = build(file, seed)?;
            let bound = parse_q(q_order)?;
            let ifs = i_function(&oc, &bound)?;
            let r = oc.fan.data.r;
            let twists: Vec<Vec<i64>> = match xi {
                Some(s) => vec![parse_ivec(s, r)?],
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..5)
                        .map(|_| (0..r).map(|_| rng.gen_range(-4..=4)).collect())
                        .collect()
                }
            };
            let mut rows = Vec::new();
            let mut ok = true;
            for t in &twists {
                let (good, bad) = galois_monodromy_check(&oc, t, &ifs);
                ok &= good;
                rows.push(json!({
                    "xi": t,
                    "exact": good,
                    "failing_d": bad.map(|d| qvec_json(&d)),
                }));
            }
            emit(&json!({"checks": rows, "ok": ok, "seed": seed}));
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_COMPUTE)
            })
        }
        Command::Oscint {
            file,
            q,
            z,
            q_order,
        } => {
            let oc = build(file, seed)?;
            let ctx = ClassCtx::new(&oc, prec);
            let qv = parse_q(q)?;
            let zv = parse_q(z)?;
            let bound = parse_q(q_order)?;
            let ifs = i_function(&oc, &bound)?;
            let report = oscillatory_check_1d(&ctx, &ifs, &qv, &zv)?;
            emit(&json!({
                "q": q_to_string(&qv),
                "z": q_to_string(&zv),
                "q_order": q_to_string(&bound),
                "lhs": f_json(&report.lhs),
                "rhs": c_json(&report.rhs, prec),
                "residual": f_json(&report.residual),
                "prec": prec,
                "seed": seed,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::P1ttstar {
            order,
            check_pde,
            json: json_mode,
            latex,
        } => {
            let ms = ttstar::metric(*order).map_err(|e| anyhow!("metric failed: {e}"))?;
            let fs: Vec<String> = (0..=*order as usize)
                .map(|n| ttstar::al_to_string(&ms.f[n]))
                .collect();
            let pde = if *check_pde {
                let resid = ttstar::pde_check(&ms, *order as usize);
                Some(resid.iter().all(|x| x.is_zero()))
            } else {
                None
            };
            if *latex {
                println!("\\begin{{align*}}");
                for (n, f) in fs.iter().enumerate() {
                    let tex = f.replace('*', " ");
                    println!("F_{{{n}}} &= {tex} \\\\");
                }
                println!("\\end{{align*}}");
                if let Some(ok) = pde {
                    println!("% pde_residual_zero = {ok}");
                }
            } else if *json_mode {
                emit(&json!({"F": fs, "pde_residual_zero": pde, "seed": seed}));
            } else {
                for (n, f) in fs.iter().enumerate() {
                    println!("F_{n} = {f}");
                }
                if let Some(ok) = pde {
                    println!("pde_residual_zero = {ok}");
                }
            }
            if pde == Some(false) {
                return Ok(ExitCode::from(EXIT_COMPUTE));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Periods { file, bundles, tau } => {
            let oc = build(file, seed)?;
            let ctx = ClassCtx::new(&oc, prec);
            let r = oc.fan.data.r;
            let ks: Vec<KClass> = bundles
                .split('|')
                .map(|b| parse_bundle(b, r))
                .collect::<Result<_, _>>()?;
            let tau_coords: Option<Vec<Q>> = match tau {
                Some(s) => Some(
                    s.split(',')
                        .map(parse_q)
                        .collect::<Result<Vec<_>, _>>()?,
                ),
                None => None,
            };
            let classified = lattice_vectors(&ctx, &ks);
            let rows: Vec<Value> = classified
                .iter()
                .map(|lv| {
                    let period = period_form(&ctx, &lv.vector).ok().map(|form| {
                        let twisted: Vec<Value> = form
                            .twisted_linear
                            .iter()
                            .map(|(v, c)| json!({"sector": v, "coeff": c_json(c, prec)}))
                            .collect();
                        let curve: Vec<Value> =
                            form.curve_class.iter().map(|c| c_json(c, prec)).collect();
                        let curve_cap_tau = tau_coords.as_ref().map(|tc| {
                            let xi: Vec<i64> = (0..r)
                                .map(|a| {
                                    // integer part only enters the display
                                    tc.get(a)
                                        .map(|x| {
                                            x.to_integer()
                                                .to_string()
                                                .parse::<i64>()
                                                .unwrap_or(0)
                                        })
                                        .unwrap_or(0)
                                })
                                .collect();
                            c_json(&curve_pairing(&ctx, &lv.vector, &xi), prec)
                        });
                        json!({
                            "const": c_json(&form.const_term, prec),
                            "const_rational": form
                                .const_rational
                                .as_ref()
                                .map(q_to_string),
                            "twisted_linear": twisted,
                            "curve_class": curve,
                            "curve_cap_tau": curve_cap_tau,
                        })
                    });
                    json!({
                        "vector": class_json(&ctx, &lv.vector),
                        "in_vz1": lv.in_vz1,
                        "in_ker_h2": lv.in_ker_h2,
                        "filtration": lv.filtration,
                        "period": period,
                    })
                })
                .collect();
            emit(&json!({"vectors": rows, "prec": prec, "seed": seed}));
            Ok(ExitCode::SUCCESS)
        }
    }
}
