//! Exact cohomology rings of the inertia sectors: Groebner presentation of
//! each sector ring, structure constants over the standard-monomial basis,
//! Atiyah-Bott localization integrals with random-direction cross checks,
//! the orbifold Poincare pairing, and the Lefschetz sl2 operators.

use crate::exact::ratfun::{Poly, RatFun};
use crate::exact::{matq, qi, Q};
use crate::toric::{BoxSector, FanStructure, NefFrame};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("localization sum is not constant in the parameter after {0} retries")]
    NotConstant(u32),
    #[error("class is not homogeneous of the sector dimension: {0}")]
    DegreeMismatch(String),
    #[error("hard Lefschetz fails for the given degree-2 class")]
    HardLefschetzFails,
    #[error("no sl2 partner operator exists (inconsistent linear system)")]
    NoSl2Partner,
}

/// Exponent vector with degrevlex order (variables p_1 > p_2 > ...).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, a: usize) -> Self {
        let mut e = vec![0; nvars];
        e[a] = 1;
        Mono(e)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(x, y)| x + y).collect())
    }

    pub fn divides(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(x, y)| x <= y)
    }

    pub fn div(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(x, y)| x - y).collect())
    }

    pub fn lcm(&self, other: &Mono) -> Mono {
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| *x.max(y))
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        match self.degree().cmp(&other.degree()) {
            Equal => {}
            o => return o,
        }
        // degrevlex: with equal degree, the larger monomial has the SMALLER
        // exponent in the last position where they differ.
        for k in (0..self.0.len()).rev() {
            match self.0[k].cmp(&other.0[k]) {
                Equal => {}
                Less => return Greater,
                Greater => return Less,
            }
        }
        Equal
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate polynomial over Q in the sector generators.
#[derive(Debug, Clone, PartialEq)]
pub struct MPoly {
    pub terms: BTreeMap<Mono, Q>,
    pub nvars: usize,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            terms: BTreeMap::new(),
            nvars,
        }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.insert(Mono::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, a: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.insert(Mono::var(nvars, a), Q::one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn insert(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
            nvars: self.nvars,
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        let mut out = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.insert(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Q) -> MPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, x)| (m.clone(), x * c))
                .collect(),
            nvars: self.nvars,
        }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Q) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .map(|(m1, c1)| (m1.mul(m), c1 * c))
                .collect(),
            nvars: self.nvars,
        }
    }

    pub fn leading(&self) -> Option<(&Mono, &Q)> {
        self.terms.iter().next_back()
    }

    /// Homogeneous component of the given degree.
    pub fn component(&self, degree: u32) -> MPoly {
        MPoly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
            nvars: self.nvars,
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Full normal form modulo the (Groebner) basis.
    pub fn normal_form(&self, basis: &[MPoly]) -> MPoly {
        let mut rem = MPoly::zero(self.nvars);
        let mut work = self.clone();
        'outer: while let Some((lm, lc)) = work.leading().map(|(m, c)| (m.clone(), c.clone())) {
            for g in basis {
                let (glm, glc) = g.leading().expect("nonzero basis element");
                if glm.divides(&lm) {
                    let factor = lm.div(glm);
                    let coeff = &lc / glc;
                    work = work.sub(&g.mul_mono(&factor, &coeff));
                    continue 'outer;
                }
            }
            rem.insert(lm.clone(), lc.clone());
            work.terms.remove(&lm);
        }
        rem
    }
}

/// Buchberger's algorithm (degrevlex), with the coprime-leading-term skip.
pub fn groebner(gens: &[MPoly], _nvars: usize) -> Vec<MPoly> {
    let mut basis: Vec<MPoly> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    // normalize to monic
    for g in basis.iter_mut() {
        let lc = g.leading().unwrap().1.clone();
        *g = g.scale(&(Q::one() / lc));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..basis.len() {
        for j in 0..i {
            pairs.push((j, i));
        }
    }
    while let Some((i, j)) = pairs.pop() {
        let (fi, fj) = (&basis[i], &basis[j]);
        let (mi, _) = fi.leading().unwrap();
        let (mj, _) = fj.leading().unwrap();
        // coprime criterion
        if mi.mul(mj) == mi.lcm(mj) {
            continue;
        }
        let l = mi.lcm(mj);
        let s = fi
            .mul_mono(&l.div(mi), &Q::one())
            .sub(&fj.mul_mono(&l.div(mj), &Q::one()));
        let r = s.normal_form(&basis);
        if !r.is_zero() {
            let lc = r.leading().unwrap().1.clone();
            let r = r.scale(&(Q::one() / lc));
            for k in 0..basis.len() {
                pairs.push((k, basis.len()));
            }
            basis.push(r);
        }
    }
    // reduce the basis
    let copy = basis.clone();
    basis
        .iter()
        .enumerate()
        .filter_map(|(k, g)| {
            let others: Vec<MPoly> = copy
                .iter()
                .enumerate()
                .filter(|(t, _)| *t != k)
                .map(|(_, h)| h.clone())
                .collect();
            let r = g.normal_form(&others);
            if r.is_zero() {
                None
            } else {
                let lc = r.leading().unwrap().1.clone();
                Some(r.scale(&(Q::one() / lc)))
            }
        })
        .collect()
}

/// Presentation of H*(X_v): Groebner basis of the sector ideal, standard
/// monomials with degrees, multiplication table, and exact integrals of the
/// basis elements.
#[derive(Debug, Clone)]
pub struct SectorRing {
    pub sector_id: usize,
    pub nvars: usize,
    pub n_v: usize,
    pub groebner: Vec<MPoly>,
    pub basis: Vec<Mono>,
    /// Complex (half the cohomological) degree of each basis monomial.
    pub degrees: Vec<u32>,
    /// mult[i][j] = coordinates of basis_i * basis_j.
    pub mult: Vec<Vec<Vec<Q>>>,
    /// Exact integral of each basis monomial over the sector.
    pub integrals: Vec<Q>,
}

const LOCALIZATION_PRIMES: [i64; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97,
];

/// D-bar_i as a polynomial in the p-bar generators.
pub fn dbar(frame: &NefFrame, nvars: usize, i: usize) -> MPoly {
    let mut p = MPoly::zero(nvars);
    for a in 0..nvars {
        p.insert(Mono::var(nvars, a), frame.m_matrix[i][a].clone());
    }
    p
}

/// The sector ideal: products prod_{i in I} D-bar_i over minimal I inside
/// the fixing set whose complement in the fixing set is not an anticone.
fn sector_ideal(fan: &FanStructure, frame: &NefFrame, v: &BoxSector, nvars: usize) -> Vec<MPoly> {
    let fix = &v.fix;
    let mut forbidden: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1 << fix.len()) {
        let subset: Vec<usize> = (0..fix.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| fix[k])
            .collect();
        let complement: Vec<usize> = fix.iter().filter(|i| !subset.contains(i)).copied().collect();
        if !fan.anticones.contains(&complement) {
            // keep only inclusion-minimal subsets
            if !forbidden
                .iter()
                .any(|f| f.iter().all(|i| subset.contains(i)))
            {
                forbidden.retain(|f| !subset.iter().all(|i| f.contains(i)));
                forbidden.push(subset);
            }
        }
    }
    forbidden
        .iter()
        .map(|subset| {
            let mut p = MPoly::constant(nvars, Q::one());
            for &i in subset {
                p = p.mul(&dbar(frame, nvars, i));
            }
            p
        })
        .collect()
}

fn enumerate_monomials(nvars: usize, degree: u32) -> Vec<Mono> {
    fn rec(nvars: usize, degree: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Mono>) {
        if pos == nvars {
            if degree == 0 {
                out.push(Mono(cur.clone()));
            }
            return;
        }
        for e in 0..=degree {
            cur.push(e);
            rec(nvars, degree - e, pos + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(nvars, degree, 0, &mut Vec::new(), &mut out);
    out.sort();
    out
}

impl SectorRing {
    pub fn build(
        fan: &FanStructure,
        frame: &NefFrame,
        v: &BoxSector,
        seed: u64,
    ) -> Result<SectorRing, CohomologyError> {
        let nvars = frame.r_prime;
        let gens = sector_ideal(fan, frame, v, nvars);
        let gb = groebner(&gens, nvars);
        let mut basis: Vec<Mono> = Vec::new();
        for deg in 0..=(v.n_v as u32) {
            for m in enumerate_monomials(nvars, deg) {
                let standard = !gb
                    .iter()
                    .any(|g| g.leading().expect("nonzero").0.divides(&m));
                if standard {
                    basis.push(m);
                }
            }
        }
        // nothing standard above the top degree
        debug_assert!(enumerate_monomials(nvars, v.n_v as u32 + 1)
            .iter()
            .all(|m| gb.iter().any(|g| g.leading().unwrap().0.divides(m))));
        let degrees: Vec<u32> = basis.iter().map(|m| m.degree()).collect();
        let coords_of = |p: &MPoly| -> Vec<Q> {
            let nf = p.normal_form(&gb);
            basis
                .iter()
                .map(|m| nf.terms.get(m).cloned().unwrap_or_else(Q::zero))
                .collect()
        };
        let mut mult = vec![vec![Vec::new(); basis.len()]; basis.len()];
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                let mut p = MPoly::zero(nvars);
                p.insert(basis[i].mul(&basis[j]), Q::one());
                mult[i][j] = coords_of(&p);
            }
        }
        let mut ring = SectorRing {
            sector_id: v.id,
            nvars,
            n_v: v.n_v,
            groebner: gb,
            basis,
            degrees,
            mult,
            integrals: Vec::new(),
        };
        let integrals: Result<Vec<Q>, CohomologyError> = ring
            .basis
            .iter()
            .map(|m| {
                let mut p = MPoly::zero(nvars);
                p.insert(m.clone(), Q::one());
                integrate(fan, frame, v, &p, seed)
            })
            .collect();
        ring.integrals = integrals?;
        Ok(ring)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn coords(&self, p: &MPoly) -> Vec<Q> {
        let nf = p.normal_form(&self.groebner);
        self.basis
            .iter()
            .map(|m| nf.terms.get(m).cloned().unwrap_or_else(Q::zero))
            .collect()
    }

    pub fn cup_coords(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.dim()];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                for (k, c) in self.mult[i][j].iter().enumerate() {
                    out[k] += xi * yj * c;
                }
            }
        }
        out
    }

    pub fn integral_coords(&self, x: &[Q]) -> Q {
        x.iter()
            .zip(&self.integrals)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// One localization pass with a fixed direction vector c.
fn localize_once(
    fan: &FanStructure,
    frame: &NefFrame,
    v: &BoxSector,
    class: &MPoly,
    c: &[i64],
) -> RatFun {
    let data = &fan.data;
    let r = data.r;
    let mut total = RatFun::zero();
    for (idx, anticone) in fan.minimal_anticones.iter().enumerate() {
        if !anticone.iter().all(|i| v.fix.contains(i)) {
            continue; // fixed point not on this sector
        }
        // p-bar_a(sigma) = sum_{i in I} (M_I^{-1})_{a, pos} lambda_i,
        // lambda_i = c_i t.
        let sub: Vec<Vec<Q>> = anticone.iter().map(|&i| frame.m_matrix[i].clone()).collect();
        let minv = matq::inverse(&sub).expect("anticone rows invertible");
        let pbar: Vec<RatFun> = (0..r)
            .map(|a| {
                let lin: Q = anticone
                    .iter()
                    .enumerate()
                    .map(|(pos, &i)| minv[a][pos].clone() * qi(c[i]))
                    .sum();
                RatFun::from_poly(Poly::new(vec![Q::zero(), lin]))
            })
            .collect();
        // numerator: the class evaluated at the restrictions
        let mut num = RatFun::zero();
        for (m, coeff) in &class.terms {
            let mut term = RatFun::from_q(coeff.clone());
            for (a, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    term = term * pbar[a].clone();
                }
            }
            num = num + term;
        }
        // tangent Euler class over the sector's moving rays
        let mut euler = RatFun::one();
        for &j in &v.fix {
            if anticone.contains(&j) {
                continue;
            }
            let mut w = RatFun::zero();
            for a in 0..r {
                w = w + RatFun::from_q(frame.m_matrix[j][a].clone()) * pbar[a].clone();
            }
            w = w - RatFun::from_poly(Poly::new(vec![Q::zero(), qi(c[j])]));
            euler = euler * w;
        }
        let stab = Q::from_integer(fan.multiplicities[idx].clone());
        total = total + RatFun::from_q(Q::one() / stab) * num / euler;
    }
    total
}

fn draw_direction(m: usize, rng: &mut ChaCha8Rng) -> Vec<i64> {
    let mut primes = LOCALIZATION_PRIMES.to_vec();
    primes.shuffle(rng);
    primes[..m].to_vec()
}

/// Exact integral over the sector of a homogeneous class of complex degree
/// n_v (other degrees integrate to zero), with a two-direction cross check.
pub fn integrate(
    fan: &FanStructure,
    frame: &NefFrame,
    v: &BoxSector,
    class: &MPoly,
    seed: u64,
) -> Result<Q, CohomologyError> {
    let top = class.component(v.n_v as u32);
    if top.is_zero() {
        return Ok(Q::zero());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err = 0u32;
    for attempt in 0..3u32 {
        let c1 = draw_direction(fan.data.m, &mut rng);
        let c2 = draw_direction(fan.data.m, &mut rng);
        let f1 = localize_once(fan, frame, v, &top, &c1);
        let f2 = localize_once(fan, frame, v, &top, &c2);
        match (f1.constant_value(), f2.constant_value()) {
            (Ok(a), Ok(b)) if a == b => return Ok(a),
            _ => last_err = attempt + 1,
        }
    }
    Err(CohomologyError::NotConstant(last_err))
}

/// All sector rings of a stack plus the orbifold pairing.
pub struct OrbifoldCohomology {
    pub fan: FanStructure,
    pub frame: NefFrame,
    pub sectors: Vec<BoxSector>,
    pub rings: Vec<SectorRing>,
}

impl OrbifoldCohomology {
    pub fn build(
        fan: FanStructure,
        frame: NefFrame,
        sectors: Vec<BoxSector>,
        seed: u64,
    ) -> Result<Self, CohomologyError> {
        let rings = sectors
            .iter()
            .map(|v| SectorRing::build(&fan, &frame, v, seed))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(OrbifoldCohomology {
            fan,
            frame,
            sectors,
            rings,
        })
    }

    /// Total dimension of H*_orb.
    pub fn total_dim(&self) -> usize {
        self.rings.iter().map(|r| r.dim()).sum()
    }

    /// Orbifold Poincare pairing of classes given as per-sector coordinate
    /// vectors: sum_v int_{X_v} a_v cup b_{inv(v)} (the generators restrict
    /// identically on a sector and its inverse).
    pub fn poincare_pairing(&self, a: &[Vec<Q>], b: &[Vec<Q>]) -> Q {
        let mut total = Q::zero();
        for (vid, ring) in self.rings.iter().enumerate() {
            let inv = self.sectors[vid].inv;
            let cup = ring.cup_coords(&a[vid], &b[inv]);
            total += ring.integral_coords(&cup);
        }
        total
    }

    /// Gram matrix of the pairing over the concatenated standard basis.
    pub fn pairing_gram(&self) -> Vec<Vec<Q>> {
        let dims: Vec<usize> = self.rings.iter().map(|r| r.dim()).collect();
        let total: usize = dims.iter().sum();
        let offset: Vec<usize> = dims
            .iter()
            .scan(0usize, |acc, d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let mut gram = vec![vec![Q::zero(); total]; total];
        for (vid, ring) in self.rings.iter().enumerate() {
            let w = self.sectors[vid].inv;
            for i in 0..ring.dim() {
                for j in 0..self.rings[w].dim() {
                    let mut av: Vec<Vec<Q>> = self
                        .rings
                        .iter()
                        .map(|r2| vec![Q::zero(); r2.dim()])
                        .collect();
                    av[vid][i] = Q::one();
                    let mut bv: Vec<Vec<Q>> = self
                        .rings
                        .iter()
                        .map(|r2| vec![Q::zero(); r2.dim()])
                        .collect();
                    bv[w][j] = Q::one();
                    gram[offset[vid] + i][offset[w] + j] = self.poincare_pairing(&av, &bv);
                }
            }
        }
        gram
    }
}

/// Lefschetz sl2 data on one sector ring.
pub struct Sl2 {
    pub a: Vec<Vec<Q>>,
    pub a_dag: Vec<Vec<Q>>,
    pub h: Vec<Vec<Q>>,
}

/// Build the sl2 triple for cup product with a degree-2 class (coordinates
/// of omega in the ring), verifying hard Lefschetz first.
pub fn lefschetz_sl2(ring: &SectorRing, omega: &[Q]) -> Result<Sl2, CohomologyError> {
    let dim = ring.dim();
    // cup-with-omega matrix
    let mut a = vec![vec![Q::zero(); dim]; dim];
    for j in 0..dim {
        let mut e = vec![Q::zero(); dim];
        e[j] = Q::one();
        let col = ring.cup_coords(omega, &e);
        for i in 0..dim {
            a[i][j] = col[i].clone();
        }
    }
    // h = real degree - n_v = 2 deg_j - n_v, diagonal
    let mut h = vec![vec![Q::zero(); dim]; dim];
    for j in 0..dim {
        h[j][j] = qi(2 * ring.degrees[j] as i64 - ring.n_v as i64);
    }
    // hard Lefschetz: a^k restricted to (real) degree n_v - k is injective
    // onto degree n_v + k
    for k in 1..=(ring.n_v as i64) {
        let lower: Vec<usize> = (0..dim)
            .filter(|&j| 2 * ring.degrees[j] as i64 == ring.n_v as i64 - k)
            .collect();
        let upper: Vec<usize> = (0..dim)
            .filter(|&j| 2 * ring.degrees[j] as i64 == ring.n_v as i64 + k)
            .collect();
        if lower.is_empty() {
            continue;
        }
        if lower.len() != upper.len() {
            return Err(CohomologyError::HardLefschetzFails);
        }
        let ak = mat_pow(&a, k as usize);
        let block: Vec<Vec<Q>> = upper
            .iter()
            .map(|&i| lower.iter().map(|&j| ak[i][j].clone()).collect())
            .collect();
        if matq::rank(&block) != lower.len() {
            return Err(CohomologyError::HardLefschetzFails);
        }
    }
    // solve for a_dag: [a, x] = h and [h, x] = -2x, entrywise linear system
    let unknowns = dim * dim;
    let mut rows: Vec<Vec<Q>> = Vec::new();
    let mut rhs: Vec<Q> = Vec::new();
    let idx = |p: usize, q: usize| p * dim + q;
    for p in 0..dim {
        for q in 0..dim {
            // (a x - x a)_{pq} = h_{pq}
            let mut row = vec![Q::zero(); unknowns];
            for t in 0..dim {
                row[idx(t, q)] += a[p][t].clone();
                row[idx(p, t)] -= a[t][q].clone();
            }
            rows.push(row);
            rhs.push(h[p][q].clone());
            // (h x - x h)_{pq} = -2 x_{pq}
            let mut row2 = vec![Q::zero(); unknowns];
            row2[idx(p, q)] = h[p][p].clone() - h[q][q].clone() + qi(2);
            rows.push(row2);
            rhs.push(Q::zero());
        }
    }
    let sol = matq::solve(&rows, &rhs).ok_or(CohomologyError::NoSl2Partner)?;
    let mut a_dag = vec![vec![Q::zero(); dim]; dim];
    for p in 0..dim {
        for q in 0..dim {
            a_dag[p][q] = sol[idx(p, q)].clone();
        }
    }
    Ok(Sl2 { a, a_dag, h })
}

pub fn mat_pow(a: &[Vec<Q>], k: usize) -> Vec<Vec<Q>> {
    let mut out = matq::identity(a.len());
    for _ in 0..k {
        out = matq::mul(&out, &a.to_vec());
    }
    out
}

/// exp of a nilpotent matrix (series terminates).
pub fn mat_exp_nilpotent(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = a.len();
    let mut out = matq::identity(n);
    let mut pow = matq::identity(n);
    let mut fact = Q::one();
    for k in 1..=(n + 1) {
        pow = matq::mul(&pow, &a.to_vec());
        if pow.iter().all(|r| r.iter().all(|x| x.is_zero())) {
            break;
        }
        fact *= qi(k as i64);
        for i in 0..n {
            for j in 0..n {
                out[i][j] += &pow[i][j] / &fact;
            }
        }
    }
    out
}

/// Verify the Lefschetz-exponential identity: for u in a^j PH^{n_v-k-2j},
/// the top component of e^{-a} e^{a_dag} u equals
/// (-1)^{k+j} (j!/(k+j)!) a^k u. Returns the checked (k, j) pairs.
pub fn lefschetz_identity_check(ring: &SectorRing, sl2: &Sl2) -> Result<Vec<(usize, usize)>, CohomologyError> {
    let dim = ring.dim();
    let e = matq::mul(
        &mat_exp_nilpotent(&sl2.a.iter().map(|r| r.iter().map(|x| -x.clone()).collect()).collect::<Vec<_>>()),
        &mat_exp_nilpotent(&sl2.a_dag),
    );
    let mut checked = Vec::new();
    for k in 0..=ring.n_v {
        for j in 0..=ring.n_v {
            let lower = ring.n_v as i64 - k as i64 - 2 * j as i64;
            if lower < 0 || lower % 2 != 0 {
                continue;
            }
            // primitive part: ker(a^{k+2j+1}) on real degree `lower`
            let deg_idx: Vec<usize> = (0..dim)
                .filter(|&t| 2 * ring.degrees[t] as i64 == lower)
                .collect();
            if deg_idx.is_empty() {
                continue;
            }
            let apow = mat_pow(&sl2.a, k + 2 * j + 1);
            let restricted: Vec<Vec<Q>> = (0..dim)
                .map(|row| deg_idx.iter().map(|&c| apow[row][c].clone()).collect())
                .collect();
            let null = matq::null_space(&restricted);
            for nv in null {
                // u = a^j (primitive vector)
                let mut prim = vec![Q::zero(); dim];
                for (pos, &c) in deg_idx.iter().enumerate() {
                    prim[c] = nv[pos].clone();
                }
                let u = matq::mat_vec(&mat_pow(&sl2.a, j), &prim);
                if u.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let eu = matq::mat_vec(&e, &u);
                let aku = matq::mat_vec(&mat_pow(&sl2.a, k), &u);
                // coefficient (-1)^{k+j} j!/(k+j)!
                let mut coeff = Q::one();
                for t in 1..=j {
                    coeff *= qi(t as i64);
                }
                let mut denom = Q::one();
                for t in 1..=(k + j) {
                    denom *= qi(t as i64);
                }
                coeff /= denom;
                if (k + j) % 2 == 1 {
                    coeff = -coeff;
                }
                // compare components in real degree deg(u) + 2k
                let udeg = lower + 2 * j as i64;
                let top_deg = udeg + 2 * k as i64;
                for t in 0..dim {
                    if 2 * ring.degrees[t] as i64 == top_deg {
                        let lhs = eu[t].clone();
                        let rhs = &coeff * &aku[t];
                        if lhs != rhs {
                            return Err(CohomologyError::NoSl2Partner);
                        }
                    }
                }
                checked.push((k, j));
            }
        }
    }
    Ok(checked)
}
