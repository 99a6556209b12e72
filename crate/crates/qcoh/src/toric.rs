//! Combinatorics of toric orbifolds presented by divisor data: validation
//! of the stability conditions, anticone and fan enumeration, the quotient
//! lattice N with its ray images b_i, inertia (Box) sectors with ages, the
//! nef frame (basis, splitting, rho-hat coordinates), weak-Fano check, and
//! enumeration of effective classes.

use crate::exact::lp::{cone_member, LpError};
use crate::exact::snf::{snf, zmat_det, zmat_from_i64, ZMat};
use crate::exact::{ceil_q, frac, is_integer, matq, q_from_string, qi, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ToricError {
    #[error("stack is empty: eta is not in the open span of all divisors")]
    EmptyStack,
    #[error("not compact: nonzero c >= 0 with sum c_i D_i = 0 exists")]
    NotCompact,
    #[error("infinite stabilizer: anticone {0:?} does not span the dual lattice")]
    InfiniteStabilizer(Vec<usize>),
    #[error("eta lies on a wall (span of divisors {0:?}); supply generic eta")]
    EtaNotGeneric(Vec<usize>),
    #[error("input error: {0}")]
    Input(String),
    #[error("no unimodular nef basis found within the search bound")]
    NoNefBasis,
    #[error("non-nef basis: <p_{0}, d> = {1} < 0 during enumeration")]
    NonNefBasis(usize, String),
    #[error("lp failure: {0}")]
    Lp(#[from] LpError),
}

/// Raw JSON schema of a `*.toric.json` file.
#[derive(Debug, Deserialize)]
struct RawStackyData {
    rank: usize,
    divisors: Vec<Vec<i64>>,
    eta: Vec<String>,
    name: Option<String>,
}

/// The defining data: a rank-r lattice, m divisor classes (rows of `d`),
/// and the rational stability vector eta.
#[derive(Debug, Clone)]
pub struct StackyData {
    pub r: usize,
    pub m: usize,
    pub d: Vec<Vec<i64>>,
    pub eta: Vec<Q>,
    pub name: Option<String>,
}

impl StackyData {
    pub fn new(
        r: usize,
        d: Vec<Vec<i64>>,
        eta: Vec<Q>,
        name: Option<String>,
    ) -> Result<Self, ToricError> {
        if d.is_empty() {
            return Err(ToricError::Input("no divisors".into()));
        }
        if d.iter().any(|row| row.len() != r) {
            return Err(ToricError::Input("divisor row length != rank".into()));
        }
        if eta.len() != r {
            return Err(ToricError::Input("eta length != rank".into()));
        }
        let m = d.len();
        if m < r {
            return Err(ToricError::Input("fewer divisors than rank".into()));
        }
        Ok(StackyData { r, m, d, eta, name })
    }

    pub fn from_json(text: &str) -> Result<Self, ToricError> {
        let raw: RawStackyData =
            serde_json::from_str(text).map_err(|e| ToricError::Input(e.to_string()))?;
        let eta = raw
            .eta
            .iter()
            .map(|s| q_from_string(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(ToricError::Input)?;
        StackyData::new(raw.rank, raw.divisors, eta, raw.name)
    }

    /// Row i as a rational vector.
    pub fn d_row(&self, i: usize) -> Vec<Q> {
        self.d[i].iter().map(|&x| qi(x)).collect()
    }

    /// <D_i, d> for d in L tensor Q.
    pub fn pair(&self, i: usize, d: &[Q]) -> Q {
        self.d[i]
            .iter()
            .zip(d)
            .map(|(&c, x)| qi(c) * x)
            .sum()
    }

    /// rho-hat = sum of all D_i.
    pub fn rho_hat(&self) -> Vec<Q> {
        (0..self.r)
            .map(|a| self.d.iter().map(|row| qi(row[a])).sum())
            .collect()
    }
}

/// Image b_i of a ray generator in N = Z^m / im(D), split into the torsion
/// coordinates (mod the invariant factors > 1) and the free coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NElement {
    pub torsion: Vec<i64>,
    pub free: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct FanStructure {
    pub data: StackyData,
    /// All anticones, as sorted index subsets.
    pub anticones: Vec<Vec<usize>>,
    /// Inclusion-minimal anticones (each of size r for generic eta);
    /// these index the torus-fixed points / top cones.
    pub minimal_anticones: Vec<Vec<usize>>,
    /// mult(sigma_I) = [N : sum of Z b_i over i not in I] = |det D_I|.
    pub multiplicities: Vec<BigInt>,
    /// Free rank n = m - r of N.
    pub n: usize,
    /// Invariant factors of N greater than 1.
    pub torsion: Vec<BigInt>,
    pub b: Vec<NElement>,
    /// Count of genuine rays ({1..m} minus {i} is an anticone).
    pub m_prime: usize,
    /// Permutation of input indices putting genuine rays first (the input
    /// order is never changed; this records the renumbering).
    pub ray_order: Vec<usize>,
}

fn subsets(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0u32..(1 << m) {
        out.push((0..m).filter(|&i| mask >> i & 1 == 1).collect());
    }
    out
}

fn rows_rank(data: &StackyData, idx: &[usize]) -> usize {
    let rows: Vec<Vec<Q>> = idx.iter().map(|&i| data.d_row(i)).collect();
    matq::rank(&rows)
}

/// Validate conditions and build the stacky fan.
pub fn validate(data: &StackyData) -> Result<FanStructure, ToricError> {
    let m = data.m;
    let r = data.r;
    if rows_rank(data, &(0..m).collect::<Vec<_>>()) != r {
        return Err(ToricError::Input(
            "divisor rows do not span the dual lattice".into(),
        ));
    }
    let all_gens: Vec<Vec<Q>> = (0..m).map(|i| data.d_row(i)).collect();
    // (A): eta in the open span of all divisors.
    if !cone_member(&data.eta, &all_gens, true)? {
        return Err(ToricError::EmptyStack);
    }
    // (C): sum c_i D_i = 0 with c >= 0 forces c = 0. Equivalently the LP
    // max sum c_i subject to D^T c = 0, c >= 0 is bounded (with optimum 0,
    // since the feasible set is a cone containing c = 0).
    {
        let a: Vec<Vec<Q>> = (0..r)
            .map(|j| (0..m).map(|i| qi(data.d[i][j])).collect())
            .collect();
        let bvec = vec![Q::zero(); r];
        let c: Vec<Q> = vec![Q::one(); m];
        match crate::exact::lp::lp_max(&a, &bvec, &c)? {
            crate::exact::lp::LpOutcome::Optimal(v) if v.is_zero() => {}
            _ => return Err(ToricError::NotCompact),
        }
    }
    // Enumerate anticones.
    let mut anticones: Vec<Vec<usize>> = Vec::new();
    for s in subsets(m) {
        if s.is_empty() {
            continue;
        }
        let gens: Vec<Vec<Q>> = s.iter().map(|&i| data.d_row(i)).collect();
        if cone_member(&data.eta, &gens, true)? {
            anticones.push(s);
        }
    }
    // Genericity: eta must avoid every wall (span of a rank r-1 subset).
    for s in subsets(m) {
        if rows_rank(data, &s) != r.saturating_sub(1) {
            continue;
        }
        if r == 1 {
            // walls are the origin only
            if data.eta.iter().all(|x| x.is_zero()) {
                return Err(ToricError::EtaNotGeneric(s));
            }
            continue;
        }
        let mut rows: Vec<Vec<Q>> = s.iter().map(|&i| data.d_row(i)).collect();
        let rk = matq::rank(&rows);
        rows.push(data.eta.clone());
        if matq::rank(&rows) == rk {
            return Err(ToricError::EtaNotGeneric(s));
        }
    }
    // (B): every anticone spans the dual lattice rationally. (For generic
    // eta this cannot fail -- a rank-deficient anticone would put eta on a
    // wall -- but the condition is part of the contract, so keep the check.)
    for s in &anticones {
        if rows_rank(data, s) != r {
            return Err(ToricError::InfiniteStabilizer(s.clone()));
        }
    }
    let minimal_anticones: Vec<Vec<usize>> = anticones
        .iter()
        .filter(|s| {
            !anticones
                .iter()
                .any(|t| t.len() < s.len() && t.iter().all(|i| s.contains(i)))
        })
        .cloned()
        .collect();
    let multiplicities: Vec<BigInt> = minimal_anticones
        .iter()
        .map(|s| {
            let sub: Vec<Vec<i64>> = s.iter().map(|&i| data.d[i].clone()).collect();
            zmat_det(&zmat_from_i64(&sub)).abs()
        })
        .collect();
    // N = Z^m / D Z^r via Smith normal form of the m x r matrix D.
    let dmat: ZMat = zmat_from_i64(&data.d);
    let dec = snf(&dmat);
    debug_assert!(dec.check());
    let diag = dec.diagonal();
    let torsion: Vec<BigInt> = diag
        .iter()
        .filter(|x| !x.is_zero() && !x.is_one())
        .cloned()
        .collect();
    let n = m - r;
    // b_i = class of U e_i: coordinate k of U's column i, reduced mod d_k
    // for the torsion rows, free for rows >= r.
    let tor_rows: Vec<(usize, BigInt)> = diag
        .iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero() && !x.is_one())
        .map(|(k, x)| (k, x.clone()))
        .collect();
    let b: Vec<NElement> = (0..m)
        .map(|i| {
            let torsion = tor_rows
                .iter()
                .map(|(k, dk)| {
                    let v = dec.u[*k][i].clone() % dk;
                    let v = if v.sign() == num_bigint::Sign::Minus {
                        v + dk
                    } else {
                        v
                    };
                    v.to_i64().expect("torsion coordinate fits i64")
                })
                .collect();
            let free = (r..m)
                .map(|k| dec.u[k][i].to_i64().expect("free coordinate fits i64"))
                .collect();
            NElement { torsion, free }
        })
        .collect();
    // Genuine rays: {1..m} minus {i} is an anticone.
    let is_genuine: Vec<bool> = (0..m)
        .map(|i| {
            let s: Vec<usize> = (0..m).filter(|&j| j != i).collect();
            anticones.contains(&s)
        })
        .collect();
    let m_prime = is_genuine.iter().filter(|&&g| g).count();
    let mut ray_order: Vec<usize> = (0..m).filter(|&i| is_genuine[i]).collect();
    ray_order.extend((0..m).filter(|&i| !is_genuine[i]));
    Ok(FanStructure {
        data: data.clone(),
        anticones,
        minimal_anticones,
        multiplicities,
        n,
        torsion,
        b,
        m_prime,
        ray_order,
    })
}

impl FanStructure {
    /// Class in N of a fractional d: sum_i ceil(<D_i, d>) b_i.
    pub fn n_class(&self, d: &[Q]) -> NElement {
        let mut torsion = vec![0i64; self.torsion.len()];
        let mut free = vec![0i64; self.n];
        for i in 0..self.data.m {
            let c = ceil_q(&self.data.pair(i, d))
                .to_i64()
                .expect("ceiling fits i64");
            for (t, (bt, dk)) in torsion
                .iter_mut()
                .zip(self.b[i].torsion.iter().zip(self.torsion.iter()))
            {
                let dk = dk.to_i64().expect("invariant factor fits i64");
                *t = (*t + c * bt).rem_euclid(dk);
            }
            for (f, bf) in free.iter_mut().zip(self.b[i].free.iter()) {
                *f += c * bf;
            }
        }
        NElement { torsion, free }
    }

    /// |N_tor|.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    /// n! times the lattice volume of conv(b-bar_1..b-bar_m) in the free
    /// part of N; supported for n <= 2.
    pub fn scaled_volume(&self) -> Q {
        match self.n {
            0 => Q::one(),
            1 => {
                let xs: Vec<i64> = self.b.iter().map(|b| b.free[0]).collect();
                qi(xs.iter().max().unwrap() - xs.iter().min().unwrap())
            }
            2 => {
                // 2 * area of the convex hull via the shoelace formula on
                // the hull boundary (gift wrapping; m is tiny).
                let pts: Vec<(i64, i64)> = {
                    let mut p: Vec<(i64, i64)> =
                        self.b.iter().map(|b| (b.free[0], b.free[1])).collect();
                    p.sort();
                    p.dedup();
                    p
                };
                if pts.len() < 3 {
                    return Q::zero();
                }
                let hull = convex_hull(&pts);
                let mut twice_area: i64 = 0;
                for k in 0..hull.len() {
                    let (x1, y1) = hull[k];
                    let (x2, y2) = hull[(k + 1) % hull.len()];
                    twice_area += x1 * y2 - x2 * y1;
                }
                qi(twice_area.abs())
            }
            _ => panic!("scaled_volume implemented for n <= 2 only"),
        }
    }
}

fn convex_hull(pts: &[(i64, i64)]) -> Vec<(i64, i64)> {
    // Andrew's monotone chain; pts sorted and deduped.
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| -> i64 {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// One inertia sector.
#[derive(Debug, Clone)]
pub struct BoxSector {
    pub id: usize,
    /// Representative d in L tensor Q (mod L).
    pub d_rep: Vec<Q>,
    /// Fractional pairings {<D_i, d>} in [0,1), one per divisor; together
    /// with the class in N this identifies the sector uniquely.
    pub pairings_frac: Vec<Q>,
    pub v_class: NElement,
    /// Age iota_v = sum_i {-<D_i, d>}.
    pub age: Q,
    /// Fixing set {i : <D_i, d> integral}.
    pub fix: Vec<usize>,
    /// Dimension n_v = |fix| - r.
    pub n_v: usize,
    /// Index of the inverse sector in the Box list.
    pub inv: usize,
}

/// Enumerate Box via the fundamental domains of the dual lattices of the
/// top cones: for each minimal anticone I, the cosets of D_I^{-1} Z^r / Z^r.
pub fn box_sectors(fan: &FanStructure) -> Vec<BoxSector> {
    let data = &fan.data;
    let r = data.r;
    let mut seen: BTreeMap<(Vec<Q>, NElement), usize> = BTreeMap::new();
    let mut out: Vec<BoxSector> = Vec::new();
    for s in &fan.minimal_anticones {
        let sub: Vec<Vec<i64>> = s.iter().map(|&i| data.d[i].clone()).collect();
        let dec = snf(&zmat_from_i64(&sub));
        let diag = dec.diagonal();
        // D_I^{-1} Z^r / Z^r has representatives V (k_1/d_1, .., k_r/d_r).
        let mut counters = vec![BigInt::zero(); r];
        loop {
            let frac_coords: Vec<Q> = (0..r)
                .map(|a| Q::new(counters[a].clone(), diag[a].clone()))
                .collect();
            let d_rep: Vec<Q> = (0..r)
                .map(|row| {
                    (0..r)
                        .map(|col| Q::from_integer(dec.v[row][col].clone()) * &frac_coords[col])
                        .sum()
                })
                .collect();
            let pairings_frac: Vec<Q> = (0..data.m).map(|i| frac(&data.pair(i, &d_rep))).collect();
            let v_class = fan.n_class(&d_rep);
            let key = (pairings_frac.clone(), v_class.clone());
            if !seen.contains_key(&key) {
                let fix: Vec<usize> = (0..data.m)
                    .filter(|&i| is_integer(&data.pair(i, &d_rep)))
                    .collect();
                let age: Q = (0..data.m)
                    .map(|i| frac(&(-data.pair(i, &d_rep))))
                    .sum();
                let id = out.len();
                seen.insert(key, id);
                out.push(BoxSector {
                    id,
                    d_rep: d_rep.clone(),
                    pairings_frac,
                    v_class,
                    age,
                    fix: fix.clone(),
                    n_v: fix.len() - r,
                    inv: usize::MAX,
                });
            }
            // increment mixed-radix counter
            let mut a = 0;
            loop {
                if a == r {
                    break;
                }
                counters[a] += 1;
                if counters[a] < diag[a] {
                    break;
                }
                counters[a] = BigInt::zero();
                a += 1;
            }
            if a == r {
                break;
            }
        }
    }
    // inverse pointers: the sector of -d, identified by fractional pairings.
    let frac_key: Vec<Vec<Q>> = out.iter().map(|s| s.pairings_frac.clone()).collect();
    for id in 0..out.len() {
        let neg: Vec<Q> = out[id].d_rep.iter().map(|x| -x.clone()).collect();
        let negfrac: Vec<Q> = (0..fan.data.m)
            .map(|i| frac(&fan.data.pair(i, &neg)))
            .collect();
        let inv = frac_key
            .iter()
            .position(|k| k == &negfrac)
            .expect("inverse sector present");
        out[id].inv = inv;
    }
    // untwisted sector first, then by (age, pairings) for determinism
    out.sort_by(|x, y| {
        (x.age.clone(), x.pairings_frac.clone()).cmp(&(y.age.clone(), y.pairings_frac.clone()))
    });
    let relabel: BTreeMap<Vec<Q>, usize> = out
        .iter()
        .enumerate()
        .map(|(new, s)| (s.pairings_frac.clone(), new))
        .collect();
    let old_frac = frac_key;
    for (new_id, s) in out.iter_mut().enumerate() {
        s.id = new_id;
        let inv_frac = &old_frac[s.inv];
        s.inv = relabel[inv_frac];
    }
    out
}

/// Age f_v(xi) = {-<xi, d>} of the line bundle L_xi on sector v.
pub fn age_of_line_bundle(xi: &[i64], v: &BoxSector) -> Q {
    let pairing: Q = xi
        .iter()
        .zip(&v.d_rep)
        .map(|(&c, x)| qi(c) * x)
        .sum();
    frac(&(-pairing))
}

/// Deterministic nef frame.
#[derive(Debug, Clone)]
pub struct NefFrame {
    /// Basis p_1..p_r of the dual lattice, rows, each in cl(C-tilde).
    pub p: Vec<Vec<i64>>,
    /// m x r matrix with D_i = sum_a m_matrix[i][a] p_a (integer entries).
    pub m_matrix: Vec<Vec<Q>>,
    /// Splitting p_a = sum_i D_i ell[i][a], supported on the first minimal
    /// anticone.
    pub ell: Vec<Vec<Q>>,
    /// Alternative splitting supported on the last minimal anticone (used
    /// to check splitting-independence of downstream quantities).
    pub ell_alt: Vec<Vec<Q>>,
    /// rho-hat in dual-lattice coordinates and in the p basis.
    pub rho_hat: Vec<Q>,
    pub rho_coords: Vec<Q>,
    /// Rank of the genuine part (= r when all rays are genuine).
    pub r_prime: usize,
}

/// Search for the lexicographically smallest unimodular basis of the dual
/// lattice inside cl(C-tilde) (intersection of the closed anticone spans).
pub fn nef_frame(fan: &FanStructure) -> Result<NefFrame, ToricError> {
    let data = &fan.data;
    let r = data.r;
    if fan.m_prime != data.m {
        // The r' < r branch (non-genuine rays) is not needed by any shipped
        // fixture; reject loudly rather than return a wrong frame.
        return Err(ToricError::Input(
            "nef frame for non-genuine rays not supported".into(),
        ));
    }
    let in_closure = |x: &[Q]| -> Result<bool, ToricError> {
        for s in &fan.minimal_anticones {
            let gens: Vec<Vec<Q>> = s.iter().map(|&i| data.d_row(i)).collect();
            if !cone_member(x, &gens, false)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    // Candidate vectors with coordinates in [-k, k], in lex order, that lie
    // in the closed extended cone.
    for k in 1i64..=6 {
        let mut candidates: Vec<Vec<i64>> = Vec::new();
        let mut v = vec![-k; r];
        loop {
            if v.iter().any(|&x| x != 0) {
                let vq: Vec<Q> = v.iter().map(|&x| qi(x)).collect();
                if in_closure(&vq)? {
                    candidates.push(v.clone());
                }
            }
            let mut a = r;
            loop {
                if a == 0 {
                    break;
                }
                a -= 1;
                v[a] += 1;
                if v[a] <= k {
                    break;
                }
                v[a] = -k;
                if a == 0 {
                    a = usize::MAX;
                    break;
                }
            }
            if a == usize::MAX {
                break;
            }
        }
        candidates.sort();
        // Backtracking search for an unimodular subset, preferring lex
        // smaller vectors in earlier positions.
        fn pick(
            cands: &[Vec<i64>],
            start: usize,
            chosen: &mut Vec<Vec<i64>>,
            r: usize,
        ) -> bool {
            if chosen.len() == r {
                let det = zmat_det(&zmat_from_i64(chosen));
                return det.abs().is_one();
            }
            for c in start..cands.len() {
                chosen.push(cands[c].clone());
                let rows: Vec<Vec<Q>> = chosen
                    .iter()
                    .map(|row| row.iter().map(|&x| qi(x)).collect())
                    .collect();
                if matq::rank(&rows) == chosen.len() && pick(cands, c + 1, chosen, r) {
                    return true;
                }
                chosen.pop();
            }
            false
        }
        let mut chosen: Vec<Vec<i64>> = Vec::new();
        if pick(&candidates, 0, &mut chosen, r) {
            return build_frame(fan, chosen);
        }
    }
    Err(ToricError::NoNefBasis)
}

fn build_frame(fan: &FanStructure, p: Vec<Vec<i64>>) -> Result<NefFrame, ToricError> {
    let data = &fan.data;
    let r = data.r;
    let pq: Vec<Vec<Q>> = p
        .iter()
        .map(|row| row.iter().map(|&x| qi(x)).collect())
        .collect();
    // D = M P with P the basis matrix (rows p_a): M = D P^{-1}.
    let p_inv = matq::inverse(&pq).ok_or(ToricError::NoNefBasis)?;
    let dq: Vec<Vec<Q>> = (0..data.m).map(|i| data.d_row(i)).collect();
    let m_matrix = matq::mul(&dq, &p_inv);
    let splitting = |anticone: &[usize]| -> Result<Vec<Vec<Q>>, ToricError> {
        // p_a = sum_{i in I} D_i ell_{ia}: the I-rows of M form an r x r
        // invertible matrix; ell on I is its inverse (transposed layout).
        let sub: Vec<Vec<Q>> = anticone.iter().map(|&i| m_matrix[i].clone()).collect();
        let inv = matq::inverse(&sub).ok_or(ToricError::NoNefBasis)?;
        let mut ell = vec![vec![Q::zero(); r]; data.m];
        for (pos, &i) in anticone.iter().enumerate() {
            for a in 0..r {
                ell[i][a] = inv[a][pos].clone();
            }
        }
        Ok(ell)
    };
    let first = fan.minimal_anticones.first().ok_or(ToricError::EmptyStack)?;
    let last = fan.minimal_anticones.last().ok_or(ToricError::EmptyStack)?;
    let ell = splitting(first)?;
    let ell_alt = splitting(last)?;
    let rho_hat = data.rho_hat();
    let rho_coords = matq::mat_vec(&matq::transpose(&p_inv), &rho_hat);
    Ok(NefFrame {
        p,
        m_matrix,
        ell,
        ell_alt,
        rho_hat,
        rho_coords,
        r_prime: r,
    })
}

/// Weak-Fano report.
#[derive(Debug, Clone)]
pub struct WeakFanoReport {
    pub rho_hat_in_cl_ctilde: bool,
    pub rho_nef: bool,
    pub ages_of_bj: Vec<Q>,
}

pub fn weak_fano_check(fan: &FanStructure, frame: &NefFrame) -> Result<WeakFanoReport, ToricError> {
    let data = &fan.data;
    let mut in_cl = true;
    for s in &fan.minimal_anticones {
        let gens: Vec<Vec<Q>> = s.iter().map(|&i| data.d_row(i)).collect();
        if !cone_member(&frame.rho_hat, &gens, false)? {
            in_cl = false;
            break;
        }
    }
    // With all rays genuine, C = C-tilde and rho = rho-hat; ages of the
    // non-genuine b_j are an empty list.
    let ages_of_bj: Vec<Q> = Vec::new();
    let rho_nef = in_cl;
    // Consistency: rho-hat in cl(C-tilde) iff rho nef and all ages <= 1.
    assert_eq!(
        in_cl,
        rho_nef && ages_of_bj.iter().all(|a| *a <= Q::one())
    );
    Ok(WeakFanoReport {
        rho_hat_in_cl_ctilde: in_cl,
        rho_nef,
        ages_of_bj,
    })
}

/// One effective class with its sector tag.
#[derive(Debug, Clone, PartialEq)]
pub struct EffClass {
    pub d: Vec<Q>,
    /// |d| = sum_a <p_a, d>.
    pub degree: Q,
    /// Fractional pairings identifying the sector v(d).
    pub sector_frac: Vec<Q>,
}

/// Enumerate K_eff up to |d| <= bound.
pub fn keff_enumerate(
    fan: &FanStructure,
    frame: &NefFrame,
    bound: &Q,
) -> Result<Vec<EffClass>, ToricError> {
    let data = &fan.data;
    let r = data.r;
    let mut found: Vec<EffClass> = Vec::new();
    let degree_of = |d: &[Q]| -> Result<Q, ToricError> {
        let mut total = Q::zero();
        for (a, pa) in frame.p.iter().enumerate() {
            let val: Q = pa.iter().zip(d).map(|(&c, x)| qi(c) * x).sum();
            if val < Q::zero() {
                return Err(ToricError::NonNefBasis(a, crate::exact::q_to_string(&val)));
            }
            total += val;
        }
        Ok(total)
    };
    for s in &fan.minimal_anticones {
        let sub: Vec<Vec<Q>> = s.iter().map(|&i| data.d_row(i)).collect();
        let inv = matq::inverse(&sub).ok_or(ToricError::EmptyStack)?;
        // d = D_I^{-1} n over integer n_i >= 0; the degree weights of the
        // unit steps bound the search.
        let cols: Vec<Vec<Q>> = (0..r)
            .map(|i| (0..r).map(|row| inv[row][i].clone()).collect())
            .collect();
        let weights: Vec<Q> = cols
            .iter()
            .map(|col| {
                frame
                    .p
                    .iter()
                    .map(|pa| -> Q { pa.iter().zip(col).map(|(&c, x)| qi(c) * x).sum() })
                    .sum()
            })
            .collect();
        if weights.iter().any(|w| *w <= Q::zero()) {
            // degree does not control the search in this chart; skip with
            // the weak-Fano caveat (cannot happen for nef frames on the
            // shipped fixtures)
            continue;
        }
        let caps: Vec<i64> = weights
            .iter()
            .map(|w| {
                let max = bound / w;
                max.floor().to_integer().to_i64().unwrap_or(0)
            })
            .collect();
        let mut counter = vec![0i64; r];
        loop {
            let d: Vec<Q> = (0..r)
                .map(|row| {
                    (0..r)
                        .map(|i| cols[i][row].clone() * qi(counter[i]))
                        .sum()
                })
                .collect();
            let degree = degree_of(&d)?;
            if degree <= *bound {
                // membership: {i : <D_i, d> in Z_{>=0}} must be an anticone
                let members: Vec<usize> = (0..data.m)
                    .filter(|&i| {
                        let v = data.pair(i, &d);
                        is_integer(&v) && v >= Q::zero()
                    })
                    .collect();
                let ok = fan
                    .anticones
                    .iter()
                    .any(|ac| ac == &members);
                if ok && !found.iter().any(|e| e.d == d) {
                    let sector_frac: Vec<Q> =
                        (0..data.m).map(|i| frac(&data.pair(i, &d))).collect();
                    found.push(EffClass {
                        d,
                        degree,
                        sector_frac,
                    });
                }
            }
            let mut a = 0;
            loop {
                if a == r {
                    break;
                }
                counter[a] += 1;
                if counter[a] <= caps[a] {
                    break;
                }
                counter[a] = 0;
                a += 1;
            }
            if a == r {
                break;
            }
        }
    }
    found.sort_by(|x, y| (x.degree.clone(), x.d.clone()).partial_cmp(&(y.degree.clone(), y.d.clone())).unwrap());
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qq;

    pub fn p1() -> StackyData {
        StackyData::new(1, vec![vec![1], vec![1]], vec![qi(1)], Some("p1".into())).unwrap()
    }

    pub fn p12() -> StackyData {
        StackyData::new(1, vec![vec![1], vec![2]], vec![qi(1)], Some("p12".into())).unwrap()
    }

    pub fn p112() -> StackyData {
        StackyData::new(
            1,
            vec![vec![1], vec![1], vec![2]],
            vec![qi(1)],
            Some("p112".into()),
        )
        .unwrap()
    }

    pub fn f3() -> StackyData {
        StackyData::new(
            2,
            vec![vec![1, 0], vec![-3, 1], vec![1, 0], vec![0, 1]],
            vec![qi(1), qi(1)],
            Some("f3".into()),
        )
        .unwrap()
    }

    #[test]
    fn validate_p1() {
        let fan = validate(&p1()).unwrap();
        assert_eq!(fan.anticones.len(), 3); // {1},{2},{1,2}
        assert_eq!(fan.minimal_anticones.len(), 2);
        assert!(fan.torsion.is_empty());
        assert_eq!(fan.n, 1);
        assert_eq!(fan.m_prime, 2);
        assert!(fan.multiplicities.iter().all(|x| x.is_one()));
        // b_1 = -b_2, both primitive
        assert_eq!(fan.b[0].free[0], -fan.b[1].free[0]);
        assert_eq!(fan.b[0].free[0].abs(), 1);
    }

    #[test]
    fn validate_rejects_noncompact() {
        let bad = StackyData::new(1, vec![vec![1], vec![-1]], vec![qi(1)], None).unwrap();
        assert!(matches!(validate(&bad), Err(ToricError::NotCompact)));
    }

    #[test]
    fn validate_rejects_empty_stack() {
        let bad = StackyData::new(1, vec![vec![1], vec![2]], vec![qi(-1)], None).unwrap();
        assert!(matches!(validate(&bad), Err(ToricError::EmptyStack)));
    }

    #[test]
    fn validate_rejects_eta_on_wall() {
        // Hirzebruch divisor data with eta on the y-axis wall (span of D_4).
        let bad = StackyData::new(
            2,
            vec![vec![1, 0], vec![-3, 1], vec![1, 0], vec![0, 1]],
            vec![qi(0), qi(1)],
            None,
        )
        .unwrap();
        assert!(matches!(validate(&bad), Err(ToricError::EtaNotGeneric(_))));
    }

    #[test]
    fn validate_p112() {
        let fan = validate(&p112()).unwrap();
        assert_eq!(fan.n, 2);
        assert!(fan.torsion.is_empty());
        assert_eq!(fan.minimal_anticones.len(), 3);
        let mut mults: Vec<i64> = fan
            .multiplicities
            .iter()
            .map(|x| x.to_i64().unwrap())
            .collect();
        mults.sort();
        assert_eq!(mults, vec![1, 1, 2]);
        // sum of multiplicities = |N_tor| n! Vol
        let total: i64 = mults.iter().sum();
        assert_eq!(qi(total), fan.scaled_volume() * Q::from_integer(fan.torsion_order()));
    }

    #[test]
    fn box_p1_trivial() {
        let fan = validate(&p1()).unwrap();
        let sectors = box_sectors(&fan);
        assert_eq!(sectors.len(), 1);
        assert!(sectors[0].age.is_zero());
        assert_eq!(sectors[0].n_v, 1);
        assert_eq!(sectors[0].inv, 0);
    }

    #[test]
    fn box_p12() {
        let fan = validate(&p12()).unwrap();
        let sectors = box_sectors(&fan);
        assert_eq!(sectors.len(), 2);
        assert!(sectors[0].age.is_zero());
        assert_eq!(sectors[1].age, qq(1, 2));
        assert_eq!(sectors[1].n_v, 0);
        assert_eq!(sectors[1].inv, 1); // self-inverse (Z/2)
        assert_eq!(sectors[1].fix, vec![1]);
    }

    #[test]
    fn box_p112() {
        let fan = validate(&p112()).unwrap();
        let sectors = box_sectors(&fan);
        assert_eq!(sectors.len(), 2);
        assert_eq!(sectors[1].age, qi(1));
        assert_eq!(sectors[1].n_v, 0);
        // iota_v + iota_inv(v) = n - n_v on all sectors
        for s in &sectors {
            let inv = &sectors[s.inv];
            assert_eq!(
                s.age.clone() + inv.age.clone(),
                qi(fan.n as i64 - s.n_v as i64)
            );
        }
    }

    #[test]
    fn age_of_bundles() {
        let fan = validate(&p12()).unwrap();
        let sectors = box_sectors(&fan);
        assert!(age_of_line_bundle(&[5], &sectors[0]).is_zero());
        assert_eq!(age_of_line_bundle(&[1], &sectors[1]), qq(1, 2));
        let fan2 = validate(&p112()).unwrap();
        let sectors2 = box_sectors(&fan2);
        // xi = D_3 = 2: {-2 * 1/2} = 0
        assert!(age_of_line_bundle(&[2], &sectors2[1]).is_zero());
        // f_v(xi) + f_inv(v)(xi) in {0, 1}
        for s in &sectors2 {
            let f = age_of_line_bundle(&[1], s);
            let g = age_of_line_bundle(&[1], &sectors2[s.inv]);
            let sum = f.clone() + g;
            assert!(sum.is_zero() || sum.is_one());
        }
    }

    #[test]
    fn nef_frame_p1_and_weak_fano() {
        let fan = validate(&p1()).unwrap();
        let frame = nef_frame(&fan).unwrap();
        assert_eq!(frame.p, vec![vec![1]]);
        assert_eq!(frame.rho_hat, vec![qi(2)]);
        let report = weak_fano_check(&fan, &frame).unwrap();
        assert!(report.rho_hat_in_cl_ctilde);
        // splitting really splits: sum_i D_i ell_i = p
        for a in 0..1 {
            let recon: Q = (0..2).map(|i| qi(fan.data.d[i][0]) * &frame.ell[i][a]).sum();
            assert_eq!(recon, qi(frame.p[a][0]));
        }
    }

    #[test]
    fn weak_fano_p112_true_f3_false() {
        let fan = validate(&p112()).unwrap();
        let frame = nef_frame(&fan).unwrap();
        assert_eq!(frame.rho_hat, vec![qi(4)]);
        assert!(weak_fano_check(&fan, &frame).unwrap().rho_hat_in_cl_ctilde);

        let fan3 = validate(&f3()).unwrap();
        let frame3 = nef_frame(&fan3).unwrap();
        assert_eq!(frame3.rho_hat, vec![qi(-1), qi(2)]);
        assert!(!weak_fano_check(&fan3, &frame3).unwrap().rho_hat_in_cl_ctilde);
        // m-matrix is integral and reconstructs D
        for i in 0..4 {
            for a in 0..2 {
                assert!(is_integer(&frame3.m_matrix[i][a]));
            }
        }
    }

    #[test]
    fn keff_examples() {
        let fan = validate(&p1()).unwrap();
        let frame = nef_frame(&fan).unwrap();
        let eff = keff_enumerate(&fan, &frame, &qi(2)).unwrap();
        let ds: Vec<Q> = eff.iter().map(|e| e.d[0].clone()).collect();
        assert_eq!(ds, vec![qi(0), qi(1), qi(2)]);

        let fan2 = validate(&p12()).unwrap();
        let frame2 = nef_frame(&fan2).unwrap();
        let eff2 = keff_enumerate(&fan2, &frame2, &qi(1)).unwrap();
        let ds2: Vec<Q> = eff2.iter().map(|e| e.d[0].clone()).collect();
        assert_eq!(ds2, vec![qi(0), qq(1, 2), qi(1)]);
        // v(d + l) = v(d): sector tags repeat with period 1
        let eff2b = keff_enumerate(&fan2, &frame2, &qi(2)).unwrap();
        let by_d: BTreeMap<Vec<Q>, Vec<Q>> = eff2b
            .iter()
            .map(|e| (e.d.clone(), e.sector_frac.clone()))
            .collect();
        assert_eq!(by_d[&vec![qq(1, 2)]], by_d[&vec![qq(3, 2)]]);

        let fan3 = validate(&p112()).unwrap();
        let frame3 = nef_frame(&fan3).unwrap();
        let eff3 = keff_enumerate(&fan3, &frame3, &qi(1)).unwrap();
        let ds3: Vec<Q> = eff3.iter().map(|e| e.d[0].clone()).collect();
        assert_eq!(ds3, vec![qi(0), qq(1, 2), qi(1)]);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"rank": 1, "divisors": [[1],[1],[2]], "eta": ["1"], "name": "p112"}"#;
        let data = StackyData::from_json(text).unwrap();
        assert_eq!(data.m, 3);
        assert_eq!(data.eta, vec![qi(1)]);
        assert!(validate(&data).is_ok());
    }

    #[test]
    fn volume_dimension_count() {
        // sum over sectors of dim H*(X_v) = |N_tor| n! Vol for weak-Fano
        for data in [p1(), p12(), p112()] {
            let fan = validate(&data).unwrap();
            let sectors = box_sectors(&fan);
            // dim H*(X_v) for these fixtures: n_v + 1 (projective spaces /
            // weighted lines and points)
            let total: i64 = sectors.iter().map(|s| s.n_v as i64 + 1).sum();
            assert_eq!(
                qi(total),
                fan.scaled_volume() * Q::from_integer(fan.torsion_order())
            );
        }
    }
}
