//! Support extraction from marker digits, exact Vandermonde solves, brute-force
//! search over finite classes, solution certification and rounding-depth scans.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::rational::rational_opt_str;
use crate::exactnum::{BallComplex, CyclotomicNumber, GaussianRational, Rational};
use crate::rounding::{digit, enumerate_class, round_signal, zeta_encode, ClassSpec, EncodingSpec, RoundingSpec};
use crate::signal::Signal;
use crate::spectral::{dft_sum, transform_order, Domain, ModulationSpec, ObservationMap, ObservedValue, SpectrumObservation};

/// Precision escalation: start at `start` bits and double up to `cap`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionPolicy {
    pub start: u32,
    pub cap: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { start: 64, cap: 1 << 14 }
    }
}

impl PrecisionPolicy {
    pub fn with_cap(cap: u32) -> Self {
        PrecisionPolicy { start: 64.min(cap), cap }
    }

    /// `start, 2 start, ...` up to and including `cap`.
    pub fn steps(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut p = self.start.max(2);
        while p < self.cap {
            out.push(p);
            p = p.saturating_mul(2);
        }
        out.push(self.cap.max(2));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Every observation equation holds in exact arithmetic.
    ExactMatch,
    /// Every enclosure is consistent with the observed values at this precision.
    BallVerified { precision: u32 },
    Undecided,
    /// Some equation fails: an exact mismatch or disjoint enclosures.
    Rejected,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certificate::ExactMatch | Certificate::BallVerified { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub signal: Signal,
    pub certificate: Certificate,
    pub candidates_examined: u64,
    /// All survivors when the certificate is undecided.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub survivors: Vec<Signal>,
}

/// Component sum given exactly or as an enclosure.
#[derive(Clone, Copy, Debug)]
pub enum TotalValue<'a> {
    Exact(&'a GaussianRational),
    Ball(&'a BallComplex),
}

/// Support read from the marker digits of `Re total`.
pub fn support_from_sum(total: TotalValue<'_>, enc: &EncodingSpec, sparsity: usize) -> Result<Vec<usize>> {
    let nu = enc.nu;
    let depth = enc.big_m as usize + enc.n;
    let grid_scale = num_traits::pow(BigInt::from(nu), depth);
    let re = match total {
        TotalValue::Exact(z) => z.re.clone(),
        TotalValue::Ball(b) => {
            // radius must stay below half a step at position M+N+1
            let limit = Rational::new(BigInt::one(), &grid_scale * BigInt::from(2 * nu));
            if b.radius.to_rational() >= limit {
                return Err(Error::BallTooWide);
            }
            let mid = b.mid_re.to_rational() * Rational::from_integer(grid_scale.clone());
            let snapped = Rational::new(mid.round().to_integer(), grid_scale.clone());
            if !b.re_ball().contains(&snapped) {
                return Err(Error::MalformedDigits("no grid point inside the enclosure".into()));
            }
            snapped
        }
    };
    if re.is_negative() {
        return Err(Error::MalformedDigits("negative real part".into()));
    }
    let scaled = &re * Rational::from_integer(grid_scale);
    if !scaled.is_integer() {
        return Err(Error::MalformedDigits(format!("nonzero digits past position {depth}")));
    }
    let mut support = Vec::new();
    for k in 0..enc.n {
        match digit(nu, enc.marker_position(k) as i64, &re)? {
            0 => {}
            1 => support.push(k),
            d => {
                return Err(Error::MalformedDigits(format!(
                    "digit {d} at marker position {}",
                    enc.marker_position(k)
                )))
            }
        }
    }
    if support.len() > sparsity {
        return Err(Error::SparsityExceeded { found: support.len(), bound: sparsity });
    }
    Ok(support)
}

/// Solved unknown, demoted to a Gaussian rational when possible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolvedComponent {
    Gaussian(GaussianRational),
    Cyclotomic(CyclotomicNumber),
}

impl SolvedComponent {
    fn from_cyclotomic(c: CyclotomicNumber) -> Self {
        match c.to_gaussian() {
            Some(z) => SolvedComponent::Gaussian(z),
            None => SolvedComponent::Cyclotomic(c),
        }
    }

    pub fn as_gaussian(&self) -> Option<&GaussianRational> {
        match self {
            SolvedComponent::Gaussian(z) => Some(z),
            SolvedComponent::Cyclotomic(_) => None,
        }
    }

    pub fn to_cyclotomic(&self, order: u64) -> CyclotomicNumber {
        match self {
            SolvedComponent::Gaussian(z) => {
                CyclotomicNumber::from_gaussian(order, z).expect("order divisible by 4")
            }
            SolvedComponent::Cyclotomic(c) => c.clone(),
        }
    }
}

/// Solves `values_j = sum_{t in T} zeta_N^{(u+j) t} x_t`, `j = 0..m-1`, exactly.
///
/// With `z_t = zeta_N^t` and `y_t = z_t^u x_t` the system is a plain Vandermonde
/// system in the nodes `z_t`; each `y_t` is the Lagrange functional at `z_t`
/// applied to the values.
pub fn vandermonde_solve(n: usize, u: usize, support: &[usize], values: &[CyclotomicNumber]) -> Result<Vec<SolvedComponent>> {
    let m = support.len();
    if values.len() != m {
        return Err(Error::InvalidArgument(format!("{m} unknowns but {} values", values.len())));
    }
    if u + m > n || support.iter().any(|&t| t >= n) {
        return Err(Error::InvalidArgument("window or support outside 0..N".into()));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let order = values.iter().fold(transform_order(n), |l, v| l.lcm(&v.order()));
    let step = (order / n as u64) as i64;
    let node = |t: usize| CyclotomicNumber::root_in(order, step * t as i64);
    let nodes: Vec<CyclotomicNumber> = support.iter().map(|&t| node(t)).collect();
    // master polynomial prod (z - z_s), coefficients low to high
    let mut master = vec![CyclotomicNumber::one(order)];
    for z in &nodes {
        let mut next = vec![CyclotomicNumber::zero(order); master.len() + 1];
        for (i, c) in master.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c);
            next[i] = next[i].sub(&c.mul(z));
        }
        master = next;
    }
    support
        .iter()
        .zip(&nodes)
        .map(|(&t, z)| {
            // quotient master / (z - z_t) by synthetic division
            let mut q = vec![CyclotomicNumber::zero(order); m];
            let mut carry = CyclotomicNumber::zero(order);
            for i in (1..=m).rev() {
                carry = master[i].add(&carry.mul(z));
                q[i - 1] = carry.clone();
            }
            let mut denom = CyclotomicNumber::zero(order);
            for c in q.iter().rev() {
                denom = denom.mul(z).add(c);
            }
            let inv = denom.inv().map_err(|_| Error::SingularSystem)?;
            let mut y = CyclotomicNumber::zero(order);
            for (c, v) in q.iter().zip(values) {
                y = y.add(&c.mul(v));
            }
            let x = y.mul(&inv).mul(&CyclotomicNumber::root_in(order, -step * (u * t) as i64));
            Ok(SolvedComponent::from_cyclotomic(x))
        })
        .collect()
}

/// Support and Vandermonde solve from exact sums at `omega = 0..S-1`, without
/// any membership check. Returns the support and the solved components.
pub fn sparse_estimate(
    n: usize,
    sums: &[CyclotomicNumber],
    enc: &EncodingSpec,
    sparsity: usize,
) -> Result<(Vec<usize>, Vec<SolvedComponent>)> {
    let total = sums
        .first()
        .ok_or_else(|| Error::InvalidArgument("no coefficient at omega = 0".into()))?
        .to_gaussian()
        .ok_or_else(|| Error::InconsistentObservation("coefficient at omega = 0 is not a Gaussian rational".into()))?;
    let support = support_from_sum(TotalValue::Exact(&total), enc, sparsity)?;
    if sums.len() < support.len() {
        return Err(Error::InvalidArgument("fewer coefficients than support elements".into()));
    }
    let solved = vandermonde_solve(n, 0, &support, &sums[..support.len()])?;
    Ok((support, solved))
}

/// Fourier coefficients `0..s-1` of an exact observation, in order.
fn leading_sums(obs: &SpectrumObservation, s: usize) -> Result<Vec<CyclotomicNumber>> {
    if obs.domain != Domain::Fourier {
        return Err(Error::InvalidArgument("sparse recovery needs a Fourier observation".into()));
    }
    let idx = obs.indices().unwrap();
    let order = transform_order(obs.n);
    (0..s)
        .map(|w| {
            let pos = idx
                .iter()
                .position(|&i| i == w)
                .ok_or_else(|| Error::InvalidArgument(format!("observation lacks coefficient {w}")))?;
            obs.values[pos]
                .to_cyclotomic(order)
                .ok_or_else(|| Error::InvalidArgument("sparse recovery needs exact values".into()))
        })
        .collect()
}

/// Support from the sum, then the exact solve, then validation.
pub fn recover_sparse(obs: &SpectrumObservation, enc: &EncodingSpec, sparsity: usize) -> Result<RecoveryResult> {
    if obs.n != enc.n {
        return Err(Error::InvalidArgument("observation length differs from encoding length".into()));
    }
    let s = sparsity.clamp(1, obs.n);
    let sums = leading_sums(obs, s)?;
    let (support, solved) = sparse_estimate(obs.n, &sums, enc, sparsity)?;
    let mut x = Signal::zeros(obs.n);
    for (&t, c) in support.iter().zip(&solved) {
        let z = c
            .as_gaussian()
            .ok_or_else(|| Error::InconsistentObservation(format!("component {t} is not a Gaussian rational")))?;
        x.components_mut()[t] = z.clone();
    }
    if x.support() != support {
        return Err(Error::InconsistentObservation("a marked component solved to zero".into()));
    }
    for (k, z) in x.iter().enumerate() {
        if zeta_encode(enc, k, z).ok().as_ref() != Some(z) {
            return Err(Error::InconsistentObservation(format!("component {k} is not a valid encoding")));
        }
    }
    let order = transform_order(obs.n);
    for (w, v) in obs.indices().unwrap().into_iter().zip(&obs.values) {
        if v.to_cyclotomic(order).as_ref() != Some(&dft_sum(&x, w)) {
            return Err(Error::InconsistentObservation(format!("coefficient {w} does not re-verify")));
        }
    }
    Ok(RecoveryResult { signal: x, certificate: Certificate::ExactMatch, candidates_examined: 1, survivors: Vec::new() })
}

fn exact_match(map: &ObservationMap, obs: &SpectrumObservation, v: &Signal) -> Option<bool> {
    let vals = map.exact_values(v)?;
    let mut all = true;
    for (a, b) in vals.iter().zip(&obs.values) {
        if !a.exact_eq(b)? {
            all = false;
        }
    }
    Some(all)
}

fn ball_consistent(map: &ObservationMap, obs: &SpectrumObservation, v: &Signal, p: u32) -> bool {
    map.ball_values(v, p)
        .iter()
        .zip(&obs.values)
        .all(|(c, o)| match o {
            ObservedValue::Exact(z) => c.contains_point(z),
            other => c.intersects(&other.to_ball(p)),
        })
}

/// Exhaustive search for class members whose trace matches `obs`.
pub fn recover_bruteforce(
    obs: &SpectrumObservation,
    class: &ClassSpec,
    modulation: Option<&ModulationSpec>,
    policy: &PrecisionPolicy,
    limit: u64,
) -> Result<RecoveryResult> {
    if obs.n != class.n {
        return Err(Error::InvalidArgument("observation length differs from class length".into()));
    }
    let map = ObservationMap::for_observation(obs, modulation.copied())?;
    let members: Vec<Signal> = enumerate_class(class, limit)?.collect();
    let examined = members.len() as u64;
    let finish = |survivors: Vec<Signal>, cert: Certificate| -> Result<RecoveryResult> {
        match survivors.len() {
            0 => Err(Error::NoCandidate),
            1 => Ok(RecoveryResult {
                signal: survivors.into_iter().next().unwrap(),
                certificate: cert,
                candidates_examined: examined,
                survivors: Vec::new(),
            }),
            _ => Ok(RecoveryResult {
                signal: survivors[0].clone(),
                certificate: Certificate::Undecided,
                candidates_examined: examined,
                survivors,
            }),
        }
    };
    if map.is_exact() && obs.is_exact() {
        let survivors: Vec<Signal> = members
            .into_par_iter()
            .filter(|v| exact_match(&map, obs, v) == Some(true))
            .collect();
        return finish(survivors, Certificate::ExactMatch);
    }
    let mut survivors = members;
    let mut last = policy.start;
    for p in policy.steps() {
        last = p;
        survivors = survivors.into_par_iter().filter(|v| ball_consistent(&map, obs, v, p)).collect();
        if survivors.len() <= 1 {
            break;
        }
    }
    finish(survivors, Certificate::BallVerified { precision: last })
}

/// Groups class members by exact trace so that survivor lookup for any
/// observation is a hash probe.
pub struct BruteForceIndex {
    map: ObservationMap,
    members: Vec<Signal>,
    groups: HashMap<Vec<CyclotomicNumber>, Vec<usize>>,
}

impl BruteForceIndex {
    pub fn build(class: &ClassSpec, map: ObservationMap, limit: u64) -> Result<Self> {
        if !map.is_exact() {
            return Err(Error::InvalidArgument("index needs an exact observation map".into()));
        }
        let members: Vec<Signal> = enumerate_class(class, limit)?.collect();
        let traces: Vec<Vec<CyclotomicNumber>> =
            members.par_iter().map(|v| map.exact_cyclotomic(v).unwrap()).collect();
        let mut groups: HashMap<Vec<CyclotomicNumber>, Vec<usize>> = HashMap::new();
        for (i, t) in traces.into_iter().enumerate() {
            groups.entry(t).or_default().push(i);
        }
        Ok(BruteForceIndex { map, members, groups })
    }

    pub fn members(&self) -> &[Signal] {
        &self.members
    }

    /// Members whose exact trace equals the trace of `x`, in enumeration order.
    pub fn survivors_of(&self, x: &Signal) -> Vec<&Signal> {
        let key = self.map.exact_cyclotomic(x).unwrap();
        self.groups.get(&key).map(|g| g.iter().map(|&i| &self.members[i]).collect()).unwrap_or_default()
    }

    /// Size of the largest group of members sharing a trace.
    pub fn max_group(&self) -> usize {
        self.groups.values().map(Vec::len).max().unwrap_or(0)
    }
}

/// Checks a candidate against every observation.
pub fn certify_solution(
    candidate: &Signal,
    observations: &[SpectrumObservation],
    modulation: Option<&ModulationSpec>,
    policy: &PrecisionPolicy,
) -> Certificate {
    let mut maps = Vec::with_capacity(observations.len());
    for obs in observations {
        if obs.n != candidate.len() {
            return Certificate::Rejected;
        }
        match ObservationMap::for_observation(obs, modulation.copied()) {
            Ok(m) => maps.push(m),
            Err(_) => return Certificate::Undecided,
        }
    }
    let mut inexact = Vec::new();
    for (map, obs) in maps.iter().zip(observations) {
        match exact_match(map, obs, candidate) {
            Some(true) => {}
            Some(false) => return Certificate::Rejected,
            None => inexact.push((map, obs)),
        }
    }
    if inexact.is_empty() {
        return Certificate::ExactMatch;
    }
    let mut last = policy.start;
    for p in policy.steps() {
        last = p;
        if !inexact.iter().all(|(map, obs)| ball_consistent(map, obs, candidate, p)) {
            return Certificate::Rejected;
        }
    }
    Certificate::BallVerified { precision: last }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuScanRow {
    pub mu: u32,
    /// Upper bound on `max_k |xhat_k - x_k|`.
    #[serde(with = "rational_opt_str")]
    pub max_error: Option<Rational>,
    pub support_preserved: bool,
    pub recovered_exactly: bool,
    pub within_delta: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MuScanReport {
    #[serde(with = "crate::exactnum::rational::rational_str")]
    pub delta: Rational,
    pub rows: Vec<MuScanRow>,
}

impl MuScanReport {
    /// Rows whose recovery is exact at this and every deeper scanned level.
    pub fn stable_from(&self) -> Option<u32> {
        let mut from = None;
        for r in self.rows.iter().rev() {
            if r.recovered_exactly {
                from = Some(r.mu);
            } else {
                break;
            }
        }
        from
    }
}

/// Upper bound on the modulus of `a - b`.
fn error_bound(a: &SolvedComponent, b: &GaussianRational, order: u64) -> Rational {
    match a {
        SolvedComponent::Gaussian(z) => {
            let d = z - b;
            if d.is_zero() {
                return Rational::zero();
            }
            BallComplex::from_gaussian(&d, 128).abs_upper().to_rational()
        }
        SolvedComponent::Cyclotomic(c) => {
            let d = c.sub(&CyclotomicNumber::from_gaussian(order, b).expect("order divisible by 4"));
            d.to_ball(128).abs_upper().to_rational()
        }
    }
}

fn scan_row(x: &Signal, support: &[usize], enc: &EncodingSpec, sparsity: usize, delta: &Rational, mu: u32) -> MuScanRow {
    let n = x.len();
    let rounded = round_signal(&RoundingSpec { nu: enc.nu, mu }, x);
    let s = sparsity.clamp(1, n);
    let sums: Vec<CyclotomicNumber> = (0..s).map(|w| dft_sum(&rounded, w)).collect();
    match sparse_estimate(n, &sums, enc, sparsity) {
        Ok((k, solved)) => {
            let order = transform_order(n);
            let mut estimate = vec![SolvedComponent::Gaussian(GaussianRational::zero()); n];
            for (&t, c) in k.iter().zip(solved) {
                estimate[t] = c;
            }
            let max_error = estimate
                .iter()
                .zip(x.iter())
                .map(|(a, b)| error_bound(a, b, order))
                .fold(Rational::zero(), |m, e| m.max(e));
            MuScanRow {
                mu,
                within_delta: Some(max_error <= *delta),
                recovered_exactly: max_error.is_zero(),
                max_error: Some(max_error),
                support_preserved: k == support,
                error: None,
            }
        }
        Err(e) => MuScanRow {
            mu,
            max_error: None,
            support_preserved: false,
            recovered_exactly: false,
            within_delta: None,
            error: Some(e.to_string()),
        },
    }
}

/// Rounds `x` at each depth, recovers from the exact leading coefficients and
/// records the error against `x`. Failing rows are recorded, not fatal.
pub fn mu_scan(x: &Signal, enc: &EncodingSpec, sparsity: usize, delta: &Rational, mus: &[u32]) -> Result<MuScanReport> {
    if mus.is_empty() {
        return Err(Error::InvalidArgument("empty mu list".into()));
    }
    if x.len() != enc.n {
        return Err(Error::InvalidArgument("signal length differs from encoding length".into()));
    }
    let support = x.support();
    if support.len() > sparsity {
        return Err(Error::SparsityExceeded { found: support.len(), bound: sparsity });
    }
    for (k, z) in x.iter().enumerate() {
        if zeta_encode(enc, k, z).ok().as_ref() != Some(z) {
            return Err(Error::InvalidArgument(format!("component {k} is not in the encoded class")));
        }
    }
    let mut mus = mus.to_vec();
    mus.sort_unstable();
    mus.dedup();
    let rows = mus
        .par_iter()
        .map(|&mu| scan_row(x, &support, enc, sparsity, delta, mu))
        .collect();
    Ok(MuScanReport { delta: delta.clone(), rows })
}
