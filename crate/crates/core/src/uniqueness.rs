//! Desk-scale verification of uniqueness sets: exhaustive collision search over
//! finite classes, exact transform-minor determinants, and nonzero
//! certification of exponential sums by precision escalation.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, is_prime, parse_rational, BallComplex, CyclotomicNumber, GaussianRational, Rational};
use crate::recovery::PrecisionPolicy;
use crate::rounding::{enumerate_class, ClassGrid, ClassKind, ClassSpec};
use crate::signal::Signal;
use crate::spectral::{Domain, ModulationSpec, ObservationMap};

/// The set a trace is taken on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    pub domain: Domain,
    #[serde(with = "point_list")]
    pub points: Vec<Rational>,
}

impl TraceSpec {
    pub fn indices(domain: Domain, idx: &[usize]) -> Self {
        TraceSpec { domain, points: idx.iter().map(|&i| Rational::from_integer(BigInt::from(i))).collect() }
    }
}

/// Points as JSON integers when they are nonnegative integers, else rational strings.
mod point_list {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Point {
        Index(u64),
        Angle(String),
    }

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|q| match q.to_integer().to_u64() {
            Some(i) if q.is_integer() => Point::Index(i),
            _ => Point::Angle(format_rational(q)),
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<Point>::deserialize(d)?
            .into_iter()
            .map(|p| match p {
                Point::Index(i) => Ok(Rational::from_integer(BigInt::from(i))),
                Point::Angle(s) => parse_rational(&s).map_err(serde::de::Error::custom),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMode {
    /// Difference reduction when the class allows it, else pairwise.
    Auto,
    Difference,
    Pairwise,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Unique,
    Collision,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalPair {
    pub first: Signal,
    pub second: Signal,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndecidedPair {
    pub first: Signal,
    pub second: Signal,
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessVerdict {
    pub status: VerdictStatus,
    pub mode: CheckMode,
    /// Differences or pairs examined.
    pub checked: u64,
    /// Highest precision any certification needed.
    pub max_precision: u32,
    pub witness: Option<SignalPair>,
    pub undecided_pairs: Vec<UndecidedPair>,
}

/// Outcome of nonzero certification.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LwOutcome {
    Nonzero { precision: u32 },
    Undecided { precision: u32 },
}

impl LwOutcome {
    pub fn is_nonzero(&self) -> bool {
        matches!(self, LwOutcome::Nonzero { .. })
    }
}

/// Certifies `v != 0` once some enclosure along the precision ladder excludes
/// zero. Zero is never asserted.
pub fn lw_certify_nonzero<F: Fn(u32) -> BallComplex>(v: F, policy: &PrecisionPolicy) -> LwOutcome {
    let mut last = policy.start;
    for p in policy.steps() {
        last = p;
        if v(p).excludes_zero() {
            return LwOutcome::Nonzero { precision: p };
        }
    }
    LwOutcome::Undecided { precision: last }
}

enum Check {
    Nonzero(u32),
    Zero,
    Undecided(u32),
}

/// Whether the trace of `delta` is nonzero, exactly when the map allows.
fn check_difference(map: &ObservationMap, delta: &Signal, policy: &PrecisionPolicy) -> Check {
    if let Some(vals) = map.exact_cyclotomic(delta) {
        return if vals.iter().all(CyclotomicNumber::is_zero) { Check::Zero } else { Check::Nonzero(0) };
    }
    let mut last = policy.start;
    for p in policy.steps() {
        last = p;
        if map.ball_values(delta, p).iter().any(BallComplex::excludes_zero) {
            return Check::Nonzero(p);
        }
    }
    Check::Undecided(last)
}

fn split_difference(delta: &Signal) -> (Signal, Signal) {
    let pos = |q: &Rational| if q.is_positive() { q.clone() } else { Rational::zero() };
    let neg = |q: &Rational| if q.is_negative() { -q.clone() } else { Rational::zero() };
    (
        Signal::new(delta.iter().map(|z| GaussianRational::new(pos(&z.re), pos(&z.im))).collect()),
        Signal::new(delta.iter().map(|z| GaussianRational::new(neg(&z.re), neg(&z.im))).collect()),
    )
}

/// Whether every difference of two members is itself enumerable as a
/// symmetric-grid signal: dense `plainX` classes only.
pub fn supports_difference(class: &ClassSpec) -> bool {
    class.kind() == ClassKind::PlainX && class.sparsity.is_none()
}

fn assemble(mode: CheckMode, checks: Vec<(Check, SignalPair)>) -> UniquenessVerdict {
    let checked = checks.len() as u64;
    let mut witness = None;
    let mut undecided = Vec::new();
    let mut max_precision = 0;
    for (c, pair) in checks {
        match c {
            Check::Nonzero(p) => max_precision = max_precision.max(p),
            Check::Zero => {
                if witness.is_none() {
                    witness = Some(pair);
                }
            }
            Check::Undecided(p) => {
                max_precision = max_precision.max(p);
                undecided.push(UndecidedPair { first: pair.first, second: pair.second, precision: p });
            }
        }
    }
    let status = if witness.is_some() {
        VerdictStatus::Collision
    } else if !undecided.is_empty() {
        VerdictStatus::Undecided
    } else {
        VerdictStatus::Unique
    };
    UniquenessVerdict { status, mode, checked, max_precision, witness, undecided_pairs: undecided }
}

fn verify_difference(class: &ClassSpec, map: &ObservationMap, policy: &PrecisionPolicy, limit: u64) -> Result<UniquenessVerdict> {
    let ClassGrid::Plain(grid) = class.grid else {
        return Err(Error::InvalidArgument("difference mode needs a plainX class".into()));
    };
    if class.sparsity.is_some() {
        return Err(Error::InvalidArgument("difference mode needs a class without a sparsity bound".into()));
    }
    // symmetric grid [-B', B'] with B' the largest grid point <= bound
    let scale = Rational::from_integer(grid.scale());
    let g = (&class.bound * &scale).floor();
    if g.is_zero() {
        return Ok(assemble(CheckMode::Difference, Vec::new()));
    }
    let top = &g / &scale;
    let shifted = ClassSpec::plain(grid, class.n, &top * Rational::from_integer(BigInt::from(2)))?;
    let offset = GaussianRational::new(top.clone(), top);
    let deltas: Vec<Signal> = enumerate_class(&shifted, limit)?
        .map(|c| Signal::new(c.iter().map(|z| z - &offset).collect()))
        .filter(|d| !d.is_zero())
        .collect();
    let checks = deltas
        .into_par_iter()
        .map(|d| {
            let c = check_difference(map, &d, policy);
            let (first, second) = split_difference(&d);
            (c, SignalPair { first, second })
        })
        .collect();
    Ok(assemble(CheckMode::Difference, checks))
}

fn verify_pairwise(class: &ClassSpec, map: &ObservationMap, policy: &PrecisionPolicy, limit: u64) -> Result<UniquenessVerdict> {
    let members: Vec<Signal> = enumerate_class(class, limit)?.collect();
    let pairs = (members.len() as u128 * members.len().saturating_sub(1) as u128) / 2;
    if map.is_exact() {
        let traces: Vec<Vec<CyclotomicNumber>> = members.par_iter().map(|v| map.exact_cyclotomic(v).unwrap()).collect();
        let mut first_seen: HashMap<&Vec<CyclotomicNumber>, usize> = HashMap::new();
        let mut witness = None;
        for (i, t) in traces.iter().enumerate() {
            if let Some(&j) = first_seen.get(t) {
                witness = Some(SignalPair { first: members[j].clone(), second: members[i].clone() });
                break;
            }
            first_seen.insert(t, i);
        }
        return Ok(UniquenessVerdict {
            status: if witness.is_some() { VerdictStatus::Collision } else { VerdictStatus::Unique },
            mode: CheckMode::Pairwise,
            checked: pairs.min(u64::MAX as u128) as u64,
            max_precision: 0,
            witness,
            undecided_pairs: Vec::new(),
        });
    }
    if pairs > limit as u128 {
        return Err(Error::ClassTooLarge { cardinality: pairs.to_string(), limit });
    }
    let checks = (0..members.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let members = &members;
            (i + 1..members.len()).map(move |j| {
                let d = members[i].sub(&members[j]);
                let c = check_difference(map, &d, policy);
                (c, SignalPair { first: members[i].clone(), second: members[j].clone() })
            })
        })
        .collect();
    Ok(assemble(CheckMode::Pairwise, checks))
}

/// Decides whether the trace determines every class member.
pub fn verify_uniqueness(
    class: &ClassSpec,
    modulation: Option<&ModulationSpec>,
    trace: &TraceSpec,
    policy: &PrecisionPolicy,
    mode: CheckMode,
    limit: u64,
) -> Result<UniquenessVerdict> {
    let map = ObservationMap::new(class.n, modulation.copied(), trace.domain, trace.points.clone())?;
    match mode {
        CheckMode::Difference => verify_difference(class, &map, policy, limit),
        CheckMode::Pairwise => verify_pairwise(class, &map, policy, limit),
        CheckMode::Auto if supports_difference(class) => verify_difference(class, &map, policy, limit),
        CheckMode::Auto => verify_pairwise(class, &map, policy, limit),
    }
}

/// Determinant of the transform submatrix `[zeta_N^{r c}]`, rows `rows`,
/// columns `cols`, by a Leibniz sum with exponents accumulated mod `N`.
pub fn transform_minor(n: usize, rows: &[usize], cols: &[usize]) -> CyclotomicNumber {
    assert_eq!(rows.len(), cols.len(), "minor must be square");
    let m = rows.len();
    let mut acc = vec![BigInt::zero(); n];
    let mut perm: Vec<usize> = (0..m).collect();
    let mut sign = 1i64;
    let mut c = vec![0usize; m];
    let mut add = |perm: &[usize], sign: i64| {
        let e = rows.iter().zip(perm).map(|(&r, &j)| r * cols[j] % n).sum::<usize>() % n;
        acc[e] += sign;
    };
    add(&perm, sign);
    // Heap's algorithm, each swap flips the sign
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            add(&perm, sign);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    CyclotomicNumber::from_exponent_array(n as u64, acc, BigInt::from(1))
}

/// Nonzero-ness of the minor on the window `{u, ..., u+m-1}` and support `T`, `m = |T|`.
pub fn vandermonde_window_check(n: usize, u: usize, support: &[usize]) -> bool {
    let m = support.len();
    assert!(u + m <= n && support.iter().all(|&t| t < n), "window or support outside 0..N");
    let rows: Vec<usize> = (u..u + m).collect();
    !transform_minor(n, &rows, support).is_zero()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScanFamily {
    /// Consecutive row windows against every support, `m = 1..=max_m`.
    Windows { max_m: usize },
    /// Every `m x m` minor.
    AllMinors { m: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorScanReport {
    pub n: usize,
    pub family: ScanFamily,
    pub minors_checked: u64,
    pub all_nonzero: bool,
    pub zero_witness: Option<MinorWitness>,
}

/// `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else { break };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

fn first_zero(n: usize, row_sets: &[Vec<usize>], col_sets: &[Vec<usize>]) -> Option<MinorWitness> {
    row_sets
        .par_iter()
        .map(|rows| {
            col_sets
                .iter()
                .find(|cols| transform_minor(n, rows, cols).is_zero())
                .map(|cols| MinorWitness { rows: rows.clone(), cols: cols.clone() })
        })
        .find_first(Option::is_some)
        .flatten()
}

/// Every consecutive window against every support, sizes `1..=max_m`.
pub fn window_sweep(n: usize, max_m: usize, limit: u64) -> Result<MinorScanReport> {
    let max_m = max_m.min(n);
    let needed: BigInt = (1..=max_m).map(|m| binomial(n, m) * BigInt::from(n - m + 1)).sum();
    if needed > BigInt::from(limit) {
        return Err(Error::ScanTooLarge { needed: needed.to_string(), limit });
    }
    let mut witness = None;
    for m in 1..=max_m {
        let windows: Vec<Vec<usize>> = (0..=n - m).map(|u| (u..u + m).collect()).collect();
        if let Some(w) = first_zero(n, &windows, &subsets(n, m)) {
            witness = Some(w);
            break;
        }
    }
    Ok(MinorScanReport {
        n,
        family: ScanFamily::Windows { max_m },
        minors_checked: needed.to_u64().unwrap(),
        all_nonzero: witness.is_none(),
        zero_witness: witness,
    })
}

/// Every `m x m` minor of the length-`n` transform matrix.
pub fn prime_minor_scan(n: usize, m: usize, allow_composite: bool, limit: u64) -> Result<MinorScanReport> {
    if !allow_composite && !is_prime(n as u64) {
        return Err(Error::NotPrime(n));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("minor size must be in 1..={n}")));
    }
    let c = binomial(n, m);
    let needed = &c * &c;
    if needed > BigInt::from(limit) {
        return Err(Error::ScanTooLarge { needed: needed.to_string(), limit });
    }
    let sets = subsets(n, m);
    let witness = first_zero(n, &sets, &sets);
    Ok(MinorScanReport {
        n,
        family: ScanFamily::AllMinors { m },
        minors_checked: needed.to_u64().unwrap(),
        all_nonzero: witness.is_none(),
        zero_witness: witness,
    })
}
