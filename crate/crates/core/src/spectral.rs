//! Exact and ball-valued transforms, the angle grid and modulation factors of
//! the modulated classes, and linear observation maps.
//!
//! Transforms use `zeta_N = e^{-2 pi i / N}` with unitary `1/sqrt(N)` scaling.
//! Exact spectra store the unnormalized sums `sum_k x_k zeta_N^{w k}`; the
//! square root is carried as a [`Scale`] tag and never evaluated.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{
    exp_i_ball, exp_i_rational, format_rational, parse_rational, pi_enclosure, BallComplex, CyclotomicNumber,
    GaussianRational, Rational, RealBall,
};
use crate::rounding::RoundingSpec;
use crate::signal::Signal;

/// Precision used when an exact value is requested but only balls exist.
pub const DEFAULT_BALL_PRECISION: u32 = 128;

/// Normalization still owed by a stored value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    /// The stored value is the value.
    Unit,
    /// The value is the stored number divided by `sqrt(N)`.
    InvSqrtN,
}

/// Field order holding the spectra of length-`n` Gaussian-rational signals.
pub fn transform_order(n: usize) -> u64 {
    (n as u64).lcm(&4)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpectrumRepr", into = "SpectrumRepr")]
pub struct ExactSpectrum {
    sums: Vec<CyclotomicNumber>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumRepr {
    n: usize,
    sums: Vec<CyclotomicNumber>,
    scale: Scale,
}

impl TryFrom<SpectrumRepr> for ExactSpectrum {
    type Error = Error;
    fn try_from(r: SpectrumRepr) -> Result<Self> {
        if r.sums.len() != r.n {
            return Err(Error::InvalidArgument("spectrum length differs from n".into()));
        }
        if r.scale != Scale::InvSqrtN {
            return Err(Error::InvalidArgument("exact spectra carry the inv_sqrt_n scale".into()));
        }
        Ok(ExactSpectrum { sums: r.sums })
    }
}

impl From<ExactSpectrum> for SpectrumRepr {
    fn from(s: ExactSpectrum) -> Self {
        SpectrumRepr { n: s.sums.len(), sums: s.sums, scale: Scale::InvSqrtN }
    }
}

impl ExactSpectrum {
    pub fn new(sums: Vec<CyclotomicNumber>) -> Self {
        ExactSpectrum { sums }
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn sums(&self) -> &[CyclotomicNumber] {
        &self.sums
    }

    pub fn scale(&self) -> Scale {
        Scale::InvSqrtN
    }

    /// `sum_w |sums_w|^2`, which equals `N * sum_k |x_k|^2`.
    pub fn sum_norm_sqr(&self) -> Rational {
        let order = self.sums.iter().fold(4u64, |l, s| l.lcm(&s.order()));
        self.sums
            .iter()
            .fold(CyclotomicNumber::zero(order), |acc, s| acc.add(&s.mul(&s.conj())))
            .as_rational()
            .expect("total energy of a rational signal's spectrum is rational")
    }

    /// `sum_w |X_w|^2` with the scale applied.
    pub fn energy(&self) -> Rational {
        self.sum_norm_sqr() / Rational::from_integer(BigInt::from(self.len()))
    }
}

/// `sum_k |x_k|^2`.
pub fn energy(x: &Signal) -> Rational {
    x.iter().map(GaussianRational::norm_sqr).fold(Rational::zero(), |a, b| a + b)
}

/// Integer accumulation of `sum_k coeff_k * v_k`, where `coeff_k` is either
/// zero or `zeta_L^{e_k}`.
fn exponent_row_value(order: u64, row: &[Option<u64>], v: &[GaussianRational]) -> CyclotomicNumber {
    let den = row
        .iter()
        .zip(v)
        .filter(|(c, _)| c.is_some())
        .fold(BigInt::one(), |acc, (_, z)| acc.lcm(z.re.denom()).lcm(z.im.denom()));
    let quarter = 3 * order / 4;
    let mut acc = vec![BigInt::zero(); order as usize];
    for (c, z) in row.iter().zip(v) {
        let Some(e) = c else { continue };
        if !z.re.is_zero() {
            acc[(e % order) as usize] += z.re.numer() * (&den / z.re.denom());
        }
        if !z.im.is_zero() {
            acc[((e + quarter) % order) as usize] += z.im.numer() * (&den / z.im.denom());
        }
    }
    CyclotomicNumber::from_exponent_array(order, acc, den)
}

fn fourier_row(n: usize, omega: usize) -> Vec<Option<u64>> {
    let order = transform_order(n);
    let step = order / n as u64;
    (0..n).map(|k| Some(step * ((omega * k) % n) as u64)).collect()
}

/// Unnormalized coefficient `sum_k x_k zeta_N^{omega k}`.
pub fn dft_sum(x: &Signal, omega: usize) -> CyclotomicNumber {
    exponent_row_value(transform_order(x.len()), &fourier_row(x.len(), omega), x.components())
}

pub fn dft_exact(x: &Signal) -> ExactSpectrum {
    ExactSpectrum::new((0..x.len()).map(|w| dft_sum(x, w)).collect())
}

pub fn idft_exact(spectrum: &ExactSpectrum) -> Result<Signal> {
    let n = spectrum.len();
    if n == 0 {
        return Ok(Signal::new(Vec::new()));
    }
    let order = spectrum.sums.iter().fold(transform_order(n), |l, s| l.lcm(&s.order()));
    let step = order / n as u64;
    let inv_n = Rational::new(BigInt::one(), BigInt::from(n));
    (0..n)
        .map(|t| {
            let terms = spectrum
                .sums
                .iter()
                .enumerate()
                .map(|(w, s)| (s, step * ((n - (w * t) % n) % n) as u64));
            CyclotomicNumber::shifted_sum(order, terms)
                .mul_rational(&inv_n)
                .to_gaussian()
                .ok_or(Error::NonRationalResult)
        })
        .collect::<Result<Vec<_>>>()
        .map(Signal::new)
}

/// Enclosure of `zeta_N^j`.
pub fn root_ball(n: usize, j: i64, precision: u32) -> BallComplex {
    let j = j.rem_euclid(n as i64);
    if j == 0 {
        return BallComplex::one(precision);
    }
    let w = precision as u64 + 16;
    let theta = pi_enclosure(w as u32).mul_rational(&Rational::new(BigInt::from(-2 * j), BigInt::from(n)), w);
    exp_i_ball(&theta, precision)
}

/// Enclosure of `sum_{k=0}^{N-1} e^{-i omega k} y_k`.
pub fn ztransform_eval(y: &Signal, omega: &Rational, precision: u32) -> BallComplex {
    assert!(precision >= 2, "precision must be at least 2 bits");
    let w = precision + 16;
    let mut acc = BallComplex::zero(w);
    for (k, z) in y.iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        let angle = -(omega * Rational::from_integer(BigInt::from(k)));
        let term = if angle.is_zero() {
            BallComplex::from_gaussian(z, w)
        } else {
            exp_i_rational(&angle, w).mul_gaussian(z)
        };
        acc = acc.add(&term);
    }
    acc.rounded(precision)
}

/// Which of the two modulated constructions a class uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulationSide {
    /// Spectrum `Y = xi . X` with `xi_k = e^{i theta_k}`; time samples are observed.
    TimeObserved,
    /// Signal `y = zeta . x` with `zeta_k = e^{-i theta_k}`; Fourier coefficients are observed.
    FrequencyObserved,
}

/// Modulation with `theta_k = 2 (rho(pi) - pi) d k / N`, where `rho` rounds
/// onto the `(nu1, mu1)` grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModulationRepr", into = "ModulationRepr")]
pub struct ModulationSpec {
    pub d: usize,
    pub angle_grid: RoundingSpec,
    pub n: usize,
    pub side: ModulationSide,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModulationRepr {
    d: usize,
    nu1: u32,
    mu1: u32,
    n: usize,
    side: ModulationSide,
}

impl TryFrom<ModulationRepr> for ModulationSpec {
    type Error = Error;
    fn try_from(r: ModulationRepr) -> Result<Self> {
        ModulationSpec::new(r.d, RoundingSpec::new(r.nu1, r.mu1)?, r.n, r.side)
    }
}

impl From<ModulationSpec> for ModulationRepr {
    fn from(m: ModulationSpec) -> Self {
        ModulationRepr { d: m.d, nu1: m.angle_grid.nu, mu1: m.angle_grid.mu, n: m.n, side: m.side }
    }
}

impl ModulationSpec {
    pub fn new(d: usize, angle_grid: RoundingSpec, n: usize, side: ModulationSide) -> Result<Self> {
        if d == 0 || d >= n {
            return Err(Error::InvalidArgument(format!("need 1 <= d <= N-1, got d = {d}, N = {n}")));
        }
        Ok(ModulationSpec { d, angle_grid, n, side })
    }

    /// `rho(pi)` on the angle grid, escalating precision until decided.
    pub fn rho_pi(&self) -> Rational {
        rho_pi_auto(&self.angle_grid).expect("pi is irrational, so the floor is eventually decided")
    }
}

/// `nu1^-mu1 floor(nu1^mu1 pi)` from a single enclosure of pi.
pub fn rho_pi(grid: &RoundingSpec, precision: u32) -> Result<Rational> {
    let scale = Rational::from_integer(grid.scale());
    let ball = pi_enclosure(precision).mul_rational(&scale, precision as u64 + 8);
    match ball.floor_if_decided() {
        Some(f) => Ok(Rational::from_integer(f) / scale),
        None => Err(Error::PrecisionInsufficient { precision }),
    }
}

/// [`rho_pi`] with precision doubling from 64 bits.
pub fn rho_pi_auto(grid: &RoundingSpec) -> Result<Rational> {
    let mut p = 64u32;
    loop {
        match rho_pi(grid, p) {
            Err(Error::PrecisionInsufficient { .. }) if p < 1 << 20 => p *= 2,
            other => return other,
        }
    }
}

/// `omega_k = 2 rho(pi) d k / N` for `k` in `D`.
pub fn omega_grid(m: &ModulationSpec, precision: u32) -> Result<Vec<Rational>> {
    let rho = rho_pi(&m.angle_grid, precision)?;
    Ok(omega_grid_from_rho(m, &rho))
}

fn omega_grid_from_rho(m: &ModulationSpec, rho: &Rational) -> Vec<Rational> {
    let n = BigInt::from(m.n);
    (0..m.n)
        .map(|k| rho * Rational::new(BigInt::from(2 * m.d * k), n.clone()))
        .collect()
}

/// Enclosure of `theta_k`, signed by side.
fn modulation_angle(m: &ModulationSpec, rho: &Rational, k: usize, precision: u32) -> RealBall {
    let w = precision as u64 + 32;
    let diff = RealBall::from_rational(rho, w).sub(&pi_enclosure(w as u32), w);
    let sign: i64 = match m.side {
        ModulationSide::TimeObserved => 1,
        ModulationSide::FrequencyObserved => -1,
    };
    diff.mul_rational(&Rational::new(BigInt::from(sign * 2 * (m.d * k) as i64), BigInt::from(m.n)), w)
}

fn modulation_factor_with(m: &ModulationSpec, rho: &Rational, k: usize, precision: u32) -> BallComplex {
    if k % m.n == 0 {
        return BallComplex::one(precision);
    }
    exp_i_ball(&modulation_angle(m, rho, k, precision), precision)
}

/// Enclosure of `xi_k` (time-observed) or `zeta_k` (frequency-observed).
pub fn modulation_factor(m: &ModulationSpec, k: usize, precision: u32) -> BallComplex {
    assert!(precision >= 2, "precision must be at least 2 bits");
    modulation_factor_with(m, &m.rho_pi(), k, precision)
}

/// Componentwise product of a grid signal with its modulation factors.
pub fn build_class_member(m: &ModulationSpec, x: &Signal, precision: u32) -> Vec<BallComplex> {
    let rho = m.rho_pi();
    x.iter()
        .enumerate()
        .map(|(k, z)| {
            if z.is_zero() {
                BallComplex::zero(precision)
            } else {
                modulation_factor_with(m, &rho, k, precision + 8).mul_gaussian(z).rounded(precision)
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Fourier,
    Ztransform,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservedValue {
    Exact(GaussianRational),
    Cyclotomic(CyclotomicNumber),
    Ball(BallComplex),
}

impl ObservedValue {
    pub fn to_ball(&self, precision: u32) -> BallComplex {
        match self {
            ObservedValue::Exact(z) => BallComplex::from_gaussian(z, precision),
            ObservedValue::Cyclotomic(c) => c.to_ball(precision),
            ObservedValue::Ball(b) => b.clone(),
        }
    }

    pub fn is_ball(&self) -> bool {
        matches!(self, ObservedValue::Ball(_))
    }

    /// The value as a field element of the given order, when exact.
    pub fn to_cyclotomic(&self, order: u64) -> Option<CyclotomicNumber> {
        match self {
            ObservedValue::Exact(z) => CyclotomicNumber::from_gaussian(order, z).ok(),
            ObservedValue::Cyclotomic(c) => Some(c.clone()),
            ObservedValue::Ball(_) => None,
        }
    }

    /// Exact equality, `None` when either side is a ball.
    pub fn exact_eq(&self, other: &ObservedValue) -> Option<bool> {
        match (self, other) {
            (ObservedValue::Ball(_), _) | (_, ObservedValue::Ball(_)) => None,
            (ObservedValue::Exact(a), ObservedValue::Exact(b)) => Some(a == b),
            (a, b) => {
                let order = [a, b]
                    .iter()
                    .map(|v| match v {
                        ObservedValue::Cyclotomic(c) => c.order(),
                        _ => 4,
                    })
                    .fold(4u64, |l, o| l.lcm(&o));
                Some(a.to_cyclotomic(order)? == b.to_cyclotomic(order)?)
            }
        }
    }
}

/// Trace of a signal on a set of indices or evaluation angles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ObservationRepr", into = "ObservationRepr")]
pub struct SpectrumObservation {
    pub domain: Domain,
    pub n: usize,
    pub points: Vec<Rational>,
    pub values: Vec<ObservedValue>,
    pub scale: Scale,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Index(u64),
    Angle(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservationRepr {
    domain: Domain,
    n: usize,
    points: Vec<PointRepr>,
    values: Vec<ObservedValue>,
    scale: Scale,
}

impl TryFrom<ObservationRepr> for SpectrumObservation {
    type Error = Error;
    fn try_from(r: ObservationRepr) -> Result<Self> {
        let points = r
            .points
            .iter()
            .map(|p| match p {
                PointRepr::Index(i) => Ok(Rational::from_integer(BigInt::from(*i))),
                PointRepr::Angle(s) => parse_rational(s),
            })
            .collect::<Result<Vec<_>>>()?;
        validate_points(r.domain, r.n, &points)?;
        if points.len() != r.values.len() {
            return Err(Error::InvalidArgument("points and values differ in length".into()));
        }
        Ok(SpectrumObservation { domain: r.domain, n: r.n, points, values: r.values, scale: r.scale })
    }
}

impl From<SpectrumObservation> for ObservationRepr {
    fn from(o: SpectrumObservation) -> Self {
        let points = o
            .points
            .iter()
            .map(|p| match o.domain {
                Domain::Ztransform => PointRepr::Angle(format_rational(p)),
                _ => PointRepr::Index(p.to_integer().to_u64().expect("index point")),
            })
            .collect();
        ObservationRepr { domain: o.domain, n: o.n, points, values: o.values, scale: o.scale }
    }
}

impl SpectrumObservation {
    /// Index points for the time and Fourier domains.
    pub fn indices(&self) -> Option<Vec<usize>> {
        match self.domain {
            Domain::Ztransform => None,
            _ => Some(self.points.iter().map(|p| p.to_integer().to_usize().unwrap()).collect()),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.values.iter().all(|v| !v.is_ball())
    }
}

fn validate_points(domain: Domain, n: usize, points: &[Rational]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("length must be positive".into()));
    }
    let distinct: BTreeSet<&Rational> = points.iter().collect();
    if distinct.len() != points.len() {
        return Err(Error::InvalidArgument("observation points must be distinct".into()));
    }
    if domain != Domain::Ztransform {
        for p in points {
            if !p.is_integer() || p.is_negative() || *p >= Rational::from_integer(BigInt::from(n)) {
                return Err(Error::InvalidArgument(format!("point {p} is not an index in 0..{n}")));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Exact values where the domain allows, else balls at the default precision.
    Exact,
    Bits(u32),
}

type BallRows = Arc<Vec<Vec<Option<BallComplex>>>>;

/// Linear map from the underlying grid signal `v` of a (possibly modulated)
/// class to a trace, with values stored unnormalized as tagged by `scale`.
///
/// Without modulation and for the frequency-observed side, the physical signal
/// is `y = m . v` in time; for the time-observed side it is the spectrum
/// `Y = m . v`. Here `m` is the modulation factor sequence, or all ones.
pub struct ObservationMap {
    n: usize,
    domain: Domain,
    points: Vec<Rational>,
    modulation: Option<ModulationSpec>,
    rho: Option<Rational>,
    exact_rows: Option<Vec<Vec<Option<u64>>>>,
    ball_cache: Mutex<HashMap<u32, BallRows>>,
}

impl ObservationMap {
    pub fn new(n: usize, modulation: Option<ModulationSpec>, domain: Domain, points: Vec<Rational>) -> Result<Self> {
        validate_points(domain, n, &points)?;
        if let Some(m) = &modulation {
            if m.n != n {
                return Err(Error::InvalidArgument("modulation length differs from signal length".into()));
            }
        }
        let exact_rows = match (modulation, domain) {
            (None, Domain::Time) => Some(
                points
                    .iter()
                    .map(|p| {
                        let t = p.to_integer().to_usize().unwrap();
                        (0..n).map(|k| (k == t).then_some(0)).collect()
                    })
                    .collect(),
            ),
            (None, Domain::Fourier) => Some(
                points.iter().map(|p| fourier_row(n, p.to_integer().to_usize().unwrap())).collect(),
            ),
            // e^{-i 0 k} = 1, so the plain sum is exact
            (None, Domain::Ztransform) if points.iter().all(Zero::is_zero) => {
                Some(points.iter().map(|_| vec![Some(0); n]).collect())
            }
            _ => None,
        };
        Ok(ObservationMap {
            n,
            domain,
            points,
            rho: modulation.map(|m| m.rho_pi()),
            modulation,
            exact_rows,
            ball_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn from_indices(n: usize, modulation: Option<ModulationSpec>, domain: Domain, idx: &[usize]) -> Result<Self> {
        Self::new(n, modulation, domain, idx.iter().map(|&i| Rational::from_integer(BigInt::from(i))).collect())
    }

    /// Map matching the layout of an existing observation.
    pub fn for_observation(obs: &SpectrumObservation, modulation: Option<ModulationSpec>) -> Result<Self> {
        let map = Self::new(obs.n, modulation, obs.domain, obs.points.clone())?;
        if map.scale() != obs.scale {
            return Err(Error::InvalidArgument("observation scale does not match its domain".into()));
        }
        Ok(map)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn points(&self) -> &[Rational] {
        &self.points
    }

    pub fn modulation(&self) -> Option<&ModulationSpec> {
        self.modulation.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact_rows.is_some()
    }

    pub fn scale(&self) -> Scale {
        let time_side = matches!(self.modulation, Some(ModulationSpec { side: ModulationSide::TimeObserved, .. }));
        match (self.domain, time_side) {
            (Domain::Fourier, false) | (Domain::Time, true) | (Domain::Ztransform, true) => Scale::InvSqrtN,
            _ => Scale::Unit,
        }
    }

    fn index(&self, i: usize) -> usize {
        self.points[i].to_integer().to_usize().unwrap()
    }

    fn factor(&self, k: usize, precision: u32) -> BallComplex {
        match (&self.modulation, &self.rho) {
            (Some(m), Some(rho)) => modulation_factor_with(m, rho, k, precision),
            _ => BallComplex::one(precision),
        }
    }

    fn compute_ball_rows(&self, precision: u32) -> Vec<Vec<Option<BallComplex>>> {
        let n = self.n;
        let w = precision + 8;
        let time_side = matches!(self.modulation, Some(ModulationSpec { side: ModulationSide::TimeObserved, .. }));
        let factors: Vec<BallComplex> = (0..n).map(|k| self.factor(k, w)).collect();
        (0..self.points.len())
            .map(|i| {
                let row: Vec<Option<BallComplex>> = match (self.domain, time_side) {
                    (Domain::Time, false) | (Domain::Fourier, true) => {
                        let t = self.index(i);
                        (0..n).map(|k| (k == t).then(|| factors[k].clone())).collect()
                    }
                    (Domain::Fourier, false) => {
                        let w0 = self.index(i) as i64;
                        (0..n).map(|k| Some(root_ball(n, w0 * k as i64, w).mul(&factors[k]))).collect()
                    }
                    (Domain::Time, true) => {
                        let t = self.index(i) as i64;
                        (0..n).map(|k| Some(root_ball(n, -t * k as i64, w).mul(&factors[k]))).collect()
                    }
                    (Domain::Ztransform, false) => (0..n)
                        .map(|k| {
                            let a = -(&self.points[i] * Rational::from_integer(BigInt::from(k)));
                            let e = if a.is_zero() { BallComplex::one(w) } else { exp_i_rational(&a, w) };
                            Some(e.mul(&factors[k]))
                        })
                        .collect(),
                    (Domain::Ztransform, true) => (0..n)
                        .map(|k| {
                            let mut acc = BallComplex::zero(w);
                            for t in 0..n {
                                let a = -(&self.points[i] * Rational::from_integer(BigInt::from(t)));
                                let e = if a.is_zero() { BallComplex::one(w) } else { exp_i_rational(&a, w) };
                                acc = acc.add(&e.mul(&root_ball(n, -((t * k) as i64), w)));
                            }
                            Some(acc.mul(&factors[k]))
                        })
                        .collect(),
                };
                row
            })
            .collect()
    }

    fn ball_rows(&self, precision: u32) -> BallRows {
        if let Some(rows) = self.ball_cache.lock().unwrap().get(&precision) {
            return rows.clone();
        }
        let rows = Arc::new(self.compute_ball_rows(precision));
        self.ball_cache.lock().unwrap().insert(precision, rows.clone());
        rows
    }

    /// Exact trace values, when the map is exact.
    pub fn exact_values(&self, v: &Signal) -> Option<Vec<ObservedValue>> {
        let rows = self.exact_rows.as_ref()?;
        assert_eq!(v.len(), self.n, "signal length differs from map length");
        Some(match self.domain {
            Domain::Time => (0..rows.len()).map(|i| ObservedValue::Exact(v[self.index(i)].clone())).collect(),
            _ => rows
                .iter()
                .map(|r| ObservedValue::Cyclotomic(exponent_row_value(transform_order(self.n), r, v.components())))
                .collect(),
        })
    }

    /// Exact trace values as field elements of a fixed order.
    pub fn exact_cyclotomic(&self, v: &Signal) -> Option<Vec<CyclotomicNumber>> {
        let rows = self.exact_rows.as_ref()?;
        let order = transform_order(self.n);
        Some(rows.iter().map(|r| exponent_row_value(order, r, v.components())).collect())
    }

    /// Enclosures of the trace values.
    pub fn ball_values(&self, v: &Signal, precision: u32) -> Vec<BallComplex> {
        assert_eq!(v.len(), self.n, "signal length differs from map length");
        if let Some(vals) = self.exact_values(v) {
            return vals.iter().map(|x| x.to_ball(precision)).collect();
        }
        let rows = self.ball_rows(precision);
        rows.iter()
            .map(|row| {
                let mut acc = BallComplex::zero(precision + 8);
                for (c, z) in row.iter().zip(v.iter()) {
                    if let (Some(c), false) = (c, z.is_zero()) {
                        acc = acc.add(&c.mul_gaussian(z));
                    }
                }
                acc.rounded(precision)
            })
            .collect()
    }

    pub fn observe(&self, v: &Signal, precision: Precision) -> SpectrumObservation {
        let values = match (precision, self.exact_values(v)) {
            (Precision::Exact, Some(vals)) => vals,
            (Precision::Exact, None) => self.balls(v, DEFAULT_BALL_PRECISION),
            (Precision::Bits(p), _) => self.balls(v, p),
        };
        SpectrumObservation { domain: self.domain, n: self.n, points: self.points.clone(), values, scale: self.scale() }
    }

    fn balls(&self, v: &Signal, p: u32) -> Vec<ObservedValue> {
        self.ball_values(v, p).into_iter().map(ObservedValue::Ball).collect()
    }
}

/// Trace of an unmodulated signal.
pub fn observe(x: &Signal, domain: Domain, points: Vec<Rational>, precision: Precision) -> Result<SpectrumObservation> {
    Ok(ObservationMap::new(x.len(), None, domain, points)?.observe(x, precision))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{int, ratio, Dyadic};
    use proptest::prelude::*;

    fn real_signal(v: &[i64]) -> Signal {
        Signal::new(v.iter().map(|&a| GaussianRational::real(int(a))).collect())
    }

    fn close(b: &BallComplex, re: f64, im: f64, tol: f64) -> bool {
        (b.mid_re.to_f64() - re).abs() < tol && (b.mid_im.to_f64() - im).abs() < tol && b.radius.to_f64() < tol
    }

    #[test]
    fn impulse_and_constant() {
        let s = dft_exact(&real_signal(&[1, 0, 0, 0]));
        assert!(s.sums().iter().all(|c| *c == CyclotomicNumber::one(4)));
        let s = dft_exact(&real_signal(&[1, 1, 1, 1]));
        let want: Vec<_> = [4, 0, 0, 0].iter().map(|&a| CyclotomicNumber::from_rational(4, &int(a))).collect();
        assert_eq!(s.sums(), &want[..]);
        assert_eq!(idft_exact(&s).unwrap(), real_signal(&[1, 1, 1, 1]));
        assert_eq!(idft_exact(&dft_exact(&Signal::zeros(5))).unwrap(), Signal::zeros(5));
        // energy 4 in time, sums^2 / N = 16 / 4
        assert_eq!(s.energy(), int(4));
    }

    #[test]
    fn non_rational_spectrum_rejected() {
        // a single coefficient sqrt-like element: zeta_8 is not in the span of rational signals
        let s = ExactSpectrum::new(vec![CyclotomicNumber::root(8, 1), CyclotomicNumber::zero(4)]);
        assert_eq!(idft_exact(&s), Err(Error::NonRationalResult));
    }

    #[test]
    fn dft_matches_float_oracle() {
        let x = Signal::new(vec![
            GaussianRational::new(ratio(1, 2), ratio(-1, 3)),
            GaussianRational::new(int(2), int(0)),
            GaussianRational::new(ratio(-5, 7), int(1)),
        ]);
        let s = dft_exact(&x);
        for w in 0..3 {
            let (mut re, mut im) = (0.0, 0.0);
            for (k, z) in x.iter().enumerate() {
                let a = -2.0 * std::f64::consts::PI * (w * k) as f64 / 3.0;
                let (zr, zi) = (z.re.to_f64().unwrap(), z.im.to_f64().unwrap());
                re += zr * a.cos() - zi * a.sin();
                im += zr * a.sin() + zi * a.cos();
            }
            assert!(close(&s.sums()[w].to_ball(64), re, im, 1e-12));
        }
    }

    #[test]
    fn ztransform_examples() {
        let y = real_signal(&[1, 0, 1]);
        let b = ztransform_eval(&y, &int(1), 80);
        // 1 + e^{-2i}
        assert!(close(&b, 1.0 + (2.0f64).cos(), -(2.0f64).sin(), 1e-12));
        assert!(close(&b, 0.5839, -0.9093, 1e-4));
        let imp = real_signal(&[1, 0, 0, 0]);
        assert!(ztransform_eval(&imp, &ratio(7, 3), 64).contains_point(&GaussianRational::one()));
        let x = Signal::new(vec![GaussianRational::new(ratio(1, 2), int(1)), GaussianRational::real(ratio(1, 4))]);
        assert!(ztransform_eval(&x, &int(0), 64).contains_point(&x.total()));
    }

    #[test]
    fn omega_examples() {
        let grid = RoundingSpec::new(2, 2).unwrap();
        assert_eq!(rho_pi(&grid, 64).unwrap(), int(3));
        assert_eq!(rho_pi(&RoundingSpec::new(2, 3).unwrap(), 64).unwrap(), ratio(25, 8));
        assert_eq!(rho_pi(&RoundingSpec::new(10, 4).unwrap(), 64).unwrap(), ratio(31415, 10000));
        assert_eq!(rho_pi(&RoundingSpec::new(10, 30).unwrap(), 8), Err(Error::PrecisionInsufficient { precision: 8 }));
        let m = ModulationSpec::new(1, grid, 2, ModulationSide::TimeObserved).unwrap();
        assert_eq!(omega_grid(&m, 64).unwrap(), vec![int(0), int(3)]);
        assert!(ModulationSpec::new(0, grid, 2, ModulationSide::TimeObserved).is_err());
        assert!(ModulationSpec::new(2, grid, 2, ModulationSide::TimeObserved).is_err());
    }

    #[test]
    fn modulation_examples() {
        let grid = RoundingSpec::new(2, 2).unwrap();
        let xi = ModulationSpec::new(1, grid, 2, ModulationSide::TimeObserved).unwrap();
        let zeta = ModulationSpec { side: ModulationSide::FrequencyObserved, ..xi };
        assert!(modulation_factor(&xi, 0, 64).contains_point(&GaussianRational::one()));
        let a = 3.0 - std::f64::consts::PI;
        let f = modulation_factor(&xi, 1, 64);
        assert!(close(&f, a.cos(), a.sin(), 1e-12));
        assert!(f.intersects(&modulation_factor(&zeta, 1, 64).conj()));
        let x = Signal::new(vec![GaussianRational::new(ratio(1, 2), int(0)), GaussianRational::new(int(0), ratio(1, 2))]);
        let y = build_class_member(&xi, &x, 64);
        assert!(y[0].contains_point(&x[0]));
        let r2 = y[1].mid_re.to_f64().powi(2) + y[1].mid_im.to_f64().powi(2);
        assert!((r2 - 0.25).abs() < 1e-12);
        assert!(build_class_member(&xi, &Signal::zeros(2), 64).iter().all(|b| b.contains_point(&GaussianRational::zero())));
    }

    #[test]
    fn key_identity() {
        for (n, d, mu1) in [(2, 1, 2), (3, 1, 3), (3, 2, 2), (5, 3, 4)] {
            let m = ModulationSpec::new(d, RoundingSpec::new(2, mu1).unwrap(), n, ModulationSide::TimeObserved).unwrap();
            for p in [32, 64, 200] {
                let omegas = omega_grid(&m, 64).unwrap();
                for (k, omega) in omegas.iter().enumerate().take(n) {
                    let lhs = root_ball(n, -((d * k) as i64), p).mul(&modulation_factor(&m, k, p));
                    assert!(lhs.intersects(&exp_i_rational(omega, p)), "n={n} d={d} k={k} p={p}");
                }
            }
        }
    }

    #[test]
    fn observe_examples() {
        let x = Signal::new(vec![
            GaussianRational::new(ratio(1, 2), int(0)),
            GaussianRational::new(int(0), ratio(1, 4)),
            GaussianRational::zero(),
        ]);
        let all: Vec<_> = (0..3).map(int).collect();
        let o = observe(&x, Domain::Fourier, all, Precision::Exact).unwrap();
        let s = dft_exact(&x);
        for (v, c) in o.values.iter().zip(s.sums()) {
            assert_eq!(v, &ObservedValue::Cyclotomic(c.clone()));
        }
        assert_eq!(o.scale, Scale::InvSqrtN);
        let t = observe(&x, Domain::Time, vec![int(1)], Precision::Exact).unwrap();
        assert_eq!(t.values, vec![ObservedValue::Exact(x[1].clone())]);
        assert_eq!(t.scale, Scale::Unit);
        let z = observe(&x, Domain::Ztransform, vec![int(1), ratio(1, 2)], Precision::Bits(64)).unwrap();
        assert!(z.values[0].to_ball(64).intersects(&ztransform_eval(&x, &int(1), 64)));
        assert!(z.values[1].to_ball(64).intersects(&ztransform_eval(&x, &ratio(1, 2), 64)));
        assert!(observe(&x, Domain::Time, vec![int(3)], Precision::Exact).is_err());
        assert!(observe(&x, Domain::Time, vec![int(1), int(1)], Precision::Exact).is_err());
    }

    #[test]
    fn modulated_maps_match_direct_construction() {
        let grid = RoundingSpec::new(2, 3).unwrap();
        let x = Signal::new(vec![
            GaussianRational::new(ratio(1, 2), int(0)),
            GaussianRational::new(int(0), ratio(1, 2)),
            GaussianRational::new(ratio(1, 2), ratio(1, 2)),
        ]);
        let p = 96;
        // frequency-observed: y = zeta . x, then the unnormalized DFT sum
        let m = ModulationSpec::new(2, grid, 3, ModulationSide::FrequencyObserved).unwrap();
        let y = build_class_member(&m, &x, p);
        let map = ObservationMap::from_indices(3, Some(m), Domain::Fourier, &[0, 1, 2]).unwrap();
        let got = map.ball_values(&x, p);
        for (w, g) in got.iter().enumerate() {
            let mut acc = BallComplex::zero(p);
            for (k, yk) in y.iter().enumerate() {
                acc = acc.add(&root_ball(3, (w * k) as i64, p).mul(yk));
            }
            assert!(g.intersects(&acc));
        }
        // at w = d the row is e^{-i omega_k}
        let omegas = omega_grid(&m, 64).unwrap();
        let mut direct = BallComplex::zero(p);
        for (k, o) in omegas.iter().enumerate() {
            direct = direct.add(&exp_i_rational(&-o, p).mul_gaussian(&x[k]));
        }
        assert!(got[2].intersects(&direct));

        // time-observed: spectrum xi . x, time sample d is sum e^{i omega_k} x_k
        let m = ModulationSpec { side: ModulationSide::TimeObserved, ..m };
        let map = ObservationMap::from_indices(3, Some(m), Domain::Time, &[2]).unwrap();
        assert_eq!(map.scale(), Scale::InvSqrtN);
        let got = map.ball_values(&x, p);
        let mut direct = BallComplex::zero(p);
        for (k, o) in omegas.iter().enumerate() {
            direct = direct.add(&exp_i_rational(o, p).mul_gaussian(&x[k]));
        }
        assert!(got[0].intersects(&direct));
        let tiny = Dyadic::pow2(-(p as i64) + 8);
        assert!(got[0].radius < tiny);
    }

    #[test]
    fn observation_json() {
        let x = Signal::new(vec![GaussianRational::real(ratio(1, 2)), GaussianRational::zero()]);
        let o = observe(&x, Domain::Fourier, vec![int(0), int(1)], Precision::Exact).unwrap();
        let j = serde_json::to_string(&o).unwrap();
        assert!(j.starts_with(r#"{"domain":"fourier","n":2,"points":[0,1],"values":[{"cyclotomic""#));
        assert_eq!(serde_json::from_str::<SpectrumObservation>(&j).unwrap(), o);
        let z = observe(&x, Domain::Ztransform, vec![ratio(1, 3)], Precision::Bits(64)).unwrap();
        let j = serde_json::to_string(&z).unwrap();
        assert!(j.contains(r#""points":["1/3"]"#));
        assert_eq!(serde_json::from_str::<SpectrumObservation>(&j).unwrap(), z);
        let m: ModulationSpec =
            serde_json::from_str(r#"{"d":1,"nu1":2,"mu1":2,"n":2,"side":"frequency-observed"}"#).unwrap();
        assert_eq!(m.side, ModulationSide::FrequencyObserved);
        let s = dft_exact(&x);
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<ExactSpectrum>(&j).unwrap(), s);
    }

    fn arb_signal(max_n: usize) -> impl Strategy<Value = Signal> {
        prop::collection::vec((-50i64..50, 1i64..20, -50i64..50, 1i64..20), 1..=max_n).prop_map(|v| {
            Signal::new(v.into_iter().map(|(a, b, c, d)| GaussianRational::new(ratio(a, b), ratio(c, d))).collect())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn unitarity_and_parseval(x in arb_signal(64)) {
            let s = dft_exact(&x);
            prop_assert_eq!(idft_exact(&s).unwrap(), x.clone());
            let n = Rational::from_integer(BigInt::from(x.len()));
            prop_assert_eq!(s.sum_norm_sqr(), energy(&x) * n);
        }

        #[test]
        fn omega_linear(n in 2usize..12, dd in 1usize..12, nu1 in 2u32..11, mu1 in 0u32..6) {
            let d = 1 + dd % (n - 1);
            let m = ModulationSpec::new(d, RoundingSpec::new(nu1, mu1).unwrap(), n, ModulationSide::FrequencyObserved).unwrap();
            let w = omega_grid(&m, 128).unwrap();
            prop_assert!(w[0].is_zero());
            for (k, o) in w.iter().enumerate() {
                prop_assert_eq!(o, &(&w[1] * Rational::from_integer(BigInt::from(k))));
            }
        }
    }
}
