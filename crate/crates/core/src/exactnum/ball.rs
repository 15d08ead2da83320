//! Rigorous ball arithmetic over dyadic numbers.
//!
//! Every value carries a midpoint `m` and radius `r` such that the represented
//! true quantity lies in the closed disk (or interval) of radius `r` about `m`.
//! Rounding is always explicit: after each operation the midpoint is rounded to
//! the requested number of significant bits and the exact rounding error is
//! added to the radius. Radii are kept short and rounded upward.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{format_rational, parse_rational, GaussianRational, Rational};

/// Significant bits kept in radii.
const RADIUS_BITS: u64 = 30;

/// Exact number `mant * 2^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
    Nearest,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic::default()
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp: e }
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    /// Position of the leading bit: `2^(msb-1) <= |x| < 2^msb`. Zero maps to `i64::MIN`.
    pub fn msb(&self) -> i64 {
        if self.is_zero() {
            i64::MIN
        } else {
            self.mant.bits() as i64 + self.exp
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        Dyadic::new(&self.mant * n, self.exp)
    }

    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Rounds to `prec` significant bits.
    pub fn round(&self, prec: u64, mode: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec {
            return self.clone();
        }
        let shift = bits - prec;
        let mant = shift_round(&self.mant, shift, mode);
        Dyadic::new(mant, self.exp + shift as i64)
    }

    /// Rounds onto the grid `2^e`.
    pub fn round_to_exp(&self, e: i64, mode: Round) -> Self {
        if self.exp >= e || self.is_zero() {
            return self.clone();
        }
        let shift = (e - self.exp) as u64;
        Dyadic::new(shift_round(&self.mant, shift, mode), e)
    }

    pub fn to_rational(&self) -> Rational {
        if self.exp >= 0 {
            Rational::from_integer(&self.mant << self.exp as u64)
        } else {
            Rational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// Nearest dyadic on the grid `2^-scale` in the given direction.
    pub fn from_rational(q: &Rational, scale: i64, mode: Round) -> Self {
        let (num, den) = (q.numer(), q.denom());
        let (scaled, den) = if scale >= 0 {
            (num << scale as u64, den.clone())
        } else {
            (num.clone(), den << (-scale) as u64)
        };
        let (quo, rem) = scaled.div_mod_floor(&den);
        let mant = if rem.is_zero() {
            quo
        } else {
            match mode {
                Round::Down => quo,
                Round::Up => quo + 1,
                Round::Nearest => {
                    if (&rem << 1u32) >= den {
                        quo + 1
                    } else {
                        quo
                    }
                }
            }
        };
        Dyadic::new(mant, -scale)
    }

    /// Short upper bound on a nonnegative rational.
    pub fn upper_of(q: &Rational) -> Self {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
        Dyadic::from_rational(q, RADIUS_BITS as i64 - mag + 1, Round::Up)
    }

    /// Upper bound with a short mantissa.
    pub fn upper_short(&self) -> Self {
        self.round(RADIUS_BITS, Round::Up)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(60, Round::Nearest);
        r.mant.to_f64().unwrap_or(f64::NAN) * 2f64.powi(r.exp.clamp(-2000, 2000) as i32)
    }
}

fn shift_round(mant: &BigInt, shift: u64, mode: Round) -> BigInt {
    // `>>` on negative BigInt floors.
    let floor = mant >> shift;
    let rest = mant - (&floor << shift);
    if rest.is_zero() {
        return floor;
    }
    match mode {
        Round::Down => floor,
        Round::Up => floor + 1,
        Round::Nearest => {
            let half = BigInt::one() << (shift - 1);
            if rest >= half {
                floor + 1
            } else {
                floor
            }
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).mant.sign().cmp(&Sign::NoSign)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_rational(&self.to_rational()))
    }
}

/// `ceil(x / 2^e)` as an integer.
fn scaled_int_up(x: &Dyadic, e: i64) -> BigInt {
    if x.exp >= e {
        &x.mant << (x.exp - e) as u64
    } else {
        shift_round(&x.mant, (e - x.exp) as u64, Round::Up)
    }
}

/// Upper bound on `sqrt(a^2 + b^2)`.
pub fn hypot_upper(a: &Dyadic, b: &Dyadic) -> Dyadic {
    if a.is_zero() {
        return b.abs().upper_short();
    }
    if b.is_zero() {
        return a.abs().upper_short();
    }
    let top = a.msb().max(b.msb());
    // scale both onto a 64-bit grid below the leading bit, rounding magnitudes up
    let e = top - 64;
    let ua = scaled_int_up(&a.abs(), e);
    let ub = scaled_int_up(&b.abs(), e);
    let s = &ua * &ua + &ub * &ub;
    let root = s.sqrt() + 1u32;
    Dyadic::new(root, e).upper_short()
}

/// Real interval `[mid - rad, mid + rad]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealBall {
    pub mid: Dyadic,
    pub rad: Dyadic,
}

impl RealBall {
    pub fn exact(mid: Dyadic) -> Self {
        RealBall { mid, rad: Dyadic::zero() }
    }

    /// Enclosure of `q` with about `prec` significant bits.
    pub fn from_rational(q: &Rational, prec: u64) -> Self {
        if q.is_zero() {
            return RealBall::exact(Dyadic::zero());
        }
        let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
        let scale = prec as i64 - mag + 1;
        let mid = Dyadic::from_rational(q, scale, Round::Nearest);
        let exact = mid.to_rational() == *q;
        let rad = if exact { Dyadic::zero() } else { Dyadic::pow2(-scale) };
        RealBall { mid, rad }
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn width(&self) -> Dyadic {
        self.rad.shl(1)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        lo <= *q && *q <= hi
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains_ball(&self, other: &RealBall) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn neg(&self) -> Self {
        RealBall { mid: self.mid.neg(), rad: self.rad.clone() }
    }

    pub fn add(&self, other: &Self, prec: u64) -> Self {
        let exact = self.mid.add(&other.mid);
        let mid = exact.round(prec, Round::Nearest);
        let err = exact.sub(&mid).abs();
        let rad = self.rad.add(&other.rad).add(&err).upper_short();
        RealBall { mid, rad }
    }

    pub fn sub(&self, other: &Self, prec: u64) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Self, prec: u64) -> Self {
        let exact = self.mid.mul(&other.mid);
        let mid = exact.round(prec, Round::Nearest);
        let err = exact.sub(&mid).abs();
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad))
            .add(&err)
            .upper_short();
        RealBall { mid, rad }
    }

    /// Multiplication by an exact rational.
    pub fn mul_rational(&self, q: &Rational, prec: u64) -> Self {
        let exact = self.mid.to_rational() * q;
        let mid_ball = RealBall::from_rational(&exact, prec);
        let scaled_rad = Dyadic::upper_of(&(self.rad.to_rational() * q.abs()));
        RealBall {
            mid: mid_ball.mid,
            rad: mid_ball.rad.add(&scaled_rad).upper_short(),
        }
    }

    /// `floor(x)` when both endpoints agree.
    pub fn floor_if_decided(&self) -> Option<BigInt> {
        let lo = self.lower().to_rational().floor().to_integer();
        let hi = self.upper().to_rational().floor().to_integer();
        (lo == hi).then_some(lo)
    }
}

impl fmt::Display for RealBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.17} +/- {:.3e}]", self.mid.to_f64(), self.rad.to_f64())
    }
}

/// Complex disk with a dyadic midpoint and an upper-rounded radius.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallComplex {
    pub mid_re: Dyadic,
    pub mid_im: Dyadic,
    pub radius: Dyadic,
    pub precision: u32,
}

impl BallComplex {
    pub fn exact(re: Dyadic, im: Dyadic, precision: u32) -> Self {
        BallComplex { mid_re: re, mid_im: im, radius: Dyadic::zero(), precision }
    }

    pub fn zero(precision: u32) -> Self {
        Self::exact(Dyadic::zero(), Dyadic::zero(), precision)
    }

    pub fn one(precision: u32) -> Self {
        Self::exact(Dyadic::from_int(1), Dyadic::zero(), precision)
    }

    pub fn from_gaussian(z: &GaussianRational, precision: u32) -> Self {
        let re = RealBall::from_rational(&z.re, precision as u64);
        let im = RealBall::from_rational(&z.im, precision as u64);
        BallComplex {
            mid_re: re.mid,
            mid_im: im.mid,
            radius: re.rad.add(&im.rad).upper_short(),
            precision,
        }
    }

    pub fn from_parts(re: &RealBall, im: &RealBall, precision: u32) -> Self {
        BallComplex {
            mid_re: re.mid.clone(),
            mid_im: im.mid.clone(),
            radius: hypot_upper(&re.rad, &im.rad),
            precision,
        }
    }

    pub fn re_ball(&self) -> RealBall {
        RealBall { mid: self.mid_re.clone(), rad: self.radius.clone() }
    }

    pub fn im_ball(&self) -> RealBall {
        RealBall { mid: self.mid_im.clone(), rad: self.radius.clone() }
    }

    fn prec(&self, other: &Self) -> u64 {
        self.precision.max(other.precision) as u64
    }

    fn rounded_parts(re: Dyadic, im: Dyadic, prec: u64) -> (Dyadic, Dyadic, Dyadic) {
        let r = re.round(prec, Round::Nearest);
        let i = im.round(prec, Round::Nearest);
        let err = re.sub(&r).abs().add(&im.sub(&i).abs());
        (r, i, err)
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec(other);
        let (re, im, err) = Self::rounded_parts(self.mid_re.add(&other.mid_re), self.mid_im.add(&other.mid_im), prec);
        BallComplex {
            mid_re: re,
            mid_im: im,
            radius: self.radius.add(&other.radius).add(&err).upper_short(),
            precision: prec as u32,
        }
    }

    pub fn neg(&self) -> Self {
        BallComplex {
            mid_re: self.mid_re.neg(),
            mid_im: self.mid_im.neg(),
            radius: self.radius.clone(),
            precision: self.precision,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn conj(&self) -> Self {
        BallComplex {
            mid_re: self.mid_re.clone(),
            mid_im: self.mid_im.neg(),
            radius: self.radius.clone(),
            precision: self.precision,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec(other);
        let re = self.mid_re.mul(&other.mid_re).sub(&self.mid_im.mul(&other.mid_im));
        let im = self.mid_re.mul(&other.mid_im).add(&self.mid_im.mul(&other.mid_re));
        let (re, im, err) = Self::rounded_parts(re, im, prec);
        let a = self.abs_mid_upper();
        let b = other.abs_mid_upper();
        let radius = a
            .mul(&other.radius)
            .add(&b.mul(&self.radius))
            .add(&self.radius.mul(&other.radius))
            .add(&err)
            .upper_short();
        BallComplex { mid_re: re, mid_im: im, radius, precision: prec as u32 }
    }

    /// Product with an exact Gaussian rational.
    pub fn mul_gaussian(&self, z: &GaussianRational) -> Self {
        if z.is_zero() {
            return BallComplex::zero(self.precision);
        }
        self.mul(&BallComplex::from_gaussian(z, self.precision + 16))
    }

    /// Division by a positive integer.
    pub fn div_int(&self, n: u64) -> Self {
        let prec = self.precision as u64;
        let q = Rational::from_integer(BigInt::from(n));
        let re = RealBall::exact(self.mid_re.clone()).mul_rational(&q.recip(), prec);
        let im = RealBall::exact(self.mid_im.clone()).mul_rational(&q.recip(), prec);
        let rad = Dyadic::upper_of(&(self.radius.to_rational() / q));
        BallComplex {
            mid_re: re.mid,
            mid_im: im.mid,
            radius: rad.add(&re.rad).add(&im.rad).upper_short(),
            precision: self.precision,
        }
    }

    /// Upper bound on the midpoint modulus.
    pub fn abs_mid_upper(&self) -> Dyadic {
        hypot_upper(&self.mid_re, &self.mid_im)
    }

    /// Upper bound on the modulus of every point in the ball.
    pub fn abs_upper(&self) -> Dyadic {
        self.abs_mid_upper().add(&self.radius).upper_short()
    }

    /// `|mid|^2` exactly.
    fn mid_norm_sqr(&self) -> Dyadic {
        self.mid_re.mul(&self.mid_re).add(&self.mid_im.mul(&self.mid_im))
    }

    pub fn contains_zero(&self) -> bool {
        self.mid_norm_sqr() <= self.radius.mul(&self.radius)
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains_zero()
    }

    pub fn contains_point(&self, z: &GaussianRational) -> bool {
        let dr = self.mid_re.to_rational() - &z.re;
        let di = self.mid_im.to_rational() - &z.im;
        let r = self.radius.to_rational();
        &dr * &dr + &di * &di <= &r * &r
    }

    /// Whether the two disks share a point.
    pub fn intersects(&self, other: &Self) -> bool {
        let dr = self.mid_re.sub(&other.mid_re);
        let di = self.mid_im.sub(&other.mid_im);
        let r = self.radius.add(&other.radius);
        dr.mul(&dr).add(&di.mul(&di)) <= r.mul(&r)
    }

    /// Whether `other` lies entirely inside `self`.
    pub fn contains_ball(&self, other: &Self) -> bool {
        if other.radius > self.radius {
            return false;
        }
        let dr = self.mid_re.sub(&other.mid_re);
        let di = self.mid_im.sub(&other.mid_im);
        let slack = self.radius.sub(&other.radius);
        dr.mul(&dr).add(&di.mul(&di)) <= slack.mul(&slack)
    }

    /// Rounds the midpoint to `prec` significant bits, widening the radius.
    pub fn rounded(&self, prec: u32) -> Self {
        let (re, im, err) = Self::rounded_parts(self.mid_re.clone(), self.mid_im.clone(), prec as u64);
        BallComplex {
            mid_re: re,
            mid_im: im,
            radius: self.radius.add(&err).upper_short(),
            precision: prec,
        }
    }
}

impl fmt::Display for BallComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.17}, {:.17}) +/- {:.3e}",
            self.mid_re.to_f64(),
            self.mid_im.to_f64(),
            self.radius.to_f64()
        )
    }
}

/// JSON form: exact rational strings for midpoint and radius.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallComplexRepr {
    mid_re: String,
    mid_im: String,
    radius: String,
    precision: u32,
}

fn dyadic_from_str(s: &str) -> Result<Dyadic, String> {
    let q = parse_rational(s).map_err(|e| e.to_string())?;
    let den = q.denom();
    if !(den & (den - BigInt::one())).is_zero() {
        return Err(format!("{s} is not a dyadic rational"));
    }
    let e = den.bits() as i64 - 1;
    Ok(Dyadic::new(q.numer().clone(), -e))
}

impl Serialize for BallComplex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BallComplexRepr {
            mid_re: self.mid_re.to_string(),
            mid_im: self.mid_im.to_string(),
            radius: self.radius.to_string(),
            precision: self.precision,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BallComplex {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = BallComplexRepr::deserialize(d)?;
        let radius = dyadic_from_str(&r.radius).map_err(serde::de::Error::custom)?;
        if radius.is_negative() {
            return Err(serde::de::Error::custom("negative radius"));
        }
        Ok(BallComplex {
            mid_re: dyadic_from_str(&r.mid_re).map_err(serde::de::Error::custom)?,
            mid_im: dyadic_from_str(&r.mid_im).map_err(serde::de::Error::custom)?,
            radius,
            precision: r.precision,
        })
    }
}

fn guard_bits(prec: u64) -> u64 {
    2 * (64 - prec.leading_zeros() as u64) + 16
}

/// arctan(1/n) scaled by `2^w`, with an error bound in units of `2^-w`.
fn arctan_inv_fixed(n: u64, w: u64) -> (BigInt, u64) {
    let n2 = BigInt::from(n * n);
    let mut power = (BigInt::one() << w) / BigInt::from(n);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &n2;
        k += 1;
    }
    (sum, 2 * k + 4)
}

/// Rigorous enclosure of pi, of width at most `2^(4-p)`.
pub fn pi_enclosure(precision: u32) -> RealBall {
    assert!(precision >= 2, "precision must be at least 2 bits");
    let p = precision as u64;
    let w = p + guard_bits(p);
    let (a5, e5) = arctan_inv_fixed(5, w);
    let (a239, e239) = arctan_inv_fixed(239, w);
    let fixed = a5 * 16 - a239 * 4;
    let err_units = 16 * e5 + 4 * e239;
    let raw = RealBall {
        mid: Dyadic::new(fixed, -(w as i64)),
        rad: Dyadic::new(BigInt::from(err_units), -(w as i64)).upper_short(),
    };
    // slack of 2^(2-p) makes enclosures at increasing precision nest
    let mid = raw.mid.round(p + 4, Round::Nearest);
    let err = raw.mid.sub(&mid).abs();
    let slack = Dyadic::pow2(2 - p as i64);
    RealBall { mid, rad: raw.rad.add(&err).add(&slack).upper_short() }
}

/// `e^{i theta}` for an exact dyadic angle, at `w` working bits.
fn exp_i_dyadic(theta: &Dyadic, w: u64) -> BallComplex {
    if theta.is_zero() {
        return BallComplex::one(w as u32);
    }
    // halve until |x| <= 2^-halvings_extra
    let extra = (w.sqrt() / 2).max(4) as i64;
    let r = (theta.msb() + extra).max(0);
    let work = w + 2 * r as u64 + 32;
    let x = theta.shl(-r);
    let xm = x.mantissa().clone();
    let xe = x.exponent();
    // fixed point at 2^-work: term_n = term_{n-1} * x / n
    let mut re = BigInt::one() << work;
    let mut im = BigInt::zero();
    let mut term = BigInt::one() << work;
    let mut n = 1u64;
    loop {
        let prod = &term * &xm;
        let shifted = if xe >= 0 { prod << xe as u64 } else { prod >> (-xe) as u64 };
        term = shifted / BigInt::from(n);
        if term.is_zero() {
            break;
        }
        // (i x)^n: n mod 4 selects re/im and sign
        match n % 4 {
            1 => im += &term,
            2 => re -= &term,
            3 => im -= &term,
            _ => re += &term,
        }
        n += 1;
    }
    let err = Dyadic::new(BigInt::from(2 * n + 8), -(work as i64)).upper_short();
    let mut z = BallComplex {
        mid_re: Dyadic::new(re, -(work as i64)),
        mid_im: Dyadic::new(im, -(work as i64)),
        radius: err,
        precision: work as u32,
    };
    for _ in 0..r {
        z = z.mul(&z);
    }
    z
}

/// Enclosure of `e^{i theta}` for a real ball `theta`; the unit-speed derivative
/// lets the angle radius pass straight into the output radius.
pub fn exp_i_ball(theta: &RealBall, precision: u32) -> BallComplex {
    let p = precision as u64;
    let mut z = exp_i_dyadic(&theta.mid, p + guard_bits(p));
    z.radius = z.radius.add(&theta.rad).upper_short();
    z.rounded(precision)
}

/// Rigorous enclosure of `e^{iq}` for rational `q`.
pub fn exp_i_rational(q: &Rational, precision: u32) -> BallComplex {
    assert!(precision >= 2, "precision must be at least 2 bits");
    let p = precision as u64;
    let theta = RealBall::from_rational(q, p + guard_bits(p) + 8);
    exp_i_ball(&theta, precision)
}
