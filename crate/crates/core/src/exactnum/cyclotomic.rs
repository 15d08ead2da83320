//! Exact arithmetic in cyclotomic fields `Q(zeta_L)`.
//!
//! The generator is `zeta_L = e^{-2 pi i / L}`, matching the sign of the
//! forward transform kernel. Elements are stored in the power basis modulo the
//! `L`-th cyclotomic polynomial as an integer numerator vector over one positive
//! common denominator, so equal values of the same order share one representation.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::ball::{exp_i_ball, pi_enclosure, BallComplex, Dyadic};
use super::rational::{rational_vec_str, GaussianRational, Rational};
use crate::error::{Error, Result};

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

/// Prime factorization by trial division.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factor(n) == [(n, 1)]
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

pub fn mobius(n: u64) -> i64 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Coefficients (low degree first) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic_polynomial(n: u64) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n - 1 divided by every Phi_d, d | n, d < n
    let mut poly = vec![BigInt::zero(); n as usize + 1];
    poly[0] = -BigInt::one();
    poly[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d < n {
            poly = exact_divide_monic(&poly, &cyclotomic_polynomial(d));
        }
    }
    let poly = Arc::new(poly);
    cache.lock().unwrap().insert(n, poly.clone());
    poly
}

fn exact_divide_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = num.len() - 1 - dd;
    let mut quo = vec![BigInt::zero(); qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        quo[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quo
}

/// Reduces an integer polynomial in place modulo monic `phi`, returning the low part.
fn reduce_mod(mut poly: Vec<BigInt>, phi: &[BigInt]) -> Vec<BigInt> {
    let deg = phi.len() - 1;
    if poly.len() > deg {
        for i in (deg..poly.len()).rev() {
            let c = std::mem::take(&mut poly[i]);
            if c.is_zero() {
                continue;
            }
            let base = i - deg;
            for (j, pj) in phi[..deg].iter().enumerate() {
                if !pj.is_zero() {
                    poly[base + j] -= &c * pj;
                }
            }
        }
        poly.truncate(deg);
    }
    poly.resize(deg, BigInt::zero());
    poly
}

/// Element of `Q(zeta_L)`.
#[derive(Clone, Debug)]
pub struct CyclotomicNumber {
    order: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CyclotomicNumber {
    fn from_parts(order: u64, num: Vec<BigInt>, den: BigInt) -> Self {
        let mut x = CyclotomicNumber { order, num, den };
        x.canonicalize();
        x
    }

    fn canonicalize(&mut self) {
        if self.den.is_negative() {
            self.den = -self.den.clone();
            for c in &mut self.num {
                *c = -std::mem::take(c);
            }
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if self.num.iter().all(Zero::is_zero) {
            self.den = BigInt::one();
            return;
        }
        if !g.is_one() {
            for c in &mut self.num {
                *c /= &g;
            }
            self.den /= &g;
        }
    }

    pub fn zero(order: u64) -> Self {
        assert!(order >= 1, "order must be positive");
        let n = euler_phi(order) as usize;
        CyclotomicNumber { order, num: vec![BigInt::zero(); n], den: BigInt::one() }
    }

    pub fn one(order: u64) -> Self {
        Self::from_rational(order, &Rational::one())
    }

    pub fn from_rational(order: u64, q: &Rational) -> Self {
        let mut x = Self::zero(order);
        x.num[0] = q.numer().clone();
        x.den = q.denom().clone();
        x.canonicalize();
        x
    }

    /// `zeta_L^j = e^{-2 pi i j / L}`, exponent reduced mod `L` and the order
    /// reduced to `L / gcd(L, j)`.
    pub fn root(order: u64, j: i64) -> Self {
        assert!(order >= 1, "order must be positive");
        let e = j.rem_euclid(order as i64) as u64;
        let g = gcd_u64(order, e);
        let (l, e) = if e == 0 { (1, 0) } else { (order / g, e / g) };
        Self::from_monomial(l, e, BigInt::one())
    }

    /// `c * zeta_L^e` in order `L` (no order reduction).
    fn from_monomial(order: u64, e: u64, c: BigInt) -> Self {
        let mut acc = vec![BigInt::zero(); order as usize];
        acc[(e % order) as usize] = c;
        Self::from_exponent_array(order, acc, BigInt::one())
    }

    /// Order-`L` root `zeta_L^j` without reducing the order.
    pub fn root_in(order: u64, j: i64) -> Self {
        Self::from_monomial(order, j.rem_euclid(order as i64) as u64, BigInt::one())
    }

    /// Builds `(sum_e acc[e] zeta^e) / den` from a length-`L` array of integer
    /// coefficients indexed by exponent.
    pub fn from_exponent_array(order: u64, acc: Vec<BigInt>, den: BigInt) -> Self {
        debug_assert_eq!(acc.len(), order as usize);
        let phi = cyclotomic_polynomial(order);
        let num = reduce_mod(acc, &phi);
        Self::from_parts(order, num, den)
    }

    /// Embeds a Gaussian rational. Needs `4 | L` unless the value is real.
    pub fn from_gaussian(order: u64, z: &GaussianRational) -> Result<Self> {
        if z.im.is_zero() {
            return Ok(Self::from_rational(order, &z.re));
        }
        if order % 4 != 0 {
            return Err(Error::InvalidArgument(format!(
                "Q(zeta_{order}) does not contain i"
            )));
        }
        // i = zeta_4^{-1} = zeta_L^{3L/4}
        let den = z.re.denom().lcm(z.im.denom());
        let mut acc = vec![BigInt::zero(); order as usize];
        acc[0] = z.re.numer() * (&den / z.re.denom());
        acc[(3 * order / 4) as usize] = z.im.numer() * (&den / z.im.denom());
        Ok(Self::from_exponent_array(order, acc, den))
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.num.len()
    }

    /// Power-basis coordinates.
    pub fn coeffs(&self) -> Vec<Rational> {
        self.num
            .iter()
            .map(|c| Rational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn from_coeffs(order: u64, coeffs: &[Rational]) -> Result<Self> {
        let n = euler_phi(order) as usize;
        if coeffs.len() != n {
            return Err(Error::InvalidArgument(format!(
                "order {order} needs {n} coefficients, got {}",
                coeffs.len()
            )));
        }
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Ok(Self::from_parts(order, num, den))
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    /// `sum a * zeta_L^e` over `(a, e)` terms whose orders divide `L`, reduced once.
    pub fn shifted_sum<'a>(order: u64, terms: impl IntoIterator<Item = (&'a Self, u64)>) -> Self {
        let terms: Vec<(Self, u64)> = terms.into_iter().map(|(a, e)| (a.lift(order), e)).collect();
        let den = terms.iter().fold(BigInt::one(), |acc, (a, _)| acc.lcm(&a.den));
        let mut acc = vec![BigInt::zero(); order as usize];
        for (a, e) in &terms {
            let f = &den / &a.den;
            for (j, c) in a.num.iter().enumerate() {
                if !c.is_zero() {
                    acc[((j as u64 + e) % order) as usize] += c * &f;
                }
            }
        }
        Self::from_exponent_array(order, acc, den)
    }

    /// Re-expresses the value in `Q(zeta_M)` for a multiple `M` of the order.
    pub fn lift(&self, target: u64) -> Self {
        assert!(target % self.order == 0, "lift target must be a multiple of the order");
        if target == self.order {
            return self.clone();
        }
        let step = target / self.order;
        let mut acc = vec![BigInt::zero(); target as usize];
        for (j, c) in self.num.iter().enumerate() {
            acc[j * step as usize] = c.clone();
        }
        Self::from_exponent_array(target, acc, self.den.clone())
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.order == b.order {
            return (a.clone(), b.clone());
        }
        let l = lcm_u64(a.order, b.order);
        (a.lift(l), b.lift(l))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = Self::common(self, other);
            return a.add(&b);
        }
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(x, y)| x * &other.den + y * &self.den)
            .collect();
        Self::from_parts(self.order, num, &self.den * &other.den)
    }

    pub fn neg(&self) -> Self {
        CyclotomicNumber {
            order: self.order,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.order != other.order {
            let (a, b) = Self::common(self, other);
            return a.mul(&b);
        }
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.order);
        }
        let n = self.num.len();
        let mut prod = vec![BigInt::zero(); 2 * n - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let phi = cyclotomic_polynomial(self.order);
        Self::from_parts(self.order, reduce_mod(prod, &phi), &self.den * &other.den)
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        Self::from_parts(
            self.order,
            self.num.iter().map(|c| c * q.numer()).collect(),
            &self.den * q.denom(),
        )
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against the
    /// cyclotomic polynomial.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let phi: Vec<Rational> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        let a: Vec<Rational> = self.coeffs();
        let s = poly_inverse_mod(&a, &phi);
        Self::from_coeffs(self.order, &s)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.order != other.order {
            let (a, b) = Self::common(self, other);
            return a.div(&b);
        }
        Ok(self.mul(&other.inv()?))
    }

    /// Galois action `zeta -> zeta^k` for `k` coprime to the order.
    pub fn galois(&self, k: i64) -> Self {
        let l = self.order;
        let k = k.rem_euclid(l as i64) as u64;
        assert!(gcd_u64(k.max(1), l) == 1 || l == 1, "Galois exponent must be a unit");
        let mut acc = vec![BigInt::zero(); l as usize];
        for (j, c) in self.num.iter().enumerate() {
            acc[((j as u64 * k) % l) as usize] += c;
        }
        Self::from_exponent_array(l, acc, self.den.clone())
    }

    /// Complex conjugate, `zeta -> zeta^{-1}`.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    /// The value as a rational, when it is one.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.num.iter().skip(1).all(Zero::is_zero) {
            Some(Rational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// The value as a Gaussian rational, when it lies in `Q(i)`.
    pub fn to_gaussian(&self) -> Option<GaussianRational> {
        let c = self.conj();
        let half = Rational::new(BigInt::one(), BigInt::from(2));
        let re = self.add(&c).mul_rational(&half).as_rational()?;
        let diff = self.sub(&c);
        if diff.is_zero() {
            return Some(GaussianRational::real(re));
        }
        if self.order % 4 != 0 {
            return None;
        }
        // im = (v - conj v) / (2i) = (v - conj v) * zeta_4 / 2, zeta_4 = -i
        let zeta4 = Self::root_in(self.order, (self.order / 4) as i64);
        let im = diff.mul(&zeta4).mul_rational(&half).as_rational()?;
        Some(GaussianRational::new(re, im))
    }

    /// Field trace divided by the degree; invariant under lifting.
    pub fn normalized_trace(&self) -> Rational {
        let l = self.order;
        let mut t = Rational::zero();
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let g = gcd_u64(l, j as u64);
            let m = l / g;
            let mu = mobius(m);
            if mu != 0 {
                t += Rational::new(c * mu, BigInt::from(euler_phi(m)));
            }
        }
        t / Rational::from_integer(self.den.clone())
    }

    /// Enclosure of the complex embedding with radius at most `2^(2-p) * (1 + |a|)`.
    pub fn to_ball(&self, precision: u32) -> BallComplex {
        assert!(precision >= 2, "precision must be at least 2 bits");
        if self.is_zero() {
            return BallComplex::zero(precision);
        }
        let mut work = precision + 16 + 2 * (64 - (self.num.len() as u64).leading_zeros());
        loop {
            let z = self.to_ball_at(work).rounded(precision);
            // |a| >= |mid| - rad; abs_mid_upper overshoots |mid| by a relative 2^-28 at most
            let mid_lower = z.abs_mid_upper().to_rational() * (Rational::one() - Dyadic::pow2(-28).to_rational());
            let lower = (mid_lower - z.radius.to_rational()).max(Rational::zero());
            let bound = (Rational::one() + lower) * Dyadic::pow2(2 - precision as i64).to_rational();
            if z.radius.to_rational() <= bound {
                return z;
            }
            work *= 2;
        }
    }

    fn to_ball_at(&self, work: u32) -> BallComplex {
        let table = root_table(self.order, work);
        let mut acc = BallComplex::zero(work);
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let q = Rational::new(c.clone(), self.den.clone());
            acc = acc.add(&table[j].mul_gaussian(&GaussianRational::real(q)));
        }
        acc
    }
}

/// Enclosures of `zeta_L^j` for `j < phi(L)` at `work` bits.
fn root_table(order: u64, work: u32) -> Vec<BallComplex> {
    let n = euler_phi(order) as usize;
    let pi = pi_enclosure(work + 8);
    (0..n)
        .map(|j| {
            if j == 0 {
                return BallComplex::one(work);
            }
            let theta = pi.mul_rational(&Rational::new(BigInt::from(-2 * j as i64), BigInt::from(order)), work as u64 + 8);
            exp_i_ball(&theta, work)
        })
        .collect()
}

fn poly_trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_is_zero(p: &[Rational]) -> bool {
    p.iter().all(Zero::is_zero)
}

/// `(q, r)` with `a = q b + r`, `deg r < deg b`.
fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut b = b.to_vec();
    poly_trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if c.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            r[i + j] -= &c * bj;
        }
        q[i] = c;
    }
    r.truncate(db.max(1));
    poly_trim(&mut r);
    (q, r)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    poly_trim(&mut out);
    out
}

/// Inverse of `a` modulo irreducible `m`, reduced to length `deg m`.
fn poly_inverse_mod(a: &[Rational], m: &[Rational]) -> Vec<Rational> {
    let deg = m.len() - 1;
    let (mut r0, mut r1) = (m.to_vec(), {
        let (_, r) = poly_divmod(a, m);
        r
    });
    let (mut s0, mut s1) = (vec![Rational::zero()], vec![Rational::one()]);
    while r1.len() > 1 {
        let (q, r) = poly_divmod(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        // keep remainders monic to limit coefficient growth
        if !poly_is_zero(&r1) {
            let lead = r1.last().unwrap().clone();
            if !lead.is_one() {
                for c in &mut r1 {
                    *c /= &lead;
                }
                for c in &mut s1 {
                    *c /= &lead;
                }
            }
        }
    }
    let c = r1[0].clone();
    debug_assert!(!c.is_zero(), "gcd with an irreducible modulus must be a unit");
    let mut s: Vec<Rational> = s1.iter().map(|x| x / &c).collect();
    let (_, rem) = poly_divmod(&s, m);
    s = rem;
    s.resize(deg, Rational::zero());
    s
}

impl PartialEq for CyclotomicNumber {
    /// Value equality; different orders are compared in their common field.
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.den == other.den && self.num == other.num;
        }
        let (a, b) = Self::common(self, other);
        a == b
    }
}

impl Eq for CyclotomicNumber {}

impl Hash for CyclotomicNumber {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.normalized_trace().hash(state);
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})z{}", self.order)?,
                _ => write!(f, "({c})z{}^{j}", self.order)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CyclotomicRepr {
    order: u64,
    #[serde(with = "rational_vec_str")]
    coeffs: Vec<Rational>,
}

impl Serialize for CyclotomicNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CyclotomicRepr { order: self.order, coeffs: self.coeffs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CyclotomicNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CyclotomicRepr::deserialize(d)?;
        if r.order == 0 {
            return Err(serde::de::Error::custom("order must be positive"));
        }
        Self::from_coeffs(r.order, &r.coeffs).map_err(serde::de::Error::custom)
    }
}

/// Checks that `x` lies in the ball; helper for callers holding exact values.
pub fn ball_contains(ball: &BallComplex, x: &CyclotomicNumber) -> bool {
    // embed at higher precision and test intersection; the embedding is itself an enclosure
    let p = ball.precision.max(64) + 32;
    let e = x.to_ball(p);
    ball.intersects(&e)
}
