//! Truncation rounding onto base-`nu` grids, digit extraction, the marker
//! encoding that makes a signal's support readable from its component sum, and
//! finite signal classes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, parse_rational, GaussianRational, Rational};
use crate::signal::Signal;

/// Grid `nu^-mu Z` reached by truncation toward zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundingSpec {
    pub nu: u32,
    pub mu: u32,
}

impl RoundingSpec {
    pub fn new(nu: u32, mu: u32) -> Result<Self> {
        if nu < 2 {
            return Err(Error::InvalidArgument(format!("base must be at least 2, got {nu}")));
        }
        Ok(RoundingSpec { nu, mu })
    }

    /// `nu^mu`.
    pub fn scale(&self) -> BigInt {
        num_traits::pow(BigInt::from(self.nu), self.mu as usize)
    }

    /// Grid step `nu^-mu`.
    pub fn step(&self) -> Rational {
        Rational::new(BigInt::one(), self.scale())
    }
}

/// Parameters of the marker encoding: base `nu`, rounding depth `M`, length `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSpec {
    pub nu: u32,
    #[serde(rename = "M")]
    pub big_m: u32,
    pub n: usize,
}

impl EncodingSpec {
    pub fn new(nu: u32, big_m: u32, n: usize) -> Result<Self> {
        if nu < 2 {
            return Err(Error::InvalidArgument(format!("base must be at least 2, got {nu}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("length must be positive".into()));
        }
        Ok(EncodingSpec { nu, big_m, n })
    }

    pub fn rounding(&self) -> RoundingSpec {
        RoundingSpec { nu: self.nu, mu: self.big_m }
    }

    /// Fractional digit position of the marker for index `k`.
    pub fn marker_position(&self, k: usize) -> u32 {
        self.big_m + 1 + k as u32
    }

    /// `nu^-(M+1+k)`.
    pub fn marker(&self, k: usize) -> Rational {
        Rational::new(
            BigInt::one(),
            num_traits::pow(BigInt::from(self.nu), self.marker_position(k) as usize),
        )
    }
}

/// Floor with the negative branch `a in (k-1, k]`, i.e. truncation toward zero.
pub fn floor_toward_zero(a: &Rational) -> BigInt {
    a.trunc().to_integer()
}

fn round_real(spec: &RoundingSpec, a: &Rational) -> Rational {
    let s = spec.scale();
    Rational::new(floor_toward_zero(&(a * Rational::from_integer(s.clone()))), s)
}

/// Componentwise `nu^-mu * floor(nu^mu * part)`.
pub fn round_trunc(spec: &RoundingSpec, z: &GaussianRational) -> GaussianRational {
    GaussianRational::new(round_real(spec, &z.re), round_real(spec, &z.im))
}

pub fn round_signal(spec: &RoundingSpec, x: &Signal) -> Signal {
    Signal::new(x.iter().map(|z| round_trunc(spec, z)).collect())
}

/// Whether every part of every component lies on the `nu^-mu` grid.
pub fn on_grid(spec: &RoundingSpec, x: &Signal) -> bool {
    x.iter().all(|z| round_trunc(spec, z) == *z)
}

/// Whether `q` has a terminating base-`nu` expansion.
pub fn is_terminating(nu: u32, q: &Rational) -> bool {
    let mut den = q.denom().clone();
    let nu = BigInt::from(nu);
    loop {
        if den.is_one() {
            return true;
        }
        let g = den.gcd(&nu);
        if g.is_one() {
            return false;
        }
        while (&den % &g).is_zero() {
            den /= &g;
        }
    }
}

/// Coefficient of `nu^-k` in the terminating base-`nu` expansion of `a >= 0`.
pub fn digit(nu: u32, k: i64, a: &Rational) -> Result<u32> {
    if a.is_negative() {
        return Err(Error::NegativeInput);
    }
    if !is_terminating(nu, a) {
        return Err(Error::NonTerminatingExpansion { nu });
    }
    let base = BigInt::from(nu);
    let p = num_traits::pow(base.clone(), k.unsigned_abs() as usize);
    let shifted = if k >= 0 {
        a * Rational::from_integer(p)
    } else {
        a / Rational::from_integer(p)
    };
    let d = shifted.floor().to_integer().mod_floor(&base);
    Ok(d.to_u32().expect("digit below base"))
}

/// `rho_{nu,M}(z)` plus the marker `nu^-(M+1+k)` on the real part when
/// `z != 0`, and on the imaginary part when `Im z != 0`.
pub fn zeta_encode(enc: &EncodingSpec, k: usize, z: &GaussianRational) -> Result<GaussianRational> {
    if !z.is_nonnegative() {
        return Err(Error::NegativeComponent);
    }
    let mut out = round_trunc(&enc.rounding(), z);
    if !z.is_zero() {
        let m = enc.marker(k);
        out.re += &m;
        if !z.im.is_zero() {
            out.im += m;
        }
    }
    Ok(out)
}

/// Encodes every component; the result is a fixed point of the encoding.
pub fn encode_signal(enc: &EncodingSpec, x: &Signal) -> Result<Signal> {
    if x.len() != enc.n {
        return Err(Error::InvalidArgument(format!(
            "encoding expects length {}, signal has {}",
            enc.n,
            x.len()
        )));
    }
    x.iter()
        .enumerate()
        .map(|(k, z)| zeta_encode(enc, k, z))
        .collect::<Result<Vec<_>>>()
        .map(Signal::new)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassKind {
    #[serde(rename = "plainX")]
    PlainX,
    #[serde(rename = "encodedY")]
    EncodedY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassGrid {
    Plain(RoundingSpec),
    Encoded(EncodingSpec),
}

/// Finite signal class. Each real and imaginary part lies in `[0, bound]`;
/// `plainX` members sit on the `nu^-mu` grid, `encodedY` members are fixed
/// points of the marker encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClassSpecRepr", into = "ClassSpecRepr")]
pub struct ClassSpec {
    pub grid: ClassGrid,
    pub n: usize,
    pub bound: Rational,
    pub sparsity: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassSpecRepr {
    kind: ClassKind,
    nu: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<u32>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    big_m: Option<u32>,
    n: usize,
    bound: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sparsity: Option<usize>,
}

impl TryFrom<ClassSpecRepr> for ClassSpec {
    type Error = Error;
    fn try_from(r: ClassSpecRepr) -> Result<Self> {
        let bound = parse_rational(&r.bound)?;
        let grid = match (r.kind, r.mu, r.big_m) {
            (ClassKind::PlainX, Some(mu), None) => ClassGrid::Plain(RoundingSpec::new(r.nu, mu)?),
            (ClassKind::EncodedY, None, Some(m)) => ClassGrid::Encoded(EncodingSpec::new(r.nu, m, r.n)?),
            (ClassKind::PlainX, _, _) => {
                return Err(Error::InvalidArgument("plainX classes take \"mu\" (and not \"M\")".into()))
            }
            (ClassKind::EncodedY, _, _) => {
                return Err(Error::InvalidArgument("encodedY classes take \"M\" (and not \"mu\")".into()))
            }
        };
        ClassSpec::new(grid, r.n, bound, r.sparsity)
    }
}

impl From<ClassSpec> for ClassSpecRepr {
    fn from(c: ClassSpec) -> Self {
        let (kind, nu, mu, big_m) = match c.grid {
            ClassGrid::Plain(r) => (ClassKind::PlainX, r.nu, Some(r.mu), None),
            ClassGrid::Encoded(e) => (ClassKind::EncodedY, e.nu, None, Some(e.big_m)),
        };
        ClassSpecRepr { kind, nu, mu, big_m, n: c.n, bound: format_rational(&c.bound), sparsity: c.sparsity }
    }
}

impl ClassSpec {
    pub fn new(grid: ClassGrid, n: usize, bound: Rational, sparsity: Option<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("class length must be positive".into()));
        }
        if !bound.is_positive() {
            return Err(Error::InvalidArgument("class bound must be positive".into()));
        }
        if sparsity.is_some_and(|s| s > n) {
            return Err(Error::InvalidArgument("sparsity exceeds length".into()));
        }
        if let ClassGrid::Encoded(e) = grid {
            if e.n != n {
                return Err(Error::InvalidArgument("encoding length differs from class length".into()));
            }
        }
        Ok(ClassSpec { grid, n, bound, sparsity })
    }

    pub fn plain(rounding: RoundingSpec, n: usize, bound: Rational) -> Result<Self> {
        Self::new(ClassGrid::Plain(rounding), n, bound, None)
    }

    pub fn encoded(enc: EncodingSpec, bound: Rational, sparsity: Option<usize>) -> Result<Self> {
        Self::new(ClassGrid::Encoded(enc), enc.n, bound, sparsity)
    }

    pub fn kind(&self) -> ClassKind {
        match self.grid {
            ClassGrid::Plain(_) => ClassKind::PlainX,
            ClassGrid::Encoded(_) => ClassKind::EncodedY,
        }
    }

    fn grid_values(&self, step: &Rational, offset: &Rational) -> Vec<Rational> {
        // values j*step + offset in [0, bound]
        let mut out = Vec::new();
        let mut v = offset.clone();
        while v <= self.bound {
            out.push(v.clone());
            v += step;
        }
        out
    }

    /// Admissible values of component `k`, zero first, in grid-index order.
    pub fn component_choices(&self, k: usize) -> Vec<GaussianRational> {
        match self.grid {
            ClassGrid::Plain(r) => {
                let parts = self.grid_values(&r.step(), &Rational::zero());
                let mut out = Vec::with_capacity(parts.len() * parts.len());
                for re in &parts {
                    for im in &parts {
                        out.push(GaussianRational::new(re.clone(), im.clone()));
                    }
                }
                out
            }
            ClassGrid::Encoded(e) => {
                let step = e.rounding().step();
                let m = e.marker(k);
                let mut out = vec![GaussianRational::zero()];
                let re_parts = self.grid_values(&step, &m);
                let im_parts = self.grid_values(&step, &m);
                for re in &re_parts {
                    out.push(GaussianRational::real(re.clone()));
                    for im in &im_parts {
                        out.push(GaussianRational::new(re.clone(), im.clone()));
                    }
                }
                out
            }
        }
    }

    /// Exact number of members.
    pub fn cardinality(&self) -> BigInt {
        let s = self.sparsity.unwrap_or(self.n);
        // ways[j] = number of prefixes with j nonzero components
        let mut ways = vec![BigInt::zero(); s + 1];
        ways[0] = BigInt::one();
        for k in 0..self.n {
            let nonzero = BigInt::from(self.component_choices(k).len() - 1);
            for j in (1..=s).rev() {
                let add = &ways[j - 1] * &nonzero;
                ways[j] += add;
            }
        }
        ways.into_iter().sum()
    }

    pub fn contains(&self, x: &Signal) -> bool {
        is_member(self, x)
    }
}

/// Exact membership in the enumerated class.
pub fn is_member(class: &ClassSpec, x: &Signal) -> bool {
    if x.len() != class.n {
        return false;
    }
    if let Some(s) = class.sparsity {
        if x.support().len() > s {
            return false;
        }
    }
    let in_range = |q: &Rational| !q.is_negative() && *q <= class.bound;
    if !x.iter().all(|z| in_range(&z.re) && in_range(&z.im)) {
        return false;
    }
    match class.grid {
        ClassGrid::Plain(r) => on_grid(&r, x),
        ClassGrid::Encoded(e) => x
            .iter()
            .enumerate()
            .all(|(k, z)| zeta_encode(&e, k, z).is_ok_and(|v| v == *z)),
    }
}

/// Lexicographic walk over the per-component choice indices, skipping tuples
/// with more nonzero components than the sparsity bound.
pub struct ClassMembers {
    choices: Vec<Vec<GaussianRational>>,
    index: Vec<usize>,
    sparsity: usize,
    started: bool,
    done: bool,
}

impl ClassMembers {
    fn advance(&mut self) -> bool {
        let n = self.index.len();
        let mut nonzero_prefix: Vec<usize> = Vec::with_capacity(n + 1);
        nonzero_prefix.push(0);
        for &i in &self.index {
            let last = *nonzero_prefix.last().unwrap();
            nonzero_prefix.push(last + usize::from(i != 0));
        }
        for pos in (0..n).rev() {
            let next = self.index[pos] + 1;
            if next < self.choices[pos].len() && nonzero_prefix[pos] < self.sparsity {
                self.index[pos] = next;
                for i in &mut self.index[pos + 1..] {
                    *i = 0;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for ClassMembers {
    type Item = Signal;

    fn next(&mut self) -> Option<Signal> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.advance() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        Some(Signal::new(
            self.index
                .iter()
                .zip(&self.choices)
                .map(|(&i, c)| c[i].clone())
                .collect(),
        ))
    }
}

/// Every member of the class exactly once, in lexicographic grid-index order.
pub fn enumerate_class(class: &ClassSpec, limit: u64) -> Result<ClassMembers> {
    let card = class.cardinality();
    if card > BigInt::from(limit) {
        return Err(Error::ClassTooLarge { cardinality: card.to_string(), limit });
    }
    Ok(ClassMembers {
        choices: (0..class.n).map(|k| class.component_choices(k)).collect(),
        index: vec![0; class.n],
        sparsity: class.sparsity.unwrap_or(class.n),
        started: false,
        done: false,
    })
}
