//! Exact rational, Gaussian-rational and cyclotomic arithmetic, plus rigorous
//! ball arithmetic for the transcendental constants.

pub mod ball;
pub mod cyclotomic;
pub mod rational;

pub use ball::{exp_i_ball, exp_i_rational, pi_enclosure, BallComplex, Dyadic, RealBall, Round};
pub use cyclotomic::{euler_phi, is_prime, CyclotomicNumber};
pub use rational::{format_rational, int, parse_rational, ratio, GaussianRational, Rational};

/// `zeta_L^j = e^{-2 pi i j / L}` in canonical form.
pub fn cyclo_root(order: u64, j: i64) -> CyclotomicNumber {
    CyclotomicNumber::root(order, j)
}

pub fn cyclo_is_zero(a: &CyclotomicNumber) -> bool {
    a.is_zero()
}

pub fn cyclo_to_ball(a: &CyclotomicNumber, precision: u32) -> BallComplex {
    a.to_ball(precision)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycloOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn cyclo_arith(a: &CyclotomicNumber, b: &CyclotomicNumber, op: CycloOp) -> crate::Result<CyclotomicNumber> {
    Ok(match op {
        CycloOp::Add => a.add(b),
        CycloOp::Sub => a.sub(b),
        CycloOp::Mul => a.mul(b),
        CycloOp::Div => a.div(b)?,
    })
}
