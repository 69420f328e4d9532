//! Remainder functions and the Muntz-type series built from them.

mod expansion;
mod integrals;
pub(crate) mod rational;

use std::sync::OnceLock;

use serde::Serialize;

use crate::constants::{consts, frac, harmonic_exact};
use crate::error::{invalid, resource, Error, Result};
use crate::summation::Accumulator;

pub use expansion::{bernoulli_values, expansions, BernoulliSeries, Diagonal, MAX_INDEX};
pub use integrals::{
    phi1_fourier, phi1_partial, r1_via_integral, s1_log_integral, s1_via_floor_integral,
    s1_via_phi_integral, s2_via_s1_integral, v_series_integral,
};
pub use rational::small_rational;

/// Arguments at or above this value use the Bernoulli expansions for `V` and `R2`.
pub const TAIL_CROSSOVER: f64 = 12.0;

/// Largest number of series terms summed before giving up.
pub const MAX_TERMS: u64 = 100_000_000;

/// Which remainder, and so which series, is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Order {
    One,
    Two,
}

impl Order {
    pub fn index(self) -> u8 {
        match self {
            Order::One => 1,
            Order::Two => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;
    fn try_from(q: u8) -> Result<Self> {
        match q {
            1 => Ok(Order::One),
            2 => Ok(Order::Two),
            _ => Err(invalid(format!("order must be 1 or 2, got {q}"))),
        }
    }
}

/// A truncated series value together with a bound on the neglected part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesEval {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u64,
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(invalid(format!("{what} requires a finite x > 0, got {x}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// `log n + gamma - H(n) + 1/(2n)`, accurate to full relative precision.
fn harmonic_defect(n: u64) -> f64 {
    static SMALL: OnceLock<Vec<f64>> = OnceLock::new();
    const CUT: u64 = 20;
    if n < CUT {
        let t = SMALL.get_or_init(|| {
            (0..CUT)
                .map(|k| {
                    if k == 0 {
                        0.0
                    } else {
                        let k = k as f64;
                        k.ln() + consts().gamma - harmonic_exact(k as u64) + 0.5 / k
                    }
                })
                .collect()
        });
        return t[n as usize];
    }
    let inv2 = 1.0 / (n as f64 * n as f64);
    // sum_k B_2k / (2k n^2k)
    const C: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
    ];
    C.iter().rev().fold(0.0, |acc, &c| acc * inv2 + c) * inv2
}

/// `log(1+u) - u/(1+u)`.
fn log1p_defect(u: f64) -> f64 {
    if u < 0.02 {
        let mut pw = u * u;
        let mut acc = 0.0;
        let mut sign = 1.0;
        for k in 2..16 {
            acc += sign * (1.0 - 1.0 / k as f64) * pw;
            pw *= u;
            sign = -sign;
        }
        acc
    } else {
        u.ln_1p() - u / (1.0 + u)
    }
}

/// `R1(x) = log x + gamma - H(x) - ({x} - 1/2)/x` without range checks.
pub(crate) fn r1_raw(x: f64) -> f64 {
    if x < 1.0 {
        return 0.5 / x + x.ln() + consts().gamma - 1.0;
    }
    let n = x.floor();
    let sigma = x - n;
    log1p_defect(sigma / n) + harmonic_defect(n as u64) - sigma / (2.0 * n * x)
}

pub fn r1(x: f64) -> Result<f64> {
    check_positive(x, "r1")?;
    Ok(r1_raw(x))
}

/// The literal defining sum for `R2`, valid for every `x > 0`.
pub fn r2_direct(x: f64) -> Result<f64> {
    check_positive(x, "r2_direct")?;
    Ok(r2_direct_raw(x))
}

fn r2_direct_raw(x: f64) -> f64 {
    let c = consts();
    let l = x.ln();
    let mut acc = Accumulator::new();
    acc.add((0.5 * c.log_2pi + 1.0 + 0.5 * l) / x);
    acc.add((2.0 - c.gamma) * l);
    acc.add(-0.5 * l * l);
    acc.add(c.c1);
    let n = x.floor() as u64;
    let mut inner = Accumulator::new();
    for ell in 1..=n {
        let r = x / ell as f64;
        inner.add((1.0 + r) * r.ln() + 2.0 * (1.0 - r));
    }
    acc.add(inner.value() / x);
    acc.value()
}

pub(crate) fn r2_raw(x: f64) -> f64 {
    if x >= TAIL_CROSSOVER {
        expansions().r2.eval(x)
    } else {
        r2_direct_raw(x)
    }
}

pub fn r2(x: f64) -> Result<f64> {
    check_positive(x, "r2")?;
    Ok(r2_raw(x))
}

/// The literal closed form for `V(x) = int_x^inf R1`.
pub fn v_direct(x: f64) -> Result<f64> {
    check_positive(x, "v_direct")?;
    Ok(v_direct_raw(x))
}

fn v_direct_raw(x: f64) -> f64 {
    let c = consts();
    let n = x.floor();
    let l = x.ln();
    let mut acc = Accumulator::new();
    if n >= 1.0 {
        // x (H(n) - log x - gamma) = -x (E(n) - 1/(2n) + log(1 + sigma/n)).
        let sigma = x - n;
        acc.add(-x * (harmonic_defect(n as u64) - 0.5 / n + (sigma / n).ln_1p()));
    } else {
        acc.add(-x * (l + c.gamma));
    }
    acc.add(2.0 * x);
    acc.add(-0.5 * l);
    for k in 2..=(n as u64) {
        acc.add((k as f64).ln());
    }
    acc.add(-n * (1.0 + l));
    acc.add(-0.5 * c.log_2pi - 0.5);
    acc.value()
}

pub(crate) fn v_raw(x: f64) -> f64 {
    if x >= TAIL_CROSSOVER {
        expansions().v.eval(x)
    } else {
        v_direct_raw(x)
    }
}

pub fn v(x: f64) -> Result<f64> {
    check_positive(x, "v")?;
    Ok(v_raw(x))
}

pub(crate) fn remainder_raw(order: Order, x: f64) -> f64 {
    match order {
        Order::One => r1_raw(x),
        Order::Two => r2_raw(x),
    }
}

pub fn remainder(order: Order, x: f64) -> Result<f64> {
    check_positive(x, "remainder")?;
    Ok(remainder_raw(order, x))
}

/// Right derivative `R1'(y+) = ({y} - 1/2)/y^2`.
fn r1_derivative(y: f64) -> f64 {
    (frac(y) - 0.5) / (y * y)
}

/// `|R2(y)| <= R2_ENVELOPE / y^4` for `y >= TAIL_CROSSOVER`.
pub const R2_ENVELOPE: f64 = 0.0015;

/// Series value `S_q(x) = sum_k R_q(kx)`.
pub fn series(order: Order, x: f64, tol: f64) -> Result<SeriesEval> {
    check_positive(x, "series")?;
    check_tol(tol)?;
    // The rational engine is limited only by rounding, which no amount of
    // extra summation would improve.
    if let Some((a, b)) = small_rational(x) {
        return Ok(rational::series(order, a, b));
    }
    match order {
        Order::One => s1_general(x, tol),
        Order::Two => s2_general(x, tol),
    }
}

pub fn s1(x: f64, tol: f64) -> Result<SeriesEval> {
    series(Order::One, x, tol)
}

pub fn s2(x: f64, tol: f64) -> Result<SeriesEval> {
    series(Order::Two, x, tol)
}

fn term_budget(k: f64) -> Result<u64> {
    if !(k <= MAX_TERMS as f64) {
        return Err(resource(format!(
            "series needs about {k:.3e} terms, more than the limit {MAX_TERMS}"
        )));
    }
    Ok(k.max(1.0) as u64)
}

fn direct_sum(order: Order, x: f64, k: u64) -> Accumulator {
    let mut acc = Accumulator::new();
    for j in 1..=k {
        acc.add(remainder_raw(order, j as f64 * x));
    }
    acc
}

/// Bound on `sum_{k > K} |R1(kx)|` for `x >= 1` from
/// `|R1(y)| <= 1/(12 y^2) + 0.033/y^3`.
fn s1_majorant(x: f64, k: f64) -> f64 {
    1.0 / (12.0 * x * x * k) + 0.0165 / (x * x * x * k * k)
}

/// Euler-Maclaurin remainder bound for `x < 1`: the regular part plus the
/// kinks of `R1` at the integers.
fn s1_kink_bound(x: f64, k: f64) -> f64 {
    let kx = (k * x).floor().max(1.0);
    (1.0 / k + 0.5 / (x * k * k) + x / kx) / 12.0
}

/// General-argument evaluation of `S1` by direct summation plus tail control.
pub fn s1_general(x: f64, tol: f64) -> Result<SeriesEval> {
    check_positive(x, "s1")?;
    check_tol(tol)?;
    if x >= 1.0 {
        let k = term_budget((1.0 / (12.0 * x * x * tol)).ceil() + 1.0)?;
        let acc = direct_sum(Order::One, x, k);
        let bound = s1_majorant(x, k as f64) + 4.0 * f64::EPSILON * acc.magnitude();
        return Ok(SeriesEval { value: acc.value(), tail_bound: bound, terms: k });
    }
    let mut kf = (1.0 / (6.0 * tol)).ceil().max((2.0 / x).ceil());
    while s1_kink_bound(x, kf) > tol {
        kf *= 1.1;
    }
    let k = term_budget(kf.ceil())?;
    // Sum k < K directly, then Euler-Maclaurin from K.
    let acc0 = direct_sum(Order::One, x, k - 1);
    let y = k as f64 * x;
    let mut acc = acc0;
    acc.add(v_raw(y) / x);
    acc.add(0.5 * r1_raw(y));
    acc.add(-x * r1_derivative(y) / 12.0);
    let bound = s1_kink_bound(x, k as f64) + 4.0 * f64::EPSILON * acc.magnitude();
    Ok(SeriesEval { value: acc.value(), tail_bound: bound, terms: k })
}

/// General-argument evaluation of `S2`.
pub fn s2_general(x: f64, tol: f64) -> Result<SeriesEval> {
    check_positive(x, "s2")?;
    check_tol(tol)?;
    let need = (R2_ENVELOPE / (3.0 * x.powi(4) * tol)).cbrt();
    let k = term_budget((TAIL_CROSSOVER / x).ceil().max(need.ceil()) + 1.0)?;
    let acc = direct_sum(Order::Two, x, k);
    let kf = k as f64;
    let bound = R2_ENVELOPE / (3.0 * x.powi(4) * kf * kf * kf) + 4.0 * f64::EPSILON * acc.magnitude();
    Ok(SeriesEval { value: acc.value(), tail_bound: bound, terms: k })
}

/// `S_q(1/r) - [r S_q(r) + ...]` from the reciprocity relations, with the
/// combined tail bounds of both evaluations.
pub fn reciprocity_residual(order: Order, r: f64, tol: f64) -> Result<SeriesEval> {
    check_positive(r, "reciprocity_residual")?;
    let c = consts();
    let a = series(order, 1.0 / r, tol)?;
    let b = series(order, r, tol / r.max(1.0))?;
    let l = r.ln();
    let parts = match order {
        Order::One => [r * b.value, c.k * (1.0 - r), 0.5 * (1.0 + r) * l, 0.0],
        Order::Two => [
            r * b.value,
            c.k2 * (1.0 - r),
            c.k1 * (1.0 + r) * l,
            0.25 * (1.0 - r) * l * l,
        ],
    };
    let rhs: f64 = parts.iter().sum();
    let scale = 1.0 + a.value.abs() + parts.iter().map(|p| p.abs()).sum::<f64>();
    Ok(SeriesEval {
        value: a.value - rhs,
        tail_bound: a.tail_bound + r * b.tail_bound + 8.0 * f64::EPSILON * scale,
        terms: a.terms + b.terms,
    })
}

#[cfg(test)]
mod tests;
