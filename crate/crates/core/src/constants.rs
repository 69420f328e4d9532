//! Mathematical constants, Bernoulli data and elementary arithmetic sums.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{domain, invalid, Error, Result};
use crate::summation::Accumulator;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;
pub const STIELTJES_GAMMA1: f64 = -0.072_815_845_483_676_724_860_586_375_874_901_319_137_73;
pub const LOG_2PI: f64 = 1.837_877_066_409_345_483_560_659_472_811_235_279_7;

/// Below this many terms the elementary sums are accumulated directly.
pub const DIRECT_SUM_LIMIT: f64 = 1e4;

/// Even-index Bernoulli numbers `B_0, B_2, ..., B_30`.
const BERNOULLI_EVEN: [f64; 16] = [
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

pub const MAX_BERNOULLI_INDEX: usize = 30;

/// Bernoulli number `B_n` with the convention `B_1 = -1/2`.
pub fn bernoulli_number(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => -0.5,
        n if n % 2 == 1 => 0.0,
        n if n <= MAX_BERNOULLI_INDEX => BERNOULLI_EVEN[n / 2],
        _ => panic!("Bernoulli number index {n} exceeds table"),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// Coefficients of `B_n(x)` in ascending powers of `x`.
pub fn bernoulli_poly_coeffs(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| binomial(n, j) * bernoulli_number(n - j))
        .collect()
}

/// Bernoulli polynomial `B_n(x)`.
pub fn bernoulli_poly(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x - 0.5,
        2 => x * x - x + 1.0 / 6.0,
        3 => x * (x - 0.5) * (x - 1.0),
        4 => {
            let t = x * (x - 1.0);
            t * t - 1.0 / 30.0
        }
        _ => bernoulli_poly_coeffs(n)
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c),
    }
}

/// Fractional part `{x}`, always in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Periodic Bernoulli function `B_n({y})`.
pub fn periodic_bernoulli(n: usize, y: f64) -> f64 {
    bernoulli_poly(n, frac(y))
}

/// A finite sum of terms `c * log(x)^p * x^q`.
#[derive(Clone, Debug, Default)]
pub(crate) struct LogPowerSeries {
    terms: Vec<(f64, u32, i32)>,
}

impl LogPowerSeries {
    pub fn monomial(p: u32, q: i32) -> Self {
        Self { terms: vec![(1.0, p, q)] }
    }

    fn push(&mut self, c: f64, p: u32, q: i32) {
        if c == 0.0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.1 == p && t.2 == q) {
            t.0 += c;
        } else {
            self.terms.push((c, p, q));
        }
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::default();
        for &(c, p, q) in &self.terms {
            if p > 0 {
                out.push(c * p as f64, p - 1, q - 1);
            }
            out.push(c * q as f64, p, q - 1);
        }
        out
    }

    pub fn antiderivative(&self) -> Self {
        let mut out = Self::default();
        for &(c, p, q) in &self.terms {
            if q == -1 {
                out.push(c / (p + 1) as f64, p + 1, 0);
            } else {
                let s = (q + 1) as f64;
                let mut falling = 1.0;
                for i in 0..=p {
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    out.push(c * sign * falling / s.powi(i as i32 + 1), p - i, q + 1);
                    falling *= (p - i) as f64;
                }
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        let l = x.ln();
        self.terms
            .iter()
            .map(|&(c, p, q)| c * l.powi(p as i32) * x.powi(q))
            .sum()
    }
}

/// Euler-Maclaurin correction `f(n)/2 + sum_k B_2k/(2k)! f^(2k-1)(n)` with the
/// given sign on the derivative terms.
fn em_correction(f: &LogPowerSeries, n: f64, orders: usize, sign: f64) -> f64 {
    let mut acc = 0.5 * f.eval(n);
    let mut d = f.derivative();
    let mut fact = 2.0;
    for k in 1..=orders {
        acc += sign * bernoulli_number(2 * k) / fact * d.eval(n);
        d = d.derivative().derivative();
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
    }
    acc
}

/// `sum_{n >= m} log(n)^p / n^s` for `s >= 2`, by Euler-Maclaurin from `m`.
pub(crate) fn log_power_tail(p: u32, s: i32, m: f64) -> f64 {
    let f = LogPowerSeries::monomial(p, -s);
    -f.antiderivative().eval(m) + em_correction(&f, m, 10, -1.0)
}

/// `sum_{n >= 1} log(n)^p / n^2`, which equals `(-1)^p zeta^(p)(2)`.
pub(crate) fn log_power_zeta2(p: u32) -> f64 {
    let m = 40u32;
    let mut acc = Accumulator::new();
    for n in 2..m {
        let x = n as f64;
        acc.add(x.ln().powi(p as i32) / (x * x));
    }
    if p == 0 {
        acc.add(1.0);
    }
    acc.add(log_power_tail(p, 2, m as f64));
    acc.value()
}

/// Asymptotic partial sum `sum_{k <= n} f(k)` with the given constant.
fn em_partial(f: &LogPowerSeries, n: f64, constant: f64) -> f64 {
    constant + f.antiderivative().eval(n) + em_correction(f, n, 6, 1.0)
}

fn check_domain(x: f64, what: &str) -> Result<f64> {
    if !x.is_finite() || x < 1.0 {
        return Err(invalid(format!("{what} requires x >= 1, got {x}")));
    }
    Ok(x.floor())
}

/// Harmonic number `H(floor(x))`.
pub fn harmonic_sum(x: f64) -> Result<f64> {
    let n = check_domain(x, "harmonic_sum")?;
    if n < DIRECT_SUM_LIMIT {
        return Ok(harmonic_exact(n as u64));
    }
    Ok(em_partial(&LogPowerSeries::monomial(0, -1), n, consts().gamma))
}

pub(crate) fn harmonic_exact(n: u64) -> f64 {
    let mut acc = Accumulator::new();
    for k in (1..=n).rev() {
        acc.add(1.0 / k as f64);
    }
    acc.value()
}

/// Asymptotic form `log x + gamma + 1/(2x) - 1/(12x^2) + 1/(120x^4)`.
pub fn harmonic_asym(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 2.0 {
        return Err(domain(format!("harmonic_asym requires x >= 2, got {x}")));
    }
    let x2 = x * x;
    Ok(x.ln() + consts().gamma + 0.5 / x - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2))
}

/// `sum_{n <= x} log n`.
pub fn log_sum(x: f64) -> Result<f64> {
    let n = check_domain(x, "log_sum")?;
    if n < DIRECT_SUM_LIMIT {
        let mut acc = Accumulator::new();
        for k in 2..=(n as u64) {
            acc.add((k as f64).ln());
        }
        return Ok(acc.value());
    }
    Ok(em_partial(&LogPowerSeries::monomial(1, 0), n, 0.5 * consts().log_2pi))
}

/// `sum_{k <= b} log(k)/k` for integer `b >= 1`.
pub fn log_over_k_sum(b: u64) -> Result<f64> {
    if b == 0 {
        return Err(invalid("log_over_k_sum requires b >= 1"));
    }
    if (b as f64) < DIRECT_SUM_LIMIT {
        let mut acc = Accumulator::new();
        for k in 2..=b {
            let x = k as f64;
            acc.add(x.ln() / x);
        }
        return Ok(acc.value());
    }
    Ok(em_partial(&LogPowerSeries::monomial(1, -1), b as f64, consts().gamma1))
}

/// The closed form `log^2(b)/2 + gamma_1 + log(b)/(2b) + (1 - log b)/(12 b^2)
/// + (6 log b - 11)/(720 b^4)`.
pub fn log_over_k_asym(b: f64) -> f64 {
    let l = b.ln();
    let b2 = b * b;
    0.5 * l * l + consts().gamma1 + l / (2.0 * b) + (1.0 - l) / (12.0 * b2)
        + (6.0 * l - 11.0) / (720.0 * b2 * b2)
}

/// All constants used by the kernels and quadratic forms.
#[derive(Clone, Debug, Serialize)]
pub struct MathConstants {
    pub gamma: f64,
    pub gamma1: f64,
    pub log_2pi: f64,
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `ell_j = j! c_{j-1}` from the Laurent expansion of zeta at 1.
    pub ell: [f64; 4],
    /// `zeta(2), zeta'(2), zeta''(2), zeta'''(2)`.
    pub zeta2: [f64; 4],
    /// `eta_j = sum mu(n) log(n)^j / n^2`.
    pub eta: [f64; 4],
}

impl MathConstants {
    pub fn standard() -> Self {
        Self::from_gammas(EULER_GAMMA, STIELTJES_GAMMA1)
    }

    /// Build the derived constants from given values of the first two
    /// Stieltjes constants.
    pub fn from_gammas(gamma: f64, gamma1: f64) -> Self {
        let lp = LOG_2PI;
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let k = 0.5 * (lp - gamma + 1.0);
        let k1 = k + 0.5;
        let k2 = (1.0 - 0.5 * gamma) * lp + 0.25 * lp * lp + pi2 / 48.0
            - 0.25 * gamma * gamma
            - gamma
            - gamma1
            + 1.5;
        let c1 = 2.0 * gamma + gamma1 - 3.0;
        let c2 = 0.5 * lp + 1.0;
        let ell = [0.0, 1.0, 2.0 * gamma, 6.0 * (gamma * gamma + gamma1)];
        let s: [f64; 4] = std::array::from_fn(|p| log_power_zeta2(p as u32));
        let zeta2 = [s[0], -s[1], s[2], -s[3]];
        let eta = reciprocal_derivatives(zeta2);
        Self { gamma, gamma1, log_2pi: lp, k, k1, k2, c1, c2, ell, zeta2, eta }
    }
}

/// `(-1)^j (1/zeta)^(j)(2)` for `j = 0..3` from the derivatives of zeta.
fn reciprocal_derivatives(z: [f64; 4]) -> [f64; 4] {
    let [z0, z1, z2, z3] = z;
    let k0 = 1.0 / z0;
    let k1 = -z1 / (z0 * z0);
    let k2 = (2.0 * z1 * z1 - z0 * z2) / z0.powi(3);
    let k3 = (-6.0 * z1.powi(3) + 6.0 * z0 * z1 * z2 - z0 * z0 * z3) / z0.powi(4);
    [k0, -k1, k2, -k3]
}

static CONSTANTS: OnceLock<MathConstants> = OnceLock::new();

/// Process-wide constants; the standard values unless [`install`] ran first.
pub fn consts() -> &'static MathConstants {
    CONSTANTS.get_or_init(MathConstants::standard)
}

/// Replace the process-wide constants. Only possible before first use.
pub fn install(c: MathConstants) -> Result<()> {
    CONSTANTS
        .set(c)
        .map_err(|_| Error::InvalidArgument("constants already in use".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_polys_match_closed_forms() {
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            for n in 2..=4 {
                let gen = bernoulli_poly_coeffs(n).iter().rev().fold(0.0, |a, &c| a * x + c);
                assert!((gen - bernoulli_poly(n, x)).abs() < 1e-15);
            }
        }
        assert!((bernoulli_poly(2, 0.0) - 1.0 / 6.0).abs() < 1e-16);
        assert!(bernoulli_poly(3, 0.5).abs() < 1e-16);
    }

    #[test]
    fn bernoulli_symmetry() {
        for n in 2..=14 {
            let s = if n % 2 == 0 { 1.0 } else { -1.0 };
            for x in [0.1, 0.3, 0.77] {
                let a = bernoulli_poly(n, 1.0 - x);
                let b = s * bernoulli_poly(n, x);
                assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{n} {x}");
            }
        }
    }

    #[test]
    fn zeta_derivatives_at_two() {
        let c = consts();
        assert!((c.zeta2[0] - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((c.zeta2[1] + 0.937_548_254_315_843_75).abs() < 1e-14);
        assert!((c.zeta2[2] - 1.989_280_234_298_9).abs() < 1e-12);
        assert!((c.zeta2[3] + 6.000_145_802_843).abs() < 1e-11);
    }

    #[test]
    fn eta_from_reciprocal() {
        let c = consts();
        assert!((c.eta[0] - 6.0 / std::f64::consts::PI.powi(2)).abs() < 1e-15);
        // eta_1 = -zeta'(2)/zeta(2)^2 with the sign convention (-1)^j.
        let e1 = c.zeta2[1] / (c.zeta2[0] * c.zeta2[0]);
        assert!((c.eta[1] - e1).abs() < 1e-15);
    }

    #[test]
    fn derived_constants() {
        let c = consts();
        assert!((c.k - 1.130_330_700_754).abs() < 1e-11);
        assert!((c.c1 + c.c2 - 0.000_554).abs() < 5e-7);
        assert!((c.c2 - (c.k1 + 0.5 * c.gamma)).abs() < 1e-15);
    }

    #[test]
    fn harmonic_branches_agree() {
        let n = DIRECT_SUM_LIMIT;
        let em = em_partial(&LogPowerSeries::monomial(0, -1), n, EULER_GAMMA);
        assert!((em - harmonic_exact(n as u64)).abs() < 1e-12);
        let asym = harmonic_asym(1e6).unwrap();
        assert!((harmonic_sum(1e6).unwrap() - asym).abs() < 1e-13);
        assert!((harmonic_sum(1.0).unwrap() - 1.0).abs() < 1e-16);
    }

    #[test]
    fn log_sum_branches_agree() {
        let n = DIRECT_SUM_LIMIT;
        let mut acc = Accumulator::new();
        for k in 2..=(n as u64) {
            acc.add((k as f64).ln());
        }
        let em = em_partial(&LogPowerSeries::monomial(1, 0), n, 0.5 * LOG_2PI);
        assert!((em - acc.value()).abs() < 1e-12 * acc.value());
        let mut big = Accumulator::new();
        for k in 2..=1_000_000u64 {
            big.add((k as f64).ln());
        }
        let d = log_sum(1e6).unwrap() - big.value();
        // one unit in the last place at this magnitude is about 1.9e-9
        assert!(d.abs() <= 2.0 * f64::EPSILON * big.value(), "{d}");
    }

    #[test]
    fn log_over_k_closed_form() {
        for b in [10u64, 100, 1000, 9999] {
            let exact = log_over_k_sum(b).unwrap();
            let tol = 2.0 * (b as f64).ln() / (b as f64).powi(6) + 1e-14;
            assert!((exact - log_over_k_asym(b as f64)).abs() < tol.max(1e-7 / (b as f64).powi(4)), "{b}");
        }
        let b = 20_000u64;
        assert!((log_over_k_sum(b).unwrap() - log_over_k_asym(b as f64)).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(harmonic_sum(0.5).is_err());
        assert!(matches!(harmonic_asym(1.0), Err(Error::Domain(_))));
        assert!(log_over_k_sum(0).is_err());
        assert!(log_sum(f64::NAN).is_err());
    }
}
