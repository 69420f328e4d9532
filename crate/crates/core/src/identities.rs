//! Identities linking the remainders to the Möbius sums, zeta near the
//! critical line, and the zero sum for the first differenced `L` term.

use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{mobius_sieve, MobiusTable};
use crate::constants::{bernoulli_number, consts};
use crate::error::{invalid, Error, Result};
use crate::muntz::{remainder_raw, Order};
use crate::summation::Accumulator;

/// `Phi_q(x) = sum_{n <= x} mu(n) (x/n) R_q(x/n)`.
pub fn phi_cap(order: Order, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(phi_with(&mobius_sieve(x as usize)?, order, x))
}

fn check_x(x: f64) -> Result<()> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(invalid(format!("x must be at least 1, got {x}")));
    }
    Ok(())
}

fn phi_with(table: &MobiusTable, order: Order, x: f64) -> f64 {
    let mut acc = Accumulator::new();
    for n in 1..=x as usize {
        let mu = table.get(n);
        if mu != 0 {
            let y = x / n as f64;
            acc.add(mu as f64 * y * remainder_raw(order, y));
        }
    }
    acc.value()
}

/// `L_0..L_2` and `M_0, M_1` of the Möbius coefficients over `n <= x`.
fn mobius_sums(table: &MobiusTable, x: f64) -> ([f64; 3], [f64; 2]) {
    let mut l = [Accumulator::new(); 3];
    let mut m = [Accumulator::new(); 2];
    for n in 1..=x as usize {
        let mu = table.get(n) as f64;
        if mu != 0.0 {
            let nf = n as f64;
            let lg = nf.ln();
            l[0].add(mu / nf);
            l[1].add(mu * lg / nf);
            l[2].add(mu * lg * lg / nf);
            m[0].add(mu);
            m[1].add(mu * lg);
        }
    }
    (l.map(|a| a.value()), m.map(|a| a.value()))
}

#[derive(Clone, Debug, Serialize)]
pub struct MacLeodResidual {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub slack_budget: f64,
}

/// Allowed residual in the exact first identity.
pub const MACLEOD1_SLACK: f64 = 1e-8;

/// `|residual| <= MACLEOD2_CONSTANT log x / x` in the second identity.
pub const MACLEOD2_CONSTANT: f64 = 5.7;

/// `(1 - gamma) L_0 - M_0/(2x) = dL_0 log x - Phi_1/x + 1/x`, exact.
pub fn macleod_check_1(x: f64) -> Result<MacLeodResidual> {
    check_x(x)?;
    let table = mobius_sieve(x as usize)?;
    let (l, m) = mobius_sums(&table, x);
    let c = consts();
    let lx = x.ln();
    let lhs = (1.0 - c.gamma) * l[0] - 0.5 * m[0] / x;
    // dLbar_0 log x = L_0 log x - Lbar_1 stays finite at x = 1.
    let dl0_log = l[0] * lx - (l[1] + 1.0);
    let rhs = dl0_log - phi_with(&table, Order::One, x) / x + 1.0 / x;
    Ok(MacLeodResidual { x, lhs, rhs, residual: lhs - rhs, slack_budget: MACLEOD1_SLACK })
}

/// `C_1 L_0 + C_2 M_0/x` against the differenced terms and `Phi_2/x`, up to
/// `O(log x / x)`.
pub fn macleod_check_2(x: f64) -> Result<MacLeodResidual> {
    check_x(x)?;
    let table = mobius_sieve(x as usize)?;
    let (l, m) = mobius_sums(&table, x);
    let c = consts();
    let lx = x.ln();
    let lbar1 = l[1] + 1.0;
    let lbar2 = l[2] + 2.0 * c.gamma;
    let lhs = c.c1 * l[0] + c.c2 * m[0] / x;
    let dl0_log = l[0] * lx - lbar1;
    // (log x / 2)(dL_0 log x - dL_1 - dM_0 / x) with the products expanded.
    let bracket = 0.5 * (dl0_log * lx - (lbar1 * lx - lbar2) - (m[0] * lx - m[1]) / x);
    let rhs = bracket - (2.0 - c.gamma) * dl0_log + phi_with(&table, Order::Two, x) / x;
    Ok(MacLeodResidual { x, lhs, rhs, residual: lhs - rhs, slack_budget: MACLEOD2_CONSTANT * lx / x })
}

/// `(|Phi_q(x)|, bound)` where the bound is the bracket of the `M_0`-based
/// estimate without its unknown constant.
pub fn phi_bound_report(order: Order, x: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    let table = mobius_sieve(x as usize)?;
    let phi = phi_with(&table, order, x).abs();
    // M_0 is constant on [n, n+1), so both integrals are finite sums.
    let mut mert = 0.0;
    let mut int_log = Accumulator::new();
    let mut int_lin = Accumulator::new();
    let top = x as usize;
    for n in 1..=top {
        mert += table.get(n) as f64;
        let hi = if n == top { x } else { (n + 1) as f64 };
        let nf = n as f64;
        int_log.add(mert.abs() * (hi / nf).ln());
        int_lin.add(mert.abs() * (hi - nf));
    }
    let r1 = remainder_raw(order, 1.0).abs() * mert.abs();
    let bound = match order {
        Order::One => int_log.value() + r1,
        Order::Two => int_lin.value() / x + r1,
    };
    Ok((phi, bound))
}

/// Largest `|Im s|` accepted by [`zeta_line`].
pub const ZETA_T_MAX: f64 = 1e4;
const EM_TERMS: usize = 10;

fn check_strip(s: Complex64) -> Result<()> {
    if !(0.0..=2.0).contains(&s.re) || !(s.im.abs() <= ZETA_T_MAX) {
        return Err(invalid(format!("s = {s} outside 0 <= Re s <= 2, |Im s| <= {ZETA_T_MAX}")));
    }
    if (s - 1.0).norm() < 1e-12 {
        return Err(invalid("zeta has a pole at s = 1"));
    }
    Ok(())
}

/// Euler-Maclaurin for `zeta(s)` (`deriv = false`) or `zeta'(s)`.
fn euler_maclaurin(s: Complex64, deriv: bool) -> Complex64 {
    let m = (s.im.abs().ceil() as usize) + 20;
    let mut head = Complex64::new(0.0, 0.0);
    for n in (1..m).rev() {
        let l = (n as f64).ln();
        let t = (-s * l).exp();
        head += if deriv { -l * t } else { t };
    }
    let mf = m as f64;
    let lm = mf.ln();
    let pm = (-s * lm).exp(); // M^{-s}
    let one = Complex64::new(1.0, 0.0);
    let mut out = head;
    let sm1 = s - one;
    if deriv {
        out += -lm * mf * pm / sm1 - mf * pm / (sm1 * sm1) - 0.5 * lm * pm;
    } else {
        out += mf * pm / sm1 + 0.5 * pm;
    }
    // Poly = s (s+1) ... (s+2k-2), times M^{-s-2k+1}.
    let mut poly = s;
    let mut dpoly = one;
    let mut fact = 2.0;
    let mut mpow = pm / mf;
    for k in 1..=EM_TERMS {
        let c = bernoulli_number(2 * k) / fact;
        out += if deriv { c * mpow * (dpoly - lm * poly) } else { c * poly * mpow };
        for j in [2 * k - 1, 2 * k] {
            let f = s + j as f64;
            dpoly = dpoly * f + poly;
            poly *= f;
        }
        fact *= ((2 * k + 1) * (2 * k + 2)) as f64;
        mpow /= mf * mf;
    }
    out
}

pub fn zeta_line(s: Complex64) -> Result<Complex64> {
    check_strip(s)?;
    Ok(euler_maclaurin(s, false))
}

pub fn zeta_prime_line(s: Complex64) -> Result<Complex64> {
    check_strip(s)?;
    Ok(euler_maclaurin(s, true))
}

/// Ordinates of critical zeros, with `zeta'` at each computed once.
#[derive(Debug)]
pub struct ZeroData {
    pub ordinates: Vec<f64>,
    pub source_path: String,
    derivs: OnceLock<Vec<Complex64>>,
}

pub const FIRST_ZERO: f64 = 14.134_725_141_734_693;
const ZERO_CHECK: f64 = 1e-3;

impl ZeroData {
    pub fn count(&self) -> usize {
        self.ordinates.len()
    }

    /// Parse one ascending positive ordinate per line; `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut ordinates: Vec<f64> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let t: f64 = body
                .parse()
                .map_err(|_| Error::Format { line, msg: format!("not a number: {body:?}") })?;
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::Format { line, msg: format!("ordinate must be positive, got {t}") });
            }
            if ordinates.last().is_some_and(|&p| t <= p) {
                return Err(Error::Format { line, msg: "ordinates must be strictly increasing".into() });
            }
            ordinates.push(t);
        }
        if let Some(&t0) = ordinates.first() {
            if (t0 - FIRST_ZERO).abs() > 1e-4 {
                return Err(Error::DataIntegrity(format!("first ordinate {t0} is not the first zero")));
            }
        }
        let bad: Vec<(usize, f64)> = ordinates
            .par_iter()
            .enumerate()
            .filter_map(|(i, &t)| {
                let z = euler_maclaurin(Complex64::new(0.5, t), false).norm();
                (!(z < ZERO_CHECK) || t > ZETA_T_MAX).then_some((i, z))
            })
            .collect();
        if let Some(&(i, z)) = bad.first() {
            return Err(Error::DataIntegrity(format!(
                "|zeta(1/2 + i {})| = {z:e} is not below {ZERO_CHECK:e}",
                ordinates[i]
            )));
        }
        Ok(Self { ordinates, source_path: source.to_string(), derivs: OnceLock::new() })
    }

    /// `zeta'(1/2 + i t)` for every ordinate.
    pub fn derivatives(&self) -> &[Complex64] {
        self.derivs.get_or_init(|| {
            self.ordinates.par_iter().map(|&t| euler_maclaurin(Complex64::new(0.5, t), true)).collect()
        })
    }
}

pub fn load_zeros(path: impl AsRef<Path>) -> Result<ZeroData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    ZeroData::parse(&text, &path.display().to_string())
}

/// Residue of `N^{w-1} [log N - 2/(w-1)] / ((w-1)^2 zeta(w))` at a simple zero.
fn perron_residue(n: f64, rho: Complex64, dz: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let w1 = one - rho;
    let ln = n.ln();
    (w1 * -ln).exp() / (dz * w1 * w1) * (ln + 2.0 / w1)
}

/// Sum over the first `m_zeros` zeros and their conjugates, before taking
/// the real part.
pub fn perron_paired(n: f64, zeros: &ZeroData, m_zeros: usize) -> Result<Complex64> {
    if !(n >= 2.0) {
        return Err(invalid("N must be at least 2"));
    }
    if m_zeros > zeros.count() {
        return Err(invalid(format!("{m_zeros} zeros requested, {} loaded", zeros.count())));
    }
    let derivs = zeros.derivatives();
    let mut sum = Complex64::new(0.0, 0.0);
    for i in 0..m_zeros {
        let rho = Complex64::new(0.5, zeros.ordinates[i]);
        let dz = derivs[i];
        if dz.norm() < 1e-6 {
            return Err(Error::Numerical(format!("zeta' nearly vanishes at {rho}")));
        }
        sum += perron_residue(n, rho, dz) + perron_residue(n, rho.conj(), dz.conj());
    }
    Ok(sum)
}

/// Zero-sum approximation to `dLbar_1(N) log N`.
pub fn perron_zero_sum(n: f64, zeros: &ZeroData, m_zeros: usize) -> Result<f64> {
    Ok(perron_paired(n, zeros, m_zeros)?.re)
}
