//! Series values at rational arguments.
//!
//! For `x = a/b` the terms `k = s + t b` share the fractional part
//! `{s a / b}`, so within each residue class the remainder's Bernoulli
//! expansion reduces to power sums over an arithmetic progression.  Those
//! are evaluated by Euler-Maclaurin, which makes the whole tail cost O(b).

use std::sync::OnceLock;

use super::expansion::{bernoulli_values, expansions, Diagonal, MAX_INDEX};
use super::{remainder_raw, Order, SeriesEval};
use crate::constants::bernoulli_number;
use crate::summation::Accumulator;

pub const MAX_DENOMINATOR: u64 = 20_000;
const MAX_NUMERATOR: u64 = 1_000_000_000;

/// Start of the expansion region for one-off evaluations.
const Y_START: u64 = 12;
/// Progressions are summed termwise until `y >= EM_START * step`.
const EM_START: f64 = 12.0;
const EM_ORDERS: usize = 8;

/// `x == a/b` exactly in floating point, with `b <= MAX_DENOMINATOR`.
pub fn small_rational(x: f64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > MAX_NUMERATOR as f64 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR || h2 > MAX_NUMERATOR {
            return None;
        }
        if (h2 as f64 / k2 as f64 - x).abs() <= 2.0 * f64::EPSILON * x {
            return Some((h2, k2));
        }
        let f = r - a as f64;
        if f <= 0.0 {
            return None;
        }
        r = 1.0 / f;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn diagonal(order: Order) -> &'static Diagonal {
    match order {
        Order::One => &expansions().r1,
        Order::Two => &expansions().r2,
    }
}

/// `B_2k/(2k)! (i)_{2k-1}` for the progression sums.
fn em_table() -> &'static Vec<[f64; EM_ORDERS]> {
    static T: OnceLock<Vec<[f64; EM_ORDERS]>> = OnceLock::new();
    T.get_or_init(|| {
        (0..=MAX_INDEX)
            .map(|i| {
                let mut row = [0.0; EM_ORDERS];
                let mut fact = 2.0;
                for (k, slot) in row.iter_mut().enumerate() {
                    let m = 2 * k + 1;
                    let rising: f64 = (0..m).map(|t| (i + t) as f64).product();
                    *slot = bernoulli_number(2 * k + 2) / fact * rising;
                    fact *= ((2 * k + 3) * (2 * k + 4)) as f64;
                }
                row
            })
            .collect()
    })
}

/// `out[i] = sum_{n >= 0} (y0 + n step)^-i` for `first <= i <= last`.
pub(crate) fn progression_sums(y0: f64, step: f64, first: usize, last: usize, out: &mut [f64]) {
    let mut y = y0;
    for v in out[first..=last].iter_mut() {
        *v = 0.0;
    }
    while y < EM_START * step {
        let inv = 1.0 / y;
        let mut p = inv.powi(first as i32);
        for v in out[first..=last].iter_mut() {
            *v += p;
            p *= inv;
        }
        y += step;
    }
    let em = em_table();
    let inv = 1.0 / y;
    let rho = step * inv;
    let rho2 = rho * rho;
    let mut p = inv.powi(first as i32);
    for i in first..=last {
        let mut corr = 0.0;
        let mut r = rho;
        for c in em[i].iter() {
            corr += c * r;
            r *= rho2;
        }
        out[i] += p * (1.0 / ((i - 1) as f64 * rho) + 0.5 + corr);
        p *= inv;
    }
}

/// `S_q(a/b)` for coprime `a, b`.
pub fn series(order: Order, a: u64, b: u64) -> SeriesEval {
    let g = gcd(a, b);
    let (a, b) = (a / g, b / g);
    let x = a as f64 / b as f64;
    let mut direct = Accumulator::new();
    let mut k = 1u64;
    while k * a < Y_START * b {
        direct.add(remainder_raw(order, k as f64 * x));
        k += 1;
    }
    let (tail, mag) = class_tail(order, a, b, 0);
    let bound = 8.0 * f64::EPSILON * (direct.magnitude() + mag);
    SeriesEval {
        value: direct.value() + tail,
        tail_bound: bound,
        terms: k - 1 + b,
    }
}

/// `sum_{k > k0} R_q(k a/b)` for coprime `a, b`.
pub(crate) fn tail_after(order: Order, a: u64, b: u64, k0: u64) -> f64 {
    let x = a as f64 / b as f64;
    let mut acc = Accumulator::new();
    let mut k = k0 + 1;
    while k * a < Y_START * b {
        acc.add(remainder_raw(order, k as f64 * x));
        k += 1;
    }
    acc.add(class_tail(order, a, b, k - 1).0);
    acc.value()
}

/// Expansion-based sum over `k > k0` with `k a >= Y_START b`, grouped by
/// residue class. Returns the value and the sum of absolute contributions.
fn class_tail(order: Order, a: u64, b: u64, k0: u64) -> (f64, f64) {
    let d = diagonal(order);
    let first = d.first_index();
    let limit = Y_START * b;
    let mut sums = [0.0; MAX_INDEX + 1];
    let mut acc = Accumulator::new();
    for s in 1..=b {
        // smallest k = s + t b with k > k0 and k a >= limit
        let kmin = (k0 + 1).max(limit.div_ceil(a));
        let t = if s >= kmin { 0 } else { (kmin - s).div_ceil(b) };
        let k = s + t * b;
        let y0 = (k * a) as f64 / b as f64;
        let sigma = ((s * a) % b) as f64 / b as f64;
        progression_sums(y0, a as f64, first, MAX_INDEX, &mut sums);
        let bern = bernoulli_values(sigma);
        let mut c = 0.0;
        for i in first..=MAX_INDEX {
            c += d.coeffs[i] * bern[i] * sums[i];
        }
        acc.add(c);
    }
    (acc.value(), acc.magnitude())
}

/// Shared per-denominator tables for many numerators `a >= BATCH_START`.
pub(crate) struct DenominatorBatch {
    order: Order,
    b: u64,
    first: usize,
    width: usize,
    bern: Vec<f64>,
    zeta0: Vec<f64>,
    zeta1: Vec<f64>,
}

/// Batch evaluations begin the expansion at `y = BATCH_START`.
pub(crate) const BATCH_START: u64 = 40;
/// Highest Bernoulli index used by batches; adequate once `y >= BATCH_START`.
const BATCH_LAST: usize = 12;

impl DenominatorBatch {
    pub fn new(order: Order, b: u64) -> Self {
        let d = diagonal(order);
        let first = d.first_index();
        let width = BATCH_LAST + 1 - first;
        let n = b as usize;
        let mut bern = vec![0.0; n * width];
        let mut zeta0 = vec![0.0; n * width];
        let mut zeta1 = vec![0.0; n * width];
        let mut sums = [0.0; MAX_INDEX + 1];
        for r in 0..n {
            let bv = bernoulli_values(r as f64 / b as f64);
            for (w, i) in (first..=BATCH_LAST).enumerate() {
                bern[r * width + w] = d.coeffs[i] * bv[i];
            }
        }
        for s in 1..=n {
            let z = s as f64 / b as f64;
            let row = (s - 1) * width;
            progression_sums(z, 1.0, first, BATCH_LAST, &mut sums);
            for (w, i) in (first..=BATCH_LAST).enumerate() {
                zeta0[row + w] = sums[i];
            }
            progression_sums(1.0 + z, 1.0, first, BATCH_LAST, &mut sums);
            for (w, i) in (first..=BATCH_LAST).enumerate() {
                zeta1[row + w] = sums[i];
            }
        }
        Self { order, b, first, width, bern, zeta0, zeta1 }
    }

    /// `S_q(a/b)`; requires `gcd(a, b) = 1` and `a >= BATCH_START`.
    pub fn series(&self, a: u64) -> f64 {
        debug_assert!(a >= BATCH_START);
        let b = self.b;
        let x = a as f64 / b as f64;
        let mut acc = Accumulator::new();
        let mut k = 1u64;
        while k * a < BATCH_START * b {
            acc.add(remainder_raw(self.order, k as f64 * x));
            k += 1;
        }
        let w = self.width;
        let inva = 1.0 / a as f64;
        let mut scale = [0.0; MAX_INDEX + 1];
        let mut p = inva.powi(self.first as i32);
        for v in scale[..w].iter_mut() {
            *v = p;
            p *= inva;
        }
        let mut col = [0.0; MAX_INDEX + 1];
        let am = a % b;
        let mut r = am;
        let limit = BATCH_START * b;
        for s in 1..=b {
            let z = if s * a >= limit { &self.zeta0 } else { &self.zeta1 };
            let zr = &z[(s as usize - 1) * w..s as usize * w];
            let br = &self.bern[r as usize * w..(r as usize + 1) * w];
            for j in 0..w {
                col[j] += br[j] * zr[j];
            }
            r += am;
            if r >= b {
                r -= b;
            }
        }
        let mut tail = 0.0;
        for j in 0..w {
            tail += col[j] * scale[j];
        }
        acc.add(tail);
        acc.value()
    }
}
