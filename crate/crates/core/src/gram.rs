//! Gram kernels `G^(q)_{u,v}` in their various equivalent forms, and Gram
//! matrices over integer dilations.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::consts;
use crate::error::{invalid, Result};
use crate::muntz::rational::{self, gcd, DenominatorBatch, BATCH_START};
use crate::muntz::{self, s1_log_integral, small_rational, Order};
use crate::quad::integrate_pieces;

fn check_pair(u: f64, v: f64) -> Result<()> {
    if !(u > 0.0 && v > 0.0 && u.is_finite() && v.is_finite()) {
        return Err(invalid(format!("kernel arguments must be positive, got ({u}, {v})")));
    }
    Ok(())
}

/// Weighting used by the manifestly symmetric forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Weights `v/(u+v)` and `u/(u+v)`.
    Weighted,
    /// Weights `1/2` each.
    Equal,
}

pub fn g1(u: f64, v: f64, tol: f64) -> Result<f64> {
    check_pair(u, v)?;
    let c = consts();
    let s = muntz::s1(v / u, tol * u)?.value;
    Ok((c.k + 0.5 * (v / u).ln()) / v + s / u)
}

pub fn g2(u: f64, v: f64, tol: f64) -> Result<f64> {
    check_pair(u, v)?;
    let c = consts();
    let l = (v / u).ln();
    let s = muntz::s2(v / u, tol * u)?.value;
    Ok((c.k2 + c.k1 * l + 0.25 * l * l) / v + s / u)
}

/// Closed form for either order.
pub fn kernel(order: Order, u: f64, v: f64, tol: f64) -> Result<f64> {
    match order {
        Order::One => g1(u, v, tol),
        Order::Two => g2(u, v, tol),
    }
}

pub fn g1_symmetric(u: f64, v: f64, tol: f64, variant: Variant) -> Result<f64> {
    check_pair(u, v)?;
    let c = consts();
    let r = v / u;
    match variant {
        Variant::Weighted => {
            let a = muntz::s1(r, 0.5 * tol * u * (u + v) / v)?.value;
            let b = muntz::s1(1.0 / r, 0.5 * tol * v * (u + v) / u)?.value;
            Ok((2.0 * c.k + r * a + b / r) / (u + v))
        }
        Variant::Equal => {
            let a = muntz::s1(1.0 / r, tol * v)?.value;
            let b = muntz::s1(r, tol * u)?.value;
            let l = r.ln();
            let w = 1.0 / v - 1.0 / u;
            Ok(0.5 * (c.k * (1.0 / v + 1.0 / u) + 0.5 * w * l + a / v + b / u))
        }
    }
}

pub fn g2_symmetric(u: f64, v: f64, tol: f64, variant: Variant) -> Result<f64> {
    check_pair(u, v)?;
    let c = consts();
    let r = v / u;
    let l = r.ln();
    match variant {
        Variant::Weighted => {
            let a = muntz::s2(r, 0.5 * tol * u * (u + v) / v)?.value;
            let b = muntz::s2(1.0 / r, 0.5 * tol * v * (u + v) / u)?.value;
            Ok((2.0 * c.k2 + 0.5 * l * l + r * a + b / r) / (u + v))
        }
        Variant::Equal => {
            let a = muntz::s2(1.0 / r, tol * v)?.value;
            let b = muntz::s2(r, tol * u)?.value;
            let w = 1.0 / v - 1.0 / u;
            let sum = 1.0 / v + 1.0 / u;
            Ok(0.5 * ((c.k2 + 0.25 * l * l) * sum + c.k1 * w * l + a / v + b / u))
        }
    }
}

/// `G^(2)` through logarithmic integrals of `S1`.
pub fn g2_alt(u: f64, v: f64, tol: f64) -> Result<f64> {
    check_pair(u, v)?;
    let c = consts();
    let l = (v / u).ln();
    let a = s1_log_integral(u / v, 0.5 * tol * v)?.value;
    let b = s1_log_integral(v / u, 0.5 * tol * u)?.value;
    Ok(c.k1 * (1.0 / v + 1.0 / u) + 0.5 * (1.0 / v - 1.0 / u) * l + a / v + b / u)
}

/// Periods up to this length are integrated exactly before the tail.
const MAX_PERIOD: u64 = 1000;

/// `A(r) = int_0^inf {xr}{x} dx/x^2`.
pub fn autocorr(r: f64, quad_tol: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("autocorr needs r > 0, got {r}")));
    }
    if !(quad_tol > 0.0) {
        return Err(invalid("quadrature tolerance must be positive"));
    }
    let f = |x: f64| {
        let y = x * r;
        (y - y.floor()) * (x - x.floor()) / (x * x)
    };
    let t0 = 100f64.max(100.0 / r);
    // {xr}{x} has period q when r = p/q.
    let period = small_rational(r).map(|(_, q)| q).filter(|&q| q <= MAX_PERIOD);
    let t_end = match period {
        Some(q) => (t0 / q as f64).ceil() * q as f64,
        None => t0,
    };
    let head_end = 1f64.min(1.0 / r);
    let points = breakpoints(r, head_end, t_end);
    let body = integrate_pieces(f, &points, 0.5 * quad_tol)?.value;
    // On (0, min(1, 1/r)) the integrand is the constant r.
    let head = r * head_end;
    let tail = match period {
        Some(q) => {
            // Mean and first moment over one period give the tail through
            // O(q^2 / T^3).
            let q = q as f64;
            let pts = breakpoints(r, 0.0, q);
            let g = |x: f64| {
                let y = x * r;
                (y - y.floor()) * (x - x.floor())
            };
            let tol = 1e-3 * quad_tol * t_end;
            let mean = integrate_pieces(g, &pts, tol)?.value / q;
            let moment = integrate_pieces(|x| x * g(x), &pts, tol * q)?.value;
            let gbar = -(moment - 0.5 * mean * q * q) / q;
            mean / t_end + gbar / (t_end * t_end)
        }
        None => 0.25 / t_end,
    };
    Ok(head + body + tail)
}

/// Sorted multiples of 1 and of 1/r in `[lo, hi]`, with both ends.
fn breakpoints(r: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let mut k = lo.floor() + 1.0;
    while k < hi {
        pts.push(k);
        k += 1.0;
    }
    let mut j = (lo * r).floor() + 1.0;
    while j / r < hi {
        pts.push(j / r);
        j += 1.0;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1.0));
    pts
}

pub fn g1_via_autocorr(m: u64, n: u64, quad_tol: f64) -> Result<f64> {
    if m == 0 || n == 0 {
        return Err(invalid("indices must be positive"));
    }
    Ok(autocorr(n as f64 / m as f64, quad_tol * n as f64)? / n as f64)
}

/// Range of the logarithmic ratio variable in the double integral.
const LOG_RANGE: f64 = 40.0;
const KINK_ORDER: u64 = 12;

/// `G^(2)_{u,v} = int_0^1 int_0^1 G^(1)_{ux,vy} dx dy`.
///
/// Along each line `vy/(ux) = rho` the inner integral is exact, leaving
/// `(1/u) int_0^inf G^(1)_{1,rho} / max(v/u, rho) d rho`, which is taken in
/// `w = log rho` so that both logarithmic ends are finite intervals.
pub fn g2_via_double_integral(u: f64, v: f64, quad_tol: f64) -> Result<f64> {
    check_pair(u, v)?;
    if !(quad_tol > 0.0) {
        return Err(invalid("quadrature tolerance must be positive"));
    }
    let c = v / u;
    let lc = c.ln();
    let k = consts().k;
    let mut failure = None;
    let mut f = |w: f64| {
        let rho = w.exp();
        let den = c.max(rho);
        // Budget per unit of w, integrating to quad_tol / 2.
        let budget = 0.125 * quad_tol * (-0.5 * (w - lc).abs()).exp();
        let (head, r, scale) = if rho >= 1.0 {
            ((k + 0.5 * w) / den, rho, rho / den)
        } else {
            // G(1, rho) rho = (K - w/2) rho + S1(1/rho), by symmetry.
            (rho * (k - 0.5 * w) / den, 1.0 / rho, 1.0 / den)
        };
        match muntz::s1_general(r, (budget / scale).min(1e-2)) {
            Ok(e) => head + e.value * scale,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    // The strongest kinks of S1 sit at ratios with small numerator and denominator.
    let mut points = vec![-LOG_RANGE, lc, LOG_RANGE];
    for p in 1..=KINK_ORDER {
        for q in 1..=KINK_ORDER {
            if gcd(p, q) == 1 {
                points.push((p as f64 / q as f64).ln());
            }
        }
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    let q = integrate_pieces(&mut f, &points, 0.5 * quad_tol)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(q.value / u),
    }
}

/// `V(n, m) = sum_{k<m} {kn/m} cot(pi k/m)`; empty for `m = 1`.
pub fn vasyunin_sum(n: u64, m: u64) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(invalid("Vasyunin sum needs positive arguments"));
    }
    if gcd(n, m) != 1 {
        return Err(invalid(format!("Vasyunin sum needs coprime arguments, got ({n}, {m})")));
    }
    let pi = std::f64::consts::PI;
    let mut acc = 0.0;
    for k in 1..m {
        let f = ((k * n) % m) as f64 / m as f64;
        let ang = pi * k as f64 / m as f64;
        acc += f * ang.cos() / ang.sin();
    }
    Ok(acc)
}

/// `A(n/m)` from Vasyunin sums.
pub fn autocorr_via_vasyunin(n: u64, m: u64) -> Result<f64> {
    let vs = vasyunin_sum(n, m)? + vasyunin_sum(m, n)?;
    let c = consts();
    let r = n as f64 / m as f64;
    let l = r.ln();
    let g = c.log_2pi - c.gamma;
    Ok(0.5 * (1.0 - r) * l + 0.5 * (1.0 + r) * g - std::f64::consts::PI / (2.0 * m as f64) * vs)
}

/// `S_q(a/b)` for every coprime pair with `a, b <= n_max` and fixed `b`,
/// indexed by `a - 1`; entries for non-coprime `a` are NaN.
pub(crate) fn ratio_row(order: Order, b: u64, n_max: u64, a_min: u64) -> Vec<f64> {
    let batch = (n_max >= BATCH_START).then(|| DenominatorBatch::new(order, b));
    (1..=n_max)
        .map(|a| {
            if a < a_min || gcd(a, b) != 1 {
                return f64::NAN;
            }
            match &batch {
                Some(batch) if a >= BATCH_START => batch.series(a),
                _ => rational::series(order, a, b).value,
            }
        })
        .collect()
}

/// Values of `S_q(a/b)` on reduced ratios `a/b` with `a, b <= n_max`.
pub struct RatioTable {
    order: Order,
    n: usize,
    values: Vec<f64>,
}

impl RatioTable {
    pub fn new(order: Order, n_max: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max must be at least 1"));
        }
        let rows: Vec<Vec<f64>> =
            (1..=n_max).into_par_iter().map(|b| ratio_row(order, b, n_max, 1)).collect();
        Ok(Self { order, n: n_max as usize, values: rows.concat() })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// `S_q(n/m)` for any `m, n <= n_max`.
    pub fn get(&self, n: u64, m: u64) -> f64 {
        let g = gcd(n, m);
        let (a, b) = ((n / g) as usize, (m / g) as usize);
        self.values[(b - 1) * self.n + a - 1]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GramMatrix {
    pub q: u8,
    pub n: usize,
    /// Row-major, `entries[(m-1)*n + (n-1)]`.
    pub entries: Vec<f64>,
}

impl GramMatrix {
    /// `G_{m,n}` with 1-based indices.
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.entries[(m - 1) * self.n + n - 1]
    }

    pub fn trace(&self) -> f64 {
        (1..=self.n).map(|i| self.get(i, i)).sum()
    }

    /// Largest `|G_{m,n} - G_{n,m}|` relative to the larger modulus.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 1..=self.n {
            for n in m + 1..=self.n {
                let (a, b) = (self.get(m, n), self.get(n, m));
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let m = DMatrix::from_row_slice(self.n, self.n, &self.entries);
        let sym = (&m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    /// Smallest eigenvalue is at least `-rel * trace`.
    pub fn is_psd(&self, rel: f64) -> bool {
        self.min_eigenvalue() >= -rel * self.trace()
    }

    /// `a^T G a` over the leading `a.len()` rows and columns.
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        let mut acc = crate::summation::Accumulator::new();
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            for (j, &aj) in a.iter().enumerate() {
                acc.add(ai * aj * self.entries[i * self.n + j]);
            }
        }
        acc.value()
    }
}

/// `G^(q)_{m,n}` for `m, n <= n_max`, with series values shared across equal
/// ratios.
pub fn gram_matrix(order: Order, n_max: usize) -> Result<GramMatrix> {
    let table = RatioTable::new(order, n_max as u64)?;
    Ok(gram_from_table(&table, n_max))
}

pub(crate) fn gram_from_table(table: &RatioTable, n_max: usize) -> GramMatrix {
    let c = consts();
    let order = table.order();
    let entries: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .flat_map_iter(|m| {
            (1..=n_max).map(move |n| {
                let l = (n as f64 / m as f64).ln();
                let closed = match order {
                    Order::One => c.k + 0.5 * l,
                    Order::Two => c.k2 + c.k1 * l + 0.25 * l * l,
                };
                closed / n as f64 + table.get(n as u64, m as u64) / m as f64
            })
        })
        .collect();
    GramMatrix { q: order.index(), n: n_max, entries }
}
