//! Quadratic forms `a^T G a`, their decomposition into summatory terms, and
//! the squared distances they define.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{l_term, m_term, solve_abc, CoefficientVector, Kind, MobiusTable};
use crate::constants::consts;
use crate::error::{invalid, resource, Result};
use crate::gram::{gram_matrix, ratio_row};
use crate::identities::{zeta_line, ZETA_T_MAX};
use crate::muntz::rational::{gcd, tail_after};
use crate::muntz::{remainder_raw, Order, SeriesEval};
use crate::quad::integrate_pieces;
use crate::summation::Accumulator;

/// `F^(q)_n`, the inner product of the approximating function with the target.
pub fn f_term(n: usize, order: Order) -> f64 {
    let c = consts();
    let nf = n as f64;
    let l = nf.ln();
    match order {
        Order::One => (c.gamma - 1.0 - l) / nf,
        Order::Two => (-0.5 * l * l + (c.gamma - 2.0) * l + c.c1) / nf,
    }
}

fn check_n(coeffs: &CoefficientVector, n: usize) -> Result<()> {
    if n < 1 || n > coeffs.n_cap {
        return Err(invalid(format!("N = {n} outside 1..={}", coeffs.n_cap)));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// `sum_{n <= N} a_n F^(q)_n`.
pub fn mixed_sum(coeffs: &CoefficientVector, order: Order, n: usize) -> Result<f64> {
    check_n(coeffs, n)?;
    let mut acc = Accumulator::new();
    for k in 1..=n {
        acc.add(coeffs.get(k) * f_term(k, order));
    }
    Ok(acc.value())
}

/// Divisor sums run to `HEAD_FACTOR (N + m)` before per-term tails take over.
const HEAD_FACTOR: usize = 16;

/// `sum_{n <= N} a_n S_q(n/m)` with `N = coeffs.n_cap`.
pub fn s_convolved(coeffs: &CoefficientVector, order: Order, m: usize, tol: f64) -> Result<SeriesEval> {
    check_tol(tol)?;
    let s = convolved(coeffs, order, m, coeffs.n_cap)?;
    within(s.tail_bound, tol)?;
    Ok(s)
}

fn within(bound: f64, tol: f64) -> Result<()> {
    if bound > tol {
        return Err(resource(format!("rounding level {bound:e} exceeds tolerance {tol:e}")));
    }
    Ok(())
}

/// Regrouped as `sum_j c_j R_q(j/m)` with `c_j = sum_{n | j, n <= N} a_n`
/// up to `J`; past `J` the remainder of each `S_q(n/m)` is summed exactly
/// over its residue classes.
fn convolved(coeffs: &CoefficientVector, order: Order, m: usize, n: usize) -> Result<SeriesEval> {
    check_n(coeffs, n)?;
    if m < 1 {
        return Err(invalid("m must be at least 1"));
    }
    let j_max = HEAD_FACTOR * (n + m);
    let mut c = vec![0.0; j_max + 1];
    for k in 1..=n {
        let a = coeffs.get(k);
        if a != 0.0 {
            for j in (k..=j_max).step_by(k) {
                c[j] += a;
            }
        }
    }
    let mf = m as f64;
    let mut acc = Accumulator::new();
    for (j, &cj) in c.iter().enumerate().skip(1) {
        if cj != 0.0 {
            acc.add(cj * remainder_raw(order, j as f64 / mf));
        }
    }
    for k in 1..=n {
        let a = coeffs.get(k);
        if a != 0.0 {
            let g = gcd(k as u64, m as u64);
            acc.add(a * tail_after(order, k as u64 / g, m as u64 / g, (j_max / k) as u64));
        }
    }
    let bound = 16.0 * f64::EPSILON * acc.magnitude();
    Ok(SeriesEval { value: acc.value(), tail_bound: bound, terms: (j_max + n) as u64 })
}

/// Möbius inversion error `sum_{m <= N} (a_m/m) (sum_n a_n S_q(n/m) - R_q(1/m))`.
pub fn e_term(coeffs: &CoefficientVector, order: Order, n: usize, tol: f64) -> Result<f64> {
    check_n(coeffs, n)?;
    check_tol(tol)?;
    let parts: Vec<Result<(f64, f64)>> = (1..=n)
        .into_par_iter()
        .map(|m| {
            let a = coeffs.get(m);
            if a == 0.0 {
                return Ok((0.0, 0.0));
            }
            let w = a / m as f64;
            let s = convolved(coeffs, order, m, n)?;
            Ok((w * (s.value - remainder_raw(order, 1.0 / m as f64)), w.abs() * s.tail_bound))
        })
        .collect();
    let mut acc = Accumulator::new();
    let mut bound = 0.0;
    for p in parts {
        let (v, b) = p?;
        acc.add(v);
        bound += b;
    }
    within(bound + 16.0 * f64::EPSILON * acc.magnitude(), tol)?;
    Ok(acc.value())
}

/// Largest `N` handled with a stored Gram matrix.
pub const MATRIX_LIMIT: usize = 1000;

/// `sum_{m,n <= N} a_m a_n G^(q)_{m,n}`.
pub fn q_form_direct(coeffs: &CoefficientVector, order: Order, n: usize) -> Result<f64> {
    check_n(coeffs, n)?;
    if n <= MATRIX_LIMIT {
        let g = gram_matrix(order, n)?;
        return Ok(g.quadratic_form(&coeffs.values[..n]));
    }
    let fam = Family { alpha: coeffs.values[..n].to_vec(), beta: vec![0.0; n] };
    let bins = pair_bins(order, n, std::slice::from_ref(&fam));
    Ok(bins[0].aa.iter().map(|a| a.value()).sum())
}

/// Summatory terms `L_0..L_2`, `M_0..M_2` of the coefficients up to `N`.
fn lm_terms(coeffs: &CoefficientVector, n: usize) -> Result<([f64; 3], [f64; 3])> {
    let mut l = [0.0; 3];
    let mut m = [0.0; 3];
    for j in 0..3 {
        l[j] = l_term(coeffs, j as u32, n)?;
        m[j] = m_term(coeffs, j as u32, n)?;
    }
    Ok((l, m))
}

/// The quadratic form assembled from `L_j`, `M_j` and the inversion error.
pub fn q_form_decomposed(coeffs: &CoefficientVector, order: Order, n: usize, tol: f64) -> Result<f64> {
    let e = e_term(coeffs, order, n, tol)?;
    assemble(coeffs, order, n, e)
}

fn assemble(coeffs: &CoefficientVector, order: Order, n: usize, e: f64) -> Result<f64> {
    let (l, m) = lm_terms(coeffs, n)?;
    let c = consts();
    Ok(match order {
        Order::One => {
            m[0] * (c.k * l[0] + 0.5 * (l[1] + 1.0)) - 0.5 * m[1] * l[0] + (c.gamma - 1.0) * l[0] - l[1] + e
        }
        Order::Two => {
            m[0] * (c.k2 * l[0] + c.k1 * (l[1] + 1.0) + 0.25 * (2.0 * c.gamma + l[2]))
                - 0.5 * m[1] * (2.0 * c.k1 * l[0] + l[1] + 1.0)
                + 0.25 * m[2] * l[0]
                + c.c1 * l[0]
                + 0.5 * (2.0 * c.gamma * l[1] - l[2])
                - 2.0 * l[1]
                + e
        }
    })
}

/// The products `P_j` of centered `L` factors with `M_j`, followed by their sum.
pub fn p_terms(coeffs: &CoefficientVector, order: Order, n: usize) -> Result<Vec<f64>> {
    let (l, m) = lm_terms(coeffs, n)?;
    Ok(p_from_sums(order, [l[0], l[1], l[2]], [m[0], m[1], m[2]]))
}

/// The `P_j` products from the raw traces `L_j`, `M_j`, with their sum last.
pub fn p_from_sums(order: Order, l: [f64; 3], m: [f64; 3]) -> Vec<f64> {
    let c = consts();
    let mut p = match order {
        Order::One => vec![m[0] * (l[0] + 0.5 * (l[1] + 1.0)), m[1] * l[0]],
        Order::Two => vec![
            m[0] * (c.k2 * l[0] + c.k1 * (l[1] + 1.0) + 0.25 * (2.0 * c.gamma + l[2])),
            m[1] * (2.0 * c.k1 * l[0] + l[1] + 1.0),
            m[2] * l[0],
        ],
    };
    p.push(p.iter().sum());
    p
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadFormReport {
    pub q: u8,
    pub n: usize,
    pub kind: Kind,
    pub q_direct: f64,
    pub q_decomposed: f64,
    pub e_term: f64,
    pub mixed: f64,
    pub d_squared: f64,
    pub p_terms: Vec<f64>,
}

impl QuadFormReport {
    pub const HEADER: [&'static str; 9] =
        ["q", "N", "kind", "Q_direct", "Q_decomposed", "E", "mixed", "d_squared", "P"];
}

pub fn d_squared(coeffs: &CoefficientVector, order: Order, n: usize, tol: f64) -> Result<QuadFormReport> {
    let q_direct = q_form_direct(coeffs, order, n)?;
    let e = e_term(coeffs, order, n, tol)?;
    let mixed = mixed_sum(coeffs, order, n)?;
    let q = order.index();
    Ok(QuadFormReport {
        q,
        n,
        kind: coeffs.kind,
        q_direct,
        q_decomposed: assemble(coeffs, order, n, e)?,
        e_term: e,
        mixed,
        d_squared: q as f64 - 2.0 * mixed + q_direct,
        p_terms: p_terms(coeffs, order, n)?,
    })
}

/// `(1/2 pi) int_{-T}^{T} |1 - A(s) zeta(s)|^2 |s|^{-2q} dt` on `s = 1/2 + it`,
/// a lower bound for `d_q^2` that converges as `T` grows.
pub fn d_via_line_integral(
    coeffs: &CoefficientVector,
    order: Order,
    n: usize,
    t_max: f64,
    quad_tol: f64,
) -> Result<f64> {
    check_n(coeffs, n)?;
    check_tol(quad_tol)?;
    if !(t_max > 0.0) || t_max > ZETA_T_MAX {
        return Err(invalid(format!("T = {t_max} outside (0, {ZETA_T_MAX}]")));
    }
    let logs: Vec<f64> = (1..=n).map(|k| (k as f64).ln()).collect();
    let q = order.index() as i32;
    let f = |t: f64| {
        let s = Complex64::new(0.5, t);
        let mut poly = Complex64::new(0.0, 0.0);
        for (k, &l) in logs.iter().enumerate() {
            let a = coeffs.get(k + 1);
            if a != 0.0 {
                // n^{-s} = n^{-1/2} e^{-i t log n}
                poly += a * (-0.5 * l).exp() * Complex64::from_polar(1.0, -t * l);
            }
        }
        let z = zeta_line(s).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        (Complex64::new(1.0, 0.0) - poly * z).norm_sqr() / s.norm_sqr().powi(q)
    };
    let mut points = vec![0.0];
    let mut t = 0.0;
    while t < t_max {
        t = (t + 1.0).min(t_max);
        points.push(t);
    }
    // The integrand is even in t.
    let r = integrate_pieces(f, &points, 0.25 * quad_tol * std::f64::consts::PI)?;
    if !r.value.is_finite() {
        return Err(crate::Error::Numerical("zeta evaluation failed on the line".into()));
    }
    Ok(r.value / std::f64::consts::PI)
}

/// `a_n(N) = alpha_n - beta_n / log N` for every cutoff `N`.
pub(crate) struct Family {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Family {
    pub fn new(table: &MobiusTable, kind: Kind, n_max: usize, abc: (f64, f64, f64)) -> Self {
        let (a, b, c) = abc;
        let mut alpha = Vec::with_capacity(n_max);
        let mut beta = Vec::with_capacity(n_max);
        for k in 1..=n_max {
            let mu = table.get(k) as f64;
            let kf = k as f64;
            let l = kf.ln();
            alpha.push(mu);
            beta.push(match kind {
                Kind::Mobius => 0.0,
                Kind::Lambda => mu * l,
                Kind::Nu => mu * (l + a * l / kf + b / kf) + c / kf,
            });
        }
        Self { alpha, beta }
    }
}

/// Pair sums binned by the larger index, so prefix sums give every cutoff.
#[derive(Clone)]
pub(crate) struct Bins {
    pub aa: Vec<Accumulator>,
    pub ab: Vec<Accumulator>,
    pub bb: Vec<Accumulator>,
}

impl Bins {
    fn new(n: usize) -> Self {
        let z = vec![Accumulator::new(); n + 1];
        Self { aa: z.clone(), ab: z.clone(), bb: z }
    }

    fn merge(&mut self, other: &Bins) {
        for (x, y) in [(&mut self.aa, &other.aa), (&mut self.ab, &other.ab), (&mut self.bb, &other.bb)] {
            for (a, b) in x.iter_mut().zip(y) {
                a.add(b.value());
            }
        }
    }
}

/// One pass over reduced ratios `a/b >= 1`; the entry at `(gb, ga)` is
/// `G_{b,a}/g`, and symmetry supplies the lower triangle.
pub(crate) fn pair_bins(order: Order, n_max: usize, families: &[Family]) -> Vec<Bins> {
    let c = consts();
    let empty = || vec![Bins::new(n_max); families.len()];
    (1..=n_max as u64)
        .into_par_iter()
        .fold(empty, |mut bins, b| {
            let row = ratio_row(order, b, n_max as u64, b);
            for a in b..=n_max as u64 {
                let s = row[a as usize - 1];
                if s.is_nan() {
                    continue;
                }
                let l = (a as f64 / b as f64).ln();
                let closed = match order {
                    Order::One => c.k + 0.5 * l,
                    Order::Two => c.k2 + c.k1 * l + 0.25 * l * l,
                };
                let gba = closed / a as f64 + s / b as f64;
                let diag = a == b;
                for g in 1..=n_max as u64 / a {
                    let (m, n) = ((g * b) as usize, (g * a) as usize);
                    let w = if diag { 1.0 } else { 2.0 } * gba / g as f64;
                    for (fam, bin) in families.iter().zip(bins.iter_mut()) {
                        let (am, an) = (fam.alpha[m - 1], fam.alpha[n - 1]);
                        let (bm, bn) = (fam.beta[m - 1], fam.beta[n - 1]);
                        bin.aa[n].add(w * am * an);
                        bin.ab[n].add(w * (am * bn + bm * an));
                        bin.bb[n].add(w * bm * bn);
                    }
                }
            }
            bins
        })
        .reduce(empty, |mut x, y| {
            for (a, b) in x.iter_mut().zip(&y) {
                a.merge(b);
            }
            x
        })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// `d_q^2(N)` per requested kind, in order.
    pub d_squared: Vec<f64>,
}

/// `d_q^2(N)` on a grid for several coefficient families, sharing one pass
/// over the Gram entries up to the largest `N`.
pub fn d_squared_sweep(
    order: Order,
    grid: &[usize],
    kinds: &[Kind],
    abc: Option<(f64, f64, f64)>,
) -> Result<Vec<SweepRow>> {
    let Some(&n_max) = grid.last() else {
        return Err(invalid("empty grid"));
    };
    if grid[0] < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be strictly increasing and start at 2 or more"));
    }
    let abc = match abc {
        Some(t) => t,
        None => solve_abc()?,
    };
    let table = crate::arith::mobius_sieve(n_max)?;
    let families: Vec<Family> = kinds.iter().map(|&k| Family::new(&table, k, n_max, abc)).collect();
    let bins = pair_bins(order, n_max, &families);
    let q = order.index() as f64;
    let mut rows: Vec<SweepRow> = grid.iter().map(|&n| SweepRow { n, d_squared: Vec::new() }).collect();
    for (fam, bin) in families.iter().zip(&bins) {
        let (mut aa, mut ab, mut bb) = (Accumulator::new(), Accumulator::new(), Accumulator::new());
        let (mut fa, mut fb) = (Accumulator::new(), Accumulator::new());
        let mut next = 0;
        for k in 1..=n_max {
            aa.add(bin.aa[k].value());
            ab.add(bin.ab[k].value());
            bb.add(bin.bb[k].value());
            let f = f_term(k, order);
            fa.add(fam.alpha[k - 1] * f);
            fb.add(fam.beta[k - 1] * f);
            if k == grid[next] {
                let ln = (k as f64).ln();
                let quad = aa.value() - ab.value() / ln + bb.value() / (ln * ln);
                let mixed = fa.value() - fb.value() / ln;
                rows[next].d_squared.push(q - 2.0 * mixed + quad);
                next += 1;
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
