//! Alternative integral and series representations of the Muntz series,
//! used as independent checks of the direct evaluations.

use super::{check_positive, check_tol, s1_general, s2, v_raw, SeriesEval};
use crate::constants::{bernoulli_number, frac, harmonic_exact};
use crate::error::{resource, Result};
use crate::quad::{gauss5, integrate_pieces};
use crate::summation::Accumulator;

/// `sum_{k <= kmax} ({kx} - 1/2)/k`.
pub fn phi1_partial(x: f64, kmax: u64) -> f64 {
    let mut acc = Accumulator::new();
    for k in 1..=kmax {
        acc.add((frac(k as f64 * x) - 0.5) / k as f64);
    }
    acc.value()
}

/// Divisor counts `d(m)` for `m <= n`, index 0 unused.
pub(crate) fn divisor_counts(n: usize) -> Vec<u32> {
    let mut d = vec![0u32; n + 1];
    for i in 1..=n {
        for j in (i..=n).step_by(i) {
            d[j] += 1;
        }
    }
    d
}

/// Fourier form `-sum_{m <= mmax} d(m) sin(2 pi m x)/(pi m)`.
pub fn phi1_fourier(x: f64, mmax: usize) -> f64 {
    let d = divisor_counts(mmax);
    let mut acc = Accumulator::new();
    for m in 1..=mmax {
        let t = frac(m as f64 * x);
        acc.add(d[m] as f64 * (std::f64::consts::TAU * t).sin() / m as f64);
    }
    -acc.value() / std::f64::consts::PI
}

/// `R1(x) = -int_x^inf ({t} - 1/2) t^-2 dt` by quadrature over unit pieces.
pub fn r1_via_integral(x: f64, quad_tol: f64) -> Result<f64> {
    check_positive(x, "r1_via_integral")?;
    check_tol(quad_tol)?;
    let t_end = (x.ceil() + 4.0 / quad_tol.powf(0.25)).ceil();
    let mut points = vec![x];
    let mut n = x.floor() + 1.0;
    while n <= t_end {
        points.push(n);
        n += 1.0;
    }
    let q = integrate_pieces(|t| (frac(t) - 0.5) / (t * t), &points, 0.1 * quad_tol)?;
    // int_T^inf ({t} - 1/2)/t^2 = -1/(12 T^2) + O(T^-4) for integer T.
    let tail = -1.0 / (12.0 * t_end * t_end);
    Ok(-(q.value + tail))
}

/// Trigamma function for `z >= 1`.
fn trigamma(z: f64) -> f64 {
    let mut z = z;
    let mut acc = 0.0;
    while z < 10.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut p = inv2 * inv;
    for k in 1..=8 {
        series += bernoulli_number(2 * k) * p;
        p *= inv2;
    }
    acc + inv + 0.5 * inv2 + series
}

/// Visit the Farey sequence of order `n` on `[0, 1]` in increasing order.
fn farey<F: FnMut(u64, u64)>(n: u64, mut f: F) {
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    f(a, b);
    while c <= n {
        let k = (n + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
        f(a, b);
    }
}

/// Largest truncation order accepted for the periodic partial sum.
pub const PHI_MAX_ORDER: u64 = 4000;

/// `S1(r) = -int_r^inf phi1(t) t^-2 dt` with `phi1` truncated at order `K`.
///
/// Periodicity folds the integral onto `[0, 1]` with weight
/// `1_{s >= {r}} (floor(r) + s)^-2 + psi'(floor(r) + 1 + s)`; the truncated
/// `phi1` is linear with slope `K` between Farey points and jumps by
/// `-H(floor(K/q))/q` at each `p/q`.
pub fn s1_via_phi_integral(r: f64, quad_tol: f64) -> Result<f64> {
    check_positive(r, "s1_via_phi_integral")?;
    check_tol(quad_tol)?;
    let order = (1.0 / (3.0 * quad_tol * r.max(1.0).powi(2))).ceil();
    if order > PHI_MAX_ORDER as f64 {
        return Err(resource(format!(
            "tolerance {quad_tol:e} needs a partial sum of order {order:.0}, limit {PHI_MAX_ORDER}"
        )));
    }
    let k = order.max(8.0) as u64;
    let kf = k as f64;
    let n0 = r.floor();
    let f0 = r - n0;
    let weight = |s: f64| {
        let head = if s >= f0 { 1.0 / ((n0 + s) * (n0 + s)) } else { 0.0 };
        head + trigamma(n0 + 1.0 + s)
    };
    let jumps: Vec<f64> = (0..=k).map(|q| if q == 0 { 0.0 } else { harmonic_exact(k / q) / q as f64 }).collect();
    let mut phi = Accumulator::new();
    phi.add(-0.5 * harmonic_exact(k));
    let mut acc = Accumulator::new();
    let mut prev = 0.0f64;
    let piece = |lo: f64, hi: f64, phi_lo: f64, acc: &mut Accumulator| {
        if hi > lo {
            acc.add(gauss5(|s| (phi_lo + kf * (s - lo)) * weight(s), lo, hi));
        }
    };
    farey(k, |p, q| {
        let t = p as f64 / q as f64;
        if p == 0 {
            return;
        }
        let phi_lo = phi.value();
        if prev < f0 && f0 < t {
            piece(prev, f0, phi_lo, &mut acc);
            let phi_mid = phi_lo + kf * (f0 - prev);
            piece(f0, t, phi_mid, &mut acc);
        } else {
            piece(prev, t, phi_lo, &mut acc);
        }
        phi.add(kf * (t - prev));
        phi.add(-jumps[q as usize]);
        prev = t;
    });
    Ok(-acc.value())
}

/// `S1(r) = -(1/r) int_1^inf ({xr} - 1/2) floor(x) x^-2 dx`.
pub fn s1_via_floor_integral(r: f64, quad_tol: f64) -> Result<f64> {
    check_positive(r, "s1_via_floor_integral")?;
    check_tol(quad_tol)?;
    let rational = super::small_rational(r);
    let (p, q) = rational.unwrap_or((1, 1));
    let mut x_end = (q as f64 / (r * quad_tol)).sqrt().max(200.0).ceil();
    if rational.is_some() {
        x_end = (x_end / q as f64).ceil() * q as f64;
    }
    if x_end * (1.0 + r) > 2e7 {
        return Err(resource(format!("floor integral needs {x_end:.3e} periods")));
    }
    let mut points: Vec<f64> = (1..=x_end as u64).map(|n| n as f64).collect();
    let first = r.floor() as u64 + 1;
    let last = (x_end * r).floor() as u64;
    points.extend((first..=last).map(|j| j as f64 / r).filter(|&t| t > 1.0 && t < x_end));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let f = |x: f64| (frac(x * r) - 0.5) * x.floor() / (x * x);
    let body = integrate_pieces(f, &points, 0.1 * quad_tol * r)?;
    // Tail from x_end: -B2({X r})/(2 X r) from ({xr} - 1/2)/x and the mean
    // 1/(12 p q) of ({xr} - 1/2){x} for rational r = p/q.
    let xr = x_end * r;
    let mut tail = -crate::constants::periodic_bernoulli(2, xr) / (2.0 * xr);
    if rational.is_some() {
        tail -= 1.0 / (12.0 * (p * q) as f64 * x_end);
    }
    Ok(-(body.value + tail) / r)
}

/// `S2(r) = int_r^inf S1(t) (1/t - 1/r) dt` by quadrature of sampled `S1`.
pub fn s2_via_s1_integral(r: f64, quad_tol: f64) -> Result<f64> {
    check_positive(r, "s2_via_s1_integral")?;
    check_tol(quad_tol)?;
    // Past T the weight is replaced by its value at T, using
    // int_T^inf S1 = sum_n V(nT)/n; what is left is O(T^-3).
    let t_end = (0.01 / quad_tol).cbrt().max(4.0 * r).max(20.0).ceil();
    let s_tol = quad_tol;
    let mut points = vec![r];
    let mut t = (r * 4.0).floor() / 4.0 + 0.25;
    while t < t_end {
        if t > r {
            points.push(t);
        }
        t += if t < 8.0 { 0.25 } else { 1.0 };
    }
    points.push(t_end);
    let mut failure = None;
    let body = integrate_pieces(
        |t| match s1_general(t, s_tol) {
            Ok(e) => e.value * (1.0 / t - 1.0 / r),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &points,
        0.5 * quad_tol,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let g = v_series_integral(t_end, 0.1 * quad_tol)?.value;
    Ok(body.value + g * (1.0 / t_end - 1.0 / r))
}

/// `|V(y)| <= V_ENVELOPE / y^2` for `y >= 12`.
pub const V_ENVELOPE: f64 = 0.01;

/// `int_r^inf S1 = sum_n V(nr)/n`.
pub fn v_series_integral(r: f64, tol: f64) -> Result<SeriesEval> {
    check_positive(r, "v_series_integral")?;
    check_tol(tol)?;
    let n = (V_ENVELOPE / (2.0 * r * r * tol)).sqrt().max(12.0 / r).ceil() + 1.0;
    if n > super::MAX_TERMS as f64 {
        return Err(resource(format!("v series needs {n:.3e} terms")));
    }
    let n = n as u64;
    let mut acc = Accumulator::new();
    for k in 1..=n {
        acc.add(v_raw(k as f64 * r) / k as f64);
    }
    let nf = n as f64;
    Ok(SeriesEval {
        value: acc.value(),
        tail_bound: V_ENVELOPE / (2.0 * r * r * nf * nf) + 4.0 * f64::EPSILON * acc.magnitude(),
        terms: n,
    })
}

/// `int_r^inf S1(t)/t dt = S2(r) + sum_n V(nr)/(nr)`.
pub fn s1_log_integral(r: f64, tol: f64) -> Result<SeriesEval> {
    let a = s2(r, 0.5 * tol)?;
    let b = v_series_integral(r, 0.5 * tol * r)?;
    Ok(SeriesEval {
        value: a.value + b.value / r,
        tail_bound: a.tail_bound + b.tail_bound / r,
        terms: a.terms + b.terms,
    })
}

#[cfg(test)]
pub(crate) fn trigamma_for_tests(z: f64) -> f64 {
    trigamma(z)
}
