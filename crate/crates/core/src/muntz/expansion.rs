//! Large-argument expansions in periodic Bernoulli functions.
//!
//! Every remainder function here has the form `sum c_ij B_i({y}) y^-j`.
//! Repeated integration by parts of `int_y^inf B_i({t}) t^-j dt` generates
//! the coefficients, so new expansions are obtained by composing the
//! operators below instead of by hand.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::constants::{bernoulli_poly_coeffs, frac};

/// Highest Bernoulli index kept in any expansion.
pub const MAX_INDEX: usize = 17;

#[derive(Clone, Debug, Default)]
pub struct BernoulliSeries {
    terms: BTreeMap<(usize, i32), f64>,
}

impl BernoulliSeries {
    /// `c B_i({y}) y^-j`.
    pub fn term(c: f64, i: usize, j: i32) -> Self {
        let mut s = Self::default();
        s.add(c, i, j);
        s
    }

    fn add(&mut self, c: f64, i: usize, j: i32) {
        if i <= MAX_INDEX && c != 0.0 {
            *self.terms.entry((i, j)).or_insert(0.0) += c;
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::default();
        for (&(i, j), &v) in &self.terms {
            out.add(c * v, i, j);
        }
        out
    }

    /// Multiply by `y^-k`.
    pub fn shift_power(&self, k: i32) -> Self {
        let mut out = Self::default();
        for (&(i, j), &v) in &self.terms {
            out.add(v, i, j + k);
        }
        out
    }

    /// `y -> int_y^inf f(t) dt`, using
    /// `I[i,j] = -B_{i+1}/((i+1) y^j) + j/(i+1) I[i+1, j+1]`.
    pub fn tail_integral(&self) -> Self {
        let mut out = Self::default();
        for (&(i, j), &v) in &self.terms {
            let mut c = v / (i + 1) as f64;
            let mut k = 0;
            while i + 1 + k <= MAX_INDEX {
                out.add(-c, i + 1 + k, j + k as i32);
                c *= (j + k as i32) as f64 / (i + 2 + k) as f64;
                k += 1;
            }
        }
        out
    }

    pub fn coefficient(&self, i: usize, j: i32) -> f64 {
        self.terms.get(&(i, j)).copied().unwrap_or(0.0)
    }

    /// The expansion is diagonal when each Bernoulli index carries one power.
    pub fn diagonal(&self) -> Option<(i32, Vec<f64>)> {
        let mut offset = None;
        let mut coeffs = vec![0.0; MAX_INDEX + 1];
        for (&(i, j), &v) in &self.terms {
            let d = j - i as i32;
            match offset {
                None => offset = Some(d),
                Some(o) if o != d => return None,
                _ => {}
            }
            coeffs[i] = v;
        }
        Some((offset.unwrap_or(0), coeffs))
    }
}

/// Diagonal expansion `sum_i coeffs[i] B_i(sigma) y^-(i + offset)`.
#[derive(Clone, Debug)]
pub struct Diagonal {
    pub offset: i32,
    pub coeffs: Vec<f64>,
    first: usize,
}

impl Diagonal {
    fn from_series(s: &BernoulliSeries) -> Self {
        let (offset, coeffs) = s.diagonal().expect("expansion is diagonal");
        let first = coeffs.iter().position(|&c| c != 0.0).unwrap_or(0);
        Self { offset, coeffs, first }
    }

    pub fn first_index(&self) -> usize {
        self.first
    }

    pub fn eval(&self, y: f64) -> f64 {
        let b = bernoulli_values(frac(y));
        let inv = 1.0 / y;
        let mut p = inv.powi(self.first as i32 + self.offset);
        let mut acc = 0.0;
        for i in self.first..=MAX_INDEX {
            acc += self.coeffs[i] * b[i] * p;
            p *= inv;
        }
        acc
    }
}

/// `B_i(x)` for `i = 0..=MAX_INDEX`.
pub fn bernoulli_values(x: f64) -> [f64; MAX_INDEX + 1] {
    let table = bernoulli_table();
    let mut out = [0.0; MAX_INDEX + 1];
    for (i, coeffs) in table.iter().enumerate() {
        out[i] = coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    }
    out
}

fn bernoulli_table() -> &'static Vec<Vec<f64>> {
    static T: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    T.get_or_init(|| (0..=MAX_INDEX).map(bernoulli_poly_coeffs).collect())
}

pub struct Expansions {
    pub r1: Diagonal,
    pub v: Diagonal,
    pub r2: Diagonal,
}

pub fn expansions() -> &'static Expansions {
    static E: OnceLock<Expansions> = OnceLock::new();
    E.get_or_init(|| {
        // R1 = -int_y^inf B_1({t}) t^-2 dt, V = int_y^inf R1, R2 = -int_y^inf V t^-2.
        let r1 = BernoulliSeries::term(1.0, 1, 2).tail_integral().scale(-1.0);
        let v = r1.tail_integral();
        let r2 = v.shift_power(2).tail_integral().scale(-1.0);
        Expansions {
            r1: Diagonal::from_series(&r1),
            v: Diagonal::from_series(&v),
            r2: Diagonal::from_series(&r2),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r1_coefficients_are_reciprocal_indices() {
        let e = expansions();
        assert_eq!(e.r1.offset, 0);
        assert_eq!(e.r1.first_index(), 2);
        for i in 2..=MAX_INDEX {
            assert!((e.r1.coeffs[i] - 1.0 / i as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn leading_terms() {
        let e = expansions();
        assert_eq!(e.v.offset, -1);
        assert!((e.v.coeffs[3] + 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(e.r2.first_index(), 4);
        assert!((e.r2.coeffs[4] + 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn r2_closed_form() {
        // -w_i / i with w_i = sum_{p=2}^{i-2} (p-1)/(p(p+1)).
        let e = expansions();
        for i in 4..=MAX_INDEX {
            let w: f64 = (2..=i - 2).map(|p| (p - 1) as f64 / (p * (p + 1)) as f64).sum();
            assert!((e.r2.coeffs[i] + w / i as f64).abs() < 1e-14, "{i}");
        }
    }

    #[test]
    fn v_closed_form() {
        let e = expansions();
        for p in 2..MAX_INDEX {
            let c = -((p - 1) as f64) / (p * (p + 1)) as f64;
            assert!((e.v.coeffs[p + 1] - c).abs() < 1e-15);
        }
    }
}
