//! Möbius values, the coefficient families and their summatory traces.

use serde::Serialize;

use crate::constants::consts;
use crate::error::{invalid, resource, Error, Result};
use crate::summation::Accumulator;

/// Default upper limit for sieving.
pub const DEFAULT_SIEVE_CAP: usize = 10_000_000;
const SEGMENT: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct MobiusTable {
    mu: Vec<i8>,
}

impl MobiusTable {
    pub fn n_max(&self) -> usize {
        self.mu.len() - 1
    }

    /// `mu(n)` for `1 <= n <= n_max`.
    #[inline]
    pub fn get(&self, n: usize) -> i8 {
        self.mu[n]
    }

    /// `mu[0]` is a placeholder zero.
    pub fn as_slice(&self) -> &[i8] {
        &self.mu
    }

    /// Mertens function `M(x)`.
    pub fn mertens(&self, x: usize) -> i64 {
        self.mu[1..=x].iter().map(|&m| m as i64).sum()
    }
}

pub fn mobius_sieve(n_max: usize) -> Result<MobiusTable> {
    mobius_sieve_capped(n_max, DEFAULT_SIEVE_CAP)
}

/// Segmented sieve: each segment records the sign and the product of the
/// small primes found; a leftover cofactor is one large prime.
pub fn mobius_sieve_capped(n_max: usize, cap: usize) -> Result<MobiusTable> {
    if n_max < 1 {
        return Err(invalid("sieve bound must be at least 1"));
    }
    if n_max > cap {
        return Err(resource(format!("sieve bound {n_max} exceeds cap {cap}")));
    }
    let root = (n_max as f64).sqrt() as usize + 1;
    let primes = small_primes(root);
    let mut mu = vec![0i8; n_max + 1];
    let mut prod = vec![0u64; SEGMENT];
    let mut lo = 1;
    while lo <= n_max {
        let hi = (lo + SEGMENT).min(n_max + 1);
        let seg = &mut mu[lo..hi];
        seg.fill(1);
        prod[..hi - lo].fill(1);
        for &p in &primes {
            if p >= hi {
                break;
            }
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                seg[m - lo] = -seg[m - lo];
                prod[m - lo] *= p as u64;
                m += p;
            }
            let p2 = p * p;
            let mut m = lo.div_ceil(p2) * p2;
            while m < hi {
                seg[m - lo] = 0;
                m += p2;
            }
        }
        for (i, v) in seg.iter_mut().enumerate() {
            if *v != 0 && prod[i] != (lo + i) as u64 {
                *v = -*v;
            }
        }
        lo = hi;
    }
    mu[0] = 0;
    Ok(MobiusTable { mu })
}

fn small_primes(n: usize) -> Vec<usize> {
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Solve `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Result<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut det = 1.0;
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if piv != col {
            m.swap(piv, col);
            rhs.swap(piv, col);
            det = -det;
        }
        det *= m[col][col];
        if m[col][col].abs() <= 1e-12 * scale {
            return Err(Error::Numerical("singular system for a, b, c".into()));
        }
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    if det.abs() <= 1e-12 * scale.powi(3) {
        return Err(Error::Numerical(format!("determinant {det:e} too small")));
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = rhs[row];
        for k in row + 1..3 {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Ok(x)
}

/// The constants `(a, b, c)` of the modified coefficients.
pub fn solve_abc() -> Result<(f64, f64, f64)> {
    let c = consts();
    let e = c.eta;
    let z = c.zeta2;
    let m = [[e[1], e[0], z[0]], [e[2], e[1], -z[1]], [e[3], e[2], z[2]]];
    let rhs = [1.0, 2.0 * c.gamma, 6.0 * (c.gamma * c.gamma + c.gamma1)];
    let [a, b, cc] = solve3(m, rhs)?;
    Ok((a, b, cc))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mobius,
    Lambda,
    Nu,
}

impl std::str::FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mobius" | "mu" => Ok(Kind::Mobius),
            "lambda" => Ok(Kind::Lambda),
            "nu" => Ok(Kind::Nu),
            _ => Err(invalid(format!("unknown coefficient kind {s:?}"))),
        }
    }
}

/// Dirichlet polynomial coefficients `a_1..a_N`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientVector {
    pub kind: Kind,
    pub n_cap: usize,
    /// `values[n - 1] = a_n`.
    pub values: Vec<f64>,
    pub abc: Option<(f64, f64, f64)>,
}

impl CoefficientVector {
    /// `a_n`, one-based.
    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    /// Arbitrary coefficients, tagged as Möbius-like for reporting.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self { kind: Kind::Mobius, n_cap: values.len(), values, abc: None }
    }
}

pub fn coefficients(kind: Kind, n: usize, abc: Option<(f64, f64, f64)>) -> Result<CoefficientVector> {
    if n < 2 {
        return Err(invalid("coefficients need N >= 2"));
    }
    coefficients_from(&mobius_sieve(n)?, kind, n, abc)
}

/// As [`coefficients`], reusing an existing table.
pub fn coefficients_from(
    table: &MobiusTable,
    kind: Kind,
    n: usize,
    abc: Option<(f64, f64, f64)>,
) -> Result<CoefficientVector> {
    if n < 2 {
        return Err(invalid("coefficients need N >= 2"));
    }
    if n > table.n_max() {
        return Err(invalid(format!("N = {n} beyond sieve bound {}", table.n_max())));
    }
    if abc.is_some() && kind != Kind::Nu {
        return Err(invalid("a, b, c only apply to the nu coefficients"));
    }
    let abc = match kind {
        Kind::Nu => Some(match abc {
            Some(t) => t,
            None => solve_abc()?,
        }),
        _ => None,
    };
    let ln = (n as f64).ln();
    let mu = |k: usize| table.get(k) as f64;
    let values = match (kind, abc) {
        (Kind::Mobius, _) => (1..=n).map(mu).collect(),
        (Kind::Lambda, _) => (1..=n).map(|k| mu(k) * (1.0 - (k as f64).ln() / ln)).collect(),
        (Kind::Nu, Some((a, b, c))) => (1..=n)
            .map(|k| {
                let kf = k as f64;
                let l = kf.ln();
                mu(k) * (1.0 - (l + a * l / kf + b / kf) / ln) - c / (kf * ln)
            })
            .collect(),
        (Kind::Nu, None) => unreachable!(),
    };
    Ok(CoefficientVector { kind, n_cap: n, values, abc })
}

fn check_range(coeffs: &CoefficientVector, j: u32, n: usize) -> Result<()> {
    if j > 3 {
        return Err(invalid(format!("log power {j} outside 0..=3")));
    }
    if n < 1 || n > coeffs.n_cap {
        return Err(invalid(format!("N = {n} outside 1..={}", coeffs.n_cap)));
    }
    Ok(())
}

/// `L_{a,j}(N) = sum_{n <= N} a_n log^j(n)/n`.
pub fn l_term(coeffs: &CoefficientVector, j: u32, n: usize) -> Result<f64> {
    check_range(coeffs, j, n)?;
    let mut acc = Accumulator::new();
    for k in 1..=n {
        let kf = k as f64;
        acc.add(coeffs.get(k) * kf.ln().powi(j as i32) / kf);
    }
    Ok(acc.value())
}

/// `M_{a,j}(N) = sum_{n <= N} a_n log^j(n)`.
pub fn m_term(coeffs: &CoefficientVector, j: u32, n: usize) -> Result<f64> {
    check_range(coeffs, j, n)?;
    let mut acc = Accumulator::new();
    for k in 1..=n {
        acc.add(coeffs.get(k) * (k as f64).ln().powi(j as i32));
    }
    Ok(acc.value())
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub l: [f64; 4],
    pub lbar: [f64; 4],
    pub m: [f64; 4],
    pub ltil: [f64; 3],
    pub mtil: [f64; 3],
    pub dlbar: [f64; 3],
    pub dm: [f64; 3],
}

impl TraceRow {
    fn new(n: usize, l: [f64; 4], m: [f64; 4]) -> Self {
        let ell = consts().ell;
        let ln = (n as f64).ln();
        let lbar: [f64; 4] = std::array::from_fn(|j| l[j] + ell[j]);
        Self {
            n,
            l,
            lbar,
            m,
            ltil: std::array::from_fn(|j| lbar[j] / ln.powi(j as i32)),
            mtil: std::array::from_fn(|j| m[j] / ln.powi(j as i32)),
            dlbar: std::array::from_fn(|j| lbar[j] - lbar[j + 1] / ln),
            dm: std::array::from_fn(|j| m[j] - m[j + 1] / ln),
        }
    }

    /// Values in [`TRACE_HEADER`] order.
    pub fn record(&self) -> Vec<f64> {
        let mut v = vec![self.n as f64];
        v.extend(self.l);
        v.extend(self.lbar);
        v.extend(self.m);
        v.extend(self.ltil);
        v.extend(self.mtil);
        v.extend(self.dlbar);
        v.extend(self.dm);
        v
    }
}

pub const TRACE_HEADER: [&str; 25] = [
    "N", "L0", "L1", "L2", "L3", "Lbar0", "Lbar1", "Lbar2", "Lbar3", "M0", "M1", "M2", "M3", "Ltil0",
    "Ltil1", "Ltil2", "Mtil0", "Mtil1", "Mtil2", "dLbar0", "dLbar1", "dLbar2", "dM0", "dM1", "dM2",
];

#[derive(Clone, Debug, Serialize)]
pub struct TraceTable {
    pub kind: Kind,
    pub abc: Option<(f64, f64, f64)>,
    pub rows: Vec<TraceRow>,
}

const POWERS: usize = 5;

/// Power sums over `n <= N` from which every family's traces follow, since
/// the lambda and nu coefficients are affine in `1/log N`.
#[derive(Default)]
struct BasicSums {
    /// `mu l^p / n`, `mu l^p`, `mu l^p / n^2`, `l^p / n^2`, `l^p / n`.
    acc: [[Accumulator; POWERS]; 5],
}

impl BasicSums {
    #[inline]
    fn add(&mut self, n: usize, mu: i8, full: bool) {
        let nf = n as f64;
        let l = nf.ln();
        let inv = 1.0 / nf;
        let mut p = 1.0;
        for k in 0..POWERS {
            if mu != 0 {
                let s = mu as f64 * p;
                self.acc[0][k].add(s * inv);
                self.acc[1][k].add(s);
                if full {
                    self.acc[2][k].add(s * inv * inv);
                }
            }
            if full {
                self.acc[3][k].add(p * inv * inv);
                self.acc[4][k].add(p * inv);
            }
            p *= l;
        }
    }

    fn get(&self, which: usize) -> [f64; POWERS] {
        std::array::from_fn(|k| self.acc[which][k].value())
    }

    fn row(&self, kind: Kind, abc: Option<(f64, f64, f64)>, n: usize) -> TraceRow {
        let a = self.get(0);
        let b = self.get(1);
        let ln = (n as f64).ln();
        let (l, m): ([f64; 4], [f64; 4]) = match kind {
            Kind::Mobius => (std::array::from_fn(|j| a[j]), std::array::from_fn(|j| b[j])),
            Kind::Lambda => (
                std::array::from_fn(|j| a[j] - a[j + 1] / ln),
                std::array::from_fn(|j| b[j] - b[j + 1] / ln),
            ),
            Kind::Nu => {
                let (ca, cb, cc) = abc.expect("nu traces carry a, b, c");
                let c = self.get(2);
                let d = self.get(3);
                let e = self.get(4);
                (
                    std::array::from_fn(|j| a[j] - (a[j + 1] + ca * c[j + 1] + cb * c[j] + cc * d[j]) / ln),
                    std::array::from_fn(|j| b[j] - (b[j + 1] + ca * a[j + 1] + cb * a[j] + cc * e[j]) / ln),
                )
            }
        };
        TraceRow::new(n, l, m)
    }
}

/// Traces at each grid point, accumulated in one pass over `n`.
pub fn trace_table(kind: Kind, grid: &[usize], abc: Option<(f64, f64, f64)>) -> Result<TraceTable> {
    let Some(&last) = grid.last() else {
        return Err(invalid("empty grid"));
    };
    if grid[0] < 2 {
        return Err(invalid("grid points must be at least 2"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be strictly increasing"));
    }
    let table = mobius_sieve(last)?;
    trace_table_from(&table, kind, grid, abc)
}

pub fn trace_table_from(
    table: &MobiusTable,
    kind: Kind,
    grid: &[usize],
    abc: Option<(f64, f64, f64)>,
) -> Result<TraceTable> {
    if grid.is_empty() || grid[0] < 2 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("grid must be strictly increasing and start at 2 or more"));
    }
    if *grid.last().unwrap() > table.n_max() {
        return Err(invalid("grid extends beyond the sieve bound"));
    }
    if abc.is_some() && kind != Kind::Nu {
        return Err(invalid("a, b, c only apply to the nu coefficients"));
    }
    let abc = match kind {
        Kind::Nu => Some(match abc {
            Some(t) => t,
            None => solve_abc()?,
        }),
        _ => None,
    };
    let full = kind == Kind::Nu;
    let mut sums = BasicSums::default();
    let mut rows = Vec::with_capacity(grid.len());
    let mut next = 0;
    for n in 1..=*grid.last().unwrap() {
        sums.add(n, table.get(n), full);
        if n == grid[next] {
            rows.push(sums.row(kind, abc, n));
            next += 1;
        }
    }
    Ok(TraceTable { kind, abc, rows })
}

/// `L_3(N)/log N - L_2(N) + (1/log N) int_1^N L_2(t) dt/t`, with the
/// integral of the step function taken exactly; zero up to rounding.
pub fn l2l3_residual(coeffs: &CoefficientVector, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(invalid("N must be at least 2"));
    }
    check_range(coeffs, 3, n)?;
    let mut l2 = Accumulator::new();
    let mut l3 = Accumulator::new();
    let mut integral = Accumulator::new();
    for k in 1..=n {
        let kf = k as f64;
        let l = kf.ln();
        let t = coeffs.get(k) * l * l / kf;
        l2.add(t);
        l3.add(t * l);
        if k < n {
            integral.add(l2.value() * (1.0 / kf).ln_1p());
        }
    }
    let ln = (n as f64).ln();
    Ok(l3.value() / ln - l2.value() + integral.value() / ln)
}
