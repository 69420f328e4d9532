use std::path::PathBuf;

use nbgram::arith::{coefficients_from, mobius_sieve, solve_abc, trace_table, CoefficientVector, Kind, TRACE_HEADER};
use nbgram::constants::consts;
use nbgram::gram::{g1, g2, gram_matrix, kernel as gram_kernel};
use nbgram::muntz::{remainder, s1, s2, series as muntz_series};
use nbgram::quadform::{d_squared, d_squared_sweep, p_from_sums, QuadFormReport};
use nbgram::verify::{self, Options, Suite};
use nbgram::{Error, Order};

use crate::grid::Grid;
use crate::table::{Cell, Table};
use crate::Failure;

type Out = Result<Table, Failure>;

fn order(q: u8) -> Order {
    Order::try_from(q).expect("clap restricts q to 1 or 2")
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Mobius => "mobius",
        Kind::Lambda => "lambda",
        Kind::Nu => "nu",
    }
}

pub fn constants(tol: f64) -> Out {
    let c = consts();
    let (a, b, cc) = solve_abc()?;
    let six_over_pi2 = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let tol = tol.min(1e-10);
    let rows: Vec<(&str, f64, Option<f64>)> = vec![
        ("gamma", c.gamma, None),
        ("gamma1", c.gamma1, None),
        ("K", c.k, None),
        ("K1", c.k1, None),
        ("K2", c.k2, None),
        ("K1-K-1/2", c.k1 - c.k - 0.5, Some(0.0)),
        ("eta0", c.eta[0], Some(six_over_pi2)),
        ("eta1", c.eta[1], None),
        ("eta2", c.eta[2], None),
        ("eta3", c.eta[3], None),
        ("a", a, Some(-2.116_586)),
        ("b", b, Some(-0.407_487)),
        ("c", cc, Some(0.312_679)),
        ("R1(1)", remainder(Order::One, 1.0)?, None),
        ("R2(1)", remainder(Order::Two, 1.0)?, Some(0.000_554)),
        ("S1(1)", s1(1.0, tol)?.value, Some(0.130_331)),
        ("S2(1)", s2(1.0, tol)?.value, Some(0.000_643)),
        ("G1_11", g1(1.0, 1.0, tol)?, Some(1.260_661)),
        ("G2_11", g2(1.0, 1.0, tol)?, Some(3.270_465)),
    ];
    let mut t = Table::new(&["name", "computed", "reference", "delta"]);
    for (name, value, reference) in rows {
        t.push(vec![name.into(), value.into(), reference.into(), reference.map(|r| value - r).into()]);
    }
    Ok(t)
}

pub fn kernel(q: u8, uv: Option<(f64, f64)>, n_max: Option<usize>, tol: f64) -> Out {
    match (uv, n_max) {
        (Some((u, v)), None) => {
            let mut t = Table::new(&["q", "u", "v", "G"]);
            t.push(vec![q.into(), u.into(), v.into(), gram_kernel(order(q), u, v, tol)?.into()]);
            Ok(t)
        }
        (None, Some(n)) => {
            let g = gram_matrix(order(q), n)?;
            let mut t = Table::new(&["m", "n", "G"]);
            for i in 1..=n {
                for j in 1..=n {
                    t.push(vec![i.into(), j.into(), g.get(i, j).into()]);
                }
            }
            Ok(t)
        }
        _ => Err(Failure::Usage("kernel needs either --u and --v, or --n-max".into())),
    }
}

pub fn series(grid: &Grid, tol: f64) -> Out {
    let mut t = Table::new(&["x", "S1", "S1_tail", "S2", "S2_tail"]);
    for x in grid.points() {
        let a = muntz_series(Order::One, x, tol)?;
        let b = muntz_series(Order::Two, x, tol)?;
        t.push(vec![x.into(), a.value.into(), a.tail_bound.into(), b.value.into(), b.tail_bound.into()]);
    }
    Ok(t)
}

fn n_grid(grid: &Grid) -> Result<Vec<usize>, Failure> {
    grid.integers(2).map_err(Failure::Usage)
}

pub fn traces(kind: Kind, grid: &Grid) -> Out {
    let table = trace_table(kind, &n_grid(grid)?, None)?;
    let mut t = Table::new(&TRACE_HEADER);
    for row in &table.rows {
        let mut cells: Vec<Cell> = vec![row.n.into()];
        cells.extend(row.record()[1..].iter().map(|&x| Cell::from(x)));
        t.push(cells);
    }
    Ok(t)
}

pub fn quadform(kind: Kind, q: u8, ns: &[usize], tol: f64) -> Out {
    let order = order(q);
    let mut header: Vec<String> = QuadFormReport::HEADER[..8].iter().map(|s| s.to_string()).collect();
    header.extend((0..q as usize + 1).map(|j| format!("P{j}")));
    header.push("P_sum".into());
    let mut t = Table::new(&header);
    let last = *ns.last().ok_or_else(|| Failure::Usage("empty grid".into()))?;
    let sieve = mobius_sieve(last.max(2))?;
    for &n in ns {
        let c = if n == 1 {
            CoefficientVector { kind, ..CoefficientVector::from_values(vec![1.0]) }
        } else {
            coefficients_from(&sieve, kind, n, None)?
        };
        let r = d_squared(&c, order, n, tol)?;
        let mut cells: Vec<Cell> = vec![
            r.q.into(),
            r.n.into(),
            kind_name(kind).into(),
            r.q_direct.into(),
            r.q_decomposed.into(),
            r.e_term.into(),
            r.mixed.into(),
            r.d_squared.into(),
        ];
        cells.extend(r.p_terms.iter().map(|&p| Cell::from(p)));
        t.push(cells);
    }
    Ok(t)
}

/// Largest `N` the distance figure computes before truncating its grid.
pub const FIGURE5_LIMIT: usize = 6000;

pub fn figure(which: u8, grid: Option<Grid>, tol: f64) -> Out {
    let default = |a: f64, b: f64, h: f64| grid.clone().unwrap_or(Grid::arithmetic(a, b, h));
    match which {
        1 => figure1(&default(0.25, 4.0, 1.0 / 64.0), tol),
        2 | 3 => figure23(which, &default(1e4, 1e7, 500.0)),
        4 => figure4(&default(1e4, 1e7, 500.0)),
        _ => figure5(&default(400.0, 4000.0, 100.0)),
    }
}

fn figure1(grid: &Grid, tol: f64) -> Out {
    let mut t = Table::new(&["x", "R1", "S1", "R2", "S2"]);
    for x in grid.points() {
        t.push(vec![
            x.into(),
            remainder(Order::One, x)?.into(),
            muntz_series(Order::One, x, tol)?.value.into(),
            remainder(Order::Two, x)?.into(),
            muntz_series(Order::Two, x, tol)?.value.into(),
        ]);
    }
    Ok(t)
}

/// Rescaled traces, or their successive differences.
fn figure23(which: u8, grid: &Grid) -> Out {
    let table = trace_table(Kind::Mobius, &n_grid(grid)?, None)?;
    let names: [&str; 6] = if which == 2 {
        ["Ltil0", "Ltil1", "Ltil2", "Mtil0", "Mtil1", "Mtil2"]
    } else {
        ["dLtil0", "dLtil1", "dLtil2", "dMtil0", "dMtil1", "dMtil2"]
    };
    let mut t = Table::new(&[&["N"], &names[..]].concat());
    for r in &table.rows {
        let ln = (r.n as f64).ln();
        let mut cells: Vec<Cell> = vec![r.n.into()];
        if which == 2 {
            cells.extend(r.ltil.iter().chain(&r.mtil).map(|&x| Cell::from(x)));
        } else {
            let scale = |j: usize| ln.powi(j as i32);
            cells.extend((0..3).map(|j| Cell::from(r.dlbar[j] / scale(j))));
            cells.extend((0..3).map(|j| Cell::from(r.dm[j] / scale(j))));
        }
        t.push(cells);
    }
    Ok(t)
}

fn figure4(grid: &Grid) -> Out {
    let table = trace_table(Kind::Nu, &n_grid(grid)?, None)?;
    let mut t = Table::new(&["N", "q1_P0", "q1_P1", "q1_sum", "q2_P0", "q2_P1", "q2_P2", "q2_sum"]);
    for r in &table.rows {
        let l = [r.l[0], r.l[1], r.l[2]];
        let m = [r.m[0], r.m[1], r.m[2]];
        let mut cells: Vec<Cell> = vec![r.n.into()];
        for order in [Order::One, Order::Two] {
            cells.extend(p_from_sums(order, l, m).into_iter().map(Cell::from));
        }
        t.push(cells);
    }
    Ok(t)
}

/// Distances scaled by `sqrt(log N)` for the first order and `log N` for the
/// second.
fn figure5(grid: &Grid) -> Out {
    let mut ns = n_grid(grid)?;
    if ns.last().is_some_and(|&n| n > FIGURE5_LIMIT) {
        let dropped = ns.iter().filter(|&&n| n > FIGURE5_LIMIT).count();
        ns.retain(|&n| n <= FIGURE5_LIMIT);
        eprintln!(
            "warning: {}; dropped {dropped} grid points above N = {FIGURE5_LIMIT}",
            Error::ResourceLimit("distance sweep over budget".into())
        );
        if ns.is_empty() {
            return Err(Error::ResourceLimit(format!("no grid points at or below N = {FIGURE5_LIMIT}")).into());
        }
    }
    let kinds = [Kind::Lambda, Kind::Nu];
    let one = d_squared_sweep(Order::One, &ns, &kinds, None)?;
    let two = d_squared_sweep(Order::Two, &ns, &kinds, None)?;
    let mut t = Table::new(&["N", "d1_sqrtlog_lambda", "d1_sqrtlog_nu", "d2_log_lambda", "d2_log_nu"]);
    for (a, b) in one.iter().zip(&two) {
        let ln = (a.n as f64).ln();
        let d = |x: f64| x.max(0.0).sqrt();
        t.push(vec![
            a.n.into(),
            (d(a.d_squared[0]) * ln.sqrt()).into(),
            (d(a.d_squared[1]) * ln.sqrt()).into(),
            (d(b.d_squared[0]) * ln).into(),
            (d(b.d_squared[1]) * ln).into(),
        ]);
    }
    Ok(t)
}

/// The check report, with timings and warnings on standard error so the
/// table itself stays reproducible.
pub fn verify(suite: Suite, zeros: Option<PathBuf>, only: &[u8]) -> (Table, bool) {
    let opts = Options { suite, zeros };
    let ids: Vec<u8> = if only.is_empty() { (1..=13).collect() } else { only.to_vec() };
    let mut t = Table::new(&["id", "title", "status", "detail", "warnings"]);
    let mut passed = true;
    for id in ids {
        let c = verify::criterion(id, &opts);
        eprintln!("criterion {:>2} {} {:>8.2} s  {}", c.id, c.status(), c.seconds, c.title);
        for w in &c.warnings {
            eprintln!("warning: criterion {}: {w}", c.id);
        }
        passed &= c.passed;
        t.push(vec![c.id.into(), c.title.into(), c.status().into(), c.detail.clone().into(), c.warnings.join("; ").into()]);
    }
    (t, passed)
}
