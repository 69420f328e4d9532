use proptest::prelude::*;

use super::*;
use crate::arith::coefficients;
use crate::gram::kernel;
use crate::muntz::{rational, remainder};

const ORDERS: [Order; 2] = [Order::One, Order::Two];
const KINDS: [Kind; 3] = [Kind::Mobius, Kind::Lambda, Kind::Nu];

/// `sum_n a_n S_q(n/m)` term by term from the exact rational series.
fn brute_convolved(c: &CoefficientVector, order: Order, m: usize) -> f64 {
    (1..=c.n_cap).map(|n| c.get(n) * rational::series(order, n as u64, m as u64).value).sum()
}

fn brute_e(c: &CoefficientVector, order: Order) -> f64 {
    (1..=c.n_cap)
        .map(|m| {
            let mf = m as f64;
            c.get(m) / mf * (brute_convolved(c, order, m) - remainder(order, 1.0 / mf).unwrap())
        })
        .sum()
}

fn one() -> CoefficientVector {
    CoefficientVector::from_values(vec![1.0])
}

#[test]
fn target_products() {
    let g = consts().gamma;
    assert!((f_term(1, Order::One) - (g - 1.0)).abs() < 1e-15);
    assert!((f_term(1, Order::Two) - consts().c1).abs() < 1e-15);
    let l = 6f64.ln();
    assert!((f_term(6, Order::One) - (g - 1.0 - l) / 6.0).abs() < 1e-15);
    let lam = coefficients(Kind::Lambda, 10, None).unwrap();
    assert!((mixed_sum(&one(), Order::One, 1).unwrap() - (g - 1.0)).abs() < 1e-15);
    let direct: f64 = (1..=10).map(|n| lam.get(n) * f_term(n, Order::Two)).sum();
    assert!((mixed_sum(&lam, Order::Two, 10).unwrap() - direct).abs() < 1e-14);
    assert!(mixed_sum(&lam, Order::One, 11).is_err());
}

/// The mixed term tends to `q` as the distance closes.
#[test]
fn mixed_sum_settles() {
    let gaps: Vec<f64> = [100, 10_000, 1_000_000]
        .iter()
        .map(|&n| {
            let c = coefficients(Kind::Lambda, n, None).unwrap();
            (mixed_sum(&c, Order::One, n).unwrap() - 1.0).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]) && gaps[2] < 0.15, "{gaps:?}");
}

#[test]
fn convolved_matches_brute_force() {
    let s1 = rational::series(Order::One, 1, 1).value;
    assert!((s1 - 0.130_331).abs() < 1e-6);
    let c = one();
    assert!((s_convolved(&c, Order::One, 1, 1e-10).unwrap().value - s1).abs() < 1e-13);
    for order in ORDERS {
        for kind in KINDS {
            for n in [2, 7, 30, 50] {
                let c = coefficients(kind, n, None).unwrap();
                for m in [1, 2, 3, 6, 10] {
                    let got = s_convolved(&c, order, m, 1e-10).unwrap().value;
                    let want = brute_convolved(&c, order, m);
                    assert!((got - want).abs() < 1e-11, "{order:?} {kind:?} {n} {m} {got} {want}");
                }
            }
        }
    }
    assert!(s_convolved(&c, Order::One, 0, 1e-10).is_err());
    assert!(s_convolved(&c, Order::One, 1, 0.0).is_err());
    assert!(matches!(s_convolved(&c, Order::One, 1, 1e-20), Err(crate::Error::ResourceLimit(_))));
}

#[test]
fn inversion_error() {
    for order in ORDERS {
        let e = e_term(&one(), order, 1, 1e-10).unwrap();
        let want = rational::series(order, 1, 1).value - remainder(order, 1.0).unwrap();
        assert!((e - want).abs() < 1e-13);
    }
    assert!((e_term(&one(), Order::One, 1, 1e-10).unwrap() - (0.130_331 - consts().gamma + 0.5)).abs() < 1e-6);
    for (kind, order, n) in [(Kind::Mobius, Order::One, 100), (Kind::Nu, Order::Two, 50), (Kind::Lambda, Order::One, 40)] {
        let c = coefficients(kind, n, None).unwrap();
        let e = e_term(&c, order, n, 1e-11).unwrap();
        let b = brute_e(&c, order);
        assert!((e - b).abs() < 1e-10, "{kind:?} {order:?} {e} {b}");
    }
}

#[test]
fn direct_form_small_cases() {
    let q1 = q_form_direct(&one(), Order::One, 1).unwrap();
    assert!((q1 - 1.260_661).abs() < 1e-6);
    assert!((q1 - (consts().log_2pi - consts().gamma)).abs() < 1e-12);
    let mu = coefficients(Kind::Mobius, 2, None).unwrap();
    for order in ORDERS {
        let g = |u: f64, v: f64| kernel(order, u, v, 1e-12).unwrap();
        let want = g(1.0, 1.0) - 2.0 * g(1.0, 2.0) + g(2.0, 2.0);
        let got = q_form_direct(&mu, order, 2).unwrap();
        assert!((got - want).abs() < 1e-10, "{order:?} {got} {want}");
    }
}

#[test]
fn decomposition_matches_direct() {
    for order in ORDERS {
        for kind in KINDS {
            for n in [2, 10, 100, 500] {
                let c = coefficients(kind, n, None).unwrap();
                let d = q_form_direct(&c, order, n).unwrap();
                let e = q_form_decomposed(&c, order, n, 1e-10).unwrap();
                assert!((d - e).abs() < 1e-8, "{order:?} {kind:?} {n} {d} {e}");
            }
        }
        let d = q_form_direct(&one(), order, 1).unwrap();
        let e = q_form_decomposed(&one(), order, 1, 1e-10).unwrap();
        assert!((d - e).abs() < 1e-10);
    }
}

#[test]
fn streamed_bins_match_matrix() {
    let n = 300;
    let c = coefficients(Kind::Nu, n, None).unwrap();
    for order in ORDERS {
        let fam = Family { alpha: c.values.clone(), beta: vec![0.0; n] };
        let bins = pair_bins(order, n, std::slice::from_ref(&fam));
        let streamed: f64 = bins[0].aa.iter().map(|a| a.value()).sum();
        let d = q_form_direct(&c, order, n).unwrap();
        assert!((streamed - d).abs() < 1e-10, "{order:?} {streamed} {d}");
    }
}

#[test]
fn products_of_centered_terms() {
    let c = coefficients(Kind::Mobius, 1000, None).unwrap();
    let l = |j| l_term(&c, j, 1000).unwrap();
    let m = |j| m_term(&c, j, 1000).unwrap();
    let k = consts();
    let p = p_terms(&c, Order::One, 1000).unwrap();
    assert_eq!(p.len(), 3);
    assert!((p[0] - m(0) * (l(0) + 0.5 * (l(1) + 1.0))).abs() < 1e-14);
    assert!((p[1] - m(1) * l(0)).abs() < 1e-12);
    assert!((p[2] - p[0] - p[1]).abs() < 1e-15);
    let p = p_terms(&c, Order::Two, 1000).unwrap();
    assert_eq!(p.len(), 4);
    assert!((p[1] - m(1) * (2.0 * k.k1 * l(0) + l(1) + 1.0)).abs() < 1e-12);
    assert!((p[2] - m(2) * l(0)).abs() < 1e-12);
}

#[test]
fn squared_distance() {
    let g = consts().gamma;
    let r = d_squared(&one(), Order::One, 1, 1e-10).unwrap();
    assert!((r.d_squared - (3.0 - 3.0 * g + consts().log_2pi)).abs() < 1e-12);
    assert_eq!((r.q, r.n), (1, 1));
    for order in ORDERS {
        for kind in KINDS {
            let c = coefficients(kind, 200, None).unwrap();
            for n in [2, 50, 200] {
                let r = d_squared(&c, order, n, 1e-10).unwrap();
                assert!(r.d_squared >= -1e-9, "{kind:?} {n} {}", r.d_squared);
                assert!((r.q_direct - r.q_decomposed).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn sweep_matches_pointwise() {
    let grid = [2, 5, 40, 120];
    for order in ORDERS {
        let rows = d_squared_sweep(order, &grid, &KINDS, None).unwrap();
        assert_eq!(rows.len(), grid.len());
        for row in &rows {
            for (i, &kind) in KINDS.iter().enumerate() {
                let c = coefficients(kind, row.n, None).unwrap();
                let want = order.index() as f64 - 2.0 * mixed_sum(&c, order, row.n).unwrap()
                    + q_form_direct(&c, order, row.n).unwrap();
                assert!((row.d_squared[i] - want).abs() < 1e-10, "{order:?} {kind:?} {} {want}", row.n);
            }
        }
    }
    assert!(d_squared_sweep(Order::One, &[], &KINDS, None).is_err());
    assert!(d_squared_sweep(Order::One, &[5, 3], &KINDS, None).is_err());
    assert!(d_squared_sweep(Order::One, &[1, 3], &KINDS, None).is_err());
}

/// Each value sits below the mean of the previous five, except for the
/// second-order curve of the modified coefficients, which fluctuates.
#[test]
fn distances_decrease_on_average() {
    let grid: Vec<usize> = (400..=1200).step_by(100).collect();
    for (order, kinds) in [(Order::One, vec![Kind::Lambda, Kind::Nu]), (Order::Two, vec![Kind::Lambda])] {
        let rows = d_squared_sweep(order, &grid, &kinds, None).unwrap();
        for i in 0..kinds.len() {
            for w in rows.windows(6) {
                let mean = w[..5].iter().map(|r| r.d_squared[i]).sum::<f64>() / 5.0;
                assert!(w[5].d_squared[i] < mean, "{order:?} {:?} {}", kinds[i], w[5].n);
            }
        }
    }
}

#[test]
fn line_integral_bounds_distance() {
    let d1 = d_squared(&one(), Order::One, 1, 1e-10).unwrap().d_squared;
    let t = d_via_line_integral(&one(), Order::One, 1, 200.0, 1e-8).unwrap();
    assert!(t <= d1 && t > 0.9 * d1, "{t} {d1}");
    let d2 = d_squared(&one(), Order::Two, 1, 1e-10).unwrap().d_squared;
    let t = d_via_line_integral(&one(), Order::Two, 1, 100.0, 1e-9).unwrap();
    assert!(t <= d2 && t > 0.98 * d2, "{t} {d2}");
    let c = coefficients(Kind::Mobius, 10, None).unwrap();
    let d = d_squared(&c, Order::Two, 10, 1e-10).unwrap().d_squared;
    let t = d_via_line_integral(&c, Order::Two, 10, 200.0, 1e-9).unwrap();
    assert!(t <= d && t > 0.95 * d, "{t} {d}");
    assert!(d_via_line_integral(&one(), Order::One, 1, 2e4, 1e-8).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn arbitrary_coefficients_decompose(values in prop::collection::vec(-2.0f64..2.0, 1..40), q in 1u8..=2) {
        let order = Order::try_from(q).unwrap();
        let n = values.len();
        let c = CoefficientVector::from_values(values);
        let d = q_form_direct(&c, order, n).unwrap();
        let e = q_form_decomposed(&c, order, n, 1e-10).unwrap();
        prop_assert!((d - e).abs() < 1e-8 * (1.0 + d.abs()), "{d} {e}");
        prop_assert!(d >= -1e-10);
        let r = d_squared(&c, order, n, 1e-10).unwrap();
        prop_assert!(r.d_squared >= -1e-9);
    }
}
