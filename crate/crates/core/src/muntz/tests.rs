use proptest::prelude::*;

use super::rational::{self, DenominatorBatch, BATCH_START};
use super::*;
use crate::constants::{consts, periodic_bernoulli};

mod dd {
    //! Minimal double-double arithmetic, enough to evaluate the defining
    //! sums of `R2` and `V` without cancellation at large arguments.

    #[derive(Clone, Copy, Debug)]
    pub struct Dd(pub f64, pub f64);

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    impl Dd {
        pub fn from(x: f64) -> Self {
            Dd(x, 0.0)
        }
        pub fn add(self, o: Dd) -> Dd {
            let (s, e) = two_sum(self.0, o.0);
            let (t, f) = two_sum(self.1, o.1);
            let (s, e) = two_sum(s, e + t);
            let (s, e) = two_sum(s, e + f);
            Dd(s, e)
        }
        pub fn neg(self) -> Dd {
            Dd(-self.0, -self.1)
        }
        pub fn sub(self, o: Dd) -> Dd {
            self.add(o.neg())
        }
        pub fn mul(self, o: Dd) -> Dd {
            let p = self.0 * o.0;
            let e = self.0.mul_add(o.0, -p);
            let (s, e) = two_sum(p, e + self.0 * o.1 + self.1 * o.0);
            Dd(s, e)
        }
        pub fn scale(self, c: f64) -> Dd {
            self.mul(Dd::from(c))
        }
        pub fn div(self, o: Dd) -> Dd {
            let q1 = self.0 / o.0;
            let r = self.sub(o.scale(q1));
            let q2 = r.0 / o.0;
            let r = r.sub(o.scale(q2));
            let q3 = r.0 / o.0;
            Dd::from(q1).add(Dd::from(q2)).add(Dd::from(q3))
        }
        pub fn parse(s: &str) -> Dd {
            let neg = s.starts_with('-');
            let digits = s.trim_start_matches('-');
            let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
            let mut acc = Dd::from(0.0);
            for c in int.chars().chain(frac.chars()) {
                acc = acc.scale(10.0).add(Dd::from(c.to_digit(10).unwrap() as f64));
            }
            let mut p = Dd::from(1.0);
            for _ in 0..frac.len() {
                p = p.scale(10.0);
            }
            let v = acc.div(p);
            if neg {
                v.neg()
            } else {
                v
            }
        }
        pub fn exp(self) -> Dd {
            let ln2 = Dd(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
            let k = (self.0 / ln2.0).round();
            let r = self.sub(ln2.scale(k)).scale(1.0 / 16.0);
            let mut term = Dd::from(1.0);
            let mut sum = Dd::from(1.0);
            for n in 1..=20 {
                term = term.mul(r).div(Dd::from(n as f64));
                sum = sum.add(term);
            }
            for _ in 0..4 {
                sum = sum.mul(sum);
            }
            sum.scale(2f64.powi(k as i32))
        }
        pub fn ln(self) -> Dd {
            let y = Dd::from(self.0.ln());
            y.add(self.mul(y.neg().exp())).sub(Dd::from(1.0))
        }
    }
}

use dd::Dd;

fn dd_constants() -> (Dd, Dd, Dd) {
    (
        Dd::parse("0.57721566490153286060651209008240243104215933593992"),
        Dd::parse("-0.07281584548367672486058637587490131913773633833441"),
        Dd::parse("1.83787706640934548356065947281123527972279494727556"),
    )
}

/// The defining sum of `R2` in double-double.
fn r2_dd(x: f64) -> f64 {
    let (g, g1, lp) = dd_constants();
    let xd = Dd::from(x);
    let l = xd.ln();
    let half = Dd::from(0.5);
    let mut acc = half.mul(lp).add(Dd::from(1.0)).add(half.mul(l)).div(xd);
    acc = acc.add(Dd::from(2.0).sub(g).mul(l));
    acc = acc.sub(half.mul(l).mul(l));
    acc = acc.add(g.scale(2.0)).add(g1).sub(Dd::from(3.0));
    let mut inner = Dd::from(0.0);
    for ell in 1..=(x.floor() as u64) {
        let e = Dd::from(ell as f64);
        let r = xd.div(e);
        let lr = l.sub(e.ln());
        inner = inner.add(Dd::from(1.0).add(r).mul(lr)).add(Dd::from(2.0).sub(r.scale(2.0)));
    }
    acc.add(inner.div(xd)).0
}

/// The closed form of `V` in double-double.
fn v_dd(x: f64) -> f64 {
    let (g, _, lp) = dd_constants();
    let xd = Dd::from(x);
    let l = xd.ln();
    let n = x.floor() as u64;
    let mut h = Dd::from(0.0);
    let mut logs = Dd::from(0.0);
    for k in 1..=n {
        h = h.add(Dd::from(1.0).div(Dd::from(k as f64)));
        logs = logs.add(Dd::from(k as f64).ln());
    }
    let mut acc = xd.mul(h.sub(l).sub(g).add(Dd::from(2.0)));
    acc = acc.sub(l.scale(0.5)).add(logs);
    acc = acc.sub(Dd::from(n as f64).mul(Dd::from(1.0).add(l)));
    acc.sub(lp.scale(0.5)).sub(Dd::from(0.5)).0
}

#[test]
fn double_double_sanity() {
    let e = Dd::from(1.0).exp();
    assert!((e.0 - std::f64::consts::E).abs() < 1e-15);
    let l = Dd::from(10.0).ln();
    let back = l.exp();
    let d = back.sub(Dd::from(10.0)).0;
    assert!(d.abs() < 1e-29, "{d:e}");
}

#[test]
fn values_at_one() {
    let c = consts();
    assert!((r1(1.0).unwrap() - (c.gamma - 0.5)).abs() < 1e-15);
    assert!((r2(1.0).unwrap() - (c.c1 + c.c2)).abs() < 1e-15);
    assert!((r2(1.0).unwrap() - 0.000_554).abs() < 5e-7);
    assert!((v(1.0).unwrap() - (1.5 - c.gamma - 0.5 * c.log_2pi)).abs() < 1e-15);
}

#[test]
fn r1_small_argument_closed_form() {
    let c = consts();
    for x in [0.01, 0.25, 0.5, 0.999] {
        let want = 0.5 / x + f64::ln(x) + c.gamma - 1.0;
        assert!((r1(x).unwrap() - want).abs() < 1e-14);
    }
}

#[test]
fn r1_matches_definition() {
    let c = consts();
    for x in [1.5, 2.0, 3.25, 7.9, 19.5, 20.5, 123.456] {
        let n = f64::floor(x);
        let h: f64 = (1..=n as u64).map(|k| 1.0 / k as f64).sum();
        let want = x.ln() + c.gamma - h - (x - n - 0.5) / x;
        assert!((r1(x).unwrap() - want).abs() < 1e-13, "{x}");
    }
}

#[test]
fn r1_quadrature_representation() {
    for x in [0.3, 1.0, 2.5, 17.25] {
        let q = r1_via_integral(x, 1e-10).unwrap();
        assert!((q - r1(x).unwrap()).abs() < 1e-9, "{x}");
    }
}

#[test]
fn r1_tail_expansion() {
    // Independent of the production path, which uses the exact closed form.
    for x in [150.3, 1000.7, 54321.9] {
        let e = expansions().r1.eval(x);
        let d = r1(x).unwrap() - e;
        assert!(d.abs() < 1e-15 * r1(x).unwrap().abs() + 1e-30, "{x} {d}");
    }
}

#[test]
fn r2_expansion_matches_defining_sum() {
    for x in [12.0, 20.5, 100.3, 1000.7, 12345.6, 30000.5] {
        let reference = r2_dd(x);
        let got = r2(x).unwrap();
        let rel = (got - reference).abs() / reference.abs();
        assert!(rel < 1e-6, "{x}: {got:e} vs {reference:e}");
    }
    let x = 500.75;
    assert!((r2_direct(x).unwrap() - r2(x).unwrap()).abs() < 1e-12);
}

#[test]
fn r2_tail_constant() {
    // |R2(x) + B4({x})/(24 x^4)| <= C x^-5 with the constant fitted here.
    let mut c_fit = 0.0f64;
    for i in 0..12 {
        let x = 100.0 * 10f64.powf(i as f64 / 4.0) + 0.37;
        let reference = r2_dd(x);
        let resid = reference + periodic_bernoulli(4, x) / (24.0 * x.powi(4));
        c_fit = c_fit.max(resid.abs() * x.powi(5));
    }
    assert!(c_fit < 50.0, "{c_fit}");
}

#[test]
fn v_expansion_matches_closed_form() {
    for x in [12.0, 30.5, 250.25, 5000.125] {
        let reference = v_dd(x);
        let got = v(x).unwrap();
        assert!((got - reference).abs() < 1e-9 * reference.abs(), "{x}");
    }
}

#[test]
fn continuity_at_integers() {
    for n in [1.0, 2.0, 5.0, 11.0, 12.0, 13.0, 100.0] {
        let lo = n * (1.0 - 4.0 * f64::EPSILON);
        let hi = n * (1.0 + 4.0 * f64::EPSILON);
        assert!((r1(lo).unwrap() - r1(hi).unwrap()).abs() < 1e-10, "r1 {n}");
        assert!((r2(lo).unwrap() - r2(hi).unwrap()).abs() < 1e-10, "r2 {n}");
        assert!((v(lo).unwrap() - v(hi).unwrap()).abs() < 1e-10, "v {n}");
    }
}

#[test]
fn derivative_relations() {
    // V' = -R1 and R2' = V / x^2, checked by central differences.
    for x in [0.6, 1.5, 3.3, 8.7, 15.2, 40.4] {
        let h = 1e-5 * x;
        let dv = (v(x + h).unwrap() - v(x - h).unwrap()) / (2.0 * h);
        assert!((dv + r1(x).unwrap()).abs() < 1e-8, "{x}");
        let dr2 = (r2(x + h).unwrap() - r2(x - h).unwrap()) / (2.0 * h);
        assert!((dr2 - v(x).unwrap() / (x * x)).abs() < 1e-8, "{x}");
    }
}

#[test]
fn envelopes() {
    for i in 0..2000 {
        let y = TAIL_CROSSOVER + i as f64 * 0.0731;
        assert!(r2(y).unwrap().abs() * y.powi(4) <= R2_ENVELOPE);
        assert!(v(y).unwrap().abs() * y * y <= integrals::V_ENVELOPE);
        let r = r1(y).unwrap().abs();
        assert!(r <= 1.0 / (12.0 * y * y) + 0.033 / y.powi(3));
    }
}

#[test]
fn series_at_one() {
    let c = consts();
    let e = s1(1.0, 1e-12).unwrap();
    assert!((e.value - 0.5 * (c.log_2pi - c.gamma - 1.0)).abs() < 1e-12);
    assert!((e.value - 0.130_331).abs() < 5e-7);
    let e2 = s2(1.0, 1e-12).unwrap();
    assert!((e2.value - 0.000_643).abs() < 5e-7);
    assert!(e.tail_bound <= 1e-12 && e2.tail_bound <= 1e-12);
}

#[test]
fn integer_argument_against_oversummation() {
    // Ten times as many terms, plus the same majorant, must bracket the value.
    let x = 4.0;
    let e = s1_general(x, 1e-7).unwrap();
    let mut big = crate::summation::Accumulator::new();
    for k in 1..=10 * e.terms {
        big.add(r1(k as f64 * x).unwrap());
    }
    assert!((e.value - big.value()).abs() <= e.tail_bound);
    let exact = s1(x, 1e-12).unwrap();
    assert!((exact.value - big.value()).abs() <= s1_majorant(x, 10.0 * e.terms as f64));
}

#[test]
fn general_and_rational_paths_agree() {
    for &(a, b) in &[(1u64, 3u64), (2, 3), (3, 2), (5, 7), (13, 4), (1, 1), (7, 1)] {
        let x = a as f64 / b as f64;
        let r = rational::series(Order::One, a, b);
        let g = s1_general(x, 1e-7).unwrap();
        assert!((r.value - g.value).abs() <= g.tail_bound + r.tail_bound, "{a}/{b}");
        let r2v = rational::series(Order::Two, a, b);
        let g2 = s2_general(x, 1e-12).unwrap();
        assert!((r2v.value - g2.value).abs() <= g2.tail_bound + r2v.tail_bound, "{a}/{b}");
    }
}

#[test]
fn small_argument_general_path() {
    // x < 1 uses the Euler-Maclaurin tail with kink control.
    for x in [0.37, 0.05] {
        let g = s1_general(x, 1e-6).unwrap();
        let (a, b) = small_rational(x).unwrap();
        let r = rational::series(Order::One, a, b);
        assert!((g.value - r.value).abs() <= g.tail_bound, "{x}");
    }
}

#[test]
fn batch_matches_single() {
    for order in [Order::One, Order::Two] {
        for b in [1u64, 2, 7, 30] {
            let batch = DenominatorBatch::new(order, b);
            for a in BATCH_START..BATCH_START + 25 {
                if rational::gcd(a, b) != 1 {
                    continue;
                }
                let single = rational::series(order, a, b).value;
                let d = batch.series(a) - single;
                assert!(d.abs() < 1e-15 * (1.0 + single.abs()) + 1e-17, "{order:?} {a}/{b} {d:e}");
            }
        }
    }
}

#[test]
fn tail_after_is_consistent() {
    for &(a, b) in &[(3u64, 7u64), (11, 2), (1, 5)] {
        let x = a as f64 / b as f64;
        for k0 in [0u64, 5, 40, 333] {
            let mut head = crate::summation::Accumulator::new();
            for k in 1..=k0 {
                head.add(r1(k as f64 * x).unwrap());
            }
            let total = head.value() + rational::tail_after(Order::One, a, b, k0);
            let want = rational::series(Order::One, a, b).value;
            assert!((total - want).abs() < 1e-14, "{a}/{b} {k0}");
        }
    }
}

#[test]
fn rational_detection() {
    assert_eq!(small_rational(0.75), Some((3, 4)));
    assert_eq!(small_rational(1.0 / 3.0), Some((1, 3)));
    assert_eq!(small_rational(7.0), Some((7, 1)));
    assert_eq!(small_rational(1e-4), Some((1, 10_000)));
    assert_eq!(small_rational(std::f64::consts::E), None);
    assert_eq!(small_rational(2f64.sqrt()), None);
}

#[test]
fn series_rejects_bad_input() {
    assert!(s1(0.0, 1e-6).is_err());
    assert!(s1(-1.0, 1e-6).is_err());
    assert!(s1(1.0, 0.0).is_err());
    assert!(matches!(s1_general(2f64.sqrt(), 1e-12), Err(Error::ResourceLimit(_))));
}

#[test]
fn reciprocity_examples() {
    for r in [0.5f64, 2.0, 3.0, 0.7, 2f64.sqrt()] {
        for order in [Order::One, Order::Two] {
            let e = reciprocity_residual(order, r, 1e-7).unwrap();
            assert!(e.value.abs() <= 2.0 * e.tail_bound, "{order:?} {r} {e:?}");
        }
    }
}

#[test]
fn boundary_behaviour_small_argument() {
    let c = consts();
    let mut prev1 = f64::INFINITY;
    let mut prev2 = f64::INFINITY;
    for x in [1e-2, 1e-3, 1e-4] {
        let l = f64::ln(x).abs();
        let d1 = (x * s1(x, 1e-9).unwrap().value - (0.5 * l - c.k)).abs();
        let d2 = (x * s2(x, 1e-9).unwrap().value - (-0.25 * l * l + c.k1 * l - c.k2)).abs();
        assert!(d1 < prev1 && d2 < prev2, "{x}: {d1:e} {d2:e}");
        prev1 = d1;
        prev2 = d2;
    }
}

#[test]
fn phi_partial_and_fourier() {
    let x = 2f64.sqrt();
    let a = phi1_partial(x, 10_000);
    let b = phi1_fourier(x, 200_000);
    assert!((a - b).abs() < 1e-2, "{a} {b}");
}

#[test]
fn phi_integral_oracle() {
    for r in [1.0, 2.0, 0.8, 1.0 / 3.0, 0.5] {
        let q = s1_via_phi_integral(r, 1e-4).unwrap();
        let s = s1(r, 1e-12).unwrap().value;
        assert!((q - s).abs() < 1e-4, "{r}: {q} {s}");
    }
    assert!(matches!(s1_via_phi_integral(0.5, 1e-8), Err(Error::ResourceLimit(_))));
}

#[test]
fn floor_integral_oracle() {
    for r in [1.0, 2.0, 0.5, 1.5, 1.0 / 3.0, std::f64::consts::E] {
        let q = s1_via_floor_integral(r, 1e-6).unwrap();
        let s = s1(r, 1e-9).unwrap().value;
        assert!((q - s).abs() < 1e-6, "{r}: {q} {s}");
    }
}

#[test]
fn s2_from_s1_integral() {
    for r in [1.0, 2.0, 0.5] {
        let q = s2_via_s1_integral(r, 1e-5).unwrap();
        let s = s2(r, 1e-12).unwrap().value;
        assert!((q - s).abs() < 1e-5, "{r}: {q} {s}");
    }
}

#[test]
fn v_series_identity_at_one() {
    let c = consts();
    let lhs = v_series_integral(1.0, 1e-12).unwrap().value;
    let rhs = 0.5 * (c.k2 - 2.0 * c.k1 - s2(1.0, 1e-13).unwrap().value);
    assert!((lhs - rhs).abs() < 1e-10, "{lhs} {rhs}");
}

#[test]
fn trigamma_values() {
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((integrals::trigamma_for_tests(1.0) - pi2 / 6.0).abs() < 1e-14);
    assert!((integrals::trigamma_for_tests(1.5) - (pi2 / 2.0 - 4.0)).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn r1_continuous_across_integers(n in 1u32..5000) {
        let n = n as f64;
        let lo = r1(n * (1.0 - 2.0 * f64::EPSILON)).unwrap();
        let hi = r1(n).unwrap();
        prop_assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn r2_continuous_across_integers(n in 1u32..5000) {
        let n = n as f64;
        let lo = r2(n * (1.0 - 2.0 * f64::EPSILON)).unwrap();
        let hi = r2(n).unwrap();
        prop_assert!((lo - hi).abs() < 1e-10);
    }

    #[test]
    fn rational_reciprocity(a in 1u64..60, b in 1u64..60) {
        let r = a as f64 / b as f64;
        for order in [Order::One, Order::Two] {
            let e = reciprocity_residual(order, r, 1e-10).unwrap();
            prop_assert!(e.value.abs() <= 2.0 * e.tail_bound.max(1e-13), "{:?} {} {:?}", order, r, e);
        }
    }

    #[test]
    fn batch_agrees_with_single(a in 40u64..400, b in 1u64..120) {
        prop_assume!(rational::gcd(a, b) == 1);
        let batch = DenominatorBatch::new(Order::One, b);
        let single = rational::series(Order::One, a, b).value;
        let d = batch.series(a) - single;
        prop_assert!(d.abs() < 1e-14, "{:e} {:e}", d, single);
    }
}
