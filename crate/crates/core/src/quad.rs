//! Adaptive Gauss-Kronrod quadrature on piecewise smooth integrands.

use crate::error::{resource, Result};
use crate::summation::Accumulator;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_663_992_797_626_878_299_4, 0.236_926_885_056_189_087_514_264_040_719_9),
    (-0.538_469_310_105_683_091_036_314_420_700_2, 0.478_628_670_499_366_468_041_291_514_835_6),
    (0.0, 0.568_888_888_888_888_888_888_888_888_888_9),
    (0.538_469_310_105_683_091_036_314_420_700_2, 0.478_628_670_499_366_468_041_291_514_835_6),
    (0.906_179_845_938_663_992_797_626_878_299_4, 0.236_926_885_056_189_087_514_264_040_719_9),
];

const MAX_PANELS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrate a smooth `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let mut panels = 0usize;
    let mut value = Accumulator::new();
    let mut error = 0.0;
    adapt(&mut f, a, b, tol, &mut panels, &mut value, &mut error)?;
    Ok(QuadResult { value: value.value(), error })
}

/// Integrate over consecutive pieces `[p_i, p_{i+1}]`, each assumed smooth.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: f64) -> Result<QuadResult> {
    let mut panels = 0usize;
    let mut value = Accumulator::new();
    let mut error = 0.0;
    let n = points.len().saturating_sub(1).max(1) as f64;
    for w in points.windows(2) {
        if w[1] > w[0] {
            adapt(&mut f, w[0], w[1], tol / n, &mut panels, &mut value, &mut error)?;
        }
    }
    Ok(QuadResult { value: value.value(), error })
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    panels: &mut usize,
    value: &mut Accumulator,
    error: &mut f64,
) -> Result<()> {
    let mut stack = vec![(a, b, tol)];
    while let Some((lo, hi, t)) = stack.pop() {
        *panels += 1;
        if *panels > MAX_PANELS {
            return Err(resource(format!("quadrature exceeded {MAX_PANELS} panels")));
        }
        let (v, e) = kronrod(f, lo, hi);
        let mid = 0.5 * (lo + hi);
        if e <= t.max(1e-15 * v.abs()) || mid <= lo || mid >= hi {
            value.add(v);
            *error += e;
        } else {
            stack.push((lo, mid, 0.5 * t));
            stack.push((mid, hi, 0.5 * t));
        }
    }
    Ok(())
}

/// Fixed five-point Gauss-Legendre rule, exact for polynomials of degree nine.
#[inline]
pub fn gauss5<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    GL5.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
