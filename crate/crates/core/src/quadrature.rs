//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.

#![allow(clippy::excessive_precision)]

use crate::linalg::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_9,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

const MAX_DEPTH: u32 = 40;

fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let k = kronrod * half;
    let g = gauss * half;
    (k, (k - g).norm())
}

fn adapt<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64, whole: C64, err: f64, tol: f64, depth: u32) -> C64 {
    if err <= tol || depth >= MAX_DEPTH || (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
        return whole;
    }
    let mid = 0.5 * (a + b);
    let (l, el) = gk15(f, a, mid);
    let (r, er) = gk15(f, mid, b);
    adapt(f, a, mid, l, el, 0.5 * tol, depth + 1) + adapt(f, mid, b, r, er, 0.5 * tol, depth + 1)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, tol: f64) -> C64 {
    if a == b {
        return C64::new(0.0, 0.0);
    }
    if b < a {
        return -integrate(f, b, a, tol);
    }
    let (whole, err) = gk15(&f, a, b);
    adapt(&f, a, b, whole, err, tol, 0)
}

/// Integrates over `[a, b]` splitting at the given interior breakpoints.
pub fn integrate_with_breaks<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> C64 {
    let mut points = vec![a];
    let mut inner: Vec<f64> = breaks.iter().cloned().filter(|&p| p > a && p < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    inner.dedup();
    points.extend(inner);
    points.push(b);
    let share = tol / (points.len() - 1) as f64;
    points
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], share))
        .sum()
}

pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate(|x| C64::new(f(x), 0.0), a, b, tol).re
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate_real(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_complex() {
        let v = integrate(|x| C64::new(0.0, 7.0 * x).exp(), 0.0, 1.0, 1e-13);
        let exact = (C64::new(0.0, 7.0).exp() - 1.0) / C64::new(0.0, 7.0);
        assert!((v - exact).norm() < 1e-12);
    }

    #[test]
    fn bump_integral() {
        let v = integrate_real(|t| if t.abs() < 1.0 { (-1.0 / (1.0 - t * t)).exp() } else { 0.0 }, -1.0, 1.0, 1e-13);
        assert!((v - 0.443_993_816_168_078_65).abs() < 1e-11, "{v}");
    }

    #[test]
    fn breakpoints_handle_jumps() {
        let v = integrate_with_breaks(|x| C64::new(if x < 0.3 { 1.0 } else { 2.0 }, 0.0), 0.0, 1.0, &[0.3], 1e-13);
        assert!((v.re - (0.3 + 1.4)).abs() < 1e-12);
    }
}
