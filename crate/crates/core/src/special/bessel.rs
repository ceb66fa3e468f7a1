//! Bessel functions of the first and second kind for integer order and real
//! argument.
//!
//! `J_0`, `J_1`, `Y_0`, `Y_1` come from the ascending power series for
//! `x <= 12` and from the Hankel asymptotic expansion above that. Higher
//! orders use Miller's downward recurrence for `J_n` (forward recurrence once
//! `x` exceeds the requested order) and the always-stable upward recurrence
//! for `Y_n`.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest supported order.
pub const MAX_ORDER: usize = 64;

const SERIES_LIMIT: f64 = 12.0;

/// `(J_0(x), J_1(x))` for `x >= 0`.
pub fn j0_j1(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        (series_j(0, x), series_j(1, x))
    } else {
        let (j0, _) = asymptotic(0, x);
        let (j1, _) = asymptotic(1, x);
        (j0, j1)
    }
}

/// `(Y_0(x), Y_1(x))` for `x > 0`; no domain check.
fn y0_y1_unchecked(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        series_y01(x)
    } else {
        let (_, y0) = asymptotic(0, x);
        let (_, y1) = asymptotic(1, x);
        (y0, y1)
    }
}

/// `J_0(x) + i Y_0(x)` for `x > 0` without argument checks; the kernel hot path.
pub(crate) fn hankel1_0_unchecked(x: f64) -> Complex64 {
    if x <= SERIES_LIMIT {
        let (j0, y0) = series_j0_y0(x);
        Complex64::new(j0, y0)
    } else {
        let (j0, y0) = asymptotic(0, x);
        Complex64::new(j0, y0)
    }
}

/// `J_1(x) + i Y_1(x)` for `x > 0` without argument checks.
pub(crate) fn hankel1_1_unchecked(x: f64) -> Complex64 {
    if x <= SERIES_LIMIT {
        let j1 = series_j(1, x);
        let (_, y1) = series_y01(x);
        Complex64::new(j1, y1)
    } else {
        let (j1, y1) = asymptotic(1, x);
        Complex64::new(j1, y1)
    }
}

/// `J_n(x)` for `0 <= n <= 64`, `x >= 0`.
pub fn bessel_j(n: usize, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!(
            "J_n requires finite x >= 0, got {x}"
        )));
    }
    Ok(bessel_j_seq(n, x)[n])
}

/// `Y_n(x)` for `0 <= n <= 64`, `x > 0`.
pub fn bessel_y(n: usize, x: f64) -> Result<f64> {
    if n > MAX_ORDER {
        return Err(Error::Domain(format!("order {n} exceeds {MAX_ORDER}")));
    }
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!(
            "Y_n is singular for x <= 0, got {x}"
        )));
    }
    Ok(bessel_y_seq(n, x)[n])
}

/// Hankel function of the first kind, `H^1_n(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: usize, x: f64) -> Result<Complex64> {
    let y = bessel_y(n, x)?;
    let j = bessel_j(n, x)?;
    Ok(Complex64::new(j, y))
}

/// `[J_0(x), ..., J_nmax(x)]` for `x >= 0`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    fill_bessel_j(x, &mut out);
    out
}

/// Fills `out[n] = J_n(x)` for `n < out.len()`.
pub fn fill_bessel_j(x: f64, out: &mut [f64]) {
    let len = out.len();
    if len == 0 {
        return;
    }
    if x == 0.0 {
        out.fill(0.0);
        out[0] = 1.0;
        return;
    }
    let (j0, j1) = j0_j1(x);
    out[0] = j0;
    if len == 1 {
        return;
    }
    out[1] = j1;
    let nmax = len - 1;
    if nmax < 2 {
        return;
    }
    if x >= nmax as f64 {
        for n in 1..nmax {
            out[n + 1] = 2.0 * n as f64 / x * out[n] - out[n - 1];
        }
        return;
    }

    // Miller: recur downward from well above max(nmax, x) with an arbitrary
    // seed, then scale the minimal solution to the accurate J_0 or J_1.
    let top = (nmax as f64).max(x);
    let mut start = (top + (160.0 * top).sqrt()) as usize + 10;
    start += start % 2;
    let mut above = 0.0_f64;
    let mut cur = 1e-300_f64;
    for n in (1..=start).rev() {
        let below = 2.0 * n as f64 / x * cur - above;
        above = cur;
        cur = below;
        if n - 1 <= nmax {
            out[n - 1] = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            above *= 1e-250;
            for v in out.iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() {
        j0 / out[0]
    } else {
        j1 / out[1]
    };
    for v in out.iter_mut() {
        *v *= scale;
    }
}

/// `[Y_0(x), ..., Y_nmax(x)]` for `x > 0` (upward recurrence).
pub fn bessel_y_seq(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    fill_bessel_y(x, &mut out);
    out
}

/// Fills `out[n] = Y_n(x)`; `x > 0` is the caller's responsibility.
pub fn fill_bessel_y(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let (y0, y1) = y0_y1_unchecked(x);
    out[0] = y0;
    if out.len() > 1 {
        out[1] = y1;
    }
    for n in 1..out.len().saturating_sub(1) {
        out[n + 1] = 2.0 * n as f64 / x * out[n] - out[n - 1];
    }
}

/// Fills `out[n] = H^1_n(x)`, `n < out.len()`, `x > 0`.
pub fn fill_hankel1(x: f64, jbuf: &mut [f64], ybuf: &mut [f64], out: &mut [Complex64]) {
    fill_bessel_j(x, jbuf);
    fill_bessel_y(x, ybuf);
    for ((o, &j), &y) in out.iter_mut().zip(jbuf.iter()).zip(ybuf.iter()) {
        *o = Complex64::new(j, y);
    }
}

fn series_j(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// J_0 and Y_0 from one pass of the shared ascending series.
fn series_j0_y0(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        harmonic += 1.0 / k as f64;
        j0 += term;
        tail -= harmonic * term;
        if term.abs() * harmonic.max(1.0) <= 1e-17 * j0.abs().max(tail.abs()).max(1e-300) {
            break;
        }
    }
    let y0 = FRAC_2_PI * (((0.5 * x).ln() + EULER_GAMMA) * j0 + tail);
    (j0, y0)
}

fn series_y01(x: f64) -> (f64, f64) {
    let (_, y0) = series_j0_y0(x);
    // Y_1 = -2/(pi x) + (2/pi) ln(x/2) J_1
    //       - (1/pi) sum_k (-1)^k [psi(k+1) + psi(k+2)] (x/2)^(2k+1) / (k! (k+1)!)
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half;
    let mut h_k = 0.0;
    let mut h_k1 = 1.0;
    let mut j1 = term;
    let mut tail = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
    for k in 1..200 {
        term *= q / (k as f64 * (k + 1) as f64);
        h_k += 1.0 / k as f64;
        h_k1 += 1.0 / (k + 1) as f64;
        j1 += term;
        let t = term * (h_k + h_k1 - 2.0 * EULER_GAMMA);
        tail += t;
        if t.abs() <= 1e-17 * tail.abs().max(1e-300) && term.abs() <= 1e-17 * j1.abs().max(1e-300) {
            break;
        }
    }
    let y1 = -FRAC_2_PI / x + FRAC_2_PI * half.ln() * j1 - tail / PI;
    (y0, y1)
}

/// Hankel asymptotic expansion for `n in {0, 1}`, summed up to its smallest term.
fn asymptotic(n: usize, x: f64) -> (f64, f64) {
    let mu = 4.0 * (n * n) as f64;
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..100 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * eight_x);
        if next.abs() >= last || next == 0.0 {
            break;
        }
        last = next.abs();
        term = next;
        // k odd feeds Q with sign (-1)^((k-1)/2); k even feeds P with sign (-1)^(k/2).
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = reduced_sin_cos(x, n);
    let amp = (FRAC_2_PI / x).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// `sin` and `cos` of `x - (n/2 + 1/4) pi` computed from `sin x`, `cos x` to
/// avoid cancellation in the phase.
fn reduced_sin_cos(x: f64, n: usize) -> (f64, f64) {
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = FRAC_PI_4.sin_cos();
    // x - pi/4
    let (mut s, mut c) = (sx * cp - cx * sp, cx * cp + sx * sp);
    if n % 2 == 1 {
        // subtract pi/2
        (s, c) = (-c, s);
    }
    if (n / 2) % 2 == 1 {
        (s, c) = (-s, -c);
    }
    (s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    // (n, x, J_n(x), Y_n(x)) from a 40-digit mpmath evaluation.
    const REFERENCE: &[(usize, f64, f64, f64)] = &[
        (0, 1.0, 0.765_197_686_557_966_5, 0.088_256_964_215_676_96),
        (1, 1.0, 0.440_050_585_744_933_5, -0.781_212_821_300_288_7),
        (0, 0.5, 0.938_469_807_240_812_9, -0.444_518_733_506_706_56),
        (1, 0.5, 0.242_268_457_674_873_9, -1.471_472_392_670_243),
        (5, 0.5, 8.053_627_241_357_474e-6, -7_946.301_478_807_473),
        (0, 3.0, -0.260_051_954_901_933_44, 0.376_850_010_012_790_4),
        (3, 3.0, 0.309_062_722_255_251_64, -0.538_541_616_105_031_6),
        (
            10,
            3.0,
            1.292_835_164_571_588_4e-5,
            -2_582.607_129_484_299_7,
        ),
        (
            0,
            11.9,
            0.025_049_441_699_589_564,
            -0.229_833_213_943_375_08,
        ),
        (7, 11.9, -0.155_206_922_225_789_65, 0.204_027_668_213_627_72),
        (0, 12.1, 0.069_666_773_606_807_39, -0.218_438_380_550_925_46),
        (
            1,
            12.1,
            -0.215_748_973_376_924_78,
            -0.078_736_931_451_395_82,
        ),
        (
            13,
            12.1,
            0.126_734_805_082_265_48,
            -0.462_299_690_648_425_37,
        ),
        (0, 25.0, 0.096_266_783_275_958_12, -0.127_249_432_268_006_14),
        (2, 25.0, -0.106_294_803_242_381_31, 0.119_343_035_085_347_15),
        (
            14,
            25.0,
            0.175_082_018_157_195_07,
            -0.006_402_261_364_159_592,
        ),
        (20, 25.0, 0.051_994_049_228_303_23, 0.198_040_747_762_892_44),
        (0, 60.0, -0.091_471_804_089_061_87, 0.047_358_952_209_449_4),
        (1, 60.0, 0.046_598_383_758_166_32, 0.091_869_609_369_866_9),
        (
            16,
            60.0,
            0.010_199_196_020_579_161,
            -0.104_423_857_743_769_15,
        ),
        (
            0,
            100.0,
            0.019_985_850_304_223_122,
            -0.077_244_313_365_083_15,
        ),
        (
            30,
            50.0,
            0.048_434_257_245_509_42,
            -0.116_457_234_935_441_45,
        ),
        (
            64,
            10.0,
            2.904_936_028_729_109_3e-45,
            -1.733_413_671_038_701_1e42,
        ),
        (
            2,
            0.001,
            1.249_999_895_833_336_6e-7,
            -1_273_239.863_045_667_5,
        ),
        (
            14,
            0.05,
            4.273_007_683_206_829_5e-34,
            -5.320_974_796_924_324e31,
        ),
    ];

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn matches_high_precision_reference() {
        for &(n, x, j, y) in REFERENCE {
            let jn = bessel_j(n, x).unwrap();
            let yn = bessel_y(n, x).unwrap();
            assert!(rel(jn, j) < 1e-10, "J_{n}({x}) = {jn}, expected {j}");
            assert!(rel(yn, y) < 1e-10, "Y_{n}({x}) = {yn}, expected {y}");
        }
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn y_and_hankel_reject_origin() {
        assert!(matches!(bessel_y(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(hankel1(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_y(1, -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(65, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hankel_composes_j_and_y() {
        let h0 = hankel1(0, 1.0).unwrap();
        assert!((h0.re - 0.765_197_686_6).abs() < 1e-10);
        assert!((h0.im - 0.088_256_964_2).abs() < 1e-10);
        let h1 = hankel1(1, 1.0).unwrap();
        assert!((h1.re - 0.440_050_585_7).abs() < 1e-10);
        assert!((h1.im + 0.781_212_821_3).abs() < 1e-10);
    }

    #[test]
    fn hot_path_agrees_with_checked_api() {
        for &x in &[1e-6, 0.3, 2.0, 11.99, 12.01, 40.0] {
            let a = hankel1_0_unchecked(x);
            let b = hankel1(0, x).unwrap();
            assert!((a - b).norm() <= 1e-14 * b.norm());
            let a = hankel1_1_unchecked(x);
            let b = hankel1(1, x).unwrap();
            assert!((a - b).norm() <= 1e-14 * b.norm());
        }
    }

    #[test]
    fn wronskian_identity() {
        let mut x = 0.1;
        while x <= 100.0 {
            let j = bessel_j_seq(17, x);
            let y = bessel_y_seq(17, x);
            let expected = -2.0 / (PI * x);
            for n in 0..=16 {
                let w = j[n] * y[n + 1] - j[n + 1] * y[n];
                assert!(
                    rel(w, expected) < 1e-10,
                    "Wronskian n={n} x={x}: {w} vs {expected}"
                );
            }
            x *= 1.07;
        }
    }

    #[test]
    fn y_recurrence_holds() {
        let x = 4.2;
        let y = bessel_y_seq(10, x);
        for n in 1..10 {
            let lhs = y[n + 1];
            let rhs = 2.0 * n as f64 / x * y[n] - y[n - 1];
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
