//! Small numerical helpers shared by the engines.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Pairwise (cascade) summation in a fixed order.
///
/// The result depends only on the input sequence, never on how the caller
/// partitioned the work that produced it.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `sin²(x/2)`, the modulus `|1 - e^{ix}|² / 4` without cancellation.
#[inline]
pub fn half_angle_sin_sq(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    s * s
}

/// `n·φ` as an unevaluated sum `hi + lo` that is exact for integer `n < 2⁵³`.
#[inline]
pub fn scaled_angle(n: usize, phi: f64) -> (f64, f64) {
    let n = n as f64;
    let hi = n * phi;
    (hi, n.mul_add(phi, -hi))
}

/// `θ + n·φ` as `hi + lo`, carrying the rounding error of both the product
/// and the sum so that levels near `θ + nφ ≡ 0 (mod 2π)` keep full relative
/// precision.
#[inline]
pub fn level_angle(theta: f64, n: usize, phi: f64) -> (f64, f64) {
    let (p, e) = scaled_angle(n, phi);
    let s = p + theta;
    let b = s - p;
    let err = (p - (s - b)) + (theta - b);
    (s, err + e)
}

/// `sin²((hi + lo)/2)` for `|lo| ≪ ulp(hi)`-scale corrections.
#[inline]
pub fn half_angle_sin_sq_split(hi: f64, lo: f64) -> f64 {
    let (s, c) = (0.5 * hi).sin_cos();
    let v = s + 0.5 * lo * c;
    v * v
}

/// `1 - e^{ix}` evaluated as `2 sin²(x/2) - i sin x`.
#[inline]
pub fn one_minus_cis(x: f64) -> Complex64 {
    Complex64::new(2.0 * half_angle_sin_sq(x), -x.sin())
}

/// `e^w - 1` for complex `w`, accurate when `|w|` is small.
pub fn expm1_complex(w: Complex64) -> Complex64 {
    let (re, im) = (w.re, w.im);
    let em1 = re.exp_m1();
    // e^re cos(im) - 1 = expm1(re) cos(im) - 2 sin²(im/2)
    Complex64::new(
        em1 * im.cos() - 2.0 * half_angle_sin_sq(im),
        re.exp() * im.sin(),
    )
}

/// `ln(1 + u)` for complex `u`, accurate when `|u|` is small.
pub fn ln1p_complex(u: Complex64) -> Complex64 {
    // |1+u|² = 1 + (2 re + |u|²)
    let modulus_sq_m1 = 2.0 * u.re + u.norm_sqr();
    Complex64::new(0.5 * modulus_sq_m1.ln_1p(), u.im.atan2(1.0 + u.re))
}

/// Maps an angle into `(-π, π]`. Angles already in range are returned unchanged.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = (x + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|k| if k == count - 1 { stop } else { start + step * k as f64 })
                .collect()
        }
    }
}
