//! Bessel functions of the first kind, orders 0 and 1.
//!
//! Three regimes: the power series for |x| < 8, Miller's backward recurrence
//! normalised with `J0 + 2 Σ J_{2k} = 1` for 8 ≤ |x| < 25, and the Hankel
//! asymptotic expansion above that. Absolute error stays below 1e-13 on
//! [0, 1000].

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        series(0, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax).0
    } else {
        asymptotic(0, ax)
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        series(1, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        miller(ax).1
    } else {
        asymptotic(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let nu = order as f64;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) || k < 3.0 {
        term *= q / (k * (k + nu));
        sum += term;
        k += 1.0;
        if k > 200.0 {
            break;
        }
    }
    sum
}

/// Backward recurrence returning `(J0(x), J1(x))` for moderate `x > 0`.
fn miller(x: f64) -> (f64, f64) {
    let start = 2 * ((1.2 * x) as usize / 2 + 25);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut j1 = 0.0;
    let mut n = start;
    while n > 0 {
        let prev = (n as f64) * two_over_x * cur - next;
        next = cur;
        cur = prev;
        n -= 1;
        if n == 1 {
            j1 = cur;
        }
        if n.is_multiple_of(2) && n > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, j1 / norm)
}

fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let inv8x = 1.0 / (8.0 * x);
    // a_k(ν) / x^k with a_k = Π_{j≤k} (μ − (2j−1)²) / (k! 8^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) * inv8x / k as f64;
        if term.abs() >= last && k > 2 {
            break;
        }
        last = term.abs();
        // k odd → Q, k even → P, alternating signs in pairs
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
    let (s, c) = x.sin_cos();
    let (cos_chi, sin_chi) = if order == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!(bessel_j0(2.404_825_557_695_773).abs() < 1e-15);
        assert!(bessel_j1(3.831_705_970_207_512).abs() < 1e-14);
        assert!((bessel_j0(10.0) - (-0.245_935_764_451_348_3)).abs() < 1e-14);
        assert!((bessel_j0(30.0) - (-0.086_367_983_581_040_2)).abs() < 1e-14);
    }

    #[test]
    fn parity() {
        for x in [0.3, 5.0, 12.0, 40.0] {
            assert_eq!(bessel_j0(-x), bessel_j0(x));
            assert_eq!(bessel_j1(-x), -bessel_j1(x));
        }
    }

    /// Trapezoidal rule on Bessel's integral, exponentially convergent for
    /// this periodic integrand.
    fn integral_oracle(order: u32, x: f64) -> f64 {
        let n = 2 * (x.abs() as usize) + 400;
        let h = PI / n as f64;
        let f = |th: f64| (order as f64 * th - x * th.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h / PI
    }

    #[test]
    fn regimes_match_integral_oracle() {
        for x in [
            7.999_999, 8.0, 8.000_001, 12.5, 24.999_999, 25.0, 25.000_001, 60.0, 999.0,
        ] {
            assert!((bessel_j0(x) - integral_oracle(0, x)).abs() < 1e-13, "J0({x})");
            assert!((bessel_j1(x) - integral_oracle(1, x)).abs() < 1e-13, "J1({x})");
        }
    }
}
