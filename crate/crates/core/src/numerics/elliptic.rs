//! Complete elliptic integrals in the modulus convention:
//!
//! ```text
//! K(x) = ∫₀^{π/2} dθ / √(1 − x² sin²θ)
//! E(x) = ∫₀^{π/2} √(1 − x² sin²θ) dθ
//! ```
//!
//! Note the argument is the modulus `x`, not the parameter `m = x²`.
//! Both are evaluated with the arithmetic-geometric mean.

use std::f64::consts::PI;

use crate::error::{domain, Result};

const MAX_ITER: usize = 40;

/// Complete elliptic integral of the first kind, modulus convention.
pub fn elliptic_k(x: f64) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return domain(format!("K(x) requires |x| < 1, got {x}"));
    }
    let x = x.abs();
    Ok(ke_pair(x, complementary(x)).0)
}

/// Complete elliptic integral of the second kind, modulus convention.
pub fn elliptic_e(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return domain(format!("E(x) requires |x| <= 1, got {x}"));
    }
    let x = x.abs();
    if x == 1.0 {
        return Ok(1.0);
    }
    Ok(ke_pair(x, complementary(x)).1)
}

fn complementary(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).sqrt()
}

/// `(K(x), E(x))` given both the modulus `x` and its complement
/// `kp = √(1 − x²)`. Callers that know `kp` in closed form should pass it
/// directly, since forming `1 − x²` loses digits as `x → 1`.
pub(crate) fn ke_pair(x: f64, kp: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.5 * PI, 0.5 * PI);
    }
    let mut a = 1.0;
    let mut b = kp;
    let mut c = x;
    // E = K · (1 − Σ 2^{n−1} c_n²)
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..MAX_ITER {
        let a_next = 0.5 * (a + b);
        let b_next = (a * b).sqrt();
        c = 0.5 * (a - b);
        weight *= 2.0;
        sum += weight * c * c;
        a = a_next;
        b = b_next;
        if c.abs() <= 1e-17 * a {
            break;
        }
    }
    let k = PI / (2.0 * a);
    (k, k * (1.0 - sum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        assert_eq!(elliptic_k(0.0).unwrap(), 0.5 * PI);
        assert_eq!(elliptic_e(0.0).unwrap(), 0.5 * PI);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
    }

    #[test]
    fn half_modulus() {
        // parameter m = 0.25
        assert!((elliptic_k(0.5).unwrap() - 1.685_750_354_812_596).abs() < 1e-14);
        assert!((elliptic_e(0.5).unwrap() - 1.467_462_209_339_427).abs() < 1e-14);
    }

    #[test]
    fn k_diverges_at_unit_modulus() {
        assert!(elliptic_k(1.0).is_err());
        assert!(elliptic_k(1.5).is_err());
        assert!(elliptic_e(1.0001).is_err());
        let mut prev = 0.0;
        for x in [0.9, 0.99, 0.9999, 0.999_999_99, 1.0 - 1e-15] {
            let k = elliptic_k(x).unwrap();
            assert!(k > prev);
            prev = k;
        }
        assert!(prev > 18.0);
    }

    #[test]
    fn explicit_complement_matches() {
        let lam: f64 = 0.97;
        let x = 2.0 * lam.sqrt() / (1.0 + lam);
        let kp = (1.0 - lam) / (1.0 + lam);
        let (k, e) = ke_pair(x, kp);
        assert!((k / elliptic_k(x).unwrap() - 1.0).abs() < 1e-9);
        assert!((e / elliptic_e(x).unwrap() - 1.0).abs() < 1e-12);
    }
}
