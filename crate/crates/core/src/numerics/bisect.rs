//! Bisection on a monotone boolean predicate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    /// Bracket end where the predicate has the value it had at the original `lo`.
    pub lo: f64,
    /// Bracket end with the other predicate value.
    pub hi: f64,
    pub iterations: usize,
}

impl Bisection {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).abs()
    }
}

/// Shrink `[lo, hi]` around the flip of `predicate` until the bracket is no
/// wider than `tol`. The returned bracket is oriented so that `lo` is the
/// smaller abscissa; `iterations` counts predicate evaluations after the two
/// endpoint checks.
pub fn bisect<F>(mut predicate: F, lo: f64, hi: f64, tol: f64) -> Result<Bisection>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("bisection tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let pa = predicate(a)?;
    let pb = predicate(b)?;
    if pa == pb {
        return Err(Error::Bracket { lo: a, hi: b, value: pa });
    }
    let mut iterations = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        iterations += 1;
        if predicate(mid)? == pa {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Bisection { lo: a, hi: b, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = bisect(|x| Ok(x * x > 2.0), 1.0, 2.0, 1e-10).unwrap();
        assert!(r.width() <= 1e-10);
        assert!(r.lo <= 2f64.sqrt() && 2f64.sqrt() <= r.hi);
    }

    #[test]
    fn swapped_bounds_give_the_same_bracket() {
        let a = bisect(|x| Ok(x * x > 2.0), 1.0, 2.0, 1e-8).unwrap();
        let b = bisect(|x| Ok(x * x > 2.0), 2.0, 1.0, 1e-8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flip_at_midpoint() {
        let r = bisect(|x| Ok(x >= 0.5), 0.0, 1.0, 1e-6).unwrap();
        assert!(r.width() <= 1e-6);
        assert!(r.lo < 0.5 && r.hi >= 0.5);
    }

    #[test]
    fn iteration_count_matches_halving() {
        // 25 nm bracket down to 1e-4 nm: ceil(log2(25 / 1e-4)) = 18
        let r = bisect(|x| Ok(x > 7.123_456), 0.0, 25.0, 1e-4).unwrap();
        assert!(r.iterations <= 19);
        assert_eq!(r.iterations, (25.0f64 / 1e-4).log2().ceil() as usize);
    }

    #[test]
    fn equal_ends_are_a_bracket_error() {
        assert!(matches!(
            bisect(|x| Ok(x > 10.0), 0.0, 1.0, 1e-3),
            Err(Error::Bracket { .. })
        ));
    }
}
