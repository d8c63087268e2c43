//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Semi-infinite and infinite ranges are mapped onto finite ones with
//! `x = a + s·t/(1 − t)` (and its mirror), where `s` is a caller-chosen
//! length scale; the plain entry points use `s = 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl QuadratureConfig {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Self {
        Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<const N: usize> {
    pub value: [f64; N],
    pub abs_error: f64,
    pub evaluations: usize,
}

// Kronrod abscissae (positive half, descending) and weights; the even-index
// nodes also carry the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
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

struct Segment<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Segment<N> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<const N: usize> Eq for Segment<N> {}
impl<const N: usize> PartialOrd for Segment<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Segment<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Result<Segment<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = [0.0; N];
    let mut gauss = [0.0; N];
    for i in 0..N {
        kronrod[i] = fc[i] * WGK[7];
        gauss[i] = fc[i] * WG[3];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        for i in 0..N {
            let s = f1[i] + f2[i];
            kronrod[i] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * s;
            }
        }
    }
    let mut error: f64 = 0.0;
    let mut value = [0.0; N];
    for i in 0..N {
        value[i] = kronrod[i] * half;
        error += ((kronrod[i] - gauss[i]) * half).powi(2);
    }
    Ok(Segment {
        a,
        b,
        value,
        error: error.sqrt(),
    })
}

fn norm<const N: usize>(v: &[f64; N]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Adaptive integration of a vector-valued integrand on a finite interval.
///
/// Errors and the tolerance target use the Euclidean norm over components,
/// so a rotation of the integrand (e.g. a unit complex factor) does not
/// change the refinement.
pub fn integrate_finite_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    if a == b {
        return Ok(Quadrature {
            value: [0.0; N],
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let first = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut subdivisions = 1;
    while total_err > cfg.target(norm(&total)) {
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Convergence {
                estimate: total[0],
                error: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds every live segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split any further in f64
            return Err(Error::Convergence {
                estimate: total[0],
                error: total_err,
                subdivisions,
            });
        }
        let left = gk15(&mut f, worst.a, mid)?;
        let right = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        for i in 0..N {
            total[i] += left.value[i] + right.value[i] - worst.value[i];
        }
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
        // Recompute the error sum from scratch: incremental updates drift.
        total_err = heap.iter().map(|s| s.error).sum();
        if subdivisions % 64 == 0 {
            let mut fresh = [0.0; N];
            for s in heap.iter() {
                for i in 0..N {
                    fresh[i] += s.value[i];
                }
            }
            total = fresh;
        }
    }
    let mut value = [0.0; N];
    for s in heap.iter() {
        for i in 0..N {
            value[i] += s.value[i];
        }
    }
    Ok(Quadrature {
        value,
        abs_error: total_err,
        evaluations,
    })
}

/// Vector-valued integral over `[a, ∞)` using `x = a + scale·t/(1 − t)`.
pub fn integrate_upper_tail_vec<const N: usize, F>(
    mut f: F,
    a: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<Quadrature<N>>
where
    F: FnMut(f64) -> Result<[f64; N]>,
{
    integrate_finite_vec(
        |t| {
            let one_minus = 1.0 - t;
            let x = a + scale * t / one_minus;
            let jac = scale / (one_minus * one_minus);
            let mut v = f(x)?;
            for vi in v.iter_mut() {
                *vi *= jac;
            }
            Ok(v)
        },
        0.0,
        1.0,
        cfg,
    )
}

/// Scalar integral result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
}

/// Adaptive integral of `f` over `[a, b]`. Either bound may be infinite.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_adaptive_scaled(|x| Ok(f(x)), a, b, 1.0, cfg)
}

/// Like [`integrate_adaptive`] with a fallible integrand and an explicit
/// length scale for the infinite-range maps.
pub fn integrate_adaptive_scaled<F>(
    mut f: F,
    a: f64,
    b: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a > b {
        let r = integrate_adaptive_scaled(f, b, a, scale, cfg)?;
        return Ok(QuadResult {
            value: -r.value,
            abs_error: r.abs_error,
        });
    }
    let q = match (a.is_finite(), b.is_finite()) {
        (true, true) => integrate_finite_vec(|x| Ok([f(x)?]), a, b, cfg)?,
        (true, false) => integrate_upper_tail_vec(|x| Ok([f(x)?]), a, scale, cfg)?,
        (false, true) => integrate_upper_tail_vec(|x| Ok([f(-x)?]), -b, scale, cfg)?,
        (false, false) => {
            let upper = integrate_upper_tail_vec(|x| Ok([f(x)?]), 0.0, scale, cfg)?;
            let lower = integrate_upper_tail_vec(|x| Ok([f(-x)?]), 0.0, scale, cfg)?;
            Quadrature {
                value: [upper.value[0] + lower.value[0]],
                abs_error: upper.abs_error + lower.abs_error,
                evaluations: upper.evaluations + lower.evaluations,
            }
        }
    };
    Ok(QuadResult {
        value: q.value[0],
        abs_error: q.abs_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let cfg = QuadratureConfig::default();
        let r = integrate_adaptive(|x| x * x, 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-15);
        let r = integrate_adaptive(f64::sin, 0.0, PI, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite() {
        let cfg = QuadratureConfig::default();
        let r = integrate_adaptive(|x| (-x).exp(), 0.0, f64::INFINITY, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_adaptive(|x| (-x * x).exp(), f64::NEG_INFINITY, f64::INFINITY, &cfg)
            .unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-12);
        let r = integrate_adaptive(|x| x.exp(), f64::NEG_INFINITY, 0.0, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let cfg = QuadratureConfig::default();
        let r = integrate_adaptive(|x| x, 1.0, 0.0, &cfg).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn endpoint_singularity() {
        let cfg = QuadratureConfig::default();
        let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, &cfg).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn subdivision_budget_is_reported() {
        let cfg = QuadratureConfig::new(1e-15, 1e-15, 3);
        match integrate_adaptive(|x| (1.0 / x).sin(), 1e-4, 1.0, &cfg) {
            Err(Error::Convergence { subdivisions, .. }) => assert_eq!(subdivisions, 3),
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }
}
