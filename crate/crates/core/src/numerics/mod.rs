//! Numerical kernels: special functions, quadrature, ODE integration and
//! bisection.

pub mod bessel;
pub mod bisect;
pub mod elliptic;
pub mod ode;
pub mod quadrature;

pub use bessel::{bessel_j0, bessel_j1};
pub use bisect::{bisect, Bisection};
pub use elliptic::{elliptic_e, elliptic_k};
pub use ode::{solve_ode, Event, EventHit, OdeConfig, OdeSolution, OdeStats};
pub use quadrature::{integrate_adaptive, integrate_adaptive_scaled, QuadResult, QuadratureConfig};
