//! Classical trajectories, eikonal phases and far-field diffraction of helium
//! matter waves passing a nanohole in a dielectric membrane, with the
//! atom–surface dispersion interaction included.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod domain;
pub mod dynamics;
pub mod error;
pub mod holered;
pub mod numerics;
pub mod potential;
pub mod units;
pub mod wave;

pub use domain::{AtomSpecies, BeamState, HoleGeometry, SpeciesKind};
pub use error::{Error, Result};
