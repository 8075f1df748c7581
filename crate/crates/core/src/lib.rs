//! Group-invariant low-dimensional embeddings for data indexed by a finite
//! G-space.
//!
//! A data vector `a` on `n` points is first mapped to the orbit sums of its
//! tensor power `a^{⊗ω}` ([`invariant::InvariantMap`]), which is constant on
//! G-orbits of `a`, and then projected by a seeded Gaussian matrix
//! ([`embed::GaussianMap`]). Around that pipeline sit the permutation-group
//! machinery, orbit enumeration with a Burnside cross-check, canonical
//! representatives and discriminability diagnostics, multi-correlations, and
//! bispectrum inversion on cyclic groups.

pub mod config;
pub mod correlation;
pub mod discrim;
pub mod embed;
pub mod error;
pub mod group;
pub mod invariant;
pub mod io;
pub mod numeric;
pub mod orbit;
pub mod spectral;
pub mod store;

pub use error::{Error, Result};
pub use group::{Caps, FiniteGroup, GSpaceLabels, Permutation};
pub use invariant::{InvariantMap, InvariantVector};
pub use orbit::OrbitSet;
