//! Numerical laboratory for the discrete spherical maximal function on `Z^d`.
//!
//! The crate is split along the objects the ℓ² argument manipulates:
//!
//! * [`numtheory`]: lcm towers `q_j`, `Q_k`, non-divisor witnesses and tail sums.
//! * [`lattice`]: exact enumeration and counting of lattice points on spheres.
//! * [`signals`]: sparse and periodic signals with the spherical averages,
//!   dyadic maximal operators, the Hardy–Littlewood operator and the
//!   telescoping frequency decomposition.
//! * [`spectral`]: Fourier evaluation, the bump profile, the sampling
//!   multipliers `Ψ̂_{j,k}`, frequency regions `Ω_{j,k}` and theta sums.
//! * [`circle`]: Farey arcs, Gauss sums, the pointwise multiplier bound on an
//!   arc and the stratified estimate of the arc integral.

pub mod circle;
pub mod error;
pub mod lattice;
pub mod numtheory;
pub mod rng;
pub mod signals;
pub mod spectral;

pub use error::{Error, Result};
