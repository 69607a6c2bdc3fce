//! Numerical toolkit for planar conformal geometry and a companion
//! two-complex-variable domain construction.
//!
//! The crate is organized around five areas:
//!
//! * [`mobius`] — Möbius maps, circles, and their closed-form interaction.
//! * [`grid`] — grid-sampled defining functions and Lipschitz-type distances.
//! * [`bumps`] — a family of perturbed-ball domains in ℂ² built from a smooth
//!   bump profile and iterated ball automorphisms.
//! * [`uniform`] — Koebe-style normalization of finitely connected planar
//!   domains onto circle domains, with Szegő-kernel Riemann maps as the
//!   elementary step.
//! * [`autgroup`] / [`bergman`] — automorphism-group enumeration on circle
//!   domains and truncated-basis Bergman kernels, metrics, and curvature.
//!
//! File formats shared with the CLI live in [`formats`].

pub mod autgroup;
pub mod bergman;
pub mod bumps;
pub mod curves;
pub mod error;
pub mod formats;
pub mod grid;
pub mod mobius;
pub mod uniform;

pub use error::Error;

/// Crate-wide complex scalar.
pub type C = num_complex::Complex64;
