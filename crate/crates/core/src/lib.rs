//! Exact sampling of the projective ensemble, a determinantal point process on
//! complex projective space `CP^d`, together with the energy functionals and
//! closed-form expectations used to validate it.
//!
//! The crate is organised bottom-up:
//!
//! * [`projective`]: points of `CP^d`, the Fubini–Study sine distance and the
//!   affine chart `z ↦ (1, z)`.
//! * [`kernel`]: the weighted monomial basis, its reproducing kernel and the
//!   projective kernel magnitude.
//! * [`sampler`]: the sequential projection sampler with uniform proposals.
//! * [`lift`]: lifting projective samples to `k` phase-spaced representatives
//!   on the odd-dimensional sphere `S^{2d+1}`.
//! * [`energy`]: Riesz, logarithmic, projective and Green energies.
//! * [`closed_forms`]: exact expected energies, bound constants and the
//!   quadrature oracle.
//! * [`montecarlo`]: the seeded, parallel experiment harness.
//! * [`io`]: point-set files, report JSON and figure CSV.

pub mod closed_forms;
pub mod energy;
mod error;
pub mod io;
pub mod kernel;
pub mod lift;
pub mod montecarlo;
pub mod projective;
pub mod quadrature;
pub mod sampler;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
