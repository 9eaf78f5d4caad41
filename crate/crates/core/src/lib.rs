//! Minimizers of the Cahn–Hilliard energy
//!
//! ```text
//! E(u) = ∫_Ω κ/2 |∇u|² + W(u) dx,   u = 0 on ∂Ω,
//! ```
//!
//! with the Flory–Huggins potential `W`, computed by Allen–Cahn gradient
//! flow on a square, plus the diagnostics used to check the bifurcation at
//! `κ_c = (1-θ)/λ₁`: below it the flow settles on a symmetric pair of
//! nontrivial minimizers, above it on `u ≡ 0`.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod io;
pub mod potential;
pub mod sweep;

pub use diagnostics::{Classification, EnergyReport, PhiScan};
pub use dynamics::{RunResult, SolverConfig};
pub use error::{Error, Result};
pub use field::{GridGeometry, ScalarField};
pub use potential::{ModifiedPotential, PotentialParams};
