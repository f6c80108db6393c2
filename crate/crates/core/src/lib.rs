//! Minimal Fisher information inferred from prior moments `⟨x^k⟩`.
//!
//! The closed form `I = Σ C_k |⟨x^k⟩|^(-2/k)` ([`moments`]) solves the
//! differential equation that the virial theorem imposes on an extremal
//! Fisher measure. [`translation`] re-expresses the result about the minimum
//! of the information potential and checks the Cramer–Rao bound,
//! [`schrodinger`] solves the associated Schrödinger equation on a grid as an
//! independent check, and [`pde`] probes arbitrary candidate functions
//! against the governing equation and its characteristics.

pub mod cli;
pub mod error;
pub mod moments;
pub mod pde;
pub mod pipeline;
pub mod schrodinger;
pub mod translation;
pub mod tridiag;

pub use error::{Error, Result};
pub use moments::{FisherSolution, MomentLookup, MomentSet, Multipliers, ReferenceConstants};
pub use pipeline::{solve, ClosedFormSolution};
pub use schrodinger::{EigenResult, Grid, GridOptions, GridWavefunction};
pub use translation::{CriticalPoint, InfoPotential, TranslatedMoments};
