//! Exactly solvable central-spin decoherence: a spin-1/2 qubit coupled to a
//! bath of spin-1/2 nuclei through `H = K S.I_B`.
//!
//! Closed-form dynamics live in [`closed_form`], short-time local-coupling
//! expansions in [`perturbative`], master-equation extraction in
//! [`master_eq`] and brute-force evolution for validation in [`oracle`].

pub mod angular;
pub mod bath;
pub mod closed_form;
pub mod error;
pub mod master_eq;
pub mod oracle;
pub mod perturbative;
pub mod presets;
pub mod sector;
pub mod spin;

pub use error::{Error, Result};
pub use spin::Spin;
