//! Almost-sure spectra of period-2 Bernoulli Schrödinger operators on ℤ,
//! computed from closed-form gaps and certified through uniform
//! hyperbolicity of the transfer-matrix products.

pub mod bandmodel;
pub mod certify;
pub mod cli;
pub mod error;
pub mod mat2;
pub mod oracle;
pub mod projline;
mod serde_ext;

pub use error::{Error, Result};
