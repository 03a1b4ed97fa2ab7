//! Lifting symmetry breaking constraints from small ASP instances.

pub mod dominance;
pub mod error;
pub mod instances;
pub mod learner;
pub mod pipeline;
pub mod program;
pub mod sbc;
pub mod solver;
pub mod symmetry;

pub use error::{Error, Result};
