//! Rationale alignment toolkit for case outcome classification.

pub mod attribution;
pub mod autodiff;
pub mod corpus;
pub mod error;
pub mod hard_method;
pub mod markup;
pub mod metrics;
pub mod model;
pub mod stats;
pub mod synthetic;
pub mod text;

pub use error::{Error, Result};
