//! Choi-type positive maps on 3x3 matrices: Choi matrices, positivity tests,
//! facial structure of the parameter body, spanning and optimality audits, and
//! construction of witnesses for PPT entangled edge states.

pub mod error;
pub mod faces;
pub mod family;
pub mod linalg;
pub mod nelder_mead;
pub mod optimality;
pub mod positivity;
pub mod report;
pub mod spanning;
pub mod sweep;
pub mod witness;

pub use error::{Error, Result};
pub use faces::{FaceKind, FaceLabel, PropertyRow};
pub use family::MapParams;
pub use linalg::{ComplexMatrix, Tolerances, C64};
