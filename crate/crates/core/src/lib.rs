pub mod algebra;
pub mod cli;
pub mod descending;
pub mod error;
pub mod formal;
pub mod gauss;
pub mod invariants;
pub mod linalg;
pub mod moves;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use formal::FormalSum;
pub use gauss::{Arrow, CanonicalCode, Chord, Endpoint, GaussDiagram, Mark, Sign, Underlying};
