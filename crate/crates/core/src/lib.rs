//! External numbers, flexible functions, neutrix limits and
//! near-optimization at nonstandard scales.

pub mod calc;
pub mod error;
pub mod flex;
pub mod lex;
pub mod opt;
pub mod scale;

pub use error::{Error, Result};
pub use scale::{AsymptoticReal, Exp, ExternalNumber, Idem, Neutrix};
