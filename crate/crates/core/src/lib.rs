//! Numerics for the critical locus of complex Hénon maps `f(x, y) = (x² + c − a·y, x)`.

pub mod domains;
pub mod dyadic;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod locus;
pub mod model;
pub mod motion;
pub mod potentials;
pub mod verify;

pub use dyadic::DyadicString;
pub use dynamics::{HenonParameter, PhasePoint};
pub use error::{HenonError, Result};
