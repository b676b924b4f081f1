//! Self-contracted and self-expanded discrete curves: predicates, lengths,
//! mean widths and the explicit length-bound constants, plus generators based
//! on the proximal point algorithm and on sublevel-set foliations.

pub mod curves;
pub mod error;
pub mod foliation;
pub mod generate;
pub mod geom;
pub mod io;
pub mod point;
pub mod prox;
pub mod spherelemmas;

pub use error::{Error, Result};
pub use point::{Point, UnitVector};
