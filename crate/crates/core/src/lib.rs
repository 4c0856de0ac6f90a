//! Exact computations with finite complex reflection groups: cyclotomic
//! arithmetic, matrix groups, middle convolution, braid group orbits on
//! SL(2) character varieties, and a search pipeline tying them together.

pub mod braid;
pub mod cyclo;
pub mod error;
pub mod exactla;
pub mod imprim;
pub mod midconv;
pub mod modp;
pub mod pipeline;
pub mod refgroup;
pub mod sl2;
pub mod util;

pub use cyclo::{make_field, CycloElt, CycloField, RootOfUnity};
pub use error::{Error, Result};
pub use exactla::{Mat, MatTuple, Subspace};
