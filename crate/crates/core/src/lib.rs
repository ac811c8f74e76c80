//! Exact-arithmetic Drinfeld modules and Drinfeld modular forms over `F_q[θ]`.
//!
//! The completion `C_∞` is modelled by truncated Laurent series in `θ^{-1/m}`
//! with coefficients in a finite field `F_{q^s}`. Every series tracks its
//! absolute precision, so no digit at or beyond the precision bound is ever
//! reported.

pub mod carlitz;
pub mod cm;
pub mod drinfeld;
pub mod eisenstein;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod modular;
pub mod field;
pub mod ore;
pub mod periods;
pub mod poly;
pub mod puiseux;
pub mod relations;
pub mod report;
pub mod serial;
pub mod series;
pub mod tseries;

pub use error::{Error, Result};
pub use field::{Ctx, Fe, FieldParams};
pub use series::{RamifiedSeries, EXACT};
