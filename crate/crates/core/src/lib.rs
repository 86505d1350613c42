//! Exact symbolic analysis of the two-component BBM-KdV family: Lie point
//! symmetries, adjoint systems, nonlinear self-adjointness and conservation
//! laws.

pub mod error;
pub mod expr;

pub use error::{Error, Result};
pub use expr::{parse, Assumptions, Expr};
pub mod linalg;
pub mod jet;
pub mod system;
pub mod reduce;
pub mod symmetry;
pub mod selfadjoint;
pub mod conslaw;
