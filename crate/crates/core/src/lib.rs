//! Exact analysis of generalized contextuality.
//!
//! Operational equivalences become loops in an object complex, ontic
//! valuations become 1-cochains on it, and non-classicality shows up as
//! loop phases, curvature, or cohomology classes. The same questions are
//! also answered by exact linear programs (contextual fraction, minimal
//! negativity, disturbance fraction) so the two views can be checked
//! against each other.

pub mod connection;
pub mod ddg;
pub mod disturbance;
pub mod error;
pub mod interference;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod noncontextuality;
pub mod polytope;
pub mod rational;
pub mod scenarios;
pub mod vorobyev;

pub use error::{Error, Result};
pub use rational::Q;
