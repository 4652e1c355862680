//! Certification of strong (delay-robust exponential) stability for the
//! two-delay linear difference equation `x(t) = A x(t-a) + B x(t-b)`.
//!
//! The crate builds the LMI conditions for the problem ([`conditions`]),
//! decides their strict feasibility ([`sdp`]), checks every answer against
//! an exact frequency sweep ([`oracle`]), and drives the margin and region
//! experiments ([`analysis`]).

pub mod algebra;
pub mod analysis;
pub mod conditions;
pub mod error;
pub mod families;
pub mod oracle;
pub mod sdp;

pub use algebra::{ComplexMatrix, RealMatrix};
pub use error::{Error, Result};
pub use families::SystemPair;
