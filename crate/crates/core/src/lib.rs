//! Exact and high-precision verification of multiple-sum q-series identities.

pub mod error;
pub mod field;
pub mod numeric;
pub mod operator;
pub mod params;
pub mod qcore;
pub mod registry;
pub mod report;

pub use error::{Error, Result};
pub use field::{ExactScalar, Field};
pub use numeric::{BigReal, NumericConfig};
pub use registry::{verify, verify_with, IdentityId, IdentityInstance, VerificationReport, VerifyOptions};
pub use report::ReportDocument;
