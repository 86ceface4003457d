//! Static auditing of Android-style app packages: privilege assessment
//! from the manifest, privacy-policy consistency, and known-vulnerability
//! detection with false-positive refinement.

pub mod detectors;
pub mod diagnostic;
pub mod error;
pub mod flow;
pub mod geo;
pub mod manifest;
pub mod package;
pub mod policy;
pub mod report;
pub mod sir;

pub use diagnostic::{Diagnostic, DiagnosticKind};
pub use error::{Error, Result};
