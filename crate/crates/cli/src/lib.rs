//! Library surface of the CLI: JSON schema conversions and job reports,
//! shared between the binary and its end-to-end tests.

pub mod report;
pub mod schema;
