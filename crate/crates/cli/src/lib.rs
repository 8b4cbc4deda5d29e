//! Library surface of the command-line driver: configuration, initial data,
//! the scenario catalog, snapshot IO, reporting and the verification suites.
//! The `nsm` binary is a thin wrapper over these modules; integration tests
//! call them directly.

pub mod config;
pub mod initial;
pub mod report;
pub mod scenarios;
pub mod snapshot;
pub mod verify;
