//! Command-line front end for the `stablemult` workbench.
//!
//! [`dispatch::parse_and_dispatch`] is the whole program; the binary only
//! forwards `argv` and the exit code. [`verify`] holds the acceptance suite
//! so that integration tests can run it in process.

pub mod config;
pub mod dispatch;
pub mod emit;
pub mod fields;
pub mod verify;
