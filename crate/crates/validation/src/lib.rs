//! Acceptance checks for `svir-core`; the suite is `tests/acceptance.rs`.
//!
//! It lives in its own package so that a failing criterion does not stop
//! `cargo test` before the core crate's own test targets have run.
