//! Host crate for the acceptance suite in `tests/acceptance.rs`.
//!
//! It lives in its own package so that `cargo test --workspace` runs the
//! library and CLI tests before it.
