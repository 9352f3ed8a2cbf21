//! Holds the `acceptance` test target. Nothing is exported.
//!
//! Lives in its own package so that `cargo test --workspace` reaches it
//! after every unit and property suite.
