//! Holds the `acceptance` test target. Run it on its own with
//! `cargo test -p polybetti-verification --test acceptance`.
