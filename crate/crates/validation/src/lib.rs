//! Acceptance suite for the poroplate pipeline; see `tests/acceptance.rs`.
