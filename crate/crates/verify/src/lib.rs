//! Independent oracles for the core library, and the acceptance suite
//! (`cargo test -p alpha-walk-verify --test acceptance`).

pub mod oracle;
