//! Chip-level model and receiver algorithms for cooperative multihop DS-CDMA
//! networks with decode-and-forward relays.
//!
//! The crate is split into three layers:
//!
//! * [`signal`]: spreading, multipath channels, QPSK, chip-stream synthesis
//!   of every hop and the relays' decode-and-forward regeneration.
//! * [`oracle`]: full-statistics designs. Constrained MMSE receive filters,
//!   group-based power allocation, MMSE channel estimation and their
//!   alternating solution.
//! * [`adaptive`]: RAKE group formation, RLS channel estimation and the
//!   recursive alternating least squares (RALS) loop that jointly tracks the
//!   receive filters and the group power allocation symbol by symbol.

pub mod adaptive;
pub mod config;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod rng;
pub mod signal;

pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
