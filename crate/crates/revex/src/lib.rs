//! File formats, durable session storage, the reader-policy simulator and
//! the HTTP service built on top of `revex-core`.

pub mod config;
pub mod error;
pub mod io;
pub mod service;
pub mod simulate;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
