//! Standard-library companion of `agentcomm-core`: TOML configs, CSV and
//! JSON-lines outputs, calibration files, exports, the parallel experiment
//! runner, the HTTP agent backend and the `agentcomm` CLI.

pub mod calibration;
pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod fsutil;
pub mod llm;
pub mod records;
pub mod runner;

pub use error::{Error, Result};
