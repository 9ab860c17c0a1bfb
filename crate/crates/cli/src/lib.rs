//! Command-line simulator for optimal-transport exploration.
//!
//! [`config`] reads scenario documents, [`run`] executes seed batches and
//! writes their outputs through [`output`], and [`replay`] re-checks a
//! recorded snapshot log.

pub mod config;
pub mod output;
pub mod replay;
pub mod run;
