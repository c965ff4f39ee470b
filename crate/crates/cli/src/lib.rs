//! Library side of the `far3` command: file formats, the ICP loop and the
//! benchmark and convergence harnesses.

pub mod bench;
pub mod convergence;
pub mod error;
pub mod icp;
pub mod io;
pub mod output;
pub mod solve;

pub use error::{CliError, Result};
