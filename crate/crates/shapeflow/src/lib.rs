//! File formats, image IO, SVG output and the command-line front end for
//! [`shapeflow_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod io;
pub mod number;
pub mod pgm;
pub mod svg;

pub use error::{Error, Result};
pub use shapeflow_core as core;
