//! Pipeline library behind the `lpx` binary: configuration, file formats,
//! the five stage commands, and SVG rendering.

pub mod config;
pub mod io;
pub mod pipeline;
pub mod plot;
