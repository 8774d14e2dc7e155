//! Configuration, CSV persistence, and SVG figures.

pub mod config;
pub mod csv;
pub mod figures;
pub mod svg;
pub mod pipeline;
