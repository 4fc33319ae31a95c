//! Scenery-flow laboratory: finite-resolution measures with guaranteed
//! mass enclosures, the zoom/translate scenery dynamics, and estimators for
//! conical densities, porosity, and dimension.

pub mod constructions;
pub mod error;
pub mod geom;
pub mod interval;
pub mod measure;
pub mod cones;
pub mod dimension;
pub mod porosity;
pub mod scenery;
pub mod spec;

pub use error::{MeasureError, Result};
pub use interval::MassInterval;
pub use measure::Measure;
