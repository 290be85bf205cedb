//! Oblique greedy pursuits for sparse recovery with a sensing matrix and a
//! separate dual matrix, together with random frame sensing constructions,
//! exact small-scale restricted constants and experiment harnesses.

pub mod certificates;
pub mod dictionaries;
pub mod error;
pub mod experiments;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod pursuits;

pub use error::{Error, Result};
