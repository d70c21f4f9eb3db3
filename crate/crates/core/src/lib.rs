//! Network decompositions, covers and their applications in a simulated
//! CONGEST model.

pub mod cluster;
pub mod covers;
pub mod error;
pub mod graph;
pub mod mis;
pub mod netdecomp;
pub mod refine;
pub mod sim;

pub use error::{Error, Result};
