//! Numerical toolkit for the thin obstacle problem driven by the degenerate operator
//! `div(|x_{n+1}|^a grad u)`, `a in (-1, 1)`, on boxes in two and three dimensions.

pub mod blowup;
pub mod error;
pub mod frequency;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod par;
pub mod poly;
pub mod profiles;
pub mod scenario;
pub mod solver;
pub mod special;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GridSpec, Point, ScalarField};
