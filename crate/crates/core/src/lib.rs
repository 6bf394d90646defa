pub mod envelope;
pub mod error;
pub mod geometry;
pub mod hull;
pub mod io;
pub mod laminate;
mod linalg;
pub mod operator;
pub mod par;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
