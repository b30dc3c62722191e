pub mod arith;
pub mod cli;
pub mod error;
pub mod fullness;
pub mod group_theory;
pub mod hecke;
pub mod howell;
pub mod ideals;
pub mod io;
pub mod matrix;
pub mod pink;
pub mod rings;
pub mod selftest;

pub use error::{IflError, Result};
