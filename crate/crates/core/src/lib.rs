#![no_std]
#![doc = include_str!("../README.md")]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod fan;
pub mod field;
pub mod fiber;
pub mod index;
pub mod coeff;
pub mod correspondence;
pub mod currents;
pub mod complex;
pub mod jet;
pub mod lattice;
pub mod linalg;
pub mod measures;
pub mod poly;
pub mod quadrature;
pub mod plucker;
pub mod polyhedron;
pub mod positivity;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Coord, Gaussian, Rational};
