#![no_std]

extern crate alloc;

pub mod analytic;
pub mod error;
pub mod fockspace;
pub mod hamiltonians;
pub mod linalg;
pub mod propagator;
pub mod revivals;

pub use error::{Error, Result};
