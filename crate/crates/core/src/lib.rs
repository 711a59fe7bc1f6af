//! Numerical toolkit for the value distribution of ζ(s) near the critical
//! line and for its random Euler-product model.

pub mod avalues;
pub mod charfn;
pub mod density;
pub mod discrepancy;
pub mod error;
pub mod poly;
pub mod primes;
pub mod quadrature;
pub mod random_model;
pub mod rng;
pub mod special;
pub mod summation;
pub mod zeta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
