//! Explicit sets and coefficient sequences that witness the sharpness of the
//! density tests.

pub mod auerbach;
pub mod hamming;
pub mod salat;
