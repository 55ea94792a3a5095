//! Pseudoholomorphic Bishop discs attached to real hypersurfaces in almost
//! complex ℂⁿ.

pub mod geometry;
pub mod disc;
pub mod bishop;
pub mod family;
pub mod scenarios;
pub mod experiment;
