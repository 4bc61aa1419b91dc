//! Slow, obviously-correct f64 reference implementations used by the test
//! suites to cross-check the fast engine.
//!
//! Everything here favours clarity over speed: direct summation in the order
//! the definitions are written, naive O(n^2) DFTs, numerical quadrature for
//! the Gaussian CDF. No dependency on the main crates, so these routines
//! cannot share a bug with the code they check.

pub mod color;
pub mod fd;
pub mod fft;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod synth;
