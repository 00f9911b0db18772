//! Entropy of real-valued random variables after rounding to an idealized
//! floating-point format: exact discrete entropy, analytic approximations,
//! certified error terms, and a Monte-Carlo oracle.

pub mod bounds;
pub mod distributions;
pub mod entropy;
pub mod error;
pub mod format;
pub mod mc;
pub mod quadrature;
pub mod special;
pub mod sum;
pub mod sweep;

pub use distributions::{Distribution, Family, MultivariateGaussian};
pub use entropy::{EntropyComponents, EntropyReport};
pub use error::{Error, Result};
pub use format::{
    bin_size, build_grid, classify, classify_vec, encode, round_p, smooth_bin_size, Bin, BinClass,
    Encoded, FpFormat, Quantizer, Region, RepresentableGrid,
};
