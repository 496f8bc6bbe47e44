//! Special functions and series used by the energy-distribution formulas.
//!
//! All functions are pure; nothing here allocates shared state beyond the
//! cached quadrature rules.

mod gamma;
mod hypergeometric;
mod polynomials;
mod series;

pub use gamma::{beta, digamma, double_factorial, gamma, ln_double_factorial, ln_gamma, rgamma};
pub use hypergeometric::gauss_2f1;
pub(crate) use polynomials::laguerre_coefficients;
pub use polynomials::{hermite, laguerre};
pub use series::{p_max, s_series, SeriesResult};

/// Hard cap on explicit series terms; exceeding it is reported, never truncated silently.
pub const MAX_SERIES_TERMS: usize = 10_000_000;
