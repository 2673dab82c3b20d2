//! Cross-currency random-field LIBOR market model.
//!
//! The crate prices foreign-LIBOR quanto caps, float-to-float cross-currency
//! swaps and options on the spot exchange rate when every forward rate of
//! both economies is driven by a single maturity-indexed Gaussian random
//! field. Closed-form (or frozen-drift approximate) pricers live in
//! [`pricers`]; [`mc`] simulates the discretized field under the domestic
//! terminal measure and is used to validate every approximation.
//!
//! Module map:
//!
//! - [`termstructure`]: tenor grid, initial curves, LIBOR / forward-FX maps
//! - [`modelspec`]: volatility surfaces, the field correlation function, regimes
//! - [`quadrature`]: Gauss-Legendre / trapezoid rules on boxes and prisms
//! - [`analytics`]: covariance blocks and the quanto drift and variance terms
//! - [`pricers`]: caplet, cap, swap and FX option valuation
//! - [`mc`]: field factorization, path simulation, deflated pricing
//! - [`market_io`]: JSON inputs and CSV outputs

pub mod analytics;
pub mod error;
pub mod market_io;
pub mod mc;
pub mod modelspec;
pub mod pricers;
pub mod quadrature;
pub mod termstructure;

pub use error::{Error, Result};
