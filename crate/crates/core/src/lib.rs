//! Radial ground states of the Gross-Pitaevskii equation with a harmonic
//! trap and a focusing cubic term in dimensions `d >= 5`.
//!
//! Everything numerical is generic over a [`scalar::Real`] type; the aliases
//! below fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod error;
pub mod integrator;
pub mod models;
pub mod scalar;
pub mod series;
pub mod shooting;

pub use error::{Error, Result};

pub type ShootConfig64 = shooting::ShootConfig<f64>;
pub type GroundState64 = shooting::GroundState<f64>;
pub type SingularGroundState64 = shooting::SingularGroundState<f64>;
pub type ThetaOrbit64 = shooting::ThetaOrbit<f64>;
pub type Nondegeneracy64 = shooting::Nondegeneracy<f64>;
pub type ExponentPack64 = models::ExponentPack<f64>;
pub type CurvePoint64 = curve::CurvePoint<f64>;
pub type SeriesCoeffs64 = series::SeriesCoeffs<f64>;
