//! Superpotentials, first integrals and first-order flows for the
//! cohomogeneity-one gradient Ricci soliton Hamiltonian system.

pub mod error;
pub mod exact_geometry;
pub mod exp_poly;
pub mod first_integrals;
pub mod ode_flow;
pub mod poly;
pub mod rational;
pub mod solutions;
pub mod superpotential;
pub mod surd;
pub mod weight_config;

pub use error::{Error, Result};
pub use exp_poly::ExpPoly;
pub use poly::{Coeff, Poly};
pub use rational::Rat;
pub use surd::{RadicalScalar, Surd};
pub use weight_config::Configuration;
