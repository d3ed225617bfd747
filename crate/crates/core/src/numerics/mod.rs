//! Quadrature and ODE integration.

pub mod ode;
pub mod quad;
