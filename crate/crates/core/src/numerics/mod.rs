//! Special functions, quadrature, root finding and ODE integration shared by
//! the diffraction and trajectory models.

mod bessel;
mod hermite;
pub mod ode;
mod quadrature;
mod roots;
mod spline;

pub use bessel::bessel_j0;
pub(crate) use bessel::j0;
pub use hermite::gauss_hermite;
pub use ode::{OdeSpec, Termination};
pub use quadrature::{
    integrate_adaptive, integrate_piecewise, integrate_real, QuadResult, QuadratureSpec,
};
pub use roots::bisect;
pub(crate) use roots::bisect_by;
pub use spline::CubicSpline;
