//! Half-form corrected prequantum Hilbert spaces on flat geodesic phase spaces.
//!
//! The phase space of a flat torus `M = R^m / (L_1 Z × … × L_m Z)` is the
//! space of parametrized geodesics `x(t) = q + v t`, coordinatized by
//! `(q, v)`. The affine group `A₊ = { t ↦ a + b t : b > 0 }` acts on it from
//! the right by reparametrization, which yields
//!
//! * a unitary representation [`rho_rep::apply_rho`] of `A₊` on `L²(N)`,
//!   continuous but not differentiable in the group variable;
//! * a family of adapted complex structures indexed by the upper half plane,
//!   whose canonical bundles carry the half-form weights of [`halfform`];
//! * a trivial prequantum line bundle ([`prequantum`]);
//! * the Hilbert field over the upper half plane and its two unitary
//!   trivializations `A` and `B` ([`field`]), whose transition map is a
//!   homeomorphism but not a diffeomorphism.
//!
//! Functions on phase space come in two backends behind [`l2space::L2Function`]:
//! a discretized grid and a closed-form analytic family used as an oracle.
//!
//! The guide in `book/` walks through each piece with runnable snippets.

pub mod affine;
pub mod error;
pub mod field;
pub mod halfform;
pub mod l2space;
pub mod phasespace;
pub mod prequantum;
pub mod quadrature;
pub mod rho_rep;

pub use affine::{AffineElement, UpperHalfPlanePoint};
pub use error::{Error, Result};
pub use l2space::{AnalyticFunction, GridFunction, GridSpec, L2Function};
pub use phasespace::{PhasePoint, TorusConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/affine.md")]
    mod affine {}
    #[doc = include_str!("../../../book/src/phase_space.md")]
    mod phase_space {}
    #[doc = include_str!("../../../book/src/l2_backends.md")]
    mod l2_backends {}
    #[doc = include_str!("../../../book/src/representation.md")]
    mod representation {}
    #[doc = include_str!("../../../book/src/half_forms.md")]
    mod half_forms {}
    #[doc = include_str!("../../../book/src/prequantum.md")]
    mod prequantum {}
    #[doc = include_str!("../../../book/src/field.md")]
    mod field {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
