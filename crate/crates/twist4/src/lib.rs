//! Exact homological algebra for a three-parameter family of twisted
//! four-dimensional gauge theories.
//!
//! The crate is organized in two halves.
//!
//! The exact half works over arbitrary-precision rationals and covers:
//! graded vector spaces and Koszul signs ([`graded`]), exterior words
//! ([`exterior`]), polynomial differential forms ([`polyform`]), differential
//! graded Lie algebras with their twisting constructions ([`dglie`]),
//! Chevalley-Eilenberg cochain complexes ([`ce`]), spectral sequences of
//! filtered complexes ([`spectral`]), one-loop anomaly weights ([`anomaly`]),
//! symmetry breaking over a moduli of vacua ([`vacua`]), determinant lines
//! and observable counts over compact manifolds ([`facthom`]), and Weyl
//! algebras with their filtered relatives ([`weyl`]).
//!
//! The numeric half ([`heat`]) evaluates a gauge-fixed heat-kernel propagator
//! and verifies its defining identities by quadrature; it shares the
//! exterior-word machinery with the exact half but never feeds floating
//! point into a rank computation.
//!
//! # Conventions
//!
//! * The odd square-zero variable adjoined by
//!   [`dglie::DgLieAlgebra::epsilon_extend`] multiplies from the right and
//!   sits in degree `-1` by default (`+1` selectable).
//! * Weyl-algebra monomials are normal ordered with dual generators to the
//!   right.
//! * The holomorphic kernel in [`heat`] is normalized so that the
//!   one-variable case is `1 / (2 pi i (z - w))`.
//!
//! Reports produced by the command-line interface embed these conventions
//! explicitly; see [`conventions::Conventions`].

#![forbid(unsafe_code)]
// Structure-constant and block-matrix code below indexes several parallel
// tables with the same loop variable; iterator rewrites obscure the index
// arithmetic, so the range-loop lint is disabled crate-wide.
#![allow(clippy::needless_range_loop)]

pub mod anomaly;
pub mod ce;
pub mod conventions;
pub mod dglie;
pub mod exterior;
pub mod facthom;
pub mod graded;
pub mod heat;
pub mod linalg;
pub mod polyform;
pub mod scalar;
pub mod spectral;
pub mod vacua;
pub mod weyl;

pub use num::complex::Complex64;
pub use scalar::{rat, rint, Rational, Scalar};
