//! curvelab: exact invariants of complex plane curve germs.
//!
//! Everything revolves around one object: the symmetric map `q(j,k)` of
//! pairwise contact exponents between the Puiseux sheets of a germ. From it
//! the crate builds the combinatorial carrousel tree, reduces it to the
//! Eggers tree, derives the Eisenbud–Neumann splice diagram, and decides
//! whether two germs have the same embedded topology — equivalently, the
//! same outer Lipschitz geometry. Around that core sit a genericity test
//! and projection search for space-curve germs, the carrousel decomposition
//! of the ambient ball into B/A/D/B(1) pieces with exact rational constants,
//! and a floating-point laboratory that recovers the same invariants from
//! sampled section points as a cross-check.
//!
//! All symbolic computation is exact: big rationals, Gaussian rationals, and
//! root-of-unity tagged coefficients. Floating point appears only in the
//! `probe` module and in SVG section rendering.

pub mod carrousel;
pub mod contact;
pub mod decomposition;
pub mod error;
pub mod probe;
pub mod projection;
pub mod puiseux;
pub mod scalar;
pub mod splice;

pub use error::{CurveError, ParseError};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::puiseux::{parse_curve, Curve};

    /// The running two-branch example `y = x^{3/2} + x^{13/6}, y = x^{7/3}`.
    pub(crate) fn example_curve() -> Curve {
        parse_curve("y = x^(3/2) + x^(13/6)\ny = x^(7/3)").unwrap()
    }
}
