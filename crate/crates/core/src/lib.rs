//! Validated numerics for semilinear elliptic boundary value problems.
//!
//! This crate computes *machine-checked certificates* of existence and
//! positivity for weak solutions of
//!
//! ```text
//!     -Δu = f(u)  in Ω,      u = 0  on ∂Ω,
//! ```
//!
//! where `Ω` is an axis-aligned rectangle and `f(t) = λ t + Σᵢ aᵢ t |t|^{i-1}`
//! is a subcritical polynomial-type nonlinearity.  Every inequality that a
//! certificate depends on is established in directed-rounding interval
//! arithmetic, so a certificate that verifies is a proof up to the soundness
//! of the hardware's binary64 operations.
//!
//! The crate is organised bottom-up:
//!
//! * [`interval`] — self-contained interval arithmetic with outward rounding
//!   obtained from error-free transformations (no global FPU mode switching).
//! * [`legendre`] — shifted Legendre polynomials, the integrated Legendre
//!   basis that diagonalises the Dirichlet Laplacian on the unit square,
//!   verified Gauss quadrature rules, and rigorous range evaluation of
//!   spectral approximations.
//! * [`galerkin`] — non-rigorous floating-point spectral Galerkin solver
//!   (Newton iteration) used to produce candidate approximations.
//! * [`rigor`] — rigorous norms of spectral functions: residual norms,
//!   `L^q` norms, negative-part norms on subdivision grids, and
//!   provably-positive cell flags.
//! * [`eigen`] — verified symmetric (generalised) eigenvalue enclosures,
//!   spectral lower bounds for linearised operators, and rigorous
//!   inverse-norm bounds.
//! * [`certify`] — the Newton–Kantorovich existence test, the positivity
//!   checkers, strategy selection, and the end-to-end certification
//!   pipeline producing serialisable [`certify::Certificate`]s.

pub mod certify;
pub mod eigen;
pub mod galerkin;
pub mod interval;
pub mod legendre;
pub mod rigor;

pub(crate) mod affine;

pub use certify::{Certificate, ConstantsRegistry};
pub use galerkin::ProblemSpec;
pub use interval::Interval;
pub use legendre::{LegendreFunction, QuadratureRule, Rectangle};
