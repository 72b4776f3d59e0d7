//! Bound-state spectroscopy of a quantum particle on a plane, trapped in the
//! circular-well potential V(ρ) = μω²|ρ² − ρ₀²|/2: an oscillator well bent
//! around a circle of radius ρ₀, with a parabolic barrier bump at the center
//! (the "sombrero" profile).
//!
//! Everything is computed in dimensionless form: radii are measured in units
//! of sqrt(ħ/2μω) (so r = sqrt(2μω/ħ)·ρ) and energies in units of ħω
//! (ε = E/ħω). In these variables the radial problem splits at r = r₀ into an
//! inverted-oscillator region inside the rim and an ordinary oscillator
//! region outside it; both pieces are solved in closed form by confluent
//! hypergeometric functions and glued together by matching logarithmic
//! derivatives.
//!
//! Module map:
//! - [`hyp`]: confluent hypergeometric kernels (regular Kummer series with a
//!   cancellation monitor, Tricomi function via integral representation and
//!   downward recurrence).
//! - [`model`]: dimensionless parameter bookkeeping (unit maps, matching
//!   parameters, oscillator-limit quantum numbers).
//! - [`matching`]: inner/outer radial solutions, the matching determinant,
//!   level finding, curve continuation, clustering, capture radii and
//!   asymptotic fits.
//! - [`wavefn`]: normalized radial wavefunctions, densities, interior
//!   probability, node counts, and the probability-flux consistency check on
//!   level slopes.
//! - [`oracle`]: an independent finite-difference eigensolver (Sturm
//!   bisection on a staggered grid) used to validate the matching solver.
//! - [`cli`]: command-line front end with CSV/JSON emitters.
//!
//! Supporting numerics live in [`quad`] (adaptive Gauss–Kronrod quadrature)
//! and [`ode`] (adaptive Dormand–Prince integration).

pub mod cli;
pub mod hyp;
pub mod matching;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quad;
pub mod wavefn;
