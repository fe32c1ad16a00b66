//! Joint spectral radii for tuples of complex matrices relative to
//! operator-space structures on C^d, with the machinery around them:
//!
//! * [`matcore`] — dense complex matrix/tuple arithmetic, pencils, resolvents;
//! * [`opspace`] — row / column / min-ℓ∞ / max-ℓ1 / concrete-pencil structures
//!   and their matrix-level norms (exact where a formula exists, certified
//!   bounds otherwise);
//! * [`specrad`] — radius estimators, Hölder–Jordan reduction, and the
//!   similarity-to-ball decision procedure;
//! * [`similarity`] — optimization over invertible matrices S minimizing
//!   ‖S⁻¹XS‖ in a chosen structure, producing explicit witnesses;
//! * [`ncrat`] — noncommutative rational expressions, descriptor and
//!   Fornasini–Marchesini realizations, evaluation and domain analysis;
//! * [`casestudy`] — a fully worked 3×3 rational-function example used as an
//!   executable regression suite.

pub mod casestudy;
mod error;
pub mod matcore;
pub mod ncrat;
pub mod opspace;
pub mod similarity;
pub mod specrad;

pub(crate) mod sampling;

pub use error::{Error, Result};
