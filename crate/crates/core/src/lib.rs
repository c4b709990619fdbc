//! Stability chambers, polyhedral weight cones and the torus moment-map model
//! for a semistable bundle described by combinatorial data: an intersection
//! tensor, graded pieces with their first Chern classes, and the extension
//! quiver between them.
//!
//! All cohomological and cone computations are exact over the rationals.
//! Floating point only enters in [`momentmap`], where the moment-map equation
//! is solved numerically on the torus orbit.

pub mod bundle;
pub mod chambers;
pub mod cohomology;
pub mod cones;
pub mod error;
pub mod momentmap;
pub mod rational;

pub use bundle::{GradedBundle, InvariantSubset, Piece, Violation};
pub use chambers::{ChamberLabel, Label, SamplePlane, SamplePoint, SlopePolynomial};
pub use cohomology::{CohClass, IntersectionForm};
pub use cones::{DualGenerator, Membership, RationalCone, Weight};
pub use error::{Error, Result};
pub use momentmap::{
    DegenerationReport, KempfNess, MomentOrigin, MomentSolution, OrbitModel, SolveStatus,
};
pub use rational::Rational;
