//! Nevanlinna-theory quantities for holomorphic maps on discs and curves in
//! projective space, with numerical checks of the main inequalities.

pub mod error;
pub mod exact;
pub mod funcrep;
pub mod ldl;
pub mod precision;
pub mod quad;
pub mod runner;
pub mod nevan;
pub mod nochka;
pub mod projcurve;
pub mod zeros;

pub use error::{Error, Result};
pub use funcrep::{gallery, Disc, HoloMap, Lattice, ProjPoint, Target, TargetGeometry};
pub use num_complex::Complex64;
pub use projcurve::{Hyperplane, ProjCurve};
pub use quad::RadialGrid;
pub use runner::{run_experiment, ExceptionalSummary, ExperimentConfig, ExperimentKind, Outcome};
