//! Growth rates of group extensions of subshifts of finite type.
//!
//! The crate covers Perron–Frobenius pressure and equilibrium states,
//! exact counting of trivial-holonomy periodic points of skew products,
//! the abelianized pressure function and its minimum, suspension-flow
//! root equations, and equidistribution of trivial-class orbits.

pub mod abelian;
pub mod cli;
pub mod equidist;
pub mod error;
pub mod extension;
pub mod groups;
mod linalg;
pub mod sft;
pub mod suspension;
pub mod thermo;

pub use error::{Error, Result};
pub use extension::{
    check_transitivity, count_trivial, count_trivial_radial_free, count_trivial_weighted, estimate_gurevich,
    estimate_gurevich_with, make_skew, trivial_counts, truncated_transfer_spr, CountMethod, CountOptions,
    CountSequence, GrowthEstimate, SkewSystem, Transitivity, Witness,
};
pub use groups::{Element, Group, GroupKind, Letter};
pub use sft::{Loop, Sft};
pub use thermo::{EdgePotential, MarkovMeasure};
