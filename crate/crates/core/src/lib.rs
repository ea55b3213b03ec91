//! Dependency spectra of Boolean functions of correlated sources, the
//! maximal-correlation bounds on their disagreement, random-coding ensembles
//! and network rate bounds.

pub mod correlation;
pub mod decomposition;
pub mod ensemble;
pub mod error;
pub mod format;
mod linalg;
pub mod model;
pub mod netbounds;

pub use correlation::{psi, theorem_bounds, AgreementStats, CorrelationBoundReport, MaximalCorrelation};
pub use decomposition::{spectrum, DependencySpectrum};
pub use error::{Error, Result};
pub use model::{BooleanFunction, Marginal, PairSource, SubsetMask};
