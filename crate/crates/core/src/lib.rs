//! A numerical laboratory for mixing and cutoff diagnostics of finite
//! Markov chains with symmetric support: exact heat kernels by
//! uniformization, worst-case distance profiles, mixing times, spectral and
//! isoperimetric constants, a checkable bound suite, and family sweeps.

pub mod analyzer;
pub mod bounds;
pub mod chain;
pub mod error;
pub mod families;
pub mod heat;
pub mod io;
pub mod output;
pub mod spectral;
pub mod stats;
pub mod sweep;

pub use analyzer::Analyzer;
pub use bounds::{BoundReport, BoundSuite};
pub use chain::{Chain, ChainMetrics};
pub use error::{Error, Result};
pub use families::{FamilyId, FamilySpec};
pub use heat::Distribution;
pub use spectral::SpectralSummary;
pub use stats::{MixingTimeResult, ProfilePoint};
pub use sweep::{SweepOutcome, SweepRecord, TrendVerdict, Verdict};
