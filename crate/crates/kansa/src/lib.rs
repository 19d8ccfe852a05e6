//! Meshfree collocation for the 2D Poisson problem with thin-plate splines,
//! plus a Monte Carlo harness that tracks determinant sign, log-determinant
//! and extreme singular values of the collocation matrix under random
//! placement of the centers.

pub mod assembly;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod expr;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod sampling;
pub mod solver;

pub use assembly::{CollocationSet, KansaMatrix, RhsSpec, ScalarField};
pub use config::{DensitySpec, DomainSpec, GrowthSpec, RunConfig};
pub use error::{Error, Result};
pub use experiments::{
    ConvergenceReport, GrowthPolicy, Interleaving, ProbeReport, TrialRecord, UnisolvenceReport,
};
pub use expr::{parse_expression, Expression};
pub use geometry::{AnalyticCurve, BoundingBox, Domain, Point2};
pub use kernel::TpsKernel;
pub use linalg::{DetValue, LuFactorization, Matrix, SigmaReport};
pub use sampling::{BoundaryDensity, InteriorDensity, SeededGenerator};
pub use solver::{KansaSolution, ManufacturedCase, SolveDiagnostics};
