//! Expanded mixed finite elements for slightly compressible generalized
//! Forchheimer flow.

pub mod cli;
pub mod error;
pub mod law;
pub mod mesh;
pub mod mms;
pub mod quadrature;
pub mod solver;
pub mod spaces;

pub use error::{Error, Result};
pub use law::{DegeneracyExponents, ForchheimerLaw};
pub use mesh::{Point, TriMesh};
pub use quadrature::QuadratureRule;
pub use spaces::{DofMap, FormBlocks, Spaces};
pub use solver::{initial_state, DiscreteState, LinearSolve, RunOutput, Solver, SolverConfig, StepDiagnostics};
pub use mms::{convergence_study, ConvergenceReport, ErrorNorms, ManufacturedSolution, StudyConfig, TimeStepPolicy};
