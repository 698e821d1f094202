//! Proximal points, Moreau envelopes and convex conjugates of weakly convex
//! functions, with the identities and sharp constants that connect them.
//!
//! A function is described by a [`FunctionSpec`]: a value oracle, optional
//! derivative oracles and closed forms, and a declared weak-convexity
//! modulus `rho`. Every operation checks the admissibility condition
//! `gamma * rho < 1` before it runs.

pub mod cli;
pub mod conjugate;
pub mod envelope;
pub mod error;
pub mod model;
pub mod nc;
pub mod numdiff;
pub mod prox;
pub mod report;
pub mod solver;
pub mod suites;
pub mod zoo;

pub use error::{Error, Result};
pub use model::{AxisBox, ExtendedReal, FunctionSpec, Hessian, Point};
pub use prox::{prox, ProxMode, ProxOptions, ProxResult};
pub use solver::{SolveCertificate, SolveMethod, SolverOptions};
pub use zoo::{make_function, ZooEntry};
