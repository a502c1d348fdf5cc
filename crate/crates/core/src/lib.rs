//! Vaccination site selection and dose allocation with efficiency, equity
//! and accessibility objectives.
//!
//! * [`instance`]: problem data, validation, distances, JSON files and a
//!   planted-cluster generator.
//! * [`formulation`]: solutions, the feasibility check and the objective.
//! * [`exact_solver`]: an exact optimizer for small instances and a brute
//!   force reference solver.
//! * [`fair_kmeans`]: weighted clustering with silhouette model selection
//!   and per-cluster site choice.
//! * [`reduced_alloc`]: the cluster-level allocation model and the complete
//!   clustering heuristic.
//! * [`harness`]: comparison reports, fairness metrics, CSV and SVG output.

pub mod error;
pub mod exact_solver;
pub mod fair_kmeans;
pub mod formulation;
pub mod harness;
pub mod instance;
pub mod reduced_alloc;

pub use error::{Error, Result};
