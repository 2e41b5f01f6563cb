//! Causal interventions in multivariate Ornstein-Uhlenbeck SDEs.
//!
//! An OU model `dX = B (X - A) dt + σ dW` is intervened on with `X^m := c`:
//! coordinate `m` is held at `c` and its equation removed. The surviving
//! coordinates again follow an OU model, so stationary laws of original and
//! intervened systems can be classified and computed in closed form and
//! checked against simulation.
//!
//! Modules:
//! - [`matkit`]: dense linear algebra (solves, `expm`, Cholesky, rank, Lyapunov).
//! - [`model`]: models, interventions and general SDEs.
//! - [`graph`]: dependence graphs and DOT output.
//! - [`stability`]: eigenvalue-free stability classification.
//! - [`stationary`]: stationary laws and closed forms.
//! - [`simulate`]: exact and Euler path simulation, coupled runs.
//! - [`cli`]: model files and the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod graph;
pub mod matkit;
pub mod model;
pub mod simulate;
pub mod stability;
pub mod stationary;

pub use error::{Error, Result};
pub use graph::{dependence_graph, DependenceGraph};
pub use matkit::{LinalgError, Matrix, Vector};
pub use model::{
    intervene_general, intervene_ou, intervene_seq, GeneralSde, Intervention, InterventionRecord,
    OuModel,
};
pub use simulate::{
    coupled_intervention_diff, coupled_paths, exact_transition, path_stats, simulate_general,
    simulate_paths, simulate_paths_recorded, Method, PathBundle, PathStats, Record, TimeGrid,
};
pub use stability::{classify, is_stable, spectral_abscissa, Classification, StabilityReport};
pub use stationary::{
    gamma_by_quadrature, section4_closed_forms, stationary_distribution, stationary_exists,
    GaussianLaw, PinnedCoordinate, Verdict,
};
