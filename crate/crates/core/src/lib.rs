//! Clustering of discrete probability distributions under the squared
//! 2-Wasserstein distance.
//!
//! The centroid of a cluster is a Wasserstein barycenter with a fixed number
//! of support points. The default barycenter solver is a modified Bregman
//! ADMM ([`barycenter::badmm`]); exact-LP, ADMM, subgradient and entropic
//! baselines live next to it in [`barycenter`].

pub mod barycenter;
pub mod clustering;
pub mod dataio;
pub mod distribution;
pub mod error;
pub mod lp;
pub mod metrics;
pub mod simplex;
pub mod transport;

pub use barycenter::{objective, Budget, Centroid, SolveStats, WarmStart};
pub use distribution::{CostTable, DiscreteDistribution, Support};
pub use error::{Error, Result};
pub use transport::{cost_matrix, solve_transport, wasserstein2, wasserstein2_squared, CostMatrix, TransportPlan};
