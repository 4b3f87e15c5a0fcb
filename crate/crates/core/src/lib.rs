//! Resource allocation for federated learning over an edge network.
//!
//! A macro base station aggregates models trained by `J` organizations. Each
//! organization's small base station collects sensor data over its own band,
//! trains on a co-located MEC server and uploads the model on one of `J`
//! orthogonal subcarriers. This crate chooses sensor bandwidths, MEC CPU
//! frequencies, SBS transmit powers and the subcarrier matching to minimize a
//! weighted mix of round latency, energy and packet-error-weighted data loss.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandwidth;
pub mod error;
pub mod latency_freq;
pub mod model;
pub mod power_sca;
pub mod scalar;
pub mod solver;
pub mod subcarrier;

pub use bandwidth::{optimal_bandwidth, optimal_bandwidth_all, BandwidthSolution};
pub use error::{Error, Result};
pub use latency_freq::{LatencyFreqSolution, LatencyOptions};
pub use model::{
    evaluate, packet_error, sensor_rate, uplink_rate, Allocation, CostBreakdown, OrgCost, Organization, Scenario,
    Sensor, SystemParams,
};
pub use power_sca::{PowerProblem, PowerResult, ScaParams};
pub use scalar::Scalar;
pub use solver::{full_power_assignment, greedy_assignment, joint_solve, solve, Scheme, SolveResult, SolverOptions};
pub use subcarrier::{hungarian, AssignCost, Assignment, CostMatrix};

pub type SystemParams64 = SystemParams<f64>;
pub type Sensor64 = Sensor<f64>;
pub type Organization64 = Organization<f64>;
pub type Scenario64 = Scenario<f64>;
pub type Allocation64 = Allocation<f64>;
pub type CostBreakdown64 = CostBreakdown<f64>;
pub type SolveResult64 = SolveResult<f64>;
pub type SolverOptions64 = SolverOptions<f64>;
pub type PowerProblem64 = PowerProblem<f64>;

pub type SystemParams32 = SystemParams<f32>;
pub type Scenario32 = Scenario<f32>;
pub type Allocation32 = Allocation<f32>;
pub type SolveResult32 = SolveResult<f32>;
pub type SolverOptions32 = SolverOptions<f32>;
