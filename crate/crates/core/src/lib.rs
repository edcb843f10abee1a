//! Resilience analysis of linear time-invariant systems against sparse
//! false-data-injection sensor attacks.
//!
//! The library quantifies how many sensors an attacker may corrupt before
//! state reconstruction from the remaining outputs breaks down. Two metrics
//! are computed:
//!
//! * the *sparse observability index* `delta_max` of a known `(A, C)` pair —
//!   the largest number of sensors whose removal (any choice) leaves the
//!   system observable ([`oracle`]);
//! * the *data-driven sparse observability index* `rho_max`, obtained from
//!   state/output trajectory data alone — exactly from attack-free data,
//!   conservatively from poisoned data ([`datadriven`]).
//!
//! [`numlin`] provides the tolerance-aware linear-algebra kernel (numerical
//! rank, kernels, eigenvalue clustering, exact sparsest-vector search),
//! [`sysmodel`] the system/trajectory/attack machinery, and [`harness`] the
//! CLI-facing drivers, CSV ingestion and report emission.

pub mod datadriven;
pub mod harness;
pub mod numlin;
pub mod oracle;
pub(crate) mod subsets;
pub mod sysmodel;

pub use datadriven::{dispatch_rho_max, InformativityVerdict, ResilienceReport};
pub use numlin::NumericalConfig;
pub use oracle::SparseObsResult;
pub use sysmodel::{DataMatrices, LtiSystem, ScenarioTag, Trajectory};
