//! Numerical laboratory for distribution alignment on `R^3` and the rotation
//! group `SO(3)`.
//!
//! Three generative paradigms (DDPM, score matching, flow matching) are
//! implemented side by side in both spaces, together with the geometric
//! machinery they need: Rodrigues exponential/logarithm maps, geodesics,
//! the isotropic Gaussian distribution on `SO(3)`, noise schedules, a small
//! analytically differentiated MLP, seedable synthetic targets and an exact
//! assignment-based Wasserstein-1 metric.
//!
//! All numerical code is generic over the working scalar through
//! [`scalar::Scalar`]; the aliases at the crate root fix `f64`, which is what
//! the training pipeline and the tolerance contracts assume.

pub mod csvio;
pub mod error;
pub mod igso3;
pub mod lie;
pub mod net;
pub mod paradigms;
pub mod samples;
pub mod scalar;
pub mod schedule;
pub mod targets;
pub mod transport;

pub use error::{Error, Result};
pub use samples::Space;
pub use scalar::{cst, Scalar};
pub use transport::CostKind;

/// Working scalar for the double-precision lab types below.
pub type Real = f64;

pub type Vec3 = lie::Vec3<Real>;
pub type Mat3 = lie::Mat3<Real>;
pub type Rotation = lie::Rotation<Real>;
pub type RigidTransform = lie::RigidTransform<Real>;
pub type EulerAngles = lie::EulerAngles<Real>;
pub type IgSo3Table = igso3::IgSo3Table<Real>;
pub type DiscreteSchedule = schedule::DiscreteSchedule<Real>;
pub type VpSdeCoeffs = schedule::VpSdeCoeffs<Real>;
pub type Network = net::Network<Real>;
pub type AdamState = net::AdamState<Real>;
pub type SampleSet = samples::SampleSet<Real>;
pub type AlignmentTask = paradigms::AlignmentTask<Real>;
pub type TrainLog = paradigms::TrainLog<Real>;
