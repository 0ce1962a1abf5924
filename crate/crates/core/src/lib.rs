//! Bearing rigidity analysis for multi-agent formations in R^d, R^d x S^1,
//! SE(3) and heterogeneous mixtures of them.

pub mod agents;
pub mod error;
pub mod graph;
pub mod io;
pub mod numeric;
pub mod report;
pub mod rigidity;
pub mod scenario;

pub use agents::{AgentState, Framework, MetricSpace, Orientation, SpaceAssignment};
pub use error::{Error, ErrorKind, Result};
pub use graph::{Edge, GraphKind, SensingGraph};
pub use numeric::TolerancePolicy;
