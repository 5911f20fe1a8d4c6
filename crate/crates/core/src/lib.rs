//! Simulation and analysis of actuated dissipative flows on networks.
//!
//! Pipe networks are refined into short segments, reduced to nodal density
//! dynamics and integrated in time. On top of that sit checks that the
//! dynamics are monotone in the nodal injections, and a robust optimal
//! control solver that uses this monotonicity to replace an uncertainty band
//! of injections by its two envelope scenarios.

pub mod dissipation;
pub mod dynamics;
pub mod io;
pub mod monotonicity;
pub mod network;
pub mod profile;
pub mod refine;
pub mod robust;
pub mod sampling;
pub mod simulator;

pub use dissipation::DissipationModel;
pub use dynamics::{nodal_rhs, nodal_rhs_feedback, Controls, Drive, Envelope, Injections};
pub use network::{Actuator, ActuatorRatio, Edge, InjectionSpec, Network, Node, Side};
pub use profile::TimeProfile;
pub use refine::{refine_network, RefinedNetwork};
pub use simulator::{default_step, simulate, suggest_step, Trajectory};
