//! Finite-element simulation of thin-film free boundary problems on moving
//! 2d supports with dynamic contact angle.
//!
//! The evolving object is an ALE pair (psi, h) on a fixed reference mesh: a
//! deformation map carrying the support and a height field over it. The crate
//! provides the transient model (decoupled three-step scheme), its weak- and
//! strong-dissipation limits, Richardson-extrapolated time stepping, and the
//! diagnostic/benchmark machinery around them.

pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod mesh;
pub mod physics;
pub mod quasistatic;
pub mod state;
pub mod stepper;
pub mod transient;

pub use error::{CoreError, CoreResult};
pub use fem::{CellType, FeSpace, Field};
pub use mesh::{BoundaryTag, ReferenceMesh};
pub use physics::{EnergyReport, MobilityLaws, PhysicsParams};
pub use state::{AleState, Event, NumericsParams};
pub use stepper::{Scheme, StepperConfig};
