//! Conductance-based models of ten cortical, thalamic and hippocampal cells
//! with per-spike energy accounting by two independent routes: integrating
//! the channel energy function, and counting Na⁺ ions against the pump's
//! ATP stoichiometry.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cells;
pub mod energetics;
pub mod error;
pub mod format;
pub mod integrator;
pub mod kinetics;
pub mod sweep;
pub mod verify;

pub use cells::{registry, CellParams, CellState, CurrentBreakdown};
pub use energetics::{energy_report, Analysis, EnergyReport};
pub use error::{Error, Result};
pub use integrator::{integrate, Protocol, SpikeTrain, Trace};
pub use kinetics::{Family, GateId};
pub use sweep::{run_sweep, SweepGrid, SweepSettings};
