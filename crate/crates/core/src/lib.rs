//! Compiler from gate-level circuits to movement schedules for zoned
//! neutral-atom arrays.
//!
//! The pipeline is: [`circuit`] parsing and dependency DAG, ASAP staging in
//! [`scheduler`], placement annealing in [`placement`], AOD routing and
//! timeline assembly in [`router`], then fidelity estimation in
//! [`fidelity`]. [`sim`] replays a schedule on a statevector to check it
//! against the source circuit, and [`bench`] generates benchmark circuits.

pub mod architecture;
pub mod bench;
pub mod circuit;
pub mod compile;
pub mod fidelity;
pub mod placement;
pub mod router;
pub mod scheduler;
pub mod sim;
pub mod timing;

pub use architecture::{ArchitectureConfig, Occupancy, Site, Slot};
pub use circuit::{parse_circuit, parse_source, Circuit, GateDag, SourceFormat};
pub use compile::{compile, CompileError, CompileOptions, Compiled};
pub use fidelity::{evaluate_fidelity, FidelityReport, PhysicalParams};
pub use placement::SaParams;
pub use router::{RouterParams, Schedule};
pub use scheduler::{asap_schedule, StagePlan};
pub use timing::TimingModel;
