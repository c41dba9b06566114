//! Two-band semiconductor high-harmonic generation and the quantum-optical
//! state of the emitted light.
//!
//! The pipeline runs, for every canonical momentum `K` of a 1-D Brillouin-zone
//! grid, the two-band electron dynamics under a strong mid-IR pulse
//! ([`sbe`]), turns the trajectories into inter- and intraband matrix
//! elements and currents ([`currents`]), and integrates them against the
//! envelopes of a discrete harmonic mode comb to obtain coherent-state
//! displacements ([`qoptics`]). Conditioning on harmonic emission yields
//! coherent-state superpositions whose Wigner function, fidelity and
//! inter-mode linear entropy are available in closed form.

pub mod bands;
pub mod calibration;
pub mod config;
pub mod currents;
pub mod grid;
pub mod pipeline;
pub mod pulse;
pub mod qoptics;
pub mod sbe;
pub mod units;
pub mod validate;

pub use bands::{Band, BandModel, Direction};
pub use config::{load_config, ConfigError, Dephasing, SimulationConfig, Window};
pub use grid::{build_grids, GridError, KGrid, TimeGrid};
pub use pipeline::{Error, RunOutput, Simulation};
pub use pulse::{ModeSet, PulseSpec};
