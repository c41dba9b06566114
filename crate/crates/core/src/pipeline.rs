//! End-to-end run: band model and pulse, per-momentum dynamics, currents,
//! spectrum and mode displacements.
//!
//! Momenta are processed in fixed-size batches. Inside a batch they are solved
//! in parallel; results are then folded into the accumulators in ascending
//! momentum order, so the output does not depend on the thread count.

use thiserror::Error;

use crate::bands::BandModel;
use crate::config::{ConfigError, SimulationConfig};
use crate::currents::{
    hhg_spectrum, matrix_elements, CurrentAccumulator, CurrentTrace, CurrentsError, MatrixElements, SpectrumTrace,
};
use crate::grid::{build_grids, GridError, KGrid, TimeGrid};
use crate::pulse::{mode_envelopes, ModeEnvelopes, ModeSet, PulseSpec};
use crate::qoptics::{
    mode_displacement, DisplacementAccumulator, DisplacementMeta, KDisplacement, ModeDisplacements, StateError,
};
use crate::sbe::{Propagator, SbeTrajectory, SolverError};

/// Momenta solved together before their results are reduced.
pub const BATCH: usize = 32;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("sbe: {0}")]
    Solver(#[from] SolverError),
    #[error("currents: {0}")]
    Currents(#[from] CurrentsError),
    #[error("qoptics: {0}")]
    State(#[from] StateError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Numerical failures as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Grid(_) | Error::Solver(_) | Error::Currents(_) | Error::State(_))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub currents: CurrentTrace,
    pub displacements: ModeDisplacements,
    /// Per-momentum displacements in grid order.
    pub per_k: Vec<KDisplacement>,
    /// Largest invariant drift over all momenta.
    pub max_drift: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimulationConfig,
    model: BandModel,
    pulse: PulseSpec,
    modes: ModeSet,
    grid: TimeGrid,
    kgrid: KGrid,
    propagator: Propagator,
    envelopes: ModeEnvelopes,
}

impl Simulation {
    pub fn new(cfg: SimulationConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let model = cfg.band_model().ok_or(ConfigError::Invariant {
            key: "e_g_au",
            reason: "band gap closes somewhere in the zone".into(),
        })?;
        let (grid, kgrid) = build_grids(&cfg)?;
        let pulse = PulseSpec::from_config(&cfg);
        let modes = ModeSet::from_config(&cfg);
        let propagator = Propagator::new(&pulse, &grid, cfg.rk_substeps);
        let envelopes = mode_envelopes(&pulse, &modes, &grid);
        Ok(Self { cfg, model, pulse, modes, grid, kgrid, propagator, envelopes })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn model(&self) -> &BandModel {
        &self.model
    }

    pub fn pulse(&self) -> &PulseSpec {
        &self.pulse
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn kgrid(&self) -> &KGrid {
        &self.kgrid
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn trajectory(&self, k: f64) -> Result<SbeTrajectory, Error> {
        Ok(self.propagator.solve(&self.model, k, self.cfg.dephasing)?)
    }

    /// Dynamics, matrix elements and displacement at one momentum.
    pub fn solve_k(&self, k: f64) -> Result<(MatrixElements, KDisplacement, f64), Error> {
        let traj = self.trajectory(k)?;
        let m = matrix_elements(&traj, &self.model, &self.pulse, &self.grid)?;
        let d = mode_displacement(&m, &self.modes, &self.envelopes, &self.grid);
        Ok((m, d, traj.max_drift))
    }

    pub fn meta(&self) -> DisplacementMeta {
        DisplacementMeta {
            n_z: self.cfg.n_z,
            g0: self.cfg.g0,
            dephasing: self.cfg.dephasing,
            field_amplitude: self.cfg.field_amplitude,
            direction: self.cfg.direction,
        }
    }

    pub fn run(&self) -> Result<RunOutput, Error> {
        let mut currents = CurrentAccumulator::new(&self.kgrid, self.grid.len);
        let mut displacements = DisplacementAccumulator::new(&self.kgrid, self.modes.q_cutoff);
        let mut per_k = Vec::with_capacity(self.kgrid.len);
        let mut max_drift: f64 = 0.0;
        let momenta: Vec<f64> = self.kgrid.momenta().collect();
        for batch in momenta.chunks(BATCH) {
            for result in self.solve_batch(batch) {
                let (m, d, drift) = result?;
                currents.add(&m);
                displacements.add(&d);
                per_k.push(d);
                max_drift = max_drift.max(drift);
            }
        }
        Ok(RunOutput {
            currents: currents.finish(&self.grid),
            displacements: displacements.finish(self.meta()),
            per_k,
            max_drift,
        })
    }

    #[cfg(feature = "parallel")]
    fn solve_batch(&self, batch: &[f64]) -> Vec<Result<(MatrixElements, KDisplacement, f64), Error>> {
        use rayon::prelude::*;
        batch.par_iter().map(|&k| self.solve_k(k)).collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn solve_batch(&self, batch: &[f64]) -> Vec<Result<(MatrixElements, KDisplacement, f64), Error>> {
        batch.iter().map(|&k| self.solve_k(k)).collect()
    }

    pub fn spectrum(&self, out: &RunOutput) -> SpectrumTrace {
        hhg_spectrum(&out.currents, &self.grid, self.cfg.omega(), self.cfg.window)
    }

    /// Harmonic orders of the smallest and largest band gap.
    pub fn gap_orders(&self) -> (f64, f64) {
        self.model.gap_extrema_orders(self.cfg.omega())
    }
}
