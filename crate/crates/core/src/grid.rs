//! Uniform time and canonical-momentum grids.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::config::SimulationConfig;
use crate::pulse::PulseSpec;

/// Largest allowed time step in units of the optical period.
pub const MAX_STEP_PER_PERIOD: f64 = 1.0 / 400.0;
/// Largest allowed envelope value at the grid ends.
pub const ENVELOPE_EDGE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("time step {dt:.4} a.u. exceeds T_L/400 = {max_dt:.4} a.u.; use n_t >= {min_n_t}")]
    Resolution { dt: f64, max_dt: f64, min_n_t: usize },
    #[error("harmonic {q_cutoff} is above the Nyquist order {nyquist_order:.1}; use n_t >= {min_n_t}")]
    Nyquist { q_cutoff: usize, nyquist_order: f64, min_n_t: usize },
    #[error("envelope is {edge:.3e} of its peak at the grid ends; increase span_fwhm")]
    Span { edge: f64 },
}

/// `len` samples `start + i·step`, symmetric about `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Symmetric grid covering `[-half_span, half_span]` including both ends.
    pub fn symmetric(half_span: f64, len: usize) -> Self {
        Self { start: -half_span, step: 2.0 * half_span / (len - 1) as f64, len }
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.at(i))
    }

    /// Highest harmonic order of `omega` representable at this step.
    pub fn nyquist_order(&self, omega: f64) -> f64 {
        PI / (self.step * omega)
    }
}

/// `len` (odd) canonical momenta `(i - (len-1)/2)·step` with `step = 2π/(a·len)`,
/// i.e. one Brillouin zone sampled symmetrically about Γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGrid {
    pub step: f64,
    pub len: usize,
}

impl KGrid {
    pub fn new(lattice: f64, len: usize) -> Self {
        Self { step: TAU / (lattice * len as f64), len }
    }

    pub fn at(&self, i: usize) -> f64 {
        (i as f64 - (self.len - 1) as f64 / 2.0) * self.step
    }

    pub fn momenta(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.at(i))
    }

    /// Total span `len·step`; equals the zone width `2π/a`.
    pub fn span(&self) -> f64 {
        self.step * self.len as f64
    }
}

pub fn build_grids(cfg: &SimulationConfig) -> Result<(TimeGrid, KGrid), GridError> {
    let pulse = PulseSpec::from_config(cfg);
    let half = pulse.half_span(cfg.span_fwhm);
    let time = TimeGrid::symmetric(half, cfg.n_t);
    let omega = cfg.omega();
    let min_len = |max_step: f64| ((2.0 * half / max_step).ceil() as usize + 1).next_power_of_two();

    let nyquist_order = time.nyquist_order(omega);
    if (cfg.q_cutoff as f64) >= nyquist_order {
        return Err(GridError::Nyquist {
            q_cutoff: cfg.q_cutoff,
            nyquist_order,
            min_n_t: min_len(PI / (omega * (cfg.q_cutoff as f64 + 1.0))),
        });
    }
    let max_dt = cfg.period() * MAX_STEP_PER_PERIOD;
    if time.step > max_dt {
        return Err(GridError::Resolution { dt: time.step, max_dt, min_n_t: min_len(max_dt) });
    }
    let edge = pulse.envelope(time.start).max(pulse.envelope(time.end()));
    if edge >= ENVELOPE_EDGE_TOLERANCE {
        return Err(GridError::Span { edge });
    }
    let model = cfg.band_model().expect("validated config");
    Ok((time, KGrid::new(model.lattice(), cfg.n_k)))
}
