//! Fixing the light-matter coupling `g0`.
//!
//! Only the product `N_z g0` enters the displacements. `g0` is chosen so that
//! the linear entropy of the fundamental mode, in the fully conditioned state
//! at the reference point, equals a target value. The entropy falls
//! monotonically from its weak-coupling limit `2p(1 - p)`,
//! `p = |χ̄^(1)|² / Σ_q |χ̄^(q)|²`, so the target is reachable only below that
//! limit.

use thiserror::Error;

use crate::bands::Direction;
use crate::config::{Dephasing, SimulationConfig};
use crate::pipeline::{self, Simulation};
use crate::qoptics::{condition_full, linear_entropy, ModeDisplacements, StateError};
use crate::units::UnitSystem;

pub const TARGET_ENTROPY: f64 = 0.44;
/// Reference field (V/Å).
pub const REFERENCE_FIELD: f64 = 0.5;
pub const REFERENCE_ZONES: f64 = 6.6e6;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Pipeline(#[from] pipeline::Error),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("target entropy {target} exceeds the weak-coupling limit {limit:.4}")]
    Unreachable { target: f64, limit: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub g0: f64,
    /// Entropy reached at `g0`.
    pub entropy: f64,
    pub weak_limit: f64,
    /// `|χ̄^(1)|` at `g0`.
    pub fundamental: f64,
}

/// `cfg` with the reference point imposed: Γ-M, 0.5 V/Å, undamped, 6.6e6 zones.
pub fn reference_config(cfg: &SimulationConfig) -> SimulationConfig {
    SimulationConfig {
        direction: Direction::GammaM,
        field_amplitude: UnitSystem::CODATA.field_to_au(REFERENCE_FIELD),
        dephasing: Dephasing::Infinite,
        n_z: REFERENCE_ZONES,
        ..cfg.clone()
    }
}

pub fn calibrate(cfg: &SimulationConfig, target: f64) -> Result<Calibration, CalibrationError> {
    let reference = reference_config(cfg);
    let out = Simulation::new(reference)?.run()?;
    calibrate_displacements(&out.displacements, target)
}

/// Bisection in `log g0` on displacements computed once at any nonzero `g0`.
pub fn calibrate_displacements(d: &ModeDisplacements, target: f64) -> Result<Calibration, CalibrationError> {
    let total = d.total();
    let weight: f64 = total.iter().map(|z| z.norm_sqr()).sum();
    if weight == 0.0 {
        return Err(StateError::Annihilated.into());
    }
    let p = total[0].norm_sqr() / weight;
    let weak_limit = 2.0 * p * (1.0 - p);
    if target >= weak_limit {
        return Err(CalibrationError::Unreachable { target, limit: weak_limit });
    }
    let entropy_at = |g0: f64| -> Result<f64, StateError> {
        let scaled = d.rescaled(d.meta.n_z, g0);
        linear_entropy(&condition_full(&scaled.total())?, 1)
    };
    // |χ̄^(1)| ~ 1e-3 is deep in the weak regime, ~ 10 is fully classical
    let unit = d.meta.g0 / total[0].norm().max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = ((1e-3 * unit).ln(), (10.0 * unit).ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy_at(mid.exp())? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let g0 = (0.5 * (lo + hi)).exp();
    let fundamental = d.rescaled(d.meta.n_z, g0).total()[0].norm();
    Ok(Calibration { g0, entropy: entropy_at(g0)?, weak_limit, fundamental })
}
