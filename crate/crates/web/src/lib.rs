//! Browser bindings: band structure, a small simulation run and the Wigner
//! function of the conditioned fundamental mode.

use num_complex::Complex64 as C64;
use wasm_bindgen::prelude::*;

use hhgq::bands::Band;
use hhgq::qoptics::{condition_ir, wigner, WignerGrid, DEFAULT_PADDING};
use hhgq::{Simulation, SimulationConfig};

fn config(overrides: &[String]) -> Result<SimulationConfig, JsError> {
    let mut cfg = SimulationConfig::default();
    for o in overrides {
        cfg.apply_override(o).map_err(|e| JsError::new(&e.to_string()))?;
    }
    cfg.validate().map_err(|e| JsError::new(&e.to_string()))?;
    Ok(cfg)
}

/// Conduction and valence energies (eV) across the zone, flattened as
/// `[k·a/π, e_c, e_v, ...]`.
#[wasm_bindgen]
pub fn band_structure(direction: &str, points: usize) -> Result<Vec<f64>, JsError> {
    let cfg = config(&[format!("direction={direction}")])?;
    let model = cfg.band_model().ok_or_else(|| JsError::new("band parameters give no valid model"))?;
    let edge = model.zone_edge();
    let ev = hhgq::units::UnitSystem::CODATA.hartree_ev;
    let n = points.max(2);
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let k = edge * (2.0 * i as f64 / (n - 1) as f64 - 1.0);
        out.push(k / edge);
        out.push(model.energy(Band::Conduction, k) * ev);
        out.push(model.energy(Band::Valence, k) * ev);
    }
    Ok(out)
}

#[wasm_bindgen]
pub struct RunResult {
    orders: Vec<f64>,
    total_db: Vec<f64>,
    interband_db: Vec<f64>,
    intraband_db: Vec<f64>,
    chi: Vec<f64>,
}

#[wasm_bindgen]
impl RunResult {
    #[wasm_bindgen(getter)]
    pub fn orders(&self) -> Vec<f64> {
        self.orders.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn total_db(&self) -> Vec<f64> {
        self.total_db.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn interband_db(&self) -> Vec<f64> {
        self.interband_db.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn intraband_db(&self) -> Vec<f64> {
        self.intraband_db.clone()
    }
    /// Total displacements per mode, flattened as `[re, im, ...]`.
    #[wasm_bindgen(getter)]
    pub fn chi(&self) -> Vec<f64> {
        self.chi.clone()
    }
}

/// Runs a reduced-resolution simulation and returns the spectrum up to
/// `max_order` together with the mode displacements. `t2_fs <= 0` means no
/// dephasing.
#[wasm_bindgen]
pub fn simulate(direction: &str, e0_v_per_angstrom: f64, t2_fs: f64, n_k: usize, max_order: f64) -> Result<RunResult, JsError> {
    let t2 = if t2_fs > 0.0 { format!("t2_fs={t2_fs}") } else { "t2_fs=inf".into() };
    let cfg = config(&[
        format!("direction={direction}"),
        format!("e0_v_per_angstrom={e0_v_per_angstrom}"),
        t2,
        format!("n_k={}", n_k.max(3) | 1),
    ])?;
    let sim = Simulation::new(cfg).map_err(|e| JsError::new(&e.to_string()))?;
    let run = sim.run().map_err(|e| JsError::new(&e.to_string()))?;
    let spec = sim.spectrum(&run);
    let keep = spec.orders.iter().take_while(|o| **o <= max_order).count();
    let cut = |v: Vec<f64>| v.into_iter().take(keep).collect::<Vec<_>>();
    Ok(RunResult {
        orders: spec.orders[..keep].to_vec(),
        total_db: cut(spec.total_db()),
        interband_db: cut(spec.interband_db()),
        intraband_db: cut(spec.intraband_db()),
        chi: run.displacements.total().iter().flat_map(|c| [c.re, c.im]).collect(),
    })
}

/// Wigner function of the fundamental mode conditioned on harmonic emission,
/// for a displacement `chi_re + i chi_im`. Returns `[half, center_re,
/// center_im, w(0,0), w(1,0), ...]` on a `points × points` grid, x fastest.
#[wasm_bindgen]
pub fn conditioned_wigner(chi_re: f64, chi_im: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let state = condition_ir(&[C64::new(chi_re, chi_im)]).map_err(|e| JsError::new(&e.to_string()))?;
    let reduced = state.reduced(1).map_err(|e| JsError::new(&e.to_string()))?;
    let grid = WignerGrid::covering(&reduced, DEFAULT_PADDING, points.max(2));
    let map = wigner(&state, 1, grid).map_err(|e| JsError::new(&e.to_string()))?;
    let mut out = vec![map.grid.half, map.grid.center.re, map.grid.center.im];
    out.extend_from_slice(&map.values);
    Ok(out)
}
