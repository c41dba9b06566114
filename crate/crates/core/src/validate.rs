//! Built-in invariant suite: each check pairs a production path with an
//! independent one.

use std::io::{self, Write};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Dephasing, SimulationConfig};
use crate::currents::fft_real;
use crate::grid::{build_grids, GridError};
use crate::pipeline::{Error, Simulation};
use crate::qoptics::fock::{purity_oracle, FockDensity};
use crate::qoptics::{condition_full, condition_ir, wigner_value, Branch, ConditionedState, WignerGrid};

pub const NORM_TOLERANCE: f64 = 1e-8;
pub const SOLVER_TOLERANCE: f64 = 1e-6;
pub const FFT_TOLERANCE: f64 = 1e-10;
pub const WIGNER_TOLERANCE: f64 = 1e-8;
pub const PURITY_TOLERANCE: f64 = 1e-10;

/// Deliberate corruption of one side of an oracle pair, to show the suite notices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Flips the sign of the dipole in the interband source of the state fed
    /// to the number-basis oracle.
    FlipDipoleSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Measured worst deviation.
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write_table<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{:<28} {:>12} {:>10}  result", "check", "deviation", "tolerance")?;
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            writeln!(out, "{:<28} {:>12.3e} {:>10.0e}  {verdict}", c.name, c.value, c.tolerance)?;
        }
        Ok(())
    }

    fn push(&mut self, name: &'static str, value: f64, tolerance: f64) {
        self.checks.push(Check { name, passed: value <= tolerance, value, tolerance });
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Runs every check for `cfg`. Only errors that prevent a check from running
/// are returned as `Err`; failed comparisons land in the report.
pub fn run_suite(cfg: &SimulationConfig, mutation: Mutation) -> Result<Report, Error> {
    let mut report = Report::default();
    let undamped = SimulationConfig { dephasing: Dephasing::Infinite, ..cfg.clone() };
    let sim = Simulation::new(undamped)?;
    let edge = sim.model().zone_edge();
    let probes: Vec<f64> = (0..9).map(|i| edge * (i as f64 / 4.0 - 1.0)).collect();

    let mut drift: f64 = 0.0;
    let mut solver_gap: f64 = 0.0;
    for &k in &probes {
        let tdse = sim.propagator().solve_tdse(sim.model(), k)?;
        drift = drift.max(tdse.max_norm_drift);
        let sbe = sim.propagator().solve_sbe(sim.model(), k, Dephasing::Infinite)?;
        let bloch = tdse.into_bloch();
        solver_gap = solver_gap.max(sup_diff(&bloch.n_c, &sbe.n_c)).max(sup_diff(&bloch.n_v, &sbe.n_v));
    }
    report.push("norm conservation", drift, NORM_TOLERANCE);
    report.push("tdse vs bloch equations", solver_gap, SOLVER_TOLERANCE);

    report.push("fft vs direct dft", fft_deviation(), FFT_TOLERANCE);

    let out = sim.run()?;
    let d = &out.displacements;
    let oracle_input = match mutation {
        Mutation::None => d.total(),
        Mutation::FlipDipoleSign => d.interband.iter().zip(&d.intraband).map(|(a, b)| b - a).collect(),
    };
    let state = condition_ir(&d.total())?.reduced(1)?;
    let oracle_state = condition_ir(&oracle_input)?.reduced(1)?;
    let grid = WignerGrid::covering(&state, 3.0, 21);
    let reach = grid.half * std::f64::consts::SQRT_2 + grid.center.norm();
    let n_max = crate::qoptics::fock::oracle_truncation(&oracle_state, reach);
    let rho = FockDensity::from_reduced(&oracle_state, n_max)?;
    let mut wigner_gap: f64 = 0.0;
    for ip in 0..grid.n {
        for ix in 0..grid.n {
            let beta = grid.point(ix, ip);
            wigner_gap = wigner_gap.max((wigner_value(&state, beta) - rho.wigner(beta)?).abs());
        }
    }
    wigner_gap = wigner_gap.max(random_wigner_deviation(40)?);
    report.push("wigner analytic vs fock", wigner_gap, WIGNER_TOLERANCE);

    let full = condition_full(&d.total())?;
    let mut purity_gap: f64 = 0.0;
    for q in 1..=full.modes() {
        let r = full.reduced(q)?;
        purity_gap = purity_gap.max((r.purity() - purity_oracle(&r)?).abs());
    }
    report.push("gram vs fock purity", purity_gap, PURITY_TOLERANCE);

    // a grid too coarse for the highest mode must be refused
    let mut coarse = cfg.clone();
    let omega = cfg.omega();
    while coarse.n_t > 16 && build_grids(&coarse).map_or(true, |(g, _)| g.nyquist_order(omega) >= cfg.q_cutoff as f64) {
        coarse.n_t /= 2;
    }
    let refused = matches!(build_grids(&coarse), Err(GridError::Nyquist { .. }));
    report.push("nyquist guard", if refused { 0.0 } else { 1.0 }, 0.0);

    Ok(report)
}

/// Worst deviation of the FFT from a direct DFT on a 256-sample signal.
pub fn fft_deviation() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(256);
    let x: Vec<f64> = (0..256).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = x.len();
    let fast = fft_real(&x);
    (0..n)
        .map(|m| {
            let slow: C64 = x
                .iter()
                .enumerate()
                .map(|(j, v)| C64::from_polar(*v, -std::f64::consts::TAU * ((m * j) % n) as f64 / n as f64))
                .sum();
            (slow - fast[m]).norm()
        })
        .fold(0.0, f64::max)
}

/// Analytic vs number-basis Wigner values on random two-branch states with
/// amplitudes up to 3 in modulus.
pub fn random_wigner_deviation(trials: usize) -> Result<f64, crate::qoptics::StateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < trials {
        let mut amp = |r: f64| C64::from_polar(rng.gen_range(0.0..r), rng.gen_range(0.0..std::f64::consts::TAU));
        let (a, b, w, beta) = (amp(3.0), amp(3.0), amp(1.5), amp(3.0));
        let s = ConditionedState::new(vec![Branch::new(C64::new(1.0, 0.0), vec![a]), Branch::new(w, vec![b])]);
        if s.norm_sqr() < 1e-3 {
            continue;
        }
        let r = s.reduced(1)?;
        let oracle = crate::qoptics::fock::wigner_oracle(&r, beta)?;
        worst = worst.max((wigner_value(&r, beta) - oracle).abs());
        done += 1;
    }
    Ok(worst)
}
