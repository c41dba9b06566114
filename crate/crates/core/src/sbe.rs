//! Per-momentum electron dynamics in the two-band model.
//!
//! For a fixed canonical momentum `K` the electron sees the band structure at
//! `k = K + A(t)`. Two equivalent descriptions are integrated:
//!
//! * amplitudes `b_v, b_c` of the two-band Schrödinger equation, with the
//!   interband coupling `E(t) d_vc(k)`;
//! * populations `n_v, n_c` and coherence `π = b_v* b_c` (Bloch equations),
//!   where a finite `T2` damps `π` only.
//!
//! Both are stepped with classical RK4 in the frame co-rotating with the
//! instantaneous band energies: the fast phases `∫E_m dt` are integrated
//! separately (Simpson) and only the slow, field-driven part goes through RK4.
//! Every grid interval is split into `substeps` RK4 steps; outputs land on the
//! shared time grid.

use std::io::{self, Write};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::bands::BandModel;
use crate::config::Dephasing;
use crate::grid::TimeGrid;
use crate::pulse::PulseSpec;
use crate::units::UnitSystem;

/// Largest tolerated drift of a conserved quantity before a run is rejected.
pub const DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error(
        "K = {k:.5}: conserved quantity drifted by {drift:.2e} (limit {limit:.0e}); \
         use rk_substeps >= {substeps} or n_t >= {n_t}"
    )]
    Resolution { k: f64, drift: f64, limit: f64, substeps: usize, n_t: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Tdse,
    Sbe,
}

#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub k: f64,
    pub valence: Vec<C64>,
    pub conduction: Vec<C64>,
    /// Largest `| |b_v|² + |b_c|² - 1 |` seen at any substep.
    pub max_norm_drift: f64,
}

impl AmplitudeTrajectory {
    pub fn conduction_population(&self) -> Vec<f64> {
        self.conduction.iter().map(|b| b.norm_sqr()).collect()
    }

    pub fn into_bloch(self) -> SbeTrajectory {
        let n_v = self.valence.iter().map(|b| b.norm_sqr()).collect();
        let n_c = self.conduction.iter().map(|b| b.norm_sqr()).collect();
        let coherence = self.valence.iter().zip(&self.conduction).map(|(v, c)| v.conj() * c).collect();
        SbeTrajectory {
            k: self.k,
            n_v,
            n_c,
            coherence,
            provenance: Provenance::Tdse,
            max_drift: self.max_norm_drift,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SbeTrajectory {
    pub k: f64,
    pub n_v: Vec<f64>,
    pub n_c: Vec<f64>,
    /// `π = b_v* b_c`.
    pub coherence: Vec<C64>,
    pub provenance: Provenance,
    /// Largest drift of the monitored invariant (population sum, and the
    /// Bloch-vector length when undamped).
    pub max_drift: f64,
}

impl SbeTrajectory {
    pub fn len(&self) -> usize {
        self.n_v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_v.is_empty()
    }

    /// Writes `t_fs, n_v, n_c, re_pi, im_pi` rows.
    pub fn write_csv<W: Write>(&self, grid: &TimeGrid, mut out: W) -> io::Result<()> {
        let u = UnitSystem::CODATA;
        writeln!(out, "t_fs,n_v,n_c,re_pi,im_pi")?;
        for i in 0..self.len() {
            let p = self.coherence[i];
            writeln!(out, "{},{},{},{},{}", u.au_to_fs(grid.at(i)), self.n_v[i], self.n_c[i], p.re, p.im)?;
        }
        Ok(())
    }
}

/// Field and vector potential tabulated at every half substep of a grid.
/// Shared read-only by all momenta.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: TimeGrid,
    substeps: usize,
    field: Vec<f64>,
    potential: Vec<f64>,
}

/// Drive seen by one RK4 stage.
#[derive(Clone, Copy)]
struct Stage {
    /// `E(t) d_vc(K + A(t))`.
    coupling: f64,
    /// `e^{iθ(t)}`, `θ = ∫ (E_c - E_v)`.
    rotor: C64,
}

trait Axpy: Copy {
    /// `self + a·x`
    fn axpy(self, a: f64, x: Self) -> Self;
}

impl Axpy for [C64; 2] {
    fn axpy(self, a: f64, x: Self) -> Self {
        [self[0] + x[0] * a, self[1] + x[1] * a]
    }
}

#[derive(Clone, Copy)]
struct Bloch {
    n_v: f64,
    n_c: f64,
    /// Coherence in the rotating frame, `π e^{iθ}`.
    p: C64,
}

impl Axpy for Bloch {
    fn axpy(self, a: f64, x: Self) -> Self {
        Bloch { n_v: self.n_v + a * x.n_v, n_c: self.n_c + a * x.n_c, p: self.p + x.p * a }
    }
}

fn rk4<S: Axpy>(y: S, h: f64, stages: &[Stage; 3], rhs: impl Fn(&S, &Stage) -> S) -> S {
    let k1 = rhs(&y, &stages[0]);
    let k2 = rhs(&y.axpy(0.5 * h, k1), &stages[1]);
    let k3 = rhs(&y.axpy(0.5 * h, k2), &stages[1]);
    let k4 = rhs(&y.axpy(h, k3), &stages[2]);
    y.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4)
}

/// Accumulated phases `∫E_v` and `θ = ∫(E_c - E_v)` at the current time.
#[derive(Clone, Copy, Default)]
struct Phases {
    valence: f64,
    gap: f64,
}

impl Propagator {
    pub fn new(pulse: &PulseSpec, grid: &TimeGrid, substeps: usize) -> Self {
        assert!(substeps >= 1 && grid.len >= 2);
        let n = 2 * substeps * (grid.len - 1) + 1;
        let h = grid.step / (2 * substeps) as f64;
        let (field, potential) = (0..n).map(|j| pulse.field_and_potential(grid.start + h * j as f64)).unzip();
        Self { grid: *grid, substeps, field, potential }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn substeps(&self) -> usize {
        self.substeps
    }

    /// Walks the fine grid, calling `step(stages, h)` for every substep and
    /// `record(i, phases)` at every grid point `i` (after the step landing there).
    fn walk(
        &self,
        model: &BandModel,
        k: f64,
        mut step: impl FnMut(&[Stage; 3], f64),
        mut record: impl FnMut(usize, Phases),
    ) {
        let h = self.grid.step / self.substeps as f64;
        let sample = |j: usize| {
            let p = model.eval(k + self.potential[j]);
            (self.field[j] * p.dipole, p.valence, p.gap())
        };
        let mut phases = Phases::default();
        let (mut c0, mut ev0, mut eg0) = sample(0);
        record(0, phases);
        for i in 0..self.grid.len - 1 {
            for s in 0..self.substeps {
                let j = 2 * (i * self.substeps + s);
                let (cm, evm, egm) = sample(j + 1);
                let (c1, ev1, eg1) = sample(j + 2);
                let mid = Phases {
                    valence: phases.valence + h / 24.0 * (5.0 * ev0 + 8.0 * evm - ev1),
                    gap: phases.gap + h / 24.0 * (5.0 * eg0 + 8.0 * egm - eg1),
                };
                let end = Phases {
                    valence: phases.valence + h / 6.0 * (ev0 + 4.0 * evm + ev1),
                    gap: phases.gap + h / 6.0 * (eg0 + 4.0 * egm + eg1),
                };
                let stages = [
                    Stage { coupling: c0, rotor: C64::cis(phases.gap) },
                    Stage { coupling: cm, rotor: C64::cis(mid.gap) },
                    Stage { coupling: c1, rotor: C64::cis(end.gap) },
                ];
                step(&stages, h);
                phases = end;
                (c0, ev0, eg0) = (c1, ev1, eg1);
            }
            record(i + 1, phases);
        }
    }

    /// Two-band Schrödinger equation from `b_v = 1, b_c = 0`.
    pub fn solve_tdse(&self, model: &BandModel, k: f64) -> Result<AmplitudeTrajectory, SolverError> {
        let n = self.grid.len;
        let mut valence = Vec::with_capacity(n);
        let mut conduction = Vec::with_capacity(n);
        // rotating-frame amplitudes c_m = b_m e^{iΦ_m}
        let mut max_drift: f64 = 0.0;
        let rhs = |y: &[C64; 2], st: &Stage| {
            let mi = C64::new(0.0, -st.coupling);
            [mi * st.rotor.conj() * y[1], mi * st.rotor * y[0]]
        };
        let cell = std::cell::Cell::new([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        self.walk(
            model,
            k,
            |stages, h| {
                let next = rk4(cell.get(), h, stages, rhs);
                max_drift = max_drift.max((next[0].norm_sqr() + next[1].norm_sqr() - 1.0).abs());
                cell.set(next);
            },
            |_, ph| {
                let c = cell.get();
                valence.push(c[0] * C64::cis(-ph.valence));
                conduction.push(c[1] * C64::cis(-(ph.valence + ph.gap)));
            },
        );
        let traj = AmplitudeTrajectory { k, valence, conduction, max_norm_drift: max_drift };
        self.check(k, max_drift)?;
        Ok(traj)
    }

    /// Bloch equations from `n_v = 1, n_c = 0, π = 0`.
    pub fn solve_sbe(&self, model: &BandModel, k: f64, dephasing: Dephasing) -> Result<SbeTrajectory, SolverError> {
        let n = self.grid.len;
        let gamma = dephasing.rate();
        let undamped = dephasing.is_infinite();
        let mut n_v = Vec::with_capacity(n);
        let mut n_c = Vec::with_capacity(n);
        let mut coherence = Vec::with_capacity(n);
        let rhs = |y: &Bloch, st: &Stage| {
            // π = p e^{-iθ}
            let pi = y.p * st.rotor.conj();
            let dn = 2.0 * st.coupling * pi.im;
            Bloch {
                n_v: dn,
                n_c: -dn,
                p: -y.p * gamma + C64::new(0.0, -st.coupling * (y.n_v - y.n_c)) * st.rotor,
            }
        };
        let state = std::cell::Cell::new(Bloch { n_v: 1.0, n_c: 0.0, p: C64::new(0.0, 0.0) });
        let mut max_drift: f64 = 0.0;
        self.walk(
            model,
            k,
            |stages, h| {
                let y = rk4(state.get(), h, stages, rhs);
                let mut drift = (y.n_v + y.n_c - 1.0).abs();
                if undamped {
                    let w = y.n_v - y.n_c;
                    drift = drift.max((4.0 * y.p.norm_sqr() + w * w - 1.0).abs());
                }
                max_drift = max_drift.max(drift);
                state.set(y);
            },
            |_, ph| {
                let y = state.get();
                n_v.push(y.n_v);
                n_c.push(y.n_c);
                coherence.push(y.p * C64::cis(-ph.gap));
            },
        );
        self.check(k, max_drift)?;
        Ok(SbeTrajectory { k, n_v, n_c, coherence, provenance: Provenance::Sbe, max_drift })
    }

    /// Bloch-equation trajectory by whichever route the dephasing calls for:
    /// amplitudes when undamped, Bloch equations otherwise.
    pub fn solve(&self, model: &BandModel, k: f64, dephasing: Dephasing) -> Result<SbeTrajectory, SolverError> {
        match dephasing {
            Dephasing::Infinite => self.solve_tdse(model, k).map(AmplitudeTrajectory::into_bloch),
            Dephasing::Finite(_) => self.solve_sbe(model, k, dephasing),
        }
    }

    fn check(&self, k: f64, drift: f64) -> Result<(), SolverError> {
        if drift <= DRIFT_LIMIT {
            return Ok(());
        }
        // local error ~ h^4: scale the step to bring the drift under the limit
        let factor = (drift / DRIFT_LIMIT).powf(0.25) * 1.2;
        let substeps = (self.substeps as f64 * factor).ceil() as usize;
        let n_t = (((self.grid.len - 1) as f64 * factor).ceil() as usize + 1).next_power_of_two();
        Err(SolverError::Resolution { k, drift, limit: DRIFT_LIMIT, substeps, n_t })
    }
}

/// Convenience wrapper building a one-off [`Propagator`].
pub fn solve_tdse(
    model: &BandModel,
    pulse: &PulseSpec,
    k: f64,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<AmplitudeTrajectory, SolverError> {
    Propagator::new(pulse, grid, substeps).solve_tdse(model, k)
}

pub fn solve_sbe(
    model: &BandModel,
    pulse: &PulseSpec,
    k: f64,
    dephasing: Dephasing,
    grid: &TimeGrid,
    substeps: usize,
) -> Result<SbeTrajectory, SolverError> {
    Propagator::new(pulse, grid, substeps).solve_sbe(model, k, dephasing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimulationConfig;
    use crate::grid::build_grids;

    struct Setup {
        model: BandModel,
        pulse: PulseSpec,
        grid: TimeGrid,
        prop: Propagator,
    }

    fn setup(amplitude_scale: f64) -> Setup {
        let cfg = SimulationConfig::default();
        let (grid, _) = build_grids(&cfg).unwrap();
        let mut pulse = PulseSpec::from_config(&cfg);
        pulse.amplitude *= amplitude_scale;
        let model = cfg.band_model().unwrap();
        let prop = Propagator::new(&pulse, &grid, cfg.rk_substeps);
        Setup { model, pulse, grid, prop }
    }

    fn fs(x: f64) -> Dephasing {
        Dephasing::Finite(UnitSystem::CODATA.fs_to_au(x))
    }

    #[test]
    fn free_evolution_is_a_phase() {
        let s = setup(0.0);
        let k = 0.2;
        let traj = s.prop.solve_tdse(&s.model, k).unwrap();
        let ev = s.model.eval(k).valence;
        for i in (0..s.grid.len).step_by(257) {
            let phase = ev * (s.grid.at(i) - s.grid.start);
            let expected = C64::cis(-phase);
            // round-off of a phase accumulated over ~10^5 substeps
            let err = (traj.valence[i] - expected).norm();
            assert!(err < 1e-12 * (1.0 + phase.abs()) * 100.0, "{err}");
            assert_eq!(traj.conduction[i], C64::new(0.0, 0.0));
        }
        let sbe = s.prop.solve_sbe(&s.model, k, fs(1.0)).unwrap();
        assert!(sbe.n_v.iter().all(|n| *n == 1.0));
        assert!(sbe.coherence.iter().all(|p| p.norm() == 0.0));
    }

    #[test]
    fn norm_is_conserved_at_defaults() {
        let s = setup(1.0);
        for k in [-0.5, -0.2, 0.0, 0.13, 0.4] {
            let traj = s.prop.solve_tdse(&s.model, k).unwrap();
            assert!(traj.max_norm_drift < 1e-8, "{k}: {}", traj.max_norm_drift);
            let bloch = traj.into_bloch();
            for i in 0..bloch.len() {
                assert!(bloch.coherence[i].norm_sqr() <= bloch.n_v[i] * bloch.n_c[i] + 1e-10);
            }
        }
    }

    #[test]
    fn bloch_equations_reproduce_amplitudes() {
        let s = setup(1.0);
        for k in [-0.3, 0.0, 0.21] {
            let tdse = s.prop.solve_tdse(&s.model, k).unwrap().into_bloch();
            for dephasing in [Dephasing::Infinite, fs(1e9)] {
                let sbe = s.prop.solve_sbe(&s.model, k, dephasing).unwrap();
                let diff = tdse.n_c.iter().zip(&sbe.n_c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(diff < 1e-6, "{k}: {diff}");
            }
        }
    }

    #[test]
    fn populations_sum_to_one_with_dephasing() {
        let s = setup(1.0);
        let traj = s.prop.solve_sbe(&s.model, 0.1, fs(1.0)).unwrap();
        assert!(traj.n_v.iter().zip(&traj.n_c).all(|(v, c)| (v + c - 1.0).abs() < 1e-8));
        assert_eq!(traj.provenance, Provenance::Sbe);
    }

    #[test]
    fn long_but_finite_dephasing_is_visible() {
        // over a ~880 fs window T2 = 1e6 fs still removes ~1e-3 of the coherence
        let s = setup(1.0);
        let free = s.prop.solve_sbe(&s.model, -0.3, Dephasing::Infinite).unwrap();
        let slow = s.prop.solve_sbe(&s.model, -0.3, fs(1e6)).unwrap();
        let diff = free.n_c.iter().zip(&slow.n_c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-6 && diff < 1e-3, "{diff}");
    }

    #[test]
    fn dephasing_suppresses_coherence() {
        let s = setup(1.0);
        let free = s.prop.solve_tdse(&s.model, 0.0).unwrap().into_bloch();
        let damped = s.prop.solve_sbe(&s.model, 0.0, fs(1.0)).unwrap();
        let mean = |t: &SbeTrajectory| t.coherence.iter().map(|p| p.norm()).sum::<f64>() / t.len() as f64;
        assert!(mean(&damped) < mean(&free));
    }

    #[test]
    fn coherence_decays_after_pulse() {
        let s = setup(1.0);
        let t2 = UnitSystem::CODATA.fs_to_au(1.0);
        let traj = s.prop.solve_sbe(&s.model, 0.05, fs(1.0)).unwrap();
        let max = traj.coherence.iter().map(|p| p.norm()).fold(0.0, f64::max);
        // e^{-(t1 - t_peak)/T2} underflows; what is left is sourced by the
        // residual field of the envelope tail
        let end = traj.coherence.last().unwrap().norm();
        assert!(end < 1e-12 * max, "{end} vs {max}");
        let i = (0..s.grid.len).find(|&i| s.grid.at(i) >= 5.0 * t2 + s.pulse.fwhm).unwrap();
        let later = (0..s.grid.len).find(|&j| s.grid.at(j) >= s.grid.at(i) + 3.0 * t2).unwrap();
        let ratio = traj.coherence[later].norm() / traj.coherence[i].norm();
        assert!(ratio < 1.0, "{ratio}");
        let free = s.prop.solve_tdse(&s.model, 0.05).unwrap().into_bloch();
        assert!(free.coherence.last().unwrap().norm() > 1e-3 * max);
    }

    #[test]
    fn opposite_momenta_end_alike() {
        let s = setup(1.0);
        for k in [0.1, 0.37] {
            let a = s.prop.solve_tdse(&s.model, k).unwrap().conduction_population();
            let b = s.prop.solve_tdse(&s.model, -k).unwrap().conduction_population();
            assert!((a.last().unwrap() - b.last().unwrap()).abs() < 1e-6, "{k}");
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let s = setup(1.0);
        let end = |substeps: usize| *solve_tdse(&s.model, &s.pulse, 0.15, &s.grid, substeps).unwrap().conduction.last().unwrap();
        let (r, a, b) = (end(32), end(2), end(4));
        let ratio = (a - r).norm() / (b - r).norm();
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn drift_beyond_limit_names_a_resolution() {
        let s = setup(1.0);
        assert_eq!(s.prop.check(0.0, 1e-9), Ok(()));
        match s.prop.check(0.3, 1e-4) {
            Err(SolverError::Resolution { substeps, n_t, .. }) => {
                assert!(substeps > s.prop.substeps());
                assert!(n_t > s.grid.len && n_t.is_power_of_two());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let s = setup(0.0);
        let traj = s.prop.solve_sbe(&s.model, 0.0, Dephasing::Infinite).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&s.grid, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t_fs,n_v,n_c,re_pi,im_pi\n"));
        assert_eq!(text.lines().count(), s.grid.len + 1);
    }
}
