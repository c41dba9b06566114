//! Matrix elements, macroscopic currents and the harmonic spectrum.

use std::io::{self, Write};

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::bands::BandModel;
use crate::config::Window;
use crate::grid::{KGrid, TimeGrid};
use crate::pulse::PulseSpec;
use crate::sbe::SbeTrajectory;
use crate::units::UnitSystem;

#[derive(Debug, Error, PartialEq)]
pub enum CurrentsError {
    #[error("trajectory has {found} samples but the time grid has {expected}")]
    GridMismatch { expected: usize, found: usize },
}

/// Valence-diagonal matrix elements for one canonical momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixElements {
    pub k: f64,
    /// `M^ter_vv = 2 Re[π d_cv(K + A)]`
    pub interband: Vec<f64>,
    /// `M^tra_vv = n_v ∂E_v/∂k + n_c ∂E_c/∂k` at `K + A`
    pub intraband: Vec<f64>,
}

pub fn matrix_elements(
    traj: &SbeTrajectory,
    model: &BandModel,
    pulse: &PulseSpec,
    grid: &TimeGrid,
) -> Result<MatrixElements, CurrentsError> {
    if traj.len() != grid.len {
        return Err(CurrentsError::GridMismatch { expected: grid.len, found: traj.len() });
    }
    let (interband, intraband) = (0..grid.len)
        .map(|i| {
            let p = model.eval(traj.k + pulse.vector_potential(grid.at(i)));
            let ter = 2.0 * traj.coherence[i].re * p.dipole;
            let tra = traj.n_v[i] * p.valence_velocity + traj.n_c[i] * p.conduction_velocity;
            (ter, tra)
        })
        .unzip();
    Ok(MatrixElements { k: traj.k, interband, intraband })
}

/// Zone-integrated currents on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentTrace {
    /// `p(t) = ∫dK M^ter`
    pub polarization: Vec<f64>,
    /// `j_ter = dp/dt`
    pub interband: Vec<f64>,
    /// `j_tra = ∫dK M^tra`
    pub intraband: Vec<f64>,
}

/// Sums matrix elements over the zone in the order they are added.
#[derive(Debug, Clone)]
pub struct CurrentAccumulator {
    weight: f64,
    polarization: Vec<f64>,
    intraband: Vec<f64>,
}

impl CurrentAccumulator {
    pub fn new(kgrid: &KGrid, len: usize) -> Self {
        Self { weight: kgrid.step, polarization: vec![0.0; len], intraband: vec![0.0; len] }
    }

    pub fn add(&mut self, m: &MatrixElements) {
        for (acc, x) in self.polarization.iter_mut().zip(&m.interband) {
            *acc += self.weight * x;
        }
        for (acc, x) in self.intraband.iter_mut().zip(&m.intraband) {
            *acc += self.weight * x;
        }
    }

    pub fn finish(self, grid: &TimeGrid) -> CurrentTrace {
        let interband = time_derivative(&self.polarization, grid.step);
        CurrentTrace { polarization: self.polarization, interband, intraband: self.intraband }
    }
}

/// The trapezoid rule on a periodic uniform grid is the plain sum times `dK`.
pub fn macroscopic_currents(tables: &[MatrixElements], kgrid: &KGrid, grid: &TimeGrid) -> CurrentTrace {
    let mut acc = CurrentAccumulator::new(kgrid, grid.len);
    tables.iter().for_each(|m| acc.add(m));
    acc.finish(grid)
}

/// Centered differences inside, one-sided second-order at the ends.
pub fn time_derivative(y: &[f64], dt: f64) -> Vec<f64> {
    let n = y.len();
    if n < 3 {
        return vec![0.0; n];
    }
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt));
    d.extend(y.windows(3).map(|w| (w[2] - w[0]) / (2.0 * dt)));
    d.push((3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dt));
    d
}

impl CurrentTrace {
    pub fn total(&self) -> Vec<f64> {
        self.interband.iter().zip(&self.intraband).map(|(a, b)| a + b).collect()
    }

    /// Writes `t_fs, j_tra, j_ter` (currents in a.u.).
    pub fn write_csv<W: Write>(&self, grid: &TimeGrid, mut out: W) -> io::Result<()> {
        let u = UnitSystem::CODATA;
        writeln!(out, "t_fs,j_tra_au,j_ter_au")?;
        for i in 0..grid.len {
            writeln!(out, "{},{},{}", u.au_to_fs(grid.at(i)), self.intraband[i], self.interband[i])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Finite-difference `j_ter`, as stored in the trace.
    FiniteDifference,
    /// `j_ter` from `iω · FT[p]`; a cross-check of the finite differences.
    Spectral,
}

/// `ω²|FT[j]|²` for the total current and both components, on the
/// non-negative frequency half of the FFT.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    /// `ω/ω_L` per bin.
    pub orders: Vec<f64>,
    pub total: Vec<f64>,
    pub interband: Vec<f64>,
    pub intraband: Vec<f64>,
}

pub fn window_weights(window: Window, n: usize) -> Vec<f64> {
    match window {
        Window::None => vec![1.0; n],
        Window::Hann => (0..n)
            .map(|i| {
                let x = std::f64::consts::PI * i as f64 / (n - 1) as f64;
                x.sin().powi(2)
            })
            .collect(),
    }
}

/// Forward transform `X_m = Σ_n x_n e^{-2πi mn/N}` of a real signal.
pub fn fft_real(x: &[f64]) -> Vec<C64> {
    let mut buf: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

pub fn hhg_spectrum(trace: &CurrentTrace, grid: &TimeGrid, omega: f64, window: Window) -> SpectrumTrace {
    hhg_spectrum_with(trace, grid, omega, window, DerivativeMode::FiniteDifference)
}

pub fn hhg_spectrum_with(
    trace: &CurrentTrace,
    grid: &TimeGrid,
    omega: f64,
    window: Window,
    mode: DerivativeMode,
) -> SpectrumTrace {
    let n = grid.len;
    let w = window_weights(window, n);
    let windowed = |y: &[f64]| -> Vec<f64> { y.iter().zip(&w).map(|(a, b)| a * b).collect() };
    let half = n / 2 + 1;
    let d_omega = std::f64::consts::TAU / (n as f64 * grid.step);
    let freqs: Vec<f64> = (0..half).map(|m| m as f64 * d_omega).collect();

    let intra = fft_real(&windowed(&trace.intraband));
    let inter: Vec<C64> = match mode {
        DerivativeMode::FiniteDifference => fft_real(&windowed(&trace.interband)),
        DerivativeMode::Spectral => {
            // FT[dp/dt] = iω FT[p] for the e^{-iωt} kernel, with the phase of
            // the grid origin restored
            let p = fft_real(&windowed(&trace.polarization));
            p.iter()
                .zip(0..n)
                .map(|(z, m)| {
                    let f = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
                    *z * C64::new(0.0, f * d_omega)
                })
                .collect()
        }
    };
    let weigh = |z: C64, f: f64| f * f * z.norm_sqr();
    SpectrumTrace {
        orders: freqs.iter().map(|f| f / omega).collect(),
        total: (0..half).map(|m| weigh(inter[m] + intra[m], freqs[m])).collect(),
        interband: (0..half).map(|m| weigh(inter[m], freqs[m])).collect(),
        intraband: (0..half).map(|m| weigh(intra[m], freqs[m])).collect(),
    }
}

/// `10 log10(I / max I)`, floored at -300 dB.
pub fn to_db(intensity: &[f64]) -> Vec<f64> {
    let max = intensity.iter().copied().fold(0.0, f64::max);
    intensity
        .iter()
        .map(|&i| if max > 0.0 { 10.0 * (i / max).max(1e-30).log10() } else { -300.0 })
        .collect()
}

impl SpectrumTrace {
    pub fn total_db(&self) -> Vec<f64> {
        to_db(&self.total)
    }

    pub fn interband_db(&self) -> Vec<f64> {
        to_db(&self.interband)
    }

    pub fn intraband_db(&self) -> Vec<f64> {
        to_db(&self.intraband)
    }

    /// Largest value of `series` over bins with order in `[lo, hi]`.
    pub fn peak_in(&self, series: &[f64], lo: f64, hi: f64) -> f64 {
        self.orders
            .iter()
            .zip(series)
            .filter(|(o, _)| **o >= lo && **o <= hi)
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest value of `series` over bins with order in `[lo, hi]`.
    pub fn dip_in(&self, series: &[f64], lo: f64, hi: f64) -> f64 {
        self.orders
            .iter()
            .zip(series)
            .filter(|(o, _)| **o >= lo && **o <= hi)
            .map(|(_, v)| *v)
            .fold(f64::INFINITY, f64::min)
    }

    /// Order and value of the largest bin of `series` within half an order of `q`.
    pub fn harmonic_peak(&self, series: &[f64], q: f64) -> (f64, f64) {
        self.orders
            .iter()
            .zip(series)
            .filter(|(o, _)| (**o - q).abs() <= 0.5)
            .fold((q, f64::NEG_INFINITY), |best, (o, v)| if *v > best.1 { (*o, *v) } else { best })
    }

    /// Height in dB of harmonic `q` of the total spectrum above the shallower
    /// of the two neighbouring inter-harmonic valleys.
    pub fn harmonic_contrast_db(&self, q: f64) -> f64 {
        let db = self.total_db();
        let peak = self.harmonic_peak(&db, q).1;
        let below = self.dip_in(&db, q - 1.5, q - 0.5);
        let above = self.dip_in(&db, q + 0.5, q + 1.5);
        peak - below.max(above)
    }

    /// Odd orders lying in `[lo, hi]`.
    pub fn odd_orders(lo: f64, hi: f64) -> Vec<f64> {
        let first = lo.ceil() as i64;
        (first..=hi.floor() as i64).filter(|q| q % 2 != 0).map(|q| q as f64).collect()
    }

    /// Mean dB level of the odd-harmonic peaks of the total spectrum in `[lo, hi]`.
    pub fn plateau_db(&self, lo: f64, hi: f64) -> f64 {
        let db = self.total_db();
        let peaks: Vec<f64> = Self::odd_orders(lo, hi).iter().map(|&q| self.harmonic_peak(&db, q).1).collect();
        peaks.iter().sum::<f64>() / peaks.len().max(1) as f64
    }

    /// Order at which the odd-harmonic peaks of the total spectrum, followed
    /// upward from `lo`, first fall `drop_db` below the plateau of `[lo, hi]`.
    /// Linear in dB between the last harmonic above the threshold and the
    /// first below it. `None` if no harmonic up to the Nyquist order drops.
    pub fn cutoff_order(&self, lo: f64, hi: f64, drop_db: f64) -> Option<f64> {
        let db = self.total_db();
        let threshold = self.plateau_db(lo, hi) - drop_db;
        let top = self.orders.last().copied().unwrap_or(0.0) - 1.0;
        let mut prev: Option<(f64, f64)> = None;
        for q in Self::odd_orders(lo, top) {
            let level = self.harmonic_peak(&db, q).1;
            if level < threshold {
                return Some(match prev {
                    Some((pq, pl)) => pq + (q - pq) * (pl - threshold) / (pl - level),
                    None => q,
                });
            }
            prev = Some((q, level));
        }
        None
    }

    /// Writes rows up to `max_order`; each component in dB relative to its own maximum.
    pub fn write_csv<W: Write>(&self, max_order: f64, mut out: W) -> io::Result<()> {
        let (t, e, a) = (self.total_db(), self.interband_db(), self.intraband_db());
        writeln!(out, "harmonic_order,total_db,interband_db,intraband_db")?;
        for m in 0..self.orders.len() {
            if self.orders[m] > max_order {
                break;
            }
            writeln!(out, "{},{},{},{}", self.orders[m], t[m], e[m], a[m])?;
        }
        Ok(())
    }
}
