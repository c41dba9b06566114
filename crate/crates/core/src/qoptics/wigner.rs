//! Wigner function `W(β) = (2/π) tr[D(β) Π D†(β) ρ]` of a reduced mode.

use std::f64::consts::FRAC_2_PI;
use std::io::{self, Write};

use num_complex::Complex64 as C64;

use super::state::{coherent_overlap, ConditionedState, ReducedState, StateError};

/// Distance beyond the largest amplitude that a map should cover.
pub const SUPPORT_MARGIN: f64 = 4.0;
/// Padding used by [`WignerGrid::covering`].
pub const DEFAULT_PADDING: f64 = 5.0;

/// Square grid `x, p ∈ [-half, half]` (shifted by `center`) with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerGrid {
    pub center: C64,
    pub half: f64,
    pub n: usize,
}

impl WignerGrid {
    pub fn new(center: C64, half: f64, n: usize) -> Self {
        assert!(n >= 2 && half > 0.0);
        Self { center, half, n }
    }

    /// Centered at the origin, reaching `padding` beyond the largest amplitude.
    pub fn covering(state: &ReducedState, padding: f64, n: usize) -> Self {
        Self::new(C64::new(0.0, 0.0), max_amplitude(state) + padding, n)
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half / (self.n - 1) as f64
    }

    pub fn axis(&self, i: usize) -> f64 {
        -self.half + self.step() * i as f64
    }

    pub fn point(&self, ix: usize, ip: usize) -> C64 {
        self.center + C64::new(self.axis(ix), self.axis(ip))
    }

    fn covers(&self, state: &ReducedState) -> bool {
        state.amplitudes.iter().all(|a| {
            let d = a - self.center;
            d.re.abs() + SUPPORT_MARGIN <= self.half && d.im.abs() + SUPPORT_MARGIN <= self.half
        })
    }
}

fn max_amplitude(state: &ReducedState) -> f64 {
    state.amplitudes.iter().map(|a| a.re.abs().max(a.im.abs())).fold(0.0, f64::max)
}

/// Pointwise Wigner function of a reduced state.
///
/// With `D†(β)|α⟩ = e^{(α β* - α* β)/2} |α - β⟩` and `Π|γ⟩ = |-γ⟩` every
/// term is a coherent-state overlap.
pub fn wigner_value(state: &ReducedState, beta: C64) -> f64 {
    let n = state.amplitudes.len();
    let shifted: Vec<(C64, C64)> = state
        .amplitudes
        .iter()
        .map(|a| {
            let phase = C64::new(0.0, (a * beta.conj()).im).exp();
            (a - beta, phase)
        })
        .collect();
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..n {
        let (gi, pi) = shifted[i];
        for j in 0..n {
            let (gj, pj) = shifted[j];
            // R_ij ⟨α_j| D Π D† |α_i⟩
            sum += state.weights[i * n + j] * pj.conj() * pi * coherent_overlap(gj, -gi);
        }
    }
    FRAC_2_PI * sum.re
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerMap {
    pub grid: WignerGrid,
    /// Row-major by `p`, then `x`.
    pub values: Vec<f64>,
    /// The grid ends closer than [`SUPPORT_MARGIN`] to some branch amplitude.
    pub support_warning: bool,
}

pub fn wigner(state: &ConditionedState, q: usize, grid: WignerGrid) -> Result<WignerMap, StateError> {
    let reduced = state.reduced(q)?;
    Ok(wigner_reduced(&reduced, grid))
}

pub fn wigner_reduced(state: &ReducedState, grid: WignerGrid) -> WignerMap {
    let row = |ip: usize| -> Vec<f64> { (0..grid.n).map(|ix| wigner_value(state, grid.point(ix, ip))).collect() };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..grid.n).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..grid.n).map(row).collect();
    WignerMap { grid, values: rows.concat(), support_warning: !grid.covers(state) }
}

impl WignerMap {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.n + ix]
    }

    /// Trapezoid rule over the square.
    pub fn integral(&self) -> f64 {
        let n = self.grid.n;
        let edge = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let h = self.grid.step();
        let mut sum = 0.0;
        for ip in 0..n {
            for ix in 0..n {
                sum += edge(ix) * edge(ip) * self.at(ix, ip);
            }
        }
        sum * h * h
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,p,W")?;
        for ip in 0..self.grid.n {
            for ix in 0..self.grid.n {
                let b = self.grid.point(ix, ip);
                writeln!(out, "{},{},{}", b.re, b.im, self.at(ix, ip))?;
            }
        }
        Ok(())
    }
}
