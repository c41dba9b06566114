//! Coherent displacements imprinted on the harmonic modes by the electron dynamics.
//!
//! For one canonical momentum
//! `χ^(q)(K) = g_q ∫ [-M^ter(K,t) f_q(t) + M^tra(K,t) F_q(t)] dt`,
//! and the zone aggregate is `χ̄^(q) = N_z ∫ χ^(q)(K) dK`.

use std::io::{self, Write};

use num_complex::Complex64 as C64;

use crate::bands::Direction;
use crate::config::Dephasing;
use crate::currents::MatrixElements;
use crate::grid::{KGrid, TimeGrid};
use crate::pulse::{ModeEnvelopes, ModeSet};

/// Which source terms enter the displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Component {
    #[default]
    Total,
    Interband,
    Intraband,
}

impl Component {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "total" => Some(Self::Total),
            "inter" | "interband" => Some(Self::Interband),
            "intra" | "intraband" => Some(Self::Intraband),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Total => "total",
            Self::Interband => "inter",
            Self::Intraband => "intra",
        }
    }
}

/// Per-momentum displacements, split by source, indexed by `q - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct KDisplacement {
    pub k: f64,
    pub interband: Vec<C64>,
    pub intraband: Vec<C64>,
}

impl KDisplacement {
    pub fn total(&self) -> Vec<C64> {
        self.interband.iter().zip(&self.intraband).map(|(a, b)| a + b).collect()
    }
}

/// Trapezoid rule over the full time grid.
pub fn mode_displacement(m: &MatrixElements, modes: &ModeSet, env: &ModeEnvelopes, grid: &TimeGrid) -> KDisplacement {
    let n = grid.len;
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 * grid.step } else { grid.step };
    let (interband, intraband) = modes
        .orders()
        .map(|q| {
            let (small, running) = (env.small(q), env.running(q));
            let mut ter = C64::new(0.0, 0.0);
            let mut tra = C64::new(0.0, 0.0);
            for i in 0..n {
                let w = weight(i);
                ter -= small[i] * (m.interband[i] * w);
                tra += running[i] * (m.intraband[i] * w);
            }
            let g = modes.coupling(q);
            (ter * g, tra * g)
        })
        .unzip();
    KDisplacement { k: m.k, interband, intraband }
}

/// Run parameters that produced a set of displacements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementMeta {
    pub n_z: f64,
    pub g0: f64,
    pub dephasing: Dephasing,
    /// Peak field (a.u.).
    pub field_amplitude: f64,
    pub direction: Direction,
}

/// Zone-aggregated displacements `χ̄^(q)`, `q = 1..=q_cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDisplacements {
    pub interband: Vec<C64>,
    pub intraband: Vec<C64>,
    pub meta: DisplacementMeta,
}

/// Sums per-momentum displacements in the order they are added.
#[derive(Debug, Clone)]
pub struct DisplacementAccumulator {
    step: f64,
    interband: Vec<C64>,
    intraband: Vec<C64>,
}

impl DisplacementAccumulator {
    pub fn new(kgrid: &KGrid, modes: usize) -> Self {
        let zero = vec![C64::new(0.0, 0.0); modes];
        Self { step: kgrid.step, interband: zero.clone(), intraband: zero }
    }

    pub fn add(&mut self, d: &KDisplacement) {
        for (acc, z) in self.interband.iter_mut().zip(&d.interband) {
            *acc += z * self.step;
        }
        for (acc, z) in self.intraband.iter_mut().zip(&d.intraband) {
            *acc += z * self.step;
        }
    }

    pub fn finish(self, meta: DisplacementMeta) -> ModeDisplacements {
        let scale = |v: Vec<C64>| v.into_iter().map(|z| z * meta.n_z).collect();
        ModeDisplacements { interband: scale(self.interband), intraband: scale(self.intraband), meta }
    }
}

pub fn aggregate_displacement(per_k: &[KDisplacement], kgrid: &KGrid, meta: DisplacementMeta) -> ModeDisplacements {
    let modes = per_k.first().map_or(0, |d| d.interband.len());
    let mut acc = DisplacementAccumulator::new(kgrid, modes);
    per_k.iter().for_each(|d| acc.add(d));
    acc.finish(meta)
}

impl ModeDisplacements {
    pub fn len(&self) -> usize {
        self.interband.len()
    }

    pub fn is_empty(&self) -> bool {
        self.interband.is_empty()
    }

    pub fn component(&self, which: Component) -> Vec<C64> {
        match which {
            Component::Total => self.interband.iter().zip(&self.intraband).map(|(a, b)| a + b).collect(),
            Component::Interband => self.interband.clone(),
            Component::Intraband => self.intraband.clone(),
        }
    }

    pub fn total(&self) -> Vec<C64> {
        self.component(Component::Total)
    }

    /// Same dynamics with a different zone count and coupling; `χ̄ ∝ N_z g0`.
    pub fn rescaled(&self, n_z: f64, g0: f64) -> Self {
        let factor = n_z * g0 / (self.meta.n_z * self.meta.g0);
        let scale = |v: &[C64]| v.iter().map(|z| z * factor).collect();
        Self {
            interband: scale(&self.interband),
            intraband: scale(&self.intraband),
            meta: DisplacementMeta { n_z, g0, ..self.meta },
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "q,re_chi,im_chi,re_chi_inter,im_chi_inter,re_chi_intra,im_chi_intra")?;
        for (i, t) in self.total().iter().enumerate() {
            let (a, b) = (self.interband[i], self.intraband[i]);
            writeln!(out, "{},{},{},{},{},{},{}", i + 1, t.re, t.im, a.re, a.im, b.re, b.im)?;
        }
        Ok(())
    }
}
