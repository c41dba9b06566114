//! Classical driving pulse and the envelope functions of the quantized modes.
//!
//! The vector potential is the primary object:
//! `A(t) = (E0/ω) f(t) sin(ωt + φ)` with a Gaussian `f`, and the field is its
//! exact negative derivative. `A` therefore vanishes at both ends of the grid
//! and `∫E dt = 0` holds by construction.

use num_complex::Complex64 as C64;

use crate::config::{FwhmOf, SimulationConfig};
use crate::grid::TimeGrid;

const LN2: f64 = std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    /// Peak field `E0` (a.u.).
    pub amplitude: f64,
    pub omega: f64,
    /// FWHM of the field envelope `f(t)` (a.u.).
    pub fwhm: f64,
    /// Carrier-envelope phase φ.
    pub cep: f64,
}

impl PulseSpec {
    pub fn from_config(cfg: &SimulationConfig) -> Self {
        let nominal = cfg.n_cycles * cfg.period();
        let fwhm = match cfg.fwhm_of {
            FwhmOf::Field => nominal,
            // f² has FWHM fwhm/√2
            FwhmOf::Intensity => nominal * std::f64::consts::SQRT_2,
        };
        Self { amplitude: cfg.field_amplitude, omega: cfg.omega(), fwhm, cep: cfg.cep }
    }

    pub fn half_span(&self, span_fwhm: f64) -> f64 {
        span_fwhm * self.fwhm
    }

    /// `f(t) = exp(-2 ln2 t²/τ²)`, unit peak at `t = 0`.
    pub fn envelope(&self, t: f64) -> f64 {
        (-2.0 * LN2 * t * t / (self.fwhm * self.fwhm)).exp()
    }

    fn envelope_derivative(&self, t: f64) -> f64 {
        -4.0 * LN2 * t / (self.fwhm * self.fwhm) * self.envelope(t)
    }

    pub fn vector_potential(&self, t: f64) -> f64 {
        self.amplitude / self.omega * self.envelope(t) * (self.omega * t + self.cep).sin()
    }

    /// `E(t) = -dA/dt`.
    pub fn field(&self, t: f64) -> f64 {
        let (s, c) = (self.omega * t + self.cep).sin_cos();
        -self.amplitude / self.omega * (self.envelope_derivative(t) * s + self.omega * self.envelope(t) * c)
    }

    /// Field and vector potential sharing one `exp` and one `sin_cos`.
    pub fn field_and_potential(&self, t: f64) -> (f64, f64) {
        let f = self.envelope(t);
        let df = -4.0 * LN2 * t / (self.fwhm * self.fwhm) * f;
        let (s, c) = (self.omega * t + self.cep).sin_cos();
        let scale = self.amplitude / self.omega;
        (-scale * (df * s + self.omega * f * c), scale * f * s)
    }
}

/// The discrete comb `ω_q = q ω_L`, `q = 1..=q_cutoff`, with `g(ω_q) = g0 √q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSet {
    pub omega: f64,
    pub q_cutoff: usize,
    pub g0: f64,
}

impl ModeSet {
    pub fn from_config(cfg: &SimulationConfig) -> Self {
        Self { omega: cfg.omega(), q_cutoff: cfg.q_cutoff, g0: cfg.g0 }
    }

    pub fn frequency(&self, q: usize) -> f64 {
        q as f64 * self.omega
    }

    pub fn coupling(&self, q: usize) -> f64 {
        self.g0 * (q as f64).sqrt()
    }

    pub fn orders(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.q_cutoff
    }
}

/// Tables `f_q(t) = f(t) e^{iω_q t}` and `F_q(t) = ∫_{t0}^t f_q`, indexed by
/// `q - 1` and then by time sample.
#[derive(Debug, Clone)]
pub struct ModeEnvelopes {
    pub small: Vec<Vec<C64>>,
    pub running: Vec<Vec<C64>>,
}

impl ModeEnvelopes {
    pub fn small(&self, q: usize) -> &[C64] {
        &self.small[q - 1]
    }

    pub fn running(&self, q: usize) -> &[C64] {
        &self.running[q - 1]
    }
}

pub fn mode_envelopes(spec: &PulseSpec, modes: &ModeSet, grid: &TimeGrid) -> ModeEnvelopes {
    let env: Vec<f64> = grid.times().map(|t| spec.envelope(t)).collect();
    let (small, running) = modes
        .orders()
        .map(|q| {
            let w = modes.frequency(q);
            let fq: Vec<C64> = grid
                .times()
                .zip(&env)
                .map(|(t, &f)| C64::from_polar(f, w * t))
                .collect();
            let mut acc = C64::new(0.0, 0.0);
            let mut big = Vec::with_capacity(fq.len());
            big.push(acc);
            for pair in fq.windows(2) {
                acc += (pair[0] + pair[1]) * (0.5 * grid.step);
                big.push(acc);
            }
            (fq, big)
        })
        .unzip();
    ModeEnvelopes { small, running }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grids;

    fn setup() -> (SimulationConfig, PulseSpec, TimeGrid) {
        let cfg = SimulationConfig::default();
        let (grid, _) = build_grids(&cfg).unwrap();
        (cfg.clone(), PulseSpec::from_config(&cfg), grid)
    }

    #[test]
    fn potential_vanishes_at_ends_and_peaks_near_e0_over_omega() {
        let (_, p, g) = setup();
        assert!(p.vector_potential(g.start).abs() < 1e-12);
        assert!(p.vector_potential(g.end()).abs() < 1e-12);
        let peak_a = g.times().map(|t| p.vector_potential(t).abs()).fold(0.0, f64::max);
        assert!((peak_a - 0.6935).abs() < 2e-3, "{peak_a}");
        // the excursion exceeds half a zone along Γ-M
        assert!(peak_a > std::f64::consts::PI / 5.32);
    }

    #[test]
    fn peak_field_close_to_e0() {
        let (_, p, g) = setup();
        let peak = g.times().map(|t| p.field(t).abs()).fold(0.0, f64::max);
        assert!((peak / p.amplitude - 1.0).abs() < 0.01, "{}", peak / p.amplitude);
    }

    #[test]
    fn field_is_minus_derivative_of_potential() {
        let (_, p, _) = setup();
        let h = 1e-3;
        for i in 0..200 {
            let t = -2000.0 + 20.0 * i as f64;
            let fd = -(p.vector_potential(t + h) - p.vector_potential(t - h)) / (2.0 * h);
            assert!((fd - p.field(t)).abs() < 1e-9);
            let (e, a) = p.field_and_potential(t);
            assert_eq!(e, p.field(t));
            assert_eq!(a, p.vector_potential(t));
        }
    }

    #[test]
    fn field_integrates_to_zero() {
        let (_, p, g) = setup();
        let e: Vec<f64> = g.times().map(|t| p.field(t)).collect();
        let integral: f64 = e.windows(2).map(|w| 0.5 * (w[0] + w[1]) * g.step).sum();
        assert!(integral.abs() < 1e-8, "{integral}");
    }

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let (_, mut p, g) = setup();
        p.amplitude = 0.0;
        assert!(g.times().all(|t| p.field(t) == 0.0 && p.vector_potential(t) == 0.0));
    }

    #[test]
    fn coupling_scales_as_sqrt_q() {
        let (cfg, _, _) = setup();
        let m = ModeSet::from_config(&cfg);
        for q in m.orders() {
            assert!((m.coupling(q) / m.coupling(1) - (q as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn running_envelopes_vanish_at_end() {
        let (cfg, p, g) = setup();
        let m = ModeSet::from_config(&cfg);
        let env = mode_envelopes(&p, &m, &g);
        for q in m.orders() {
            let big = env.running(q);
            let max = big.iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(big.last().unwrap().norm() < 1e-2 * max, "q = {q}");
            assert_eq!(big[0], C64::new(0.0, 0.0));
            for (i, z) in env.small(q).iter().enumerate().step_by(97) {
                let f = p.envelope(g.at(i));
                assert!((z.norm_sqr() - f * f).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn running_envelope_derivative_is_small_envelope() {
        let (cfg, p, g) = setup();
        let m = ModeSet::from_config(&cfg);
        let env = mode_envelopes(&p, &m, &g);
        for q in [1, 9, 17] {
            let (small, big) = (env.small(q), env.running(q));
            let w = m.frequency(q);
            // O(dt²) trapezoid error bound with |f_q''| <= ω_q² + O(1/τ²)
            let bound = 2.0 * w * w * g.step * g.step;
            for i in (1..g.len - 1).step_by(101) {
                let deriv = (big[i + 1] - big[i - 1]) / (2.0 * g.step);
                assert!((deriv - small[i]).norm() < bound, "q = {q}, i = {i}");
            }
        }
    }
}
