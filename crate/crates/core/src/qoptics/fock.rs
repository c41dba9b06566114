//! Number-basis evaluation of reduced states, independent of the coherent-state algebra.

use std::f64::consts::FRAC_2_PI;

use num_complex::Complex64 as C64;

use super::state::{ReducedState, StateError};

/// Largest tolerated probability outside the truncated basis.
pub const TAIL_LIMIT: f64 = 1e-10;

/// `⌈A² + 8A + 20⌉` for the largest relevant amplitude `A`.
pub fn truncation_for(max_amplitude: f64) -> usize {
    (max_amplitude * max_amplitude + 8.0 * max_amplitude + 20.0).ceil() as usize
}

/// `⟨n|α⟩` for `n = 0..=n_max`, failing when the discarded tail is too heavy.
pub fn coherent_ket(alpha: C64, n_max: usize) -> Result<Vec<C64>, StateError> {
    let mut ket = Vec::with_capacity(n_max + 1);
    let mut term = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    ket.push(term);
    for n in 1..=n_max {
        term = term * alpha / (n as f64).sqrt();
        ket.push(term);
    }
    let kept: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
    let tail = 1.0 - kept;
    if tail > TAIL_LIMIT {
        return Err(StateError::Truncation { n_max, tail });
    }
    Ok(ket)
}

/// Dense density matrix in the number basis, row-major, dimension `n_max + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockDensity {
    pub dim: usize,
    pub rho: Vec<C64>,
}

impl FockDensity {
    pub fn from_reduced(state: &ReducedState, n_max: usize) -> Result<Self, StateError> {
        let kets = state
            .amplitudes
            .iter()
            .map(|a| coherent_ket(*a, n_max))
            .collect::<Result<Vec<_>, _>>()?;
        let dim = n_max + 1;
        let n = kets.len();
        let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..n {
            for j in 0..n {
                let w = state.weights[i * n + j];
                for r in 0..dim {
                    let left = w * kets[i][r];
                    for c in 0..dim {
                        rho[r * dim + c] += left * kets[j][c].conj();
                    }
                }
            }
        }
        Ok(Self { dim, rho })
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.rho[i * self.dim + i].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        let sq: f64 = self.rho.iter().map(|z| z.norm_sqr()).sum();
        sq / (tr * tr)
    }

    /// `(2/π) Σ_n (-1)^n ⟨n|D†(β) ρ D(β)|n⟩`.
    ///
    /// The columns `D(β)|n⟩ = (a† - β*)^n |β⟩ / √n!` are built by recurrence;
    /// component `k` only depends on components `≤ k`, so truncating them to
    /// the basis of `ρ` is exact.
    pub fn wigner(&self, beta: C64) -> Result<f64, StateError> {
        let dim = self.dim;
        let mut column = coherent_ket(beta, dim - 1)?;
        let mut sum = 0.0;
        for n in 0..dim {
            if n > 0 {
                let inv = 1.0 / (n as f64).sqrt();
                let mut next = vec![C64::new(0.0, 0.0); dim];
                for k in 0..dim {
                    let raise = if k > 0 { column[k - 1] * (k as f64).sqrt() } else { C64::new(0.0, 0.0) };
                    next[k] = (raise - beta.conj() * column[k]) * inv;
                }
                column = next;
            }
            let mut value = C64::new(0.0, 0.0);
            for r in 0..dim {
                let mut row = C64::new(0.0, 0.0);
                for c in 0..dim {
                    row += self.rho[r * dim + c] * column[c];
                }
                value += column[r].conj() * row;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * value.re;
        }
        Ok(FRAC_2_PI * sum / self.trace())
    }
}

/// Truncation large enough for the state and every point `β` it will be probed at.
pub fn oracle_truncation(state: &ReducedState, max_beta: f64) -> usize {
    let a = state.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    truncation_for(a + max_beta)
}

pub fn wigner_oracle(state: &ReducedState, beta: C64) -> Result<f64, StateError> {
    FockDensity::from_reduced(state, oracle_truncation(state, beta.norm()))?.wigner(beta)
}

pub fn purity_oracle(state: &ReducedState) -> Result<f64, StateError> {
    Ok(FockDensity::from_reduced(state, oracle_truncation(state, 0.0))?.purity())
}
