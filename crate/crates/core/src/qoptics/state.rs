//! Superpositions of multimode coherent states and the observables built on them.

use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("conditioning annihilates state: every displacement is zero")]
    Annihilated,
    #[error("mode {q} out of range 1..={modes}")]
    ModeOutOfRange { q: usize, modes: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("expected a single-mode state, found {modes} modes")]
    NotSingleMode { modes: usize },
    #[error("states have {left} and {right} modes")]
    ModeCountMismatch { left: usize, right: usize },
    #[error("number basis truncated at {n_max} leaves tail norm {tail:.2e}")]
    Truncation { n_max: usize, tail: f64 },
}

/// `⟨a|b⟩` for coherent states.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp()
}

/// One term `c ⊗_q |α_q⟩` of a superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub coefficient: C64,
    pub amplitudes: Vec<C64>,
}

impl Branch {
    pub fn new(coefficient: C64, amplitudes: Vec<C64>) -> Self {
        Self { coefficient, amplitudes }
    }

    pub fn vacuum(coefficient: C64, modes: usize) -> Self {
        Self { coefficient, amplitudes: vec![C64::new(0.0, 0.0); modes] }
    }

    /// Product of overlaps `Π_q ⟨self_q|other_q⟩`, optionally skipping one mode.
    fn overlap_except(&self, other: &Branch, skip: Option<usize>) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .enumerate()
            .filter(|(i, _)| Some(*i) != skip)
            .map(|(_, (a, b))| coherent_overlap(*a, *b))
            .product()
    }
}

/// Unnormalized pure state stored as a list of branches over a common set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedState {
    branches: Vec<Branch>,
    modes: usize,
}

/// `exp(-|χ|²/2)`, the vacuum overlap of a coherent state.
fn vacuum_overlap(amplitudes: &[C64]) -> f64 {
    amplitudes.iter().map(|a| (-0.5 * a.norm_sqr()).exp()).product()
}

impl ConditionedState {
    /// Panics when branches disagree on the number of modes or the list is empty.
    pub fn new(branches: Vec<Branch>) -> Self {
        let modes = branches.first().expect("at least one branch").amplitudes.len();
        assert!(branches.iter().all(|b| b.amplitudes.len() == modes), "branches disagree on mode count");
        Self { branches, modes }
    }

    pub fn coherent(alpha: C64) -> Self {
        Self::new(vec![Branch::new(C64::new(1.0, 0.0), vec![alpha])])
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::new(vec![Branch::vacuum(C64::new(1.0, 0.0), modes)])
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &ConditionedState) -> Result<C64, StateError> {
        if self.modes != other.modes {
            return Err(StateError::ModeCountMismatch { left: self.modes, right: other.modes });
        }
        Ok(self
            .branches
            .iter()
            .flat_map(|a| {
                other
                    .branches
                    .iter()
                    .map(move |b| a.coefficient.conj() * b.coefficient * a.overlap_except(b, None))
            })
            .sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).map(|z| z.re).unwrap_or(0.0)
    }

    /// Same state with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: C64) -> Self {
        let branches = self
            .branches
            .iter()
            .map(|b| Branch::new(b.coefficient * factor, b.amplitudes.clone()))
            .collect();
        Self { branches, modes: self.modes }
    }

    /// `D_q(δ)` applied to mode `q`: `D(δ)|α⟩ = e^{(δα* - δ*α)/2}|α + δ⟩`.
    pub fn displaced(&self, q: usize, delta: C64) -> Result<Self, StateError> {
        let i = self.mode_index(q)?;
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let a = b.amplitudes[i];
                let phase = C64::new(0.0, (delta * a.conj()).im).exp();
                let mut amps = b.amplitudes.clone();
                amps[i] = a + delta;
                Branch::new(b.coefficient * phase, amps)
            })
            .collect();
        Ok(Self { branches, modes: self.modes })
    }

    pub(crate) fn mode_index(&self, q: usize) -> Result<usize, StateError> {
        if q == 0 || q > self.modes {
            return Err(StateError::ModeOutOfRange { q, modes: self.modes });
        }
        Ok(q - 1)
    }

    /// Reduced density operator of mode `q` in the span of the branch kets:
    /// `ρ_q = Σ_ij R_ij |α_i⟩⟨α_j|`, normalized to unit trace.
    pub fn reduced(&self, q: usize) -> Result<ReducedState, StateError> {
        let i = self.mode_index(q)?;
        let n = self.branches.len();
        let amplitudes: Vec<C64> = self.branches.iter().map(|b| b.amplitudes[i]).collect();
        let mut weights = vec![C64::new(0.0, 0.0); n * n];
        for (r, a) in self.branches.iter().enumerate() {
            for (c, b) in self.branches.iter().enumerate() {
                // tr_{other}(|A⟩⟨B|) = Π ⟨B_q'|A_q'⟩
                weights[r * n + c] = a.coefficient * b.coefficient.conj() * b.overlap_except(a, Some(i));
            }
        }
        let gram = gram(&amplitudes);
        let trace: C64 = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| weights[r * n + c] * gram[c * n + r]).sum();
        if trace.re <= 0.0 {
            return Err(StateError::ZeroNorm);
        }
        weights.iter_mut().for_each(|w| *w /= trace.re);
        Ok(ReducedState { amplitudes, weights, gram })
    }
}

/// `G_jk = ⟨α_j|α_k⟩`, row-major.
fn gram(amplitudes: &[C64]) -> Vec<C64> {
    amplitudes.iter().flat_map(|a| amplitudes.iter().map(move |b| coherent_overlap(*a, *b))).collect()
}

/// Single-mode density operator `Σ_ij R_ij |α_i⟩⟨α_j|` with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub amplitudes: Vec<C64>,
    /// `R`, row-major.
    pub weights: Vec<C64>,
    /// `G`, row-major.
    pub gram: Vec<C64>,
}

impl ReducedState {
    /// `tr ρ² = tr[(RG)²]`.
    pub fn purity(&self) -> f64 {
        let n = self.amplitudes.len();
        let rg = matmul(&self.weights, &self.gram, n);
        let sq = matmul(&rg, &rg, n);
        (0..n).map(|i| sq[i * n + i]).sum::<C64>().re
    }
}

fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Full multimode conditioning: `|χ̄⟩ - ξ_IR ξ_UV |0⟩`.
pub fn condition_full(displacements: &[C64]) -> Result<ConditionedState, StateError> {
    if displacements.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(StateError::Annihilated);
    }
    let xi = vacuum_overlap(displacements);
    Ok(ConditionedState::new(vec![
        Branch::new(C64::new(1.0, 0.0), displacements.to_vec()),
        Branch::vacuum(C64::new(-xi, 0.0), displacements.len()),
    ]))
}

/// Fundamental mode alone, harmonics traced out: `|χ̄^(1)⟩ - ξ_IR |ξ_UV|² |0⟩`.
pub fn condition_ir(displacements: &[C64]) -> Result<ConditionedState, StateError> {
    if displacements.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(StateError::Annihilated);
    }
    let fundamental = displacements[0];
    let xi_ir = vacuum_overlap(&displacements[..1]);
    let xi_uv = vacuum_overlap(&displacements[1..]);
    Ok(ConditionedState::new(vec![
        Branch::new(C64::new(1.0, 0.0), vec![fundamental]),
        Branch::vacuum(C64::new(-xi_ir * xi_uv * xi_uv, 0.0), 1),
    ]))
}

/// Single-mode pure states that fidelities are measured against.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// Number state `|1⟩`.
    FockOne,
    Coherent(C64),
    State(ConditionedState),
}

/// `|⟨φ|ψ⟩|²` between normalized versions of both states.
pub fn fidelity(state: &ConditionedState, reference: &Reference) -> Result<f64, StateError> {
    let norm = state.norm_sqr();
    if norm <= 0.0 {
        return Err(StateError::ZeroNorm);
    }
    let (overlap, ref_norm) = match reference {
        Reference::FockOne => {
            if state.modes != 1 {
                return Err(StateError::NotSingleMode { modes: state.modes });
            }
            // ⟨1|α⟩ = α e^{-|α|²/2}
            let z: C64 = state
                .branches
                .iter()
                .map(|b| {
                    let a = b.amplitudes[0];
                    b.coefficient * a * (-0.5 * a.norm_sqr()).exp()
                })
                .sum();
            (z, 1.0)
        }
        Reference::Coherent(alpha) => {
            if state.modes != 1 {
                return Err(StateError::NotSingleMode { modes: state.modes });
            }
            (ConditionedState::coherent(*alpha).inner(state)?, 1.0)
        }
        Reference::State(phi) => {
            let n = phi.norm_sqr();
            if n <= 0.0 {
                return Err(StateError::ZeroNorm);
            }
            (phi.inner(state)?, n)
        }
    };
    Ok((overlap.norm_sqr() / (norm * ref_norm)).min(1.0))
}

/// `1 - tr ρ_q²` of the reduced state of mode `q`.
pub fn linear_entropy(state: &ConditionedState, q: usize) -> Result<f64, StateError> {
    Ok((1.0 - state.reduced(q)?.purity()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn ir_state_norm_matches_hand_evaluation() {
        let s = condition_ir(&[c(1.0, 0.0)]).unwrap();
        let e = (-1.0f64).exp();
        assert!((s.norm_sqr() - (1.0 - e)).abs() < 1e-14);
        assert!((s.norm_sqr() - 0.6321).abs() < 1e-4);
    }

    #[test]
    fn xi_factors() {
        let d = [c(0.3, 0.4), c(0.1, 0.0), c(0.0, 0.2)];
        let full = condition_full(&d).unwrap();
        let xi_ir = (-0.125f64).exp();
        let xi_uv = (-0.5 * (0.01 + 0.04f64)).exp();
        assert!((full.branches()[1].coefficient.re + xi_ir * xi_uv).abs() < 1e-15);
        let ir = condition_ir(&d).unwrap();
        assert!((ir.branches()[1].coefficient.re + xi_ir * xi_uv * xi_uv).abs() < 1e-15);
    }

    #[test]
    fn conditioning_zero_is_an_error() {
        let z = vec![c(0.0, 0.0); 5];
        assert_eq!(condition_full(&z), Err(StateError::Annihilated));
        assert_eq!(condition_ir(&z), Err(StateError::Annihilated));
    }

    #[test]
    fn small_fundamental_approaches_single_photon() {
        // vacuum weight left over is 1 - |ξ_UV|² ≈ Σ_q≥2 |χ_q|², small next to |χ_1|
        let d = [c(1e-3, 0.0), c(1e-3, 0.0), c(0.0, 5e-4)];
        let s = condition_ir(&d).unwrap();
        assert!(fidelity(&s, &Reference::FockOne).unwrap() > 1.0 - 1e-5);
        // strong harmonics leave a vacuum admixture instead
        let strong = condition_ir(&[c(1e-3, 0.0), c(0.8, 0.2)]).unwrap();
        assert!(fidelity(&strong, &Reference::FockOne).unwrap() < 0.01);
    }

    #[test]
    fn large_fundamental_approaches_coherent() {
        let alpha = c(4.0, 2.0);
        let s = condition_ir(&[alpha, c(0.1, 0.0)]).unwrap();
        assert!(fidelity(&s, &Reference::Coherent(alpha)).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn vacuum_coherent_fidelity() {
        let alpha = c(0.7, -1.1);
        let f = fidelity(&ConditionedState::coherent(alpha), &Reference::Coherent(c(0.0, 0.0))).unwrap();
        assert!((f - (-alpha.norm_sqr()).exp()).abs() < 1e-14);
    }

    #[test]
    fn itself_as_coherent_when_vacuum_branch_vanishes() {
        let alpha = c(1.2, 0.3);
        let s = ConditionedState::new(vec![Branch::new(c(1.0, 0.0), vec![alpha]), Branch::vacuum(c(0.0, 0.0), 1)]);
        assert!((fidelity(&s, &Reference::Coherent(alpha)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_nonzero_mode_has_no_entropy() {
        let d = [c(0.0, 0.0), c(1.3, 0.2), c(0.0, 0.0)];
        let s = condition_full(&d).unwrap();
        for q in 1..=3 {
            assert!(linear_entropy(&s, q).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn entropy_mode_range() {
        let s = condition_full(&[c(0.1, 0.0), c(0.2, 0.0)]).unwrap();
        assert_eq!(linear_entropy(&s, 0), Err(StateError::ModeOutOfRange { q: 0, modes: 2 }));
        assert_eq!(linear_entropy(&s, 3), Err(StateError::ModeOutOfRange { q: 3, modes: 2 }));
    }

    #[test]
    fn weak_displacement_entropy_limit() {
        // to leading order the conditioned state is a W-like single excitation
        let d = [c(1e-3, 0.0), c(2e-3, 0.0), c(0.0, 1e-3)];
        let total: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        let s = condition_full(&d).unwrap();
        for q in 1..=3 {
            let p = d[q - 1].norm_sqr() / total;
            assert!((linear_entropy(&s, q).unwrap() - 2.0 * p * (1.0 - p)).abs() < 1e-5);
        }
    }

    fn amp() -> impl Strategy<Value = C64> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(a, b)| c(a, b))
    }

    fn state(modes: usize) -> impl Strategy<Value = ConditionedState> {
        prop::collection::vec((amp(), prop::collection::vec(amp(), modes)), 1..4).prop_map(|bs| {
            ConditionedState::new(bs.into_iter().map(|(k, a)| Branch::new(k, a)).collect())
        })
    }

    proptest! {
        #[test]
        fn entropy_bounded(d in prop::collection::vec(amp(), 2..8), q in 1usize..8) {
            prop_assume!(q <= d.len());
            prop_assume!(d.iter().any(|z| z.norm() > 1e-3));
            let s = condition_full(&d).unwrap();
            let e = linear_entropy(&s, q).unwrap();
            prop_assert!((-1e-12..=0.5 + 1e-9).contains(&e));
        }

        #[test]
        fn fidelity_symmetric_and_bounded(a in state(2), b in state(2)) {
            prop_assume!(a.norm_sqr() > 1e-6 && b.norm_sqr() > 1e-6);
            let ab = fidelity(&a, &Reference::State(b.clone())).unwrap();
            let ba = fidelity(&b, &Reference::State(a.clone())).unwrap();
            prop_assert!((ab - ba).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&ab));
            let selfie = fidelity(&a, &Reference::State(a.scaled(c(-2.0, 0.5)))).unwrap();
            prop_assert!((selfie - 1.0).abs() < 1e-9);
        }

        #[test]
        fn global_phase_changes_nothing(d in prop::collection::vec(amp(), 1..5), phase in 0.0..6.3f64) {
            prop_assume!(d.iter().any(|z| z.norm() > 1e-3));
            let s = condition_full(&d).unwrap();
            let t = s.scaled(C64::cis(phase));
            for q in 1..=d.len() {
                let diff = linear_entropy(&s, q).unwrap() - linear_entropy(&t, q).unwrap();
                prop_assert!(diff.abs() < 1e-12);
            }
            let ir = condition_ir(&d).unwrap();
            let ir_t = ir.scaled(C64::cis(phase));
            let f = fidelity(&ir, &Reference::FockOne).unwrap() - fidelity(&ir_t, &Reference::FockOne).unwrap();
            prop_assert!(f.abs() < 1e-12);
        }

        #[test]
        fn displacement_preserves_norm(s in state(1), delta in amp()) {
            let d = s.displaced(1, delta).unwrap();
            prop_assert!((d.norm_sqr() - s.norm_sqr()).abs() < 1e-9 * (1.0 + s.norm_sqr()));
        }
    }
}
