//! The coupled-ensemble recursion in its three equivalent forms.
//!
//! * `x⁽ℓ⁾ = h(B̃x⁽ℓ⁻¹⁾)` with `B̃ = AᵀA`, `x⁽⁰⁾ = 1_L` (the form shared with
//!   deterministic codes);
//! * `x̃⁽ℓ⁾ = cA Ψ(Aᵀx̃⁽ℓ⁻¹⁾)`, `x̃⁽⁰⁾ = c1_{L'}` (VN-side form);
//! * `y⁽ℓ⁾ = cAᵀA Ψ(y⁽ℓ⁻¹⁾)` (modified ensemble), started from `y⁽¹⁾ = cAᵀ1`.
//!
//! They are linked by `x̃⁽ℓ⁾ = cAx⁽ℓ⁾`, `y⁽ℓ⁾ = Aᵀx̃⁽ℓ⁻¹⁾` and
//! `x̃⁽ℓ⁾ = cAΨ(y⁽ℓ⁾)`. Here `Ψ` is the profile mixture `Σ τ_t Ψ_{≥t}`.

use super::profile::ErasureProfile;
use super::run::{de_run, DeConfig, DeTrace};
use crate::construction::{ensemble_a, ensemble_b_tilde, AveragingMatrix, EnsembleParams};
use crate::error::Result;

pub fn ensemble_averaging_matrix(params: EnsembleParams) -> AveragingMatrix {
    AveragingMatrix::new(ensemble_b_tilde(params)).expect("AᵀA is square and nonnegative")
}

/// `x⁽ℓ⁾ = h(B̃x⁽ℓ⁻¹⁾)`.
pub fn ensemble_de_run(
    params: EnsembleParams,
    profile: &ErasureProfile,
    config: &DeConfig,
) -> Result<DeTrace> {
    de_run(&ensemble_averaging_matrix(params).to_sparse(), profile, config)
}

/// `x̃⁽0..=iters⁾` of the VN-side recursion.
pub fn ensemble_vn_iterate(
    params: EnsembleParams,
    profile: &ErasureProfile,
    c: f64,
    iters: usize,
) -> Vec<Vec<f64>> {
    let a = ensemble_a(params).to_sparse();
    let at = a.transpose();
    let mut out = Vec::with_capacity(iters + 1);
    let mut xt = vec![c; params.reduced_length()];
    out.push(xt.clone());
    for _ in 0..iters {
        let psi: Vec<f64> = at.mul_vec(&xt).into_iter().map(|u| profile.tail_mix(u)).collect();
        xt = a.mul_vec(&psi).into_iter().map(|v| c * v).collect();
        out.push(xt.clone());
    }
    out
}

/// `y⁽1..=iters⁾` of the modified-ensemble recursion.
pub fn modified_ensemble_iterate(
    params: EnsembleParams,
    profile: &ErasureProfile,
    c: f64,
    iters: usize,
) -> Vec<Vec<f64>> {
    let a = ensemble_a(params).to_sparse();
    let at = a.transpose();
    let bt = ensemble_averaging_matrix(params).to_sparse();
    let mut out = Vec::with_capacity(iters);
    if iters == 0 {
        return out;
    }
    let mut y: Vec<f64> = at
        .mul_vec(&vec![1.0; params.reduced_length()])
        .into_iter()
        .map(|v| c * v)
        .collect();
    out.push(y.clone());
    for _ in 1..iters {
        let psi: Vec<f64> = y.iter().map(|&u| profile.tail_mix(u)).collect();
        y = bt.mul_vec(&psi).into_iter().map(|v| c * v).collect();
        out.push(y.clone());
    }
    out
}
