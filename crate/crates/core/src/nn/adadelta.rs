use alloc::vec;
use alloc::vec::Vec;

use super::params::Parameters;
use crate::error::{invalid, Result};

pub const DEFAULT_RHO: f64 = 0.95;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Running averages `E[g²]` and `E[Δx²]`, one slot per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdadeltaState {
    pub sq_grad: Vec<Vec<f64>>,
    pub sq_update: Vec<Vec<f64>>,
}

impl AdadeltaState {
    pub fn new<P: Parameters>(params: &P) -> Self {
        let zeros: Vec<Vec<f64>> = params.blocks().iter().map(|b| vec![0.0; b.len()]).collect();
        Self {
            sq_grad: zeros.clone(),
            sq_update: zeros,
        }
    }
}

/// One ADADELTA update, moving uphill along `grads`:
///
/// ```text
/// E[g²]  ← ρ E[g²] + (1 − ρ) g²
/// Δ      = √(E[Δx²] + ε) / √(E[g²] + ε) · g
/// E[Δx²] ← ρ E[Δx²] + (1 − ρ) Δ²
/// θ      ← θ + Δ
/// ```
pub fn adadelta_step<P: Parameters>(
    params: &mut P,
    grads: &P,
    state: &mut AdadeltaState,
    rho: f64,
    epsilon: f64,
) -> Result<()> {
    let g_blocks = grads.blocks();
    let mut p_blocks = params.blocks_mut();
    if p_blocks.len() != g_blocks.len() || state.sq_grad.len() != g_blocks.len() {
        return Err(invalid!("parameter, gradient and state blocks disagree"));
    }
    for (((p, g), eg), ex) in p_blocks
        .iter_mut()
        .zip(&g_blocks)
        .zip(state.sq_grad.iter_mut())
        .zip(state.sq_update.iter_mut())
    {
        if p.len() != g.len() || eg.len() != g.len() {
            return Err(invalid!("block length mismatch"));
        }
        for i in 0..g.len() {
            let gi = g[i];
            eg[i] = rho * eg[i] + (1.0 - rho) * gi * gi;
            let delta = libm::sqrt(ex[i] + epsilon) / libm::sqrt(eg[i] + epsilon) * gi;
            ex[i] = rho * ex[i] + (1.0 - rho) * delta * delta;
            p[i] += delta;
        }
    }
    Ok(())
}
