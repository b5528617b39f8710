//! Exact post-attack states built from an explicit attack, used to check the
//! entropy inequalities the key-rate bound relies on.
//!
//! Everything here is block diagonal in the classical registers `B` (Bob's
//! trit) and `C` (error class), so each entropy is a sum over blocks of
//! Eve-space entropies.

use serde::{Deserialize, Serialize};

use crate::attack::{AttackModel, VectorFamilies};
use crate::error::Result;
use crate::linalg::{entropy_term3, hermitian_eigenvalues, CMat, CVec};
use crate::stats::{c_label, t_values, p_table_from_attack};

/// `−Σ λ log₃ λ` over the spectrum of a positive, not necessarily
/// normalized, operator.
pub fn block_entropy3(block: &CMat) -> Result<f64> {
    Ok(hermitian_eigenvalues(block)?.into_iter().filter(|l| *l > 0.0).map(entropy_term3).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactEntropies {
    pub s_be: f64,
    pub s_e: f64,
    pub s_bec: f64,
    pub s_ec: f64,
    /// `S(σ̃ⱼ)` for the four error classes.
    pub sigma_entropies: [f64; 4],
    pub t: [f64; 4],
    /// `Σ |⟨·|·⟩|²` over the three pairs of `e⁰₀,₀, e¹₁,₄, e²₂,₈`.
    pub p: f64,
    /// `Re` of the sum of the same three overlaps.
    pub x: f64,
}

impl ExactEntropies {
    pub fn s_b_given_e(&self) -> f64 {
        self.s_be - self.s_e
    }

    pub fn s_b_given_ec(&self) -> f64 {
        self.s_bec - self.s_ec
    }
}

pub fn exact_entropies(attack: &AttackModel) -> Result<ExactEntropies> {
    let fams = VectorFamilies::from_attack(attack);
    let dim = attack.eve_dim();
    let zero = || CMat::zeros(dim, dim);
    let mut by_b = vec![zero(); 3];
    let mut by_bc = vec![zero(); 12];
    let mut by_c = vec![zero(); 4];
    for m in 0..3 {
        for i in 0..3 {
            for k in 0..3 {
                let v = fams.ek.for_outcome(m, i, k);
                let proj = v.projector().scale_real(1.0 / 3.0);
                let c = c_label(m, i, k);
                by_b[i] = &by_b[i] + &proj;
                by_bc[4 * i + c] = &by_bc[4 * i + c] + &proj;
                by_c[c] = &by_c[c] + &proj;
            }
        }
    }
    let rho_e = by_b.iter().fold(zero(), |acc, b| &acc + b);
    let sum_entropy = |blocks: &[CMat]| -> Result<f64> { blocks.iter().map(block_entropy3).sum() };

    let t = t_values(&p_table_from_attack(&fams));
    let mut sigma_entropies = [0.0; 4];
    for (c, block) in by_c.iter().enumerate() {
        let weight = t[c] / 3.0;
        if weight > 0.0 {
            sigma_entropies[c] = block_entropy3(&block.scale_real(1.0 / weight))?;
        }
    }

    let a: &CVec = fams.ek.for_outcome(0, 0, 0);
    let b = fams.ek.for_outcome(1, 1, 1);
    let c = fams.ek.for_outcome(2, 2, 2);
    let overlaps = [a.inner(b), a.inner(c), b.inner(c)];

    Ok(ExactEntropies {
        s_be: sum_entropy(&by_b)?,
        s_e: block_entropy3(&rho_e)?,
        s_bec: sum_entropy(&by_bc)?,
        s_ec: sum_entropy(&by_c)?,
        sigma_entropies,
        t,
        p: overlaps.iter().map(|z| z.norm_sqr()).sum(),
        x: overlaps.iter().map(|z| z.re).sum(),
    })
}
