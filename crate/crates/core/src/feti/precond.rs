//! Multiplier-space operators built from the scaled jump `B̃ = (B A Bᵀ)⁺ B A`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::Result;
use crate::interface::ScaledJump;
use crate::linalg::LinearOperator;
use crate::problem::Decomposition;
use crate::solve::Scaling;
use crate::splitting::inverse_diagonals;

/// Diagonal of `A` over all local dofs for the requested scaling.
pub fn scaling_weights(dec: &Decomposition, scaling: Scaling) -> Vec<DVector<f64>> {
    match scaling {
        Scaling::Multiplicity => dec.subdomains.iter().map(|s| DVector::from_element(s.diagonal.len(), 1.0)).collect(),
        Scaling::Stiffness => inverse_diagonals(dec),
    }
}

/// `Σ B̃⁽ˢ⁾ X⁽ˢ⁾ B̃⁽ˢ⁾ᵀ` for boundary matrices `X⁽ˢ⁾` (Schur complement or `K_bb`).
pub struct ScaledLocalOperator<'a> {
    dec: &'a Decomposition,
    scaled: ScaledJump<'a>,
    local: Vec<DMatrix<f64>>,
}

impl<'a> ScaledLocalOperator<'a> {
    /// Dirichlet preconditioner `B̃ S B̃ᵀ`.
    pub fn dirichlet(dec: &'a Decomposition, scaled: ScaledJump<'a>) -> Self {
        let local = dec.subdomains.iter().map(|s| s.schur.clone()).collect();
        Self { dec, scaled, local }
    }

    /// Lumped preconditioner `B̃ K_bb B̃ᵀ`.
    pub fn lumped(dec: &'a Decomposition, scaled: ScaledJump<'a>) -> Self {
        let local = dec.subdomains.iter().map(|s| s.condensation.k_bb().to_dense()).collect();
        Self { dec, scaled, local }
    }
}

impl LinearOperator for ScaledLocalOperator<'_> {
    fn dim(&self) -> usize {
        self.dec.multiplier_count()
    }

    fn apply(&self, r: &DVector<f64>) -> DVector<f64> {
        let mu = self.scaled.apply_pinv(r);
        let parts: Vec<DVector<f64>> = (0..self.dec.len())
            .into_par_iter()
            .map(|s| {
                let sub = &self.dec.subdomains[s];
                let v = self.scaled.weighted_transpose(s, &mu);
                let zb = &self.local[s] * sub.restrict_boundary(&v);
                let mut z = DVector::zeros(v.len());
                for (k, &i) in sub.boundary.iter().enumerate() {
                    z[i] = zb[k];
                }
                z
            })
            .collect();
        let mut out = DVector::zeros(r.len());
        for (s, z) in parts.iter().enumerate() {
            self.scaled.weighted_apply_add(s, z, &mut out);
        }
        self.scaled.apply_pinv(&out)
    }
}

/// `(B A Bᵀ)⁺` as an operator; with `A = diag(K_bb)⁻¹` this is the superlumped `Q`.
pub struct PinvOperator<'a>(pub ScaledJump<'a>);

impl LinearOperator for PinvOperator<'_> {
    fn dim(&self) -> usize {
        self.0.jump().len()
    }

    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.apply_pinv(x)
    }
}

/// Superlumped `Q = (B diag(K_bb)⁻¹ Bᵀ)⁺`.
pub fn superlumped(dec: &Decomposition) -> Result<PinvOperator<'_>> {
    Ok(PinvOperator(ScaledJump::new(&dec.jump, inverse_diagonals(dec))?))
}
