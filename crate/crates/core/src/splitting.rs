//! Redistribution of interface loads between subdomains.
//!
//! Every splitting adds equilibrated interface forces `f̃ = f − Bᵀμ`, so the
//! assembled load `Lᵀf̃` and the displacement solution are unchanged while the
//! Lagrange multipliers shift by `μ`.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::interface::ScaledJump;
use crate::linalg::small_pinv;
use crate::problem::Decomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Raw,
    Classical,
    Condensed,
}

#[derive(Debug, Clone)]
pub struct SplitForces {
    pub forces: Vec<DVector<f64>>,
    pub provenance: Provenance,
}

impl SplitForces {
    pub fn raw(dec: &Decomposition) -> Self {
        Self {
            forces: dec.raw_forces(),
            provenance: Provenance::Raw,
        }
    }

    /// `Lᵀ f̃`
    pub fn assembled(&self, dec: &Decomposition) -> DVector<f64> {
        dec.trace.assemble(&self.forces)
    }
}

/// `A = diag(K)⁻¹` over all local dofs.
pub fn inverse_diagonals(dec: &Decomposition) -> Vec<DVector<f64>> {
    dec.subdomains.iter().map(|s| s.diagonal.map(|d| 1.0 / d)).collect()
}

/// Shares each assembled nodal load in proportion to the subdomain diagonal stiffness:
/// `f̃ = diag(K) L (Lᵀ diag(K) L)⁻¹ Lᵀ f`.
pub fn split_classical(dec: &Decomposition, f: &[DVector<f64>]) -> SplitForces {
    let total = dec.trace.assemble(f);
    let diags: Vec<DVector<f64>> = dec.subdomains.iter().map(|s| s.diagonal.clone()).collect();
    let assembled_diag = dec.trace.assemble(&diags);
    let forces = (0..dec.len())
        .map(|s| {
            DVector::from_iterator(
                dec.trace.local_count(s),
                dec.trace.dofs[s]
                    .iter()
                    .enumerate()
                    .map(|(i, d)| diags[s][i] / assembled_diag[d.global] * total[d.global]),
            )
        })
        .collect();
    SplitForces {
        forces,
        provenance: Provenance::Classical,
    }
}

/// The same splitting written with the jump operator:
/// `f̃ = f − Bᵀ (B diag(K)⁻¹ Bᵀ)⁺ B diag(K)⁻¹ f`.
pub fn split_via_jump(dec: &Decomposition, f: &[DVector<f64>]) -> Result<SplitForces> {
    let sj = ScaledJump::new(&dec.jump, inverse_diagonals(dec))?;
    let mu = sj.project_forces(f);
    let forces = f.iter().enumerate().map(|(s, fs)| fs - dec.jump.transpose_apply(s, &mu)).collect();
    Ok(SplitForces {
        forces,
        provenance: Provenance::Classical,
    })
}

/// Statically condensed boundary forces `f*_b = f_b − K_bi K_ii⁻¹ f_i` per subdomain.
pub fn condensed_forces(dec: &Decomposition, f: &[DVector<f64>]) -> Vec<DVector<f64>> {
    dec.subdomains.iter().zip(f).map(|(s, fs)| s.condensation.condense(fs)).collect()
}

/// Splits the condensed boundary forces by diagonal interface stiffness and
/// returns the equivalent non-condensed loads `[f_i; f̃*_b + K_bi K_ii⁻¹ f_i]`.
pub fn split_condensed(dec: &Decomposition, f: &[DVector<f64>]) -> SplitForces {
    let fstar = condensed_forces(dec, f);
    // assemble f*_b and diag(K_bb) on the global dofs they live on
    let mut total = DVector::<f64>::zeros(dec.trace.global_count);
    let mut assembled_diag = DVector::<f64>::zeros(dec.trace.global_count);
    for (s, sub) in dec.subdomains.iter().enumerate() {
        for (k, &i) in sub.boundary.iter().enumerate() {
            let g = dec.trace.dofs[s][i].global;
            total[g] += fstar[s][k];
            assembled_diag[g] += sub.diagonal[i];
        }
    }
    let forces = dec
        .subdomains
        .iter()
        .enumerate()
        .map(|(s, sub)| {
            let mut out = f[s].clone();
            for (k, &i) in sub.boundary.iter().enumerate() {
                let g = dec.trace.dofs[s][i].global;
                let split = sub.diagonal[i] / assembled_diag[g] * total[g];
                out[i] += split - fstar[s][k];
            }
            out
        })
        .collect();
    SplitForces {
        forces,
        provenance: Provenance::Condensed,
    }
}

/// Max entrywise deviation of `A L (LᵀAL)⁻¹ Lᵀ + Bᵀ (B A⁻¹ Bᵀ)⁺ B A⁻¹` from the identity.
///
/// `l` is the stacked trace (rows = subdomain dofs), `b` the stacked jump, `a` SPD.
pub fn complementarity_check(a: &DMatrix<f64>, b: &DMatrix<f64>, l: &DMatrix<f64>) -> Result<f64> {
    let n = a.nrows();
    let ainv = a.clone().try_inverse().ok_or_else(|| crate::Error::Dimension("weight matrix is singular".into()))?;
    let lal = l.transpose() * a * l;
    let lal_inv = lal.try_inverse().ok_or_else(|| crate::Error::Dimension("LᵀAL is singular".into()))?;
    let primal = a * l * lal_inv * l.transpose();
    let bab = b * &ainv * b.transpose();
    let bab = (&bab + bab.transpose()) * 0.5;
    let dual = b.transpose() * small_pinv(&bab)? * b * &ainv;
    Ok((primal + dual - DMatrix::identity(n, n)).amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::two_spring_decomposition;

    #[test]
    fn two_spring_interface_load_shares() {
        let dec = two_spring_decomposition(10.0, 1.0, [0.0, 1.0, 0.0]).unwrap();
        let split = split_classical(&dec, &dec.raw_forces());
        assert!((split.forces[0][0] - 10.0 / 11.0).abs() < 1e-15);
        assert!((split.forces[1][0] - 1.0 / 11.0).abs() < 1e-15);
        let jump = split_via_jump(&dec, &dec.raw_forces()).unwrap();
        for s in 0..2 {
            assert!((&jump.forces[s] - &split.forces[s]).amax() < 1e-15);
        }
    }

    #[test]
    fn two_node_complementarity_by_hand() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let l = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(complementarity_check(&a, &b, &l).unwrap() < 1e-15);
    }
}
