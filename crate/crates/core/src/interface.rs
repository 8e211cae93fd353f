//! Weighted jump operators `(B A Bᵀ)⁺ B A` for diagonal `A`.
//!
//! Multipliers acting on one global dof form a contiguous group, and `B A Bᵀ`
//! couples only multipliers of the same group, so its pseudo-inverse is taken
//! group by group.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::small_pinv;
use crate::mesh::JumpMap;

#[derive(Debug, Clone)]
pub struct ScaledJump<'a> {
    jump: &'a JumpMap,
    /// Diagonal of `A` per subdomain over all local dofs.
    weights: Vec<DVector<f64>>,
    /// `B A Bᵀ` restricted to each multiplier group.
    grams: Vec<DMatrix<f64>>,
    /// Its pseudo-inverse.
    blocks: Vec<DMatrix<f64>>,
}

impl<'a> ScaledJump<'a> {
    pub fn new(jump: &'a JumpMap, weights: Vec<DVector<f64>>) -> Result<Self> {
        let mut grams = Vec::with_capacity(jump.groups.len());
        let mut blocks = Vec::with_capacity(jump.groups.len());
        for (_, range) in &jump.groups {
            let m = range.len();
            let ends: Vec<[(usize, usize, f64); 2]> = range
                .clone()
                .map(|k| {
                    let mult = &jump.multipliers[k];
                    [
                        (mult.plus.subdomain, mult.plus.local, 1.0),
                        (mult.minus.subdomain, mult.minus.local, -1.0),
                    ]
                })
                .collect();
            let mut bab = DMatrix::zeros(m, m);
            for a in 0..m {
                for b in 0..m {
                    for &(sa, la, ga) in &ends[a] {
                        for &(sb, lb, gb) in &ends[b] {
                            if sa == sb && la == lb {
                                bab[(a, b)] += ga * gb * weights[sa][la];
                            }
                        }
                    }
                }
            }
            blocks.push(small_pinv(&bab)?);
            grams.push(bab);
        }
        Ok(Self {
            jump,
            weights,
            grams,
            blocks,
        })
    }

    pub fn jump(&self) -> &JumpMap {
        self.jump
    }

    /// `(B A Bᵀ)⁺ x`, refined once per group since strong coefficient jumps
    /// make the group blocks ill-conditioned.
    pub fn apply_pinv(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(x.len());
        for (((_, range), block), gram) in self.jump.groups.iter().zip(&self.blocks).zip(&self.grams) {
            let xs = x.rows(range.start, range.len());
            let mut ys = block * xs;
            let r = xs - gram * &ys;
            ys += block * r;
            y.rows_mut(range.start, range.len()).copy_from(&ys);
        }
        y
    }

    /// `Σ B⁽ˢ⁾ A⁽ˢ⁾ v⁽ˢ⁾`
    pub fn weighted_jump(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.jump.len());
        for (s, v) in locals.iter().enumerate() {
            for &(m, l, sign) in self.jump.entries(s) {
                out[m] += sign * self.weights[s][l] * v[l];
            }
        }
        out
    }

    /// `(B A Bᵀ)⁺ B A v`, the multipliers whose scaled transpose best reproduces `v`.
    pub fn project_forces(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        self.apply_pinv(&self.weighted_jump(locals))
    }

    /// `B̃⁽ˢ⁾ᵀ μ = A⁽ˢ⁾ B⁽ˢ⁾ᵀ μ` for `μ` already multiplied by `(B A Bᵀ)⁺`.
    pub fn weighted_transpose(&self, s: usize, mu: &DVector<f64>) -> DVector<f64> {
        let mut v = self.jump.transpose_apply(s, mu);
        v.component_mul_assign(&self.weights[s]);
        v
    }

    /// `out += B⁽ˢ⁾ A⁽ˢ⁾ v`
    pub fn weighted_apply_add(&self, s: usize, v: &DVector<f64>, out: &mut DVector<f64>) {
        for &(m, l, sign) in self.jump.entries(s) {
            out[m] += sign * self.weights[s][l] * v[l];
        }
    }
}
