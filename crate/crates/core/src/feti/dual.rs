//! The dual interface problem
//!
//! ```text
//! [ F  G ] [ λ ]   [ d ]      F = Σ B K⁺ Bᵀ,  d = Σ B K⁺ f
//! [ Gᵀ 0 ] [ α ] = [ e ]      G = [B R],      e = [Rᵀ f]
//! ```
//!
//! with subdomain fields `u = K⁺(f − Bᵀλ) − R α`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::Decomposition;
use crate::splitting::SplitForces;

/// Multiplier count above which dense assembly of `F` is refused.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone)]
pub struct DualSystem<'a> {
    pub dec: &'a Decomposition,
    pub forces: Vec<DVector<f64>>,
    pub d: DVector<f64>,
    pub g: DMatrix<f64>,
    pub e: DVector<f64>,
    /// Columns of `G` owned by subdomain `s`: `mode_offsets[s]..mode_offsets[s + 1]`.
    pub mode_offsets: Vec<usize>,
}

impl<'a> DualSystem<'a> {
    pub fn new(dec: &'a Decomposition, split: &SplitForces) -> Result<Self> {
        let n = dec.multiplier_count();
        let mut mode_offsets = vec![0];
        for sub in &dec.subdomains {
            mode_offsets.push(mode_offsets.last().unwrap() + sub.mode_count());
        }
        let m = *mode_offsets.last().unwrap();
        let mut g = DMatrix::zeros(n, m);
        let mut e = DVector::zeros(m);
        for (s, sub) in dec.subdomains.iter().enumerate() {
            for c in 0..sub.mode_count() {
                let col = mode_offsets[s] + c;
                let r = sub.r.column(c).into_owned();
                let mut gc = DVector::zeros(n);
                dec.jump.apply_add(s, &r, &mut gc);
                g.set_column(col, &gc);
                e[col] = r.dot(&split.forces[s]);
            }
        }
        check_rank(&g)?;
        let mut sys = Self {
            dec,
            forces: split.forces.clone(),
            d: DVector::zeros(n),
            g,
            e,
            mode_offsets,
        };
        sys.d = sys.jump_of(&sys.local_solutions(&DVector::zeros(n)));
        Ok(sys)
    }

    pub fn multiplier_count(&self) -> usize {
        self.d.len()
    }

    pub fn coarse_dimension(&self) -> usize {
        self.g.ncols()
    }

    /// `F λ = Σ B K⁺ Bᵀ λ`
    pub fn apply_f(&self, lambda: &DVector<f64>) -> DVector<f64> {
        let parts: Vec<DVector<f64>> = (0..self.dec.len())
            .into_par_iter()
            .map(|s| self.dec.subdomains[s].kplus.apply(&self.dec.jump.transpose_apply(s, lambda)))
            .collect();
        self.jump_of(&parts)
    }

    /// `K⁺(f − Bᵀλ)` per subdomain.
    pub fn local_solutions(&self, lambda: &DVector<f64>) -> Vec<DVector<f64>> {
        (0..self.dec.len())
            .into_par_iter()
            .map(|s| {
                let rhs = &self.forces[s] - self.dec.jump.transpose_apply(s, lambda);
                self.dec.subdomains[s].kplus.apply(&rhs)
            })
            .collect()
    }

    /// `Σ B v⁽ˢ⁾`, summed in subdomain order.
    pub fn jump_of(&self, locals: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dec.multiplier_count());
        for (s, v) in locals.iter().enumerate() {
            self.dec.jump.apply_add(s, v, &mut out);
        }
        out
    }

    /// `u⁽ˢ⁾ = K⁺(f − Bᵀλ) − R α`
    pub fn displacements(&self, mut locals: Vec<DVector<f64>>, alpha: &DVector<f64>) -> Vec<DVector<f64>> {
        for (s, u) in locals.iter_mut().enumerate() {
            let sub = &self.dec.subdomains[s];
            if sub.is_floating() {
                let a = alpha.rows(self.mode_offsets[s], sub.mode_count());
                *u -= &sub.r * a;
            }
        }
        locals
    }

    /// `F` assembled column by column.
    pub fn dense_f(&self) -> Result<DMatrix<f64>> {
        let n = self.multiplier_count();
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge { size: n, limit: DENSE_LIMIT });
        }
        let mut f = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut unit = DVector::zeros(n);
            unit[c] = 1.0;
            f.set_column(c, &self.apply_f(&unit));
        }
        Ok((&f + f.transpose()) * 0.5)
    }
}

fn check_rank(g: &DMatrix<f64>) -> Result<()> {
    if g.ncols() == 0 {
        return Ok(());
    }
    if g.nrows() < g.ncols() {
        return Err(Error::SingularCoarse(format!("{} coarse modes but only {} multipliers", g.ncols(), g.nrows())));
    }
    let sv = g.singular_values();
    let max = sv.max();
    let min = sv.min();
    if !(min > 1e-12 * max) {
        return Err(Error::SingularCoarse(format!("G is rank deficient (singular values {min:.3e} / {max:.3e})")));
    }
    Ok(())
}
