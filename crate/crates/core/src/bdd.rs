//! Primal Schur complement solver with a balanced Neumann–Neumann preconditioner.
//!
//! The coarse balancing is applied as a deflation: with `Z` the weighted
//! interface traces of the subdomain rigid modes and `S_c = ZᵀSZ`, the
//! iteration runs on `P = I − Z S_c⁻¹ ZᵀS` from `x₀ = Z S_c⁻¹ Zᵀ b`, which
//! keeps every residual orthogonal to `Z` so each local Neumann solve in the
//! preconditioner is consistent.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{factorize_semidefinite_dense, orthonormalize, pcg, FnOperator, GeneralizedInverse, IterateView, PcgOptions, Projection};
use crate::problem::Decomposition;
use crate::registry::Strategies;
use crate::solve::{Diagnostics, HistoryRow, ResidualHistory, Solution, SolveOptions, Stopping};
use crate::splitting::{condensed_forces, SplitForces};

pub struct PrimalSystem<'a> {
    pub dec: &'a Decomposition,
    pub forces: Vec<DVector<f64>>,
    /// Interface index of each boundary dof, per subdomain.
    pub maps: Vec<Vec<usize>>,
    /// Weights `D⁽ˢ⁾` on boundary dofs; `Σ L_bᵀ D L_b = I`.
    pub weights: Vec<DVector<f64>>,
    /// `Σ L_bᵀ f*_b`
    pub rhs: DVector<f64>,
    /// Global dof of each interface unknown.
    pub interface_dofs: Vec<usize>,
    neumann: Vec<GeneralizedInverse>,
}

impl<'a> PrimalSystem<'a> {
    pub fn new(dec: &'a Decomposition, split: &SplitForces) -> Result<Self> {
        let mut index = vec![usize::MAX; dec.trace.global_count];
        let mut interface_dofs = Vec::new();
        for g in 0..dec.trace.global_count {
            if dec.trace.multiplicity(g) >= 2 {
                index[g] = interface_dofs.len();
                interface_dofs.push(g);
            }
        }
        let n = interface_dofs.len();
        let maps: Vec<Vec<usize>> = (0..dec.len())
            .map(|s| dec.subdomains[s].boundary.iter().map(|&i| index[dec.trace.dofs[s][i].global]).collect())
            .collect();

        let mut assembled = DVector::<f64>::zeros(n);
        for (s, sub) in dec.subdomains.iter().enumerate() {
            for (k, &i) in sub.boundary.iter().enumerate() {
                assembled[maps[s][k]] += sub.diagonal[i];
            }
        }
        let weights = dec
            .subdomains
            .iter()
            .enumerate()
            .map(|(s, sub)| DVector::from_iterator(sub.boundary.len(), sub.boundary.iter().enumerate().map(|(k, &i)| sub.diagonal[i] / assembled[maps[s][k]])))
            .collect();

        let fstar = condensed_forces(dec, &split.forces);
        let mut rhs = DVector::zeros(n);
        for (s, fb) in fstar.iter().enumerate() {
            for (k, v) in fb.iter().enumerate() {
                rhs[maps[s][k]] += v;
            }
        }

        let neumann = (0..dec.len())
            .into_par_iter()
            .map(|s| {
                let sub = &dec.subdomains[s];
                let rb = orthonormalize(&sub.r_boundary(), 1e-10);
                if rb.ncols() != sub.mode_count() {
                    return Err(Error::InconsistentNullSpace(format!(
                        "{} rigid modes but rank {} on the boundary",
                        sub.mode_count(),
                        rb.ncols()
                    ))
                    .in_subdomain(s));
                }
                factorize_semidefinite_dense(&sub.schur, &rb).map_err(|e| e.in_subdomain(s))
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            dec,
            forces: split.forces.clone(),
            maps,
            weights,
            rhs,
            interface_dofs,
            neumann,
        })
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    fn gather(&self, s: usize, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.maps[s].len(), self.maps[s].iter().map(|&i| x[i]))
    }

    fn scatter(&self, parts: &[DVector<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (s, p) in parts.iter().enumerate() {
            for (k, v) in p.iter().enumerate() {
                out[self.maps[s][k]] += v;
            }
        }
        out
    }

    /// `Σ L_bᵀ S L_b x`
    pub fn apply_s(&self, x: &DVector<f64>) -> DVector<f64> {
        let parts: Vec<DVector<f64>> = (0..self.dec.len())
            .into_par_iter()
            .map(|s| &self.dec.subdomains[s].schur * self.gather(s, x))
            .collect();
        self.scatter(&parts)
    }

    /// `Σ L_bᵀ D S⁺ D L_b r`
    pub fn neumann_neumann(&self, r: &DVector<f64>) -> DVector<f64> {
        let parts: Vec<DVector<f64>> = (0..self.dec.len())
            .into_par_iter()
            .map(|s| {
                let v = self.gather(s, r).component_mul(&self.weights[s]);
                self.neumann[s].apply(&v).component_mul(&self.weights[s])
            })
            .collect();
        self.scatter(&parts)
    }

    /// Coarse basis columns `L_bᵀ D R_b` of the floating subdomains.
    pub fn coarse_basis(&self) -> DMatrix<f64> {
        let mut cols = Vec::new();
        for (s, sub) in self.dec.subdomains.iter().enumerate() {
            let rb = sub.r_boundary();
            for c in 0..rb.ncols() {
                let part = rb.column(c).component_mul(&self.weights[s]);
                let mut col = DVector::zeros(self.dim());
                for (k, v) in part.iter().enumerate() {
                    col[self.maps[s][k]] += v;
                }
                cols.push(col);
            }
        }
        if cols.is_empty() {
            DMatrix::zeros(self.dim(), 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// Subdomain fields for interface values `x`, interiors by back-substitution.
    pub fn local_fields(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        (0..self.dec.len())
            .into_par_iter()
            .map(|s| self.dec.subdomains[s].condensation.extend(&self.forces[s], &self.gather(s, x)))
            .collect()
    }
}

/// `P = I − Z S_c⁻¹ ZᵀS`, `Pᵀ = I − SZ S_c⁻¹ Zᵀ`.
pub struct Deflation {
    z: DMatrix<f64>,
    sz: DMatrix<f64>,
    sc: DMatrix<f64>,
    factor: Option<Cholesky<f64, Dyn>>,
}

impl Deflation {
    pub fn new(z: DMatrix<f64>, apply_s: impl Fn(&DVector<f64>) -> DVector<f64>) -> Result<Self> {
        let m = z.ncols();
        let mut sz = DMatrix::zeros(z.nrows(), m);
        for c in 0..m {
            sz.set_column(c, &apply_s(&z.column(c).into_owned()));
        }
        let sc = z.transpose() * &sz;
        let sc = (&sc + sc.transpose()) * 0.5;
        let factor = if m == 0 {
            None
        } else {
            Some(Cholesky::new(sc.clone()).ok_or_else(|| Error::SingularCoarse("ZᵀSZ is not positive definite (duplicated modes?)".into()))?)
        };
        Ok(Self { z, sz, sc, factor })
    }

    pub fn coarse_solve(&self, y: &DVector<f64>) -> DVector<f64> {
        match &self.factor {
            None => DVector::zeros(0),
            Some(f) => {
                let mut x = f.solve(y);
                let r = y - &self.sc * &x;
                x += f.solve(&r);
                x
            }
        }
    }

    /// `x₀ = Z S_c⁻¹ Zᵀ b`
    pub fn start(&self, b: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return DVector::zeros(b.len());
        }
        &self.z * self.coarse_solve(&(self.z.transpose() * b))
    }

    pub fn z(&self) -> &DMatrix<f64> {
        &self.z
    }
}

impl Projection for Deflation {
    fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return x.clone();
        }
        x - &self.z * self.coarse_solve(&(self.sz.transpose() * x))
    }

    fn project_transpose(&self, x: &DVector<f64>) -> DVector<f64> {
        if self.factor.is_none() {
            return x.clone();
        }
        x - &self.sz * self.coarse_solve(&(self.z.transpose() * x))
    }
}

pub fn solve_bdd(dec: &Decomposition, opts: &SolveOptions, strategies: &Strategies) -> Result<Solution> {
    let split = strategies.splittings.get(&opts.splitting)?.split(dec, &dec.raw_forces())?;
    let primal = PrimalSystem::new(dec, &split)?;
    let n = primal.dim();
    let deflation = Deflation::new(primal.coarse_basis(), |x| primal.apply_s(x))?;
    let x0 = deflation.start(&primal.rhs);

    let b_norm = primal.rhs.norm();
    let mut admissibility = 0.0f64;
    let mut history = ResidualHistory::default();
    let mut w0 = None;
    let start = Instant::now();
    let mut functional = |v: &IterateView| {
        if deflation.z().ncols() > 0 && b_norm > 0.0 {
            let balance = (deflation.z().transpose() * v.residual).norm() / b_norm;
            admissibility = admissibility.max(balance);
        }
        let locals = primal.local_fields(v.x);
        let global = dec.global_residual(&dec.average(&locals));
        let w = v.residual.norm();
        history.rows.push(HistoryRow {
            iteration: v.iteration,
            interface_residual: w,
            global_residual: global,
            seconds: start.elapsed().as_secs_f64(),
        });
        match opts.stopping {
            Stopping::Global => global,
            Stopping::Interface => {
                let base = *w0.get_or_insert(w);
                if base > 0.0 {
                    w / base
                } else {
                    0.0
                }
            }
        }
    };

    let s_op = FnOperator::new(n, |x: &DVector<f64>| primal.apply_s(x));
    let m_op = FnOperator::new(n, |x: &DVector<f64>| primal.neumann_neumann(x));
    let pcg_opts = PcgOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        reorthogonalize: true,
    };
    let (x, krylov) = pcg(&s_op, &m_op, &deflation, &primal.rhs, &x0, &pcg_opts, &mut functional);

    let locals = primal.local_fields(&x);
    let u = dec.average(&locals);
    let diagnostics = Diagnostics {
        admissibility,
        projector_defect: 0.0,
        coarse_dimension: deflation.z().ncols(),
        interface_dimension: n,
    };
    Ok(Solution {
        u,
        locals,
        history,
        krylov,
        lambda: None,
        alpha: None,
        diagnostics,
    })
}
