//! Options and results shared by the interface solvers.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::KrylovReport;

/// Quantity the Krylov iteration is stopped on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stopping {
    /// `‖K_g u_g − f_g‖ / ‖f_g‖`
    #[default]
    Global,
    /// `‖w_k‖ / ‖w_0‖` for the projected interface residual `w`.
    Interface,
}

impl Stopping {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "global" => Ok(Self::Global),
            "interface" => Ok(Self::Interface),
            _ => Err(Error::UnknownStrategy {
                kind: "stopping",
                name: name.into(),
                available: "global, interface".into(),
            }),
        }
    }
}

/// Weighting `A` of the scaled jump `(B A Bᵀ)⁺ B A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// `A = I`
    Multiplicity,
    /// `A = diag(K_bb)⁻¹`
    #[default]
    Stiffness,
}

impl Scaling {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "multiplicity" => Ok(Self::Multiplicity),
            "stiffness" => Ok(Self::Stiffness),
            _ => Err(Error::UnknownStrategy {
                kind: "scaling",
                name: name.into(),
                available: "multiplicity, stiffness".into(),
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Multiplicity => "multiplicity",
            Self::Stiffness => "stiffness",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub solver: String,
    pub projector: String,
    pub preconditioner: String,
    pub scaling: Scaling,
    pub splitting: String,
    pub initialization: String,
    pub tol: f64,
    pub max_iter: usize,
    pub stopping: Stopping,
    /// Seed of the random probes used by run-time checks.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            solver: "feti".into(),
            projector: "dirichlet".into(),
            preconditioner: "dirichlet".into(),
            scaling: Scaling::Stiffness,
            splitting: "none".into(),
            initialization: "new".into(),
            tol: 1e-6,
            max_iter: 500,
            stopping: Stopping::Global,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    pub iteration: usize,
    /// `‖w_k‖₂` of the projected interface residual.
    pub interface_residual: f64,
    pub global_residual: f64,
    /// Wall time since the Krylov loop started.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResidualHistory {
    pub rows: Vec<HistoryRow>,
}

impl ResidualHistory {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn initial_global(&self) -> Option<f64> {
        self.rows.first().map(|r| r.global_residual)
    }

    pub fn final_global(&self) -> Option<f64> {
        self.rows.last().map(|r| r.global_residual)
    }

    pub fn interface(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.interface_residual).collect()
    }

    pub fn global(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.global_residual).collect()
    }
}

/// Invariant measurements taken during a solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Max over iterates of `‖Gᵀλ_k − e‖ / ‖e‖` (dual) or `‖Zᵀ r_k‖ / ‖b‖` (primal).
    pub admissibility: f64,
    /// `max ‖Gᵀ P x‖ / (‖G‖ ‖x‖)` on random probes.
    pub projector_defect: f64,
    pub coarse_dimension: usize,
    pub interface_dimension: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Displacements on the free global dofs.
    pub u: DVector<f64>,
    pub locals: Vec<DVector<f64>>,
    pub history: ResidualHistory,
    pub krylov: KrylovReport,
    pub lambda: Option<DVector<f64>>,
    pub alpha: Option<DVector<f64>>,
    pub diagnostics: Diagnostics,
}

impl Solution {
    pub fn converged(&self) -> bool {
        self.krylov.converged()
    }

    pub fn iterations(&self) -> usize {
        self.krylov.iterations
    }
}

/// Relative 2-norm distance `‖a − b‖ / ‖b‖`.
pub fn relative_error(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let nb = b.norm();
    let d = (a - b).norm();
    if nb > 0.0 {
        d / nb
    } else {
        d
    }
}
