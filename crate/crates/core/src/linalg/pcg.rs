//! Projected preconditioned conjugate gradient with full reorthogonalization.
//!
//! Solves `Pᵀ A P x̄ = Pᵀ (b − A x₀)` for an admissible start `x₀`:
//!
//! ```text
//! w₀ = Pᵀ (b − A x₀)          projected residual
//! z₀ = P M w₀                 projected, preconditioned residual
//! for k = 1, 2, …
//!     p = z − Σ_i (z·A p_i)/(p_i·A p_i) p_i     (modified Gram–Schmidt, all i)
//!     η = (p·w)/(p·A p)
//!     x ← x + η p
//!     w ← w − η Pᵀ A p
//!     z ← P M w
//! ```
//!
//! Every direction lies in `range(P)`, so iterates keep the admissibility of
//! `x₀`. Convergence is judged by a caller-supplied functional evaluated on
//! each iterate. An iteration that stops short of the tolerance returns the
//! iterate with the smallest functional.

use nalgebra::DVector;

use crate::linalg::operator::{LinearOperator, Projection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub reorthogonalize: bool,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            reorthogonalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Converged,
    MaxIterations,
    /// The preconditioned residual reached rounding level before the functional met the tolerance.
    Stagnation,
    Breakdown(String),
}

/// `√|w·z|` below this fraction of its largest value is rounding noise.
const STAGNATION: f64 = 1e-13;
/// Iterations without a relative improvement of `PLATEAU_GAIN` in `√|w·z|`
/// before the iteration is declared stagnant. Past the attainable accuracy
/// the directions are noise and further steps only amplify it.
const PLATEAU_WINDOW: usize = 6;
const PLATEAU_GAIN: f64 = 1e-3;

/// State handed to the convergence functional.
pub struct IterateView<'a> {
    pub iteration: usize,
    pub x: &'a DVector<f64>,
    /// Projected residual `w`.
    pub residual: &'a DVector<f64>,
    /// Projected preconditioned residual `z`.
    pub preconditioned: &'a DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct KrylovReport {
    pub iterations: usize,
    /// `‖w_k‖₂` for k = 0..=iterations.
    pub residual_norms: Vec<f64>,
    /// `√|w_k·z_k|`
    pub preconditioned_norms: Vec<f64>,
    /// Convergence functional per iterate.
    pub functional: Vec<f64>,
    pub negative_curvature: Vec<usize>,
    pub directions: usize,
    /// Max over i≠j of `|p_iᵀ A p_j| / (‖p_i‖_A ‖p_j‖_A)`.
    pub conjugacy_defect: f64,
    pub termination: Termination,
}

impl KrylovReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

struct Direction {
    p: DVector<f64>,
    ap: DVector<f64>,
    pap: f64,
}

pub fn pcg(
    a: &dyn LinearOperator,
    m: &dyn LinearOperator,
    projection: &dyn Projection,
    rhs: &DVector<f64>,
    x0: &DVector<f64>,
    opts: &PcgOptions,
    functional: &mut dyn FnMut(&IterateView) -> f64,
) -> (DVector<f64>, KrylovReport) {
    let mut x = x0.clone();
    let mut w = projection.project_transpose(&(rhs - a.apply(&x)));
    let mut z = projection.project(&m.apply(&w));

    let mut report = KrylovReport {
        iterations: 0,
        residual_norms: vec![w.norm()],
        preconditioned_norms: vec![w.dot(&z).abs().sqrt()],
        functional: Vec::new(),
        negative_curvature: Vec::new(),
        directions: 0,
        conjugacy_defect: 0.0,
        termination: Termination::MaxIterations,
    };
    let f0 = functional(&IterateView {
        iteration: 0,
        x: &x,
        residual: &w,
        preconditioned: &z,
    });
    report.functional.push(f0);
    if f0 <= opts.tol {
        report.termination = Termination::Converged;
        return (x, report);
    }
    if !f0.is_finite() {
        report.termination = Termination::Breakdown("non-finite initial functional".into());
        return (x, report);
    }

    // returned when the iteration ends without meeting the tolerance
    let mut best_x = x.clone();
    let mut best_f = f0;
    let mut peak = report.preconditioned_norms[0];
    let mut best = peak;
    let mut best_at = 0;
    let mut dirs: Vec<Direction> = Vec::new();
    for k in 1..=opts.max_iter {
        let mut p = z.clone();
        let window = if opts.reorthogonalize { 0 } else { dirs.len().saturating_sub(1) };
        for d in &dirs[window..] {
            let c = p.dot(&d.ap) / d.pap;
            p.axpy(-c, &d.p, 1.0);
        }
        let ap = a.apply(&p);
        let pap = p.dot(&ap);
        if !pap.is_finite() || pap == 0.0 {
            report.termination = Termination::Breakdown(format!("curvature {pap:e} at iteration {k}"));
            break;
        }
        if pap < 0.0 {
            report.negative_curvature.push(k);
        }
        let eta = p.dot(&w) / pap;
        if !eta.is_finite() {
            report.termination = Termination::Breakdown(format!("non-finite step at iteration {k}"));
            break;
        }
        x.axpy(eta, &p, 1.0);
        w.axpy(-eta, &projection.project_transpose(&ap), 1.0);
        z = projection.project(&m.apply(&w));
        dirs.push(Direction { p, ap, pap });

        report.iterations = k;
        report.residual_norms.push(w.norm());
        report.preconditioned_norms.push(w.dot(&z).abs().sqrt());
        let fk = functional(&IterateView {
            iteration: k,
            x: &x,
            residual: &w,
            preconditioned: &z,
        });
        report.functional.push(fk);
        if fk < best_f {
            best_f = fk;
            best_x.copy_from(&x);
        }
        if fk <= opts.tol {
            report.termination = Termination::Converged;
            break;
        }
        if !fk.is_finite() {
            report.termination = Termination::Breakdown(format!("non-finite functional at iteration {k}"));
            break;
        }
        let wz = report.preconditioned_norms[k];
        peak = peak.max(wz);
        if wz < (1.0 - PLATEAU_GAIN) * best {
            best = wz;
            best_at = k;
        }
        if wz <= STAGNATION * peak || k - best_at >= PLATEAU_WINDOW {
            report.termination = Termination::Stagnation;
            break;
        }
    }

    report.directions = dirs.len();
    report.conjugacy_defect = conjugacy_defect(&dirs);
    if report.converged() {
        (x, report)
    } else {
        (best_x, report)
    }
}

fn conjugacy_defect(dirs: &[Direction]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dirs.len() {
        for j in 0..i {
            let scale = (dirs[i].pap.abs() * dirs[j].pap.abs()).sqrt();
            if scale > 0.0 {
                worst = worst.max(dirs[i].p.dot(&dirs[j].ap).abs() / scale);
            }
        }
    }
    worst
}

/// Functional `‖w_k‖ / ‖w_0‖`.
pub fn relative_residual() -> impl FnMut(&IterateView) -> f64 {
    let mut w0 = None;
    move |v: &IterateView| {
        let n = v.residual.norm();
        let base = *w0.get_or_insert(n);
        if base > 0.0 {
            n / base
        } else {
            0.0
        }
    }
}
