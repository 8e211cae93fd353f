//! Named algorithm variants selected at run time.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::feti::{scaling_weights, solve_feti, compute_lambda00, superlumped, ScaledLocalOperator};
use crate::interface::ScaledJump;
use crate::linalg::{Identity, LinearOperator};
use crate::problem::Decomposition;
use crate::solve::{Scaling, Solution, SolveOptions};
use crate::splitting::{split_classical, split_condensed, split_via_jump, Provenance, SplitForces};

pub trait ForceSplitting: Send + Sync {
    fn split(&self, dec: &Decomposition, raw: &[DVector<f64>]) -> Result<SplitForces>;
}

/// Builds a symmetric operator on multiplier space: a preconditioner or a projector weight `Q`.
pub trait MultiplierOperator: Send + Sync {
    fn build<'a>(&self, dec: &'a Decomposition, scaling: Scaling) -> Result<Box<dyn LinearOperator + 'a>>;
}

pub trait Initialization: Send + Sync {
    /// Multiplier estimate made admissible by the coarse projector.
    fn lambda00(&self, dec: &Decomposition, forces: &SplitForces) -> Result<DVector<f64>>;
}

pub trait InterfaceSolver: Send + Sync {
    fn solve(&self, dec: &Decomposition, opts: &SolveOptions, strategies: &Strategies) -> Result<Solution>;
}

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: Vec<(String, Arc<T>)>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Self { kind, entries: Vec::new() }
    }

    /// Adds or replaces the entry called `name`.
    pub fn register(&mut self, name: &str, item: Arc<T>) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = item,
            None => self.entries.push((name.to_string(), item)),
        }
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| Arc::clone(v))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|(n, _)| n.as_str()).collect()
    }
}

pub struct Strategies {
    pub splittings: Registry<dyn ForceSplitting>,
    pub preconditioners: Registry<dyn MultiplierOperator>,
    pub projectors: Registry<dyn MultiplierOperator>,
    pub initializations: Registry<dyn Initialization>,
    pub solvers: Registry<dyn InterfaceSolver>,
}

impl Strategies {
    pub fn empty() -> Self {
        Self {
            splittings: Registry::new("splitting"),
            preconditioners: Registry::new("preconditioner"),
            projectors: Registry::new("projector"),
            initializations: Registry::new("initialization"),
            solvers: Registry::new("solver"),
        }
    }
}

impl Default for Strategies {
    fn default() -> Self {
        let mut s = Self::empty();
        s.splittings.register("none", Arc::new(NoSplitting));
        s.splittings.register("classical", Arc::new(ClassicalSplitting));
        s.splittings.register("classical-jump", Arc::new(JumpSplitting));
        s.splittings.register("condensed", Arc::new(CondensedSplitting));
        s.preconditioners.register("dirichlet", Arc::new(DirichletOperator));
        s.preconditioners.register("lumped", Arc::new(LumpedOperator));
        s.projectors.register("identity", Arc::new(IdentityOperator));
        s.projectors.register("superlumped", Arc::new(SuperlumpedOperator));
        s.projectors.register("dirichlet", Arc::new(DirichletOperator));
        s.initializations.register("standard", Arc::new(StandardStart));
        s.initializations.register("new", Arc::new(CondensedStart));
        s.solvers.register("feti", Arc::new(Feti));
        s.solvers.register("bdd", Arc::new(Bdd));
        s
    }
}

struct NoSplitting;

impl ForceSplitting for NoSplitting {
    fn split(&self, _: &Decomposition, raw: &[DVector<f64>]) -> Result<SplitForces> {
        Ok(SplitForces {
            forces: raw.to_vec(),
            provenance: Provenance::Raw,
        })
    }
}

struct ClassicalSplitting;

impl ForceSplitting for ClassicalSplitting {
    fn split(&self, dec: &Decomposition, raw: &[DVector<f64>]) -> Result<SplitForces> {
        Ok(split_classical(dec, raw))
    }
}

struct JumpSplitting;

impl ForceSplitting for JumpSplitting {
    fn split(&self, dec: &Decomposition, raw: &[DVector<f64>]) -> Result<SplitForces> {
        split_via_jump(dec, raw)
    }
}

struct CondensedSplitting;

impl ForceSplitting for CondensedSplitting {
    fn split(&self, dec: &Decomposition, raw: &[DVector<f64>]) -> Result<SplitForces> {
        Ok(split_condensed(dec, raw))
    }
}

struct DirichletOperator;

impl MultiplierOperator for DirichletOperator {
    fn build<'a>(&self, dec: &'a Decomposition, scaling: Scaling) -> Result<Box<dyn LinearOperator + 'a>> {
        let sj = ScaledJump::new(&dec.jump, scaling_weights(dec, scaling))?;
        Ok(Box::new(ScaledLocalOperator::dirichlet(dec, sj)))
    }
}

struct LumpedOperator;

impl MultiplierOperator for LumpedOperator {
    fn build<'a>(&self, dec: &'a Decomposition, scaling: Scaling) -> Result<Box<dyn LinearOperator + 'a>> {
        let sj = ScaledJump::new(&dec.jump, scaling_weights(dec, scaling))?;
        Ok(Box::new(ScaledLocalOperator::lumped(dec, sj)))
    }
}

struct IdentityOperator;

impl MultiplierOperator for IdentityOperator {
    fn build<'a>(&self, dec: &'a Decomposition, _: Scaling) -> Result<Box<dyn LinearOperator + 'a>> {
        Ok(Box::new(Identity(dec.multiplier_count())))
    }
}

struct SuperlumpedOperator;

impl MultiplierOperator for SuperlumpedOperator {
    fn build<'a>(&self, dec: &'a Decomposition, _: Scaling) -> Result<Box<dyn LinearOperator + 'a>> {
        Ok(Box::new(superlumped(dec)?))
    }
}

struct StandardStart;

impl Initialization for StandardStart {
    fn lambda00(&self, dec: &Decomposition, _: &SplitForces) -> Result<DVector<f64>> {
        Ok(DVector::zeros(dec.multiplier_count()))
    }
}

struct CondensedStart;

impl Initialization for CondensedStart {
    fn lambda00(&self, dec: &Decomposition, forces: &SplitForces) -> Result<DVector<f64>> {
        compute_lambda00(dec, forces)
    }
}

struct Feti;

impl InterfaceSolver for Feti {
    fn solve(&self, dec: &Decomposition, opts: &SolveOptions, strategies: &Strategies) -> Result<Solution> {
        solve_feti(dec, opts, strategies)
    }
}

struct Bdd;

impl InterfaceSolver for Bdd {
    fn solve(&self, dec: &Decomposition, opts: &SolveOptions, strategies: &Strategies) -> Result<Solution> {
        crate::bdd::solve_bdd(dec, opts, strategies)
    }
}

/// Runs the solver named in `opts` with the default strategies.
pub fn solve(dec: &Decomposition, opts: &SolveOptions) -> Result<Solution> {
    let strategies = Strategies::default();
    strategies.solvers.get(&opts.solver)?.solve(dec, opts, &strategies)
}
