#![allow(dead_code)]

use ddlab::fe::{MaterialField, MaterialPattern, Physics};
use ddlab::mesh::GridSpec;
use ddlab::{Decomposition, ProblemSpec, SolveOptions, Stopping};

pub fn checkerboard(contrast: f64) -> MaterialField {
    MaterialField {
        pattern: MaterialPattern::Checkerboard,
        stiff: contrast,
        soft: 1.0,
        poisson: 0.3,
    }
}

pub fn scalar_2d(subdomains: usize, per: usize, material: MaterialField) -> Decomposition {
    ProblemSpec::new(GridSpec::blocks(2, subdomains, per), Physics::Scalar)
        .with_material(material)
        .build()
        .unwrap()
}

pub fn tight(solver: &str) -> SolveOptions {
    SolveOptions {
        solver: solver.into(),
        tol: 1e-12,
        stopping: Stopping::Global,
        max_iter: 400,
        ..Default::default()
    }
}
