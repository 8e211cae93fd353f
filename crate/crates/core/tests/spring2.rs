//! The two-spring chain cut at its middle node, checked against hand algebra.

use ddlab::feti::{compute_lambda00, exactness_check, scaling_weights, superlumped, CoarseProjector, DualSystem, ScaledLocalOperator};
use ddlab::interface::ScaledJump;
use ddlab::linalg::{LinearOperator, Projection};
use ddlab::splitting::{split_condensed, SplitForces};
use ddlab::{solve, two_spring_decomposition, Decomposition, Scaling, SolveOptions};
use nalgebra::DVector;

fn spring2() -> Decomposition {
    two_spring_decomposition(1.0, 1.0, [0.0, 0.0, 1.0]).unwrap()
}

fn scalar(v: &DVector<f64>) -> f64 {
    assert_eq!(v.len(), 1);
    v[0]
}

#[test]
fn direct_oracle_gives_unit_steps() {
    let u = spring2().direct_solve().unwrap();
    assert!((u - DVector::from_vec(vec![1.0, 2.0])).amax() < 1e-14);
}

#[test]
fn jump_has_opposite_signs_on_the_shared_dof() {
    let dec = spring2();
    assert_eq!(dec.multiplier_count(), 1);
    let b1 = dec.jump.block_dense(0);
    let b2 = dec.jump.block_dense(1);
    assert_eq!(b1[(0, 0)], 1.0);
    assert_eq!(b2[(0, 0)], -1.0);
    assert_eq!(b2[(0, 1)], 0.0);
}

#[test]
fn coarse_data_by_hand() {
    let dec = spring2();
    let dual = DualSystem::new(&dec, &SplitForces::raw(&dec)).unwrap();
    // R = (1,1)/√2 on Ω2, so G = B⁽²⁾R = −1/√2 and e = Rᵀf = 1/√2
    let r = 1.0 / 2f64.sqrt();
    assert_eq!(dual.g.shape(), (1, 1));
    assert!((dual.g[(0, 0)] + r).abs() < 1e-15);
    assert!((scalar(&dual.e) - r).abs() < 1e-15);
    // the coarse constraint alone fixes λ = −1
    assert!((scalar(&dual.e) / dual.g[(0, 0)] + 1.0).abs() < 1e-14);
}

#[test]
fn fixed_dof_generalized_inverse_operators() {
    // K⁺ fixes u1 of Ω2, so Ω2 contributes nothing to F and d:
    // F = 1 (from Ω1) + 0, d = 0. The projected problem is still the same since P = 0.
    let dec = spring2();
    let dual = DualSystem::new(&dec, &SplitForces::raw(&dec)).unwrap();
    let f = dual.dense_f().unwrap();
    assert!((f[(0, 0)] - 1.0).abs() < 1e-15);
    assert!(scalar(&dual.d).abs() < 1e-15);
}

#[test]
fn projector_weights_by_hand() {
    let dec = spring2();
    let x = DVector::from_element(1, 1.0);
    let q = superlumped(&dec).unwrap();
    assert!((scalar(&q.apply(&x)) - 0.5).abs() < 1e-15);
    for scaling in [Scaling::Multiplicity, Scaling::Stiffness] {
        let sj = ScaledJump::new(&dec.jump, scaling_weights(&dec, scaling)).unwrap();
        let dirichlet = ScaledLocalOperator::dirichlet(&dec, sj);
        // B̃ = ½[1, −1], S = diag(1, 0)
        assert!((scalar(&dirichlet.apply(&x)) - 0.25).abs() < 1e-15);
        assert!((scalar(&dirichlet.apply(&(&x * 3.0))) - 0.75).abs() < 1e-15);
    }
}

#[test]
fn lambda00_is_half_the_condensed_jump() {
    let dec = spring2();
    let l00 = compute_lambda00(&dec, &SplitForces::raw(&dec)).unwrap();
    assert!((scalar(&l00) + 0.5).abs() < 1e-15);
    // already split forces carry no equilibrated part
    let split = split_condensed(&dec, &dec.raw_forces());
    let l00 = compute_lambda00(&dec, &split).unwrap();
    assert!(scalar(&l00).abs() < 1e-15);
    assert!((split.forces[0][0] - 0.5).abs() < 1e-15);
    // Ω2 keeps its end load; its shared dof carries f̃*_b − f*_b = 0.5 − 1
    assert!((&split.forces[1] - DVector::from_vec(vec![-0.5, 1.0])).amax() < 1e-15);
}

#[test]
fn admissible_start_is_exact() {
    let dec = spring2();
    let dual = DualSystem::new(&dec, &SplitForces::raw(&dec)).unwrap();
    let q = superlumped(&dec).unwrap();
    let p = CoarseProjector::new(&dual.g, &q).unwrap();
    let x = DVector::from_element(1, 0.7);
    assert!(p.project(&x).amax() < 1e-15);
    for l00 in [0.0, -0.5, 3.0] {
        let l0 = p.admissible_start(&DVector::from_element(1, l00), &dual.e);
        assert!((scalar(&l0) + 1.0).abs() < 1e-14);
    }
}

#[test]
fn every_configuration_finishes_without_iterating() {
    let dec = spring2();
    for solver in ["feti", "bdd"] {
        for init in ["standard", "new"] {
            for splitting in ["none", "classical", "condensed"] {
                for projector in ["identity", "superlumped", "dirichlet"] {
                    let opts = SolveOptions {
                        solver: solver.into(),
                        initialization: init.into(),
                        splitting: splitting.into(),
                        projector: projector.into(),
                        ..Default::default()
                    };
                    let sol = solve(&dec, &opts).unwrap();
                    let label = format!("{solver}/{init}/{splitting}/{projector}");
                    assert!(sol.converged(), "{label}");
                    assert_eq!(sol.iterations(), 0, "{label}");
                    assert!((&sol.u - DVector::from_vec(vec![1.0, 2.0])).amax() < 1e-14, "{label}");
                    if solver == "feti" && splitting == "none" {
                        assert!((scalar(sol.lambda.as_ref().unwrap()) + 1.0).abs() < 1e-14, "{label}");
                    }
                }
            }
        }
    }
}

#[test]
fn exactness_with_dense_dual_operator() {
    let dec = spring2();
    assert!(exactness_check(&dec, &SplitForces::raw(&dec)).unwrap() <= 1e-14);
}

#[test]
fn heterogeneous_classical_shares() {
    let dec = two_spring_decomposition(10.0, 1.0, [0.0, 1.0, 0.0]).unwrap();
    let opts = SolveOptions {
        splitting: "classical".into(),
        initialization: "standard".into(),
        ..Default::default()
    };
    let sol = solve(&dec, &opts).unwrap();
    let oracle = dec.direct_solve().unwrap();
    assert!((&sol.u - &oracle).amax() < 1e-14);
    assert!((oracle[0] - 0.1).abs() < 1e-15);
}
