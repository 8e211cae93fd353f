//! End-to-end solver checks against the direct oracle and the method invariants.

mod common;

use common::*;
use ddlab::fe::{structured_discretization, MaterialField, MaterialPattern, Physics};
use ddlab::feti::exactness_check;
use ddlab::mesh::{build_structured_mesh, partition_blocks, GridSpec};
use ddlab::splitting::SplitForces;
use ddlab::{relative_error, solve, Decomposition, ProblemSpec, SolveOptions};
use nalgebra::DMatrix;

fn layers() -> MaterialField {
    MaterialField {
        pattern: MaterialPattern::Layers { axis: 1 },
        stiff: 1e5,
        soft: 1.0,
        poisson: 0.3,
    }
}

fn slanted() -> Decomposition {
    ProblemSpec::new(GridSpec::blocks(2, 3, 4).with_slant(60.0), Physics::Scalar)
        .with_material(layers())
        .build()
        .unwrap()
}

fn elastic_cube(material: MaterialField) -> Decomposition {
    ProblemSpec::new(GridSpec::blocks(3, 2, 2), Physics::Elasticity)
        .with_material(material)
        .build()
        .unwrap()
}

fn problems() -> Vec<(&'static str, Decomposition)> {
    vec![
        ("homogeneous", scalar_2d(3, 4, MaterialField::uniform(1.0, 0.3))),
        ("checkerboard", scalar_2d(3, 4, checkerboard(1e5))),
        ("slanted", slanted()),
        ("elastic", elastic_cube(MaterialField::uniform(1.0, 0.3))),
        ("elastic checkerboard", elastic_cube(checkerboard(1e5))),
    ]
}

#[test]
fn oracle_is_backward_stable() {
    for (name, dec) in problems() {
        let u = dec.direct_solve().unwrap();
        let r = (dec.k_global.mul_vec(&u) - &dec.f_global).norm();
        let scale = dec.k_global.norm_inf() * u.norm() + dec.f_global.norm();
        assert!(r <= 1e-14 * scale, "{name}: {:e}", r / scale);
        // the relative residual itself reaches 1e-12 unless ‖K‖‖u‖ ≫ ‖f‖
        if name == "homogeneous" || name == "checkerboard" {
            assert!(dec.global_residual(&u) <= 1e-12, "{name}");
        }
    }
}

#[test]
fn both_solvers_match_the_oracle() {
    for (name, dec) in problems() {
        let oracle = dec.direct_solve().unwrap();
        for solver in ["feti", "bdd"] {
            let sol = solve(&dec, &tight(solver)).unwrap();
            let err = relative_error(&sol.u, &oracle);
            assert!(err <= 1e-8, "{name}/{solver}: {err:e} after {:?}", sol.krylov.termination);
        }
    }
}

#[test]
fn every_strategy_matches_on_the_homogeneous_problem() {
    let dec = scalar_2d(3, 4, MaterialField::uniform(1.0, 0.3));
    let oracle = dec.direct_solve().unwrap();
    for splitting in ["none", "classical", "classical-jump", "condensed"] {
        for init in ["standard", "new"] {
            for projector in ["identity", "superlumped", "dirichlet"] {
                for preconditioner in ["dirichlet", "lumped"] {
                    let opts = SolveOptions {
                        splitting: splitting.into(),
                        initialization: init.into(),
                        projector: projector.into(),
                        preconditioner: preconditioner.into(),
                        ..tight("feti")
                    };
                    let sol = solve(&dec, &opts).unwrap();
                    let label = format!("{splitting}/{init}/{projector}/{preconditioner}");
                    assert!(sol.converged(), "{label}: {:?}", sol.krylov.termination);
                    assert!(relative_error(&sol.u, &oracle) <= 1e-8, "{label}");
                }
            }
        }
    }
}

#[test]
fn feti_iterates_stay_admissible() {
    for (name, dec) in problems() {
        for projector in ["identity", "superlumped", "dirichlet"] {
            for init in ["standard", "new"] {
                let opts = SolveOptions {
                    projector: projector.into(),
                    initialization: init.into(),
                    ..tight("feti")
                };
                let sol = solve(&dec, &opts).unwrap();
                let d = &sol.diagnostics;
                let label = format!("{name}/{projector}/{init}");
                assert!(d.admissibility <= 1e-10, "{label}: {:e}", d.admissibility);
                assert!(d.projector_defect <= 1e-12, "{label}: {:e}", d.projector_defect);
            }
        }
    }
}

#[test]
fn bdd_residuals_stay_balanced() {
    for (name, dec) in problems() {
        let sol = solve(&dec, &tight("bdd")).unwrap();
        assert!(sol.diagnostics.admissibility <= 1e-10, "{name}: {:e}", sol.diagnostics.admissibility);
        assert!(sol.diagnostics.coarse_dimension > 0, "{name}");
    }
}

#[test]
fn splittings_do_not_change_the_solution() {
    for (name, dec) in problems() {
        let reference = solve(&dec, &tight("feti")).unwrap().u;
        for splitting in ["classical", "condensed"] {
            let opts = SolveOptions {
                splitting: splitting.into(),
                ..tight("feti")
            };
            let u = solve(&dec, &opts).unwrap().u;
            assert!(relative_error(&u, &reference) <= 1e-8, "{name}/{splitting}");
        }
    }
}

#[test]
fn condensed_split_reproduces_the_new_start() {
    let dec = scalar_2d(3, 6, checkerboard(1e5));
    let raw_new = SolveOptions {
        splitting: "none".into(),
        initialization: "new".into(),
        ..tight("feti")
    };
    let split_standard = SolveOptions {
        splitting: "condensed".into(),
        initialization: "standard".into(),
        ..tight("feti")
    };
    let a = solve(&dec, &raw_new).unwrap();
    let b = solve(&dec, &split_standard).unwrap();
    assert_eq!(a.iterations(), b.iterations());
    // rounding in the two right-hand sides differs at the ε‖w₀‖ level, so
    // differences are measured against the scale of the history
    let scale = a.krylov.residual_norms[0];
    for (k, (x, y)) in a.krylov.residual_norms.iter().zip(&b.krylov.residual_norms).enumerate() {
        assert!((x - y).abs() <= 1e-10 * scale, "iteration {k}: {x:e} vs {y:e}");
    }
}

#[test]
fn new_start_lowers_the_initial_residual() {
    let dec = scalar_2d(3, 6, checkerboard(1e5));
    let opts = |init: &str| SolveOptions {
        initialization: init.into(),
        projector: "superlumped".into(),
        ..tight("feti")
    };
    let standard = solve(&dec, &opts("standard")).unwrap();
    let new = solve(&dec, &opts("new")).unwrap();
    assert!(new.history.initial_global().unwrap() < standard.history.initial_global().unwrap());
    let oracle = dec.direct_solve().unwrap();
    assert!(relative_error(&new.u, &oracle) <= 1e-8);
}

#[test]
fn exact_start_with_dense_dual_operator() {
    for (material, bound) in [(MaterialField::uniform(1.0, 0.3), 1e-10), (checkerboard(1e5), 1e-8)] {
        let dec = scalar_2d(2, 4, material);
        let dev = exactness_check(&dec, &SplitForces::raw(&dec)).unwrap();
        assert!(dev <= bound, "{dev:e}");
    }
    // ‖d‖ ≪ ‖F‖‖λ‖ here, which the refinement of the start has to absorb
    let dec = slanted();
    let dev = exactness_check(&dec, &SplitForces::raw(&dec)).unwrap();
    assert!(dev <= 1e-8, "{dev:e}");
}

#[test]
fn subdomain_numbering_does_not_matter() {
    let spec = ProblemSpec::new(GridSpec::blocks(2, 3, 3), Physics::Scalar).with_material(checkerboard(1e3));
    let mesh = build_structured_mesh(&spec.grid).unwrap();
    let partition = partition_blocks(&mesh, &spec.grid).unwrap();
    let disc = structured_discretization(&spec.grid, &mesh, spec.physics, &spec.material, &spec.load).unwrap();
    let a = Decomposition::new(&disc, partition.clone(), spec.redundancy, spec.assignment).unwrap();
    let order = [4, 8, 0, 2, 6, 1, 7, 3, 5];
    let b = Decomposition::new(&disc, partition.permuted(&order).unwrap(), spec.redundancy, spec.assignment).unwrap();
    let ua = a.direct_solve().unwrap();
    assert!(relative_error(&b.direct_solve().unwrap(), &ua) <= 1e-12);
    for solver in ["feti", "bdd"] {
        let x = solve(&a, &tight(solver)).unwrap().u;
        let y = solve(&b, &tight(solver)).unwrap().u;
        assert!(relative_error(&x, &y) <= 1e-10, "{solver}");
    }
}

#[test]
fn slant_keeps_the_interface_operators() {
    let straight = ProblemSpec::new(GridSpec::blocks(2, 3, 2), Physics::Scalar).build().unwrap();
    let sheared = ProblemSpec::new(GridSpec::blocks(2, 3, 2).with_slant(60.0), Physics::Scalar).build().unwrap();
    assert_eq!(straight.trace.to_dense(), sheared.trace.to_dense());
    assert_eq!(straight.jump.to_dense(), sheared.jump.to_dense());
}

#[test]
fn stacked_assembly_matches_the_global_matrix() {
    for (name, dec) in problems() {
        let l = dec.trace.to_dense();
        let n = l.nrows();
        let mut k = DMatrix::zeros(n, n);
        let mut offset = 0;
        for sub in &dec.subdomains {
            let m = sub.k.nrows();
            k.view_mut((offset, offset), (m, m)).copy_from(&sub.k.to_dense());
            offset += m;
        }
        let assembled = l.transpose() * k * &l;
        let direct = dec.k_global.to_dense();
        assert!((&assembled - &direct).amax() <= 1e-12 * direct.amax(), "{name}");
        // B L = 0 exactly
        assert_eq!((dec.jump.to_dense() * &l).amax(), 0.0, "{name}");
    }
}

#[test]
fn reorthogonalized_schur_directions_stay_conjugate() {
    // 3×3 subdomains of 4×4 elements: 46 free interface unknowns
    let dec = scalar_2d(3, 4, checkerboard(1e2));
    let opts = SolveOptions {
        tol: 1e-14,
        ..tight("bdd")
    };
    let sol = solve(&dec, &opts).unwrap();
    assert!(sol.diagnostics.interface_dimension >= 40);
    assert!(sol.krylov.directions >= 3);
    assert!(sol.krylov.conjugacy_defect <= 1e-10, "{:e}", sol.krylov.conjugacy_defect);
}
