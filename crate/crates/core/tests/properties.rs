//! Property tests over random states and parameters.

use num_complex::Complex64;
use proptest::prelude::*;

use driven_qubits::dynamics::{
    evolve, evolve_exponential, propagate_exponential, EvolveOptions, InitialState,
};
use driven_qubits::entanglement::{negativity, two_qubit_negativity};
use driven_qubits::linalg::{
    basis, hermitian_eigenvalues, max_abs_difference, max_hermiticity_error, partial_transpose_matrix,
    trace_norm, unvectorize, vectorize, CMatrix, DensityMatrix, Tolerances,
};
use driven_qubits::model::{apply_generator, build_liouvillian, Generator};
use driven_qubits::steady::steady_state;
use driven_qubits::SystemParams;

/// Random density matrix `A A† / Tr(A A†)` from a flat list of real/imag parts.
fn density_from(parts: &[f64], n_qubits: usize) -> DensityMatrix {
    let d = 1 << n_qubits;
    let a = CMatrix::from_fn(d, d, |i, j| {
        let k = 2 * (i * d + j);
        Complex64::new(parts[k], parts[k + 1])
    });
    let m = &a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix_unchecked(m / tr).unwrap()
}

fn arb_density(n_qubits: usize) -> impl Strategy<Value = DensityMatrix> {
    let d = 1usize << n_qubits;
    prop::collection::vec(-1.0f64..1.0, 2 * d * d)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(move |v| density_from(&v, n_qubits))
}

fn arb_pair_params() -> impl Strategy<Value = SystemParams> {
    (0.5f64..3.0, 0.05f64..2.0, 0.0f64..1.0, 0.0f64..0.5)
        .prop_map(|(j, g, d, n)| SystemParams::pair(j, g, d, n).unwrap())
}

fn arb_params(n_qubits: usize) -> impl Strategy<Value = SystemParams> {
    (
        prop::collection::vec(0.0f64..2.0, n_qubits),
        prop::collection::vec(-1.0f64..1.0, n_qubits),
        -3.0f64..3.0,
        prop::collection::vec(0.05f64..2.0, n_qubits),
        0.0f64..1.0,
    )
        .prop_map(move |(o, d, j, g, n)| SystemParams::new(n_qubits, o, d, j, g, n).unwrap())
}

/// Random single-qubit unitary from Euler angles.
fn local_unitary(a: f64, b: f64, c: f64) -> CMatrix {
    let rz = |t: f64| {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::from_polar(1.0, -t / 2.0),
            Complex64::from_polar(1.0, t / 2.0),
        ]))
    };
    let ry = {
        let (s, co) = (b / 2.0).sin_cos();
        CMatrix::from_row_slice(
            2,
            2,
            &[co.into(), (-s).into(), s.into(), co.into()],
        )
    };
    rz(a) * ry * rz(c)
}

fn swap_qubits(m: &CMatrix) -> CMatrix {
    let perm = |i: usize| ((i & 1) << 1) | (i >> 1);
    CMatrix::from_fn(4, 4, |i, j| m[(perm(i), perm(j))])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_an_involution(rho in arb_density(2), sub in 0usize..2) {
        let m = rho.matrix();
        let pt = partial_transpose_matrix(m, 2, &[sub]).unwrap();
        let back = partial_transpose_matrix(&pt, 2, &[sub]).unwrap();
        prop_assert!(max_abs_difference(&back, m) < 1e-15);
        prop_assert!((pt.trace() - m.trace()).norm() < 1e-14);
        prop_assert!(max_hermiticity_error(&pt) < 1e-14);
    }

    #[test]
    fn trace_norm_of_partial_transpose_is_at_least_one(rho in arb_density(2)) {
        let pt = partial_transpose_matrix(rho.matrix(), 2, &[0]).unwrap();
        let tn = trace_norm(&pt, &Tolerances::default()).unwrap();
        prop_assert!(tn >= 1.0 - 1e-12);
        let n = two_qubit_negativity(&rho).unwrap();
        prop_assert!((n - (tn - 1.0) / 2.0).abs() < 1e-12);
        // two-qubit negativity never exceeds the Bell value
        prop_assert!(n <= 0.5 + 1e-12);
    }

    #[test]
    fn negativity_is_symmetric_under_bipartition_swap(rho in arb_density(2)) {
        let a = negativity(&rho, &[0]).unwrap();
        let b = negativity(&rho, &[1]).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
        let swapped = DensityMatrix::from_matrix_unchecked(swap_qubits(rho.matrix())).unwrap();
        prop_assert!((two_qubit_negativity(&swapped).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn negativity_is_local_unitary_invariant(
        rho in arb_density(2),
        angles in prop::array::uniform6(0.0f64..6.3),
    ) {
        let u = basis::kron(
            &local_unitary(angles[0], angles[1], angles[2]),
            &local_unitary(angles[3], angles[4], angles[5]),
        );
        let rotated = &u * rho.matrix() * u.adjoint();
        let rotated = DensityMatrix::from_matrix_unchecked(rotated).unwrap();
        let before = two_qubit_negativity(&rho).unwrap();
        let after = two_qubit_negativity(&rotated).unwrap();
        prop_assert!((before - after).abs() < 1e-11);
    }

    #[test]
    fn product_states_are_separable(a in arb_density(1), b in arb_density(1)) {
        let m = basis::kron(a.matrix(), b.matrix());
        let rho = DensityMatrix::from_matrix_unchecked(m).unwrap();
        prop_assert!(two_qubit_negativity(&rho).unwrap() < 1e-13);
    }

    #[test]
    fn generator_output_is_hermitian_and_traceless(p in arb_params(2), rho in arb_density(2)) {
        let out = apply_generator(&p, &rho).unwrap();
        prop_assert!(max_hermiticity_error(&out) < 1e-13);
        prop_assert!(out.trace().norm() < 1e-13);
    }

    #[test]
    fn three_qubit_generator_is_hermitian_and_traceless(p in arb_params(3), rho in arb_density(3)) {
        let out = apply_generator(&p, &rho).unwrap();
        prop_assert!(max_hermiticity_error(&out) < 1e-12);
        prop_assert!(out.trace().norm() < 1e-12);
    }

    #[test]
    fn liouvillian_matches_operator_form(p in arb_params(2), rho in arb_density(2)) {
        let l = build_liouvillian(&p).unwrap();
        let via_matrix = unvectorize(&(l.matrix() * vectorize(rho.matrix())), 4);
        let direct = apply_generator(&p, &rho).unwrap();
        prop_assert!(max_abs_difference(&via_matrix, &direct) < 1e-12);
        prop_assert!(l.trace_preservation_error() < 1e-13);
    }

    #[test]
    fn liouvillian_spectrum_is_stable(p in arb_pair_params()) {
        let eigs = build_liouvillian(&p).unwrap().spectrum().unwrap();
        prop_assert!(eigs.iter().all(|z| z.re <= 1e-9));
        let closest = eigs.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(closest < 1e-9);
    }

    #[test]
    fn qubit_swap_symmetry_of_identical_pair(p in arb_pair_params(), rho in arb_density(2)) {
        let gen = Generator::new(&p).unwrap();
        let direct = swap_qubits(&gen.apply(rho.matrix()).unwrap());
        let swapped = gen.apply(&swap_qubits(rho.matrix())).unwrap();
        prop_assert!(max_abs_difference(&direct, &swapped) < 1e-13);
    }

    #[test]
    fn steady_state_is_physical_and_stationary(p in arb_pair_params()) {
        let ss = steady_state(&p).unwrap();
        prop_assert!(ss.residual < 1e-9);
        prop_assert!(ss.rho_ss.check().satisfies(&Tolerances::default()));
        prop_assert!(apply_generator(&p, &ss.rho_ss).unwrap().norm() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_evolution_conserves_purity(
        j in -2.0f64..2.0,
        d in -1.0f64..1.0,
        theta in 0.0f64..std::f64::consts::FRAC_PI_2,
    ) {
        let p = SystemParams::uniform(2, 1.0, d, j, 0.0, 0.0).unwrap();
        let traj = evolve(&p, &InitialState::theta(theta).unwrap(), 10.0, 21, &EvolveOptions::default()).unwrap();
        for s in traj.samples() {
            prop_assert!((s.state.purity() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn exponential_propagation_is_a_semigroup(
        p in arb_pair_params(),
        rho in arb_density(2),
        t1 in 0.0f64..5.0,
        t2 in 0.0f64..5.0,
    ) {
        let l = build_liouvillian(&p).unwrap();
        let two_step = propagate_exponential(&l, &propagate_exponential(&l, &rho, t1).unwrap(), t2).unwrap();
        let one_step = propagate_exponential(&l, &rho, t1 + t2).unwrap();
        prop_assert!(max_abs_difference(two_step.matrix(), one_step.matrix()) < 1e-9);
    }

    #[test]
    fn evolution_approaches_steady_state(p in arb_pair_params(), rho in arb_density(2)) {
        let l = build_liouvillian(&p).unwrap();
        let ss = steady_state(&p).unwrap();
        let dist = |t: f64| {
            let r = propagate_exponential(&l, &rho, t).unwrap();
            max_abs_difference(r.matrix(), ss.rho_ss.matrix())
        };
        prop_assert!(dist(400.0) < 1e-7);
        prop_assert!(dist(400.0) <= dist(0.0) + 1e-12);
    }

    #[test]
    fn mixed_initial_states_stay_physical(p in arb_pair_params(), rho in arb_density(2)) {
        let traj = evolve(&p, &InitialState::Density(rho.clone()), 20.0, 41, &EvolveOptions::default()).unwrap();
        let tol = Tolerances::default();
        for s in traj.samples() {
            prop_assert!(s.state.check().satisfies(&tol));
            let eig = hermitian_eigenvalues(s.state.matrix(), &tol).unwrap();
            prop_assert!(eig[0] >= -1e-7);
        }
        let exp = evolve_exponential(&p, &InitialState::Density(rho), 20.0, 41, &tol).unwrap();
        prop_assert!(traj.max_deviation(&exp).unwrap() < 1e-6);
    }
}

#[test]
fn extreme_initial_angles_converge_to_the_same_steady_state() {
    let p = SystemParams::pair(1.5, 0.8, 0.0, 0.0).unwrap();
    let ss = steady_state(&p).unwrap();
    for initial in [InitialState::ground(), InitialState::excited()] {
        let traj = evolve(&p, &initial, 200.0, 3, &EvolveOptions::default()).unwrap();
        assert!(max_abs_difference(traj.last().state.matrix(), ss.rho_ss.matrix()) < 1e-8);
    }
}
