use num_complex::Complex64;
use proptest::prelude::*;

use trotterr::bounds::{self, ConstantMode, DEFAULT_TERM_CAP};
use trotterr::exact::ExactEvolver;
use trotterr::formulas::{EvolutionPlan, StageList};
use trotterr::haar;
use trotterr::hamiltonian::{heisenberg_1d, k_local_random, power_law};
use trotterr::linalg;
use trotterr::otoc::{self, OtocConfig};
use trotterr::pauli::NormMethod;
use trotterr::{HamiltonianInstance, PauliString, PauliSum, StateVector};

fn pauli_sum(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    let mask = (1u64 << n) - 1;
    prop::collection::vec((0..=mask, 0..=mask, -2.0..2.0f64, -2.0..2.0f64), 0..=max_terms).prop_map(
        move |terms| {
            PauliSum::from_terms(
                n,
                terms.into_iter().map(|(x, z, re, im)| {
                    (PauliString::from_masks(n, x, z).unwrap(), Complex64::new(re, im))
                }),
            )
            .unwrap()
        },
    )
}

fn hermitian_sum(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    let mask = (1u64 << n) - 1;
    prop::collection::vec((0..=mask, 0..=mask, -2.0..2.0f64), 1..=max_terms).prop_map(move |terms| {
        PauliSum::from_terms(
            n,
            terms
                .into_iter()
                .map(|(x, z, c)| (PauliString::from_masks(n, x, z).unwrap(), Complex64::new(c, 0.0))),
        )
        .unwrap()
    })
}

fn pair(max_n: usize) -> impl Strategy<Value = (PauliSum, PauliSum)> {
    (1..=max_n).prop_flat_map(|n| (pauli_sum(n, 6), pauli_sum(n, 6)))
}

fn builder(kind: u8, n: usize, seed: u64) -> HamiltonianInstance {
    match kind {
        0 => heisenberg_1d(n, seed).unwrap(),
        1 => power_law(n, 0.0, seed).unwrap(),
        2 => power_law(n, 4.0, seed).unwrap(),
        _ => k_local_random(n, 2.min(n), 2, seed).unwrap(),
    }
}

fn close(a: &PauliSum, b: &PauliSum, tol: f64) -> bool {
    a.try_sub(b).unwrap().terms().iter().all(|(_, c)| c.norm() < tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn commutator_matches_dense((a, b) in pair(4)) {
        let c = a.commutator(&b).unwrap().to_dense();
        let (da, db) = (a.to_dense(), b.to_dense());
        let want = &da * &db - &db * &da;
        prop_assert!(linalg::max_abs_diff(&c, &want) < 1e-12);
    }

    #[test]
    fn frobenius_matches_dense(a in (1usize..=4).prop_flat_map(|n| pauli_sum(n, 8))) {
        let m = a.to_dense();
        let want = (linalg::frobenius_sq(&m) / m.nrows() as f64).sqrt();
        prop_assert!((a.frobenius_normalized() - want).abs() < 1e-10);
    }

    #[test]
    fn commutator_antisymmetric((a, b) in pair(4)) {
        let ab = a.commutator(&b).unwrap();
        let ba = b.commutator(&a).unwrap();
        prop_assert!(close(&ab, &ba.scale(Complex64::new(-1.0, 0.0)), 1e-12));
    }

    #[test]
    fn jacobi_identity(
        (a, b, c) in (1usize..=3).prop_flat_map(|n| (pauli_sum(n, 4), pauli_sum(n, 4), pauli_sum(n, 4)))
    ) {
        let j1 = a.commutator(&b.commutator(&c).unwrap()).unwrap();
        let j2 = b.commutator(&c.commutator(&a).unwrap()).unwrap();
        let j3 = c.commutator(&a.commutator(&b).unwrap()).unwrap();
        let s = PauliSum::sum(a.n(), [&j1, &j2, &j3]).unwrap();
        prop_assert!(s.terms().iter().all(|(_, c)| c.norm() < 1e-10));
    }

    #[test]
    fn norm_ordering(h in (1usize..=4).prop_flat_map(|n| hermitian_sum(n, 6))) {
        let upper = h.spectral_norm(NormMethod::CoefficientSumUpper).unwrap();
        let power = h.spectral_norm(NormMethod::PowerIteration).unwrap();
        let fro = h.frobenius_normalized();
        prop_assert!(upper >= power * (1.0 - 1e-8));
        prop_assert!(power >= fro * (1.0 - 1e-6));
    }

    #[test]
    fn string_orthogonality(
        (n, x1, z1, x2, z2) in (1usize..=4).prop_flat_map(|n| {
            let m = (1u64 << n) - 1;
            (Just(n), 0..=m, 0..=m, 0..=m, 0..=m)
        })
    ) {
        let p = PauliString::from_masks(n, x1, z1).unwrap().to_dense();
        let q = PauliString::from_masks(n, x2, z2).unwrap().to_dense();
        let tr = linalg::trace(&(p.adjoint() * q)) / (1u64 << n) as f64;
        let want = if (x1, z1) == (x2, z2) { 1.0 } else { 0.0 };
        prop_assert!((tr - Complex64::new(want, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn builders_hermitian_and_split(kind in 0u8..4, n in 3usize..=6, seed in any::<u64>()) {
        let h = builder(kind, n, seed);
        let total = h.total();
        prop_assert!(total.terms().iter().all(|(_, c)| c.im == 0.0));
        let parts = PauliSum::sum(n, h.group_ops()).unwrap();
        prop_assert!(close(&parts, &total, 1e-12));
        for g in &h.groups {
            match kind {
                0 => {
                    for (qubits, _) in g.op.support_blocks() {
                        prop_assert!(qubits.len() <= 2);
                    }
                }
                1 | 2 => {
                    let ts = g.op.terms();
                    for (i, (p, _)) in ts.iter().enumerate() {
                        for (q, _) in &ts[i + 1..] {
                            prop_assert!(p.commutes_with(q));
                        }
                    }
                }
                _ => {}
            }
        }
    }

    #[test]
    fn builders_deterministic(kind in 0u8..4, n in 2usize..=5, seed in any::<u64>()) {
        prop_assert_eq!(builder(kind, n, seed), builder(kind, n, seed));
    }

    #[test]
    fn stage_sums_are_one(k in 1usize..=4) {
        let p = if k == 1 { 1 } else { 2 * (k - 1) };
        let st = StageList::for_order(p).unwrap();
        prop_assert!((st.coeff_sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn product_formula_unitary(
        kind in 0u8..3, n in 3usize..=5, seed in any::<u64>(),
        p in prop::sample::select(vec![1usize, 2, 4]), r in 1u64..4, t in 0.05..2.0f64,
    ) {
        let h = builder(kind, n, seed);
        let u = EvolutionPlan::new(&h, p, t, r).unwrap().unitary_dense().unwrap();
        prop_assert!(linalg::unitarity_residual(&u) < 1e-10);
    }

    #[test]
    fn matrix_free_matches_dense(
        kind in 0u8..4, n in 3usize..=5, seed in any::<u64>(),
        p in prop::sample::select(vec![1usize, 2, 4]), r in 1u64..4, t in 0.05..2.0f64,
    ) {
        let h = builder(kind, n, seed);
        let plan = EvolutionPlan::new(&h, p, t, r).unwrap();
        let u = plan.unitary_dense().unwrap();
        let psi = StateVector::basis(n, (seed % (1u64 << n)) as usize);
        let a = plan.apply(&psi).unwrap();
        let b = StateVector::new(linalg::mat_vec(&u, &psi)).unwrap();
        prop_assert!(a.distance(&b) < 1e-10);
    }

    #[test]
    fn exact_composition(seed in any::<u64>(), t1 in 0.0..2.0f64, t2 in 0.0..2.0f64) {
        let h = heisenberg_1d(5, seed).unwrap().total();
        let psi = StateVector::basis(5, (seed % 32) as usize);
        for ev in [ExactEvolver::dense(&h).unwrap(), ExactEvolver::krylov(&h, 1e-11).unwrap()] {
            let a = ev.evolve(&ev.evolve(&psi, t1).unwrap(), t2).unwrap();
            let b = ev.evolve(&psi, t1 + t2).unwrap();
            prop_assert!(a.distance(&b) < 1e-8);
        }
    }

    #[test]
    fn counting_dominates_triangle(n in 3usize..=8, seed in any::<u64>(), p in 1usize..=2) {
        let h = heisenberg_1d(n, seed).unwrap();
        let tri = bounds::triangle_bound(&h, p, 1.0, 1).unwrap().value;
        let cnt = bounds::counting_bound_nn(n, 1.0, 1, p).unwrap().value;
        prop_assert!(cnt >= tri * (1.0 - 1e-12));
    }

    #[test]
    fn tp_below_worst(kind in 0u8..3, n in 3usize..=5, seed in any::<u64>(), p in 1usize..=2) {
        let h = builder(kind, n, seed);
        let tp = bounds::tp_bound(&h, p, 1.0, 1, DEFAULT_TERM_CAP, ConstantMode::Omitted).unwrap().value;
        let wc = bounds::worst_case_bound(
            &h, p, 1.0, 1, NormMethod::Dense, DEFAULT_TERM_CAP, ConstantMode::Omitted,
        ).unwrap().value;
        prop_assert!(tp <= wc * (1.0 + 1e-10));
    }

    #[test]
    fn haar_mean_chain(eigs in prop::collection::vec(0.0..5.0f64, 1..12)) {
        prop_assume!(eigs.iter().any(|&x| x > 1e-3));
        let lam = eigs.iter().cloned().fold(0.0, f64::max);
        let m = haar::exact_mean_sqrt(&eigs, 4000, 1).unwrap();
        let c = haar::cauchy_bound(&eigs).unwrap();
        prop_assert!(m.value <= c + 4.0 * m.std_err + 1e-12);
        prop_assert!(c <= lam.sqrt() + 1e-12);
        let d = haar::d_statistic(&eigs, 4000, 1).unwrap();
        prop_assert!(d.value > -4.0 * d.std_err - 1e-12 && d.value < 1.0);
    }

    #[test]
    fn otoc_bounded(seed in any::<u64>(), t in 0.0..3.0f64, p in 1usize..=2, r in 1u64..6) {
        let h = heisenberg_1d(4, seed).unwrap();
        let cfg = OtocConfig::new(&h, t, p, r).unwrap();
        let e = otoc::otoc_exact(&cfg).unwrap();
        let tr = otoc::otoc_trotterized(&cfg).unwrap();
        prop_assert!(e.abs() <= 1.0 + 1e-10 && tr.abs() <= 1.0 + 1e-10);
        let b = otoc::otoc_error_bound(&cfg).unwrap();
        prop_assert!((e - tr).abs() <= b.average + 1e-10);
    }
}
