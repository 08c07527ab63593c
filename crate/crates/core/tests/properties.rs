use num_complex::Complex64;
use proptest::prelude::*;

use entcomm::canonical::{conjugation_check, decompose, u_d};
use entcomm::ensembles::{holevo, twirl_check};
use entcomm::protocols::Protocol;
use entcomm::qla::gates::{self, commutator_norm, pauli};
use entcomm::qla::{
    apply_on_qubits, entanglement_entropy, partial_trace, schmidt, tensor, vn_entropy, Bipartition, ComplexMatrix,
    DensityMatrix, PureState,
};

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map("zero vector", |v| {
        let a: Vec<Complex64> = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
        (a.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3).then_some(a)
    })
}

fn state(n: usize) -> impl Strategy<Value = PureState> {
    amplitudes(n).prop_map(|a| PureState::normalized(a).unwrap())
}

fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    let d = 1 << n;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_filter_map("singular", move |v| {
        let g = ComplexMatrix::new(d, d, v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).unwrap();
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        (tr > 1e-3).then(|| DensityMatrix::new(m.scale(Complex64::new(1.0 / tr, 0.0))).unwrap())
    })
}

fn su2() -> impl Strategy<Value = ComplexMatrix> {
    prop::array::uniform4(-1.0f64..1.0).prop_filter_map("degenerate", |v| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (n > 1e-2).then(|| {
            let [a, b, c, d] = v.map(|x| x / n);
            ComplexMatrix::from_rows([
                [Complex64::new(a, b), Complex64::new(c, d)],
                [Complex64::new(-c, d), Complex64::new(a, -b)],
            ])
        })
    })
}

fn alphas() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-3.2f64..3.2)
}

fn two_qubit_unitary() -> impl Strategy<Value = ComplexMatrix> {
    (alphas(), su2(), su2(), su2(), su2())
        .prop_map(|(a, p, q, r, s)| tensor(&r, &s).matmul(&u_d(a)).matmul(&tensor(&p, &q)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_bounded(rho in density(2)) {
        let s = vn_entropy(&rho).unwrap();
        prop_assert!((0.0..=2.0 + 1e-9).contains(&s));
    }

    #[test]
    fn entropy_is_additive(a in density(1), b in density(2)) {
        let joint = vn_entropy(&a.tensor(&b)).unwrap();
        let sum = vn_entropy(&a).unwrap() + vn_entropy(&b).unwrap();
        prop_assert!((joint - sum).abs() < 1e-9);
    }

    #[test]
    fn cut_entropy_is_symmetric(psi in state(4), k in 1usize..4) {
        let cut = Bipartition::new((0..k).collect(), (k..4).collect()).unwrap();
        let forward = entanglement_entropy(&psi, &cut).unwrap();
        let backward = entanglement_entropy(&psi, &cut.swapped()).unwrap();
        prop_assert!((forward - backward).abs() < 1e-10);
    }

    #[test]
    fn schmidt_reconstructs(psi in state(4), k in 1usize..4) {
        let cut = Bipartition::new((0..k).collect(), (k..4).collect()).unwrap();
        let rebuilt = schmidt(&psi, &cut).unwrap().reconstruct();
        let err = psi.amplitudes().iter().zip(&rebuilt).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err < 1e-10);
    }

    #[test]
    fn local_unitaries_keep_entanglement(psi in state(4), a in su2(), b in su2(), c in su2(), d in su2()) {
        let local = tensor(&tensor(&a, &b), &tensor(&c, &d));
        let moved = apply_on_qubits(&local, &psi, &[0, 1, 2, 3]).unwrap();
        let cut = Bipartition::alice_bob();
        let diff = entanglement_entropy(&moved, &cut).unwrap() - entanglement_entropy(&psi, &cut).unwrap();
        prop_assert!(diff.abs() < 1e-10);
    }

    #[test]
    fn partial_trace_keeps_unit_trace(rho in density(3), keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..3)) {
        let r = partial_trace(&rho, &keep).unwrap();
        prop_assert!((r.matrix().trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn u_d_commutes_with_pauli_pairs(a in alphas()) {
        let u = u_d(a);
        for k in 1..=3u8 {
            let p = pauli(k).unwrap();
            prop_assert!(commutator_norm(&u, &tensor(&p, &p)) < 1e-12);
        }
        prop_assert!(conjugation_check(a).max() < 1e-12);
    }

    #[test]
    fn decomposition_is_idempotent_and_locally_invariant(u in two_qubit_unitary(), p in su2(), q in su2()) {
        let first = decompose(&u).unwrap();
        prop_assert!(first.residual(&u) < 1e-9);
        let again = decompose(&first.u_d()).unwrap();
        let dressed = decompose(&tensor(&p, &q).matmul(&u)).unwrap();
        for k in 0..3 {
            prop_assert!((again.alphas[k] - first.alphas[k]).abs() < 1e-8);
            prop_assert!((dressed.alphas[k] - first.alphas[k]).abs() < 1e-8);
        }
    }

    #[test]
    fn twirl_is_invariant(rho in density(2)) {
        prop_assert!(twirl_check(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn holevo_of_orthogonal_states_is_the_source_entropy(weights in prop::collection::vec(0.05f64..1.0, 2..8)) {
        let total: f64 = weights.iter().sum();
        let items: Vec<(f64, DensityMatrix)> = weights
            .iter()
            .enumerate()
            .map(|(i, w)| (w / total, PureState::basis(3, i).unwrap().projector()))
            .collect();
        let shannon: f64 = items.iter().map(|(p, _)| -p * p.log2()).sum();
        prop_assert!((holevo(&items).unwrap() - shannon).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn protocols_act_linearly(
        x1 in 0usize..4, y1 in 0usize..4, x2 in 0usize..4, y2 in 0usize..4,
        a in (-1.0f64..1.0, -1.0f64..1.0), b in (-1.0f64..1.0, -1.0f64..1.0),
    ) {
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let p = Protocol::builtin("swap_superdense").unwrap();
        let in1 = p.input_state(x1, y1).unwrap();
        let in2 = p.input_state(x2, y2).unwrap();
        let mix: Vec<Complex64> = in1.amplitudes().iter().zip(in2.amplitudes()).map(|(u, v)| a * u + b * v).collect();
        let norm = mix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let out = p.execute(&PureState::normalized(mix).unwrap()).unwrap();
        let o1 = p.execute(&in1).unwrap();
        let o2 = p.execute(&in2).unwrap();
        let err = out
            .amplitudes()
            .iter()
            .zip(o1.amplitudes().iter().zip(o2.amplitudes()))
            .map(|(o, (u, v))| (o * norm - (a * u + b * v)).norm_sqr())
            .sum::<f64>()
            .sqrt();
        prop_assert!(err < 1e-10);
    }
}

#[test]
fn named_gates_are_unitary() {
    for g in [gates::cnot(), gates::cz(), gates::swap(), gates::iswap()] {
        assert!(g.unitarity_residual() < 1e-14);
    }
}
