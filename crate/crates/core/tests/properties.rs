mod common;

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sepkit::criteria::ppt_check;
use sepkit::maps::{
    apply_map_to_operator, map_from_witness, witness_from_map, LinearMapOp, Witness,
};
use sepkit::product_opt::{seesaw_extremize, Direction, SeesawSettings};
use sepkit::states::{random_product_vector, random_separable, MultipartiteState};
use sepkit::tensor::{
    eigvals_hermitian, inverse_permutation, kron, partial_trace, partial_transpose,
    permute_subsystems,
};
use sepkit::upb::{builtin_upb, verify_upb, BuiltinUpb};
use sepkit::{ComplexMatrix, HilbertDims};

use common::{random_hermitian, random_matrix};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=3, 2..=3)
}

fn subset_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::sample::subsequence((1..=n).collect::<Vec<_>>(), 1..n)
}

fn nalgebra_eigs(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
    let mut values: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_matches_nalgebra(n in 1usize..=12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, n);
        let ours = eigvals_hermitian(&h).unwrap();
        let reference = nalgebra_eigs(&h);
        for (a, b) in ours.iter().zip(&reference) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10 * (1.0 + h.max_abs()));
        }
    }

    #[test]
    fn partial_transpose_is_an_involutive_isometry(
        dims in dims_strategy(),
        seed in any::<u64>(),
        pick in any::<prop::sample::Index>(),
    ) {
        let dims = HilbertDims::new(dims).unwrap();
        let subsets: Vec<Vec<usize>> = (1..(1usize << dims.len()))
            .map(|mask| (1..=dims.len()).filter(|k| mask >> (k - 1) & 1 == 1).collect())
            .collect();
        let subset = pick.get(&subsets);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(&mut rng, dims.total());
        let pt = partial_transpose(&x, &dims, subset).unwrap();
        assert_abs_diff_eq!(pt.frobenius_norm(), x.frobenius_norm(), epsilon = 1e-10);
        let back = partial_transpose(&pt, &dims, subset).unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn partial_trace_preserves_trace(dims in dims_strategy(), seed in any::<u64>()) {
        let dims = HilbertDims::new(dims).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(&mut rng, dims.total());
        let reduced = partial_trace(&x, &dims, &[1]).unwrap();
        prop_assert!((reduced.trace() - x.trace()).norm() < 1e-10);
    }

    #[test]
    fn permutation_composes_with_its_inverse(
        perm in Just(vec![1usize, 2, 3]).prop_shuffle(),
        seed in any::<u64>(),
    ) {
        let dims = HilbertDims::new(vec![2, 3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(&mut rng, dims.total());
        let (y, ydims) = permute_subsystems(&x, &dims, &perm).unwrap();
        let (z, zdims) = permute_subsystems(&y, &ydims, &inverse_permutation(&perm)).unwrap();
        prop_assert_eq!(zdims, dims);
        prop_assert_eq!(z, x);
    }

    #[test]
    fn ppt_value_is_invariant_under_relabelling(
        perm in Just(vec![1usize, 2, 3]).prop_shuffle(),
        subset in subset_of(3),
        seed in 0u64..1000,
    ) {
        let dims = HilbertDims::new(vec![2, 2, 3]).unwrap();
        let state = random_separable(&dims, 3, seed).unwrap();
        let (rho, pdims) = permute_subsystems(state.rho(), &dims, &perm).unwrap();
        let permuted = MultipartiteState::new(pdims, rho).unwrap();
        let inv = inverse_permutation(&perm);
        let moved: Vec<usize> = subset.iter().map(|&k| inv[k - 1]).collect();
        let a = ppt_check(&state, &subset).unwrap().min_eig_pt;
        let b = ppt_check(&permuted, &moved).unwrap().min_eig_pt;
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn separable_states_pass_every_cut(dims in dims_strategy(), k in 1usize..6, seed in 0u64..1000) {
        let dims = HilbertDims::new(dims).unwrap();
        let state = random_separable(&dims, k, seed).unwrap();
        for cut in sepkit::criteria::proper_subsets(dims.len()) {
            prop_assert!(ppt_check(&state, &cut).unwrap().passes);
        }
    }

    #[test]
    fn witness_scalar_bridge(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = HilbertDims::new(vec![2, 3]).unwrap();
        let w = Witness::new(dims.clone(), random_hermitian(&mut rng, 6)).unwrap();
        let map = map_from_witness(&w).unwrap();
        let phi = random_product_vector(&mut rng, &dims);
        let p = ComplexMatrix::projector(&phi.locals()[0]);
        let q = ComplexMatrix::projector(&phi.locals()[1]);
        let lhs = w.matrix().trace_product(&kron(&p, &q)).unwrap();
        // the first factor enters transposed: Tr(W (P ⊗ Q)) = Tr(P^T L(Q))
        let rhs = p.transpose().trace_product(&map.apply_local(&q).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn choi_round_trip_from_the_map_side(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = LinearMapOp::from_choi(
            HilbertDims::new(vec![3]).unwrap(),
            HilbertDims::new(vec![2]).unwrap(),
            random_hermitian(&mut rng, 6),
        )
        .unwrap();
        let back = map_from_witness(&witness_from_map(&map).unwrap()).unwrap();
        prop_assert!(back.choi().max_abs_diff(map.choi()).unwrap() < 1e-12);
    }

    #[test]
    fn seesaw_stays_within_the_spectrum(seed in any::<u64>(), max in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_hermitian(&mut rng, 8);
        let eig = eigvals_hermitian(&x).unwrap();
        let dir = if max { Direction::Max } else { Direction::Min };
        let settings = SeesawSettings { restarts: 4, seed, ..SeesawSettings::default() };
        let r = seesaw_extremize(&x, &HilbertDims::qubits(3), dir, &settings).unwrap();
        let slack = 1e-10 * (1.0 + x.max_abs());
        prop_assert!(r.value >= eig[0] - slack && r.value <= eig[7] + slack);
        assert_abs_diff_eq!(r.argopt.expectation(&x).unwrap(), r.value, epsilon = slack);
    }
}

#[test]
fn seesaw_is_reproducible_for_a_seed() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let x = random_hermitian(&mut rng, 8);
    let settings = SeesawSettings {
        restarts: 16,
        seed: 7,
        ..SeesawSettings::default()
    };
    let dims = HilbertDims::qubits(3);
    let a = seesaw_extremize(&x, &dims, Direction::Min, &settings).unwrap();
    let b = seesaw_extremize(&x, &dims, Direction::Min, &settings).unwrap();
    assert_eq!(a, b);
}

#[test]
fn identity_map_acts_trivially_on_a_subsystem() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let dims = HilbertDims::new(vec![2, 3]).unwrap();
    let x = random_hermitian(&mut rng, 6);
    let (y, ydims) =
        apply_map_to_operator(&LinearMapOp::identity(2).unwrap(), &x, &dims, &[1]).unwrap();
    let (expected, _) = permute_subsystems(&x, &dims, &[2, 1]).unwrap();
    assert_eq!(ydims.as_slice(), &[3, 2]);
    assert!(y.max_abs_diff(&expected).unwrap() < 1e-15);
}

#[test]
fn shifts_epsilon_regression() {
    let verified = verify_upb(
        &builtin_upb(BuiltinUpb::Shifts),
        &sepkit::product_opt::Budget::default(),
    )
    .unwrap();
    assert_abs_diff_eq!(
        verified.epsilon().unwrap(),
        0.081441346456831,
        epsilon = 1e-9
    );
}
