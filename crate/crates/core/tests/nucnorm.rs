use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdcl_core::nucnorm::oracle::{nuclear_norm_oracle, singular_values_oracle};
use spdcl_core::nucnorm::spectral_norm;
use spdcl_core::{nuclear_norm, singular_values, EmbeddingMatrix};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> EmbeddingMatrix {
    let values = (0..rows * cols)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    EmbeddingMatrix::new("m", rows, cols, values).unwrap()
}

fn matrix_strategy(max_rows: usize, max_cols: usize) -> impl Strategy<Value = EmbeddingMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1.0f64..=1.0, r * c)
            .prop_map(move |v| EmbeddingMatrix::new("m", r, c, v).unwrap())
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn agrees_with_one_sided_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (r, c) = (rng.gen_range(1..=64), rng.gen_range(1..=32));
        let m = random_matrix(&mut rng, r, c);
        let fast = nuclear_norm(&m);
        let oracle = nuclear_norm_oracle(&m).unwrap();
        assert!(close(fast, oracle, 1e-8), "{r}x{c}: {fast} vs {oracle}");
    }
}

#[test]
fn full_spectrum_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let (r, c) = (rng.gen_range(1..=20), rng.gen_range(1..=20));
        let m = random_matrix(&mut rng, r, c);
        let fast = singular_values(&m);
        let oracle = singular_values_oracle(&m).unwrap();
        assert_eq!(fast.values().len(), oracle.len());
        for (a, b) in fast.values().iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-9 * oracle[0].max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn known_spectrum() {
    // [[2, 0], [0, -3], [0, 0]] has singular values 3 and 2.
    let m = EmbeddingMatrix::from_rows("k", &[vec![2.0, 0.0], vec![0.0, -3.0], vec![0.0, 0.0]])
        .unwrap();
    assert_eq!(singular_values(&m).values(), &[3.0, 2.0]);
    // Rank one: u v^T with |u| = 5, |v| = 1. The zero singular value comes
    // back as the square root of Gram roundoff, around 1e-8.
    let m = EmbeddingMatrix::from_rows(
        "r",
        &[vec![3.0 * 0.6, 3.0 * 0.8], vec![4.0 * 0.6, 4.0 * 0.8]],
    )
    .unwrap();
    assert!((nuclear_norm(&m) - 5.0).abs() < 1e-7);
    assert!((nuclear_norm_oracle(&m).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn element_shuffle_can_change_the_norm() {
    let eye = EmbeddingMatrix::from_rows("i", &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    let moved = EmbeddingMatrix::from_rows("s", &[vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
    let (a, b) = (
        nuclear_norm_oracle(&eye).unwrap(),
        nuclear_norm_oracle(&moved).unwrap(),
    );
    assert!((a - b).abs() > 0.5);
    assert!((nuclear_norm(&moved) - 2f64.sqrt()).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scale_homogeneous(m in matrix_strategy(24, 16), a in -8.0f64..8.0) {
        let scaled: Vec<f64> = m.values().iter().map(|v| a * v).collect();
        let s = EmbeddingMatrix::new("s", m.rows(), m.cols(), scaled).unwrap();
        let expected = a.abs() * nuclear_norm(&m);
        prop_assert!((nuclear_norm(&s) - expected).abs() <= 1e-10 * expected.max(1e-12));
    }

    #[test]
    fn permutation_invariant(m in matrix_strategy(24, 16), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<usize> = (0..m.rows()).collect();
        let mut cols: Vec<usize> = (0..m.cols()).collect();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = rows.iter().map(|&r| cols.iter().map(|&c| m.get(r, c)).collect()).collect();
        let p = EmbeddingMatrix::from_rows("p", &permuted).unwrap();
        prop_assert!(close(nuclear_norm(&p), nuclear_norm(&m), 1e-10));
    }

    #[test]
    fn appending_a_row_never_decreases(m in matrix_strategy(24, 16), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<Vec<f64>> = (0..m.rows()).map(|r| m.row(r).to_vec()).collect();
        rows.push((0..m.cols()).map(|_| rng.gen_range(-1.0..=1.0)).collect());
        let bigger = EmbeddingMatrix::from_rows("b", &rows).unwrap();
        prop_assert!(nuclear_norm(&bigger) >= nuclear_norm(&m) * (1.0 - 1e-12));
    }

    #[test]
    fn triangle_inequality(
        (a, b) in (1usize..=24, 1usize..=16).prop_flat_map(|(r, c)| {
            let v = prop::collection::vec(-1.0f64..=1.0, r * c);
            (v.clone(), v).prop_map(move |(x, y)| {
                (EmbeddingMatrix::new("a", r, c, x).unwrap(), EmbeddingMatrix::new("b", r, c, y).unwrap())
            })
        })
    ) {
        let sum: Vec<f64> = a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect();
        let s = EmbeddingMatrix::new("s", a.rows(), a.cols(), sum).unwrap();
        prop_assert!(nuclear_norm(&s) <= (nuclear_norm(&a) + nuclear_norm(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn norm_ordering(m in matrix_strategy(24, 16)) {
        let spectral = spectral_norm(&m);
        let fro = m.frobenius_norm();
        let nuclear = nuclear_norm(&m);
        let rank = singular_values(&m).rank(1e-9);
        let slack = 1.0 + 1e-12;
        prop_assert!(spectral <= fro * slack);
        prop_assert!(fro <= nuclear * slack);
        prop_assert!(nuclear <= (rank as f64).sqrt() * fro * slack);
    }

    #[test]
    fn transpose_invariant(m in matrix_strategy(24, 24)) {
        prop_assert!(close(nuclear_norm(&m), nuclear_norm(&m.transpose()), 1e-10));
    }
}
