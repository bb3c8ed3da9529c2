use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spdcl_core::difficulty::{initial_scores_from_norms, score_dump};
use spdcl_core::{
    delta_scores, initial_scores, nuclear_norm, rank_samples, AlignmentMode, DeltaOrdering,
    DifficultyHistory, DifficultyRecord, EmbeddingMatrix,
};

fn random_matrix(rng: &mut ChaCha8Rng, id: &str, rows: usize, cols: usize) -> EmbeddingMatrix {
    let values = (0..rows * cols)
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    EmbeddingMatrix::new(id, rows, cols, values).unwrap()
}

fn norms(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(id, n)| (id.to_string(), *n)).collect()
}

fn ranked(records: &[DifficultyRecord]) -> Vec<String> {
    rank_samples(records).unwrap()
}

#[test]
fn longer_samples_rank_harder() {
    let mut hits = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dump = vec![
            random_matrix(&mut rng, "len16", 16, 32),
            random_matrix(&mut rng, "len04", 4, 32),
            random_matrix(&mut rng, "len08", 8, 32),
        ];
        dump.shuffle(&mut rng);
        if ranked(&initial_scores(&dump).unwrap()) == ["len04", "len08", "len16"] {
            hits += 1;
        }
    }
    assert!(hits >= 48, "{hits}/50 trials in length order");
}

/// Materializes both sorted tables and subtracts position by position.
fn rank_aligned_oracle(before: &[(String, f64)], now: &[(String, f64)]) -> Vec<(String, f64)> {
    let sort = |t: &[(String, f64)]| {
        let mut t = t.to_vec();
        t.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        t
    };
    let (b, n) = (sort(before), sort(now));
    let mut deltas: Vec<(String, f64)> = (0..n.len())
        .map(|i| (n[i].0.clone(), n[i].1 - b[i].1))
        .collect();
    deltas.sort_by(|x, y| {
        y.1.abs()
            .partial_cmp(&x.1.abs())
            .unwrap()
            .then(x.0.cmp(&y.0))
    });
    deltas
}

#[test]
fn rank_aligned_matches_positional_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..100 {
        let n = if trial == 0 { 5 } else { rng.gen_range(1..40) };
        let ids: Vec<String> = (0..n).map(|i| format!("s{i:02}")).collect();
        let before: Vec<(String, f64)> = ids
            .iter()
            .map(|id| (id.clone(), rng.gen_range(0.0..10.0)))
            .collect();
        let now: Vec<(String, f64)> = ids
            .iter()
            .map(|id| (id.clone(), rng.gen_range(0.0..10.0)))
            .collect();
        let mut history = DifficultyHistory::new(1, &before).unwrap();
        let records = delta_scores(
            &now,
            &mut history,
            2,
            AlignmentMode::RankAligned,
            DeltaOrdering::Magnitude,
        )
        .unwrap();
        let expected = rank_aligned_oracle(&before, &now);
        let got: Vec<(String, f64)> = records
            .iter()
            .map(|r| (r.sample_id.clone(), r.score))
            .collect();
        assert_eq!(got, expected);
        assert_eq!(history.latest_epoch(), 2);
    }
}

#[test]
fn identity_aligned_hand_case() {
    let mut h =
        DifficultyHistory::new(1, &norms(&[("a", 10.0), ("b", 10.0), ("c", 10.0)])).unwrap();
    let now = norms(&[("a", 4.0), ("b", 9.0), ("c", 10.0)]);
    let r = delta_scores(
        &now,
        &mut h,
        2,
        AlignmentMode::IdentityAligned,
        DeltaOrdering::Magnitude,
    )
    .unwrap();
    assert_eq!(ranked(&r), ["a", "b", "c"]);
    let scores: Vec<f64> = r.iter().map(|r| r.score).collect();
    assert_eq!(scores, [-6.0, -1.0, 0.0]);
}

#[test]
fn zero_deltas_fall_back_to_ids() {
    let table = norms(&[("c", 1.0), ("a", 2.0), ("b", 3.0)]);
    for alignment in [AlignmentMode::RankAligned, AlignmentMode::IdentityAligned] {
        let mut h = DifficultyHistory::new(1, &table).unwrap();
        let r = delta_scores(&table, &mut h, 2, alignment, DeltaOrdering::Magnitude).unwrap();
        assert_eq!(ranked(&r), ["a", "b", "c"]);
    }
}

#[test]
fn history_must_be_consecutive() {
    let table = norms(&[("a", 1.0), ("b", 2.0)]);
    let mut h = DifficultyHistory::new(1, &table).unwrap();
    let err = delta_scores(
        &table,
        &mut h,
        3,
        AlignmentMode::RankAligned,
        DeltaOrdering::Magnitude,
    );
    assert!(matches!(err, Err(spdcl_core::Error::MissingEpoch(2))));
    let other = norms(&[("a", 1.0), ("z", 2.0)]);
    let err = delta_scores(
        &other,
        &mut h,
        2,
        AlignmentMode::RankAligned,
        DeltaOrdering::Magnitude,
    );
    assert!(matches!(err, Err(spdcl_core::Error::SampleSetMismatch(_))));
    assert_eq!(h.latest_epoch(), 1);
}

#[test]
fn epoch_one_rejects_bad_dumps() {
    assert!(matches!(
        initial_scores(&[]),
        Err(spdcl_core::Error::EmptyDump)
    ));
    let m = EmbeddingMatrix::new("x", 1, 1, vec![1.0]).unwrap();
    assert!(matches!(
        initial_scores(&[m.clone(), m]),
        Err(spdcl_core::Error::DuplicateSample(_))
    ));
}

#[test]
fn rank_samples_matches_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let n = rng.gen_range(1..60);
        // Few distinct values so ties are common.
        let table: Vec<(String, f64)> = (0..n)
            .map(|i| (format!("id{i:03}"), f64::from(rng.gen_range(0..8u8))))
            .collect();
        let mut shuffled = table.clone();
        shuffled.shuffle(&mut rng);
        let mut records = initial_scores_from_norms(&shuffled).unwrap();
        records.shuffle(&mut rng);

        let mut oracle = table.clone();
        oracle.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        let oracle: Vec<String> = oracle.into_iter().map(|(id, _)| id).collect();
        assert_eq!(ranked(&records), oracle);
    }
}

fn walk(seed: u64, n: usize, epochs: u32, alignment: AlignmentMode) -> Vec<Vec<DifficultyRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dump: Vec<EmbeddingMatrix> = (0..n)
        .map(|i| random_matrix(&mut rng, &format!("s{i}"), 1 + i % 7, 6))
        .collect();
    let mut out = vec![initial_scores(&dump).unwrap()];
    let mut history = DifficultyHistory::new(1, &score_dump(&dump).unwrap()).unwrap();
    for epoch in 2..=epochs {
        let now: Vec<(String, f64)> = dump
            .iter()
            .map(|m| {
                (
                    m.sample_id().to_string(),
                    nuclear_norm(m) * (1.0 + 0.1 * epoch as f64) + rng.gen_range(0.0..0.5),
                )
            })
            .collect();
        out.push(
            delta_scores(
                &now,
                &mut history,
                epoch,
                alignment,
                DeltaOrdering::Magnitude,
            )
            .unwrap(),
        );
    }
    out
}

#[test]
fn deterministic_across_reruns() {
    for alignment in [AlignmentMode::RankAligned, AlignmentMode::IdentityAligned] {
        assert_eq!(walk(3, 30, 5, alignment), walk(3, 30, 5, alignment));
    }
}

proptest! {
    #[test]
    fn epoch_one_order_survives_positive_scaling(seed in any::<u64>(), n in 1usize..20, c in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dump: Vec<EmbeddingMatrix> = (0..n)
            .map(|i| {
                let rows = rng.gen_range(1..10);
                random_matrix(&mut rng, &format!("s{i}"), rows, 5)
            })
            .collect();
        let scaled: Vec<EmbeddingMatrix> = dump
            .iter()
            .map(|m| {
                let v = m.values().iter().map(|x| c * x).collect();
                EmbeddingMatrix::new(m.sample_id(), m.rows(), m.cols(), v).unwrap()
            })
            .collect();
        prop_assert_eq!(ranked(&initial_scores(&dump).unwrap()), ranked(&initial_scores(&scaled).unwrap()));
    }

    #[test]
    fn ranks_are_a_permutation(seed in any::<u64>(), n in 1usize..50, signed in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let before: Vec<(String, f64)> = (0..n).map(|i| (format!("s{i}"), rng.gen_range(0.0..5.0))).collect();
        let now: Vec<(String, f64)> = (0..n).map(|i| (format!("s{i}"), rng.gen_range(0.0..5.0))).collect();
        let ordering = if signed { DeltaOrdering::Signed } else { DeltaOrdering::Magnitude };
        let mut h = DifficultyHistory::new(1, &before).unwrap();
        let records = delta_scores(&now, &mut h, 2, AlignmentMode::RankAligned, ordering).unwrap();
        let mut ranks: Vec<usize> = records.iter().map(|r| r.rank).collect();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (0..n).collect::<Vec<_>>());
        prop_assert!(initial_scores_from_norms(&before).unwrap().iter().all(|r| r.score >= 0.0));
    }

    #[test]
    fn alignments_agree_when_order_is_stable(seed in any::<u64>(), n in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut base: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        base.sort_by(f64::total_cmp);
        base.dedup();
        // A strictly increasing map keeps every sample at its rank.
        let before: Vec<(String, f64)> = base.iter().enumerate().map(|(i, v)| (format!("s{i:02}"), *v)).collect();
        let now: Vec<(String, f64)> = base.iter().enumerate().map(|(i, v)| (format!("s{i:02}"), 2.0 * v + v * v)).collect();
        let mut h1 = DifficultyHistory::new(1, &before).unwrap();
        let mut h2 = h1.clone();
        let a = delta_scores(&now, &mut h1, 2, AlignmentMode::RankAligned, DeltaOrdering::Magnitude).unwrap();
        let b = delta_scores(&now, &mut h2, 2, AlignmentMode::IdentityAligned, DeltaOrdering::Magnitude).unwrap();
        prop_assert_eq!(a, b);
    }
}
