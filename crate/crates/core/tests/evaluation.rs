mod common;

use common::{brute_matched, chance_agreement, labels_from_table, two_blobs};
use dvic_core::clustering::Algorithm;
use dvic_core::evaluation::{align_and_score, grid_search, n_grid, sigma_grid, GridSpec};
use dvic_core::unmixing::EndmemberCount;
use proptest::prelude::*;

#[test]
fn hand_computed_two_class_kappa() {
    // Rows are clusters, columns classes: [[40, 10], [5, 45]].
    let table = vec![vec![0, 40, 10], vec![0, 5, 45]];
    let (pred, truth) = labels_from_table(&table);
    let r = align_and_score(&pred, &truth).unwrap();
    assert!((r.oa - 0.85).abs() < 1e-15);
    assert!((r.p_e - 0.5).abs() < 1e-15);
    assert!((r.kappa - 0.7).abs() < 1e-12);
}

#[test]
fn length_mismatch_and_empty_truth_are_rejected() {
    let err = align_and_score(&[1, 2, 3], &[1, 2]).unwrap_err().to_string();
    assert!(err.contains("3 predicted labels for 2 truth labels"), "{err}");
    assert!(align_and_score(&[1, 2], &[0, 0]).is_err());
}

#[test]
fn unlabeled_pixels_do_not_count() {
    let r = align_and_score(&[1, 1, 2, 2], &[1, 0, 2, 0]).unwrap();
    assert_eq!(r.n_eval, 2);
    assert_eq!(r.oa, 1.0);
}

fn table_strategy() -> impl Strategy<Value = Vec<Vec<u64>>> {
    (1usize..=6, 1usize..=6)
        .prop_flat_map(|(rows, cols)| prop::collection::vec(prop::collection::vec(0u64..20, cols + 1), rows))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn alignment_matches_exhaustive_search(table in table_strategy()) {
        let labeled: u64 = table.iter().map(|r| r[1..].iter().sum::<u64>()).sum();
        prop_assume!(labeled > 0);
        let (pred, truth) = labels_from_table(&table);
        let r = align_and_score(&pred, &truth).unwrap();
        prop_assert_eq!(r.n_eval as u64, labeled);
        prop_assert_eq!(r.oa, brute_matched(&table) as f64 / labeled as f64);

        let p_e = chance_agreement(&pred, &truth, &r.alignment);
        prop_assert!((r.p_e - p_e).abs() <= 1e-12);
        let kappa = if p_e < 1.0 { (r.oa - p_e) / (1.0 - p_e) } else { 1.0 };
        prop_assert!((r.kappa - kappa).abs() <= 1e-12);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r.kappa));

        let diagonal = (0..pred.len())
            .filter(|&i| truth[i] != 0)
            .all(|i| r.alignment.contains(&(pred[i], truth[i])));
        prop_assert_eq!((r.kappa - 1.0).abs() <= 1e-12, diagonal);
    }
}

fn small_spec(algorithm: Algorithm, cache: bool) -> GridSpec {
    let cloud = fixture();
    let mut spec = GridSpec::new(n_grid(5, 40, 3).unwrap(), sigma_grid(&cloud, 3).unwrap(), 2);
    spec.trials = 3;
    spec.seed = 11;
    spec.replicates = 5;
    spec.ell = 10;
    spec.cache = cache;
    if algorithm == Algorithm::Dvic {
        spec.endmembers = EndmemberCount::Fixed(2);
    }
    spec
}

fn fixture() -> dvic_core::PointCloud {
    two_blobs(40, 3, 1.5, 0.5, 8)
}

#[test]
fn caching_never_changes_results() {
    let cloud = fixture();
    for algorithm in [Algorithm::Lund, Algorithm::Dvic] {
        let cached = grid_search(algorithm, &cloud, &small_spec(algorithm, true)).unwrap();
        let plain = grid_search(algorithm, &cloud, &small_spec(algorithm, false)).unwrap();
        assert_eq!(cached.nodes, plain.nodes, "{algorithm:?}");
        assert_eq!(cached.t_grids, plain.t_grids);
        assert_eq!(cached.endmember_counts, plain.endmember_counts);
        assert_eq!(cached.best, plain.best);
        assert!(cached.nodes.iter().all(|n| n.error.is_none()));
    }
}

#[test]
fn deterministic_algorithms_repeat_across_trials() {
    let cloud = fixture();
    let report = grid_search(Algorithm::Lund, &cloud, &small_spec(Algorithm::Lund, true)).unwrap();
    for node in &report.nodes {
        assert_eq!(node.oa.len(), 3);
        assert!(node.oa.iter().all(|&oa| oa == node.oa[0]), "{node:?}");
    }

    // Bridged by a handful of edges at these neighbor counts.
    let separated = two_blobs(40, 3, 3.0, 0.5, 8);
    let mut spec = small_spec(Algorithm::Lund, true);
    spec.n_grid = vec![20, 25, 30];
    spec.sigma_grid = sigma_grid(&separated, 3).unwrap();
    let report = grid_search(Algorithm::Lund, &separated, &spec).unwrap();
    assert_eq!(report.best_oa(), Some(1.0));
}

#[test]
fn missing_truth_is_an_error() {
    let cloud = common::uniform_cloud(30, 2, 0);
    let spec = GridSpec::new(vec![5], vec![0.1], 2);
    assert!(grid_search(Algorithm::Lund, &cloud, &spec).is_err());
}
