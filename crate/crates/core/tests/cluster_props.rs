use cluster_reduce::cluster::{act, classify, conjugate, phi, PointCluster, ProjectivePoint};
use cluster_reduce::linalg::CMatrix;
use proptest::prelude::*;
use rug::Complex;

const P: u32 = 212;

/// Rows of small Gaussian integers, as `(re, im)` pairs.
fn gaussian_rows(n: usize, m: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Vec<(i64, i64)>>> {
    prop::collection::vec(prop::collection::vec((-2i64..=2, -1i64..=1), n + 1), m)
        .prop_filter("no zero point", |rows| rows.iter().all(|r| r.iter().any(|&(a, b)| a != 0 || b != 0)))
}

fn cluster_of(rows: &[Vec<(i64, i64)>]) -> PointCluster {
    let points = rows
        .iter()
        .map(|r| ProjectivePoint::new(r.iter().map(|&(a, b)| Complex::with_val(P, (a, b))).collect()).unwrap())
        .collect();
    PointCluster::new(points).unwrap()
}

fn int_matrix(rows: &[Vec<i64>]) -> CMatrix {
    CMatrix::from_rows(
        rows.iter().map(|r| r.iter().map(|&x| Complex::with_val(P, x)).collect()).collect(),
        P,
    )
    .unwrap()
}

fn invertible(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, n + 1), n + 1).prop_filter("invertible", move |rows| {
        let m = int_matrix(rows);
        let d = m.det();
        d.real().to_f64().abs() > 0.5
    })
}

fn dim_and_cluster() -> impl Strategy<Value = (usize, Vec<Vec<(i64, i64)>>)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), gaussian_rows(n, n + 1..n + 6)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn phi_is_monotone_and_ends_at_degree((n, rows) in dim_and_cluster()) {
        let z = cluster_of(&rows);
        let values: Vec<usize> = (-1..=n as i64).map(|k| phi(&z, k).unwrap()).collect();
        prop_assert_eq!(values[0], 0);
        prop_assert_eq!(values[n + 1], z.degree());
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn classification_is_projectively_invariant(
        (_n, rows, g) in (1usize..=3).prop_flat_map(|n| (Just(n), gaussian_rows(n, n + 1..n + 6), invertible(n)))
    ) {
        let z = cluster_of(&rows);
        let base = classify(&z);
        let moved = classify(&act(&z, &int_matrix(&g)).unwrap());
        prop_assert_eq!(base.is_stable, moved.is_stable);
        prop_assert_eq!(base.is_semi_stable, moved.is_semi_stable);
        prop_assert_eq!(base.is_split, moved.is_split);
        prop_assert_eq!(&base.phi, &moved.phi);
        prop_assert_eq!(base.margin, moved.margin);
    }

    #[test]
    fn classification_is_conjugation_invariant((_n, rows) in dim_and_cluster()) {
        let z = cluster_of(&rows);
        let base = classify(&z);
        let conj = classify(&conjugate(&z));
        prop_assert_eq!(base.is_stable, conj.is_stable);
        prop_assert_eq!(base.is_split, conj.is_split);
        prop_assert_eq!(&base.phi, &conj.phi);
    }

    #[test]
    fn stable_implies_semi_stable_and_not_split((_n, rows) in dim_and_cluster()) {
        let c = classify(&cluster_of(&rows));
        if c.is_stable {
            prop_assert!(c.is_semi_stable);
            prop_assert!(!c.is_split);
            prop_assert!(c.margin > 0);
            prop_assert!(c.witness.is_none());
        } else {
            prop_assert!(c.margin <= 0);
            prop_assert!(c.witness.is_some());
        }
        if c.is_split {
            let (a, b) = c.split_parts.clone().unwrap();
            prop_assert_eq!(a.len() + b.len(), rows.len());
        }
    }
}
