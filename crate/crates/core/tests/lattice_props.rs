use cluster_reduce::lattice::{int_det, is_lll_reduced, lll_reduce, GramMatrix, UnimodularTransform};
use proptest::prelude::*;
use rug::{Float, Integer};

const P: u32 = 212;

/// `B^T B` for a nonsingular integer basis `B`, as an exact Gram matrix.
fn gram_of_basis(b: &[Vec<i64>]) -> Option<GramMatrix> {
    let n = b.len();
    let g: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| (b[k][i] * b[k][j]) as f64).sum()).collect())
        .collect();
    let rows: Vec<Vec<Integer>> = b.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect();
    if int_det(&rows) == 0 {
        return None;
    }
    Some(GramMatrix::from_f64(&g, P).unwrap())
}

fn basis(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-20i64..=20, n), n)
}

fn sized_basis() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (2usize..=5).prop_flat_map(basis)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn output_is_congruent_and_reduced(b in sized_basis()) {
        let g = gram_of_basis(&b);
        prop_assume!(g.is_some());
        let g = g.unwrap();
        let (r, u) = lll_reduce(&g, 0.99).unwrap();
        let d = u.det();
        prop_assert!(d == 1 || d == -1);
        prop_assert_eq!(g.congruence(&u).relative_distance(&r).to_f64(), 0.0);
        prop_assert!(is_lll_reduced(&r, 0.99).unwrap());
        prop_assert_eq!(u.mul(&u.inverse()), UnimodularTransform::identity(b.len()));
    }

    #[test]
    fn reduction_is_idempotent(b in sized_basis()) {
        let g = gram_of_basis(&b);
        prop_assume!(g.is_some());
        let (r, _) = lll_reduce(&g.unwrap(), 0.99).unwrap();
        let (again, _) = lll_reduce(&r, 0.99).unwrap();
        prop_assert_eq!(again.diagonal(), r.diagonal());
    }

    #[test]
    fn transform_is_invariant_under_scaling(b in sized_basis(), c in prop::sample::select(vec![2.0f64, 0.5, 3.0, 1e-3, 1e6])) {
        let g = gram_of_basis(&b);
        prop_assume!(g.is_some());
        let g = g.unwrap();
        let (r, u) = lll_reduce(&g, 0.99).unwrap();
        let (rs, us) = lll_reduce(&g.scale(&Float::with_val(P, c)), 0.99).unwrap();
        prop_assert_eq!(us, u);
        prop_assert!(rs.relative_distance(&r.scale(&Float::with_val(P, c))).to_f64() < 1e-40);
    }
}
