use cluster_reduce::cluster::PointCluster;
use cluster_reduce::lattice::{is_lll_reduced, GramMatrix, UnimodularTransform};
use cluster_reduce::pipeline::{
    rebase_pencil, reduce_binary_form, reduce_cluster, reduce_quadric_pencil, reduce_ternary_form, PipelineOptions,
    ReductionReport, SCHEMA,
};
use cluster_reduce::poly::MultiPoly;
use rug::Integer;

const PENCIL_Q1: &str = "857211194051*x^2 - 10879213981695*x*y - 1296007209476*x*z + 34518126244996*y^2 + 8224075847095*y*z + 489854396055*z^2";
const PENCIL_Q2: &str = "2274418654562*x^2 - 28865567091425*x*y - 3438665984061*x*z + 91586146842213*y^2 + 21820750429746*y*z + 1299719350945*z^2";
const QUARTIC: &str = "390908548757*x^4 - 1083699236751*x^3*y + 835578482044*x^3*z + 1126610184312*x^2*y^2 - 1737329379412*x^2*y*z + 669777678687*x^2*z^2 - 520542386163*x*y^3 + 1204081445939*x*y^2*z - 928398396271*x*y*z^2 + 238611653627*x*z^3 + 90192376558*y^4 - 278168756247*y^3*z + 321720059816*y^2*z^2 - 165373310794*y*z^3 + 31877479532*z^4";

fn poly(s: &str, nvars: usize) -> MultiPoly {
    MultiPoly::parse(s, nvars).unwrap()
}

fn height(s: &Option<String>) -> Integer {
    s.as_deref().unwrap().parse().unwrap()
}

fn gram_f64(g: &GramMatrix) -> Vec<Vec<f64>> {
    g.rows().iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect()
}

/// Relative Frobenius distance after the best positive rescaling of `a`.
fn scaled_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let dot = |x: &[Vec<f64>], y: &[Vec<f64>]| -> f64 {
        x.iter().zip(y).flat_map(|(r, s)| r.iter().zip(s).map(|(p, q)| p * q)).sum()
    };
    let c = dot(a, b) / dot(a, a);
    let diff: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(p, q)| c * p - q).collect()).collect();
    (dot(&diff, &diff) / dot(b, b)).sqrt()
}

fn check_common(r: &ReductionReport) {
    assert!(r.diagnostics.conjugation_fixed);
    assert!(is_lll_reduced(&r.reduced_covariant, 0.99).unwrap());
    let d = r.transform.det();
    assert!(d == 1 || d == -1);
    assert_eq!(r.covariant.congruence(&r.transform).relative_distance(&r.reduced_covariant).to_f64(), 0.0);
    let v = r.to_json();
    assert_eq!(v["schema"], SCHEMA);
    assert!(v["transform"].is_array() || v["transform"].is_object());
    assert!(!r.to_text().is_empty());
}

#[test]
fn binary_reduction_round_trips() {
    let f = poly("7*x^4 + 95*x^3*y + 483*x^2*y^2 + 1090*x*y^3 + 922*y^4", 2);
    let r = reduce_binary_form(&f, &PipelineOptions::default()).unwrap();
    check_common(&r);
    let back = r.reduced_forms[0].substitute(r.transform.inverse().rows()).unwrap();
    assert_eq!(back, f);
    assert!(height(&r.diagnostics.height_after) <= height(&r.diagnostics.height_before));
}

#[test]
fn pencil_reduction_round_trips_and_lowers_height() {
    let (q1, q2) = (poly(PENCIL_Q1, 3), poly(PENCIL_Q2, 3));
    let r = reduce_quadric_pencil(&q1, &q2, &PipelineOptions::default()).unwrap();
    check_common(&r);
    let p = r.pencil_transform.clone().unwrap();
    let rebased = rebase_pencil(&[q1.clone(), q2.clone()], &p);
    assert_eq!(&r.intermediate_forms[2..4], &rebased[..]);
    assert_eq!(rebase_pencil(&rebased, &p.inverse()), vec![q1, q2]);
    let inv = r.transform.inverse();
    for (reduced, original) in r.reduced_forms.iter().zip(&rebased) {
        assert_eq!(&reduced.substitute(inv.rows()).unwrap(), original);
    }
    assert!(height(&r.diagnostics.height_after) < height(&r.diagnostics.height_before));
    assert_eq!(r.cluster.degree(), 4);
}

#[test]
fn quartic_reduction_round_trips_and_lowers_height() {
    let f = poly(QUARTIC, 3);
    let r = reduce_ternary_form(&f, &PipelineOptions::default()).unwrap();
    check_common(&r);
    assert_eq!(r.diagnostics.precision, 424);
    assert_eq!(r.reduced_forms[0].substitute(r.transform.inverse().rows()).unwrap(), f);
    assert!(height(&r.diagnostics.height_after) < height(&r.diagnostics.height_before));
}

#[test]
fn ternary_covariant_is_equivariant() {
    let f = poly("x^3 + 2*y^3 - 3*z^3 + x*y*z - x^2*z", 3);
    let v = UnimodularTransform::from_i64(&[vec![1, 2, 0], vec![0, 1, -1], vec![1, 1, 0]]).unwrap();
    let opts = PipelineOptions::default();
    let base = reduce_ternary_form(&f, &opts).unwrap();
    let moved = reduce_ternary_form(&f.substitute(v.rows()).unwrap(), &opts).unwrap();
    check_common(&base);
    check_common(&moved);
    let expected = base.covariant.congruence(&v);
    assert!(scaled_distance(&gram_f64(&expected), &gram_f64(&moved.covariant)) < 1e-6);
    // both land in the same orbit, so the reduced forms have equal heights
    assert_eq!(base.reduced_forms[0].height(), moved.reduced_forms[0].height());
}

#[test]
fn cluster_reduction_moves_points_contragrediently() {
    let c = PointCluster::from_int_rows(
        &[vec![13, 8, 5], vec![21, 13, 8], vec![3, 2, 2], vec![7, 5, 1], vec![1, 1, 1]],
        212,
    )
    .unwrap();
    let r = reduce_cluster(&c, &PipelineOptions::default()).unwrap();
    check_common(&r);
    let ut = r.transform.transpose();
    for (p, q) in c.points().iter().zip(r.reduced_cluster.points()) {
        // reduced point times U^T is proportional to the original point
        let back: Vec<rug::Complex> = (0..3)
            .map(|j| {
                (0..3).fold(rug::Complex::with_val(212, 0), |acc, k| {
                    acc + rug::Complex::with_val(212, &q.coords()[k] * &ut.rows()[k][j])
                })
            })
            .collect();
        let back = cluster_reduce::cluster::ProjectivePoint::new(back).unwrap();
        assert!(back.sin_angle(p).to_f64() < 1e-40);
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    let opts = PipelineOptions::default();
    assert!(reduce_binary_form(&poly("x^2*y", 2), &opts).is_err());
    assert!(reduce_binary_form(&poly("x^2 + y^2", 2), &opts).is_err());
    assert!(reduce_ternary_form(&poly("x^2 + y^2 + z^2", 3), &opts).is_err());
    assert!(reduce_quadric_pencil(&poly("x^2", 3), &poly("y^2", 3), &opts).is_err());
}
