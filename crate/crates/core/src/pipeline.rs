//! End-to-end reductions: point clusters, binary forms, pencils of ternary
//! quadrics and ternary forms.
//!
//! Each pipeline computes the covariant of a real stable cluster, LLL-reduces
//! it as a real quadratic form, and applies the resulting unimodular `U`:
//! forms become `F(U x)` and points move contragrediently to `P U^{-T}`.

use rug::{Float, Integer};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cluster::{act, classify, PointCluster, StabilityClass, Tolerances};
use crate::covariant::{minimize, simplex_covariant, HermitianForm, Init, MinimizeOptions};
use crate::error::{Error, Result};
use crate::intersect::{curve_intersection, IntersectOptions, RootSetSummary};
use crate::io::cluster_to_json;
use crate::lattice::{lll_reduce, GramMatrix, UnimodularTransform, DEFAULT_DELTA};
use crate::mp::{half_precision_tol, DEFAULT_PREC};
use crate::poly::{det3x3, hessian, quadric_matrix, MultiPoly};
use crate::roots::binary_form_roots;

/// Version tag of the JSON report.
pub const SCHEMA: &str = "cluster-reduce/1";

/// Working precision used for ternary forms of degree four and higher.
pub const HIGH_PREC: u32 = 424;

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    /// Working precision in bits; chosen per pipeline when absent.
    pub prec: Option<u32>,
    pub tol: f64,
    pub delta: f64,
    pub max_iter: usize,
    /// Seed for the random shears used by curve intersection.
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            prec: None,
            tol: 1e-12,
            delta: DEFAULT_DELTA,
            max_iter: 5000,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionKind {
    Cluster,
    BinaryForm,
    QuadricPencil,
    TernaryForm,
}

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub precision: u32,
    /// `"minimize"` or `"simplex"` (closed form for `n+2` points).
    pub covariant_method: &'static str,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub residuals: Option<RootSetSummary>,
    pub stability: StabilityClass,
    pub conjugation_fixed: bool,
    pub height_before: Option<String>,
    pub height_after: Option<String>,
    /// Set when the height did not decrease.
    pub height_warning: bool,
}

#[derive(Clone, Debug)]
pub struct ReductionReport {
    pub kind: ReductionKind,
    pub input_forms: Vec<MultiPoly>,
    /// Basis change of a pencil: new member `i` is `sum_j P[j][i] Q_j`.
    pub pencil_transform: Option<UnimodularTransform>,
    /// Pencil only: the binary cubic, its reduction, and the rebased quadrics.
    pub intermediate_forms: Vec<MultiPoly>,
    /// Cluster whose covariant was reduced.
    pub cluster: PointCluster,
    /// Determinant-one real covariant of `cluster`.
    pub covariant: GramMatrix,
    pub transform: UnimodularTransform,
    /// `U^T G U`.
    pub reduced_covariant: GramMatrix,
    pub reduced_forms: Vec<MultiPoly>,
    pub reduced_cluster: PointCluster,
    pub diagnostics: Diagnostics,
}

impl ReductionReport {
    pub fn to_json(&self) -> Value {
        let forms = |fs: &[MultiPoly]| -> Vec<Value> {
            fs.iter().map(|f| json!({ "text": f.to_string(), "poly": f.to_json() })).collect()
        };
        json!({
            "schema": SCHEMA,
            "kind": self.kind,
            "input": { "forms": forms(&self.input_forms) },
            "pencil_transform": self.pencil_transform,
            "intermediate_forms": forms(&self.intermediate_forms),
            "cluster": cluster_to_json(&self.cluster),
            "covariant": self.covariant,
            "transform": self.transform,
            "reduced_covariant": self.reduced_covariant,
            "reduced": {
                "forms": forms(&self.reduced_forms),
                "cluster": cluster_to_json(&self.reduced_cluster),
            },
            "diagnostics": self.diagnostics,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kind = serde_json::to_value(self.kind).ok();
        s.push_str(&format!(
            "kind: {}\n",
            kind.as_ref().and_then(Value::as_str).unwrap_or("?")
        ));
        for f in &self.input_forms {
            s.push_str(&format!("input: {f}\n"));
        }
        if let Some(p) = &self.pencil_transform {
            s.push_str(&format!("pencil transform: {}\n", int_rows(p)));
        }
        for f in &self.intermediate_forms {
            s.push_str(&format!("intermediate: {f}\n"));
        }
        s.push_str(&format!("points: {}\n", self.cluster.degree()));
        s.push_str("covariant:\n");
        for r in self.covariant.rows() {
            let cells: Vec<String> = r.iter().map(|x| format!("{:.10e}", x.to_f64())).collect();
            s.push_str(&format!("  [{}]\n", cells.join(", ")));
        }
        s.push_str(&format!("transform: {}\n", int_rows(&self.transform)));
        for f in &self.reduced_forms {
            s.push_str(&format!("reduced: {f}\n"));
        }
        let d = &self.diagnostics;
        s.push_str(&format!(
            "precision: {} bits, covariant by {}, iterations: {}, gradient norm: {:.3e}\n",
            d.precision, d.covariant_method, d.iterations, d.gradient_norm
        ));
        if let Some(r) = &d.residuals {
            s.push_str(&format!(
                "intersection: {} points ({} with multiplicity), max residual {:.3e}\n",
                r.points, r.total_multiplicity, r.max_residual
            ));
        }
        if let (Some(a), Some(b)) = (&d.height_before, &d.height_after) {
            s.push_str(&format!(
                "height: {a} -> {b}{}\n",
                if d.height_warning { " (did not decrease)" } else { "" }
            ));
        }
        s
    }
}

fn int_rows(u: &UnimodularTransform) -> String {
    let rows: Vec<String> = u
        .rows()
        .iter()
        .map(|r| format!("[{}]", r.iter().map(Integer::to_string).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

/// The form `F(Z) = prod_j (a_j0 x_0 + ... + a_jn x_n)` of a cluster whose
/// points have integral real coordinates, each taken primitive.
pub fn cluster_form(c: &PointCluster) -> Option<MultiPoly> {
    let n1 = c.dim() + 1;
    let mut f = MultiPoly::constant(n1, 1);
    for p in c.points() {
        let mut v = Vec::with_capacity(n1);
        for z in p.coords() {
            if !z.imag().is_zero() || !z.real().is_integer() {
                return None;
            }
            v.push(z.real().to_integer()?);
        }
        let mut g = Integer::new();
        for x in &v {
            g.gcd_mut(x);
        }
        let mut l = MultiPoly::zero(n1);
        for (i, x) in v.iter().enumerate() {
            l = l.add(&MultiPoly::var(n1, i).scale(&Integer::from(x / &g)));
        }
        f = f.mul(&l);
    }
    Some(f)
}

/// Coefficient height of [`cluster_form`].
pub fn cluster_height(c: &PointCluster) -> Option<Integer> {
    cluster_form(c).map(|f| f.height())
}

fn forms_height(fs: &[MultiPoly]) -> Integer {
    fs.iter().map(MultiPoly::height).max().unwrap_or_default()
}

/// Real determinant-one Gram matrix of a Hermitian covariant whose
/// imaginary parts are at most `rel_tol` relative to its largest entry.
fn real_gram(z: &HermitianForm, rel_tol: f64) -> Result<GramMatrix> {
    let m = z.matrix();
    let prec = m.prec();
    let mut tol = half_precision_tol(prec);
    if tol < rel_tol {
        tol = Float::with_val(prec, rel_tol);
    }
    let lim = Float::with_val(prec, m.max_abs() * tol);
    if m.max_imag_abs() > lim {
        return Err(Error::NotReal);
    }
    GramMatrix::new(z.real_rows())
}

struct Covariant {
    gram: GramMatrix,
    method: &'static str,
    iterations: usize,
    gradient_norm: f64,
    class: StabilityClass,
}

fn covariant_of(cluster: &PointCluster, prec: u32, opts: &PipelineOptions, try_simplex: bool) -> Result<Covariant> {
    let class = classify(cluster);
    if !class.is_stable {
        return Err(Error::NotStable(Box::new(class)));
    }
    if !cluster.is_conjugation_fixed(&Tolerances::for_prec(cluster.prec()).point_tol) {
        return Err(Error::NotReal);
    }
    if try_simplex && cluster.degree() == cluster.dim() + 2 {
        if let Ok(z) = simplex_covariant(cluster) {
            return Ok(Covariant {
                gram: real_gram(&z, 0.0)?,
                method: "simplex",
                iterations: 0,
                gradient_norm: 0.0,
                class,
            });
        }
    }
    let mo = MinimizeOptions {
        tol: opts.tol,
        max_iter: opts.max_iter,
        prec,
        init: Init::Simplex,
        check_stability: false,
        record_transcript: false,
    };
    let r = minimize(cluster, &mo)?;
    Ok(Covariant {
        gram: real_gram(&r.z, opts.tol.sqrt())?,
        method: "minimize",
        iterations: r.iterations,
        gradient_norm: r.final_gradient_norm.to_f64(),
        class,
    })
}

/// `Z . U = P U^{-T}`.
fn move_cluster(cluster: &PointCluster, u: &UnimodularTransform) -> Result<PointCluster> {
    let g = u.inverse().transpose().to_cmatrix(cluster.prec());
    act(cluster, &g)
}

struct Reduced {
    cov: Covariant,
    reduced: GramMatrix,
    u: UnimodularTransform,
    moved: PointCluster,
    conj_fixed: bool,
}

fn reduce_core(cluster: &PointCluster, prec: u32, opts: &PipelineOptions, try_simplex: bool) -> Result<Reduced> {
    let cov = covariant_of(cluster, prec, opts, try_simplex)?;
    let (reduced, u) = lll_reduce(&cov.gram, opts.delta)?;
    let moved = move_cluster(cluster, &u)?;
    Ok(Reduced {
        cov,
        reduced,
        u,
        moved,
        conj_fixed: true,
    })
}

fn diagnostics(
    r: &Reduced,
    prec: u32,
    residuals: Option<RootSetSummary>,
    before: Option<Integer>,
    after: Option<Integer>,
) -> Diagnostics {
    let warn = matches!((&before, &after), (Some(b), Some(a)) if a > b);
    Diagnostics {
        precision: prec,
        covariant_method: r.cov.method,
        iterations: r.cov.iterations,
        gradient_norm: r.cov.gradient_norm,
        residuals,
        stability: r.cov.class.clone(),
        conjugation_fixed: r.conj_fixed,
        height_before: before.map(|h| h.to_string()),
        height_after: after.map(|h| h.to_string()),
        height_warning: warn,
    }
}

/// Reduce a real stable point cluster.
pub fn reduce_cluster(cluster: &PointCluster, opts: &PipelineOptions) -> Result<ReductionReport> {
    let prec = opts.prec.unwrap_or(DEFAULT_PREC.max(cluster.prec()));
    let r = reduce_core(cluster, prec, opts, false)?;
    let before = cluster_height(cluster);
    let after = cluster_height(&r.moved);
    Ok(ReductionReport {
        kind: ReductionKind::Cluster,
        input_forms: vec![],
        pencil_transform: None,
        intermediate_forms: vec![],
        cluster: cluster.clone(),
        covariant: r.cov.gram.clone(),
        transform: r.u.clone(),
        reduced_covariant: r.reduced.clone(),
        reduced_forms: vec![],
        reduced_cluster: r.moved.clone(),
        diagnostics: diagnostics(&r, prec, None, before, after),
    })
}

fn check_binary(f: &MultiPoly) -> Result<u32> {
    if f.nvars() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: f.nvars(),
        });
    }
    let d = f.homogeneous_degree()?;
    if d < 3 {
        return Err(Error::Degenerate("binary forms need degree at least 3".into()));
    }
    Ok(d)
}

/// Reduce a binary form through the covariant of its roots.
pub fn reduce_binary_form(f: &MultiPoly, opts: &PipelineOptions) -> Result<ReductionReport> {
    check_binary(f)?;
    let prec = opts.prec.unwrap_or(DEFAULT_PREC);
    let cluster = binary_form_roots(f, prec)?;
    let r = reduce_core(&cluster, prec, opts, false)?;
    let g = f.substitute(r.u.rows())?;
    Ok(ReductionReport {
        kind: ReductionKind::BinaryForm,
        input_forms: vec![f.clone()],
        pencil_transform: None,
        intermediate_forms: vec![],
        cluster,
        covariant: r.cov.gram.clone(),
        transform: r.u.clone(),
        reduced_covariant: r.reduced.clone(),
        reduced_forms: vec![g.clone()],
        reduced_cluster: r.moved.clone(),
        diagnostics: diagnostics(&r, prec, None, Some(f.height()), Some(g.height())),
    })
}

/// `det(x M1 + y M2)` for the matrices of second partials of two quadrics.
pub fn pencil_cubic(q1: &MultiPoly, q2: &MultiPoly) -> Result<MultiPoly> {
    let m1 = quadric_matrix(q1)?;
    let m2 = quadric_matrix(q2)?;
    let x = MultiPoly::var(2, 0);
    let y = MultiPoly::var(2, 1);
    let entries: Vec<Vec<MultiPoly>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| x.scale(&m1[i][j]).add(&y.scale(&m2[i][j])))
                .collect()
        })
        .collect();
    Ok(det3x3(&entries))
}

/// Members `sum_j P[j][i] Q_j` of a pencil after the basis change `P`.
pub fn rebase_pencil(qs: &[MultiPoly], p: &UnimodularTransform) -> Vec<MultiPoly> {
    (0..qs.len())
        .map(|i| {
            qs.iter()
                .enumerate()
                .fold(MultiPoly::zero(qs[0].nvars()), |acc, (j, q)| acc.add(&q.scale(&p.rows()[j][i])))
        })
        .collect()
}

/// Reduce a pencil of ternary quadrics: first the basis of the pencil via
/// its binary cubic, then the coordinates via the covariant of the four
/// base points.
pub fn reduce_quadric_pencil(q1: &MultiPoly, q2: &MultiPoly, opts: &PipelineOptions) -> Result<ReductionReport> {
    let prec = opts.prec.unwrap_or(DEFAULT_PREC);
    let cubic = pencil_cubic(q1, q2)?;
    if cubic.is_zero() {
        return Err(Error::Degenerate("the pencil consists of singular quadrics".into()));
    }
    let binary = reduce_binary_form(&cubic, &PipelineOptions { prec: Some(prec), ..opts.clone() }).map_err(|e| match e {
        Error::NotStable(_) => Error::Degenerate("the pencil cubic has a repeated root".into()),
        other => other,
    })?;
    let p = binary.transform.clone();
    let rebased = rebase_pencil(&[q1.clone(), q2.clone()], &p);
    let rs = curve_intersection(
        &rebased[0],
        &rebased[1],
        &IntersectOptions {
            prec,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    if rs.roots.len() != 4 || rs.roots.iter().any(|e| e.multiplicity != 1) {
        return Err(Error::Degenerate(format!(
            "expected 4 distinct base points, found {}",
            rs.roots.len()
        )));
    }
    let cluster = rs.to_cluster()?;
    let r = reduce_core(&cluster, prec, opts, true)?;
    let reduced: Vec<MultiPoly> = rebased
        .iter()
        .map(|q| q.substitute(r.u.rows()))
        .collect::<Result<_>>()?;
    let mut intermediate = vec![cubic, binary.reduced_forms[0].clone()];
    intermediate.extend(rebased.iter().cloned());
    Ok(ReductionReport {
        kind: ReductionKind::QuadricPencil,
        input_forms: vec![q1.clone(), q2.clone()],
        pencil_transform: Some(p),
        intermediate_forms: intermediate,
        cluster,
        covariant: r.cov.gram.clone(),
        transform: r.u.clone(),
        reduced_covariant: r.reduced.clone(),
        reduced_forms: reduced.clone(),
        reduced_cluster: r.moved.clone(),
        diagnostics: diagnostics(
            &r,
            prec,
            Some(rs.summary()),
            Some(forms_height(&[q1.clone(), q2.clone()])),
            Some(forms_height(&reduced)),
        ),
    })
}

/// Reduce a ternary form through the covariant of its inflection points.
pub fn reduce_ternary_form(f: &MultiPoly, opts: &PipelineOptions) -> Result<ReductionReport> {
    if f.nvars() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: f.nvars(),
        });
    }
    let d = f.homogeneous_degree()?;
    if d < 3 {
        return Err(Error::Degenerate("ternary forms need degree at least 3".into()));
    }
    let prec = opts.prec.unwrap_or(if d <= 3 { DEFAULT_PREC } else { HIGH_PREC });
    let h = hessian(f)?;
    let rs = curve_intersection(
        f,
        &h,
        &IntersectOptions {
            prec,
            seed: opts.seed,
            ..Default::default()
        },
    )?;
    let cluster = rs.to_cluster()?;
    let r = reduce_core(&cluster, prec, opts, false)?;
    let g = f.substitute(r.u.rows())?;
    Ok(ReductionReport {
        kind: ReductionKind::TernaryForm,
        input_forms: vec![f.clone()],
        pencil_transform: None,
        intermediate_forms: vec![],
        cluster,
        covariant: r.cov.gram.clone(),
        transform: r.u.clone(),
        reduced_covariant: r.reduced.clone(),
        reduced_forms: vec![g.clone()],
        reduced_cluster: r.moved.clone(),
        diagnostics: diagnostics(&r, prec, Some(rs.summary()), Some(f.height()), Some(g.height())),
    })
}
