//! The Hermitian covariant of a stable point cluster.
//!
//! For a cluster with chosen representatives `P_j` and a positive definite
//! Hermitian `Q`, the distance function is
//!
//! ```text
//! D(Z, Q) = sum_j log(conj(P_j) Q P_j^T) - m/(n+1) log det Q
//! ```
//!
//! It is geodesically convex on determinant-one forms. For stable clusters
//! it has a unique minimiser `z(Z)`; `theta` is `exp` of its infimum.
//!
//! Derivatives are taken along curves `Q(t) = S^H exp(tB) S` where
//! `Q = S^H S` and `B` is Hermitian with trace zero. In that frame, with
//! `w_j = S P_j^T`, the gradient is
//! `G = sum_j w_j w_j^H / |w_j|^2 - m/(n+1) I`.

use rug::{Complex, Float};
use serde::Serialize;

use crate::cluster::{
    classify, combinations, normalize_cluster, PointCluster, ScaledCluster, StabilityClass,
    SubspaceWitness, Tolerances,
};
use crate::error::{Error, Result};
use crate::linalg::{from_eigen, norm2, orthonormal_span, CMatrix};
use crate::mp::{cabs, czero, DEFAULT_PREC};

/// Positive definite Hermitian matrix, taken modulo positive scaling.
#[derive(Clone, Debug)]
pub struct HermitianForm {
    matrix: CMatrix,
}

impl HermitianForm {
    /// Validate Hermitian symmetry and positive definiteness.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::SingularMatrix("not square".into()));
        }
        let scale = matrix.max_abs();
        let slack = Float::with_val(matrix.prec(), &scale * crate::mp::half_precision_tol(matrix.prec()));
        if matrix.hermitian_defect() > slack {
            return Err(Error::NotPositiveDefinite);
        }
        let m = matrix.symmetrize_hermitian();
        m.cholesky()?;
        Ok(HermitianForm { matrix: m })
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        HermitianForm {
            matrix: CMatrix::identity(n + 1, prec),
        }
    }

    /// Real symmetric matrix given by rows.
    pub fn from_real_rows(rows: &[Vec<Float>]) -> Result<Self> {
        let prec = rows.first().and_then(|r| r.first()).map_or(DEFAULT_PREC, Float::prec);
        Self::new(CMatrix::from_real_rows(rows, prec)?)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Projective dimension `n` (the matrix is `(n+1) x (n+1)`).
    pub fn dim(&self) -> usize {
        self.matrix.rows() - 1
    }

    pub fn prec(&self) -> u32 {
        self.matrix.prec()
    }

    pub fn det(&self) -> Float {
        let l = self.matrix.cholesky().expect("positive definite");
        let mut d = Float::with_val(self.prec(), 1);
        for i in 0..l.rows() {
            d *= Float::with_val(self.prec(), l[(i, i)].real().square_ref());
        }
        d
    }

    /// Representative of determinant one.
    pub fn normalized(&self) -> HermitianForm {
        let d = self.det();
        let k = (self.matrix.rows()) as u32;
        let s = d.pow_ref_root(k);
        HermitianForm {
            matrix: self.matrix.scale_real(&s.recip()),
        }
    }

    /// The right action `A . gamma = conj(gamma)^T A gamma`.
    pub fn act(&self, gamma: &CMatrix) -> Result<HermitianForm> {
        let g_adj = gamma.adjoint();
        let m = g_adj.mul(&self.matrix)?.mul(gamma)?;
        HermitianForm::new(m)
    }

    pub fn conj(&self) -> HermitianForm {
        HermitianForm {
            matrix: self.matrix.conj(),
        }
    }

    /// `conj(p) A p^T` for a row vector `p`.
    pub fn eval(&self, p: &[Complex]) -> Float {
        let ap = self.matrix.mul_vec(p);
        let mut acc = czero(self.prec());
        for (a, b) in p.iter().zip(&ap) {
            acc += Complex::with_val(self.prec(), a.conj_ref()) * b;
        }
        Float::with_val(self.prec(), acc.real())
    }

    /// Real parts of the entries.
    pub fn real_rows(&self) -> Vec<Vec<Float>> {
        (0..self.matrix.rows())
            .map(|i| {
                (0..self.matrix.cols())
                    .map(|j| Float::with_val(self.prec(), self.matrix[(i, j)].real()))
                    .collect()
            })
            .collect()
    }

    /// Relative Frobenius distance to `other` after the best positive
    /// rescaling of `self`.
    pub fn scaled_distance(&self, other: &HermitianForm) -> Float {
        scale_matched_distance(&self.matrix, &other.matrix)
    }
}

/// `min_c |c a - b| / |b|` over real `c`.
pub fn scale_matched_distance(a: &CMatrix, b: &CMatrix) -> Float {
    let prec = a.prec().max(b.prec());
    let ab = a.frobenius_inner(b);
    let aa = Float::with_val(prec, a.frobenius_norm().square_ref());
    let c = ab / aa;
    let diff = a.scale_real(&c).sub(b);
    diff.frobenius_norm() / b.frobenius_norm()
}

trait RootExt {
    fn pow_ref_root(&self, k: u32) -> Float;
}

impl RootExt for Float {
    fn pow_ref_root(&self, k: u32) -> Float {
        let l = Float::with_val(self.prec(), self.ln_ref()) / k;
        l.exp()
    }
}

/// Hermitian trace-zero matrix: a tangent vector at the identity.
#[derive(Clone, Debug)]
pub struct TangentDirection {
    matrix: CMatrix,
}

impl TangentDirection {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::SingularMatrix("not square".into()));
        }
        let prec = matrix.prec();
        let tol = Float::with_val(prec, (matrix.max_abs() + 1u32) * crate::mp::half_precision_tol(prec));
        if matrix.hermitian_defect() > tol || cabs(&matrix.trace()) > tol {
            return Err(Error::Degenerate("tangent direction must be Hermitian with trace zero".into()));
        }
        Ok(TangentDirection { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn norm(&self) -> Float {
        self.matrix.frobenius_norm()
    }

    pub fn inner(&self, other: &TangentDirection) -> Float {
        self.matrix.frobenius_inner(&other.matrix)
    }
}

fn check_dims(zc: &ScaledCluster, q: &HermitianForm) -> Result<()> {
    if zc.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim() + 1,
            found: zc.dim() + 1,
        });
    }
    Ok(())
}

/// Transport frame `S = L^H` for `Q = L L^H`, so that `Q = S^H S`.
pub fn frame(q: &HermitianForm) -> Result<CMatrix> {
    Ok(q.matrix.cholesky()?.adjoint())
}

fn log_abs_det(s: &CMatrix) -> Float {
    let d = s.det();
    let a = cabs(&d);
    a.ln()
}

/// `D` evaluated through a frame `S` (`Q = S^H S`).
fn d_in_frame(reps: &[Vec<Complex>], s: &CMatrix) -> Float {
    let prec = s.prec();
    let n1 = s.rows();
    let m = reps.len();
    let mut acc = Float::new(prec);
    for p in reps {
        let w = s.mul_vec(p);
        acc += norm2(&w).ln();
    }
    let logdet = Float::with_val(prec, log_abs_det(s) * 2u32);
    acc - logdet * Float::with_val(prec, m) / Float::with_val(prec, n1)
}

/// Gradient in the frame `S`, together with the transported vectors.
fn grad_in_frame(reps: &[Vec<Complex>], s: &CMatrix) -> CMatrix {
    let prec = s.prec();
    let n1 = s.rows();
    let m = reps.len();
    let mut g = CMatrix::zeros(n1, n1, prec);
    for p in reps {
        let w = s.mul_vec(p);
        let nw = norm2(&w);
        for a in 0..n1 {
            for b in 0..n1 {
                let cb = Complex::with_val(prec, w[b].conj_ref());
                let t = Complex::with_val(prec, &w[a] * &cb) / &nw;
                g[(a, b)] += t;
            }
        }
    }
    let shift = Float::with_val(prec, m) / Float::with_val(prec, n1);
    for a in 0..n1 {
        g[(a, a)] -= &shift;
    }
    g
}

/// The distance function `D(zc, Q)`.
pub fn eval_d(zc: &ScaledCluster, q: &HermitianForm) -> Result<Float> {
    check_dims(zc, q)?;
    let prec = zc.prec().max(q.prec());
    let s = frame(&HermitianForm {
        matrix: q.matrix.with_prec(prec),
    })?;
    Ok(d_in_frame(&reps_at(zc, prec), &s))
}

/// Gradient of `D` at `Q`, expressed in the Cholesky transport frame.
pub fn grad_d(zc: &ScaledCluster, q: &HermitianForm) -> Result<TangentDirection> {
    check_dims(zc, q)?;
    let prec = zc.prec().max(q.prec());
    let s = frame(&HermitianForm {
        matrix: q.matrix.with_prec(prec),
    })?;
    Ok(TangentDirection {
        matrix: grad_in_frame(&reps_at(zc, prec), &s),
    })
}

/// `S^H exp(t B) S` for the Cholesky frame `S` of `Q`: the geodesic through
/// `Q` with direction `B`.
pub fn geodesic(q: &HermitianForm, b: &TangentDirection, t: &Float) -> Result<HermitianForm> {
    let s = frame(q)?;
    let e = b.matrix.scale_real(t).hermitian_exp();
    let m = s.adjoint().mul(&e)?.mul(&s)?;
    HermitianForm::new(m)
}

fn reps_at(zc: &ScaledCluster, prec: u32) -> Vec<Vec<Complex>> {
    zc.reps()
        .iter()
        .map(|r| r.iter().map(|z| Complex::with_val(prec, z)).collect())
        .collect()
}

/// Starting point of the descent.
#[derive(Clone, Debug, Default)]
pub enum Init {
    #[default]
    Identity,
    /// Closed-form covariant of a general-position subset of `n+2` points;
    /// falls back to the identity when there is none.
    Simplex,
    Form(HermitianForm),
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    /// Stop once the Frobenius norm of the gradient is at most this.
    pub tol: f64,
    pub max_iter: usize,
    pub prec: u32,
    pub init: Init,
    /// Refuse clusters that are not stable.
    pub check_stability: bool,
    pub record_transcript: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            tol: 1e-12,
            max_iter: 5000,
            prec: DEFAULT_PREC,
            init: Init::Simplex,
            check_stability: true,
            record_transcript: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CovariantResult {
    /// Determinant-one minimiser.
    pub z: HermitianForm,
    /// `exp` of the minimum of `D` for unit-norm representatives.
    pub theta: Float,
    pub log_theta: Float,
    pub iterations: usize,
    pub final_gradient_norm: Float,
    pub transcript: Option<Vec<(usize, f64)>>,
}

struct Descent {
    s: CMatrix,
    d: Float,
    grad_norm: Float,
    iterations: usize,
    converged: bool,
    transcript: Option<Vec<(usize, f64)>>,
}

const ARMIJO_C: f64 = 0.25;

/// Geodesic steepest descent with Armijo backtracking, starting at frame `s`.
fn descend(reps: &[Vec<Complex>], mut s: CMatrix, opts: &MinimizeOptions) -> Descent {
    let prec = s.prec();
    let tol = Float::with_val(prec, opts.tol);
    let min_step = crate::mp::pow2(prec, -(prec as i32) / 2);
    let mut transcript = opts.record_transcript.then(Vec::new);
    renormalize_frame(&mut s);
    let mut d = d_in_frame(reps, &s);
    let mut iterations = 0;
    loop {
        let g = grad_in_frame(reps, &s);
        let gn = g.frobenius_norm();
        if let Some(t) = transcript.as_mut() {
            t.push((iterations, d.to_f64()));
        }
        if gn <= tol {
            return Descent {
                s,
                d,
                grad_norm: gn,
                iterations,
                converged: true,
                transcript,
            };
        }
        if iterations >= opts.max_iter {
            return Descent {
                s,
                d,
                grad_norm: gn,
                iterations,
                converged: false,
                transcript,
            };
        }
        let (vals, v) = g.hermitian_eigen();
        let gn2 = Float::with_val(prec, gn.square_ref());
        let mut step = Float::with_val(prec, 1);
        let accepted = loop {
            let half = Float::with_val(prec, &step / 2u32);
            let ev: Vec<Float> = vals
                .iter()
                .map(|l| {
                    let x = Float::with_val(prec, l * &half);
                    (-x).exp()
                })
                .collect();
            let e = from_eigen(&ev, &v);
            let mut s_new = e.mul(&s).expect("square");
            renormalize_frame(&mut s_new);
            let d_new = d_in_frame(reps, &s_new);
            let bound = Float::with_val(prec, &d - Float::with_val(prec, &step * &gn2) * ARMIJO_C);
            if d_new <= bound {
                break Some((s_new, d_new));
            }
            step /= 2u32;
            if step < min_step {
                break None;
            }
        };
        iterations += 1;
        match accepted {
            Some((s_new, d_new)) => {
                s = s_new;
                d = d_new;
            }
            None => {
                // no further decrease is representable at this precision
                return Descent {
                    s,
                    d,
                    grad_norm: gn,
                    iterations,
                    converged: false,
                    transcript,
                };
            }
        }
    }
}

fn renormalize_frame(s: &mut CMatrix) {
    let prec = s.prec();
    let k = s.rows() as u32;
    let a = cabs(&s.det());
    let f = Float::with_val(prec, a.ln_ref()) / k;
    let f = (-f).exp();
    *s = s.scale_real(&f);
}

fn initial_frame(cluster: &PointCluster, prec: u32, init: &Init) -> Result<CMatrix> {
    let n1 = cluster.dim() + 1;
    match init {
        Init::Identity => Ok(CMatrix::identity(n1, prec)),
        Init::Form(q) => frame(&HermitianForm {
            matrix: q.matrix.with_prec(prec),
        }),
        Init::Simplex => match general_position_subset(cluster) {
            Some(idx) => {
                let sub = PointCluster::new(idx.iter().map(|&i| cluster.points()[i].clone()).collect())?;
                match simplex_covariant(&sub) {
                    Ok(q) => frame(&HermitianForm {
                        matrix: q.matrix.with_prec(prec),
                    }),
                    Err(_) => Ok(CMatrix::identity(n1, prec)),
                }
            }
            None => Ok(CMatrix::identity(n1, prec)),
        },
    }
}

fn unit_reps_at(cluster: &PointCluster, prec: u32) -> Vec<Vec<Complex>> {
    reps_at(&normalize_cluster(cluster), prec)
        .into_iter()
        .map(|r| {
            let n = norm2(&r).sqrt();
            r.into_iter().map(|z| z / &n).collect()
        })
        .collect()
}

/// Compute the covariant `z(Z)` by minimising `D`.
pub fn minimize(cluster: &PointCluster, opts: &MinimizeOptions) -> Result<CovariantResult> {
    if opts.check_stability {
        let class = classify(cluster);
        if !class.is_stable {
            return Err(Error::NotStable(Box::new(class)));
        }
    }
    let prec = opts.prec;
    let reps = unit_reps_at(cluster, prec);
    let s0 = initial_frame(cluster, prec, &opts.init)?;
    let out = descend(&reps, s0, opts);
    let z = HermitianForm::new(out.s.adjoint().mul(&out.s)?)?.normalized();
    if !out.converged {
        return Err(Error::Convergence {
            iterations: out.iterations,
            gradient_norm: out.grad_norm.to_f64(),
            best: Some(Box::new(z)),
        });
    }
    Ok(CovariantResult {
        theta: Float::with_val(prec, out.d.exp_ref()),
        log_theta: out.d,
        z,
        iterations: out.iterations,
        final_gradient_norm: out.grad_norm,
        transcript: out.transcript,
    })
}

/// First subset of `n+2` points (indices) with every `n+1` of them
/// linearly independent.
pub fn general_position_subset(cluster: &PointCluster) -> Option<Vec<usize>> {
    let n = cluster.dim();
    let tol = Tolerances::for_prec(cluster.prec());
    let groups = cluster.distinct_groups(&tol.point_tol);
    if groups.len() < n + 2 {
        return None;
    }
    let units: Vec<Vec<Complex>> = groups.iter().map(|g| cluster.points()[g[0]].unit()).collect();
    // cap the search; clusters in practice succeed on the first few tries
    for subset in combinations(groups.len(), n + 2).into_iter().take(20_000) {
        let ok = (0..n + 2).all(|skip| {
            let vecs: Vec<Vec<Complex>> = subset
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &g)| units[g].clone())
                .collect();
            orthonormal_span(&vecs, &tol.rank_tol).len() == n + 1
        });
        if ok {
            return Some(subset.iter().map(|&g| groups[g][0]).collect());
        }
    }
    None
}

/// Closed form of `z(Z)` for `n+2` points in general position: with the
/// rows of `gamma` the first `n+1` points scaled to sum to the last one,
/// `z = conj(gamma^-1) Q0 gamma^-T` where `Q0 = (n+2) I - J`.
pub fn simplex_covariant(cluster: &PointCluster) -> Result<HermitianForm> {
    let n = cluster.dim();
    let prec = cluster.prec();
    if cluster.degree() != n + 2 {
        return Err(Error::DegeneratePosition(format!(
            "expected {} points, found {}",
            n + 2,
            cluster.degree()
        )));
    }
    let tol = Tolerances::for_prec(prec);
    let units: Vec<Vec<Complex>> = cluster.points().iter().map(|p| p.unit()).collect();
    for skip in 0..n + 2 {
        let vecs: Vec<Vec<Complex>> = units
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, v)| v.clone())
            .collect();
        if orthonormal_span(&vecs, &tol.rank_tol).len() != n + 1 {
            return Err(Error::DegeneratePosition(format!(
                "the points other than #{skip} are linearly dependent"
            )));
        }
    }
    let r = CMatrix::from_rows(units[..=n].to_vec(), prec)?;
    let c = r.transpose().solve(&units[n + 1])?;
    let mut gamma = r.clone();
    for (i, ci) in c.iter().enumerate() {
        for j in 0..=n {
            gamma[(i, j)] *= ci;
        }
    }
    let ginv = gamma.inverse()?;
    let mut q0 = CMatrix::zeros(n + 1, n + 1, prec);
    for i in 0..=n {
        for j in 0..=n {
            q0[(i, j)] = Complex::with_val(prec, if i == j { n as i64 + 1 } else { -1 });
        }
    }
    let z = ginv.conj().mul(&q0)?.mul(&ginv.transpose())?;
    Ok(HermitianForm::new(z)?.normalized())
}

/// Witness that `D` is unbounded below (or not proper) along the family
/// `Q_t` with eigenvalue `exp(-(n-k) t)` on a subspace `L0` holding many
/// points and `exp((k+1) t)` on its orthogonal complement.
#[derive(Clone, Debug, Serialize)]
pub struct DivergenceWitness {
    pub subspace: SubspaceWitness,
    /// `(n+1) deg Z|_L0 - (k+1) m`; positive for non-semi-stable clusters.
    pub slope: i64,
    /// Parameter `t = log(lambda)` where the reported value was reached.
    pub log_lambda: f64,
    /// `D(Q_t)` at that parameter.
    pub d_value: f64,
    #[serde(skip)]
    basis: Vec<Vec<Complex>>,
    #[serde(skip)]
    n: usize,
}

impl DivergenceWitness {
    fn build(cluster: &PointCluster, sub: &SubspaceWitness) -> Self {
        let tol = Tolerances::for_prec(cluster.prec());
        let vecs: Vec<Vec<Complex>> = sub.spanning.iter().map(|&i| cluster.points()[i].unit()).collect();
        let basis = orthonormal_span(&vecs, &tol.rank_tol);
        let n = cluster.dim();
        let k = basis.len() - 1;
        let m = cluster.degree() as i64;
        let slope = (n as i64 + 1) * sub.count() as i64 - (k as i64 + 1) * m;
        DivergenceWitness {
            subspace: SubspaceWitness {
                k,
                spanning: sub.spanning.clone(),
                contained: sub.contained.clone(),
            },
            slope,
            log_lambda: 0.0,
            d_value: 0.0,
            basis,
            n,
        }
    }

    /// Orthonormal basis (rows) of `L0`.
    pub fn basis(&self) -> &[Vec<Complex>] {
        &self.basis
    }

    /// Squared norms of the components of `p` in `L0` and its complement.
    fn split(&self, p: &[Complex]) -> (Float, Float) {
        let prec = p[0].prec().0;
        let mut inside = Float::new(prec);
        for q in &self.basis {
            let c = crate::linalg::inner(q, p);
            inside += Float::with_val(prec, c.norm_ref());
        }
        let total = norm2(p);
        let outside = Float::with_val(prec, &total - &inside);
        let outside = if outside < 0 { Float::new(prec) } else { outside };
        (inside, outside)
    }

    /// `D(zc, Q_t)` with the points of `L0` placed exactly on it.
    pub fn eval(&self, zc: &ScaledCluster, t: &Float) -> Float {
        let prec = zc.prec().max(t.prec());
        let k = self.subspace.k as i64;
        let n = self.n as i64;
        let a = Float::with_val(prec, t * -(n - k));
        let b = Float::with_val(prec, t * (k + 1));
        let mut acc = Float::new(prec);
        for (j, p) in zc.reps().iter().enumerate() {
            let (x0, x1) = self.split(p);
            let on = self.subspace.contained.contains(&j);
            let v = if on || x1.is_zero() {
                Float::with_val(prec, &a + x0.ln())
            } else if x0.is_zero() {
                Float::with_val(prec, &b + x1.ln())
            } else {
                let la = Float::with_val(prec, &a + x0.ln());
                let lb = Float::with_val(prec, &b + x1.ln());
                let (hi, lo) = if la > lb { (la, lb) } else { (lb, la) };
                let diff = Float::with_val(prec, &lo - &hi);
                hi + diff.exp().ln_1p()
            };
            acc += v;
        }
        acc
    }

    /// Limit of `D(Q_t)` as `t -> infinity` when the slope is zero.
    pub fn limit(&self, zc: &ScaledCluster) -> Option<Float> {
        if self.slope != 0 {
            return None;
        }
        let prec = zc.prec();
        let mut acc = Float::new(prec);
        for (j, p) in zc.reps().iter().enumerate() {
            let (x0, x1) = self.split(p);
            if self.subspace.contained.contains(&j) || x1.is_zero() {
                acc += x0.ln();
            } else {
                acc += x1.ln();
            }
        }
        Some(acc)
    }

    /// Explicit matrix of `Q_t`.
    pub fn form_at(&self, t: &Float) -> HermitianForm {
        let prec = t.prec();
        let n1 = self.n + 1;
        let k = self.subspace.k as i64;
        let n = self.n as i64;
        let lo = Float::with_val(prec, t * -(n - k)).exp();
        let hi = Float::with_val(prec, t * (k + 1)).exp();
        let mut proj = CMatrix::zeros(n1, n1, prec);
        for q in &self.basis {
            for a in 0..n1 {
                for b in 0..n1 {
                    let qa = Complex::with_val(prec, &q[a]);
                    let qb = Complex::with_val(prec, q[b].conj_ref());
                    proj[(a, b)] += qa * qb;
                }
            }
        }
        let rest = CMatrix::identity(n1, prec).sub(&proj);
        let m = proj.scale_real(&lo).add(&rest.scale_real(&hi));
        HermitianForm {
            matrix: m.symmetrize_hermitian(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThetaResult {
    /// `theta` for the given representatives (zero when not semi-stable).
    pub theta: Float,
    /// `log theta`, absent when `theta = 0`.
    pub log_theta: Option<Float>,
    /// Whether the infimum is attained (stable clusters).
    pub attained: bool,
    pub class: StabilityClass,
    pub witness: Option<DivergenceWitness>,
    pub covariant: Option<CovariantResult>,
}

/// Target value reached by divergence witnesses.
pub const DIVERGENCE_TARGET: f64 = -1e4;

/// `theta(zc) = inf_Q exp(D(zc, Q))`.
///
/// Stable clusters: `exp` of the minimum. Semi-stable but not stable: an
/// upper estimate of the infimum from descent and from the degeneration
/// along the witness family, flagged as not attained. Not semi-stable: zero,
/// with a witness along which `D` drops below [`DIVERGENCE_TARGET`].
pub fn theta(zc: &ScaledCluster, opts: &MinimizeOptions) -> Result<ThetaResult> {
    let prec = opts.prec.max(zc.prec());
    let zc_p = ScaledCluster::new(reps_at(zc, prec))?;
    let cluster = zc_p.cluster();
    let class = classify(&cluster);
    let log_scale: Float = zc_p
        .reps()
        .iter()
        .map(|r| norm2(r).ln())
        .fold(Float::new(prec), |a, b| a + b);

    if class.is_stable {
        let mut o = opts.clone();
        o.check_stability = false;
        o.prec = prec;
        let cov = minimize(&cluster, &o)?;
        let log_theta = Float::with_val(prec, &cov.log_theta + &log_scale);
        return Ok(ThetaResult {
            theta: Float::with_val(prec, log_theta.exp_ref()),
            log_theta: Some(log_theta),
            attained: true,
            class,
            witness: None,
            covariant: Some(cov),
        });
    }

    let sub = class.witness.clone().expect("unstable clusters carry a witness");
    let mut witness = DivergenceWitness::build(&cluster, &sub);

    if !class.is_semi_stable {
        let mut t = Float::with_val(prec, 1);
        let mut d = witness.eval(&zc_p, &t);
        for _ in 0..200 {
            if d < DIVERGENCE_TARGET {
                break;
            }
            t *= 2u32;
            d = witness.eval(&zc_p, &t);
        }
        if d < DIVERGENCE_TARGET {
            let mut lo = Float::with_val(prec, &t / 2u32);
            for _ in 0..16 {
                let mid = Float::with_val(prec, &lo + &t) / 2u32;
                let dm = witness.eval(&zc_p, &mid);
                if dm < DIVERGENCE_TARGET {
                    t = mid;
                    d = dm;
                } else {
                    lo = mid;
                }
            }
        }
        witness.log_lambda = t.to_f64();
        witness.d_value = d.to_f64();
        return Ok(ThetaResult {
            theta: Float::new(prec),
            log_theta: None,
            attained: false,
            class,
            witness: Some(witness),
            covariant: None,
        });
    }

    // semi-stable, not stable: the infimum need not be attained
    let reps = reps_at(&zc_p, prec);
    let mut o = opts.clone();
    o.prec = prec;
    let s0 = initial_frame(&cluster, prec, &Init::Identity)?;
    let out = descend(&reps, s0, &o);
    let mut best = out.d;
    if let Some(lim) = witness.limit(&zc_p) {
        if lim < best {
            best = lim;
        }
    }
    let t = Float::with_val(prec, 64);
    witness.log_lambda = 64.0;
    witness.d_value = witness.eval(&zc_p, &t).to_f64();
    Ok(ThetaResult {
        theta: Float::with_val(prec, best.exp_ref()),
        log_theta: Some(best),
        attained: false,
        class,
        witness: Some(witness),
        covariant: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::PointCluster;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 212;

    fn standard(n: usize) -> PointCluster {
        let mut rows = Vec::new();
        for i in 0..=n {
            let mut r = vec![0i64; n + 1];
            r[i] = 1;
            rows.push(r);
        }
        rows.push(vec![1; n + 1]);
        PointCluster::from_int_rows(&rows, P).unwrap()
    }

    fn q0(n: usize) -> HermitianForm {
        let mut m = CMatrix::zeros(n + 1, n + 1, P);
        for i in 0..=n {
            for j in 0..=n {
                m[(i, j)] = Complex::with_val(P, if i == j { n as i64 + 1 } else { -1 });
            }
        }
        HermitianForm::new(m).unwrap()
    }

    fn random_cluster(n: usize, m: usize, rng: &mut ChaCha8Rng) -> PointCluster {
        let pts = (0..m)
            .map(|_| {
                crate::cluster::ProjectivePoint::from_f64(
                    &(0..=n)
                        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect::<Vec<_>>(),
                    P,
                )
                .unwrap()
            })
            .collect();
        PointCluster::new(pts).unwrap()
    }

    #[test]
    fn d_single_point_identity_is_zero() {
        let z = normalize_cluster(&PointCluster::from_int_rows(&[vec![1, 0, 0]], P).unwrap());
        let d = eval_d(&z, &HermitianForm::identity(2, P)).unwrap();
        assert!(d.abs() < 1e-60);
    }

    #[test]
    fn d_standard_four_points_closed_form() {
        let z = normalize_cluster(&standard(2));
        let d = eval_d(&z, &q0(2)).unwrap();
        // log 27 - (4/3) log 16
        let expect = Float::with_val(P, 27).ln() - Float::with_val(P, 16).ln() * Float::with_val(P, 4) / 3u32;
        assert!(Float::with_val(P, &d - &expect).abs() < 1e-55);
    }

    #[test]
    fn d_scaling_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let z = ScaledCluster::from_cluster(&random_cluster(2, 5, &mut rng));
        let q = HermitianForm::identity(2, P);
        let two = Complex::with_val(P, 2);
        let d1 = eval_d(&z, &q).unwrap();
        let d2 = eval_d(&z.scale_point(3, &two), &q).unwrap();
        let diff = d2 - d1 - Float::with_val(P, 4).ln();
        assert!(diff.abs() < 1e-55);
    }

    #[test]
    fn gradient_examples() {
        let z = normalize_cluster(&standard(2));
        let g = grad_d(&z, &q0(2).normalized()).unwrap();
        assert!(g.norm() < 1e-55);

        let single = normalize_cluster(&PointCluster::from_int_rows(&[vec![1, 0, 0, 0]], P).unwrap());
        let g = grad_d(&single, &HermitianForm::identity(3, P)).unwrap();
        let mut expect = CMatrix::zeros(4, 4, P);
        for i in 0..4 {
            expect[(i, i)] = Complex::with_val(P, if i == 0 { 0.75 } else { -0.25 });
        }
        assert!(g.matrix().sub(&expect).frobenius_norm() < 1e-60);
    }

    #[test]
    fn not_positive_definite_is_a_domain_error() {
        let mut m = CMatrix::identity(3, P);
        m[(2, 2)] = Complex::with_val(P, -1);
        assert!(HermitianForm::new(m).is_err());
    }

    #[test]
    fn minimize_standard_points_gives_q0() {
        for n in 1..=3 {
            let opts = MinimizeOptions {
                init: Init::Identity,
                ..Default::default()
            };
            let r = minimize(&standard(n), &opts).unwrap();
            assert!(r.z.scaled_distance(&q0(n)) < 1e-10, "n = {n}");
            assert!(r.final_gradient_norm <= 1e-12);
        }
    }

    #[test]
    fn theta_of_standard_four_points() {
        let z = normalize_cluster(&standard(2));
        let r = theta(&z, &MinimizeOptions::default()).unwrap();
        // 27 / 2^(16/3)
        let log_expect = Float::with_val(P, 27).ln() - Float::with_val(P, 2).ln() * Float::with_val(P, 16) / 3u32;
        let expect = log_expect.exp();
        let ratio = Float::with_val(P, &r.theta / &expect);
        assert!((ratio - 1u32).abs() < 1e-20);
        assert!(r.attained);
    }

    #[test]
    fn theta_unstable_is_zero_with_witness() {
        // 5 of 6 points on the line z = 0
        let z = PointCluster::from_int_rows(
            &[
                vec![1, 0, 0],
                vec![0, 1, 0],
                vec![1, 1, 0],
                vec![1, -1, 0],
                vec![2, 1, 0],
                vec![0, 0, 1],
            ],
            P,
        )
        .unwrap();
        let r = theta(&normalize_cluster(&z), &MinimizeOptions::default()).unwrap();
        assert!(r.theta.is_zero());
        let w = r.witness.unwrap();
        assert!(w.d_value < DIVERGENCE_TARGET);
        assert_eq!(w.slope, 3);
    }

    #[test]
    fn simplex_matches_q0_and_rejects_degenerate() {
        for n in 1..=3 {
            let z = simplex_covariant(&standard(n)).unwrap();
            assert!(z.scaled_distance(&q0(n)) < 1e-50);
        }
        let bad = PointCluster::from_int_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 1]], P)
            .unwrap();
        assert!(matches!(simplex_covariant(&bad), Err(Error::DegeneratePosition(_))));
    }

    #[test]
    fn geodesic_derivative_matches_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = ScaledCluster::from_cluster(&random_cluster(2, 5, &mut rng));
        let q = HermitianForm::new(
            CMatrix::from_rows(
                vec![
                    vec![Complex::with_val(P, 2), Complex::with_val(P, (0.3, 0.1)), Complex::with_val(P, 0)],
                    vec![Complex::with_val(P, (0.3, -0.1)), Complex::with_val(P, 1), Complex::with_val(P, 0.2)],
                    vec![Complex::with_val(P, 0), Complex::with_val(P, 0.2), Complex::with_val(P, 3)],
                ],
                P,
            )
            .unwrap(),
        )
        .unwrap();
        let g = grad_d(&z, &q).unwrap();
        let mut b = CMatrix::zeros(3, 3, P);
        b[(0, 1)] = Complex::with_val(P, (0.5, 0.25));
        b[(1, 0)] = Complex::with_val(P, (0.5, -0.25));
        b[(0, 0)] = Complex::with_val(P, 1);
        b[(2, 2)] = Complex::with_val(P, -1);
        let b = TangentDirection::new(b).unwrap();
        let h = Float::with_val(P, 1e-20);
        let dp = eval_d(&z, &geodesic(&q, &b, &h).unwrap()).unwrap();
        let dm = eval_d(&z, &geodesic(&q, &b, &Float::with_val(P, -&h)).unwrap()).unwrap();
        let fd = (dp - dm) / (h * 2u32);
        let an = g.inner(&b);
        assert!(Float::with_val(P, &fd - &an).abs() < 1e-30);
    }
}
