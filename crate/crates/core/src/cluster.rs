//! Point clusters in complex projective space and their stability.
//!
//! A cluster is a multiset of points of `P^n(C)`; repeated points are
//! stored as repeated entries. Stability is decided through
//! `phi(k)`, the largest number of cluster points on a `k`-dimensional
//! linear subspace, evaluated with a numerical rank threshold.

use rug::{Complex, Float};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{inner, norm2, orthonormal_span, residual_norm, CMatrix};
use crate::mp::{half_precision_tol, DEFAULT_PREC};

/// Thresholds used when comparing inexact points.
#[derive(Clone, Debug)]
pub struct Tolerances {
    /// Relative threshold below which a singular value / residual counts as zero.
    pub rank_tol: Float,
    /// Maximal sine of the angle between coordinate vectors of equal points.
    pub point_tol: Float,
}

impl Tolerances {
    pub fn for_prec(prec: u32) -> Self {
        let t = half_precision_tol(prec);
        Tolerances {
            rank_tol: t.clone(),
            point_tol: t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProjectivePoint {
    coords: Vec<Complex>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Complex>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidPoint("no coordinates".into()));
        }
        if coords.iter().all(Complex::is_zero) {
            return Err(Error::InvalidPoint("zero coordinate vector".into()));
        }
        if coords.iter().any(|z| !z.real().is_finite() || !z.imag().is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        Ok(ProjectivePoint { coords })
    }

    pub fn from_ints(coords: &[i64], prec: u32) -> Result<Self> {
        Self::new(coords.iter().map(|&c| Complex::with_val(prec, c)).collect())
    }

    /// Build from `(re, im)` pairs of doubles.
    pub fn from_f64(coords: &[(f64, f64)], prec: u32) -> Result<Self> {
        Self::new(coords.iter().map(|&c| Complex::with_val(prec, c)).collect())
    }

    /// Projective dimension `n` of the ambient space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[Complex] {
        &self.coords
    }

    pub fn prec(&self) -> u32 {
        self.coords[0].prec().0
    }

    /// Coordinate vector scaled to Hermitian norm 1.
    pub fn unit(&self) -> Vec<Complex> {
        let n = norm2(&self.coords).sqrt();
        self.coords.iter().map(|z| Complex::with_val(self.prec(), z / &n)).collect()
    }

    pub fn conj(&self) -> Self {
        ProjectivePoint {
            coords: self.coords.iter().map(|z| Complex::with_val(z.prec(), z.conj_ref())).collect(),
        }
    }

    /// Sine of the angle between the two coordinate lines.
    pub fn sin_angle(&self, other: &ProjectivePoint) -> Float {
        let prec = self.prec();
        let ip = inner(&self.coords, &other.coords);
        let num = Float::with_val(prec, ip.norm_ref());
        let den = norm2(&self.coords) * norm2(&other.coords);
        let c2 = num / den;
        let s2 = Float::with_val(prec, 1) - c2;
        if s2 <= 0 {
            Float::new(prec)
        } else {
            s2.sqrt()
        }
    }

    pub fn approx_eq(&self, other: &ProjectivePoint, tol: &Float) -> bool {
        self.coords.len() == other.coords.len() && self.sin_angle(other) < *tol
    }
}

#[derive(Clone, Debug)]
pub struct PointCluster {
    n: usize,
    points: Vec<ProjectivePoint>,
}

impl PointCluster {
    pub fn new(points: Vec<ProjectivePoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidPoint("empty cluster".into()))?;
        let n = first.dim();
        for p in &points {
            if p.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    found: p.dim() + 1,
                });
            }
        }
        Ok(PointCluster { n, points })
    }

    /// Convenience constructor from integer coordinate rows.
    pub fn from_int_rows(rows: &[Vec<i64>], prec: u32) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| ProjectivePoint::from_ints(r, prec))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn prec(&self) -> u32 {
        self.points[0].prec()
    }

    /// Multiset equality up to `tol` (order of points is irrelevant).
    pub fn approx_eq(&self, other: &PointCluster, tol: &Float) -> bool {
        if self.n != other.n || self.degree() != other.degree() {
            return false;
        }
        let mut used = vec![false; other.degree()];
        'outer: for p in &self.points {
            for (j, q) in other.points.iter().enumerate() {
                if !used[j] && p.approx_eq(q, tol) {
                    used[j] = true;
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    pub fn is_conjugation_fixed(&self, tol: &Float) -> bool {
        self.approx_eq(&conjugate(self), tol)
    }

    /// Group equal points: each entry is the list of indices of one point.
    pub fn distinct_groups(&self, tol: &Float) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, p) in self.points.iter().enumerate() {
            match groups
                .iter_mut()
                .find(|g| self.points[g[0]].approx_eq(p, tol))
            {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        groups
    }
}

/// A cluster together with explicit coordinate rows for its points.
#[derive(Clone, Debug)]
pub struct ScaledCluster {
    n: usize,
    reps: Vec<Vec<Complex>>,
}

impl ScaledCluster {
    pub fn new(reps: Vec<Vec<Complex>>) -> Result<Self> {
        let cluster = PointCluster::new(
            reps.iter()
                .map(|r| ProjectivePoint::new(r.clone()))
                .collect::<Result<_>>()?,
        )?;
        Ok(ScaledCluster {
            n: cluster.dim(),
            reps,
        })
    }

    /// Use the stored coordinates of each point as its representative.
    pub fn from_cluster(cluster: &PointCluster) -> Self {
        ScaledCluster {
            n: cluster.dim(),
            reps: cluster.points.iter().map(|p| p.coords.clone()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[Vec<Complex>] {
        &self.reps
    }

    pub fn prec(&self) -> u32 {
        self.reps[0][0].prec().0
    }

    /// Forget the scalings.
    pub fn cluster(&self) -> PointCluster {
        PointCluster {
            n: self.n,
            points: self
                .reps
                .iter()
                .map(|r| ProjectivePoint { coords: r.clone() })
                .collect(),
        }
    }

    /// Scale the representative of point `j` by `lambda`.
    pub fn scale_point(&self, j: usize, lambda: &Complex) -> ScaledCluster {
        let mut out = self.clone();
        for z in &mut out.reps[j] {
            *z *= lambda;
        }
        out
    }

    /// Equality modulo rescalings of the reps by factors with product 1.
    pub fn approx_eq(&self, other: &ScaledCluster, tol: &Float) -> bool {
        if self.n != other.n || self.degree() != other.degree() {
            return false;
        }
        let prec = self.prec();
        let mut prod = Complex::with_val(prec, 1);
        for (a, b) in self.reps.iter().zip(&other.reps) {
            let pa = ProjectivePoint { coords: a.clone() };
            let pb = ProjectivePoint { coords: b.clone() };
            if !pa.approx_eq(&pb, tol) {
                return false;
            }
            // b = c a
            let c = inner(a, b) / norm2(a);
            prod *= c;
        }
        let d = Complex::with_val(prec, &prod - 1u32);
        Float::with_val(prec, d.abs_ref()) < *tol
    }
}

/// Scale every point to a unit-norm representative.
pub fn normalize_cluster(cluster: &PointCluster) -> ScaledCluster {
    ScaledCluster {
        n: cluster.n,
        reps: cluster.points.iter().map(ProjectivePoint::unit).collect(),
    }
}

fn check_action_matrix(n: usize, g: &CMatrix) -> Result<()> {
    if !g.is_square() {
        return Err(Error::SingularMatrix(format!(
            "{}x{} matrix is not square",
            g.rows(),
            g.cols()
        )));
    }
    if g.rows() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: g.rows(),
        });
    }
    if g.det().is_zero() {
        return Err(Error::SingularMatrix("zero determinant".into()));
    }
    Ok(())
}

/// Map every coordinate row `P` to `P g`.
///
/// Since points transform contragrediently to forms, substituting `F(g x)`
/// into a form moves its zero set by `act(., g^{-T})`.
pub fn act(cluster: &PointCluster, g: &CMatrix) -> Result<PointCluster> {
    check_action_matrix(cluster.n, g)?;
    let points = cluster
        .points
        .iter()
        .map(|p| ProjectivePoint::new(g.vec_mul(&p.coords)))
        .collect::<Result<_>>()?;
    Ok(PointCluster {
        n: cluster.n,
        points,
    })
}

/// [`act`] on explicit representatives.
pub fn act_scaled(zc: &ScaledCluster, g: &CMatrix) -> Result<ScaledCluster> {
    check_action_matrix(zc.n, g)?;
    Ok(ScaledCluster {
        n: zc.n,
        reps: zc.reps.iter().map(|r| g.vec_mul(r)).collect(),
    })
}

pub fn conjugate(cluster: &PointCluster) -> PointCluster {
    PointCluster {
        n: cluster.n,
        points: cluster.points.iter().map(ProjectivePoint::conj).collect(),
    }
}

pub fn conjugate_scaled(zc: &ScaledCluster) -> ScaledCluster {
    ScaledCluster {
        n: zc.n,
        reps: zc
            .reps
            .iter()
            .map(|r| r.iter().map(|z| Complex::with_val(z.prec(), z.conj_ref())).collect())
            .collect(),
    }
}

/// A linear subspace spanned by cluster points, with the points it holds.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SubspaceWitness {
    /// Projective dimension of the subspace.
    pub k: usize,
    /// Indices of the cluster points spanning it.
    pub spanning: Vec<usize>,
    /// Indices of all cluster points lying on it.
    pub contained: Vec<usize>,
}

impl SubspaceWitness {
    pub fn count(&self) -> usize {
        self.contained.len()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityClass {
    pub is_split: bool,
    pub is_semi_stable: bool,
    pub is_stable: bool,
    /// Subspace with the smallest slack `(k+1) m - (n+1) deg Z|_L`, present
    /// when that slack is not positive.
    pub witness: Option<SubspaceWitness>,
    /// Point indices of the two parts when the cluster is split; the second
    /// part is empty when all points lie in a hyperplane.
    pub split_parts: Option<(Vec<usize>, Vec<usize>)>,
    /// `phi(k)` for `k = -1..=n`.
    pub phi: Vec<usize>,
    /// Smallest slack over `0 <= k < n`; positive iff stable.
    pub margin: i64,
}

fn unit_vectors(cluster: &PointCluster) -> Vec<Vec<Complex>> {
    cluster.points.iter().map(ProjectivePoint::unit).collect()
}

/// `phi(k)` together with a subspace achieving it.
pub fn phi_with_witness(
    cluster: &PointCluster,
    k: i64,
    tol: &Tolerances,
) -> Result<(usize, SubspaceWitness)> {
    let n = cluster.n;
    if k < -1 || k > n as i64 {
        return Err(Error::DimensionOutOfRange { k, n });
    }
    let m = cluster.degree();
    if k == -1 {
        return Ok((
            0,
            SubspaceWitness {
                k: 0,
                spanning: vec![],
                contained: vec![],
            },
        ));
    }
    let k = k as usize;
    let units = unit_vectors(cluster);
    let groups = cluster.distinct_groups(&tol.point_tol);
    let reps: Vec<Vec<Complex>> = groups.iter().map(|g| units[g[0]].clone()).collect();
    let full = orthonormal_span(&reps, &tol.rank_tol);
    if full.len() <= k + 1 {
        let spanning = pick_spanning(&reps, &groups, &tol.rank_tol);
        return Ok((
            m,
            SubspaceWitness {
                k,
                spanning,
                contained: (0..m).collect(),
            },
        ));
    }
    let mut best: Option<(usize, SubspaceWitness)> = None;
    for subset in combinations(groups.len(), k + 1) {
        let vecs: Vec<Vec<Complex>> = subset.iter().map(|&g| reps[g].clone()).collect();
        let basis = orthonormal_span(&vecs, &tol.rank_tol);
        let mut contained = Vec::new();
        for (gi, g) in groups.iter().enumerate() {
            if subset.contains(&gi) || residual_norm(&reps[gi], &basis) < tol.rank_tol {
                contained.extend(g.iter().copied());
            }
        }
        let count = contained.len();
        if best.as_ref().is_none_or(|(c, _)| count > *c) {
            contained.sort_unstable();
            best = Some((
                count,
                SubspaceWitness {
                    k,
                    spanning: subset.iter().map(|&g| groups[g][0]).collect(),
                    contained,
                },
            ));
        }
    }
    Ok(best.expect("at least one subset"))
}

fn pick_spanning(reps: &[Vec<Complex>], groups: &[Vec<usize>], tol: &Float) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut vecs: Vec<Vec<Complex>> = Vec::new();
    for (gi, r) in reps.iter().enumerate() {
        let mut trial = vecs.clone();
        trial.push(r.clone());
        if orthonormal_span(&trial, tol).len() > vecs.len() {
            vecs = trial;
            chosen.push(groups[gi][0]);
        }
    }
    chosen
}

/// `phi_Z(k)`: the maximal number of points (with multiplicity) on a
/// `k`-dimensional linear subspace.
pub fn phi(cluster: &PointCluster, k: i64) -> Result<usize> {
    phi_with(cluster, k, &Tolerances::for_prec(cluster.prec()))
}

pub fn phi_with(cluster: &PointCluster, k: i64, tol: &Tolerances) -> Result<usize> {
    phi_with_witness(cluster, k, tol).map(|(c, _)| c)
}

/// All `r`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if r > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        out.push(idx.clone());
        let mut i = r;
        while i > 0 && idx[i - 1] == i - 1 + n - r {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Split test through the connected components of the vector
/// configuration: the cluster is split iff its distinct points decompose
/// into two groups with independent spans. Components are read off the
/// fundamental circuits relative to a greedy basis.
fn split_components(cluster: &PointCluster, tol: &Tolerances) -> Vec<Vec<usize>> {
    let units = unit_vectors(cluster);
    let groups = cluster.distinct_groups(&tol.point_tol);
    let reps: Vec<Vec<Complex>> = groups.iter().map(|g| units[g[0]].clone()).collect();
    let d = reps.len();

    let mut basis_idx: Vec<usize> = Vec::new();
    let mut basis_vecs: Vec<Vec<Complex>> = Vec::new();
    for (i, r) in reps.iter().enumerate() {
        let on = orthonormal_span(&basis_vecs, &tol.rank_tol);
        if basis_vecs.is_empty() || residual_norm(r, &on) >= tol.rank_tol {
            basis_idx.push(i);
            basis_vecs.push(r.clone());
        }
    }

    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for i in 0..d {
        if basis_idx.contains(&i) {
            continue;
        }
        for (bpos, &b) in basis_idx.iter().enumerate() {
            let others: Vec<Vec<Complex>> = basis_vecs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != bpos)
                .map(|(_, v)| v.clone())
                .collect();
            let on = orthonormal_span(&others, &tol.rank_tol);
            if residual_norm(&reps[i], &on) >= tol.rank_tol {
                let (ri, rb) = (find(&mut parent, i), find(&mut parent, b));
                parent[ri] = rb;
            }
        }
    }
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let r = find(&mut parent, gi);
        match roots.iter().position(|&x| x == r) {
            Some(p) => comps[p].extend(g.iter().copied()),
            None => {
                roots.push(r);
                comps.push(g.clone());
            }
        }
    }
    for c in &mut comps {
        c.sort_unstable();
    }
    comps
}

pub fn classify(cluster: &PointCluster) -> StabilityClass {
    classify_with(cluster, &Tolerances::for_prec(cluster.prec()))
}

pub fn classify_with(cluster: &PointCluster, tol: &Tolerances) -> StabilityClass {
    let n = cluster.n;
    let m = cluster.degree() as i64;
    let mut phis = vec![0usize];
    let mut margin = i64::MAX;
    let mut witness = None;
    for k in 0..=n {
        let (c, w) = phi_with_witness(cluster, k as i64, tol).expect("k in range");
        phis.push(c);
        if k < n {
            let slack = (k as i64 + 1) * m - (n as i64 + 1) * c as i64;
            if slack < margin {
                margin = slack;
                witness = Some(w);
            }
        }
    }
    let comps = split_components(cluster, tol);
    // points inside a hyperplane: pair their span with any point off it
    let degenerate = n > 0 && phis[n] == cluster.degree();
    let split_parts = if degenerate {
        Some(((0..cluster.degree()).collect(), vec![]))
    } else if comps.len() >= 2 {
        let a = comps[0].clone();
        let mut b: Vec<usize> = comps[1..].iter().flatten().copied().collect();
        b.sort_unstable();
        Some((a, b))
    } else {
        None
    };
    StabilityClass {
        is_split: split_parts.is_some(),
        is_semi_stable: margin >= 0,
        is_stable: margin > 0,
        witness: if margin <= 0 { witness } else { None },
        split_parts,
        phi: phis,
        margin,
    }
}

/// Default-precision helper for tests and examples.
pub fn cluster_from_f64(rows: &[Vec<(f64, f64)>]) -> Result<PointCluster> {
    PointCluster::new(
        rows.iter()
            .map(|r| ProjectivePoint::from_f64(r, DEFAULT_PREC))
            .collect::<Result<_>>()?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 212;

    fn cl(rows: &[&[i64]]) -> PointCluster {
        PointCluster::from_int_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>(), P).unwrap()
    }

    #[test]
    fn normalize_scales_to_unit_norm() {
        let z = cl(&[&[3, 0, 4]]);
        let s = normalize_cluster(&z);
        let r = &s.reps()[0];
        assert!(Float::with_val(P, r[0].real() - 0.6f64).abs() < 1e-15);
        assert!(r[1].is_zero());
        assert!(Float::with_val(P, r[2].real() - 0.8f64).abs() < 1e-15);
        let e = cl(&[&[1, 0], &[0, 1]]);
        let s = normalize_cluster(&e);
        assert_eq!(s.reps()[0][0], 1);
        assert_eq!(s.reps()[1][1], 1);
    }

    #[test]
    fn zero_vector_is_invalid() {
        assert!(ProjectivePoint::from_ints(&[0, 0, 0], P).is_err());
        assert!(PointCluster::new(vec![]).is_err());
    }

    #[test]
    fn swap_action_and_conjugation() {
        let z = cl(&[&[1, 0], &[0, 1]]);
        let g = CMatrix::from_rows(
            vec![
                vec![Complex::with_val(P, 0), Complex::with_val(P, 1)],
                vec![Complex::with_val(P, -1), Complex::with_val(P, 0)],
            ],
            P,
        )
        .unwrap();
        let w = act(&z, &g).unwrap();
        let tol = Float::with_val(P, 1e-40);
        assert!(w.approx_eq(&cl(&[&[0, 1], &[1, 0]]), &tol));
        assert!(act(&z, &CMatrix::identity(2, P)).unwrap().approx_eq(&z, &tol));

        let p = ProjectivePoint::new(vec![Complex::with_val(P, (0, 1)), Complex::with_val(P, 1)]).unwrap();
        let q = ProjectivePoint::new(vec![Complex::with_val(P, (0, -1)), Complex::with_val(P, 1)]).unwrap();
        let c = conjugate(&PointCluster::new(vec![p]).unwrap());
        assert!(c.points()[0].approx_eq(&q, &tol));
    }

    #[test]
    fn singular_action_rejected() {
        let z = cl(&[&[1, 0], &[0, 1]]);
        let g = CMatrix::zeros(2, 2, P);
        assert!(act(&z, &g).is_err());
        assert!(act(&z, &CMatrix::identity(3, P)).is_err());
    }

    #[test]
    fn phi_examples() {
        let four = cl(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]);
        assert_eq!(phi(&four, 1).unwrap(), 2);
        assert_eq!(phi(&four, 2).unwrap(), 4);
        assert_eq!(phi(&four, -1).unwrap(), 0);
        assert!(phi(&four, 3).is_err());
        assert!(phi(&four, -2).is_err());
        let five = cl(&[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1], &[1, 2, 3]]);
        assert_eq!(phi(&five, 1).unwrap(), 3);
        assert_eq!(phi(&five, 0).unwrap(), 1);
    }

    #[test]
    fn classify_examples() {
        let four = cl(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 1]]);
        let c = classify(&four);
        assert!(c.is_stable && c.is_semi_stable && !c.is_split);
        assert!(c.witness.is_none());

        let two = cl(&[&[1, 0], &[0, 1]]);
        let c = classify(&two);
        assert!(c.is_split && c.is_semi_stable && !c.is_stable);
        assert_eq!(c.witness.as_ref().unwrap().count(), 1);

        // double point in a degree-4 cluster in P^2: 3*2 >= 1*4
        let dbl = cl(&[&[1, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let c = classify(&dbl);
        assert!(!c.is_stable && !c.is_semi_stable);
        assert_eq!(c.phi, vec![0, 2, 3, 4]);
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(combinations(2, 3).len(), 0);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn scaled_equality_modulo_unit_product() {
        let z = ScaledCluster::from_cluster(&cl(&[&[1, 2], &[3, 1]]));
        let two = Complex::with_val(P, 2);
        let half = Complex::with_val(P, 0.5);
        let w = z.scale_point(0, &two).scale_point(1, &half);
        let tol = Float::with_val(P, 1e-40);
        assert!(z.approx_eq(&w, &tol));
        assert!(!z.approx_eq(&z.scale_point(0, &two), &tol));
    }
}
