//! Dense complex matrices at multiprecision.
//!
//! Only what the covariant and cluster code needs: products, adjoints,
//! LU determinants and solves, Cholesky, and a cyclic Jacobi eigensolver
//! for Hermitian matrices (used for matrix exponentials and ranks).

use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::mp::{cabs, cnorm, czero};

#[derive(Clone, Debug)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        CMatrix {
            rows,
            cols,
            prec,
            data: vec![czero(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = Complex::with_val(prec, 1);
        }
        m
    }

    /// Build from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Complex>>, prec: u32) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row.into_iter().map(|z| Complex::with_val(prec, z)));
        }
        Ok(CMatrix {
            rows: r,
            cols: c,
            prec,
            data,
        })
    }

    pub fn from_real_rows(rows: &[Vec<Float>], prec: u32) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|x| Complex::with_val(prec, x)).collect())
            .collect();
        Self::from_rows(rows, prec)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Complex> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    /// Re-round every entry to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            prec,
            data: self.data.iter().map(|z| Complex::with_val(prec, z)).collect(),
        }
    }

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let prec = self.prec.max(other.prec);
        let mut out = CMatrix::zeros(self.rows, other.cols, prec);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = czero(prec);
                for k in 0..self.cols {
                    acc += &self[(i, k)] * &other[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols)
            .map(|j| {
                let mut acc = czero(self.prec);
                for (i, vi) in v.iter().enumerate() {
                    acc += vi * &self[(i, j)];
                }
                acc
            })
            .collect()
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[Complex]) -> Vec<Complex> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = czero(self.prec);
                for (j, vj) in v.iter().enumerate() {
                    acc += &self[(i, j)] * vj;
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows, self.prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        let mut out = self.clone();
        for z in &mut out.data {
            z.conj_mut();
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        self.transpose().conj()
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale_real(&self, s: &Float) -> CMatrix {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= s;
        }
        out
    }

    pub fn scale(&self, s: &Complex) -> CMatrix {
        let mut out = self.clone();
        for z in &mut out.data {
            *z *= s;
        }
        out
    }

    pub fn trace(&self) -> Complex {
        let mut acc = czero(self.prec);
        for i in 0..self.rows.min(self.cols) {
            acc += &self[(i, i)];
        }
        acc
    }

    pub fn frobenius_norm(&self) -> Float {
        let mut acc = Float::new(self.prec);
        for z in &self.data {
            acc += cnorm(z);
        }
        acc.sqrt()
    }

    /// Real Frobenius inner product `Re tr(self^H other)`.
    pub fn frobenius_inner(&self, other: &CMatrix) -> Float {
        let mut acc = Float::new(self.prec);
        for (a, b) in self.data.iter().zip(&other.data) {
            let p = Complex::with_val(self.prec, a.conj_ref()) * b;
            acc += p.real();
        }
        acc
    }

    /// Largest absolute imaginary part among the entries.
    pub fn max_imag_abs(&self) -> Float {
        let mut m = Float::new(self.prec);
        for z in &self.data {
            let a = Float::with_val(self.prec, z.imag().abs_ref());
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec);
        for z in &self.data {
            let a = cabs(z);
            if a > m {
                m = a;
            }
        }
        m
    }

    /// Maximum deviation from being Hermitian.
    pub fn hermitian_defect(&self) -> Float {
        let mut m = Float::new(self.prec);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let cj = Complex::with_val(self.prec, self[(j, i)].conj_ref());
                let d = Complex::with_val(self.prec, &self[(i, j)] - &cj);
                let a = cabs(&d);
                if a > m {
                    m = a;
                }
            }
        }
        m
    }

    /// Replace the matrix by `(A + A^H)/2`.
    pub fn symmetrize_hermitian(&self) -> CMatrix {
        let a = self.add(&self.adjoint());
        a.scale_real(&Float::with_val(self.prec, 0.5))
    }

    /// LU factorisation with partial pivoting: returns (lu, perm, sign) or
    /// `None` when a pivot vanishes exactly.
    fn lu(&self) -> Option<(CMatrix, Vec<usize>, i32)> {
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        for k in 0..n {
            let mut p = k;
            let mut best = cabs(&a[(k, k)]);
            for i in k + 1..n {
                let v = cabs(&a[(i, k)]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best.is_zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)].clone();
            for i in k + 1..n {
                let f = Complex::with_val(self.prec, &a[(i, k)] / &pivot);
                for j in k + 1..n {
                    let t = Complex::with_val(self.prec, &f * &a[(k, j)]);
                    a[(i, j)] -= t;
                }
                a[(i, k)] = f;
            }
        }
        Some((a, perm, sign))
    }

    pub fn det(&self) -> Complex {
        assert!(self.is_square());
        match self.lu() {
            None => czero(self.prec),
            Some((lu, _, sign)) => {
                let mut d = Complex::with_val(self.prec, sign);
                for i in 0..self.rows {
                    d *= &lu[(i, i)];
                }
                d
            }
        }
    }

    /// Solve `self * x = b`.
    pub fn solve(&self, b: &[Complex]) -> Result<Vec<Complex>> {
        if !self.is_square() {
            return Err(Error::SingularMatrix("not square".into()));
        }
        let n = self.rows;
        let (lu, perm, _) = self
            .lu()
            .ok_or_else(|| Error::SingularMatrix("zero pivot".into()))?;
        let mut y: Vec<Complex> = perm.iter().map(|&p| Complex::with_val(self.prec, &b[p])).collect();
        for i in 0..n {
            for k in 0..i {
                let t = Complex::with_val(self.prec, &lu[(i, k)] * &y[k]);
                y[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = Complex::with_val(self.prec, &lu[(i, k)] * &y[k]);
                y[i] -= t;
            }
            y[i] /= &lu[(i, i)];
        }
        Ok(y)
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::SingularMatrix("not square".into()));
        }
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n, self.prec);
        for j in 0..n {
            let mut e = vec![czero(self.prec); n];
            e[j] = Complex::with_val(self.prec, 1);
            let x = self.solve(&e)?;
            for (i, xi) in x.into_iter().enumerate() {
                out[(i, j)] = xi;
            }
        }
        Ok(out)
    }

    /// Cholesky factor `L` (lower triangular, positive real diagonal) with
    /// `self = L L^H`. Fails unless the matrix is Hermitian positive definite.
    pub fn cholesky(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::NotPositiveDefinite);
        }
        let n = self.rows;
        let p = self.prec;
        let mut l = CMatrix::zeros(n, n, p);
        for j in 0..n {
            let mut d = Float::with_val(p, self[(j, j)].real());
            for k in 0..j {
                d -= cnorm(&l[(j, k)]);
            }
            if d <= 0 || d.is_nan() {
                return Err(Error::NotPositiveDefinite);
            }
            let djj = d.sqrt();
            for i in j + 1..n {
                let mut s = self[(i, j)].clone();
                for k in 0..j {
                    let cj = Complex::with_val(p, l[(j, k)].conj_ref());
                    let t = Complex::with_val(p, &l[(i, k)] * &cj);
                    s -= t;
                }
                l[(i, j)] = s / &djj;
            }
            l[(j, j)] = Complex::with_val(p, &djj);
        }
        Ok(l)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Returns ascending eigenvalues and a unitary matrix whose
    /// columns are the matching eigenvectors.
    pub fn hermitian_eigen(&self) -> (Vec<Float>, CMatrix) {
        assert!(self.is_square());
        let n = self.rows;
        let p = self.prec;
        let mut a = self.symmetrize_hermitian();
        let mut v = CMatrix::identity(n, p);
        let scale = a.frobenius_norm();
        let eps = Float::with_val(p, Float::with_val(p, 1) << -(p as i32 - 4)) * &scale;
        let eps2 = Float::with_val(p, &eps * &eps);
        for _sweep in 0..64 {
            let mut off = Float::new(p);
            for i in 0..n {
                for j in i + 1..n {
                    off += cnorm(&a[(i, j)]);
                }
            }
            if off <= eps2 || off.is_zero() {
                break;
            }
            for pi in 0..n {
                for qi in pi + 1..n {
                    let b = a[(pi, qi)].clone();
                    let absb = cabs(&b);
                    if absb.is_zero() {
                        continue;
                    }
                    let ph = Complex::with_val(p, &b / &absb);
                    let phc = Complex::with_val(p, ph.conj_ref());
                    let app = Float::with_val(p, a[(pi, pi)].real());
                    let aqq = Float::with_val(p, a[(qi, qi)].real());
                    let theta = Float::with_val(p, &aqq - &app) / Float::with_val(p, &absb * 2u32);
                    let t = if theta.is_zero() {
                        Float::with_val(p, 1)
                    } else {
                        let r = Float::with_val(p, theta.square_ref()) + 1u32;
                        let denom = Float::with_val(p, theta.abs_ref()) + r.sqrt();
                        let t = Float::with_val(p, 1) / denom;
                        if theta < 0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = (Float::with_val(p, t.square_ref()) + 1u32).sqrt().recip();
                    let s = Float::with_val(p, &t * &c);
                    // J = [[c, s], [-s*conj(ph), c*conj(ph)]]
                    let jpp = Complex::with_val(p, &c);
                    let jpq = Complex::with_val(p, &s);
                    let jqp = -Complex::with_val(p, &phc * &s);
                    let jqq = Complex::with_val(p, &phc * &c);
                    rotate_cols(&mut a, pi, qi, &jpp, &jpq, &jqp, &jqq);
                    rotate_rows_adj(&mut a, pi, qi, &jpp, &jpq, &jqp, &jqq);
                    rotate_cols(&mut v, pi, qi, &jpp, &jpq, &jqp, &jqq);
                    a[(pi, qi)] = czero(p);
                    a[(qi, pi)] = czero(p);
                    let rp = Float::with_val(p, a[(pi, pi)].real());
                    let rq = Float::with_val(p, a[(qi, qi)].real());
                    a[(pi, pi)] = Complex::with_val(p, rp);
                    a[(qi, qi)] = Complex::with_val(p, rq);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        let evals: Vec<Float> = (0..n).map(|i| Float::with_val(p, a[(i, i)].real())).collect();
        order.sort_by(|&i, &j| evals[i].partial_cmp(&evals[j]).expect("finite eigenvalues"));
        let mut vs = CMatrix::zeros(n, n, p);
        for (newj, &oldj) in order.iter().enumerate() {
            for i in 0..n {
                vs[(i, newj)] = v[(i, oldj)].clone();
            }
        }
        (order.iter().map(|&i| evals[i].clone()).collect(), vs)
    }

    /// `V diag(f(lambda)) V^H` for a Hermitian matrix.
    pub fn hermitian_map(&self, f: impl Fn(&Float) -> Float) -> CMatrix {
        let (vals, v) = self.hermitian_eigen();
        from_eigen(&vals.iter().map(f).collect::<Vec<_>>(), &v)
    }

    /// Matrix exponential of a Hermitian matrix.
    pub fn hermitian_exp(&self) -> CMatrix {
        self.hermitian_map(|x| Float::with_val(x.prec(), x.exp_ref()))
    }
}

/// Rebuild `V diag(vals) V^H`.
pub fn from_eigen(vals: &[Float], v: &CMatrix) -> CMatrix {
    let n = v.rows;
    let p = v.prec;
    let mut out = CMatrix::zeros(n, n, p);
    for i in 0..n {
        for j in 0..n {
            let mut acc = czero(p);
            for (k, lam) in vals.iter().enumerate() {
                let cj = Complex::with_val(p, v[(j, k)].conj_ref());
                let t = Complex::with_val(p, &v[(i, k)] * &cj);
                acc += t * lam;
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn rotate_cols(
    m: &mut CMatrix,
    p: usize,
    q: usize,
    jpp: &Complex,
    jpq: &Complex,
    jqp: &Complex,
    jqq: &Complex,
) {
    let prec = m.prec;
    for k in 0..m.rows {
        let akp = m[(k, p)].clone();
        let akq = m[(k, q)].clone();
        let np = Complex::with_val(prec, &akp * jpp) + Complex::with_val(prec, &akq * jqp);
        let nq = Complex::with_val(prec, &akp * jpq) + Complex::with_val(prec, &akq * jqq);
        m[(k, p)] = np;
        m[(k, q)] = nq;
    }
}

fn rotate_rows_adj(
    m: &mut CMatrix,
    p: usize,
    q: usize,
    jpp: &Complex,
    jpq: &Complex,
    jqp: &Complex,
    jqq: &Complex,
) {
    let prec = m.prec;
    let cpp = Complex::with_val(prec, jpp.conj_ref());
    let cpq = Complex::with_val(prec, jpq.conj_ref());
    let cqp = Complex::with_val(prec, jqp.conj_ref());
    let cqq = Complex::with_val(prec, jqq.conj_ref());
    for k in 0..m.cols {
        let apk = m[(p, k)].clone();
        let aqk = m[(q, k)].clone();
        let np = Complex::with_val(prec, &cpp * &apk) + Complex::with_val(prec, &cqp * &aqk);
        let nq = Complex::with_val(prec, &cpq * &apk) + Complex::with_val(prec, &cqq * &aqk);
        m[(p, k)] = np;
        m[(q, k)] = nq;
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

/// Hermitian inner product `<u, v> = conj(u) . v` of row vectors.
pub fn inner(u: &[Complex], v: &[Complex]) -> Complex {
    let prec = u.first().map_or(64, |z| z.prec().0);
    let mut acc = czero(prec);
    for (a, b) in u.iter().zip(v) {
        acc += Complex::with_val(prec, a.conj_ref()) * b;
    }
    acc
}

pub fn norm2(u: &[Complex]) -> Float {
    let prec = u.first().map_or(64, |z| z.prec().0);
    let mut acc = Float::new(prec);
    for a in u {
        acc += cnorm(a);
    }
    acc
}

/// Orthonormal basis of the span of `vectors`, built by Gram-Schmidt with
/// pivoting. Directions whose residual norm falls below `tol` times the
/// largest input norm are discarded.
pub fn orthonormal_span(vectors: &[Vec<Complex>], tol: &Float) -> Vec<Vec<Complex>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let prec = vectors[0][0].prec().0;
    let mut maxn = Float::new(prec);
    for v in vectors {
        let n = norm2(v).sqrt();
        if n > maxn {
            maxn = n;
        }
    }
    let thresh = Float::with_val(prec, tol * &maxn);
    let mut work: Vec<Vec<Complex>> = vectors.to_vec();
    let mut basis: Vec<Vec<Complex>> = Vec::new();
    loop {
        // pick the residual with the largest norm
        let mut best = None;
        let mut bestn = Float::new(prec);
        for (i, w) in work.iter().enumerate() {
            let n = norm2(w).sqrt();
            if n > bestn {
                bestn = n;
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        if bestn <= thresh {
            break;
        }
        let q: Vec<Complex> = work[i].iter().map(|z| Complex::with_val(prec, z / &bestn)).collect();
        work.swap_remove(i);
        for w in &mut work {
            // two passes of projection for stability
            for _ in 0..2 {
                let c = inner(&q, w);
                for (wk, qk) in w.iter_mut().zip(&q) {
                    *wk -= Complex::with_val(prec, &c * qk);
                }
            }
        }
        basis.push(q);
    }
    basis
}

/// Norm of the component of `v` orthogonal to the span of the orthonormal
/// `basis`.
pub fn residual_norm(v: &[Complex], basis: &[Vec<Complex>]) -> Float {
    let prec = v[0].prec().0;
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = inner(q, &r);
            for (rk, qk) in r.iter_mut().zip(q) {
                *rk -= Complex::with_val(prec, &c * qk);
            }
        }
    }
    norm2(&r).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 200;

    fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let mut m = CMatrix::zeros(n, n, P);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex::with_val(P, (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        m
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        a.sub(b).frobenius_norm() < tol
    }

    #[test]
    fn inverse_and_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..5 {
            let a = random_matrix(n, &mut rng);
            let inv = a.inverse().unwrap();
            assert!(close(&a.mul(&inv).unwrap(), &CMatrix::identity(n, P), 1e-50));
            let d1 = a.det();
            let d2 = inv.det();
            let prod = Complex::with_val(P, &d1 * &d2) - 1u32;
            assert!(cabs(&prod) < 1e-50);
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let mut m = CMatrix::zeros(2, 2, P);
        m[(0, 0)] = Complex::with_val(P, 1);
        m[(0, 1)] = Complex::with_val(P, 2);
        m[(1, 0)] = Complex::with_val(P, 2);
        m[(1, 1)] = Complex::with_val(P, 4);
        assert!(m.inverse().is_err());
        assert!(m.det().is_zero());
    }

    #[test]
    fn cholesky_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_matrix(4, &mut rng);
        let h = a.adjoint().mul(&a).unwrap().add(&CMatrix::identity(4, P));
        let l = h.cholesky().unwrap();
        assert!(close(&l.mul(&l.adjoint()).unwrap(), &h, 1e-50));
        let neg = h.scale_real(&Float::with_val(P, -1));
        assert!(neg.cholesky().is_err());
    }

    #[test]
    fn jacobi_diagonalises_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let a = random_matrix(n, &mut rng);
            let h = a.add(&a.adjoint());
            let (vals, v) = h.hermitian_eigen();
            assert!(close(&from_eigen(&vals, &v), &h, 1e-50));
            assert!(close(&v.adjoint().mul(&v).unwrap(), &CMatrix::identity(n, P), 1e-50));
            for w in vals.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn exp_of_trace_zero_has_unit_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(3, &mut rng);
        let mut h = a.add(&a.adjoint());
        let tr = Complex::with_val(P, h.trace() / 3u32);
        for i in 0..3 {
            h[(i, i)] -= &tr;
        }
        let e = h.hermitian_exp();
        let d = Complex::with_val(P, e.det() - 1u32);
        assert!(cabs(&d) < 1e-50);
    }

    #[test]
    fn span_and_residuals() {
        let one = Complex::with_val(P, 1);
        let zero = czero(P);
        let v1 = vec![one.clone(), zero.clone(), zero.clone()];
        let v2 = vec![one.clone(), one.clone(), zero.clone()];
        let v3 = vec![Complex::with_val(P, 2), one.clone(), zero.clone()];
        let tol = Float::with_val(P, 1e-30);
        let b = orthonormal_span(&[v1, v2, v3], &tol);
        assert_eq!(b.len(), 2);
        let out = vec![zero.clone(), zero.clone(), one.clone()];
        assert!((residual_norm(&out, &b) - 1u32).abs() < 1e-50);
        let inside = vec![Complex::with_val(P, 5), Complex::with_val(P, -3), zero];
        assert!(residual_norm(&inside, &b) < 1e-50);
    }
}
