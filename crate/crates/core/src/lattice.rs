//! LLL reduction of positive definite real quadratic forms.
//!
//! The algorithm runs on the Gram matrix itself: Gram–Schmidt data are
//! multiprecision floats while the transformation is kept as an exact
//! integer matrix. Columns of the transform are the new basis vectors, so
//! the reduced Gram matrix is `U^T G U`.

use rug::{Float, Integer, Rational};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::mp::{fmt_float, parse_real, round_half_even};

/// Default Lovász parameter.
pub const DEFAULT_DELTA: f64 = 0.99;

/// Swaps between full recomputations of the Gram–Schmidt data.
const REFRESH_EVERY: usize = 32;

/// Real symmetric positive definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    rows: Vec<Vec<Float>>,
}

impl GramMatrix {
    pub fn new(rows: Vec<Vec<Float>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::Degenerate("empty Gram matrix".into()));
        }
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: rows.iter().map(Vec::len).find(|&l| l != k).unwrap_or(k),
            });
        }
        let prec = rows[0][0].prec();
        let scale = rows
            .iter()
            .flatten()
            .map(|x| Float::with_val(prec, x.abs_ref()))
            .fold(Float::new(prec), |a, b| if b > a { b } else { a });
        let tol = Float::with_val(prec, &scale * crate::mp::half_precision_tol(prec));
        let mut sym = rows.clone();
        for i in 0..k {
            for j in 0..i {
                let d = Float::with_val(prec, &rows[i][j] - &rows[j][i]);
                if d.abs() > tol {
                    return Err(Error::NotPositiveDefinite);
                }
                let avg = Float::with_val(prec, &rows[i][j] + &rows[j][i]) / 2u32;
                sym[i][j] = avg.clone();
                sym[j][i] = avg;
            }
        }
        let g = GramMatrix { rows: sym };
        g.cholesky_diag()?;
        Ok(g)
    }

    pub fn from_f64(rows: &[Vec<f64>], prec: u32) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Float::with_val(prec, x)).collect())
                .collect(),
        )
    }

    pub fn identity(size: usize, prec: u32) -> Self {
        GramMatrix {
            rows: (0..size)
                .map(|i| (0..size).map(|j| Float::with_val(prec, u32::from(i == j))).collect())
                .collect(),
        }
    }

    /// Number of rows (`n+1`).
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn prec(&self) -> u32 {
        self.rows[0][0].prec()
    }

    pub fn rows(&self) -> &[Vec<Float>] {
        &self.rows
    }

    pub fn entry(&self, i: usize, j: usize) -> &Float {
        &self.rows[i][j]
    }

    pub fn diagonal(&self) -> Vec<Float> {
        (0..self.size()).map(|i| self.rows[i][i].clone()).collect()
    }

    pub fn scale(&self, c: &Float) -> GramMatrix {
        GramMatrix {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|x| Float::with_val(self.prec(), x * c)).collect())
                .collect(),
        }
    }

    /// `U^T G U`.
    pub fn congruence(&self, u: &UnimodularTransform) -> GramMatrix {
        let k = self.size();
        let prec = self.prec();
        let uf: Vec<Vec<Float>> = u
            .rows
            .iter()
            .map(|r| r.iter().map(|x| Float::with_val(prec, x)).collect())
            .collect();
        let mut gu = vec![vec![Float::new(prec); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut acc = Float::new(prec);
                for l in 0..k {
                    acc += Float::with_val(prec, &self.rows[i][l] * &uf[l][j]);
                }
                gu[i][j] = acc;
            }
        }
        let mut out = vec![vec![Float::new(prec); k]; k];
        for i in 0..k {
            for j in i..k {
                let mut acc = Float::new(prec);
                for l in 0..k {
                    acc += Float::with_val(prec, &uf[l][i] * &gu[l][j]);
                }
                out[i][j] = acc.clone();
                out[j][i] = acc;
            }
        }
        GramMatrix { rows: out }
    }

    /// Largest entry in absolute value.
    pub fn max_abs(&self) -> Float {
        let prec = self.prec();
        self.rows
            .iter()
            .flatten()
            .map(|x| Float::with_val(prec, x.abs_ref()))
            .fold(Float::new(prec), |a, b| if b > a { b } else { a })
    }

    /// Max entrywise difference relative to the largest entry of `other`.
    pub fn relative_distance(&self, other: &GramMatrix) -> Float {
        let prec = self.prec();
        let mut worst = Float::new(prec);
        for (ra, rb) in self.rows.iter().zip(&other.rows) {
            for (a, b) in ra.iter().zip(rb) {
                let d = Float::with_val(prec, a - b).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst / other.max_abs()
    }

    fn cholesky_diag(&self) -> Result<()> {
        let (_, b) = gso(&self.rows, self.size());
        if b.iter().any(|x| !x.is_finite() || *x <= 0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(())
    }

    /// JSON `{ "n": n, "matrix": [[decimal strings]] }`.
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable")
    }

    pub fn from_json(v: &Value, prec: u32) -> Result<Self> {
        let rows = v
            .get("matrix")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("Gram matrix JSON needs a \"matrix\" array".into()))?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("matrix rows must be arrays".into()))?
                    .iter()
                    .map(|x| json_real(x, prec))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(n) = v.get("n").and_then(Value::as_u64) {
            if n as usize + 1 != parsed.len() {
                return Err(Error::DimensionMismatch {
                    expected: n as usize + 1,
                    found: parsed.len(),
                });
            }
        }
        GramMatrix::new(parsed)
    }
}

pub(crate) fn json_real(x: &Value, prec: u32) -> Result<Float> {
    match x {
        Value::String(s) => parse_real(prec, s),
        Value::Number(n) => parse_real(prec, &n.to_string()),
        _ => Err(Error::Parse(format!("expected a number, found {x}"))),
    }
}

impl Serialize for GramMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let digits = crate::mp::decimal_digits(self.prec()) as usize;
        let m: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| fmt_float(x, digits)).collect())
            .collect();
        let mut st = s.serialize_struct("GramMatrix", 2)?;
        st.serialize_field("n", &(self.size() - 1))?;
        st.serialize_field("matrix", &m)?;
        st.end()
    }
}

/// Integer matrix of determinant `±1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnimodularTransform {
    rows: Vec<Vec<Integer>>,
}

impl UnimodularTransform {
    pub fn new(rows: Vec<Vec<Integer>>) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Degenerate("transform must be square and nonempty".into()));
        }
        let d = int_det(&rows);
        if d != 1 && d != -1 {
            return Err(Error::SingularMatrix(format!("determinant {d} is not a unit")));
        }
        Ok(UnimodularTransform { rows })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect())
    }

    pub fn identity(size: usize) -> Self {
        UnimodularTransform {
            rows: (0..size)
                .map(|i| (0..size).map(|j| Integer::from(u8::from(i == j))).collect())
                .collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Integer>] {
        &self.rows
    }

    pub fn det(&self) -> Integer {
        int_det(&self.rows)
    }

    pub fn transpose(&self) -> Self {
        let k = self.size();
        UnimodularTransform {
            rows: (0..k).map(|i| (0..k).map(|j| self.rows[j][i].clone()).collect()).collect(),
        }
    }

    pub fn mul(&self, other: &UnimodularTransform) -> Self {
        let k = self.size();
        let mut rows = vec![vec![Integer::new(); k]; k];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                for l in 0..k {
                    *e += Integer::from(&self.rows[i][l] * &other.rows[l][j]);
                }
            }
        }
        UnimodularTransform { rows }
    }

    /// Exact inverse (integral because the determinant is a unit).
    pub fn inverse(&self) -> Self {
        let k = self.size();
        let mut a: Vec<Vec<Rational>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Rational::from).collect())
            .collect();
        let mut inv: Vec<Vec<Rational>> = (0..k)
            .map(|i| (0..k).map(|j| Rational::from(u8::from(i == j))).collect())
            .collect();
        for c in 0..k {
            let p = (c..k).find(|&r| a[r][c] != 0).expect("unimodular");
            a.swap(c, p);
            inv.swap(c, p);
            let piv = a[c][c].clone();
            for j in 0..k {
                a[c][j] /= &piv;
                inv[c][j] /= &piv;
            }
            for r in 0..k {
                if r != c && a[r][c] != 0 {
                    let f = a[r][c].clone();
                    for j in 0..k {
                        let t = Rational::from(&f * &a[c][j]);
                        a[r][j] -= t;
                        let t = Rational::from(&f * &inv[c][j]);
                        inv[r][j] -= t;
                    }
                }
            }
        }
        UnimodularTransform {
            rows: inv
                .into_iter()
                .map(|r| r.into_iter().map(|x| x.into_numer_denom().0).collect())
                .collect(),
        }
    }

    /// Largest absolute entry.
    pub fn height(&self) -> Integer {
        self.rows
            .iter()
            .flatten()
            .map(|x| Integer::from(x.abs_ref()))
            .max()
            .unwrap_or_default()
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.rows.iter().map(|r| r.iter().map(Integer::to_i64).collect()).collect()
    }

    pub fn to_cmatrix(&self, prec: u32) -> crate::linalg::CMatrix {
        let k = self.size();
        let mut m = crate::linalg::CMatrix::zeros(k, k, prec);
        for i in 0..k {
            for j in 0..k {
                m[(i, j)] = rug::Complex::with_val(prec, &self.rows[i][j]);
            }
        }
        m
    }

    fn negate_col(&mut self, j: usize) {
        for r in &mut self.rows {
            r[j] = Integer::from(-&r[j]);
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("transform JSON must be an array of rows".into()))?;
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| Error::Parse("transform rows must be arrays".into()))?
                    .iter()
                    .map(|x| match x {
                        Value::Number(n) => n.to_string().parse::<Integer>().map_err(|e| Error::Parse(e.to_string())),
                        Value::String(s) => s.trim().parse::<Integer>().map_err(|e| Error::Parse(e.to_string())),
                        _ => Err(Error::Parse(format!("expected an integer, found {x}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        UnimodularTransform::new(parsed)
    }
}

impl Serialize for UnimodularTransform {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| match x.to_i64() {
                        Some(v) => Value::from(v),
                        None => Value::String(x.to_string()),
                    })
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }
}

/// Exact determinant by fraction-free elimination.
pub fn int_det(rows: &[Vec<Integer>]) -> Integer {
    let k = rows.len();
    let mut a = rows.to_vec();
    let mut sign = 1i32;
    let mut prev = Integer::from(1);
    for c in 0..k {
        let Some(p) = (c..k).find(|&r| a[r][c] != 0) else {
            return Integer::new();
        };
        if p != c {
            a.swap(c, p);
            sign = -sign;
        }
        for r in c + 1..k {
            for j in c + 1..k {
                let v = Integer::from(&a[r][j] * &a[c][c]) - Integer::from(&a[r][c] * &a[c][j]);
                a[r][j] = v.div_exact(&prev);
            }
            a[r][c] = Integer::new();
        }
        prev = a[c][c].clone();
    }
    let d = a[k - 1][k - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

/// Gram–Schmidt coefficients `mu` and squared lengths `b` of the first
/// `upto` basis vectors.
fn gso(g: &[Vec<Float>], upto: usize) -> (Vec<Vec<Float>>, Vec<Float>) {
    let k = g.len();
    let prec = g[0][0].prec();
    let mut mu = vec![vec![Float::new(prec); k]; k];
    let mut b = vec![Float::new(prec); k];
    for i in 0..upto {
        gso_row(g, &mut mu, &mut b, i);
    }
    (mu, b)
}

fn gso_row(g: &[Vec<Float>], mu: &mut [Vec<Float>], b: &mut [Float], i: usize) {
    let prec = g[0][0].prec();
    for j in 0..i {
        let mut acc = g[i][j].clone();
        for l in 0..j {
            acc -= Float::with_val(prec, &mu[j][l] * &mu[i][l]) * &b[l];
        }
        mu[i][j] = acc / &b[j];
    }
    let mut acc = g[i][i].clone();
    for l in 0..i {
        acc -= Float::with_val(prec, mu[i][l].square_ref()) * &b[l];
    }
    b[i] = acc;
}

struct State {
    g: Vec<Vec<Float>>,
    mu: Vec<Vec<Float>>,
    b: Vec<Float>,
    u: UnimodularTransform,
}

impl State {
    /// `b_k <- b_k - q b_l` when `|mu_kl| > 1/2`.
    fn reduce(&mut self, k: usize, l: usize) {
        let prec = self.g[0][0].prec();
        let half = Float::with_val(prec, 0.5);
        if Float::with_val(prec, self.mu[k][l].abs_ref()) <= half {
            return;
        }
        let q = round_half_even(&self.mu[k][l]);
        let qf = Float::with_val(prec, &q);
        for r in &mut self.u.rows {
            let t = Integer::from(&q * &r[l]);
            r[k] -= t;
        }
        let n = self.g.len();
        // G <- E^T G E with E = I - q e_l e_k^T
        let gkl = self.g[k][l].clone();
        let gll = self.g[l][l].clone();
        let gkk = Float::with_val(prec, &self.g[k][k] - Float::with_val(prec, &qf * &gkl) * 2u32)
            + Float::with_val(prec, qf.square_ref()) * &gll;
        for i in 0..n {
            if i != k {
                let v = Float::with_val(prec, &self.g[i][k] - Float::with_val(prec, &qf * &self.g[i][l]));
                self.g[i][k] = v.clone();
                self.g[k][i] = v;
            }
        }
        self.g[k][k] = gkk;
        self.mu[k][l] -= &qf;
        for i in 0..l {
            let t = Float::with_val(prec, &qf * &self.mu[l][i]);
            self.mu[k][i] -= t;
        }
    }

    fn swap(&mut self, k: usize, kmax: usize) {
        let prec = self.g[0][0].prec();
        for r in &mut self.u.rows {
            r.swap(k, k - 1);
        }
        self.g.swap(k, k - 1);
        for r in &mut self.g {
            r.swap(k, k - 1);
        }
        for j in 0..k - 1 {
            let t = self.mu[k][j].clone();
            self.mu[k][j] = self.mu[k - 1][j].clone();
            self.mu[k - 1][j] = t;
        }
        let m = self.mu[k][k - 1].clone();
        let bb = Float::with_val(prec, &self.b[k] + Float::with_val(prec, m.square_ref()) * &self.b[k - 1]);
        self.mu[k][k - 1] = Float::with_val(prec, &m * &self.b[k - 1]) / &bb;
        self.b[k] = Float::with_val(prec, &self.b[k - 1] * &self.b[k]) / &bb;
        self.b[k - 1] = bb;
        for i in k + 1..=kmax {
            let t = self.mu[i][k].clone();
            self.mu[i][k] = Float::with_val(prec, &self.mu[i][k - 1] - Float::with_val(prec, &m * &t));
            self.mu[i][k - 1] = t + Float::with_val(prec, &self.mu[k][k - 1] * &self.mu[i][k]);
        }
    }
}

/// LLL-reduce `g` with Lovász parameter `delta`.
///
/// Returns `U^T G U` and `U`; columns of `U` are the reduced basis. Column
/// signs are normalised so that each column's first nonzero entry is
/// positive, then the last column is negated if needed to make `det U = 1`.
pub fn lll_reduce(g: &GramMatrix, delta: f64) -> Result<(GramMatrix, UnimodularTransform)> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::Degenerate(format!("delta {delta} outside (1/4, 1)")));
    }
    g.cholesky_diag()?;
    let n = g.size();
    let prec = g.prec();
    let deltaf = Float::with_val(prec, delta);
    let (mu, b) = gso(&g.rows, 1);
    let mut st = State {
        g: g.rows.clone(),
        mu,
        b,
        u: UnimodularTransform::identity(n),
    };
    let mut k = 1;
    let mut kmax = 0;
    let mut swaps = 0usize;
    let mut steps = 0usize;
    while k < n {
        steps += 1;
        if steps > 10_000_000 {
            return Err(Error::Degenerate("LLL did not terminate; precision too low".into()));
        }
        if k > kmax {
            kmax = k;
            let (mu, b) = (&mut st.mu, &mut st.b);
            gso_row(&st.g, mu, b, k);
        }
        st.reduce(k, k - 1);
        let m2 = Float::with_val(prec, st.mu[k][k - 1].square_ref());
        let rhs = Float::with_val(prec, &deltaf - &m2) * &st.b[k - 1];
        if st.b[k] < rhs {
            st.swap(k, kmax);
            swaps += 1;
            if swaps.is_multiple_of(REFRESH_EVERY) {
                st.g = g.congruence(&st.u).rows;
                let (mu, b) = gso(&st.g, kmax + 1);
                st.mu = mu;
                st.b = b;
            }
            k = k.max(2) - 1;
        } else {
            for l in (0..k - 1).rev() {
                st.reduce(k, l);
            }
            k += 1;
        }
    }
    let mut u = st.u;
    for j in 0..n {
        let first = (0..n).map(|i| &u.rows[i][j]).find(|x| **x != 0);
        if first.is_some_and(|x| *x < 0) {
            u.negate_col(j);
        }
    }
    if u.det() < 0 {
        u.negate_col(n - 1);
    }
    Ok((g.congruence(&u), u))
}

/// Size reduction and the Lovász condition at `delta`, with relative slack
/// `1e-9`.
pub fn is_lll_reduced(g: &GramMatrix, delta: f64) -> Result<bool> {
    g.cholesky_diag()?;
    let n = g.size();
    let prec = g.prec();
    let (mu, b) = gso(&g.rows, n);
    let slack = 1e-9;
    let half = Float::with_val(prec, 0.5 * (1.0 + slack));
    for i in 0..n {
        for j in 0..i {
            if Float::with_val(prec, mu[i][j].abs_ref()) > half {
                return Ok(false);
            }
        }
    }
    for k in 1..n {
        let m2 = Float::with_val(prec, mu[k][k - 1].square_ref());
        let rhs = (Float::with_val(prec, delta) - m2) * &b[k - 1] * (1.0 - slack);
        if b[k] < rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u32 = 212;

    #[test]
    fn identity_is_fixed() {
        let g = GramMatrix::identity(3, P);
        let (r, u) = lll_reduce(&g, DEFAULT_DELTA).unwrap();
        assert_eq!(u, UnimodularTransform::identity(3));
        assert_eq!(r, g);
        assert!(is_lll_reduced(&g, DEFAULT_DELTA).unwrap());
    }

    #[test]
    fn reducedness_examples() {
        let a = GramMatrix::from_f64(&[vec![1.0, 0.0], vec![0.0, 1e-6]], P).unwrap();
        let b = GramMatrix::from_f64(&[vec![1e-6, 0.0], vec![0.0, 1.0]], P).unwrap();
        let c = GramMatrix::from_f64(&[vec![1.0, 0.9], vec![0.9, 1.0]], P).unwrap();
        // the Lovász condition fails for a short second vector
        assert!(!is_lll_reduced(&a, 0.99).unwrap());
        assert!(is_lll_reduced(&b, 0.99).unwrap());
        assert!(!is_lll_reduced(&c, 0.99).unwrap());
        let (r, _) = lll_reduce(&a, 0.99).unwrap();
        assert!(is_lll_reduced(&r, 0.99).unwrap());
        assert!(r.entry(0, 0).to_f64() < 1e-5);
    }

    #[test]
    fn rejects_indefinite() {
        assert!(GramMatrix::from_f64(&[vec![1.0, 2.0], vec![2.0, 1.0]], P).is_err());
    }

    #[test]
    fn int_det_and_inverse() {
        let u = UnimodularTransform::from_i64(&[
            vec![3780, 19276, -12561],
            vec![-889, -4515, 2953],
            vec![12463, 63400, -41405],
        ])
        .unwrap();
        assert_eq!(u.det(), -1);
        assert_eq!(u.mul(&u.inverse()), UnimodularTransform::identity(3));
        assert!(UnimodularTransform::from_i64(&[vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn random_grams_reduce_with_unit_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let k = rng.gen_range(2..=5);
            let basis: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..k).map(|_| rng.gen_range(-50.0..50.0)).collect())
                .collect();
            let rows: Vec<Vec<f64>> = (0..k)
                .map(|i| (0..k).map(|j| (0..k).map(|l| basis[l][i] * basis[l][j]).sum()).collect())
                .collect();
            let Ok(g) = GramMatrix::from_f64(&rows, P) else { continue };
            let (r, u) = lll_reduce(&g, 0.99).unwrap();
            assert_eq!(u.det(), 1);
            assert!(is_lll_reduced(&r, 0.99).unwrap());
            assert!(g.congruence(&u).relative_distance(&r) < 1e-40);
        }
    }

    #[test]
    fn json_round_trip() {
        let g = GramMatrix::from_f64(&[vec![2.0, 0.5], vec![0.5, 3.0]], P).unwrap();
        let back = GramMatrix::from_json(&g.to_json(), P).unwrap();
        assert!(back.relative_distance(&g) < 1e-50);
        let u = UnimodularTransform::from_i64(&[vec![1, 2], vec![0, 1]]).unwrap();
        let v = serde_json::to_value(&u).unwrap();
        assert_eq!(v.to_string(), "[[1,2],[0,1]]");
        assert_eq!(UnimodularTransform::from_json(&v).unwrap(), u);
    }
}
