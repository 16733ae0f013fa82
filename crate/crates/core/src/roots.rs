//! Multiprecision polynomial roots: Aberth–Ehrlich iteration followed by
//! Newton polishing.
//!
//! Integer polynomials are first split into squarefree factors exactly, so
//! multiplicities are exact and the iteration only sees simple roots.

use rug::{Complex, Float, Integer};

use crate::cluster::{PointCluster, ProjectivePoint};
use crate::error::{Error, Result};
use crate::mp::{cabs, cone, czero, pi, pow2};
use crate::poly::MultiPoly;
use crate::resultant::squarefree;

/// Guard bits carried above the requested precision.
const GUARD_BITS: u32 = 64;

/// `p(z)` and `p'(z)` by Horner's rule; coefficients low to high.
pub fn horner(coeffs: &[Complex], z: &Complex) -> (Complex, Complex) {
    let prec = z.prec().0;
    let mut p = czero(prec);
    let mut dp = czero(prec);
    for c in coeffs.iter().rev() {
        dp *= z;
        dp += &p;
        p *= z;
        p += c;
    }
    (p, dp)
}

/// Coefficients of `p(c + t)` in `t`.
fn taylor_shift(coeffs: &[Complex], c: &Complex) -> Vec<Complex> {
    let mut b: Vec<Complex> = coeffs.to_vec();
    let n = b.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = Complex::with_val(b[j].prec(), &b[j + 1] * c);
            b[j] += t;
        }
    }
    b
}

/// Outcome of the simultaneous iteration.
pub struct AberthOutcome {
    pub roots: Vec<Complex>,
    pub converged: bool,
    pub iterations: usize,
}

/// Aberth–Ehrlich iteration for all roots of a polynomial with nonzero
/// leading coefficient (coefficients low to high).
pub fn aberth(coeffs: &[Complex], prec: u32, max_iter: usize) -> AberthOutcome {
    let n = coeffs.len() - 1;
    let coeffs: Vec<Complex> = coeffs.iter().map(|c| Complex::with_val(prec, c)).collect();
    if n == 0 {
        return AberthOutcome {
            roots: vec![],
            converged: true,
            iterations: 0,
        };
    }
    if n == 1 {
        let r = Complex::with_val(prec, -&coeffs[0]) / &coeffs[1];
        return AberthOutcome {
            roots: vec![r],
            converged: true,
            iterations: 0,
        };
    }
    let lead = coeffs[n].clone();
    let center = Complex::with_val(prec, -&coeffs[n - 1]) / (Complex::with_val(prec, &lead) * n as u32);
    let shifted = taylor_shift(&coeffs, &center);
    let mut radius = Float::new(prec);
    for (k, b) in shifted.iter().enumerate().take(n) {
        if b.is_zero() {
            continue;
        }
        let q = cabs(&Complex::with_val(prec, b / &lead));
        let r = Float::with_val(prec, q.ln() / (n - k) as u32).exp();
        if r > radius {
            radius = r;
        }
    }
    if radius.is_zero() {
        return AberthOutcome {
            roots: vec![center; n],
            converged: true,
            iterations: 0,
        };
    }
    let two_pi = Float::with_val(prec, pi(prec) * 2u32);
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let ang = Float::with_val(prec, &two_pi * k as u32) / n as u32 + 0.7f64;
            let (s, c) = ang.sin_cos(Float::new(prec));
            Complex::with_val(prec, (Float::with_val(prec, &radius * &c), Float::with_val(prec, &radius * &s))) + &center
        })
        .collect();
    let eps = pow2(prec, -(prec as i32) + 12);
    let abs_coeffs: Vec<Float> = coeffs.iter().map(cabs).collect();
    let noise = Float::with_val(prec, pow2(prec, -(prec as i32)) * (8 * n as u32));
    let mut done = vec![false; n];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = horner(&coeffs, &z[k]);
            if p.is_zero() {
                done[k] = true;
                continue;
            }
            // stop once |p(z)| is at the rounding level of its evaluation
            let az = cabs(&z[k]);
            let mut bound = Float::new(prec);
            for a in abs_coeffs.iter().rev() {
                bound *= &az;
                bound += a;
            }
            let at_noise = cabs(&p) <= Float::with_val(prec, &bound * &noise);
            let mut sum = czero(prec);
            for j in 0..n {
                if j != k {
                    let d = Complex::with_val(prec, &z[k] - &z[j]);
                    if !d.is_zero() {
                        sum += d.recip();
                    }
                }
            }
            let w = if dp.is_zero() {
                Complex::with_val(prec, &radius * &eps)
            } else {
                let ratio = Complex::with_val(prec, &p / &dp);
                let denom = cone(prec) - Complex::with_val(prec, &ratio * &sum);
                ratio / denom
            };
            let scale = cabs(&z[k]).max(&Float::with_val(prec, 1));
            if at_noise || cabs(&w) <= Float::with_val(prec, &scale * &eps) {
                done[k] = true;
            }
            z[k] -= w;
        }
        if done.iter().all(|&d| d) {
            return AberthOutcome {
                roots: z,
                converged: true,
                iterations,
            };
        }
    }
    AberthOutcome {
        roots: z,
        converged: false,
        iterations,
    }
}

/// A few Newton steps, keeping the best iterate.
fn newton_polish(coeffs: &[Complex], z: &Complex, steps: usize) -> Complex {
    let mut best = z.clone();
    let (p0, _) = horner(coeffs, &best);
    let mut best_abs = cabs(&p0);
    let mut cur = z.clone();
    for _ in 0..steps {
        let (p, dp) = horner(coeffs, &cur);
        if p.is_zero() || dp.is_zero() {
            break;
        }
        cur -= p / dp;
        let (p1, _) = horner(coeffs, &cur);
        let a = cabs(&p1);
        if a < best_abs {
            best_abs = a;
            best = cur.clone();
        }
    }
    best
}

/// `|p(r)| / (max|coeff| * max(1, |r|)^deg)`.
pub fn relative_residual(coeffs: &[Complex], r: &Complex) -> Float {
    let prec = r.prec().0;
    let (p, _) = horner(coeffs, r);
    let norm = coeffs
        .iter()
        .map(cabs)
        .fold(Float::new(prec), |a, b| if b > a { b } else { a });
    let m = cabs(r).max(&Float::with_val(prec, 1));
    let deg = (coeffs.len() - 1) as i32;
    let m = Float::with_val(prec, m.pow_ref_i32(deg));
    cabs(&p) / norm / m
}

trait PowI32 {
    fn pow_ref_i32(&self, k: i32) -> Float;
}

impl PowI32 for Float {
    fn pow_ref_i32(&self, k: i32) -> Float {
        use rug::ops::Pow;
        Float::with_val(self.prec(), self.pow(k))
    }
}

fn int_coeffs(p: &[Integer], prec: u32) -> Vec<Complex> {
    p.iter().map(|c| Complex::with_val(prec, c)).collect()
}

/// Roots with multiplicity of an integer polynomial given by coefficients
/// (low to high).
pub fn integer_roots(coeffs: &[Integer], prec: u32) -> Result<Vec<(Complex, usize)>> {
    let factors = squarefree(coeffs)?;
    let wprec = prec + GUARD_BITS;
    let mut out: Vec<(Complex, usize)> = Vec::new();
    let threshold = pow2(prec, -(prec as i32) / 2);
    for (f, mult) in factors {
        let bits = f.iter().map(|c| c.significant_bits()).max().unwrap_or(1);
        let cprec = wprec.max(bits + prec);
        let cw = int_coeffs(&f, wprec);
        let exact = int_coeffs(&f, cprec);
        let outcome = aberth(&cw, wprec, 4000 + 20 * f.len());
        if !outcome.converged {
            return Err(Error::RootFinding(format!(
                "Aberth iteration did not converge for a degree {} factor",
                f.len() - 1
            )));
        }
        for r in outcome.roots {
            let r = newton_polish(&exact, &Complex::with_val(cprec, &r), 3);
            let res = relative_residual(&exact, &r);
            if res > threshold {
                return Err(Error::RootFinding(format!("root residual {} too large", res.to_f64())));
            }
            out.push((Complex::with_val(prec, &r), mult));
        }
    }
    Ok(merge_close(out, prec))
}

/// Merge roots closer than `2^(-prec/4)` (relative), adding multiplicities.
fn merge_close(roots: Vec<(Complex, usize)>, prec: u32) -> Vec<(Complex, usize)> {
    let tol = pow2(prec, -(prec as i32) / 4);
    let mut out: Vec<(Complex, usize)> = Vec::new();
    for (r, m) in roots {
        let scale = cabs(&r).max(&Float::with_val(prec, 1));
        let lim = Float::with_val(prec, &tol * &scale);
        match out
            .iter_mut()
            .find(|(s, _)| cabs(&Complex::with_val(prec, &r - s)) < lim)
        {
            Some(e) => e.1 += m,
            None => out.push((r, m)),
        }
    }
    out
}

/// Roots of a univariate polynomial with multiplicities.
pub fn univariate_roots(p: &MultiPoly, prec: u32) -> Result<Vec<(Complex, usize)>> {
    if p.nvars() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: p.nvars(),
        });
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if p.total_degree() == Some(0) {
        return Err(Error::Degenerate("constant polynomial has no roots".into()));
    }
    integer_roots(&p.dehomogenized_coeffs()?, prec)
}

/// Zeros `(x : y)` of a binary form, with multiplicities.
pub fn binary_form_root_set(f: &MultiPoly, prec: u32) -> Result<Vec<(ProjectivePoint, usize)>> {
    if f.nvars() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: f.nvars(),
        });
    }
    let m = f.homogeneous_degree()? as usize;
    if m == 0 {
        return Err(Error::Degenerate("constant form has no roots".into()));
    }
    let coeffs = f.dehomogenized_coeffs()?;
    let finite_deg = coeffs.iter().rposition(|c| *c != 0).unwrap_or(0);
    let mut out = Vec::new();
    if finite_deg > 0 {
        for (r, k) in integer_roots(&coeffs[..=finite_deg], prec)? {
            out.push((ProjectivePoint::new(vec![r, cone(prec)])?, k));
        }
    }
    if m > finite_deg {
        out.push((ProjectivePoint::new(vec![cone(prec), czero(prec)])?, m - finite_deg));
    }
    Ok(out)
}

/// The cluster of zeros of a binary form, repeated by multiplicity.
pub fn binary_form_roots(f: &MultiPoly, prec: u32) -> Result<PointCluster> {
    let set = binary_form_root_set(f, prec)?;
    let pts = set
        .into_iter()
        .flat_map(|(p, k)| std::iter::repeat_n(p, k))
        .collect();
    PointCluster::new(pts)
}

/// All roots of a complex polynomial (no multiplicity detection).
pub fn complex_roots(coeffs: &[Complex], prec: u32) -> Result<Vec<Complex>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(Complex::is_zero) {
        c.pop();
    }
    if c.len() == 1 && c[0].is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let outcome = aberth(&c, prec, 2000);
    let exact: Vec<Complex> = c.iter().map(|x| Complex::with_val(prec, x)).collect();
    Ok(outcome
        .roots
        .iter()
        .map(|r| newton_polish(&exact, r, if outcome.converged { 2 } else { 8 }))
        .collect())
}
