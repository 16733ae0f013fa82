//! Intersection points of two plane curves.
//!
//! The last variable is eliminated with a resultant, the resulting binary
//! form is solved numerically, each fibre is resolved by the roots of one
//! curve that also (nearly) lie on the other, and every point is polished
//! by Newton's method on the 2x2 system. A random unit-triangular integer
//! shear is applied when the leading coefficients vanish or a fibre holds
//! more than one point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float, Integer};
use serde::Serialize;

use crate::cluster::{PointCluster, ProjectivePoint};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::mp::{cabs, czero, pow2, DEFAULT_PREC};
use crate::poly::MultiPoly;
use crate::resultant::resultant;
use crate::roots::{binary_form_root_set, complex_roots};

const GUARD_BITS: u32 = 64;

#[derive(Clone, Debug)]
pub struct RootEntry {
    pub point: ProjectivePoint,
    pub multiplicity: usize,
    /// `max(|F(P)| / (h_F |P|^deg F), |G(P)| / (h_G |P|^deg G))` with `h`
    /// the largest coefficient.
    pub residual: Float,
}

#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<RootEntry>,
    /// Shear `T` used for the elimination (`F(T x)` was eliminated).
    pub shear: Vec<Vec<i64>>,
    pub attempts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSetSummary {
    pub points: usize,
    pub total_multiplicity: usize,
    pub max_residual: f64,
    pub attempts: usize,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn max_residual(&self) -> Float {
        let prec = self.roots.first().map_or(DEFAULT_PREC, |r| r.residual.prec());
        self.roots
            .iter()
            .map(|r| r.residual.clone())
            .fold(Float::new(prec), |a, b| if b > a { b } else { a })
    }

    /// Points repeated according to multiplicity.
    pub fn to_cluster(&self) -> Result<PointCluster> {
        PointCluster::new(
            self.roots
                .iter()
                .flat_map(|r| std::iter::repeat_n(r.point.clone(), r.multiplicity))
                .collect(),
        )
    }

    pub fn summary(&self) -> RootSetSummary {
        RootSetSummary {
            points: self.roots.len(),
            total_multiplicity: self.total_multiplicity(),
            max_residual: self.max_residual().to_f64(),
            attempts: self.attempts,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntersectOptions {
    pub prec: u32,
    pub seed: u64,
    pub max_attempts: usize,
}

impl Default for IntersectOptions {
    fn default() -> Self {
        IntersectOptions {
            prec: DEFAULT_PREC,
            seed: 0,
            max_attempts: 12,
        }
    }
}

/// Relative residual of a form at a point.
pub fn form_residual(f: &MultiPoly, p: &[Complex]) -> Float {
    let prec = p[0].prec().0;
    let d = f.total_degree().unwrap_or(0);
    let v = cabs(&f.eval(p));
    let h = Float::with_val(prec, &f.height());
    let n = Float::with_val(prec, norm2(p).sqrt_ref());
    let scale = (Float::with_val(prec, n.ln_ref()) * d).exp();
    v / h / scale
}

fn ints(t: &[Vec<i64>]) -> Vec<Vec<Integer>> {
    t.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect()
}

/// Newton's method on `F = G = 0` in the affine chart where the largest
/// coordinate is fixed to 1; returns the best point found.
fn polish(f: &MultiPoly, g: &MultiPoly, start: &[Complex], prec: u32) -> (Vec<Complex>, Float) {
    let grads_f: Vec<MultiPoly> = (0..3).map(|i| f.derivative(i)).collect();
    let grads_g: Vec<MultiPoly> = (0..3).map(|i| g.derivative(i)).collect();
    let fixed = (0..3)
        .max_by(|&a, &b| cabs(&start[a]).partial_cmp(&cabs(&start[b])).expect("finite"))
        .expect("three coordinates");
    let mut p: Vec<Complex> = start.iter().map(|c| Complex::with_val(prec, c / &start[fixed])).collect();
    let free: Vec<usize> = (0..3).filter(|&i| i != fixed).collect();
    let resid = |p: &[Complex]| form_residual(f, p).max(&form_residual(g, p));
    let mut best = p.clone();
    let mut best_r = resid(&p);
    for _ in 0..60 {
        let fv = f.eval(&p);
        let gv = g.eval(&p);
        let a = grads_f[free[0]].eval(&p);
        let b = grads_f[free[1]].eval(&p);
        let c = grads_g[free[0]].eval(&p);
        let d = grads_g[free[1]].eval(&p);
        let det = Complex::with_val(prec, &a * &d) - Complex::with_val(prec, &b * &c);
        if det.is_zero() {
            break;
        }
        let dx = (Complex::with_val(prec, &d * &fv) - Complex::with_val(prec, &b * &gv)) / &det;
        let dy = (Complex::with_val(prec, &a * &gv) - Complex::with_val(prec, &c * &fv)) / &det;
        p[free[0]] -= &dx;
        p[free[1]] -= &dy;
        let r = resid(&p);
        let step = cabs(&dx).max(&cabs(&dy));
        if r < best_r {
            best_r = r;
            best = p.clone();
        } else if step < pow2(prec, -(prec as i32) / 2) {
            break;
        }
        if step <= pow2(prec, -(prec as i32) + 8) {
            break;
        }
    }
    (best, best_r)
}

enum Attempt {
    Done(Vec<RootEntry>),
    Retry(String),
}

fn try_shear(f: &MultiPoly, g: &MultiPoly, t: &[Vec<i64>], prec: u32) -> Result<Attempt> {
    let df = f.total_degree().unwrap_or(0);
    let dg = g.total_degree().unwrap_or(0);
    let fs = f.substitute(&ints(t))?;
    let gs = g.substitute(&ints(t))?;
    if fs.coeff(&[0, 0, df]) == 0 || gs.coeff(&[0, 0, dg]) == 0 {
        return Ok(Attempt::Retry("vanishing leading coefficient".into()));
    }
    let r = resultant(&fs, &gs, 2)?;
    if r.is_zero() {
        return Err(Error::CommonComponent);
    }
    let r = r.primitive_part();
    let binary = MultiPoly::from_terms(2, r.terms().iter().map(|(e, c)| (vec![e[0], e[1]], c.clone())))?;
    let wprec = prec + GUARD_BITS;
    let fibre_roots = binary_form_root_set(&binary, wprec)?;
    let fs_coeffs = fs.coeffs_in(2);
    let small = pow2(wprec, -(wprec as i32) / 6);
    let same = pow2(wprec, -(wprec as i32) / 8);
    let separation = pow2(wprec, wprec as i32 / 8);
    let tf: Vec<Vec<Complex>> = t
        .iter()
        .map(|r| r.iter().map(|&x| Complex::with_val(wprec, x)).collect())
        .collect();
    let mut out = Vec::new();
    for (ab, mult) in fibre_roots {
        let a = ab.coords()[0].clone();
        let b = ab.coords()[1].clone();
        let zero = czero(wprec);
        let poly_z: Vec<Complex> = fs_coeffs
            .iter()
            .map(|c| c.eval(&[a.clone(), b.clone(), zero.clone()]))
            .collect();
        let zs = complex_roots(&poly_z, wprec)?;
        let mut scored: Vec<(Float, Complex)> = zs
            .into_iter()
            .map(|z| {
                let pt = [a.clone(), b.clone(), z.clone()];
                (form_residual(&gs, &pt), z)
            })
            .collect();
        scored.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        let (best_r, first) = (&scored[0].0, &scored[0].1);
        if *best_r > small {
            return Ok(Attempt::Retry(format!(
                "no common root in a fibre (best residual {:.3e})",
                best_r.to_f64()
            )));
        }
        // other roots of the fibre must be clearly off the second curve
        let scale = cabs(first).max(&Float::with_val(wprec, 1));
        let near = Float::with_val(wprec, &same * &scale);
        let gap = Float::with_val(wprec, best_r * &separation);
        if scored[1..]
            .iter()
            .any(|(r, z)| cabs(&Complex::with_val(wprec, z - first)) > near && *r < gap)
        {
            return Ok(Attempt::Retry("fibre with more than one common point".into()));
        }
        // back to the original coordinates: P = P' T^T
        let ps = [a, b, first.clone()];
        let p: Vec<Complex> = (0..3)
            .map(|i| {
                let mut acc = czero(wprec);
                for (j, v) in ps.iter().enumerate() {
                    acc += Complex::with_val(wprec, &tf[i][j] * v);
                }
                acc
            })
            .collect();
        let (p, res) = polish(f, g, &p, wprec);
        out.push(RootEntry {
            point: ProjectivePoint::new(p.into_iter().map(|c| Complex::with_val(prec, c)).collect())?,
            multiplicity: mult,
            residual: Float::with_val(prec, res),
        });
    }
    let total: usize = out.iter().map(|e| e.multiplicity).sum();
    if total != (df * dg) as usize {
        return Ok(Attempt::Retry(format!("found {total} of {} points", df * dg)));
    }
    Ok(Attempt::Done(out))
}

/// All intersection points of the plane curves `F = 0` and `G = 0`.
pub fn curve_intersection(f: &MultiPoly, g: &MultiPoly, opts: &IntersectOptions) -> Result<RootSet> {
    for p in [f, g] {
        if p.nvars() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: p.nvars(),
            });
        }
        if p.homogeneous_degree()? == 0 {
            return Err(Error::Degenerate("curves need positive degree".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut last = String::new();
    for attempt in 0..opts.max_attempts.max(1) {
        let t: Vec<Vec<i64>> = if attempt == 0 {
            vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]
        } else {
            vec![
                vec![1, rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
                vec![0, 1, rng.gen_range(-3..=3)],
                vec![0, 0, 1],
            ]
        };
        match try_shear(f, g, &t, opts.prec)? {
            Attempt::Done(roots) => {
                return Ok(RootSet {
                    roots,
                    shear: t,
                    attempts: attempt + 1,
                })
            }
            Attempt::Retry(why) => last = why,
        }
    }
    Err(Error::FiberAmbiguity(format!(
        "gave up after {} shears: {last}",
        opts.max_attempts
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 212;

    #[test]
    fn line_pairs_meet_in_four_points() {
        let f = MultiPoly::parse("x^2 - y^2", 3).unwrap();
        let g = MultiPoly::parse("x^2 - z^2", 3).unwrap();
        let rs = curve_intersection(&f, &g, &IntersectOptions::default()).unwrap();
        assert_eq!(rs.roots.len(), 4);
        assert_eq!(rs.total_multiplicity(), 4);
        let tol = Float::with_val(P, 1e-40);
        for (sy, sz) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let q = ProjectivePoint::from_ints(&[1, sy, sz], P).unwrap();
            assert!(rs.roots.iter().any(|r| r.point.approx_eq(&q, &tol)));
        }
        assert!(rs.max_residual() < 1e-50);
    }

    #[test]
    fn tangency_counts_twice() {
        // the line y = 0 is tangent to y z = x^2 at (0:0:1)
        let f = MultiPoly::parse("y*z - x^2", 3).unwrap();
        let g = MultiPoly::parse("y", 3).unwrap();
        let rs = curve_intersection(&f, &g, &IntersectOptions::default()).unwrap();
        assert_eq!(rs.total_multiplicity(), 2);
        assert_eq!(rs.roots.len(), 1);
    }

    #[test]
    fn common_component_is_reported() {
        let f = MultiPoly::parse("x*y + x*z", 3).unwrap();
        let g = MultiPoly::parse("x^2 - x*z", 3).unwrap();
        assert!(matches!(
            curve_intersection(&f, &g, &IntersectOptions::default()),
            Err(Error::CommonComponent)
        ));
    }
}
