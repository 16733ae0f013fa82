//! Resultants by the subresultant PRS, and exact univariate gcd and
//! squarefree decomposition over the integers.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::poly::MultiPoly;

type Coeffs = Vec<MultiPoly>;

fn trim(p: &mut Coeffs) {
    while p.len() > 1 && p.last().is_some_and(MultiPoly::is_zero) {
        p.pop();
    }
}

fn deg(p: &Coeffs) -> usize {
    p.len() - 1
}

fn is_zero(p: &Coeffs) -> bool {
    p.len() == 1 && p[0].is_zero()
}

/// Pseudo-remainder of `a` by `b` in the main variable.
fn prem(a: &Coeffs, b: &Coeffs) -> Coeffs {
    let nv = b[0].nvars();
    let lb = b.last().expect("nonempty").clone();
    let db = deg(b);
    let mut r = a.clone();
    if deg(&r) < db {
        return r;
    }
    let mut e = deg(a) - db + 1;
    while !is_zero(&r) && deg(&r) >= db {
        let lr = r.last().expect("nonempty").clone();
        let shift = deg(&r) - db;
        let mut next: Coeffs = r.iter().map(|c| c.mul(&lb)).collect();
        for (i, bc) in b.iter().enumerate() {
            next[i + shift] = next[i + shift].sub(&bc.mul(&lr));
        }
        next.pop();
        if next.is_empty() {
            next.push(MultiPoly::zero(nv));
        }
        trim(&mut next);
        r = next;
        e -= 1;
    }
    let f = lb.pow(e as u32);
    r.iter().map(|c| c.mul(&f)).collect()
}

fn div_all(p: &Coeffs, d: &MultiPoly) -> Coeffs {
    p.iter()
        .map(|c| c.div_exact(d).expect("subresultant division is exact"))
        .collect()
}

/// Resultant of `p` and `q` with respect to `x_var`; the result does not
/// involve `x_var`.
///
/// Fails with `InconclusiveElimination` when both leading coefficients in
/// `x_var` are non-constant and vanish simultaneously somewhere, which a
/// change of coordinates resolves; here that case is detected as both
/// leading coefficients being non-constant.
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: usize) -> Result<MultiPoly> {
    if p.nvars() != q.nvars() {
        return Err(Error::DimensionMismatch {
            expected: p.nvars(),
            found: q.nvars(),
        });
    }
    let nv = p.nvars();
    if p.is_zero() || q.is_zero() {
        return Ok(MultiPoly::zero(nv));
    }
    let mut a = p.coeffs_in(var);
    let mut b = q.coeffs_in(var);
    if deg(&a) == 0 || deg(&b) == 0 {
        return Err(Error::Degenerate("resultant needs positive degree in the eliminated variable".into()));
    }
    let lead_const = |c: &Coeffs| c.last().and_then(MultiPoly::total_degree) == Some(0);
    if !lead_const(&a) && !lead_const(&b) {
        return Err(Error::InconclusiveElimination);
    }
    Ok(resultant_coeffs(&mut a, &mut b, nv))
}

/// Resultant without the leading-coefficient guard.
pub fn resultant_unchecked(p: &MultiPoly, q: &MultiPoly, var: usize) -> MultiPoly {
    let nv = p.nvars();
    if p.is_zero() || q.is_zero() {
        return MultiPoly::zero(nv);
    }
    resultant_coeffs(&mut p.coeffs_in(var), &mut q.coeffs_in(var), nv)
}

fn resultant_coeffs(a: &mut Coeffs, b: &mut Coeffs, nv: usize) -> MultiPoly {
    let one = MultiPoly::constant(nv, 1);
    let mut s = 1i32;
    if deg(a) < deg(b) {
        std::mem::swap(a, b);
        if deg(a) % 2 == 1 && deg(b) % 2 == 1 {
            s = -1;
        }
    }
    if deg(b) == 0 {
        let r = b[0].pow(deg(a) as u32);
        return if s < 0 { r.neg() } else { r };
    }
    let mut g = one.clone();
    let mut h = one;
    let (mut a, mut b) = (a.clone(), b.clone());
    loop {
        let delta = deg(&a) - deg(&b);
        if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
            s = -s;
        }
        let r = prem(&a, &b);
        if is_zero(&r) {
            return MultiPoly::zero(nv);
        }
        a = b;
        b = div_all(&r, &g.mul(&h.pow(delta as u32)));
        g = a.last().expect("nonempty").clone();
        h = if delta == 0 {
            h
        } else {
            g.pow(delta as u32).div_exact(&h.pow(delta as u32 - 1)).expect("exact")
        };
        if deg(&b) == 0 {
            let da = deg(&a) as u32;
            let num = b[0].pow(da);
            let res = if da == 0 {
                num
            } else {
                num.div_exact(&h.pow(da - 1)).expect("exact")
            };
            return if s < 0 { res.neg() } else { res };
        }
    }
}

// Univariate integer polynomials, coefficients low to high.

fn utrim(p: &mut Vec<Integer>) {
    while p.len() > 1 && p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
}

fn uzero(p: &[Integer]) -> bool {
    p.iter().all(|c| *c == 0)
}

pub fn ucontent(p: &[Integer]) -> Integer {
    let mut g = Integer::new();
    for c in p {
        g.gcd_mut(c);
    }
    g
}

/// Primitive part with positive leading coefficient.
pub fn uprimitive(p: &[Integer]) -> Vec<Integer> {
    let mut p = p.to_vec();
    utrim(&mut p);
    if uzero(&p) {
        return p;
    }
    let mut g = ucontent(&p);
    if *p.last().expect("nonempty") < 0 {
        g = -g;
    }
    p.iter().map(|c| Integer::from(c.div_exact_ref(&g))).collect()
}

fn uprem(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let db = b.len() - 1;
    let lb = b[db].clone();
    let mut r = a.to_vec();
    utrim(&mut r);
    while !uzero(&r) && r.len() > db {
        let lr = r.last().expect("nonempty").clone();
        let shift = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= Integer::from(bc * &lr);
        }
        r.pop();
        if r.is_empty() {
            r.push(Integer::new());
        }
        utrim(&mut r);
    }
    r
}

/// Primitive gcd over the integers.
pub fn ugcd(a: &[Integer], b: &[Integer]) -> Vec<Integer> {
    let mut a = uprimitive(a);
    let mut b = uprimitive(b);
    if uzero(&a) {
        return b;
    }
    if uzero(&b) {
        return a;
    }
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !uzero(&b) && b.len() > 1 {
        let r = uprem(&a, &b);
        a = b;
        b = uprimitive(&r);
    }
    if uzero(&b) {
        a
    } else {
        vec![Integer::from(1)]
    }
}

/// Exact quotient `a / b` for `b` primitive dividing `a` in `Q[x]`.
pub fn udiv_exact(a: &[Integer], b: &[Integer]) -> Option<Vec<Integer>> {
    let mut r = a.to_vec();
    utrim(&mut r);
    let mut b = b.to_vec();
    utrim(&mut b);
    let db = b.len() - 1;
    if r.len() <= db {
        return if uzero(&r) { Some(vec![Integer::new()]) } else { None };
    }
    let mut q = vec![Integer::new(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].clone();
        if !c.is_divisible(&b[db]) {
            return None;
        }
        let t = Integer::from(c.div_exact_ref(&b[db]));
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= Integer::from(bc * &t);
        }
        q[k] = t;
    }
    if uzero(&r) {
        Some(q)
    } else {
        None
    }
}

pub fn uderivative(p: &[Integer]) -> Vec<Integer> {
    if p.len() <= 1 {
        return vec![Integer::new()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| Integer::from(c * i as u32)).collect()
}

/// Yun's squarefree decomposition: `(factor, multiplicity)` with pairwise
/// coprime squarefree primitive factors of positive degree.
pub fn squarefree(p: &[Integer]) -> Result<Vec<(Vec<Integer>, usize)>> {
    let f = uprimitive(p);
    if uzero(&f) {
        return Err(Error::ZeroPolynomial);
    }
    let mut out = Vec::new();
    if f.len() == 1 {
        return Ok(out);
    }
    let df = uderivative(&f);
    let a0 = ugcd(&f, &df);
    let mut b = rdiv(&to_q(&f), &a0);
    let mut c = rdiv(&to_q(&df), &a0);
    let mut d = rsub(&c, &rderivative(&b));
    let mut i = 1;
    while b.len() > 1 {
        let a = ugcd(&to_z(&b), &to_z(&d));
        if a.len() > 1 {
            out.push((a.clone(), i));
        }
        b = rdiv(&b, &a);
        c = rdiv(&d, &a);
        d = rsub(&c, &rderivative(&b));
        i += 1;
    }
    Ok(out)
}

fn to_q(p: &[Integer]) -> Vec<Rational> {
    p.iter().map(Rational::from).collect()
}

/// Primitive integer multiple of a rational polynomial.
fn to_z(p: &[Rational]) -> Vec<Integer> {
    let mut l = Integer::from(1);
    for c in p {
        l.lcm_mut(c.denom());
    }
    let ints: Vec<Integer> = p.iter().map(|c| Rational::from(c * &l).into_numer_denom().0).collect();
    uprimitive(&ints)
}

fn rtrim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
}

fn rsub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::new(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] -= x;
    }
    rtrim(&mut out);
    out
}

fn rderivative(p: &[Rational]) -> Vec<Rational> {
    if p.len() <= 1 {
        return vec![Rational::new()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u32)).collect()
}

/// Quotient over `Q` of `a` by `b`, which must divide it.
fn rdiv(a: &[Rational], b: &[Integer]) -> Vec<Rational> {
    let mut r = a.to_vec();
    rtrim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![Rational::new()];
    }
    let mut q = vec![Rational::new(); r.len() - db];
    for k in (0..q.len()).rev() {
        let t = Rational::from(&r[k + db] / &b[db]);
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= Rational::from(&t * bc);
        }
        q[k] = t;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    #[test]
    fn resultant_examples() {
        let p = MultiPoly::parse("x^2 - 3*x + 2", 1).unwrap();
        let q = MultiPoly::parse("x - 3", 1).unwrap();
        assert_eq!(resultant(&p, &q, 0).unwrap(), MultiPoly::constant(1, 2));
        let r = MultiPoly::parse("x^2 - 4*x + 3", 1).unwrap();
        assert!(resultant(&p, &r, 0).unwrap().is_zero());
    }

    #[test]
    fn resultant_eliminates_a_variable() {
        // x^2 + y^2 - 2 z^2 and x - y meet where 2 y^2 = 2 z^2
        let f = MultiPoly::parse("x^2 + y^2 - 2*z^2", 3).unwrap();
        let g = MultiPoly::parse("x - y", 3).unwrap();
        let r = resultant(&f, &g, 0).unwrap();
        assert_eq!(r, MultiPoly::parse("2*y^2 - 2*z^2", 3).unwrap());
    }

    #[test]
    fn inconclusive_when_both_leads_vary() {
        let f = MultiPoly::parse("y*z + x", 3).unwrap();
        let g = MultiPoly::parse("x*z + y", 3).unwrap();
        assert!(matches!(resultant(&f, &g, 2), Err(Error::InconclusiveElimination)));
    }

    #[test]
    fn gcd_and_squarefree() {
        // (x-1)^3 (x+2)^2 (x^2+1)
        let p = MultiPoly::parse("x - 1", 1).unwrap();
        let q = MultiPoly::parse("x + 2", 1).unwrap();
        let r = MultiPoly::parse("x^2 + 1", 1).unwrap();
        let f = p.pow(3).mul(&q.pow(2)).mul(&r).scale(&Integer::from(6));
        let sf = squarefree(&f.dehomogenized_coeffs().unwrap()).unwrap();
        assert_eq!(sf.len(), 3);
        assert_eq!(sf[0], (ints(&[1, 0, 1]), 1));
        assert_eq!(sf[1], (ints(&[2, 1]), 2));
        assert_eq!(sf[2], (ints(&[-1, 1]), 3));
        let sf_all = squarefree(&p.pow(3).mul(&q.pow(2)).mul(&r).dehomogenized_coeffs().unwrap()).unwrap();
        assert_eq!(sf_all.iter().map(|(f, m)| (f.len() - 1) * m).sum::<usize>(), 7);
        assert!(sf_all.contains(&(ints(&[-1, 1]), 3)));
        assert_eq!(ugcd(&ints(&[-1, 0, 1]), &ints(&[1, 1])), ints(&[1, 1]));
    }
}
