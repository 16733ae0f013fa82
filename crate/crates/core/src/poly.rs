//! Sparse multivariate polynomials with big-integer coefficients.

use std::collections::BTreeMap;
use std::fmt;

use rug::{Complex, Integer};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// Exponent vector to coefficient; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Integer>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: impl Into<Integer>) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c.into());
        p
    }

    /// The variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Integer::from(1));
        p
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Integer)>,
    {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Convenience constructor from `(exponents, coefficient)` pairs.
    pub fn from_i64_terms(nvars: usize, terms: &[(&[u32], i64)]) -> Result<Self> {
        Self::from_terms(nvars, terms.iter().map(|(e, c)| (e.to_vec(), Integer::from(*c))))
    }

    fn add_term(&mut self, e: Vec<u32>, c: Integer) {
        if c == 0 {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v += c;
                if *v == 0 {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, Integer> {
        &self.terms
    }

    pub fn coeff(&self, e: &[u32]) -> Integer {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    /// Degree of a nonzero homogeneous polynomial.
    pub fn homogeneous_degree(&self) -> Result<u32> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !self.is_homogeneous() {
            return Err(Error::NonHomogeneous);
        }
        Ok(self.total_degree().unwrap_or(0))
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    /// Largest absolute coefficient.
    pub fn height(&self) -> Integer {
        self.terms.values().map(|c| Integer::from(c.abs_ref())).max().unwrap_or_default()
    }

    pub fn content(&self) -> Integer {
        let mut g = Integer::new();
        for c in self.terms.values() {
            g.gcd_mut(c);
        }
        g
    }

    /// Divide by the content, with positive leading coefficient.
    pub fn primitive_part(&self) -> MultiPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.leading_coeff() < 0 {
            g = -g;
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), Integer::from(c.div_exact_ref(&g))))
                .collect(),
        }
    }

    /// Coefficient of the lexicographically largest monomial.
    pub fn leading_coeff(&self) -> Integer {
        self.terms.values().next_back().cloned().unwrap_or_default()
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), Integer::from(-c))).collect(),
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), Integer::from(-c));
        }
        p
    }

    pub fn scale(&self, k: &Integer) -> MultiPoly {
        if *k == 0 {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), Integer::from(c * k))).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut p = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, Integer::from(ca * cb));
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = Self::constant(self.nvars, 1);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        let (de, dc) = d.terms.iter().next_back()?;
        let mut rem = self.clone();
        let mut q = Self::zero(self.nvars);
        while let Some((re, rc)) = rem.terms.iter().next_back() {
            if re.iter().zip(de).any(|(a, b)| a < b) {
                return None;
            }
            if !rc.is_divisible(dc) {
                return None;
            }
            let e: Vec<u32> = re.iter().zip(de).map(|(a, b)| a - b).collect();
            let c = Integer::from(rc.div_exact_ref(dc));
            let mut t = Self::zero(self.nvars);
            t.add_term(e, c);
            rem = rem.sub(&t.mul(d));
            q = q.add(&t);
        }
        Some(q)
    }

    pub fn derivative(&self, var: usize) -> MultiPoly {
        let mut p = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut f = e.clone();
                f[var] -= 1;
                p.add_term(f, Integer::from(c * e[var]));
            }
        }
        p
    }

    /// Coefficients of the powers of `x_var` (index = power); each has
    /// exponent zero in `x_var`.
    pub fn coeffs_in(&self, var: usize) -> Vec<MultiPoly> {
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut out = vec![Self::zero(self.nvars); deg + 1];
        for (e, c) in &self.terms {
            let k = e[var] as usize;
            let mut f = e.clone();
            f[var] = 0;
            out[k].add_term(f, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(nvars: usize, var: usize, coeffs: &[MultiPoly]) -> MultiPoly {
        let mut p = Self::zero(nvars);
        for (k, c) in coeffs.iter().enumerate() {
            for (e, v) in &c.terms {
                let mut f = e.clone();
                f[var] += k as u32;
                p.add_term(f, v.clone());
            }
        }
        p
    }

    /// `F(U x)`: variable `i` is replaced by `sum_j U[i][j] x_j`.
    pub fn substitute(&self, u: &[Vec<Integer>]) -> Result<MultiPoly> {
        if u.len() != self.nvars || u.iter().any(|r| r.len() != self.nvars) {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: u.len(),
            });
        }
        let lin: Vec<MultiPoly> = u
            .iter()
            .map(|row| {
                let mut p = Self::zero(self.nvars);
                for (j, c) in row.iter().enumerate() {
                    let mut e = vec![0; self.nvars];
                    e[j] = 1;
                    p.add_term(e, c.clone());
                }
                p
            })
            .collect();
        let mut powers: Vec<Vec<MultiPoly>> = lin.iter().map(|l| vec![Self::constant(self.nvars, 1), l.clone()]).collect();
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            let mut t = Self::constant(self.nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().expect("nonempty").mul(&lin[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][k as usize]);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    pub fn substitute_i64(&self, u: &[Vec<i64>]) -> Result<MultiPoly> {
        let rows: Vec<Vec<Integer>> = u.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect();
        self.substitute(&rows)
    }

    /// Evaluate at a complex point.
    pub fn eval(&self, x: &[Complex]) -> Complex {
        let prec = x.first().map_or(crate::mp::DEFAULT_PREC, |z| z.prec().0);
        let mut powers: Vec<Vec<Complex>> = x.iter().map(|z| vec![crate::mp::cone(prec), z.clone()]).collect();
        let mut acc = crate::mp::czero(prec);
        for (e, c) in &self.terms {
            let mut t = Complex::with_val(prec, c);
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = Complex::with_val(prec, powers[i].last().expect("nonempty") * &x[i]);
                    powers[i].push(next);
                }
                t *= &powers[i][k as usize];
            }
            acc += t;
        }
        acc
    }

    /// Univariate coefficients (low to high) of a one-variable polynomial,
    /// or of `F(x, 1)` for a binary form.
    pub fn dehomogenized_coeffs(&self) -> Result<Vec<Integer>> {
        match self.nvars {
            1 => {
                let deg = self.degree_in(0).unwrap_or(0) as usize;
                let mut out = vec![Integer::new(); deg + 1];
                for (e, c) in &self.terms {
                    out[e[0] as usize] = c.clone();
                }
                Ok(out)
            }
            2 => {
                let deg = self.degree_in(0).unwrap_or(0) as usize;
                let mut out = vec![Integer::new(); deg + 1];
                for (e, c) in &self.terms {
                    out[e[0] as usize] += c;
                }
                Ok(out)
            }
            k => Err(Error::DimensionMismatch { expected: 2, found: k }),
        }
    }

    /// Parse text such as `3*x^2 - x*y + 2 z^2` or `x0^2 x1 - 5`.
    ///
    /// Variables are `x0, x1, ...`; for up to three variables `x, y, z`
    /// may be used as well.
    pub fn parse(s: &str, nvars: usize) -> Result<MultiPoly> {
        Parser {
            s: s.as_bytes(),
            pos: 0,
            nvars,
        }
        .parse()
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .rev()
            .map(|(e, c)| json!({ "exp": e, "coeff": c.to_string() }))
            .collect();
        json!({ "nvars": self.nvars, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<MultiPoly> {
        let nvars = v
            .get("nvars")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("polynomial JSON needs \"nvars\"".into()))? as usize;
        let terms = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("polynomial JSON needs a \"terms\" array".into()))?;
        let mut p = Self::zero(nvars);
        for t in terms {
            let e: Vec<u32> = t
                .get("exp")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term needs \"exp\"".into()))?
                .iter()
                .map(|x| x.as_u64().map(|v| v as u32).ok_or_else(|| Error::Parse("bad exponent".into())))
                .collect::<Result<_>>()?;
            if e.len() != nvars {
                return Err(Error::Parse(format!("exponent vector {e:?} has wrong length")));
            }
            let c = match t.get("coeff") {
                Some(Value::String(s)) => s.trim().parse::<Integer>().map_err(|e| Error::Parse(e.to_string()))?,
                Some(Value::Number(n)) => n.to_string().parse::<Integer>().map_err(|e| Error::Parse(e.to_string()))?,
                _ => return Err(Error::Parse("term needs an integer \"coeff\"".into())),
            };
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn var_name(&self, i: usize) -> String {
        if self.nvars <= 3 {
            ["x", "y", "z"][i].to_string()
        } else {
            format!("x{i}")
        }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = *c < 0;
            let a = Integer::from(c.abs_ref());
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors = Vec::new();
            if a != 1 || e.iter().all(|&x| x == 0) {
                factors.push(a.to_string());
            }
            for (i, &p) in e.iter().enumerate() {
                match p {
                    0 => {}
                    1 => factors.push(self.var_name(i)),
                    _ => factors.push(format!("{}^{p}", self.var_name(i))),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    nvars: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at byte {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<Integer> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .expect("ascii")
            .parse()
            .map_err(|_| self.err("bad integer"))
    }

    fn variable(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let idx = match name {
            "x" => 0,
            "y" => 1,
            "z" => 2,
            _ => name
                .strip_prefix('x')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse(format!("unknown variable {name:?}")))?,
        };
        if idx >= self.nvars {
            return Err(Error::Parse(format!(
                "variable {name:?} out of range for {} variables",
                self.nvars
            )));
        }
        Ok(idx)
    }

    fn term(&mut self) -> Result<(Vec<u32>, Integer)> {
        let mut e = vec![0u32; self.nvars];
        let mut c = Integer::from(1);
        let mut factors = 0;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') if factors > 0 => {
                    self.pos += 1;
                    continue;
                }
                Some(ch) if ch.is_ascii_digit() => {
                    c *= self.number()?;
                }
                Some(ch) if ch.is_ascii_alphabetic() => {
                    let v = self.variable()?;
                    self.skip_ws();
                    let mut k = 1u32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        self.skip_ws();
                        k = self.number()?.to_u32().ok_or_else(|| self.err("exponent too large"))?;
                    }
                    e[v] += k;
                }
                _ => break,
            }
            factors += 1;
        }
        if factors == 0 {
            return Err(self.err("expected a term"));
        }
        Ok((e, c))
    }

    fn parse(mut self) -> Result<MultiPoly> {
        let mut p = MultiPoly::zero(self.nvars);
        let mut first = true;
        loop {
            self.skip_ws();
            if self.pos >= self.s.len() {
                break;
            }
            let mut neg = false;
            let mut signs = 0;
            while let Some(ch @ (b'+' | b'-')) = self.peek() {
                neg ^= ch == b'-';
                signs += 1;
                self.pos += 1;
                self.skip_ws();
            }
            if !first && signs == 0 {
                return Err(self.err("expected '+' or '-'"));
            }
            let (e, c) = self.term()?;
            p.add_term(e, if neg { -c } else { c });
            first = false;
        }
        if first {
            return Err(Error::Parse("empty polynomial".into()));
        }
        Ok(p)
    }
}

/// Determinant of a 3x3 matrix of polynomials.
pub fn det3x3(m: &[Vec<MultiPoly>]) -> MultiPoly {
    let t1 = m[0][0].mul(&m[1][1].mul(&m[2][2]).sub(&m[1][2].mul(&m[2][1])));
    let t2 = m[0][1].mul(&m[1][0].mul(&m[2][2]).sub(&m[1][2].mul(&m[2][0])));
    let t3 = m[0][2].mul(&m[1][0].mul(&m[2][1]).sub(&m[1][1].mul(&m[2][0])));
    t1.sub(&t2).add(&t3)
}

/// Determinant of the matrix of second partial derivatives of a ternary
/// form of degree at least 2.
pub fn hessian(f: &MultiPoly) -> Result<MultiPoly> {
    if f.nvars() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: f.nvars(),
        });
    }
    let d = f.homogeneous_degree()?;
    if d < 2 {
        return Err(Error::Degenerate("Hessian needs degree at least 2".into()));
    }
    let first: Vec<MultiPoly> = (0..3).map(|i| f.derivative(i)).collect();
    let m: Vec<Vec<MultiPoly>> = (0..3).map(|i| (0..3).map(|j| first[i].derivative(j)).collect()).collect();
    Ok(det3x3(&m))
}

/// Matrix of second partials of a ternary quadric (constant entries).
pub fn quadric_matrix(f: &MultiPoly) -> Result<Vec<Vec<Integer>>> {
    if f.nvars() != 3 || f.homogeneous_degree()? != 2 {
        return Err(Error::Degenerate("expected a ternary quadric".into()));
    }
    Ok((0..3)
        .map(|i| {
            (0..3)
                .map(|j| f.derivative(i).derivative(j).coeff(&[0, 0, 0]))
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3(s: &str) -> MultiPoly {
        MultiPoly::parse(s, 3).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let f = p3("3*x^4 - 3 x^3 y + x0 x2^3 - 7");
        assert_eq!(f.to_string(), "3*x^4 - 3*x^3*y + x*z^3 - 7");
        assert_eq!(p3(&f.to_string()), f);
        assert_eq!(MultiPoly::from_json(&f.to_json()).unwrap(), f);
        assert!(MultiPoly::parse("x^2 + w", 3).is_err());
        assert!(MultiPoly::parse("x3", 3).is_err());
        assert!(MultiPoly::parse("", 3).is_err());
        assert!(MultiPoly::parse("x y +", 3).is_err());
    }

    #[test]
    fn hessian_examples() {
        assert_eq!(hessian(&p3("x^3 + y^3 + z^3")).unwrap(), p3("216*x*y*z"));
        let h = hessian(&p3("2*x^2 - x*y + x*z + 2*z^2")).unwrap();
        assert_eq!(h.total_degree(), Some(0));
        assert!(matches!(hessian(&p3("x^2 + y")), Err(Error::NonHomogeneous)));
    }

    #[test]
    fn substitution_examples() {
        let f = p3("390908548757*x^4 - 1083699236751*x^3*y + 835578482044*x^3*z + 1126610184312*x^2*y^2 - 1737329379412*x^2*y*z + 669777678687*x^2*z^2 - 520542386163*x*y^3 + 1204081445939*x*y^2*z - 928398396271*x*y*z^2 + 238611653627*x*z^3 + 90192376558*y^4 - 278168756247*y^3*z + 321720059816*y^2*z^2 - 165373310794*y*z^3 + 31877479532*z^4");
        let u = [vec![-7, 23, -89], vec![-34, 118, -443], vec![-31, 110, -408]];
        let g = f.substitute_i64(&u).unwrap();
        let expect = p3("3*x^4 - 3*x^3*y + 3*x^3*z + x^2*y^2 - 2*x^2*z^2 + x*y^2*z - x*y*z^2 - 2*x*z^3 + 3*y^4 - 3*y^3*z + y^2*z^2 - 3*z^4");
        assert_eq!(g, expect);
        assert_eq!(f.substitute_i64(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap(), f);
        assert!(f.substitute_i64(&[vec![1, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn division_and_content() {
        let a = p3("x^2 - y^2");
        let b = p3("x + y");
        assert_eq!(a.div_exact(&b).unwrap(), p3("x - y"));
        assert!(a.div_exact(&p3("x + 2*y")).is_none());
        let c = p3("-6*x^2 + 4*y");
        assert_eq!(c.content(), 2);
        assert_eq!(c.primitive_part(), p3("3*x^2 - 2*y"));
    }
}
