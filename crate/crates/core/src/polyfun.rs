//! Polynomial functions over GF(q).
//!
//! A [`Poly`] is kept formal: exponents may exceed `q − 1` until
//! [`Poly::reduce`] is called, because statements about the degree of a
//! difference polynomial are statements about the formal degree. Classification
//! work goes through [`ValueTable`] instead, where `Δ_a f` is just
//! `T[x + a] − T[x]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at byte {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("coefficient {value} is out of range for GF({q})")]
    CoefficientOutOfRange { value: u64, q: u32 },
    #[error("scale factor must be nonzero")]
    ZeroScale,
    #[error("{l} is divisible by p = {p}")]
    NotCoprime { l: u64, p: u64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Sparse polynomial `Σ c_e x^e` with nonzero coefficients only.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    field: Field,
    terms: BTreeMap<u64, u32>,
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{:?}]({})", self.field, self)
    }
}

/// Terms in decreasing exponent order, joined by `" + "`.
impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (&e, &c)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match (c, e) {
                (c, 0) => write!(f, "{c}")?,
                (1, 1) => f.write_str("x")?,
                (1, e) => write!(f, "x^{e}")?,
                (c, 1) => write!(f, "{c}*x")?,
                (c, e) => write!(f, "{c}*x^{e}")?,
            }
        }
        Ok(())
    }
}

impl Poly {
    pub fn zero(field: &Field) -> Self {
        Poly {
            field: field.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// `c·x^e` for an encoded coefficient `c`.
    pub fn monomial(field: &Field, coeff: u32, exp: u64) -> Self {
        Self::from_terms(field, [(exp, coeff)])
    }

    /// Builds from `(exponent, encoded coefficient)` pairs, combining like terms.
    ///
    /// Panics on a coefficient outside `[0, q)`.
    pub fn from_terms(field: &Field, terms: impl IntoIterator<Item = (u64, u32)>) -> Self {
        let mut p = Self::zero(field);
        for (e, c) in terms {
            assert!(
                c < field.q(),
                "coefficient {c} out of range for GF({})",
                field.q()
            );
            p.add_term(e, c);
        }
        p
    }

    pub fn parse(text: &str, field: &Field) -> Result<Self, PolyError> {
        Parser::new(text, field).parse()
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Formal degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u64> {
        self.terms.keys().next_back().copied()
    }

    /// Coefficient of `x^e` (zero when absent).
    pub fn coeff(&self, e: u64) -> u32 {
        self.terms.get(&e).copied().unwrap_or(0)
    }

    /// Nonzero terms, increasing exponent.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u64, u32)> + '_ {
        self.terms.iter().map(|(&e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    #[inline]
    fn add_term(&mut self, e: u64, c: u32) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry(e).or_insert(0);
        *slot = self.field.add(*slot, c);
        if *slot == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.field.check_same(&other.field)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        self.scale_enc(self.field.neg(1))
    }

    pub fn scale(&self, c: &FieldElement) -> Result<Poly, PolyError> {
        self.field.check_same(c.field())?;
        Ok(self.scale_enc(c.encoding()))
    }

    pub(crate) fn scale_enc(&self, c: u32) -> Poly {
        let mut out = Poly::zero(&self.field);
        for (e, v) in self.terms() {
            out.add_term(e, self.field.mul(v, c));
        }
        out
    }

    /// Representative of degree `< q` inducing the same function: every
    /// exponent `e ≥ 1` becomes `((e − 1) mod (q − 1)) + 1`.
    pub fn reduce(&self) -> Poly {
        let period = (self.field.q() - 1) as u64;
        let mut out = Poly::zero(&self.field);
        for (e, c) in self.terms() {
            let e = if e == 0 { 0 } else { (e - 1) % period + 1 };
            out.add_term(e, c);
        }
        out
    }

    pub fn is_reduced(&self) -> bool {
        self.degree().is_none_or(|d| d < self.field.q() as u64)
    }

    /// Value at an encoded point.
    pub fn eval_enc(&self, x: u32) -> u32 {
        // Horner across the sparse gaps, highest exponent first
        let f = &self.field;
        let mut acc = 0;
        let mut prev: Option<u64> = None;
        for (e, c) in self.terms().rev() {
            if let Some(pe) = prev {
                acc = f.mul(acc, f.pow(x, pe - e));
            }
            acc = f.add(acc, c);
            prev = Some(e);
        }
        if let Some(last) = prev {
            acc = f.mul(acc, f.pow(x, last));
        }
        acc
    }

    pub fn eval(&self, x: &FieldElement) -> Result<FieldElement, PolyError> {
        self.field.check_same(x.field())?;
        Ok(self.field.element(self.eval_enc(x.encoding()))?)
    }

    pub fn value_table(&self) -> ValueTable {
        let f = &self.field;
        let mut values = vec![0u32; f.q() as usize];
        for (e, c) in self.terms() {
            if e == 0 {
                values.iter_mut().for_each(|v| *v = f.add(*v, c));
                continue;
            }
            for x in f.nonzero() {
                let term = f.mul(c, f.pow(x, e));
                values[x as usize] = f.add(values[x as usize], term);
            }
        }
        ValueTable {
            field: f.clone(),
            values,
        }
    }

    /// `f(s·x + t)` by binomial expansion, for encoded `s` and `t`.
    pub(crate) fn substitute_enc(&self, s: u32, t: u32) -> Poly {
        let f = &self.field;
        let mut out = Poly::zero(f);
        for (n, c) in self.terms() {
            // (s x + t)^n = Σ_k C(n,k) s^k t^(n−k) x^k over the Lucas support
            for (k, binom) in f.lucas().support(n) {
                let coeff = f.mul(f.mul(c, binom as u32), f.mul(f.pow(s, k), f.pow(t, n - k)));
                out.add_term(k, coeff);
            }
        }
        out
    }

    /// Formal difference `f(x + a) − f(x)` for encoded `a`.
    pub fn delta_enc(&self, a: u32) -> Poly {
        let f = &self.field;
        let mut out = Poly::zero(f);
        if a == 0 {
            return out;
        }
        for (n, c) in self.terms() {
            for (k, binom) in f.lucas().support(n) {
                if k == n {
                    continue;
                }
                out.add_term(k, f.mul(f.mul(c, binom as u32), f.pow(a, n - k)));
            }
        }
        out
    }

    /// `Δ_a f = f(x + a) − f(x)`. `a = 0` yields the zero polynomial.
    pub fn delta(&self, a: &FieldElement) -> Result<Poly, PolyError> {
        Ok(self.delta_flagged(a)?.0)
    }

    /// Like [`Poly::delta`], also reporting whether `a` was zero.
    pub fn delta_flagged(&self, a: &FieldElement) -> Result<(Poly, bool), PolyError> {
        self.field.check_same(a.field())?;
        Ok((self.delta_enc(a.encoding()), a.is_zero()))
    }

    /// `ΔΔ_{a,b} f = f(x+a+b) − f(x+b) − f(x+a) + f(x)`.
    pub fn double_delta(&self, a: &FieldElement, b: &FieldElement) -> Result<Poly, PolyError> {
        self.field.check_same(a.field())?;
        self.field.check_same(b.field())?;
        Ok(self.delta_enc(a.encoding()).delta_enc(b.encoding()))
    }

    /// `f(s·x + t)` with `s ≠ 0`.
    pub fn shift_scale(&self, s: &FieldElement, t: &FieldElement) -> Result<Poly, PolyError> {
        self.field.check_same(s.field())?;
        self.field.check_same(t.field())?;
        if s.is_zero() {
            return Err(PolyError::ZeroScale);
        }
        Ok(self.substitute_enc(s.encoding(), t.encoding()))
    }
}

/// Values of a function at every element, indexed by encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueTable {
    field: Field,
    values: Vec<u32>,
}

impl ValueTable {
    /// Panics if `values.len() != q` or any value is out of range.
    pub fn new(field: &Field, values: Vec<u32>) -> Self {
        assert_eq!(
            values.len(),
            field.q() as usize,
            "value table length must be q"
        );
        assert!(values.iter().all(|&v| v < field.q()));
        ValueTable {
            field: field.clone(),
            values,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: u32) -> u32 {
        self.values[x as usize]
    }

    /// Table of `x ↦ T[x + a] − T[x]`.
    pub fn delta(&self, a: u32) -> ValueTable {
        let mut out = Vec::with_capacity(self.values.len());
        self.delta_into(a, &mut out);
        ValueTable {
            field: self.field.clone(),
            values: out,
        }
    }

    pub(crate) fn delta_into(&self, a: u32, out: &mut Vec<u32>) {
        let f = &self.field;
        out.clear();
        out.extend(
            f.encodings()
                .map(|x| f.sub(self.values[f.add(x, a) as usize], self.values[x as usize])),
        );
    }
}

/// Degree of `Δ_a x^n` for `a ≠ 0`: with `n = p^s·m`, `gcd(m, p) = 1`, it is
/// `p^s·(m − 1)`, and zero exactly when `n` is a power of `p`.
pub fn predicted_delta_degree(n: u64, p: u64) -> u64 {
    assert!(n >= 1, "n must be positive");
    let (mut ps, mut m) = (1u64, n);
    while m % p == 0 {
        m /= p;
        ps *= p;
    }
    ps * (m - 1)
}

/// All monomial degrees `n` with `predicted_delta_degree(n, p) = p^s·l`:
/// `{ p^t (p^(s−t) l + 1) : 0 ≤ t ≤ s }`, minus the `t = s` candidate when
/// `p | l + 1` (then `x^(p^s (l+1))` has a strictly smaller difference degree).
pub fn preimage_degrees(s: u32, l: u64, p: u64) -> Result<BTreeSet<u64>, PolyError> {
    if l.is_multiple_of(p) {
        return Err(PolyError::NotCoprime { l, p });
    }
    Ok((0..=s)
        .map(|t| (t, p.pow(s - t) * l + 1))
        .filter(|&(_, m)| m % p != 0)
        .map(|(t, m)| p.pow(t) * m)
        .collect())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: &'a Field,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, field: &'a Field) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            field,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, PolyError> {
        Err(PolyError::SyntaxError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, byte: u8) -> Result<(), PolyError> {
        match self.peek() {
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected '{}'", byte as char)),
        }
    }

    fn number(&mut self) -> Result<u64, PolyError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        digits.parse().or_else(|_| {
            self.pos = start;
            self.err("number too large")
        })
    }

    fn exponent_suffix(&mut self) -> Result<u64, PolyError> {
        self.expect(b'x')?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.number()
        } else {
            Ok(1)
        }
    }

    fn term(&mut self) -> Result<(u64, u32), PolyError> {
        match self.peek() {
            Some(b'x') => Ok((self.exponent_suffix()?, 1)),
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                let value = self.number()?;
                if value >= self.field.q() as u64 {
                    self.pos = start;
                    return Err(PolyError::CoefficientOutOfRange {
                        value,
                        q: self.field.q(),
                    });
                }
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    Ok((self.exponent_suffix()?, value as u32))
                } else {
                    Ok((0, value as u32))
                }
            }
            Some(_) => self.err("expected a term"),
            None => self.err("unexpected end of input"),
        }
    }

    fn parse(mut self) -> Result<Poly, PolyError> {
        let mut poly = Poly::zero(self.field);
        loop {
            let (e, c) = self.term()?;
            poly.add_term(e, c);
            match self.peek() {
                Some(b'+') => self.pos += 1,
                None => return Ok(poly),
                Some(_) => return self.err("expected '+' or end of input"),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64, r: u32) -> Field {
        Field::new(p, r).unwrap()
    }

    fn parse(s: &str, f: &Field) -> Poly {
        Poly::parse(s, f).unwrap()
    }

    #[test]
    fn parse_examples() {
        let f = gf(5, 1);
        assert_eq!(parse("x^3", &f), Poly::monomial(&f, 1, 3));
        assert_eq!(
            parse("2*x^2 + 4", &f),
            Poly::from_terms(&f, [(2, 2), (0, 4)])
        );
        assert_eq!(parse("x^5 + x^5", &f), Poly::monomial(&f, 2, 5));
        assert_eq!(parse(" 3 * x + x ", &f), Poly::monomial(&f, 4, 1));
        assert!(parse("0", &f).is_zero());
        assert!(parse("2*x + 3*x", &f).is_zero());
    }

    #[test]
    fn parse_errors() {
        let f = gf(5, 1);
        assert!(matches!(
            Poly::parse("5*x", &f),
            Err(PolyError::CoefficientOutOfRange { value: 5, q: 5 })
        ));
        for bad in [
            "",
            "x^",
            "x +",
            "2x",
            "x - 1",
            "y",
            "x^^2",
            "3*",
            "x^99999999999999999999",
        ] {
            assert!(
                matches!(Poly::parse(bad, &f), Err(PolyError::SyntaxError { .. })),
                "{bad:?}"
            );
        }
    }

    #[test]
    fn formatting_round_trips() {
        let f = gf(7, 1);
        for s in ["3*x^2 + 3*x + 1", "x^3", "x", "6", "0", "2*x^10 + x^2"] {
            assert_eq!(parse(s, &f).to_string(), s);
        }
    }

    #[test]
    fn reduce_examples() {
        let f = gf(5, 1);
        assert_eq!(parse("x^5", &f).reduce(), parse("x", &f));
        assert_eq!(parse("x^9", &f).reduce(), parse("x", &f));
        assert_eq!(parse("x^3", &f).reduce(), parse("x^3", &f));
        assert_eq!(parse("x^4 + 4*x^8", &f).reduce(), Poly::zero(&f));
        assert_eq!(parse("x^9", &f).value_table(), parse("x", &f).value_table());
    }

    #[test]
    fn evaluation() {
        let f5 = gf(5, 1);
        assert_eq!(parse("x^2", &f5).eval_enc(3), 4);
        assert_eq!(Poly::zero(&f5).eval_enc(2), 0);
        let f7 = gf(7, 1);
        assert_eq!(parse("x^3 + x", &f7).eval_enc(2), 3);
        assert_eq!(parse("4", &f7).eval_enc(0), 4);
        assert_eq!(parse("x^2", &f7).eval_enc(0), 0);
        let mismatch = parse("x", &f7).eval(&f5.element(1).unwrap());
        assert!(matches!(
            mismatch,
            Err(PolyError::Field(FieldError::FieldMismatch(..)))
        ));
    }

    #[test]
    fn table_matches_pointwise_eval() {
        let f = gf(3, 3);
        let p = parse("5*x^26 + 2*x^13 + 11*x^4 + x + 7", &f);
        let t = p.value_table();
        for x in f.encodings() {
            assert_eq!(t.get(x), p.eval_enc(x));
        }
    }

    #[test]
    fn delta_examples() {
        let f = gf(5, 1);
        let one = f.one();
        assert_eq!(parse("x^2", &f).delta(&one).unwrap(), parse("2*x + 1", &f));
        assert_eq!(
            parse("x^3", &f).delta(&one).unwrap(),
            parse("3*x^2 + 3*x + 1", &f)
        );
        let (d, flagged) = parse("x^3", &f).delta_flagged(&f.zero()).unwrap();
        assert!(d.is_zero() && flagged);

        // x^(p^s) differences are the constant a^(p^s)
        let f25 = gf(5, 2);
        for a in f25.nonzero() {
            let d = Poly::monomial(&f25, 1, 25).delta_enc(a);
            assert_eq!(d, Poly::monomial(&f25, f25.pow(a, 25), 0));
            let d = Poly::monomial(&f25, 1, 5).delta_enc(a);
            assert_eq!(d, Poly::monomial(&f25, f25.pow(a, 5), 0));
        }
    }

    #[test]
    fn double_delta_examples() {
        let f5 = gf(5, 1);
        for a in f5.encodings() {
            for b in f5.encodings() {
                let dd = parse("x^2", &f5)
                    .double_delta(&f5.element(a).unwrap(), &f5.element(b).unwrap())
                    .unwrap();
                assert_eq!(dd, Poly::monomial(&f5, (2 * a * b) % 5, 0));
            }
        }
        let f7 = gf(7, 1);
        let one = f7.one();
        let dd = parse("x^3", &f7).double_delta(&one, &one).unwrap();
        assert_eq!(dd, parse("6*x + 6", &f7));
        // oracle: difference the value table twice
        let t = parse("x^3", &f7).value_table().delta(1).delta(1);
        assert_eq!(dd.value_table(), t);
    }

    #[test]
    fn double_delta_char3_fixed_point() {
        for r in 1..=3 {
            let f = gf(3, r);
            let one = f.one();
            for poly in ["x^2", "x^3 + 2*x", "x^4 + x^2 + 1", "2*x^5 + x^7"] {
                let dd = parse(poly, &f).double_delta(&one, &one).unwrap();
                assert_eq!(dd.eval_enc(0), dd.eval_enc(1), "{poly} over GF(3^{r})");
            }
        }
    }

    #[test]
    fn shift_scale_examples() {
        let f = gf(5, 1);
        let cube = parse("x^3", &f);
        for b in f.encodings() {
            let shifted = cube.shift_scale(&f.one(), &f.element(b).unwrap()).unwrap();
            let expect = Poly::from_terms(
                &f,
                [
                    (3, 1),
                    (2, 3 * b % 5),
                    (1, 3 * b * b % 5),
                    (0, b * b * b % 5),
                ],
            );
            assert_eq!(shifted, expect);
        }
        let any = parse("3*x^4 + x + 2", &f);
        assert_eq!(any.shift_scale(&f.one(), &f.zero()).unwrap(), any);
        let sq = parse("x^2", &f).shift_scale(&f.element(2).unwrap(), &f.zero());
        assert_eq!(sq.unwrap(), parse("4*x^2", &f));
        assert_eq!(
            any.shift_scale(&f.zero(), &f.one()),
            Err(PolyError::ZeroScale)
        );
    }

    #[test]
    fn predicted_degrees() {
        assert_eq!(predicted_delta_degree(3, 5), 2);
        assert_eq!(predicted_delta_degree(25, 5), 0);
        assert_eq!(predicted_delta_degree(6, 5), 5);
        assert_eq!(predicted_delta_degree(1, 5), 0);
        assert_eq!(predicted_delta_degree(50, 5), 25);
        // oracle: formal degree over GF(25)
        let f = gf(5, 2);
        assert_eq!(Poly::monomial(&f, 1, 6).delta_enc(1).degree(), Some(5));
    }

    #[test]
    fn preimages() {
        let set = |v: &[u64]| v.iter().copied().collect::<BTreeSet<_>>();
        assert_eq!(preimage_degrees(0, 2, 5).unwrap(), set(&[3]));
        assert_eq!(preimage_degrees(1, 1, 5).unwrap(), set(&[6, 10]));
        assert_eq!(preimage_degrees(2, 1, 3).unwrap(), set(&[10, 12, 18]));
        assert!(preimage_degrees(1, 5, 5).is_err());
        // x^3 over characteristic 3 is additive, not a preimage of degree 2
        assert_eq!(preimage_degrees(0, 2, 3).unwrap(), set(&[]));
        assert_eq!(preimage_degrees(1, 2, 3).unwrap(), set(&[7]));
    }

    #[test]
    fn preimages_invert_prediction() {
        for p in [3u64, 5, 7] {
            for s in 0..3u32 {
                for l in (1..20).filter(|l| l % p != 0) {
                    let target = p.pow(s) * l;
                    let scan: BTreeSet<u64> = (1..=2000)
                        .filter(|&n| predicted_delta_degree(n, p) == target)
                        .collect();
                    let pre = preimage_degrees(s, l, p).unwrap();
                    let within: BTreeSet<u64> =
                        pre.iter().copied().filter(|&n| n <= 2000).collect();
                    assert_eq!(scan, within, "p={p} s={s} l={l}");
                }
            }
        }
    }
}
