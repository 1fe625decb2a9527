//! Arithmetic in GF(p^r) for odd primes `p`.
//!
//! Elements are identified by their canonical encoding `Σ c_i p^i`, where
//! `c_0 + c_1 α + … + c_{r−1} α^{r−1}` is the polynomial-basis representation
//! and `α` is a root of the field modulus. The modulus is the monic irreducible
//! of degree `r` whose low coefficients have the smallest encoding, so a given
//! `(p, r)` always yields the same field.
//!
//! Hot loops work on raw `u32` encodings through [`Field`]; [`FieldElement`]
//! is the checked value type that carries its field along.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binom::LucasTable;

/// Default ceiling on `q = p^r`.
pub const DEFAULT_MAX_ORDER: u64 = 10_000;

/// Addition tables are only built while the low half of an encoding fits this base.
const SPLIT_TABLE_MAX_BASE: u64 = 2048;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("characteristic 2 is not supported")]
    CharTwoUnsupported,
    #[error("extension degree must be at least 1")]
    InvalidDegree,
    #[error("field order {p}^{r} exceeds the bound {bound}")]
    FieldTooLarge { p: u64, r: u32, bound: u64 },
    #[error("elements belong to different fields: GF({0}) and GF({1})")]
    FieldMismatch(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("encoding {enc} is out of range for GF({q})")]
    EncodingOutOfRange { enc: u64, q: u64 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Serializable description of a field: `{"p":…, "r":…, "modulus":[…]}`.
///
/// `modulus` lists the coefficients low-to-high, including the leading 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u32,
    pub r: u32,
    pub modulus: Vec<u32>,
}

#[derive(Debug)]
enum Adder {
    Prime,
    Split {
        lo_base: u32,
        lo: Vec<u32>,
        hi: Vec<u32>,
        hi_base: u32,
    },
    Digits,
}

#[derive(Debug)]
struct Inner {
    spec: FieldSpec,
    q: u32,
    adder: Adder,
    neg: Vec<u32>,
    /// `exp[i] = g^i` for `i < 2(q−1)`, doubled so products skip a reduction.
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    lucas: LucasTable,
}

/// A finite field of odd characteristic. Cheap to clone.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p(), self.r())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        // canonical modulus: (p, r) determines the field
        Arc::ptr_eq(&self.0, &other.0) || (self.p() == other.p() && self.r() == other.r())
    }
}

impl Eq for Field {}

impl Serialize for Field {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.spec.serialize(s)
    }
}

impl Field {
    /// `GF(p^r)` with the default order bound.
    pub fn new(p: u64, r: u32) -> Result<Self, FieldError> {
        Self::with_bound(p, r, DEFAULT_MAX_ORDER)
    }

    pub fn with_bound(p: u64, r: u32, bound: u64) -> Result<Self, FieldError> {
        if r == 0 {
            return Err(FieldError::InvalidDegree);
        }
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if p == 2 {
            return Err(FieldError::CharTwoUnsupported);
        }
        let q = p
            .checked_pow(r)
            .filter(|&q| q <= bound && q <= u32::MAX as u64)
            .ok_or(FieldError::FieldTooLarge { p, r, bound })?;
        let modulus = canonical_modulus(p as u32, r);
        Ok(Field(Arc::new(Inner::build(
            p as u32,
            r,
            q as u32,
            modulus,
            SPLIT_TABLE_MAX_BASE,
        ))))
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self, FieldError> {
        let field = Field::new(spec.p as u64, spec.r)?;
        if field.spec() != spec {
            return Err(FieldError::FieldMismatch(
                field.q() as u64,
                field.q() as u64,
            ));
        }
        Ok(field)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.spec.p
    }

    #[inline]
    pub fn r(&self) -> u32 {
        self.0.spec.r
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.spec.modulus
    }

    /// Primitive element used for the log tables.
    pub fn generator(&self) -> u32 {
        self.0.exp[1]
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let inner = &*self.0;
        match &inner.adder {
            Adder::Prime => {
                let s = a + b;
                if s >= inner.q {
                    s - inner.q
                } else {
                    s
                }
            }
            Adder::Split {
                lo_base,
                lo,
                hi,
                hi_base,
            } => {
                let (al, ah) = (a % lo_base, a / lo_base);
                let (bl, bh) = (b % lo_base, b / lo_base);
                lo[(al * lo_base + bl) as usize] + lo_base * hi[(ah * hi_base + bh) as usize]
            }
            Adder::Digits => add_digitwise(inner.spec.p, a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let inner = &*self.0;
        inner.exp[(inner.log[a as usize] + inner.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> Result<u32, FieldError> {
        if a == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let order = self.q() - 1;
        let l = self.0.log[a as usize];
        Ok(self.0.exp[((order - l) % order) as usize])
    }

    /// `a^n`, with `0^0 = 1`.
    pub fn pow(&self, a: u32, n: u64) -> u32 {
        if n == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let order = (self.q() - 1) as u64;
        let l = self.0.log[a as usize] as u64;
        self.0.exp[((l * (n % order)) % order) as usize]
    }

    /// `a^(p^k)`.
    pub fn frobenius(&self, a: u32, k: u32) -> u32 {
        let k = k % self.r();
        self.pow(a, (self.p() as u64).pow(k))
    }

    /// Absolute trace to the prime field, as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: u32) -> u32 {
        self.0.trace[a as usize]
    }

    /// Binomial coefficients mod the characteristic.
    pub fn lucas(&self) -> &LucasTable {
        &self.0.lucas
    }

    /// All encodings in increasing order.
    pub fn encodings(&self) -> std::ops::Range<u32> {
        0..self.q()
    }

    /// Nonzero encodings in increasing order.
    pub fn nonzero(&self) -> std::ops::Range<u32> {
        1..self.q()
    }

    pub fn element(&self, enc: u32) -> Result<FieldElement, FieldError> {
        if enc >= self.q() {
            return Err(FieldError::EncodingOutOfRange {
                enc: enc as u64,
                q: self.q() as u64,
            });
        }
        Ok(FieldElement {
            field: self.clone(),
            enc,
        })
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            enc: 0,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            field: self.clone(),
            enc: 1,
        }
    }

    /// Every element, in increasing encoding order.
    pub fn enumerate(&self) -> Vec<FieldElement> {
        self.encodings()
            .map(|enc| FieldElement {
                field: self.clone(),
                enc,
            })
            .collect()
    }

    /// Polynomial-basis coefficients of an encoding, low-to-high, length `r`.
    pub fn coefficients(&self, enc: u32) -> Vec<u32> {
        to_digits(self.p(), self.r(), enc)
    }

    pub fn encode(&self, coeffs: &[u32]) -> Result<u32, FieldError> {
        if coeffs.len() > self.r() as usize || coeffs.iter().any(|&c| c >= self.p()) {
            return Err(FieldError::EncodingOutOfRange {
                enc: u64::MAX,
                q: self.q() as u64,
            });
        }
        Ok(from_digits(self.p(), coeffs))
    }

    /// Schoolbook product in `Z_p[x]/(modulus)`, independent of the log tables.
    pub fn mul_reference(&self, a: u32, b: u32) -> u32 {
        mul_polynomial_basis(self.p(), self.modulus(), a, b)
    }

    pub(crate) fn check_same(&self, other: &Field) -> Result<(), FieldError> {
        if self == other {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch(self.q() as u64, other.q() as u64))
        }
    }
}

impl Inner {
    fn build(p: u32, r: u32, q: u32, modulus: Vec<u32>, split_limit: u64) -> Self {
        let adder = if r == 1 {
            Adder::Prime
        } else {
            let r_lo = r.div_ceil(2);
            let lo_base = p.pow(r_lo);
            let hi_base = p.pow(r - r_lo);
            if (lo_base as u64) <= split_limit {
                let table = |base: u32| {
                    let mut t = Vec::with_capacity((base * base) as usize);
                    for a in 0..base {
                        for b in 0..base {
                            t.push(add_digitwise(p, a, b));
                        }
                    }
                    t
                };
                Adder::Split {
                    lo_base,
                    lo: table(lo_base),
                    hi: table(hi_base),
                    hi_base,
                }
            } else {
                Adder::Digits
            }
        };

        let neg = (0..q)
            .map(|a| {
                let d: Vec<u32> = to_digits(p, r, a).iter().map(|&c| (p - c) % p).collect();
                from_digits(p, &d)
            })
            .collect();

        let order = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * order];
        let mut log = vec![0u32; q as usize];
        'candidates: for g in 2..q {
            let mut x = 1u32;
            for (i, slot) in exp.iter_mut().take(order).enumerate() {
                if i > 0 && x == 1 {
                    continue 'candidates;
                }
                *slot = x;
                x = mul_polynomial_basis(p, &modulus, x, g);
            }
            if x == 1 {
                break;
            }
        }
        for i in 0..order {
            exp[order + i] = exp[i];
            log[exp[i] as usize] = i as u32;
        }

        let mut inner = Inner {
            spec: FieldSpec { p, r, modulus },
            q,
            adder,
            neg,
            exp,
            log,
            trace: Vec::new(),
            lucas: LucasTable::new(p as u64).expect("characteristic is prime"),
        };
        let field = Field(Arc::new(inner));
        let trace = (0..q)
            .map(|a| {
                let t = (0..r).fold(0, |acc, i| field.add(acc, field.frobenius(a, i)));
                debug_assert!(t < p, "trace left the prime field");
                t
            })
            .collect();
        inner = Arc::try_unwrap(field.0).expect("unshared during build");
        inner.trace = trace;
        inner
    }
}

fn to_digits(p: u32, r: u32, mut enc: u32) -> Vec<u32> {
    let mut d = Vec::with_capacity(r as usize);
    for _ in 0..r {
        d.push(enc % p);
        enc /= p;
    }
    d
}

fn from_digits(p: u32, digits: &[u32]) -> u32 {
    digits.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn add_digitwise(p: u32, mut a: u32, mut b: u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    while a > 0 || b > 0 {
        out += ((a % p + b % p) % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

fn mul_polynomial_basis(p: u32, modulus: &[u32], a: u32, b: u32) -> u32 {
    let r = modulus.len() - 1;
    let (da, db) = (to_digits(p, r as u32, a), to_digits(p, r as u32, b));
    let pw = p as u64;
    let mut prod = vec![0u64; 2 * r - 1];
    for (i, &x) in da.iter().enumerate() {
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % pw;
        }
    }
    // modulus is monic: x^r ≡ −Σ m_i x^i
    for top in (r..prod.len()).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        prod[top] = 0;
        for (i, &m) in modulus[..r].iter().enumerate() {
            let idx = top - r + i;
            prod[idx] = (prod[idx] + (pw - c) * m as u64) % pw;
        }
    }
    let low: Vec<u32> = prod[..r].iter().map(|&c| c as u32).collect();
    from_digits(p, &low)
}

/// Remainder of `a` modulo the monic `b` over `Z_p`, coefficients low-to-high.
fn poly_rem_monic(p: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut rem: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    let pw = p as u64;
    while rem.len() > db {
        let lead = rem.pop().expect("non-empty");
        if lead == 0 {
            continue;
        }
        let shift = rem.len() - db;
        for (i, &bc) in b[..db].iter().enumerate() {
            rem[shift + i] = (rem[shift + i] + (pw - lead) * bc as u64 % pw) % pw;
        }
    }
    rem.into_iter().map(|c| c as u32).collect()
}

fn monic_with_low(p: u32, degree: u32, low_enc: u64) -> Vec<u32> {
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut e = low_enc;
    for _ in 0..degree {
        coeffs.push((e % p as u64) as u32);
        e /= p as u64;
    }
    coeffs.push(1);
    coeffs
}

/// Irreducibility by trial division against every monic factor of degree `≤ deg/2`.
pub(crate) fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let degree = (poly.len() - 1) as u32;
    for d in 1..=degree / 2 {
        let count = (p as u64).pow(d);
        for low in 0..count {
            let divisor = monic_with_low(p, d, low);
            if poly_rem_monic(p, poly, &divisor).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn canonical_modulus(p: u32, r: u32) -> Vec<u32> {
    let count = (p as u64).pow(r);
    (0..count)
        .map(|low| monic_with_low(p, r, low))
        .find(|m| is_irreducible(p, m))
        .expect("an irreducible polynomial of every degree exists")
}

/// A field element together with its field.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    enc: u32,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@GF({})", self.enc, self.field.q())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.enc)
    }
}

impl FieldElement {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn encoding(&self) -> u32 {
        self.enc
    }

    pub fn coefficients(&self) -> Vec<u32> {
        self.field.coefficients(self.enc)
    }

    pub fn is_zero(&self) -> bool {
        self.enc == 0
    }

    fn with(&self, enc: u32) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            enc,
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.check_same(&other.field)?;
        Ok(self.with(self.field.add(self.enc, other.enc)))
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.check_same(&other.field)?;
        Ok(self.with(self.field.sub(self.enc, other.enc)))
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement, FieldError> {
        self.field.check_same(&other.field)?;
        Ok(self.with(self.field.mul(self.enc, other.enc)))
    }

    pub fn neg(&self) -> FieldElement {
        self.with(self.field.neg(self.enc))
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        Ok(self.with(self.field.inv(self.enc)?))
    }

    pub fn pow(&self, n: u64) -> FieldElement {
        self.with(self.field.pow(self.enc, n))
    }

    pub fn frobenius(&self, k: u32) -> FieldElement {
        self.with(self.field.frobenius(self.enc, k))
    }

    pub fn trace(&self) -> u32 {
        self.field.trace(self.enc)
    }
}
