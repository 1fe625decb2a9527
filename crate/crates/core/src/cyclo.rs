//! Exact arithmetic in the cyclotomic integers `Z[ω_p]`, `ω_p = e^(2πi/p)`.
//!
//! A [`CycVec`] is a raw coefficient vector on `1, ω, …, ω^(p−1)`. The only
//! rational relation among these powers is `Σ ω^j = 0`, so two vectors denote
//! the same number iff their difference is constant across all entries.
//!
//! Squared magnitudes follow from the autocorrelation
//! `d_m = Σ_j c_j c_(j+m)`: `|Σ c_j ω^j|² = Σ_m d_m ω^m`, which is a rational
//! integer iff `d_1 = … = d_(p−1)`, and then equals `d_0 − d_1`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::{Field, FieldError};
use crate::polyfun::Poly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycloError {
    #[error("phase tables differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("coefficient vector has length {len}, expected p = {p}")]
    WrongLength { len: usize, p: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone)]
pub struct CycVec {
    p: u32,
    coeffs: Vec<BigInt>,
}

impl PartialEq for CycVec {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p {
            return false;
        }
        let mut diffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b);
        let first = diffs.next().expect("p ≥ 2");
        diffs.all(|d| d == first)
    }
}

impl Eq for CycVec {}

impl CycVec {
    pub fn new(p: u32, coeffs: Vec<BigInt>) -> Result<Self, CycloError> {
        if coeffs.len() != p as usize {
            return Err(CycloError::WrongLength {
                len: coeffs.len(),
                p,
            });
        }
        Ok(CycVec { p, coeffs })
    }

    pub fn from_counts(p: u32, counts: &[u64]) -> Result<Self, CycloError> {
        Self::new(p, counts.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Coefficient of `ω^j` at index `j`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Multiplication by `ω^shift`.
    pub fn rotate(&self, shift: u32) -> CycVec {
        let p = self.p as usize;
        let s = shift as usize % p;
        let mut coeffs = vec![BigInt::zero(); p];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[(j + s) % p] = c.clone();
        }
        CycVec { p: self.p, coeffs }
    }

    /// Floating-point value of the sum, for diagnostics and test oracles only.
    pub fn to_complex(&self) -> (f64, f64) {
        let p = self.p as f64;
        self.coeffs
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (j, c)| {
                let c: f64 = c.to_string().parse().expect("integer");
                let theta = 2.0 * std::f64::consts::PI * j as f64 / p;
                (re + c * theta.cos(), im + c * theta.sin())
            })
    }
}

/// JSON number when it fits in `i64`, decimal string otherwise.
struct BigNum<'a>(&'a BigInt);

impl Serialize for BigNum<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

fn ser_opt_big<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    v.as_ref().map(BigNum).serialize(s)
}

fn ser_big_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(BigNum))
}

impl Serialize for CycVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ser_big_vec(&self.coeffs, s)
    }
}

/// Exact `|v|²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MagSqResult {
    pub is_rational_integer: bool,
    /// `d_0 − d_1` when `is_rational_integer`.
    #[serde(serialize_with = "ser_opt_big")]
    pub value: Option<BigInt>,
    #[serde(serialize_with = "ser_big_vec")]
    pub autocorrelation: Vec<BigInt>,
}

pub fn mag_sq(v: &CycVec) -> MagSqResult {
    let p = v.p as usize;
    let d: Vec<BigInt> = (0..p)
        .map(|m| {
            v.coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c * &v.coeffs[(j + m) % p])
                .sum()
        })
        .collect();
    let is_rational_integer = d[1..].iter().all(|x| *x == d[1]);
    let value = is_rational_integer.then(|| &d[0] - &d[1]);
    debug_assert!(value.as_ref().is_none_or(|x| !x.is_negative()));
    MagSqResult {
        is_rational_integer,
        value,
        autocorrelation: d,
    }
}

/// `Σ_x ω^(tr f(x))` as a count histogram: entry `j` is `#{x : tr f(x) = j}`.
pub fn char_sum(field: &Field, f: &Poly) -> Result<CycVec, CycloError> {
    if f.field() != field {
        return Err(FieldError::FieldMismatch(field.q() as u64, f.field().q() as u64).into());
    }
    let mut counts = vec![0u64; field.p() as usize];
    for &v in f.value_table().values() {
        counts[field.trace(v) as usize] += 1;
    }
    CycVec::from_counts(field.p(), &counts)
}

/// Histogram of `e2[x] − e1[x] mod p`: the unnormalized inner product
/// `Σ_x conj(ω^e1[x]) ω^e2[x]`. Its squared magnitude is `q²·|⟨v1|v2⟩|²`.
pub fn phase_inner_counts(e1: &[u16], e2: &[u16], p: u32) -> Result<CycVec, CycloError> {
    if e1.len() != e2.len() {
        return Err(CycloError::LengthMismatch(e1.len(), e2.len()));
    }
    CycVec::from_counts(p, &phase_histogram(e1, e2, p))
}

pub(crate) fn phase_histogram(e1: &[u16], e2: &[u16], p: u32) -> Vec<u64> {
    let mut counts = vec![0u64; p as usize];
    for (&a, &b) in e1.iter().zip(e2) {
        let j = (b as u32 + p - a as u32) % p;
        counts[j as usize] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::is_planar;
    use proptest::prelude::*;

    fn gf(p: u64, r: u32) -> Field {
        Field::new(p, r).unwrap()
    }

    fn counts(v: &CycVec) -> Vec<i64> {
        v.coeffs()
            .iter()
            .map(|c| c.to_string().parse().unwrap())
            .collect()
    }

    fn int(v: i64) -> Option<BigInt> {
        Some(BigInt::from(v))
    }

    #[test]
    fn char_sum_examples() {
        let f = gf(5, 1);
        assert_eq!(
            counts(&char_sum(&f, &Poly::zero(&f)).unwrap()),
            vec![5, 0, 0, 0, 0]
        );
        let x = Poly::parse("x", &f).unwrap();
        assert_eq!(counts(&char_sum(&f, &x).unwrap()), vec![1, 1, 1, 1, 1]);
        let sq = Poly::parse("x^2", &f).unwrap();
        assert_eq!(counts(&char_sum(&f, &sq).unwrap()), vec![1, 2, 0, 0, 2]);
        assert!(char_sum(&gf(7, 1), &sq).is_err());
    }

    #[test]
    fn mag_sq_examples() {
        let m = mag_sq(&CycVec::from_counts(5, &[1, 2, 0, 0, 2]).unwrap());
        assert_eq!(m.value, int(5));
        let d: Vec<BigInt> = [9, 4, 4, 4, 4].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(m.autocorrelation, d);
        assert_eq!(
            mag_sq(&CycVec::from_counts(7, &[7, 0, 0, 0, 0, 0, 0]).unwrap()).value,
            int(49)
        );
        assert_eq!(
            mag_sq(&CycVec::from_counts(3, &[1, 1, 1]).unwrap()).value,
            int(0)
        );
        let m = mag_sq(&CycVec::from_counts(3, &[1, 0, 0]).unwrap());
        assert_eq!(m.value, int(1));
        let m = mag_sq(&CycVec::from_counts(5, &[2, 1, 0, 0, 0]).unwrap());
        assert!(!m.is_rational_integer);
        assert_eq!(m.value, None);
    }

    #[test]
    fn phase_inner_examples() {
        let e: Vec<u16> = vec![0, 3, 1, 4, 2];
        let same = phase_inner_counts(&e, &e, 5).unwrap();
        assert_eq!(mag_sq(&same).value, int(25));
        let lin: Vec<u16> = e
            .iter()
            .enumerate()
            .map(|(x, &v)| ((v as usize + 2 * x) % 5) as u16)
            .collect();
        assert_eq!(
            mag_sq(&phase_inner_counts(&e, &lin, 5).unwrap()).value,
            int(0)
        );
        assert_eq!(
            phase_inner_counts(&e, &e[..4], 5),
            Err(CycloError::LengthMismatch(5, 4))
        );
    }

    #[test]
    fn planar_sums_have_magnitude_q() {
        for (p, r) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1), (3, 3)] {
            let f = gf(p, r);
            for poly in ["x^2", "3*x^2 + x + 1", "x^4", "x^10"] {
                let Ok(g) = Poly::parse(poly, &f) else {
                    continue;
                };
                if g.is_zero() || !is_planar(&g) {
                    continue;
                }
                let m = mag_sq(&char_sum(&f, &g).unwrap());
                assert_eq!(m.value, int(f.q() as i64), "{poly} over GF({p}^{r})");
            }
        }
    }

    #[test]
    fn json_shape() {
        let v = CycVec::from_counts(5, &[1, 2, 0, 0, 2]).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), "[1,2,0,0,2]");
        let m = serde_json::to_value(mag_sq(&v)).unwrap();
        assert_eq!(m["value"], 5);
        assert_eq!(m["autocorrelation"], serde_json::json!([9, 4, 4, 4, 4]));
        let big = CycVec::new(
            3,
            vec![BigInt::from(u64::MAX) * 4, BigInt::zero(), BigInt::zero()],
        )
        .unwrap();
        assert!(serde_json::to_value(mag_sq(&big)).unwrap()["value"].is_string());
    }

    #[test]
    fn value_equality_ignores_constant_offset() {
        let a = CycVec::from_counts(5, &[1, 2, 0, 0, 2]).unwrap();
        let b = CycVec::from_counts(5, &[4, 5, 3, 3, 5]).unwrap();
        let c = CycVec::from_counts(5, &[4, 5, 3, 3, 4]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(mag_sq(&a).value, mag_sq(&b).value);
    }

    proptest! {
        #[test]
        fn rotation_invariance(v in proptest::collection::vec(0u64..50, 7), s in 0u32..7) {
            let c = CycVec::from_counts(7, &v).unwrap();
            prop_assert_eq!(mag_sq(&c), mag_sq(&c.rotate(s)));
        }

        #[test]
        fn autocorrelation_symmetric(v in proptest::collection::vec(0u64..50, 5)) {
            let m = mag_sq(&CycVec::from_counts(5, &v).unwrap());
            for k in 1..5 {
                prop_assert_eq!(&m.autocorrelation[k], &m.autocorrelation[5 - k]);
            }
            if let Some(val) = &m.value {
                prop_assert!(!val.is_negative());
            }
        }

        #[test]
        fn float_oracle_agrees(v in proptest::collection::vec(0u64..100, 11)) {
            let c = CycVec::from_counts(11, &v).unwrap();
            let (re, im) = c.to_complex();
            let float = re * re + im * im;
            let tol = 1e-6 * float.abs().max(1.0);
            let m = mag_sq(&c);
            // |v|² = Σ_m d_m ω^m is real, so it equals Σ_m d_m cos(2πm/p)
            let from_d: f64 = m.autocorrelation.iter().enumerate().map(|(k, d)| {
                let d: f64 = d.to_string().parse().unwrap();
                d * (2.0 * std::f64::consts::PI * k as f64 / 11.0).cos()
            }).sum();
            prop_assert!((float - from_d).abs() <= tol);
            if let Some(val) = m.value {
                let val: f64 = val.to_string().parse().unwrap();
                prop_assert!((float - val).abs() <= tol);
            }
        }

        #[test]
        fn constant_offsets_are_exact(base in 0u64..50, bump in 0usize..11) {
            // a constant vector plus one spike is a rational integer
            let mut v = vec![base; 11];
            v[bump] += 3;
            let c = CycVec::from_counts(11, &v).unwrap();
            let (re, im) = c.to_complex();
            let m = mag_sq(&c);
            prop_assert_eq!(m.value.clone(), Some(BigInt::from(9)));
            prop_assert!((re * re + im * im - 9.0).abs() <= 1e-6 * 9.0);
        }
    }
}
