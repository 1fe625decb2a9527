//! Semantic classification of polynomial functions.
//!
//! All predicates run on value tables. A function `f` is planar when every
//! difference `x ↦ f(x + a) − f(x)`, `a ≠ 0`, is a bijection, and Alltop-type
//! when every such difference is itself planar. The Alltop test therefore
//! inspects `T[x+a+b] − T[x+b] − T[x+a] + T[x]` for all `a, b ≠ 0`, which costs
//! `O(q³)` lookups in the worst case; the scan stops at the first collision,
//! visiting `a`, then `b`, then `x` in ascending encoding order so witnesses
//! are deterministic.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError};
use crate::polyfun::{Poly, PolyError, ValueTable};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("polynomial is not of Alltop type")]
    NotAlltop,
    #[error("scale factors must be nonzero")]
    ZeroScale,
    #[error("the added polynomial is not additive")]
    NonAdditiveM,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// First counterexample found by a failed classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// `f(x) = f(x2)` with `x < x2`.
    Collision { x: u32, x2: u32 },
    /// `f(x + y) ≠ f(x) + f(y)`.
    NonAdditive { x: u32, y: u32 },
    /// `Δ_a f(x) = Δ_a f(x2)`.
    DeltaCollision { a: u32, x: u32, x2: u32 },
    /// `Δ_b Δ_a f(x) = Δ_b Δ_a f(x2)`.
    DoubleDeltaCollision { a: u32, b: u32, x: u32, x2: u32 },
}

/// Outcome of a classification, with the first violation when it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub verdict: bool,
    pub witness: Option<Witness>,
}

impl Verdict {
    fn from_witness(witness: Option<Witness>) -> Self {
        Verdict {
            verdict: witness.is_none(),
            witness,
        }
    }
}

/// Reusable scratch space for repeated classification over one field.
///
/// Search workers keep one of these per thread so classification allocates
/// nothing per candidate.
pub struct Classifier {
    field: Field,
    stamp: Vec<u32>,
    first: Vec<u32>,
    round: u32,
    delta: Vec<u32>,
}

impl Classifier {
    pub fn new(field: &Field) -> Self {
        let q = field.q() as usize;
        Classifier {
            field: field.clone(),
            stamp: vec![0; q],
            first: vec![0; q],
            round: 0,
            delta: Vec::with_capacity(q),
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn next_round(&mut self) -> u32 {
        self.round = self.round.wrapping_add(1);
        if self.round == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.round = 1;
        }
        self.round
    }

    /// First pair of inputs mapped to the same value.
    pub fn collision(&mut self, values: &[u32]) -> Option<(u32, u32)> {
        let round = self.next_round();
        for (x, &v) in values.iter().enumerate() {
            let v = v as usize;
            if self.stamp[v] == round {
                return Some((self.first[v], x as u32));
            }
            self.stamp[v] = round;
            self.first[v] = x as u32;
        }
        None
    }

    /// First `(a, x, x2)` with `Δ_a` not injective.
    pub fn planar_witness(&mut self, values: &[u32]) -> Option<(u32, u32, u32)> {
        let f = self.field.clone();
        for a in f.nonzero() {
            let round = self.next_round();
            for x in f.encodings() {
                let d = f.sub(values[f.add(x, a) as usize], values[x as usize]) as usize;
                if self.stamp[d] == round {
                    return Some((a, self.first[d], x));
                }
                self.stamp[d] = round;
                self.first[d] = x;
            }
        }
        None
    }

    /// First `(a, b, x, x2)` with `Δ_b Δ_a` not injective.
    pub fn alltop_witness(&mut self, values: &[u32]) -> Option<(u32, u32, u32, u32)> {
        let f = self.field.clone();
        let mut delta = std::mem::take(&mut self.delta);
        let mut found = None;
        'outer: for a in f.nonzero() {
            delta.clear();
            delta.extend(
                f.encodings()
                    .map(|x| f.sub(values[f.add(x, a) as usize], values[x as usize])),
            );
            if let Some((b, x, x2)) = self.planar_witness(&delta) {
                found = Some((a, b, x, x2));
                break 'outer;
            }
        }
        self.delta = delta;
        found
    }

    pub fn is_permutation(&mut self, values: &[u32]) -> bool {
        self.collision(values).is_none()
    }

    pub fn is_planar(&mut self, values: &[u32]) -> bool {
        self.planar_witness(values).is_none()
    }

    pub fn is_alltop(&mut self, values: &[u32]) -> bool {
        self.alltop_witness(values).is_none()
    }

    /// Exhaustive additivity check over all `q²` pairs.
    pub fn additive_witness(&mut self, values: &[u32]) -> Option<(u32, u32)> {
        let f = &self.field;
        for x in f.encodings() {
            for y in f.encodings() {
                let lhs = values[f.add(x, y) as usize];
                let rhs = f.add(values[x as usize], values[y as usize]);
                if lhs != rhs {
                    return Some((x, y));
                }
            }
        }
        None
    }
}

pub fn check_permutation(f: &Poly) -> Verdict {
    let t = f.value_table();
    let w = Classifier::new(f.field()).collision(t.values());
    Verdict::from_witness(w.map(|(x, x2)| Witness::Collision { x, x2 }))
}

pub fn check_additive(f: &Poly) -> Verdict {
    let t = f.value_table();
    let w = Classifier::new(f.field()).additive_witness(t.values());
    Verdict::from_witness(w.map(|(x, y)| Witness::NonAdditive { x, y }))
}

pub fn check_planar(f: &Poly) -> Verdict {
    check_planar_table(&f.value_table())
}

pub fn check_planar_table(t: &ValueTable) -> Verdict {
    let w = Classifier::new(t.field()).planar_witness(t.values());
    Verdict::from_witness(w.map(|(a, x, x2)| Witness::DeltaCollision { a, x, x2 }))
}

pub fn check_alltop(f: &Poly) -> Verdict {
    let t = f.value_table();
    let w = Classifier::new(f.field()).alltop_witness(t.values());
    Verdict::from_witness(w.map(|(a, b, x, x2)| Witness::DoubleDeltaCollision { a, b, x, x2 }))
}

/// `true` iff `f` induces a bijection of the field.
pub fn is_permutation(f: &Poly) -> bool {
    check_permutation(f).verdict
}

/// `true` iff `f(x + y) = f(x) + f(y)` for all pairs.
pub fn is_additive_function(f: &Poly) -> bool {
    check_additive(f).verdict
}

/// `true` iff every nonzero difference `x ↦ f(x + a) − f(x)` is a bijection.
pub fn is_planar(f: &Poly) -> bool {
    check_planar(f).verdict
}

/// `true` iff every nonzero difference of `f` is planar.
pub fn is_alltop(f: &Poly) -> bool {
    check_alltop(f).verdict
}

/// Planarity of `x^(p^k + 1)` over `GF(p^r)`: holds iff `r / gcd(r, k)` is odd.
pub fn is_do_monomial_planar(p: u64, r: u32, k: u32) -> bool {
    assert!(p % 2 == 1, "p must be odd");
    let g = gcd(r, k);
    (r / g) % 2 == 1
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `p^k` for the `k` with `p^k = e`, if any.
fn log_p(e: u64, p: u64) -> Option<u32> {
    let (mut v, mut k) = (1u64, 0u32);
    while v < e {
        v *= p;
        k += 1;
    }
    (v == e).then_some(k)
}

fn is_p_power(e: u64, p: u64) -> bool {
    log_p(e, p).is_some()
}

/// `α·x^(p^k + 1) + M(x) + δ` with `M` additive.
///
/// A shift `α (x + β)^(p^k + 1)` only adds terms in `x^(p^k)`, `x` and the
/// constant, so `β` is folded into `additive_part` and `constant` and is not
/// reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoDecomposition {
    pub k: u32,
    pub alpha: u32,
    pub additive_part: Poly,
    pub constant: u32,
}

impl DoDecomposition {
    pub fn exponent(&self, p: u64) -> u64 {
        p.pow(self.k) + 1
    }

    pub fn reconstruct(&self) -> Poly {
        let field = self.additive_part.field();
        let p = field.p() as u64;
        let head = Poly::from_terms(field, [(self.exponent(p), self.alpha), (0, self.constant)]);
        head.add(&self.additive_part).expect("same field")
    }
}

/// Splits a polynomial into its non-additive part, its additive part and its
/// constant, after reduction.
fn split_additive(g: &Poly) -> (Poly, Poly, u32) {
    let field = g.field();
    let p = field.p() as u64;
    let reduced = g.reduce();
    let constant = reduced.coeff(0);
    let mut core = Vec::new();
    let mut additive = Vec::new();
    for (e, c) in reduced.terms().filter(|&(e, _)| e != 0) {
        if is_p_power(e, p) {
            additive.push((e, c));
        } else {
            core.push((e, c));
        }
    }
    (
        Poly::from_terms(field, core),
        Poly::from_terms(field, additive),
        constant,
    )
}

/// `reduce(f)` with its additive terms and constant removed.
pub fn nonadditive_core(f: &Poly) -> Poly {
    split_additive(f).0
}

/// Decomposes `reduce(g)` as a Dembowski–Ostrom monomial plus an additive
/// polynomial plus a constant, when that shape applies.
pub fn do_decompose(g: &Poly) -> Option<DoDecomposition> {
    let field = g.field();
    let (p, q) = (field.p() as u64, field.q() as u64);
    let (core, additive_part, constant) = split_additive(g);
    if core.num_terms() != 1 {
        return None;
    }
    let (e, alpha) = core.terms().next().expect("one term");
    if e >= q {
        return None;
    }
    let k = log_p(e - 1, p)?;
    Some(DoDecomposition {
        k,
        alpha,
        additive_part,
        constant,
    })
}

/// Syntactic additivity of a reduced polynomial: only `x^(p^i)` terms.
pub fn is_additive_shape(m: &Poly) -> bool {
    let p = m.field().p() as u64;
    let reduced = m.reduce();
    let ok = reduced.terms().all(|(e, _)| e != 0 && is_p_power(e, p));
    ok
}

/// `c·f(s·x + t) + M(x) + d` with `c, s ≠ 0` and `M` additive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivTransform {
    pub c: FieldElement,
    pub s: FieldElement,
    pub t: FieldElement,
    pub m: Poly,
    pub d: FieldElement,
}

impl EquivTransform {
    pub fn identity(field: &Field) -> Self {
        EquivTransform {
            c: field.one(),
            s: field.one(),
            t: field.zero(),
            m: Poly::zero(field),
            d: field.zero(),
        }
    }

    /// Uniform `c, s ∈ F*`, `t, d ∈ F` and `M = Σ_{i<r} m_i x^(p^i)` with uniform `m_i`.
    pub fn random<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> Self {
        let q = field.q();
        let mut pick = |lo: u32| field.element(rng.gen_range(lo..q)).expect("in range");
        let c = pick(1);
        let s = pick(1);
        let t = pick(0);
        let d = pick(0);
        let p = field.p() as u64;
        let m = Poly::from_terms(
            field,
            (0..field.r()).map(|i| (p.pow(i), pick(0).encoding())),
        );
        EquivTransform { c, s, t, m, d }
    }

    pub fn apply(&self, f: &Poly) -> Result<Poly, ClassifyError> {
        apply_equiv_transform(f, &self.c, &self.s, &self.t, &self.m, &self.d)
    }
}

/// Returns `reduce(c·f(s·x + t) + M(x) + d)`.
pub fn apply_equiv_transform(
    f: &Poly,
    c: &FieldElement,
    s: &FieldElement,
    t: &FieldElement,
    m: &Poly,
    d: &FieldElement,
) -> Result<Poly, ClassifyError> {
    let field = f.field();
    for x in [c, d] {
        if x.field() != field {
            return Err(FieldError::FieldMismatch(field.q() as u64, x.field().q() as u64).into());
        }
    }
    if m.field() != field {
        return Err(FieldError::FieldMismatch(field.q() as u64, m.field().q() as u64).into());
    }
    if c.is_zero() || s.is_zero() {
        return Err(ClassifyError::ZeroScale);
    }
    if !is_additive_shape(m) {
        return Err(ClassifyError::NonAdditiveM);
    }
    let out = f
        .shift_scale(s, t)?
        .scale_enc(c.encoding())
        .add(m)?
        .add(&Poly::monomial(field, d.encoding(), 0))?;
    Ok(out.reduce())
}

/// For an Alltop-type `f`: `true` iff every difference `Δ_a f`, `a ≠ 0`,
/// reduces to DO-monomial-plus-additive-plus-constant form.
pub fn alltop_has_do_differences(f: &Poly) -> Result<bool, ClassifyError> {
    if !is_alltop(f) {
        return Err(ClassifyError::NotAlltop);
    }
    Ok(do_differences_decompose(f))
}

/// Decomposition check without the Alltop precondition.
pub(crate) fn do_differences_decompose(f: &Poly) -> bool {
    f.field()
        .nonzero()
        .all(|a| do_decompose(&f.delta_enc(a).reduce()).is_some())
}
