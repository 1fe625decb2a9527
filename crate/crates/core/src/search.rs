//! Exhaustive classification of finite polynomial families.
//!
//! Candidates are numbered in a fixed enumeration order and split into
//! contiguous index ranges, one per worker thread. Each worker owns its value
//! table and [`Classifier`] scratch; hits are merged by candidate index, so the
//! report is identical for every worker count.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::classify::{
    alltop_has_do_differences, is_alltop, is_planar, nonadditive_core, Classifier, ClassifyError,
};
use crate::field::{Field, FieldSpec};
use crate::polyfun::{predicted_delta_degree, Poly};

pub const DEFAULT_CANDIDATE_BUDGET: u64 = 10_000_000;
pub const DEFAULT_OPS_BUDGET: u128 = 10_000_000_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("{candidates} candidates exceed the budget of {limit}")]
    CandidateBudgetExceeded { candidates: u128, limit: u64 },
    #[error("estimated {ops} table operations exceed the budget of {limit}")]
    OpsBudgetExceeded { ops: u128, limit: u128 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("this check needs characteristic {expected}, got {got}")]
    WrongCharacteristic { expected: &'static str, got: u32 },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

impl SearchError {
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            SearchError::CandidateBudgetExceeded { .. } | SearchError::OpsBudgetExceeded { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// `x^n` for `n` in `[2, q−1]`, ascending.
    Monomials,
    /// Every `c_0 + c_1 x + … + c_D x^D`, coefficient vectors `(c_0, …, c_D)`
    /// in lexicographic order of encodings.
    AllReduced { max_deg: u32 },
    /// `(x + b)³` for every `b`, ascending.
    ShiftedCubics,
    /// `x^(p^k + 1)` for `k` in `[0, r)`.
    DoMonomials,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Planar,
    Alltop,
}

impl Mode {
    /// Worst-case table operations to classify one candidate.
    fn cost(self, q: u128) -> u128 {
        match self {
            Mode::Planar => q * q,
            Mode::Alltop => q * q * q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub candidates: u64,
    pub ops: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            candidates: DEFAULT_CANDIDATE_BUDGET,
            ops: DEFAULT_OPS_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchOptions {
    pub budget: Budget,
    /// Worker threads; `0` uses the available parallelism.
    pub workers: usize,
}

impl SearchOptions {
    pub fn workers(&self) -> usize {
        match self.workers {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            n => n,
        }
    }
}

fn serialize_texts<S: Serializer>(polys: &[Poly], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(polys.iter().map(|p| p.to_string()))
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub field: FieldSpec,
    pub family: FamilySpec,
    pub mode: Mode,
    pub tested: u64,
    #[serde(serialize_with = "serialize_texts")]
    pub hits: Vec<Poly>,
    /// Candidate indices of `hits`.
    #[serde(skip)]
    pub hit_indices: Vec<u64>,
    pub elapsed_ms: u64,
}

/// A family bound to a field: counts, builds and evaluates candidates by index.
pub struct Enumeration {
    field: Field,
    family: FamilySpec,
    count: u64,
    /// `x^i` value tables for `i ≤ D`, all-reduced only.
    powers: Vec<Vec<u32>>,
}

impl Enumeration {
    pub fn new(field: &Field, family: FamilySpec) -> Result<Self, SearchError> {
        let q = field.q() as u128;
        let count: u128 = match family {
            FamilySpec::Monomials => q - 2,
            FamilySpec::AllReduced { max_deg } => {
                if max_deg as u128 >= q {
                    return Err(SearchError::InvalidFamily(format!(
                        "degree bound {max_deg} is not below q = {q}"
                    )));
                }
                q.checked_pow(max_deg + 1).unwrap_or(u128::MAX)
            }
            FamilySpec::ShiftedCubics => q,
            FamilySpec::DoMonomials => field.r() as u128,
        };
        let powers = match family {
            FamilySpec::AllReduced { max_deg } if count <= u64::MAX as u128 => (0..=max_deg)
                .map(|i| field.encodings().map(|x| field.pow(x, i as u64)).collect())
                .collect(),
            _ => Vec::new(),
        };
        Ok(Enumeration {
            field: field.clone(),
            family,
            count: count.min(u64::MAX as u128) as u64,
            powers,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn family(&self) -> FamilySpec {
        self.family
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    fn digits(&self, index: u64, max_deg: u32) -> impl Iterator<Item = (u64, u32)> {
        // c_D is the least significant digit, so (c_0, …, c_D) is lexicographic
        let q = self.field.q() as u64;
        let mut rest = index;
        let mut coeffs = vec![0u32; max_deg as usize + 1];
        for c in coeffs.iter_mut().rev() {
            *c = (rest % q) as u32;
            rest /= q;
        }
        coeffs.into_iter().enumerate().map(|(i, c)| (i as u64, c))
    }

    pub fn candidate(&self, index: u64) -> Poly {
        let f = &self.field;
        let p = f.p() as u64;
        match self.family {
            FamilySpec::Monomials => Poly::monomial(f, 1, index + 2),
            FamilySpec::AllReduced { max_deg } => Poly::from_terms(f, self.digits(index, max_deg)),
            FamilySpec::ShiftedCubics => Poly::monomial(f, 1, 3).substitute_enc(1, index as u32),
            FamilySpec::DoMonomials => Poly::monomial(f, 1, p.pow(index as u32) + 1),
        }
    }

    /// Writes the candidate's value table into `out`.
    pub fn values_into(&self, index: u64, out: &mut Vec<u32>) {
        let f = &self.field;
        out.clear();
        match self.family {
            FamilySpec::AllReduced { max_deg } => {
                out.resize(f.q() as usize, 0);
                for (i, c) in self.digits(index, max_deg) {
                    if c == 0 {
                        continue;
                    }
                    for (o, &v) in out.iter_mut().zip(&self.powers[i as usize]) {
                        *o = f.add(*o, f.mul(c, v));
                    }
                }
            }
            FamilySpec::ShiftedCubics => {
                out.extend(f.encodings().map(|x| f.pow(f.add(x, index as u32), 3)));
            }
            _ => {
                let n = match self.family {
                    FamilySpec::Monomials => index + 2,
                    _ => (f.p() as u64).pow(index as u32) + 1,
                };
                out.extend(f.encodings().map(|x| f.pow(x, n)));
            }
        }
    }
}

fn check_budget(e: &Enumeration, mode: Mode, budget: Budget) -> Result<(), SearchError> {
    let n = e.len() as u128;
    if n > budget.candidates as u128 {
        return Err(SearchError::CandidateBudgetExceeded {
            candidates: n,
            limit: budget.candidates,
        });
    }
    let ops = n.saturating_mul(mode.cost(e.field.q() as u128));
    if ops > budget.ops {
        return Err(SearchError::OpsBudgetExceeded {
            ops,
            limit: budget.ops,
        });
    }
    Ok(())
}

fn search_range(e: &Enumeration, mode: Mode, range: std::ops::Range<u64>) -> Vec<u64> {
    let mut classifier = Classifier::new(&e.field);
    let mut values = Vec::with_capacity(e.field.q() as usize);
    range
        .filter(|&i| {
            e.values_into(i, &mut values);
            match mode {
                Mode::Planar => classifier.is_planar(&values),
                Mode::Alltop => classifier.is_alltop(&values),
            }
        })
        .collect()
}

pub fn run_search(
    field: &Field,
    family: FamilySpec,
    mode: Mode,
    opts: &SearchOptions,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    let e = Enumeration::new(field, family)?;
    check_budget(&e, mode, opts.budget)?;
    let n = e.len();
    let workers = (opts.workers() as u64).clamp(1, n.max(1));
    let chunk = n.div_ceil(workers);
    let hit_indices: Vec<u64> = if workers == 1 {
        search_range(&e, mode, 0..n)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let range = (w * chunk).min(n)..((w + 1) * chunk).min(n);
                    let e = &e;
                    scope.spawn(move || search_range(e, mode, range))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("search worker panicked"))
                .collect()
        })
    };
    let hits = hit_indices.iter().map(|&i| e.candidate(i)).collect();
    Ok(SearchReport {
        field: field.spec().clone(),
        family,
        mode,
        tested: n,
        hits,
        hit_indices,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Re-tests a seeded sample of at least 1% of the candidates with the
/// polynomial-level predicates. Returns the indices whose verdict disagrees
/// with the report.
pub fn resample_check(report: &SearchReport, seed: u64) -> Result<Vec<u64>, SearchError> {
    let field = Field::from_spec(&report.field).map_err(ClassifyError::from)?;
    let e = Enumeration::new(&field, report.family)?;
    let n = e.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let amount = n.div_ceil(100).max(1) as usize;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<u64> = sample(&mut rng, n as usize, amount)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .filter(|&i| {
            let poly = e.candidate(i);
            let verdict = match report.mode {
                Mode::Planar => is_planar(&poly),
                Mode::Alltop => is_alltop(&poly),
            };
            verdict != report.hit_indices.binary_search(&i).is_ok()
        })
        .collect())
}

/// Characteristic-3 nonexistence check: passes iff the family has no
/// Alltop-type member.
#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceReport {
    pub pass: bool,
    pub search: SearchReport,
}

pub fn verify_char3_nonexistence(
    field: &Field,
    family: FamilySpec,
    opts: &SearchOptions,
) -> Result<NonexistenceReport, SearchError> {
    if field.p() != 3 {
        return Err(SearchError::WrongCharacteristic {
            expected: "3",
            got: field.p(),
        });
    }
    let search = run_search(field, family, Mode::Alltop, opts)?;
    Ok(NonexistenceReport {
        pass: search.hits.is_empty(),
        search,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeMismatch {
    pub n: u64,
    pub a: u32,
    /// `None` when the difference vanished.
    pub actual: Option<u64>,
    pub predicted: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeLawReport {
    pub field: FieldSpec,
    pub pass: bool,
    pub pairs_checked: u64,
    /// Exponents `n = p^s`, whose differences must be constant.
    pub constant_exponents: Vec<u64>,
    pub mismatches: Vec<DegreeMismatch>,
}

/// Formal `deg Δ_a x^n` against [`predicted_delta_degree`] for every
/// `n ∈ [1, q−1]` and `a ≠ 0`.
pub fn verify_monomial_degree_law(field: &Field) -> DegreeLawReport {
    let p = field.p() as u64;
    let q = field.q() as u64;
    let mut pairs_checked = 0;
    let mut mismatches = Vec::new();
    let mut constant_exponents = Vec::new();
    for n in 1..q {
        let predicted = predicted_delta_degree(n, p);
        let is_prime_power = std::iter::successors(Some(1u64), |&x| Some(x * p))
            .take_while(|&x| x <= n)
            .any(|x| x == n);
        if is_prime_power {
            constant_exponents.push(n);
        }
        let xn = Poly::monomial(field, 1, n);
        for a in field.nonzero() {
            pairs_checked += 1;
            let actual = xn.delta_enc(a).degree();
            let constant_ok = !is_prime_power || actual == Some(0);
            if actual != Some(predicted) || !constant_ok {
                mismatches.push(DegreeMismatch {
                    n,
                    a,
                    actual,
                    predicted,
                });
            }
        }
    }
    DegreeLawReport {
        field: field.spec().clone(),
        pass: mismatches.is_empty(),
        pairs_checked,
        constant_exponents,
        mismatches,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CubicViolation {
    pub poly: String,
    pub do_differences: bool,
    pub core_degree: Option<u64>,
    /// Smallest `j` such that `x^(p^j) ∘ f` passes both conditions, if any.
    pub frobenius_twist: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubicReport {
    pub pass: bool,
    pub search: SearchReport,
    pub violations: Vec<CubicViolation>,
}

/// Searches the family for Alltop-type members and checks that each one has
/// DO-form differences and is a cubic once additive terms and the constant
/// are stripped. Violations are listed, never dropped.
pub fn verify_alltop_hits_are_cubic(
    field: &Field,
    family: FamilySpec,
    opts: &SearchOptions,
) -> Result<CubicReport, SearchError> {
    if field.p() < 5 {
        return Err(SearchError::WrongCharacteristic {
            expected: "at least 5",
            got: field.p(),
        });
    }
    let search = run_search(field, family, Mode::Alltop, opts)?;
    let mut violations = Vec::new();
    for hit in &search.hits {
        let do_differences = alltop_has_do_differences(hit)?;
        let core_degree = nonadditive_core(hit).degree();
        if !do_differences || core_degree != Some(3) {
            let frobenius_twist = (1..field.r()).find(|&j| {
                let g = frobenius_compose(hit, j);
                alltop_has_do_differences(&g).unwrap_or(false)
                    && nonadditive_core(&g).degree() == Some(3)
            });
            violations.push(CubicViolation {
                poly: hit.to_string(),
                do_differences,
                core_degree,
                frobenius_twist,
            });
        }
    }
    Ok(CubicReport {
        pass: violations.is_empty(),
        search,
        violations,
    })
}

/// `f(x)^(p^j)`, reduced.
fn frobenius_compose(f: &Poly, j: u32) -> Poly {
    let field = f.field();
    let pj = (field.p() as u64).pow(j);
    Poly::from_terms(
        field,
        f.terms().map(|(e, c)| (e * pj, field.frobenius(c, j))),
    )
    .reduce()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u64, r: u32) -> Field {
        Field::new(p, r).unwrap()
    }

    fn texts(r: &SearchReport) -> Vec<String> {
        r.hits.iter().map(|p| p.to_string()).collect()
    }

    fn serial() -> SearchOptions {
        SearchOptions {
            workers: 1,
            ..Default::default()
        }
    }

    #[test]
    fn monomial_searches() {
        let f5 = gf(5, 1);
        let r = run_search(&f5, FamilySpec::Monomials, Mode::Planar, &serial()).unwrap();
        assert_eq!((r.tested, texts(&r)), (3, vec!["x^2".to_string()]));
        let r = run_search(&f5, FamilySpec::Monomials, Mode::Alltop, &serial()).unwrap();
        assert_eq!(texts(&r), vec!["x^3"]);
        let r = run_search(&gf(3, 2), FamilySpec::Monomials, Mode::Alltop, &serial()).unwrap();
        assert_eq!(r.tested, 7);
        assert!(r.hits.is_empty());
        // x^6 = x^(5+1) is not planar over GF(25): 2/gcd(2,1) is even
        let r = run_search(&gf(5, 2), FamilySpec::Monomials, Mode::Planar, &serial()).unwrap();
        assert_eq!(r.hits.len(), r.hit_indices.len());
        assert!(texts(&r).contains(&"x^2".to_string()));
        assert!(!texts(&r).contains(&"x^6".to_string()));
    }

    #[test]
    fn family_sizes_and_order() {
        let f = gf(3, 1);
        let e = Enumeration::new(&f, FamilySpec::AllReduced { max_deg: 2 }).unwrap();
        assert_eq!(e.len(), 27);
        assert_eq!(e.candidate(0).to_string(), "0");
        assert_eq!(e.candidate(1).to_string(), "x^2");
        assert_eq!(e.candidate(3).to_string(), "x");
        assert_eq!(e.candidate(26).to_string(), "2*x^2 + 2*x + 2");
        let e = Enumeration::new(&gf(7, 1), FamilySpec::ShiftedCubics).unwrap();
        assert_eq!(e.len(), 7);
        assert_eq!(e.candidate(1).to_string(), "x^3 + 3*x^2 + 3*x + 1");
        let e = Enumeration::new(&gf(3, 4), FamilySpec::DoMonomials).unwrap();
        assert_eq!(e.len(), 4);
        assert_eq!(e.candidate(3).to_string(), "x^28");
        assert!(Enumeration::new(&f, FamilySpec::AllReduced { max_deg: 3 }).is_err());
    }

    #[test]
    fn value_tables_match_evaluation() {
        for (field, family) in [
            (gf(5, 1), FamilySpec::AllReduced { max_deg: 3 }),
            (gf(3, 2), FamilySpec::Monomials),
            (gf(7, 1), FamilySpec::ShiftedCubics),
            (gf(3, 3), FamilySpec::DoMonomials),
        ] {
            let e = Enumeration::new(&field, family).unwrap();
            let mut out = Vec::new();
            for i in 0..e.len() {
                e.values_into(i, &mut out);
                assert_eq!(
                    out,
                    e.candidate(i).value_table().values(),
                    "{family:?} #{i}"
                );
            }
        }
    }

    #[test]
    fn char3_nonexistence() {
        let r =
            verify_char3_nonexistence(&gf(3, 1), FamilySpec::AllReduced { max_deg: 2 }, &serial())
                .unwrap();
        assert!(r.pass);
        assert_eq!(r.search.tested, 27);
        for (r_, tested) in [(2, 7), (3, 25)] {
            let r =
                verify_char3_nonexistence(&gf(3, r_), FamilySpec::Monomials, &serial()).unwrap();
            assert!(r.pass);
            assert_eq!(r.search.tested, tested);
        }
        assert!(verify_char3_nonexistence(&gf(5, 1), FamilySpec::Monomials, &serial()).is_err());
    }

    #[test]
    fn degree_law_small_fields() {
        for (p, r) in [(7, 1), (5, 2), (3, 3)] {
            let rep = verify_monomial_degree_law(&gf(p, r));
            assert!(rep.pass, "{:?}", rep.mismatches);
        }
        let rep = verify_monomial_degree_law(&gf(5, 2));
        assert_eq!(rep.pairs_checked, 24 * 24);
        assert_eq!(rep.constant_exponents, vec![1, 5]);
    }

    #[test]
    fn cubic_check() {
        let r =
            verify_alltop_hits_are_cubic(&gf(7, 1), FamilySpec::ShiftedCubics, &serial()).unwrap();
        assert!(r.pass);
        assert_eq!(r.search.hits.len(), 7);
        // x^15 = (x^3)^5 is Alltop over GF(25) but only a cubic up to Frobenius
        let r = verify_alltop_hits_are_cubic(&gf(5, 2), FamilySpec::Monomials, &serial()).unwrap();
        assert_eq!(texts(&r.search), vec!["x^3", "x^15"]);
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 1);
        let v = &r.violations[0];
        assert_eq!(
            (v.poly.as_str(), v.do_differences, v.core_degree),
            ("x^15", false, Some(15))
        );
        assert_eq!(v.frobenius_twist, Some(1));
    }

    #[test]
    fn worker_counts_agree() {
        let f = gf(5, 1);
        let fam = FamilySpec::AllReduced { max_deg: 4 };
        let base = run_search(&f, fam, Mode::Alltop, &serial()).unwrap();
        assert_eq!(base.hits.len(), 500);
        for workers in [2, 3, 7, 64] {
            let opts = SearchOptions {
                workers,
                ..Default::default()
            };
            let r = run_search(&f, fam, Mode::Alltop, &opts).unwrap();
            assert_eq!(r.hit_indices, base.hit_indices);
        }
    }

    #[test]
    fn budgets() {
        let f = gf(5, 1);
        let tight = SearchOptions {
            budget: Budget {
                candidates: 100,
                ops: DEFAULT_OPS_BUDGET,
            },
            workers: 1,
        };
        let err = run_search(
            &f,
            FamilySpec::AllReduced { max_deg: 4 },
            Mode::Planar,
            &tight,
        )
        .unwrap_err();
        assert!(err.is_budget());
        // 341 candidates at 343³ each is over the default ops budget
        let err =
            run_search(&gf(7, 3), FamilySpec::Monomials, Mode::Alltop, &serial()).unwrap_err();
        assert!(matches!(err, SearchError::OpsBudgetExceeded { .. }));
        let huge = run_search(
            &gf(11, 2),
            FamilySpec::AllReduced { max_deg: 4 },
            Mode::Planar,
            &serial(),
        );
        assert!(matches!(
            huge,
            Err(SearchError::CandidateBudgetExceeded { .. })
        ));
    }

    #[test]
    fn resample_agrees() {
        let f = gf(5, 1);
        let r = run_search(
            &f,
            FamilySpec::AllReduced { max_deg: 4 },
            Mode::Alltop,
            &serial(),
        )
        .unwrap();
        assert!(resample_check(&r, 7).unwrap().is_empty());
        let mut tampered = r.clone();
        tampered.hit_indices = (0..r.tested).collect();
        assert!(!resample_check(&tampered, 7).unwrap().is_empty());
    }
}
