//! Complete sets of mutually unbiased bases in `C^q` built from polynomial
//! phases, and their exact verification.
//!
//! Every vector is `(ω_p^e[x] / √q)_x` and is stored as its exponent table
//! `e`. Two such vectors have `q²·|⟨u|v⟩|²` equal to the squared magnitude of
//! the histogram of `e_v − e_u`, which [`crate::cyclo::mag_sq`] evaluates in
//! integer arithmetic. A set verifies when vectors within a basis are
//! orthonormal (`q²` on the diagonal, `0` off it) and every cross-basis pair
//! gives exactly `q`.

use std::io::{BufRead, Write};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::is_planar;
use crate::cyclo::{mag_sq, phase_histogram, CycVec};
use crate::field::{Field, FieldError, FieldSpec};
use crate::polyfun::{Poly, PolyError};

/// Largest field order accepted by the builders; a set holds `q³` exponents.
pub const MAX_MUB_ORDER: u32 = 343;

#[derive(Debug, Error)]
pub enum MubError {
    #[error("polynomial {0} is not planar")]
    NotPlanar(String),
    #[error("the Alltop construction needs characteristic at least 5, got {0}")]
    CharacteristicTooSmall(u32),
    #[error("q = {0} exceeds the MUB size limit {MAX_MUB_ORDER}")]
    TooLarge(u32),
    #[error("malformed MUB export: {0}")]
    Import(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Planar,
    Alltop,
}

/// `(ω_p^exponents[x] / √q)_x`, indexed by element encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseVector {
    pub exponents: Vec<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    Standard,
    /// `V_a`, vectors indexed by `b`.
    Phase {
        a: u32,
        vectors: Vec<PhaseVector>,
    },
}

#[derive(Debug, Clone)]
pub struct MubSet {
    field: Field,
    construction: Construction,
    poly: Poly,
    bases: Vec<Basis>,
}

impl MubSet {
    /// Assembles a set without checking it; see [`verify_mub_set`].
    pub fn from_parts(
        field: &Field,
        construction: Construction,
        poly: Poly,
        bases: Vec<Basis>,
    ) -> Self {
        MubSet {
            field: field.clone(),
            construction,
            poly,
            bases,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn bases_mut(&mut self) -> &mut [Basis] {
        &mut self.bases
    }

    fn phase_bases(&self) -> impl Iterator<Item = (usize, u32, &[PhaseVector])> {
        self.bases.iter().enumerate().filter_map(|(i, b)| match b {
            Basis::Phase { a, vectors } => Some((i, *a, vectors.as_slice())),
            Basis::Standard => None,
        })
    }
}

fn check_size(field: &Field) -> Result<(), MubError> {
    if field.q() > MAX_MUB_ORDER {
        return Err(MubError::TooLarge(field.q()));
    }
    Ok(())
}

/// Builds the set from a per-`a` phase offset: vector `(a, b)` has exponents
/// `offset_a[x] + tr(b·(x + shift_a))`.
fn build_from_offsets(
    field: &Field,
    construction: Construction,
    poly: Poly,
    offsets: impl Fn(u32) -> (Vec<u32>, u32) + Sync,
) -> MubSet {
    let p = field.p();
    let phase: Vec<Basis> = field
        .encodings()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|a| {
            let (offset, shift) = offsets(a);
            let vectors = field
                .encodings()
                .map(|b| PhaseVector {
                    exponents: field
                        .encodings()
                        .map(|x| {
                            let lin = field.trace(field.mul(b, field.add(x, shift)));
                            ((offset[x as usize] + lin) % p) as u16
                        })
                        .collect(),
                })
                .collect();
            Basis::Phase { a, vectors }
        })
        .collect();
    let mut bases = Vec::with_capacity(phase.len() + 1);
    bases.push(Basis::Standard);
    bases.extend(phase);
    MubSet::from_parts(field, construction, poly, bases)
}

/// Standard basis plus `V_a = {(ω^tr(a·Π(x) + b·x))_x : b}` for every `a`.
pub fn build_planar_mubs(field: &Field, pi: &Poly) -> Result<MubSet, MubError> {
    if pi.field() != field {
        return Err(FieldError::FieldMismatch(field.q() as u64, pi.field().q() as u64).into());
    }
    check_size(field)?;
    if !is_planar(pi) {
        return Err(MubError::NotPlanar(pi.to_string()));
    }
    let table = pi.value_table();
    Ok(build_from_offsets(
        field,
        Construction::Planar,
        pi.clone(),
        |a| {
            let offset = table
                .values()
                .iter()
                .map(|&v| field.trace(field.mul(a, v)))
                .collect();
            (offset, 0)
        },
    ))
}

/// Standard basis plus `V_a = {(ω^tr((x+a)³ + b(x+a)))_x : b}` for every `a`.
pub fn build_alltop_mubs(field: &Field) -> Result<MubSet, MubError> {
    if field.p() < 5 {
        return Err(MubError::CharacteristicTooSmall(field.p()));
    }
    check_size(field)?;
    let cube = Poly::monomial(field, 1, 3);
    let table = cube.value_table();
    Ok(build_from_offsets(field, Construction::Alltop, cube, |a| {
        let offset = field
            .encodings()
            .map(|x| field.trace(table.get(field.add(x, a))))
            .collect();
        (offset, a)
    }))
}

/// One failed check. Indices are positions in [`MubSet::bases`] and within
/// the basis; `found` is the exact `q²·|⟨u|v⟩|²`, or `None` when the inner
/// product's squared magnitude is irrational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub basis1: usize,
    pub vector1: usize,
    pub basis2: usize,
    pub vector2: usize,
    pub expected: u64,
    pub found: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MubReport {
    pub q: u32,
    pub bases: usize,
    pub pass: bool,
    /// Problems with the shape of the set itself (basis counts, lengths, ranges).
    pub structural: Vec<String>,
    pub pairs_checked: u64,
    /// Standard-vs-phase pairs, unbiased because every entry has modulus `1/√q`.
    pub standard_pairs_automatic: u64,
    pub violation_count: u64,
    /// The first violations in check order, at most 100.
    pub violations: Vec<Violation>,
}

/// Cap on recorded violations; counting continues past it.
const MAX_RECORDED_VIOLATIONS: usize = 100;

fn structural_problems(m: &MubSet) -> Vec<String> {
    let q = m.field.q() as usize;
    let p = m.field.p();
    let mut out = Vec::new();
    if m.bases.len() != q + 1 {
        out.push(format!("expected {} bases, found {}", q + 1, m.bases.len()));
    }
    let standard = m
        .bases
        .iter()
        .filter(|b| matches!(b, Basis::Standard))
        .count();
    if standard != 1 {
        out.push(format!("expected one standard basis, found {standard}"));
    }
    for (i, _, vectors) in m.phase_bases() {
        if vectors.len() != q {
            out.push(format!(
                "basis {i} has {} vectors, expected {q}",
                vectors.len()
            ));
        }
        for (j, v) in vectors.iter().enumerate() {
            if v.exponents.len() != q {
                out.push(format!(
                    "basis {i} vector {j} has length {}",
                    v.exponents.len()
                ));
            } else if v.exponents.iter().any(|&e| e as u32 >= p) {
                out.push(format!(
                    "basis {i} vector {j} has an exponent outside [0, {p})"
                ));
            }
        }
    }
    out
}

/// Exact check of orthonormality within bases and unbiasedness across them.
pub fn verify_mub_set(m: &MubSet) -> MubReport {
    let q = m.field.q();
    let p = m.field.p();
    let structural = structural_problems(m);
    let phase: Vec<(usize, &[PhaseVector])> = m.phase_bases().map(|(i, _, v)| (i, v)).collect();
    if !structural.is_empty() {
        return MubReport {
            q,
            bases: m.bases.len(),
            pass: false,
            structural,
            pairs_checked: 0,
            standard_pairs_automatic: 0,
            violation_count: 0,
            violations: Vec::new(),
        };
    }

    let q2 = (q as u64) * (q as u64);
    // rows: (index into phase, checked, violations)
    let per_basis: Vec<(u64, Vec<Violation>)> = (0..phase.len())
        .into_par_iter()
        .map(|bi| {
            let (i1, vs1) = phase[bi];
            let mut checked = 0u64;
            let mut bad = Vec::new();
            for (bj, &(i2, vs2)) in phase.iter().enumerate().skip(bi) {
                for (v1, u) in vs1.iter().enumerate() {
                    let start = if bi == bj { v1 } else { 0 };
                    for (v2, w) in vs2.iter().enumerate().skip(start) {
                        let expected = match (bi == bj, v1 == v2) {
                            (true, true) => q2,
                            (true, false) => 0,
                            (false, _) => q as u64,
                        };
                        checked += 1;
                        let counts = phase_histogram(&u.exponents, &w.exponents, p);
                        let cv = CycVec::from_counts(p, &counts).expect("length p");
                        let found = mag_sq(&cv).value;
                        if found != Some(BigInt::from(expected)) {
                            bad.push(Violation {
                                basis1: i1,
                                vector1: v1,
                                basis2: i2,
                                vector2: v2,
                                expected,
                                found: found.map(|v| v.to_string()),
                            });
                        }
                    }
                }
            }
            (checked, bad)
        })
        .collect();

    let mut pairs_checked = 0;
    let mut violations = Vec::new();
    let mut total_bad = 0usize;
    for (c, bad) in per_basis {
        pairs_checked += c;
        total_bad += bad.len();
        for v in bad {
            if violations.len() < MAX_RECORDED_VIOLATIONS {
                violations.push(v);
            }
        }
    }
    let phase_vectors: u64 = phase.iter().map(|(_, v)| v.len() as u64).sum();
    MubReport {
        q,
        bases: m.bases.len(),
        pass: total_bad == 0,
        structural,
        pairs_checked,
        standard_pairs_automatic: q as u64 * phase_vectors,
        violation_count: total_bad as u64,
        violations,
    }
}

/// [`verify_mub_set`] on a dedicated pool of `workers` threads; `0` uses the
/// global pool. The report does not depend on the worker count.
pub fn verify_mub_set_with(m: &MubSet, workers: usize) -> MubReport {
    if workers == 0 {
        return verify_mub_set(m);
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| verify_mub_set(m)),
        Err(_) => verify_mub_set(m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
    FloatJson,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum BasisRecord<V> {
    Standard { standard: bool },
    Phase { a: u32, vectors: Vec<V> },
}

#[derive(Serialize, Deserialize)]
struct SetRecord<V> {
    field: FieldSpec,
    construction: Construction,
    poly: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    lossy: Option<bool>,
    bases: Vec<BasisRecord<V>>,
}

#[derive(Serialize)]
struct FloatVector {
    entries: Vec<[f64; 2]>,
}

pub fn export_mubs<W: Write>(m: &MubSet, format: ExportFormat, mut out: W) -> Result<(), MubError> {
    match format {
        ExportFormat::Json => {
            let record = SetRecord {
                field: m.field.spec().clone(),
                construction: m.construction,
                poly: m.poly.to_string(),
                lossy: None,
                bases: m
                    .bases
                    .iter()
                    .map(|b| match b {
                        Basis::Standard => BasisRecord::Standard { standard: true },
                        Basis::Phase { a, vectors } => BasisRecord::Phase {
                            a: *a,
                            vectors: vectors.iter().map(|v| v.exponents.as_slice()).collect(),
                        },
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            writeln!(out)?;
        }
        ExportFormat::FloatJson => {
            let p = m.field.p() as f64;
            let amp = 1.0 / (m.field.q() as f64).sqrt();
            let entry = |e: u16| {
                let theta = 2.0 * std::f64::consts::PI * e as f64 / p;
                [amp * theta.cos(), amp * theta.sin()]
            };
            let record = SetRecord {
                field: m.field.spec().clone(),
                construction: m.construction,
                poly: m.poly.to_string(),
                lossy: Some(true),
                bases: m
                    .bases
                    .iter()
                    .map(|b| match b {
                        Basis::Standard => BasisRecord::Standard { standard: true },
                        Basis::Phase { a, vectors } => BasisRecord::Phase {
                            a: *a,
                            vectors: vectors
                                .iter()
                                .map(|v| FloatVector {
                                    entries: v.exponents.iter().map(|&e| entry(e)).collect(),
                                })
                                .collect(),
                        },
                    })
                    .collect(),
            };
            serde_json::to_writer(&mut out, &record)?;
            writeln!(out)?;
        }
        ExportFormat::Csv => {
            write!(out, "basis,b")?;
            for x in 0..m.field.q() {
                write!(out, ",x{x}")?;
            }
            writeln!(out)?;
            for (_, a, vectors) in m.phase_bases() {
                for (b, v) in vectors.iter().enumerate() {
                    write!(out, "{a},{b}")?;
                    for e in &v.exponents {
                        write!(out, ",{e}")?;
                    }
                    writeln!(out)?;
                }
            }
        }
    }
    Ok(())
}

/// Reads the exact JSON export.
pub fn import_json(text: &str) -> Result<MubSet, MubError> {
    let record: SetRecord<Vec<u16>> = serde_json::from_str(text)?;
    if record.lossy == Some(true) {
        return Err(MubError::Import(
            "float-json exports cannot be imported".into(),
        ));
    }
    let field = Field::from_spec(&record.field)?;
    let poly = Poly::parse(&record.poly, &field)?;
    let mut bases = Vec::with_capacity(record.bases.len());
    for b in record.bases {
        bases.push(match b {
            BasisRecord::Standard { standard: true } => Basis::Standard,
            BasisRecord::Standard { standard: false } => {
                return Err(MubError::Import("basis marked \"standard\": false".into()))
            }
            BasisRecord::Phase { a, vectors } => Basis::Phase {
                a,
                vectors: vectors
                    .into_iter()
                    .map(|exponents| PhaseVector { exponents })
                    .collect(),
            },
        });
    }
    Ok(MubSet::from_parts(&field, record.construction, poly, bases))
}

/// Reads a CSV export. The format carries no field, construction or standard
/// basis, so those are supplied by the caller and the standard basis is
/// restored in front.
pub fn import_csv<R: BufRead>(
    field: &Field,
    construction: Construction,
    poly: Poly,
    input: R,
) -> Result<MubSet, MubError> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| MubError::Import("empty input".into()))??;
    let expected_header: Vec<String> = ["basis".to_string(), "b".to_string()]
        .into_iter()
        .chain((0..field.q()).map(|x| format!("x{x}")))
        .collect();
    if header
        .trim_end()
        .split(',')
        .ne(expected_header.iter().map(String::as_str))
    {
        return Err(MubError::Import("unexpected CSV header".into()));
    }
    let mut bases: Vec<Basis> = vec![Basis::Standard];
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Result<Vec<u64>, _> = line.trim_end().split(',').map(str::parse).collect();
        let fields = fields.map_err(|e| MubError::Import(format!("line {}: {e}", lineno + 2)))?;
        if fields.len() != field.q() as usize + 2
            || fields.iter().skip(2).any(|&e| e > u16::MAX as u64)
        {
            return Err(MubError::Import(format!("line {}: bad row", lineno + 2)));
        }
        let a = fields[0] as u32;
        let vector = PhaseVector {
            exponents: fields[2..].iter().map(|&e| e as u16).collect(),
        };
        match bases.last_mut() {
            Some(Basis::Phase { a: last, vectors }) if *last == a => vectors.push(vector),
            _ => bases.push(Basis::Phase {
                a,
                vectors: vec![vector],
            }),
        }
    }
    Ok(MubSet::from_parts(field, construction, poly, bases))
}
