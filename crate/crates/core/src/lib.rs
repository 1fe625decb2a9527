//! Polynomial functions over odd-characteristic finite fields `GF(p^r)`.
//!
//! The crate classifies functions as permutation, additive, planar
//! (every difference `f(x + a) − f(x)`, `a ≠ 0`, is a bijection) or of Alltop
//! type (every difference is planar). It builds the complete sets of
//! mutually unbiased bases that planar functions and `x³` give rise to,
//! verifies them in exact cyclotomic arithmetic, and runs exhaustive
//! searches over small polynomial families.
//!
//! ```
//! use planarlab_core::{Field, Poly, is_planar, is_alltop};
//!
//! let f = Field::new(7, 1).unwrap();
//! assert!(is_planar(&Poly::parse("x^2", &f).unwrap()));
//! assert!(is_alltop(&Poly::parse("x^3 + 2*x", &f).unwrap()));
//! ```
//!
//! Field elements are passed around as `u32` encodings `Σ c_i p^i` of their
//! coefficient vectors in the polynomial basis; [`FieldElement`] wraps an
//! encoding together with its field for checked arithmetic.

pub mod binom;
pub mod classify;
pub mod cyclo;
pub mod field;
pub mod mub;
pub mod polyfun;
pub mod search;

pub use binom::{binom_mod_p, nonzero_support, BinomError, LucasBreakdown, LucasTable};
pub use classify::{
    alltop_has_do_differences, apply_equiv_transform, check_additive, check_alltop,
    check_permutation, check_planar, do_decompose, is_additive_function, is_alltop,
    is_do_monomial_planar, is_permutation, is_planar, nonadditive_core, Classifier, ClassifyError,
    DoDecomposition, EquivTransform, Verdict, Witness,
};
pub use cyclo::{char_sum, mag_sq, phase_inner_counts, CycVec, CycloError, MagSqResult};
pub use field::{is_prime, Field, FieldElement, FieldError, FieldSpec};
pub use mub::{
    build_alltop_mubs, build_planar_mubs, export_mubs, import_csv, import_json, verify_mub_set,
    verify_mub_set_with, Basis, Construction, ExportFormat, MubError, MubReport, MubSet,
    PhaseVector, Violation,
};
pub use polyfun::{predicted_delta_degree, preimage_degrees, Poly, PolyError, ValueTable};
pub use search::{
    run_search, verify_alltop_hits_are_cubic, verify_char3_nonexistence,
    verify_monomial_degree_law, Budget, FamilySpec, Mode, SearchError, SearchOptions, SearchReport,
};
