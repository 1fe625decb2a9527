//! Shared fixtures for the criterion benches.

use planarlab_core::{build_alltop_mubs, build_planar_mubs, Field, MubSet, Poly};

pub fn field(p: u64, r: u32) -> Field {
    Field::new(p, r).expect("valid field")
}

/// Value table of `c·x^n`.
pub fn monomial_table(field: &Field, coeff: u32, n: u64) -> Vec<u32> {
    Poly::monomial(field, coeff, n)
        .value_table()
        .values()
        .to_vec()
}

/// `x^2` with its last value changed: not planar, but differences stay
/// injective on most inputs, so collisions surface late.
pub fn late_failure_table(field: &Field) -> Vec<u32> {
    let mut t = monomial_table(field, 1, 2);
    let last = t.len() - 1;
    t[last] = field.add(t[last], 1);
    t
}

pub fn planar_set(p: u64, r: u32) -> MubSet {
    let f = field(p, r);
    build_planar_mubs(&f, &Poly::monomial(&f, 1, 2)).expect("x^2 is planar")
}

pub fn alltop_set(p: u64, r: u32) -> MubSet {
    build_alltop_mubs(&field(p, r)).expect("p ≥ 5")
}
