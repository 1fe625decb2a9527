use planarlab_core::{
    build_alltop_mubs, build_planar_mubs, export_mubs, import_csv, import_json, verify_mub_set,
    Basis, Construction, ExportFormat, Field, Poly,
};

#[test]
fn planar_gf9_json_and_csv() {
    let field = Field::new(3, 2).unwrap();
    let pi = Poly::parse("x^2", &field).unwrap();
    let set = build_planar_mubs(&field, &pi).unwrap();

    let mut json = Vec::new();
    export_mubs(&set, ExportFormat::Json, &mut json).unwrap();
    let back = import_json(std::str::from_utf8(&json).unwrap()).unwrap();
    assert_eq!(back.bases(), set.bases());
    assert_eq!(back.poly().to_string(), "x^2");
    assert!(verify_mub_set(&back).pass);

    let mut csv = Vec::new();
    export_mubs(&set, ExportFormat::Csv, &mut csv).unwrap();
    let back = import_csv(&field, Construction::Planar, pi, csv.as_slice()).unwrap();
    assert_eq!(back.bases(), set.bases());
}

#[test]
fn other_planar_generators() {
    // x^4 = x^(3+1) over GF(27) is planar since 3/gcd(3,1) is odd
    let field = Field::new(3, 3).unwrap();
    let pi = Poly::parse("2*x^4 + x + 1", &field).unwrap();
    let report = verify_mub_set(&build_planar_mubs(&field, &pi).unwrap());
    assert!(report.pass);
    assert_eq!(report.bases, 28);
}

#[test]
fn alltop_gf11_and_tampering() {
    let field = Field::new(11, 1).unwrap();
    let mut set = build_alltop_mubs(&field).unwrap();
    assert!(verify_mub_set(&set).pass);

    if let Basis::Phase { vectors, .. } = &mut set.bases_mut()[5] {
        vectors[0].exponents.swap(0, 1);
    }
    let report = verify_mub_set(&set);
    assert!(!report.pass);
    assert!(report
        .violations
        .iter()
        .all(|v| (v.basis1, v.vector1) == (5, 0) || (v.basis2, v.vector2) == (5, 0)));
}
