//! `planarlab` command-line front end.
//!
//! Every subcommand prints one JSON document on stdout (or text with
//! `--format text`); diagnostics go to stderr. Exit codes: 0 success,
//! 2 usage or input error, 3 budget exceeded, 4 verification failure.

mod args;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use args::{
    BudgetArgs, Cli, Command, ConstructionArg, FamilyArgs, FamilyKind, FieldArgs, Format,
    MubAction, SearchMode, TestMode, VerifyCheck,
};
use planarlab_core::search::resample_check;
use planarlab_core::{
    build_alltop_mubs, build_planar_mubs, char_sum, check_additive, check_alltop,
    check_permutation, check_planar, export_mubs, import_csv, import_json, is_planar, mag_sq,
    run_search, verify_alltop_hits_are_cubic, verify_char3_nonexistence,
    verify_monomial_degree_law, verify_mub_set_with, Budget, Construction, EquivTransform,
    ExportFormat, FamilySpec, Field, LucasTable, Mode, MubSet, Poly, SearchError, SearchOptions,
};

const BUDGET_ENV: &str = "PLANARLAB_BUDGET";
const MAX_TABLE_ORDER: u32 = 49;

enum Failure {
    Input(String),
    Budget(String),
}

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        if e.is_budget() {
            Failure::Budget(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

/// A finished command: its JSON payload, a text rendering, and whether any
/// verification it performed passed.
struct Outcome {
    json: Value,
    text: String,
    pass: bool,
}

impl Outcome {
    fn new(payload: impl Serialize, text: String) -> Self {
        Outcome {
            json: serde_json::to_value(payload).expect("serializable payload"),
            text,
            pass: true,
        }
    }

    fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    /// Output already written (MUB exports).
    fn written() -> Self {
        Outcome {
            json: Value::Null,
            text: String::new(),
            pass: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            if !outcome.json.is_null() {
                if let Err(e) = emit(&cli, outcome.json, &outcome.text) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(4)
            }
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn emit(cli: &Cli, mut json: Value, text: &str) -> io::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.format {
        Format::Text => write!(out, "{text}"),
        _ => {
            if cli.canonical {
                strip_key(&mut json, "elapsed_ms");
            }
            serde_json::to_writer(&mut out, &json)?;
            writeln!(out)
        }
    }
}

fn strip_key(v: &mut Value, key: &str) {
    match v {
        Value::Object(map) => {
            map.remove(key);
            map.values_mut().for_each(|x| strip_key(x, key));
        }
        Value::Array(items) => items.iter_mut().for_each(|x| strip_key(x, key)),
        _ => {}
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if matches!(cli.format, Format::Csv | Format::FloatJson)
        && !matches!(cli.command, Command::Mubs { .. })
    {
        return Err(Failure::Input(
            "csv and float-json apply to `mubs` exports only".into(),
        ));
    }
    match &cli.command {
        Command::FieldInfo { field, table } => cmd_field_info(*field, *table),
        Command::Test { field, poly, mode } => cmd_test(*field, poly, *mode),
        Command::Delta { field, poly, a, b } => cmd_delta(*field, poly, *a, *b),
        Command::Search {
            field,
            family,
            mode,
            budget,
            seed,
        } => cmd_search(cli, *field, *family, *mode, *budget, *seed),
        Command::Verify { check } => cmd_verify(cli, check),
        Command::Mubs {
            field,
            construction,
            pi,
            action,
            input,
            output,
        } => cmd_mubs(
            cli,
            *field,
            *construction,
            pi.as_deref(),
            *action,
            input.as_deref(),
            output.as_deref(),
        ),
        Command::Charsum { field, poly } => cmd_charsum(*field, poly),
        Command::Binom { n, k, p } => cmd_binom(*n, *k, *p),
        Command::Transform {
            field,
            poly,
            seed,
            count,
        } => cmd_transform(*field, poly, *seed, *count),
    }
}

fn make_field(args: FieldArgs) -> Result<Field, Failure> {
    Field::new(args.p, args.r).map_err(Failure::input)
}

fn parse_poly(text: &str, field: &Field) -> Result<Poly, Failure> {
    Poly::parse(text, field).map_err(Failure::input)
}

fn cmd_field_info(args: FieldArgs, table: bool) -> Result<Outcome, Failure> {
    let field = make_field(args)?;
    if table && field.q() > MAX_TABLE_ORDER {
        return Err(Failure::Input(format!(
            "multiplication tables are limited to q ≤ {MAX_TABLE_ORDER}"
        )));
    }
    let prime = make_field(FieldArgs { p: args.p, r: 1 })?;
    let modulus_text = Poly::from_terms(
        &prime,
        field
            .modulus()
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as u64, c)),
    )
    .to_string();
    let mul_table: Option<Vec<Vec<u32>>> = table.then(|| {
        field
            .encodings()
            .map(|a| field.encodings().map(|b| field.mul(a, b)).collect())
            .collect()
    });
    let mut text = format!(
        "GF({}^{}): q = {}\nmodulus: {}\ngenerator: {}\n",
        field.p(),
        field.r(),
        field.q(),
        modulus_text,
        field.generator()
    );
    if let Some(rows) = &mul_table {
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>3}")).collect();
            let _ = writeln!(text, "{}", cells.join(""));
        }
    }
    let mut payload = json!({
        "p": field.p(),
        "r": field.r(),
        "q": field.q(),
        "modulus": field.modulus(),
        "modulus_text": modulus_text,
        "generator": field.generator(),
    });
    if let Some(rows) = mul_table {
        payload["mul_table"] = json!(rows);
    }
    Ok(Outcome::new(payload, text))
}

fn cmd_test(args: FieldArgs, poly: &str, mode: TestMode) -> Result<Outcome, Failure> {
    let field = make_field(args)?;
    let f = parse_poly(poly, &field)?;
    let verdict = match mode {
        TestMode::Permutation => check_permutation(&f),
        TestMode::Additive => check_additive(&f),
        TestMode::Planar => check_planar(&f),
        TestMode::Alltop => check_alltop(&f),
    };
    let mut text = format!("{}\n", verdict.verdict);
    if let Some(w) = &verdict.witness {
        let _ = writeln!(text, "witness: {w:?}");
    }
    Ok(Outcome::new(verdict, text))
}

fn cmd_delta(args: FieldArgs, poly: &str, a: u32, b: Option<u32>) -> Result<Outcome, Failure> {
    let field = make_field(args)?;
    let f = parse_poly(poly, &field)?;
    let ea = field.element(a).map_err(Failure::input)?;
    let d = match b {
        Some(b) => {
            let eb = field.element(b).map_err(Failure::input)?;
            f.double_delta(&ea, &eb)
        }
        None => f.delta(&ea),
    }
    .map_err(Failure::input)?;
    let text = format!("{d}\n");
    let payload = json!({
        "poly": f.to_string(),
        "a": a,
        "b": b,
        "delta": d.to_string(),
    });
    Ok(Outcome::new(payload, text))
}

fn family_spec(args: FamilyArgs) -> Result<FamilySpec, Failure> {
    match (args.family, args.max_deg) {
        (FamilyKind::AllReduced, Some(max_deg)) => Ok(FamilySpec::AllReduced { max_deg }),
        (FamilyKind::AllReduced, None) => Err(Failure::Input(
            "--family all-reduced needs --max-deg".into(),
        )),
        (_, Some(_)) => Err(Failure::Input(
            "--max-deg applies to all-reduced only".into(),
        )),
        (FamilyKind::Monomials, None) => Ok(FamilySpec::Monomials),
        (FamilyKind::ShiftedCubics, None) => Ok(FamilySpec::ShiftedCubics),
        (FamilyKind::DoMonomials, None) => Ok(FamilySpec::DoMonomials),
    }
}

fn search_options(cli: &Cli, args: BudgetArgs) -> Result<SearchOptions, Failure> {
    let mut budget = Budget::default();
    match args.budget {
        Some(b) => budget.candidates = b,
        None => {
            if let Ok(v) = std::env::var(BUDGET_ENV) {
                budget.candidates = v
                    .trim()
                    .parse()
                    .map_err(|_| Failure::Input(format!("{BUDGET_ENV}={v} is not a count")))?;
            }
        }
    }
    if let Some(ops) = args.max_ops {
        budget.ops = ops;
    }
    Ok(SearchOptions {
        budget,
        workers: cli.workers,
    })
}

fn hits_text(hits: &[Poly]) -> String {
    hits.iter()
        .map(|h| h.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_search(
    cli: &Cli,
    field_args: FieldArgs,
    family: FamilyArgs,
    mode: SearchMode,
    budget: BudgetArgs,
    seed: u64,
) -> Result<Outcome, Failure> {
    let field = make_field(field_args)?;
    let family = family_spec(family)?;
    let opts = search_options(cli, budget)?;
    let mode = match mode {
        SearchMode::Planar => Mode::Planar,
        SearchMode::Alltop => Mode::Alltop,
    };
    let report = run_search(&field, family, mode, &opts)?;
    let mismatches = resample_check(&report, seed)?;
    if !mismatches.is_empty() {
        eprintln!("resample check disagrees at candidates {mismatches:?}");
    }
    let text = format!(
        "tested {} candidates in {} ms\n{} hits: {}\n",
        report.tested,
        report.elapsed_ms,
        report.hits.len(),
        hits_text(&report.hits)
    );
    Ok(Outcome::new(&report, text).with_pass(mismatches.is_empty()))
}

fn cmd_verify(cli: &Cli, check: &VerifyCheck) -> Result<Outcome, Failure> {
    match check {
        VerifyCheck::Char3 {
            field,
            family,
            budget,
        } => {
            let field = make_field(*field)?;
            let report = verify_char3_nonexistence(
                &field,
                family_spec(*family)?,
                &search_options(cli, *budget)?,
            )?;
            let text = format!(
                "{}: {} tested, {} Alltop hits\n",
                if report.pass { "pass" } else { "FAIL" },
                report.search.tested,
                report.search.hits.len()
            );
            let pass = report.pass;
            Ok(Outcome::new(report, text).with_pass(pass))
        }
        VerifyCheck::DegreeLaw { field } => {
            let field = make_field(*field)?;
            let report = verify_monomial_degree_law(&field);
            let mut text = format!(
                "{}: {} (n, a) pairs, {} mismatches\n",
                if report.pass { "pass" } else { "FAIL" },
                report.pairs_checked,
                report.mismatches.len()
            );
            for m in report.mismatches.iter().take(20) {
                let _ = writeln!(
                    text,
                    "  n = {}, a = {}: degree {:?}, predicted {}",
                    m.n, m.a, m.actual, m.predicted
                );
            }
            let pass = report.pass;
            Ok(Outcome::new(report, text).with_pass(pass))
        }
        VerifyCheck::Cubic {
            field,
            family,
            budget,
        } => {
            let field = make_field(*field)?;
            let report = verify_alltop_hits_are_cubic(
                &field,
                family_spec(*family)?,
                &search_options(cli, *budget)?,
            )?;
            let mut text = format!(
                "{}: {} tested, {} Alltop hits, {} violations\n",
                if report.pass { "pass" } else { "FAIL" },
                report.search.tested,
                report.search.hits.len(),
                report.violations.len()
            );
            for v in &report.violations {
                let _ = writeln!(
                    text,
                    "  {}: DO differences {}, core degree {:?}, Frobenius twist {:?}",
                    v.poly, v.do_differences, v.core_degree, v.frobenius_twist
                );
            }
            let pass = report.pass;
            Ok(Outcome::new(report, text).with_pass(pass))
        }
    }
}

fn construction_of(c: ConstructionArg) -> Construction {
    match c {
        ConstructionArg::Planar => Construction::Planar,
        ConstructionArg::Alltop => Construction::Alltop,
    }
}

/// Generator named by the flags: `--pi` for planar, `x^3` for Alltop.
fn generator(
    field: &Field,
    construction: ConstructionArg,
    pi: Option<&str>,
) -> Result<Poly, Failure> {
    match (construction, pi) {
        (ConstructionArg::Planar, Some(text)) => parse_poly(text, field),
        (ConstructionArg::Planar, None) => {
            Err(Failure::Input("the planar construction needs --pi".into()))
        }
        (ConstructionArg::Alltop, None) => Ok(Poly::monomial(field, 1, 3)),
        (ConstructionArg::Alltop, Some(_)) => Err(Failure::Input(
            "--pi applies to the planar construction only".into(),
        )),
    }
}

fn build_set(field: &Field, construction: ConstructionArg, gen: &Poly) -> Result<MubSet, Failure> {
    match construction {
        ConstructionArg::Planar => build_planar_mubs(field, gen),
        ConstructionArg::Alltop => build_alltop_mubs(field),
    }
    .map_err(Failure::input)
}

fn load_set(
    path: &Path,
    csv: bool,
    field: &Field,
    construction: ConstructionArg,
    gen: Poly,
) -> Result<MubSet, Failure> {
    let read_err = |e: io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let set = if csv {
        let file = File::open(path).map_err(read_err)?;
        import_csv(
            field,
            construction_of(construction),
            gen,
            BufReader::new(file),
        )
    } else {
        let text = std::fs::read_to_string(path).map_err(read_err)?;
        import_json(&text)
    }
    .map_err(Failure::input)?;
    if set.field() != field {
        return Err(Failure::Input(format!(
            "{} holds a set over GF({}), not GF({})",
            path.display(),
            set.field().q(),
            field.q()
        )));
    }
    Ok(set)
}

fn write_export(set: &MubSet, format: Format, output: Option<&Path>) -> Result<(), Failure> {
    let format = match format {
        Format::Json => ExportFormat::Json,
        Format::Csv => ExportFormat::Csv,
        Format::FloatJson => ExportFormat::FloatJson,
        Format::Text => {
            return Err(Failure::Input(
                "MUB exports are json, csv or float-json".into(),
            ))
        }
    };
    match output {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            export_mubs(set, format, &mut w).map_err(Failure::input)?;
            w.flush().map_err(Failure::input)
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            export_mubs(set, format, &mut w).map_err(Failure::input)?;
            w.flush().map_err(Failure::input)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_mubs(
    cli: &Cli,
    field_args: FieldArgs,
    construction: ConstructionArg,
    pi: Option<&str>,
    action: MubAction,
    input: Option<&Path>,
    output: Option<&Path>,
) -> Result<Outcome, Failure> {
    let field = make_field(field_args)?;
    let gen = generator(&field, construction, pi)?;
    let csv_input = input
        .is_some_and(|p| cli.format == Format::Csv || p.extension().is_some_and(|e| e == "csv"));
    let obtain = |gen: Poly| match input {
        Some(path) => load_set(path, csv_input, &field, construction, gen),
        None => build_set(&field, construction, &gen),
    };
    match action {
        MubAction::Build => {
            if input.is_some() {
                return Err(Failure::Input("build takes no --input; use export".into()));
            }
            write_export(&obtain(gen)?, cli.format, output)?;
            Ok(Outcome::written())
        }
        MubAction::Export => {
            write_export(&obtain(gen)?, cli.format, output)?;
            Ok(Outcome::written())
        }
        MubAction::Verify => {
            if matches!(cli.format, Format::FloatJson)
                || (cli.format == Format::Csv && input.is_none())
            {
                return Err(Failure::Input("verify reports are json or text".into()));
            }
            let set = obtain(gen)?;
            let report = verify_mub_set_with(&set, cli.workers);
            let mut text = format!(
                "{}: {} bases over GF({}), {} pairs checked exactly, {} standard-basis pairs automatic, {} violations\n",
                if report.pass { "pass" } else { "FAIL" },
                report.bases,
                report.q,
                report.pairs_checked,
                report.standard_pairs_automatic,
                report.violation_count
            );
            for s in &report.structural {
                let _ = writeln!(text, "  {s}");
            }
            for v in report.violations.iter().take(20) {
                let _ = writeln!(
                    text,
                    "  basis {} vector {} vs basis {} vector {}: expected {}, found {}",
                    v.basis1,
                    v.vector1,
                    v.basis2,
                    v.vector2,
                    v.expected,
                    v.found.as_deref().unwrap_or("irrational")
                );
            }
            let payload = json!({
                "construction": set.construction(),
                "poly": set.poly().to_string(),
                "field": set.field().spec(),
                "report": report,
            });
            Ok(Outcome::new(payload, text).with_pass(report.pass))
        }
    }
}

fn cmd_charsum(args: FieldArgs, poly: &str) -> Result<Outcome, Failure> {
    let field = make_field(args)?;
    let f = parse_poly(poly, &field)?;
    let counts = char_sum(&field, &f).map_err(Failure::input)?;
    let m = mag_sq(&counts);
    let join = |v: &[num_bigint::BigInt]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut text = format!(
        "counts: {}\nd: {}\n",
        join(counts.coeffs()),
        join(&m.autocorrelation)
    );
    match &m.value {
        Some(v) => {
            let _ = writeln!(text, "|S|^2 = {v}");
        }
        None => text.push_str("|S|^2 is not a rational integer\n"),
    }
    let payload = json!({
        "poly": f.to_string(),
        "counts": counts,
        "autocorrelation": serde_json::to_value(&m).expect("serializable")["autocorrelation"],
        "is_rational_integer": m.is_rational_integer,
        "mag_sq": serde_json::to_value(&m).expect("serializable")["value"],
    });
    Ok(Outcome::new(payload, text))
}

fn cmd_binom(n: u64, k: u64, p: u64) -> Result<Outcome, Failure> {
    let table = LucasTable::new(p).map_err(Failure::input)?;
    let b = table.explain(n, k);
    let mut text = format!("C({n}, {k}) mod {p} = {}\n", b.residue);
    for f in &b.factors {
        let _ = writeln!(
            text,
            "  digit {}: C({}, {}) = {} mod {p}",
            f.position, f.n_digit, f.k_digit, f.value
        );
    }
    if !b.dominated {
        text.push_str("  k is not digit-dominated by n, so the residue is 0\n");
    }
    Ok(Outcome::new(b, text))
}

fn cmd_transform(args: FieldArgs, poly: &str, seed: u64, count: u32) -> Result<Outcome, Failure> {
    let field = make_field(args)?;
    let f = parse_poly(poly, &field)?;
    let planar = is_planar(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = format!("{f}: planar {planar}\n");
    let mut rows = Vec::new();
    let mut preserved = true;
    for _ in 0..count {
        let t = EquivTransform::random(&field, &mut rng);
        let g = t.apply(&f).map_err(Failure::input)?;
        let g_planar = is_planar(&g);
        preserved &= g_planar == planar;
        let _ = writeln!(text, "  {g}: planar {g_planar}");
        rows.push(json!({
            "c": t.c.encoding(),
            "s": t.s.encoding(),
            "t": t.t.encoding(),
            "m": t.m.to_string(),
            "d": t.d.encoding(),
            "result": g.to_string(),
            "planar": g_planar,
        }));
    }
    let payload = json!({
        "poly": f.to_string(),
        "seed": seed,
        "planar": planar,
        "preserved": preserved,
        "transforms": rows,
    });
    Ok(Outcome::new(payload, text).with_pass(preserved))
}
