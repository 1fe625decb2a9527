use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "planarlab",
    version,
    about = "Planar and Alltop-type polynomial functions over GF(p^r), and the MUBs they generate"
)]
pub struct Cli {
    /// Output format. csv and float-json apply to MUB exports only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Omit wall-clock fields so identical runs print identical JSON.
    #[arg(long, global = true)]
    pub canonical: bool,

    /// Worker threads for search and MUB verification (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
    FloatJson,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct FieldArgs {
    /// Characteristic (an odd prime).
    #[arg(long)]
    pub p: u64,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    pub r: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestMode {
    Permutation,
    Additive,
    Planar,
    Alltop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SearchMode {
    Planar,
    Alltop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyKind {
    Monomials,
    AllReduced,
    ShiftedCubics,
    DoMonomials,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyKind,
    /// Degree bound for the all-reduced family.
    #[arg(long)]
    pub max_deg: Option<u32>,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct BudgetArgs {
    /// Candidate budget; defaults to $PLANARLAB_BUDGET, then 10^7.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Budget on estimated table operations.
    #[arg(long)]
    pub max_ops: Option<u128>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Planar,
    Alltop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MubAction {
    Build,
    Verify,
    Export,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Describe GF(p^r): order, canonical modulus, generator.
    FieldInfo {
        #[command(flatten)]
        field: FieldArgs,
        /// Include the multiplication table (q ≤ 49).
        #[arg(long)]
        table: bool,
    },
    /// Classify one polynomial function.
    Test {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        #[arg(long, value_enum)]
        mode: TestMode,
    },
    /// Formal difference f(x+a) − f(x), or the second difference with --b.
    Delta {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        /// Shift, as an element encoding.
        #[arg(long)]
        a: u32,
        #[arg(long)]
        b: Option<u32>,
    },
    /// Classify every member of a polynomial family.
    Search {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_enum)]
        mode: SearchMode,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Seed for the post-run resample check.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Structural checks backed by exhaustive search.
    Verify {
        #[command(subcommand)]
        check: VerifyCheck,
    },
    /// Build, verify or export a complete set of q+1 MUBs.
    Mubs {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum)]
        construction: ConstructionArg,
        /// Planar generator for the planar construction.
        #[arg(long)]
        pi: Option<String>,
        #[arg(long, value_enum, default_value_t = MubAction::Verify)]
        action: MubAction,
        /// Read a previous export instead of building.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the export here instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exact squared magnitude of the character sum Σ ω^tr(f(x)).
    Charsum {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
    },
    /// C(n, k) mod p with its digit-by-digit breakdown.
    Binom {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: u64,
    },
    /// Apply seeded random equivalence transforms c·f(sx+t) + M(x) + d.
    Transform {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCheck {
    /// No Alltop-type member in a characteristic-3 family.
    Char3 {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// deg Δ_a x^n matches the predicted degree for all n < q, a ≠ 0.
    DegreeLaw {
        #[command(flatten)]
        field: FieldArgs,
    },
    /// Every Alltop-type member is a cubic up to additive terms.
    Cubic {
        #[command(flatten)]
        field: FieldArgs,
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}
