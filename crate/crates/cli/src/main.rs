//! `genus`: genus numbers and orbit types of Weyl group actions.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use genus_core::catalog::{Family, GroupType};
use genus_core::orbits::{Mode, DEFAULT_SCHEDULE};
use genus_core::report::{self, Method, RunOptions};
use genus_core::selftest;
use genus_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DISCREPANCY: u8 = 3;
const EXIT_RESOURCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "genus",
    version,
    about = "Genus numbers and Weyl group orbit types"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Genus number (group) or orbit-type count (algebra) of one type.
    Genus(GenusArgs),
    /// Formula and brute-force values for all types up to a rank.
    Table(TableArgs),
    /// Isotropy classes of one type with witnesses and structure.
    Classes(ClassesArgs),
    /// Stabilizer jumps between the coroot lattice L and (1/k)·L.
    CompareLattices(CompareArgs),
    /// Derivation identity for seeded octonion Cartan parameters.
    CheckOctonion(OctonionArgs),
    /// Runs the acceptance criteria and prints a pass/fail matrix.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct TypeArgs {
    /// Family: A, B, C, D, G2 or F4.
    #[arg(long = "type", value_parser = parse_family)]
    family: Family,
    /// Rank; optional for G2 and F4.
    #[arg(long)]
    rank: Option<usize>,
}

impl TypeArgs {
    fn group_type(&self) -> Result<GroupType, Failure> {
        match (self.family.is_exceptional(), self.rank) {
            (true, None) => Ok(GroupType::exceptional(self.family)?),
            (_, Some(rank)) => Ok(GroupType::new(self.family, rank)?),
            (false, None) => Err(Failure::Usage(format!(
                "--rank is required for type {}",
                self.family
            ))),
        }
    }
}

#[derive(Args)]
struct ComputeArgs {
    /// group (torus action) or algebra (Cartan subalgebra action).
    #[arg(long, default_value = "group", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, default_value = "both", value_parser = parse_method)]
    method: Method,
    /// Grid denominators, strictly increasing, each dividing the last.
    #[arg(long, value_delimiter = ',')]
    denominators: Option<Vec<u64>>,
    /// Exit with status 3 when formula and brute force disagree.
    #[arg(long)]
    strict: bool,
}

impl ComputeArgs {
    fn options(&self) -> RunOptions {
        run_options(self.method, &self.denominators)
    }
}

#[derive(Args)]
struct FormatArgs {
    #[arg(long, conflicts_with = "md")]
    json: bool,
    /// Markdown output (the default).
    #[arg(long)]
    md: bool,
}

#[derive(Args)]
struct GenusArgs {
    #[command(flatten)]
    ty: TypeArgs,
    #[command(flatten)]
    compute: ComputeArgs,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = 4)]
    max_rank: usize,
    #[command(flatten)]
    compute: ComputeArgs,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct ClassesArgs {
    #[command(flatten)]
    ty: TypeArgs,
    #[arg(long, default_value = "group", value_parser = parse_mode)]
    mode: Mode,
    #[arg(long, value_delimiter = ',')]
    denominators: Option<Vec<u64>>,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    ty: TypeArgs,
    /// The coarse lattice is (1/k)·L.
    #[arg(long, default_value_t = 2)]
    coarse_index: u64,
    #[arg(long, value_delimiter = ',')]
    denominators: Option<Vec<u64>>,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct OctonionArgs {
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = selftest::DEFAULT_SEED)]
    seed: u64,
    #[command(flatten)]
    format: FormatArgs,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    report::parse_mode(s).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn run_options(method: Method, denominators: &Option<Vec<u64>>) -> RunOptions {
    RunOptions {
        method,
        schedule: denominators
            .clone()
            .unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec()),
        ..RunOptions::default()
    }
}

enum Failure {
    Usage(String),
    Lib(Error),
    Discrepancy,
    Failed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn emit(format: &FormatArgs, json: impl FnOnce() -> String, md: impl FnOnce() -> String) {
    print!("{}", if format.json { json() } else { md() });
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Genus(a) => {
            let r = report::genus_report(a.ty.group_type()?, a.compute.mode, &a.compute.options())?;
            emit(&a.format, || r.to_json(), || r.to_markdown());
            if a.compute.strict && r.discrepancy {
                return Err(Failure::Discrepancy);
            }
        }
        Command::Table(a) => {
            let t = report::genus_table(a.compute.mode, a.max_rank, &a.compute.options())?;
            emit(&a.format, || t.to_json(), || t.to_markdown());
            if a.compute.strict && t.rows.iter().any(|r| r.agree == Some(false)) {
                return Err(Failure::Discrepancy);
            }
        }
        Command::Classes(a) => {
            let r = report::genus_report(
                a.ty.group_type()?,
                a.mode,
                &run_options(Method::Brute, &a.denominators),
            )?;
            emit(&a.format, || r.to_json(), || r.classes_markdown());
        }
        Command::CompareLattices(a) => {
            let c = report::lattice_comparison(
                a.ty.group_type()?,
                a.coarse_index,
                &run_options(Method::Brute, &a.denominators),
            )?;
            emit(&a.format, || c.to_json(), || c.to_markdown());
        }
        Command::CheckOctonion(a) => {
            let c = report::octonion_check(a.samples, a.seed);
            print!("{}", if a.json { c.to_json() } else { c.summary() });
            if !c.all_passed() {
                return Err(Failure::Failed);
            }
        }
        Command::Selftest(a) => {
            let r = selftest::run_all(a.seed);
            emit(&a.format, || r.to_json(), || r.to_markdown());
            if !r.all_passed() {
                return Err(Failure::Failed);
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("GENUS_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::Usage(format!(
                "GENUS_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_resource_bound() => EXIT_RESOURCE,
                Error::UnsupportedType { .. } | Error::InvalidSchedule(_) | Error::Parse(_) => {
                    EXIT_USAGE
                }
                _ => EXIT_FAILURE,
            })
        }
        Err(Failure::Discrepancy) => {
            eprintln!("error: formula and brute-force values disagree");
            ExitCode::from(EXIT_DISCREPANCY)
        }
        Err(Failure::Failed) => ExitCode::from(EXIT_FAILURE),
    }
}
