use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use autsplit::batch::{parse_lines, run_batch, BatchOptions};
use autsplit::config::DEFAULT_SEED;
use autsplit::group::{delta_order, endo_exponent, group_order, RawSpec};
use autsplit::oracle::{
    brute_force_is_bijective, complement_lift_search, enumerate_delta, enumerate_endos, order_p_coset_obstruction,
    random::random_endo, NotFoundReason, SearchOptions, SearchOutcome,
};
use autsplit::splitting::{build_section, classify, CertCache, SplitOutcome, VerifyMode};
use autsplit::{Block, Budgets, Error, PGroupSpec};

#[derive(Parser)]
#[command(name = "autsplit", version, about = "Splitting of Aut(G) over its reduction kernel for finite abelian p-groups")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GlobalArgs {
    /// Group elements (or elements of the reduced group) an enumeration may visit.
    #[arg(long, global = true, env = "AUTSPLIT_BUDGET_ELEMS", default_value_t = Budgets::default().elements)]
    budget_elems: u64,
    /// Kernel elements an oracle may enumerate.
    #[arg(long, global = true, env = "AUTSPLIT_BUDGET_DELTA", default_value_t = Budgets::default().delta)]
    budget_delta: u64,
    /// Lift assignments a complement search may try.
    #[arg(long, global = true, env = "AUTSPLIT_BUDGET_ASSIGNMENTS", default_value_t = Budgets::default().assignments)]
    budget_assignments: u64,
    /// Wall-clock limit for a complement search, in seconds.
    #[arg(long, global = true, env = "AUTSPLIT_BUDGET_SECONDS")]
    budget_seconds: Option<u64>,
    #[arg(long, global = true, env = "AUTSPLIT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Directory of cached section certificates.
    #[arg(long, global = true, env = "AUTSPLIT_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
}

impl GlobalArgs {
    fn budgets(&self) -> Budgets {
        Budgets {
            elements: self.budget_elems,
            delta: self.budget_delta,
            assignments: self.budget_assignments,
            wall_clock: self.budget_seconds.map(Duration::from_secs),
            ..Budgets::default()
        }
    }

    fn cache(&self) -> Option<CertCache> {
        self.cache_dir.as_ref().map(CertCache::new)
    }
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// The prime.
    #[arg(short)]
    p: Option<u64>,
    /// A block `n:r` (exponent n, rank r); repeat in increasing n.
    #[arg(short, value_name = "N:R")]
    b: Vec<String>,
    /// JSON file holding {"p":..,"blocks":[{"n":..,"r":..},..]}.
    #[arg(long, conflicts_with_all = ["p", "b"])]
    spec: Option<PathBuf>,
}

impl SpecArgs {
    fn parse(&self) -> Result<Arc<PGroupSpec>, Failure> {
        let raw = match (&self.spec, self.p) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<RawSpec>(&text).map_err(|e| Failure::invalid(format!("Json: {e}")))?
            }
            (None, Some(p)) => {
                let blocks = self.b.iter().map(|s| parse_block(s)).collect::<Result<Vec<_>, _>>()?;
                RawSpec { p, blocks }
            }
            (None, None) => return Err(Failure::invalid("give -p and -b, or --spec".into())),
        };
        PGroupSpec::try_from(raw).map(Arc::new).map_err(Failure::from)
    }
}

fn parse_block(s: &str) -> Result<Block, Failure> {
    let bad = || Failure::invalid(format!("block `{s}` is not of the form n:r"));
    let (n, r) = s.split_once(':').ok_or_else(bad)?;
    Ok(Block { n: n.trim().parse().map_err(|_| bad())?, r: r.trim().parse().map_err(|_| bad())? })
}

#[derive(Subcommand)]
enum Command {
    /// Decide splitting from the block structure.
    Classify(SpecArgs),
    /// Build, verify and emit a section of the reduction map.
    Section {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        verify_mode: ModeArg,
        /// Write the certificate here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Brute-force checks.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Classify every group in a JSON-lines file (`-` for stdin).
    Batch {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Also decide each group by complete search and compare.
        #[arg(long)]
        with_oracle: bool,
        /// Keep going after malformed lines, reporting them as rows.
        #[arg(long = "continue")]
        keep_going: bool,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Manage the certificate cache.
    Cache {
        #[command(subcommand)]
        action: CacheCommand,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare the unit test against bijectivity on G.
    BijectiveEquiv {
        #[command(flatten)]
        spec: SpecArgs,
        /// Random endomorphisms to test when the full set is over budget.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
    /// Kernel order by formula and by enumeration.
    DeltaCount(SpecArgs),
    /// Scan the coset of the transvection lift for elements of order p.
    Obstruction(SpecArgs),
    /// Decide splitting by exhaustive search over generator lifts.
    ComplementSearch {
        #[command(flatten)]
        spec: SpecArgs,
        /// Skip the order-p coset scan.
        #[arg(long)]
        no_prepass: bool,
        /// Try every assignment and keep the least successful one.
        #[arg(long)]
        exhaustive: bool,
    },
}

#[derive(Subcommand)]
enum CacheCommand {
    List,
    Verify {
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        verify_mode: ModeArg,
    },
    Clear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    FullTable,
    GeneratorRelations,
    Sampled,
    Auto,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::FullTable => VerifyMode::FullTable,
            ModeArg::GeneratorRelations => VerifyMode::GeneratorRelations,
            ModeArg::Sampled => VerifyMode::Sampled,
            ModeArg::Auto => VerifyMode::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

const EXIT_ERROR: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_NOT_SPLIT: u8 = 5;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(message: String) -> Self {
        Failure { code: EXIT_INVALID, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NonPrime(_)
            | Error::NonIncreasingExponents { .. }
            | Error::ZeroRank(_)
            | Error::ZeroExponent(_)
            | Error::EmptyBlocks
            | Error::ModulusTooLarge { .. }
            | Error::RankTooSmall
            | Error::PreconditionViolation(_)
            | Error::Json(_) => EXIT_INVALID,
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            Error::VerificationFailed { .. } => EXIT_VERIFY,
            Error::NotSplitBlock { .. } => EXIT_NOT_SPLIT,
            _ => EXIT_ERROR,
        };
        Failure { code, message: e.to_string() }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::from(Error::from(e)))?;
    println!("{text}");
    Ok(())
}

/// Counts that fit in `u64` as numbers, larger ones as decimal strings.
fn big_json(n: &num_bigint::BigUint) -> Value {
    n.to_u64().map_or_else(|| Value::String(n.to_string()), Value::from)
}

fn cmd_classify(args: &SpecArgs) -> Result<u8, Failure> {
    let spec = args.parse()?;
    print_json(&classify(&spec))?;
    Ok(0)
}

fn cmd_section(g: &GlobalArgs, args: &SpecArgs, mode: ModeArg, out: Option<&PathBuf>) -> Result<u8, Failure> {
    let spec = args.parse()?;
    let verdict = classify(&spec);
    if verdict.outcome != SplitOutcome::Splits {
        print_json(&json!({ "spec": *spec, "outcome": verdict.outcome, "rule": verdict.rule }))?;
        return Ok(EXIT_NOT_SPLIT);
    }
    let cache = g.cache();
    let cert = build_section(&spec, &g.budgets(), g.seed, mode.into(), cache.as_ref())?;
    if let Some(cache) = &cache {
        if spec.num_blocks() > 1 {
            let path = cache.store(&cert)?;
            info!("stored {}", path.display());
        }
    }
    let cert_json = cert.to_json();
    let mut report = json!({
        "spec": *spec,
        "outcome": verdict.outcome,
        "verification": cert.verification,
        "generators": cert.generators.len(),
    });
    match out {
        Some(path) => {
            let text = serde_json::to_string_pretty(&cert_json).map_err(|e| Failure::from(Error::from(e)))?;
            fs::write(path, text).map_err(|e| Failure::from(Error::from(e)))?;
            report["certificate_path"] = json!(path);
        }
        None => report["certificate"] = json!(cert_json),
    }
    print_json(&report)?;
    Ok(0)
}

fn cmd_oracle(g: &GlobalArgs, which: &OracleCommand) -> Result<u8, Failure> {
    let budgets = g.budgets();
    match which {
        OracleCommand::BijectiveEquiv { spec, samples } => {
            let spec = spec.parse()?;
            let order = group_order(&spec);
            if order > budgets.elements.into() {
                return Err(Error::BudgetExceeded {
                    what: "group elements",
                    needed: order.to_string(),
                    budget: budgets.elements,
                }
                .into());
            }
            let (mut checked, mut disagreements) = (0u64, 0u64);
            let mut check = |e: &autsplit::BlockEndo| -> Result<(), Failure> {
                checked += 1;
                if e.is_automorphism()? != brute_force_is_bijective(e, budgets.elements)? {
                    disagreements += 1;
                }
                Ok(())
            };
            let exhaustive = match enumerate_endos(&spec, budgets.elements) {
                Ok(all) => {
                    for e in all {
                        check(&e)?;
                    }
                    true
                }
                Err(Error::BudgetExceeded { .. }) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
                    for _ in 0..*samples {
                        check(&random_endo(&spec, &mut rng))?;
                    }
                    false
                }
                Err(e) => return Err(e.into()),
            };
            print_json(&json!({
                "spec": *spec,
                "endomorphisms": big_json(&num_bigint::BigUint::from(spec.p()).pow(endo_exponent(&spec) as u32)),
                "exhaustive": exhaustive,
                "checked": checked,
                "disagreements": disagreements,
                "seed": g.seed,
            }))?;
            Ok(if disagreements == 0 { 0 } else { EXIT_VERIFY })
        }
        OracleCommand::DeltaCount(spec) => {
            let spec = spec.parse()?;
            let enumerated = enumerate_delta(&spec, budgets.delta)?.count();
            print_json(&json!({ "spec": *spec, "formula": big_json(&delta_order(&spec)), "enumerated": enumerated }))?;
            Ok(0)
        }
        OracleCommand::Obstruction(spec) => {
            let spec = spec.parse()?;
            print_json(&order_p_coset_obstruction(&spec, budgets.delta)?)?;
            Ok(0)
        }
        OracleCommand::ComplementSearch { spec, no_prepass, exhaustive } => {
            let spec = spec.parse()?;
            let opts = SearchOptions { seed: g.seed, obstruction_prepass: !no_prepass, exhaustive: *exhaustive };
            let report = match complement_lift_search(&spec, &budgets, &opts)? {
                SearchOutcome::Found { mut certificate, assignments_tried, successes } => {
                    let record = certificate.verify(VerifyMode::Auto, g.seed)?.clone();
                    json!({
                        "spec": *spec,
                        "verdict": "Found",
                        "assignments_tried": assignments_tried,
                        "successes": successes,
                        "verification": record,
                        "certificate": certificate.to_json(),
                    })
                }
                SearchOutcome::NotFound { reason, assignments_tried } => json!({
                    "spec": *spec,
                    "verdict": "NotFound-Exhausted",
                    "reason": match reason {
                        NotFoundReason::Exhausted => "every assignment tried",
                        NotFoundReason::OrderPObstruction => "no lift of the transvection has order p",
                    },
                    "assignments_tried": assignments_tried,
                }),
            };
            print_json(&report)?;
            Ok(0)
        }
    }
}

fn cmd_batch(
    g: &GlobalArgs,
    input: &PathBuf,
    format: Format,
    with_oracle: bool,
    keep_going: bool,
    workers: Option<usize>,
) -> Result<u8, Failure> {
    let text = if input.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::from(Error::from(e)))?;
        s
    } else {
        fs::read_to_string(input).map_err(|e| Failure::invalid(format!("{}: {e}", input.display())))?
    };
    let lines = parse_lines(&text);
    let malformed = lines.iter().find_map(|(n, r)| r.as_ref().err().map(|e| (*n, e.clone())));
    if let (Some((n, e)), false) = (&malformed, keep_going) {
        return Err(Failure::invalid(format!("line {n}: {e}")));
    }
    let opts = BatchOptions { with_oracle, budgets: g.budgets(), seed: g.seed, workers };
    let report = run_batch(&lines, &opts)?;
    match format {
        Format::Json => println!("{}", report.to_json()?),
        Format::Csv => print!("{}", report.to_csv()?),
    }
    let disagreements = report.disagreements();
    if disagreements > 0 {
        log::error!("{disagreements} classifier/oracle disagreements");
    }
    Ok(if malformed.is_some() || report.errors() > 0 {
        EXIT_INVALID
    } else if disagreements > 0 {
        EXIT_ERROR
    } else {
        0
    })
}

fn cmd_cache(g: &GlobalArgs, action: &CacheCommand) -> Result<u8, Failure> {
    let cache = g.cache().ok_or_else(|| Failure::invalid("--cache-dir (or AUTSPLIT_CACHE_DIR) is required".into()))?;
    match action {
        CacheCommand::List => print_json(&cache.list()?)?,
        CacheCommand::Verify { verify_mode } => {
            let results = cache.verify_all((*verify_mode).into(), g.seed)?;
            let failed = results.iter().filter(|(_, r)| r.is_err()).count();
            let rows: Vec<Value> = results
                .into_iter()
                .map(|(path, r)| match r {
                    Ok(rec) => json!({ "path": path, "ok": true, "verification": rec }),
                    Err(e) => json!({ "path": path, "ok": false, "error": e.to_string() }),
                })
                .collect();
            print_json(&rows)?;
            if failed > 0 {
                return Ok(EXIT_VERIFY);
            }
        }
        CacheCommand::Clear => print_json(&json!({ "removed": cache.clear()? }))?,
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    match &cli.command {
        Command::Classify(spec) => cmd_classify(spec),
        Command::Section { spec, verify_mode, out } => cmd_section(g, spec, *verify_mode, out.as_ref()),
        Command::Oracle { which } => cmd_oracle(g, which),
        Command::Batch { input, format, with_oracle, keep_going, workers } => {
            cmd_batch(g, input, *format, *with_oracle, *keep_going, *workers)
        }
        Command::Cache { action } => cmd_cache(g, action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
