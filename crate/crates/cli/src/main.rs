mod channels;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lnmc::degradedness::{eta_kl, eta_ln, eta_mc, lemma2_report, test_degraded, DegradedStatus, GridSpec, DEGRADED_TOL};
use lnmc::infotheory::{capacity_ba, BA_TOL};
use lnmc::regions::{bc_inner_region, bdc_achievable, bdc_capacity, prc_capacity, theorem1_check_with, Outcome, RegionBudget};
use lnmc::reproduce::{example1, example2, example3, fig1, ComparisonRow};
use lnmc::verify::{self, Suite};
use lnmc::Channel;
use serde_json::{json, Value};

use crate::channels::parse_channel;
use crate::output::{fixed6, render_text, write_manifest, Output, RunManifest, Table, MANIFEST_FILE};

/// Why a command failed; each kind maps to an exit code.
#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Precondition(String),
    Verify(String),
    Io(String),
}

impl Failure {
    pub fn parse(e: lnmc::Error) -> Self {
        match e {
            lnmc::Error::Parse(_)
            | lnmc::Error::InvalidChannel(_)
            | lnmc::Error::InvalidDistribution(_)
            | lnmc::Error::InvalidParameter(_) => Failure::Parse(e.to_string()),
            other => Failure::Precondition(other.to_string()),
        }
    }

    pub fn io(e: impl std::fmt::Display) -> Self {
        Failure::Io(e.to_string())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Precondition(_) | Failure::Io(_) => 2,
            Failure::Verify(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Precondition(m) => write!(f, "precondition violated: {m}"),
            Failure::Verify(m) => write!(f, "verification failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<lnmc::Error> for Failure {
    fn from(e: lnmc::Error) -> Self {
        Failure::parse(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "lnmc", version, about = "Strong less-noisy and more-capable channel comparisons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Directory for report, CSV and manifest files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Simplex grid resolution for inputs with three or more letters.
    #[arg(long, global = true)]
    resolution: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coefficients, degradedness and capacity of channels.
    Analyze {
        what: AnalyzeKind,
        /// Channels as `bsc:p`, `bec:p`, `z:e`, `id:n` or TOML files.
        #[arg(required = true)]
        channels: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Rate regions and capacities of cooperative models.
    Region {
        model: Model,
        #[arg(required = true)]
        channels: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        c12: f64,
        #[arg(long, default_value_t = 0.0)]
        c13: f64,
        #[arg(long, default_value_t = 0.0)]
        c23: f64,
        /// Auxiliary alphabet size (default: input size + 1).
        #[arg(long)]
        aux_size: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the example tables and the Z/BSC sweep.
    Reproduce {
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized verification suites.
    Verify {
        suite: SuiteArg,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Rerun a manifest and compare the outputs byte for byte.
    Replay {
        manifest: PathBuf,
        /// Directory for the replayed outputs (default: `<manifest dir>/replay`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum AnalyzeKind {
    EtaLn,
    EtaMc,
    EtaKl,
    Degraded,
    Capacity,
    Lemma2,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Model {
    Bc,
    Prc,
    Bdc,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Target {
    Example1,
    Example2,
    Example3,
    Fig1,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SuiteArg {
    Lemma2,
    Theorem1,
    Theorem3,
    Dpi,
    Hessian,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Lemma2 => Suite::Lemma2,
            SuiteArg::Theorem1 => Suite::Theorem1,
            SuiteArg::Theorem3 => Suite::Theorem3,
            SuiteArg::Dpi => Suite::Dpi,
            SuiteArg::Hessian => Suite::Hessian,
        }
    }
}

fn grid(common: &Common) -> GridSpec {
    let mut g = GridSpec { seed: common.seed, ..Default::default() };
    if let Some(r) = common.resolution {
        g.resolution = r.max(2);
    }
    g
}

fn channels(args: &[String], want: usize) -> Result<Vec<Channel>, Failure> {
    if args.len() != want {
        return Err(Failure::Parse(format!("expected {want} channel(s), got {}", args.len())));
    }
    args.iter().map(|a| parse_channel(a)).collect()
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(Failure::io)
}

fn analyze(what: AnalyzeKind, args: &[String], common: &Common) -> Result<Output, Failure> {
    let spec = grid(common);
    let report = match what {
        AnalyzeKind::EtaLn | AnalyzeKind::EtaMc | AnalyzeKind::Lemma2 | AnalyzeKind::Degraded => {
            let ch = channels(args, 2)?;
            match what {
                AnalyzeKind::EtaLn => json!({"quantity": "eta_ln", "report": to_value(&eta_ln(&ch[0], &ch[1], &spec)?)?}),
                AnalyzeKind::EtaMc => json!({"quantity": "eta_mc", "report": to_value(&eta_mc(&ch[0], &ch[1], &spec)?)?}),
                AnalyzeKind::Lemma2 => json!({"quantity": "lemma2", "report": to_value(&lemma2_report(&ch[0], &ch[1], &spec)?)?}),
                _ => {
                    let cert = test_degraded(&ch[0], &ch[1], DEGRADED_TOL)?;
                    let verdict = match cert.status {
                        DegradedStatus::Degraded => "degraded",
                        DegradedStatus::NotDegraded => "not degraded",
                        DegradedStatus::Indeterminate => "indeterminate",
                    };
                    json!({"quantity": "degradedness", "verdict": verdict, "report": to_value(&cert)?})
                }
            }
        }
        AnalyzeKind::EtaKl => {
            let ch = channels(args, 1)?;
            json!({"quantity": "eta_kl", "report": to_value(&eta_kl(&ch[0], &spec)?)?})
        }
        AnalyzeKind::Capacity => {
            let ch = channels(args, 1)?;
            match capacity_ba(&ch[0], BA_TOL) {
                Ok(c) => json!({"quantity": "capacity", "converged": true, "report": to_value(&c)?}),
                Err(lnmc::Error::NotConverged { best, .. }) => {
                    json!({"quantity": "capacity", "converged": false, "report": to_value(&*best)?})
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    Ok(Output { report, tables: vec![] })
}

fn region(
    model: Model,
    args: &[String],
    links: (f64, f64, f64),
    aux_size: Option<usize>,
    common: &Common,
) -> Result<Output, Failure> {
    let budget = RegionBudget { seed: common.seed, grid: grid(common), ..Default::default() };
    let (c12, c13, c23) = links;
    match model {
        Model::Bc => {
            let ch = channels(args, 2)?;
            let aux = aux_size.unwrap_or(ch[0].input_size() + 1);
            let inner = bc_inner_region(&ch[0], &ch[1], c12, aux, &budget)?;
            let theorem = theorem1_check_with(&ch[0], &ch[1], c12, aux, &budget)?;
            let rows = inner.boundary.iter().map(|p| vec![fixed6(p.r1), fixed6(p.r2)]).collect();
            let mut tables = vec![Table { name: "frontier".into(), header: vec!["R1".into(), "R2".into()], rows }];
            if let Outcome::Regions { inner: mi, outer: mo, .. } = &theorem.outcome {
                for (name, r) in [("modified_inner", mi), ("modified_outer", mo)] {
                    let rows = r.boundary.iter().map(|p| vec![fixed6(p.r1), fixed6(p.r2)]).collect();
                    tables.push(Table { name: name.into(), header: vec!["R1".into(), "R2".into()], rows });
                }
            }
            let report = json!({
                "model": "bc",
                "c12": c12,
                "aux_size": aux,
                "frontier": to_value(&inner.boundary)?,
                "theorem1": to_value(&theorem)?,
            });
            Ok(Output { report, tables })
        }
        Model::Prc => {
            let ch = channels(args, 2)?;
            let r = prc_capacity(&ch[0], &ch[1], c12, &budget)?;
            let rate = scalar_rate(&r.outcome);
            let report = json!({"model": "prc", "c12": c12, "rate": rate, "theorem2": to_value(&r)?});
            Ok(Output { report, tables: vec![rate_table(rate)] })
        }
        Model::Bdc => {
            let ch = channels(args, 3)?;
            let aux = aux_size.unwrap_or(ch[0].input_size() + 1);
            let r = bdc_capacity(&ch[0], &ch[1], &ch[2], c13, c23, &budget)?;
            let ach = bdc_achievable(&ch[0], &ch[1], &ch[2], c13, c23, aux, &budget)?;
            let rate = scalar_rate(&r.outcome);
            let report = json!({
                "model": "bdc",
                "c13": c13,
                "c23": c23,
                "rate": rate,
                "achievable": to_value(&ach)?,
                "theorem3": to_value(&r)?,
            });
            Ok(Output { report, tables: vec![rate_table(rate)] })
        }
    }
}

/// Capacity when known, otherwise the achievable lower end.
fn scalar_rate(o: &Outcome) -> f64 {
    match *o {
        Outcome::Capacity { value } => value,
        Outcome::Interval { lower, .. } => lower,
        _ => f64::NAN,
    }
}

fn rate_table(rate: f64) -> Table {
    Table { name: "rate".into(), header: vec!["rate".into()], rows: vec![vec![fixed6(rate)]] }
}

fn comparison_table(name: &str, params: [&str; 2], rows: &[ComparisonRow]) -> Table {
    let mut header: Vec<String> = vec!["quantity".into()];
    header.extend(params.iter().map(|s| s.to_string()));
    header.extend(["computed", "closed_form", "abs_err"].map(String::from));
    let rows = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.quantity.clone()];
            v.extend(r.params.iter().map(|&p| format!("{p:.3}")));
            v.extend([fixed6(r.computed), fixed6(r.closed_form), format!("{:.3e}", r.abs_err)]);
            v
        })
        .collect();
    Table { name: name.into(), header, rows }
}

const FIG1_EPS: f64 = 0.3;

fn reproduce(target: Target, common: &Common) -> Result<Output, Failure> {
    let spec = grid(common);
    let compare = |name: &str, params: [&str; 2], rows: Vec<ComparisonRow>| -> Result<Output, Failure> {
        let max_err = rows.iter().map(|r| r.abs_err).fold(0.0, f64::max);
        let report = json!({"target": name, "rows": rows.len(), "max_abs_err": max_err, "table": to_value(&rows)?});
        Ok(Output { report, tables: vec![comparison_table(name, params, &rows)] })
    };
    match target {
        Target::Example1 => compare("example1", ["p1", "p2"], example1(&spec)?),
        Target::Example2 => compare("example2", ["p1", "p2"], example2(&spec)?),
        Target::Example3 => compare("example3", ["eps", "p"], example3(FIG1_EPS, &spec)?),
        Target::Fig1 => {
            let rows = fig1(FIG1_EPS, &spec)?;
            let first = |f: &dyn Fn(&lnmc::reproduce::Fig1Row) -> bool| rows.iter().find(|r| f(r)).map(|r| r.p);
            let table = Table {
                name: "fig1".into(),
                header: ["p", "eta_ln", "eta_kl_ratio", "degraded_flag", "less_noisy"].map(String::from).to_vec(),
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            fixed6(r.p),
                            fixed6(r.eta_ln),
                            fixed6(r.eta_kl_ratio),
                            r.degraded_flag.to_string(),
                            r.less_noisy.to_string(),
                        ]
                    })
                    .collect(),
            };
            let report = json!({
                "target": "fig1",
                "eps": FIG1_EPS,
                "rows": rows.len(),
                "first_degraded_p": first(&|r| r.degraded_flag),
                "first_less_noisy_p": first(&|r| r.less_noisy),
                "table": to_value(&rows)?,
            });
            Ok(Output { report, tables: vec![table] })
        }
    }
}

fn verify_cmd(suite: SuiteArg, trials: usize, common: &Common) -> Result<(Output, Option<String>), Failure> {
    if trials == 0 {
        return Err(Failure::Parse("--trials must be at least 1".into()));
    }
    let r = verify::run(suite.into(), trials, common.seed)?;
    let table = Table {
        name: "trials".into(),
        header: ["index", "pass", "slack", "detail"].map(String::from).to_vec(),
        rows: r
            .results
            .iter()
            .map(|t| vec![t.index.to_string(), t.pass.to_string(), format!("{:.6e}", t.slack), t.detail.clone()])
            .collect(),
    };
    let summary = format!("{}/{} pass", r.passed, r.trials);
    let failed = (!r.all_passed()).then(|| summary.clone());
    let report = json!({
        "suite": r.suite,
        "seed": r.seed,
        "summary": summary,
        "worst_slack": r.worst_slack,
        "results": to_value(&r.results)?,
    });
    Ok((Output { report, tables: vec![table] }, failed))
}

/// Outcome of one dispatched command; `Verify` failures still write files.
struct Run {
    output: Output,
    verify_failed: Option<String>,
    seed: u64,
    budget: Value,
}

fn dispatch(cmd: &Command) -> Result<Run, Failure> {
    let budget_of = |common: &Common, extra: Value| {
        let mut b = json!({"resolution": grid(common).resolution, "binary_points": grid(common).binary_points});
        if let (Value::Object(m), Value::Object(e)) = (&mut b, extra) {
            m.extend(e);
        }
        b
    };
    match cmd {
        Command::Analyze { what, channels, common } => Ok(Run {
            output: analyze(*what, channels, common)?,
            verify_failed: None,
            seed: common.seed,
            budget: budget_of(common, json!({})),
        }),
        Command::Region { model, channels, c12, c13, c23, aux_size, common } => {
            let b = RegionBudget::default();
            Ok(Run {
                output: region(*model, channels, (*c12, *c13, *c23), *aux_size, common)?,
                verify_failed: None,
                seed: common.seed,
                budget: budget_of(
                    common,
                    json!({"aux_size": aux_size, "mu_count": b.mu_count, "restarts": b.restarts, "max_evals": b.max_evals}),
                ),
            })
        }
        Command::Reproduce { target, common } => Ok(Run {
            output: reproduce(*target, common)?,
            verify_failed: None,
            seed: common.seed,
            budget: budget_of(common, json!({})),
        }),
        Command::Verify { suite, trials, common } => {
            let (output, verify_failed) = verify_cmd(*suite, *trials, common)?;
            Ok(Run {
                verify_failed,
                output,
                seed: common.seed,
                budget: budget_of(common, json!({"trials": trials})),
            })
        }
        Command::Replay { .. } => unreachable!("replay is handled separately"),
    }
}

fn out_dir(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Analyze { common, .. }
        | Command::Region { common, .. }
        | Command::Reproduce { common, .. }
        | Command::Verify { common, .. } => common.out.as_deref(),
        Command::Replay { .. } => None,
    }
}

/// Command-line arguments with any `--out` option removed.
fn strip_out(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn execute(args: &[String]) -> Result<(), Failure> {
    let cli = match Cli::try_parse_from(std::iter::once("lnmc".to_string()).chain(args.iter().cloned())) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(Failure::Parse(e.to_string().trim_end().to_string())),
    };
    if let Command::Replay { manifest, out } = &cli.command {
        return replay(manifest, out.as_deref());
    }
    let start = Instant::now();
    let run = dispatch(&cli.command)?;
    print!("{}", render_text(&run.output.report));
    if let Some(dir) = out_dir(&cli.command) {
        let outputs = run.output.write(dir)?;
        let manifest = RunManifest {
            command: strip_out(args),
            seed: run.seed,
            budget: run.budget,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_secs: start.elapsed().as_secs_f64(),
            outputs,
        };
        write_manifest(dir, &manifest)?;
    }
    match run.verify_failed {
        Some(summary) => Err(Failure::Verify(summary)),
        None => Ok(()),
    }
}

fn replay(path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read manifest: {e}")))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("bad manifest: {e}")))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let target = out.map(Path::to_path_buf).unwrap_or_else(|| base.join("replay"));
    let mut args = manifest.command.clone();
    args.push("--out".into());
    args.push(target.display().to_string());
    let rerun = execute(&args);
    if let Err(f) = &rerun {
        if !matches!(f, Failure::Verify(_)) {
            return rerun;
        }
    }
    let mut mismatched = Vec::new();
    for name in &manifest.outputs {
        let a = std::fs::read(base.join(name)).map_err(Failure::io)?;
        let b = std::fs::read(target.join(name)).map_err(Failure::io)?;
        if a != b {
            mismatched.push(name.clone());
        }
    }
    let fresh: RunManifest = serde_json::from_str(
        &std::fs::read_to_string(target.join(MANIFEST_FILE)).map_err(Failure::io)?,
    )
    .map_err(Failure::io)?;
    if fresh.outputs != manifest.outputs {
        mismatched.push("output list".into());
    }
    if mismatched.is_empty() {
        println!("replay: {} output(s) identical", manifest.outputs.len());
        Ok(())
    } else {
        Err(Failure::Verify(format!("replay differs in {}", mismatched.join(", "))))
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("lnmc: {f}");
            ExitCode::from(f.code())
        }
    }
}
