//! `detline`: command-line front end for the verification suites.
//!
//! Exit status is 0 when every check passes, 1 when a check fails (the
//! failing witness is in the report) and 2 for usage or input errors.

mod report;
mod suite;

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use detline::grrcheck::VirtualCombo;
use detline::kexpr::{builtin_script, Script};
use detline::quotientlab::{GradedAlgebra, DEFAULT_BOUND};

use report::{Emitter, Format, Row};
use suite::Preset;

#[derive(Parser, Debug)]
#[command(name = "detline", version, about = "Exact checks for determinant-line identities")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON-lines output (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Aligned text output.
    #[arg(long, global = true)]
    text: bool,
    /// Series truncation for `quotient`.
    #[arg(long, global = true, value_name = "N")]
    bound: Option<usize>,
    /// Built-in model: Pn, PnxPm, Hirzebruch, or a full spec like `Hirzebruch(2)`.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "model_file")]
    model: Option<String>,
    /// JSON model file.
    #[arg(long = "model-file", global = true, value_name = "PATH")]
    model_file: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true)]
    m: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    e: Option<i64>,
    /// Worker threads for `verify-all` (0 = one per core).
    #[arg(long, global = true, value_name = "K", default_value_t = 0)]
    jobs: usize,
    /// Include wall time in the summary (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exponent table c_j(d).
    Coeffs {
        #[arg(long)]
        dim: u32,
        /// Also emit the unfolded (i, j) matrix.
        #[arg(long)]
        matrix: bool,
    },
    /// The P_k telescoping identity.
    Polyid {
        #[arg(long)]
        k: u32,
    },
    /// Universal degree-(d+1) defect of a combination.
    Universal {
        #[arg(long, default_value_t = 1)]
        dim: u32,
        #[arg(long, value_enum, default_value = "main")]
        preset: Preset,
        /// JSON combination `{"terms": [{coeff, twist, sym, dual}]}`.
        #[arg(long, value_name = "FILE")]
        combo: Option<PathBuf>,
    },
    /// Product of d+2 formal (1 - e^l) factors.
    Ducrot {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        drop_one: bool,
    },
    /// Degree of c_1(lambda(F)) on a family over a curve.
    C1lambda {
        #[arg(long)]
        bundle: String,
    },
    /// The main identity on a family for a twisting line.
    VerifyMain {
        #[arg(long)]
        line: String,
    },
    /// Euler characteristic on a model over a point.
    Euler {
        #[arg(long)]
        bundle: String,
    },
    /// Integer-span deduction in a Picard lattice.
    Picard {
        /// JSON `{"symbols": [...], "relations": ["a = b", ...]}`.
        #[arg(long, value_name = "FILE")]
        relations: PathBuf,
        #[arg(long)]
        goal: String,
    },
    /// Check a rewrite chain step by step.
    Rewrite {
        #[arg(long, required_unless_present = "script", conflicts_with = "script")]
        chain: Option<String>,
        #[arg(long, value_name = "FILE")]
        script: Option<PathBuf>,
        /// Swap steps N and N+1 before checking.
        #[arg(long, value_name = "N")]
        corrupt: Option<usize>,
        /// Override a script parameter, `name=value`.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
    },
    /// Freeness over the invariant ring of a sign action.
    Quotient {
        /// `name:degree:parity`, comma separated.
        #[arg(long)]
        vars: String,
    },
    /// Every suite, up to relative dimension D.
    VerifyAll {
        #[arg(long, default_value_t = 3)]
        max_dim: u32,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Coeffs { .. } => "coeffs",
            Cmd::Polyid { .. } => "polyid",
            Cmd::Universal { .. } => "universal",
            Cmd::Ducrot { .. } => "ducrot",
            Cmd::C1lambda { .. } => "c1lambda",
            Cmd::VerifyMain { .. } => "verify-main",
            Cmd::Euler { .. } => "euler",
            Cmd::Picard { .. } => "picard",
            Cmd::Rewrite { .. } => "rewrite",
            Cmd::Quotient { .. } => "quotient",
            Cmd::VerifyAll { .. } => "verify-all",
        }
    }
}

/// Bad input: reported on stderr, exit 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

/// Output errors; a closed pipe (`detline ... | head`) ends the run quietly.
fn out<T>(r: io::Result<T>) -> Result<T, UsageError> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => std::process::exit(0),
        r => Ok(r?),
    }
}

fn read(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn model(g: &Global) -> Result<detline::chowmodel::ChowModel, UsageError> {
    suite::load_model(g.model.as_deref(), g.model_file.as_deref(), g.n, g.m, g.e).map_err(UsageError)
}

fn model_inputs(g: &Global) -> Value {
    json!({
        "model": g.model,
        "model_file": g.model_file,
        "n": g.n,
        "m": g.m,
        "e": g.e,
    })
}

fn script(chain: &Option<String>, path: &Option<PathBuf>, corrupt: Option<usize>, params: &[String]) -> Result<Script, UsageError> {
    let mut s = match (chain, path) {
        (Some(name), _) => builtin_script(name)?,
        (None, Some(p)) => Script::from_json(&read(p)?)?,
        (None, None) => return Err(UsageError("rewrite needs --chain or --script".into())),
    };
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| UsageError(format!("--param `{p}` is not name=value")))?;
        let v: i64 = v.trim().parse().map_err(|_| UsageError(format!("--param `{p}`: bad integer")))?;
        s = s.with_param(k.trim(), v)?;
    }
    if let Some(n) = corrupt {
        s = s.corrupt(n)?;
    }
    Ok(s)
}

/// Rows of a single-purpose command together with its inputs echo.
fn rows_for(cmd: &Cmd, g: &Global) -> Result<(Vec<Row>, Value), UsageError> {
    let bound = g.bound.unwrap_or(DEFAULT_BOUND);
    Ok(match cmd {
        Cmd::Coeffs { dim, matrix } => (suite::coeffs(*dim, *matrix)?, json!({ "dim": dim, "matrix": matrix })),
        Cmd::Polyid { k } => (suite::polyid(*k), json!({ "k": k })),
        Cmd::Universal { dim, preset, combo } => {
            let (label, c) = match combo {
                Some(p) => {
                    let c: VirtualCombo = serde_json::from_str(&read(p)?)?;
                    ("file".to_string(), VirtualCombo::new(c.terms)?)
                }
                None => (
                    match preset {
                        Preset::Main => "main",
                        Preset::DeligneD1 => "deligne-d1",
                    }
                    .to_string(),
                    suite::preset_combo(*preset, *dim),
                ),
            };
            let control = combo.is_none() && *preset == Preset::Main && *dim > 0;
            (
                suite::universal(*dim, &label, &c, control)?,
                json!({ "dim": dim, "preset": label, "combo": combo }),
            )
        }
        Cmd::Ducrot { dim, drop_one } => (suite::ducrot(*dim, *drop_one)?, json!({ "dim": dim, "drop_one": drop_one })),
        Cmd::C1lambda { bundle } => {
            let mut inputs = model_inputs(g);
            inputs["bundle"] = json!(bundle);
            (suite::c1lambda(&model(g)?, bundle)?, inputs)
        }
        Cmd::VerifyMain { line } => {
            let mut inputs = model_inputs(g);
            inputs["line"] = json!(line);
            (suite::verify_main(&model(g)?, line)?, inputs)
        }
        Cmd::Euler { bundle } => {
            let mut inputs = model_inputs(g);
            inputs["bundle"] = json!(bundle);
            (suite::euler(&model(g)?, bundle)?, inputs)
        }
        Cmd::Picard { relations, goal } => {
            let rel: suite::RelationsFile = serde_json::from_str(&read(relations)?)?;
            (suite::picard(&rel, goal)?, json!({ "relations": relations, "goal": goal }))
        }
        Cmd::Rewrite {
            chain,
            script: path,
            corrupt,
            params,
        } => {
            let s = script(chain, path, *corrupt, params)?;
            (
                suite::rewrite(&s)?,
                json!({ "chain": chain, "script": path, "corrupt": corrupt, "params": s.params }),
            )
        }
        Cmd::Quotient { vars } => {
            let a: GradedAlgebra = vars.parse()?;
            (suite::quotient(&a, bound)?, json!({ "vars": vars, "bound": bound }))
        }
        Cmd::VerifyAll { .. } => unreachable!("handled by verify_all"),
    })
}

/// Runs the suite on a worker pool and emits rows in task order as soon as
/// each prefix of tasks is complete.
fn verify_all<W: Write>(max_dim: u32, g: &Global, em: &mut Emitter<W>) -> Result<(), UsageError> {
    let tasks = suite::verify_all(max_dim, g.bound.unwrap_or(DEFAULT_BOUND));
    let total = tasks.len();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(g.jobs).build()?;
    let (tx, rx) = mpsc::channel::<(usize, Vec<Row>)>();
    for (i, task) in tasks.into_iter().enumerate() {
        let tx = tx.clone();
        pool.spawn(move || {
            let _ = tx.send((i, task()));
        });
    }
    drop(tx);
    let mut pending = BTreeMap::new();
    let mut next = 0;
    for (i, rows) in rx {
        pending.insert(i, rows);
        while let Some(rows) = pending.remove(&next) {
            for r in rows {
                out(em.emit(r))?;
            }
            next += 1;
        }
    }
    // A task that panicked never reported.
    for i in next..total {
        match pending.remove(&i) {
            Some(rows) => out(rows.into_iter().try_for_each(|r| em.emit(r)))?,
            None => out(em.emit(Row::error(format!("task {i}"), "check panicked", "no result")))?,
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, UsageError> {
    let start = Instant::now();
    let format = if cli.global.text { Format::Text } else { Format::Json };
    let stdout = io::stdout().lock();
    let mut em = Emitter::new(stdout, format, cli.cmd.name());
    let inputs = match &cli.cmd {
        Cmd::VerifyAll { max_dim } => {
            verify_all(*max_dim, &cli.global, &mut em)?;
            json!({ "max_dim": max_dim, "bound": cli.global.bound.unwrap_or(DEFAULT_BOUND) })
        }
        cmd => {
            let (rows, inputs) = rows_for(cmd, &cli.global)?;
            for r in rows {
                out(em.emit(r))?;
            }
            inputs
        }
    };
    let wall = cli.global.timing.then(|| start.elapsed());
    out(em.finish(inputs, wall))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
