//! Command-line front end: generate hardness instances, solve steady-state
//! covariances, run the greedy and exhaustive optimizers, sweep the
//! greedy-failure ratio into CSV, and run the verification suites.
//!
//! Exit codes: 0 success, 1 usage/parse/solver errors, 2 unbounded steady
//! state (undetectable selection).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use kfss::instances::{
    build_example1_instance, build_theorem1_instance, build_theorem2_instance, parse_instance,
    serialize_instance, theorem3_limit_ratio, HardnessInstance, X3CInstance,
};
use kfss::riccati::{solve_dare, Selection, SteadyState};
use kfss::selection::{exhaustive_select, greedy_select, ratio};
use kfss::verify::{lemma1_random_suite, lemma2_suite, theorem3_suite, transform_suite};

#[derive(Parser)]
#[command(
    name = "kfss",
    about = "Sensor selection for steady-state Kalman filtering",
    after_help = "Exit codes: 0 success, 1 usage or parse error, 2 unbounded steady state."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the steady-state covariance for a fixed sensor mask
    Solve {
        /// Instance file to load
        #[arg(long)]
        instance: PathBuf,
        /// Selection bitmask such as 101; the first character is sensor 1
        #[arg(long)]
        mask: String,
    },
    /// Greedy selection (unit costs, budget = number of sensors to pick)
    Greedy {
        #[arg(long)]
        instance: PathBuf,
        /// Number of greedy rounds
        #[arg(long)]
        budget: usize,
    },
    /// Exhaustive optimal selection under the cost budget
    Exhaustive {
        #[arg(long)]
        instance: PathBuf,
        /// Cost budget B of the constraint b'mu <= B
        #[arg(long)]
        budget: f64,
    },
    /// Generate an instance file for one of the hardness families
    Gen {
        #[arg(long)]
        family: Family,
        /// Cover parameter m (theorem1/theorem2); the ground set is {1..3m}
        #[arg(long)]
        m: Option<usize>,
        /// Approximation gap factor K >= 1 (theorem2)
        #[arg(long)]
        k: Option<f64>,
        /// Dynamics eigenvalue, 0 < |lambda1| < 1 (default 0.5 for theorem1;
        /// required for example1; derived from K for theorem2)
        #[arg(long)]
        lambda1: Option<f64>,
        /// Measurement scale h > 0 (example1)
        #[arg(long)]
        h: Option<f64>,
        /// Inline cover collection, e.g. "1,2,3;4,5,6" (theorem1/theorem2)
        #[arg(long)]
        collection: Option<String>,
        /// File holding the cover collection, one or more "a,b,c" triples
        /// separated by semicolons or newlines
        #[arg(long)]
        collection_file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep greedy-vs-optimal ratios over (lambda1, h) grids into a CSV
    SweepRatio {
        /// Comma-separated lambda1 grid
        #[arg(long, value_delimiter = ',')]
        lambda1: Vec<f64>,
        /// Comma-separated h grid
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the verification suites
    Verify {
        /// Seed of the randomized sweep
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Family {
    Theorem1,
    Theorem2,
    Example1,
}

/// Round to 12 significant digits, then print the shortest representation.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float");
    format!("{rounded}")
}

/// Fixed-width CSV cell: 12 significant digits, scientific.
fn fmt_csv(x: f64) -> String {
    format!("{x:.11e}")
}

/// One executed command, printed as deterministic `key value` lines.
struct RunRecord {
    command: &'static str,
    instance: String,
    fields: Vec<(String, String)>,
}

impl RunRecord {
    fn new(command: &'static str, instance: impl Into<String>) -> Self {
        Self {
            command,
            instance: instance.into(),
            fields: Vec::new(),
        }
    }

    fn push(&mut self, key: &str, value: impl Into<String>) {
        self.fields.push((key.to_string(), value.into()));
    }

    fn print(&self) {
        println!("command {}", self.command);
        println!("instance {}", self.instance);
        for (k, v) in &self.fields {
            println!("{k} {v}");
        }
    }
}

fn load_instance(path: &Path) -> Result<HardnessInstance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("cannot parse {}", path.display()))
}

fn cmd_solve(path: &Path, mask: &str) -> Result<u8> {
    let inst = load_instance(path)?;
    if mask.len() != inst.catalog.q() {
        bail!(
            "mask has {} characters but the instance holds {} sensors",
            mask.len(),
            inst.catalog.q()
        );
    }
    let sel = Selection::from_mask_str(mask, inst.budget)?;
    let steady = solve_dare(&inst.sys, &inst.catalog, &sel)?;
    let mut record = RunRecord::new("solve", path.display().to_string());
    record.push("mask", mask);
    match &steady {
        SteadyState::Unbounded => {
            record.print();
            println!("unbounded");
            Ok(2)
        }
        SteadyState::Finite {
            sigma,
            trace,
            iterations,
        } => {
            record.push("trace", fmt_sig(*trace));
            let diag: Vec<String> = (0..sigma.nrows())
                .map(|i| fmt_sig(sigma[(i, i)]))
                .collect();
            record.push("diag", diag.join(" "));
            record.push("iterations", iterations.to_string());
            record.print();
            Ok(0)
        }
    }
}

fn cmd_greedy(path: &Path, budget: usize) -> Result<u8> {
    let inst = load_instance(path)?;
    let result = greedy_select(&inst.sys, &inst.catalog, budget)?;
    let mut record = RunRecord::new("greedy", path.display().to_string());
    record.push("budget", budget.to_string());
    let picks: Vec<String> = result.picks.iter().map(|i| (i + 1).to_string()).collect();
    record.push("picks", picks.join(","));
    record.push("mask", result.selection.mask_string());
    let history: Vec<String> = result.trace_history.iter().copied().map(fmt_sig).collect();
    record.push("trace_history", history.join(" "));
    record.push("trace", fmt_sig(result.steady.trace_extended()));
    if let Some(iters) = result.steady.iterations() {
        record.push("iterations", iters.to_string());
    }
    record.print();
    Ok(0)
}

fn cmd_exhaustive(path: &Path, budget: f64) -> Result<u8> {
    let inst = load_instance(path)?;
    let result = exhaustive_select(&inst.sys, &inst.catalog, budget)?;
    let mut record = RunRecord::new("exhaustive", path.display().to_string());
    record.push("budget", fmt_sig(budget));
    record.push("mask", result.selection.mask_string());
    record.push("trace", fmt_sig(result.steady.trace_extended()));
    if let Some(iters) = result.steady.iterations() {
        record.push("iterations", iters.to_string());
    }
    record.print();
    Ok(0)
}

fn parse_collection(text: &str) -> Result<Vec<[usize; 3]>> {
    let mut subsets = Vec::new();
    for part in text
        .split([';', '\n'])
        .map(str::trim)
        .filter(|p| !p.is_empty())
    {
        let elems: Vec<usize> = part
            .split(',')
            .map(|e| e.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad subset {part:?}"))?;
        if elems.len() != 3 {
            bail!("subset {part:?} must have exactly three elements");
        }
        subsets.push([elems[0], elems[1], elems[2]]);
    }
    Ok(subsets)
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    family: Family,
    m: Option<usize>,
    k: Option<f64>,
    lambda1: Option<f64>,
    h: Option<f64>,
    collection: Option<String>,
    collection_file: Option<PathBuf>,
    out: &Path,
) -> Result<u8> {
    let collection_text = match (collection, collection_file) {
        (Some(inline), None) => Some(inline),
        (None, Some(path)) => Some(
            std::fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?,
        ),
        (None, None) => None,
        (Some(_), Some(_)) => bail!("pass either --collection or --collection-file, not both"),
    };
    let require_x3c = |what: &str| -> Result<X3CInstance> {
        let m = m.ok_or_else(|| anyhow!("--m is required for {what}"))?;
        let text = collection_text
            .as_deref()
            .ok_or_else(|| anyhow!("--collection or --collection-file is required for {what}"))?;
        Ok(X3CInstance::new(m, parse_collection(text)?)?)
    };
    let inst = match family {
        Family::Theorem1 => {
            let x3c = require_x3c("theorem1")?;
            build_theorem1_instance(&x3c, lambda1.unwrap_or(0.5))?
        }
        Family::Theorem2 => {
            let x3c = require_x3c("theorem2")?;
            let k = k.ok_or_else(|| anyhow!("--k is required for theorem2"))?;
            if lambda1.is_some() {
                bail!("theorem2 derives lambda1 from K; do not pass --lambda1");
            }
            build_theorem2_instance(&x3c, k)?
        }
        Family::Example1 => {
            let lambda1 = lambda1.ok_or_else(|| anyhow!("--lambda1 is required for example1"))?;
            let h = h.ok_or_else(|| anyhow!("--h is required for example1"))?;
            build_example1_instance(lambda1, h)?
        }
    };
    std::fs::write(out, serialize_instance(&inst))
        .with_context(|| format!("cannot write {}", out.display()))?;
    let mut record = RunRecord::new("gen", out.display().to_string());
    record.push("n", inst.sys.n().to_string());
    record.push("q", inst.catalog.q().to_string());
    record.push("budget", fmt_sig(inst.budget));
    record.print();
    Ok(0)
}

fn cmd_sweep_ratio(lambda1s: &[f64], hs: &[f64], out: &Path) -> Result<u8> {
    let mut csv = String::from("lambda1,h,trace_greedy,trace_opt,ratio,ratio_limit\n");
    for &lambda1 in lambda1s {
        for &h in hs {
            let inst = build_example1_instance(lambda1, h)?;
            let greedy = greedy_select(&inst.sys, &inst.catalog, 2)?;
            let optimal = exhaustive_select(&inst.sys, &inst.catalog, inst.budget)?;
            let rr = ratio(&greedy, &optimal);
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_csv(lambda1),
                fmt_csv(h),
                fmt_csv(rr.trace_alg),
                fmt_csv(rr.trace_opt),
                fmt_csv(rr.ratio),
                fmt_csv(theorem3_limit_ratio(lambda1)),
            ));
        }
    }
    std::fs::write(out, &csv).with_context(|| format!("cannot write {}", out.display()))?;
    let mut record = RunRecord::new("sweep-ratio", out.display().to_string());
    record.push("rows", (lambda1s.len() * hs.len()).to_string());
    record.print();
    Ok(0)
}

fn cmd_verify(seed: u64) -> Result<u8> {
    let suites = vec![
        lemma1_random_suite(seed, 200),
        lemma2_suite(),
        transform_suite(),
        theorem3_suite(),
    ];
    let mut ok = true;
    for suite in &suites {
        if suite.passed() {
            println!("suite {}: PASS ({} cases)", suite.name, suite.cases);
        } else {
            ok = false;
            println!(
                "suite {}: FAIL ({} of {} cases)",
                suite.name,
                suite.failures.len(),
                suite.cases
            );
            for f in &suite.failures {
                println!("  {f}");
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { instance, mask } => cmd_solve(&instance, &mask),
        Command::Greedy { instance, budget } => cmd_greedy(&instance, budget),
        Command::Exhaustive { instance, budget } => cmd_exhaustive(&instance, budget),
        Command::Gen {
            family,
            m,
            k,
            lambda1,
            h,
            collection,
            collection_file,
            out,
        } => cmd_gen(family, m, k, lambda1, h, collection, collection_file, &out),
        Command::SweepRatio { lambda1, h, out } => cmd_sweep_ratio(&lambda1, &h, &out),
        Command::Verify { seed } => cmd_verify(seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let outcome = run(cli);
    eprintln!("wall_time_ms {:.3}", started.elapsed().as_secs_f64() * 1e3);
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
