use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use switchctl::bench::{run_bench, BenchConfig};
use switchctl::decide::{
    check_structural, compute_kstar, crosscheck, Certificate, KStar, KStarResult, Verdict,
};
use switchctl::flow::{
    build_lifted_network, build_small_network, max_flow, network_to_dot, network_to_json,
};
use switchctl::graph::{brute_force_check, kstar_brute, to_digraph};
use switchctl::oracle::{controllability_rank, trial_seed, Criterion};
use switchctl::pattern::{
    parse_pattern, sample_instance, PatternFormat, SparsityPattern, DEFAULT_VALUE_BOUND,
};
use switchctl::Error;

/// Environment variable that makes `--seed` mandatory for randomized commands.
const REQUIRE_SEED_ENV: &str = "SWITCHCTL_REQUIRE_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "switchctl",
    version,
    about = "Structural controllability of switched linear ensembles"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    output: Output,
    /// Also write a Graphviz rendering to this path.
    #[arg(long, global = true)]
    dot_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Grid,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Span,
    Sequential,
}

#[derive(Args, Debug)]
struct PatternArgs {
    /// Pattern file (grid format, or JSON when the name ends in `.json`).
    pattern: PathBuf,
    /// Override the format detected from the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide structural controllability for (k, q) with the max-flow test.
    Check {
        #[command(flatten)]
        input: PatternArgs,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: u64,
        /// Include wall-clock time in the output.
        #[arg(long)]
        timings: bool,
    },
    /// Least number of switches that works for every ensemble size.
    Kstar {
        #[command(flatten)]
        input: PatternArgs,
    },
    /// Decide by enumerating all subsets (n <= 24).
    Brute {
        #[command(flatten)]
        input: PatternArgs,
        #[arg(long, required_unless_present = "kstar")]
        k: Option<u64>,
        #[arg(long, required_unless_present = "kstar")]
        q: Option<u64>,
        /// Compute k* by enumeration instead of a (k, q) verdict.
        #[arg(long)]
        kstar: bool,
    },
    /// Exact rank test on random instances of the pattern.
    Oracle {
        #[command(flatten)]
        input: PatternArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_VALUE_BOUND)]
        value_bound: u64,
        #[arg(long, value_enum, default_value_t = CriterionArg::Span)]
        criterion: CriterionArg,
        /// Use powers 1..=qn only (drop d = 0 from the span).
        #[arg(long)]
        literal_d_range: bool,
    },
    /// Compare the flow decision with the enumeration oracles on a grid.
    Crosscheck {
        #[command(flatten)]
        input: PatternArgs,
        #[arg(long)]
        kmax: u64,
        #[arg(long)]
        qmax: u64,
    },
    /// Write the flow network for (k, q), solved, as JSON (and DOT).
    Flowdump {
        #[command(flatten)]
        input: PatternArgs,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        q: u64,
        /// Dump the unit-capacity lifted network instead.
        #[arg(long)]
        lifted: bool,
        /// Replace left-right capacities by the witness-mode bound.
        #[arg(long, conflicts_with = "lifted")]
        witness_mode: bool,
    },
    /// Time the decision and k* paths on random patterns of growing size.
    Bench {
        #[arg(long, default_value_t = 50)]
        nmin: usize,
        #[arg(long, default_value_t = 400)]
        nmax: usize,
        #[arg(long, default_value_t = 0.05)]
        density: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 3)]
        q: u64,
    },
}

/// Failure categories, each with its own exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Guard(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Guard(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Guard(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Grid { .. } | Error::Json { .. } => Failure::Input(e.to_string()),
            Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Guard(e.to_string()),
        }
    }
}

fn load_pattern(input: &PatternArgs) -> Result<SparsityPattern, Failure> {
    let text = std::fs::read_to_string(&input.pattern)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", input.pattern.display())))?;
    let format = match input.format {
        Some(FormatArg::Grid) => PatternFormat::Grid,
        Some(FormatArg::Json) => PatternFormat::Json,
        None if input.pattern.extension().is_some_and(|e| e == "json") => PatternFormat::Json,
        None => PatternFormat::Grid,
    };
    parse_pattern(&text, format)
        .map_err(|e| Failure::Input(format!("{}: {e}", input.pattern.display())))
}

fn seed_or_default(seed: Option<u64>) -> Result<u64, Failure> {
    match seed {
        Some(s) => Ok(s),
        None if std::env::var(REQUIRE_SEED_ENV).is_ok_and(|v| !v.is_empty() && v != "0") => Err(
            Failure::Usage(format!("--seed is required when {REQUIRE_SEED_ENV} is set")),
        ),
        None => Ok(0),
    }
}

fn write_dot(path: &Option<PathBuf>, dot: impl FnOnce() -> String) -> Result<(), Failure> {
    if let Some(p) = path {
        write_file(p, &dot())?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn subset_text(v: &[usize]) -> String {
    let names: Vec<String> = v.iter().map(|i| format!("a{}", i + 1)).collect();
    format!("{{{}}}", names.join(", "))
}

fn verdict_text(v: &Verdict) -> String {
    let mut s = format!("decision: {}\n", v.decision);
    if let Some(t) = v.stats.theta {
        s += &format!("theta: {t} (target {})\n", v.stats.target);
    }
    s += &match &v.certificate {
        Certificate::Unreachable { nodes } => {
            format!("unreachable from the inputs: {}\n", subset_text(nodes))
        }
        Certificate::ViolatingSubset {
            subset, lhs, rhs, ..
        } => {
            format!(
                "violating subset {}: lhs {lhs} < rhs {rhs}\n",
                subset_text(subset)
            )
        }
        Certificate::Saturated { value } => format!("saturating flow of value {value}\n"),
        Certificate::Exhaustive { subsets_checked } => {
            format!("all {subsets_checked} nonempty subsets satisfy the counting condition\n")
        }
    };
    s
}

fn kstar_text(r: &KStarResult) -> String {
    let mut s = match r.value {
        KStar::Finite(v) => format!("kstar: {v}\n"),
        KStar::Infinite => "kstar: infinite\n".to_string(),
    };
    if let Some(w) = &r.witness {
        s += &format!("witness: {}\n", w.to_json());
    }
    for p in &r.trace {
        s += &format!("probe k={}: theta {} / {}\n", p.k, p.theta, p.target);
    }
    s
}

fn emit(output: Output, doc: Value, text: impl FnOnce() -> String) -> String {
    match output {
        Output::Json => {
            serde_json::to_string_pretty(&doc).expect("JSON values always serialize") + "\n"
        }
        Output::Text => text(),
    }
}

fn run(cli: Cli) -> Result<String, Failure> {
    let out = cli.output;
    match cli.command {
        Command::Check {
            input,
            k,
            q,
            timings,
        } => {
            let p = load_pattern(&input)?;
            let v = check_structural(&p, k, q)?;
            write_dot(&cli.dot_out, || {
                build_small_network(&to_digraph(&p), k, q, false)
                    .map(|net| network_to_dot(&net, Some(&max_flow(&net))))
                    .unwrap_or_default()
            })?;
            Ok(emit(out, v.to_json(timings), || verdict_text(&v)))
        }
        Command::Kstar { input } => {
            let p = load_pattern(&input)?;
            let r = compute_kstar(&p)?;
            write_dot(&cli.dot_out, || to_digraph(&p).to_dot())?;
            Ok(emit(out, r.to_json(), || kstar_text(&r)))
        }
        Command::Brute { input, k, q, kstar } => {
            let p = load_pattern(&input)?;
            let g = to_digraph(&p);
            write_dot(&cli.dot_out, || g.to_dot())?;
            if kstar {
                let r = kstar_brute(&g)?;
                Ok(emit(out, r.to_json(), || kstar_text(&r)))
            } else {
                let (k, q) = (k.unwrap_or_default(), q.unwrap_or_default());
                let v = brute_force_check(&g, k, q)?;
                Ok(emit(out, v.to_json(false), || verdict_text(&v)))
            }
        }
        Command::Oracle {
            input,
            k,
            q,
            trials,
            seed,
            value_bound,
            criterion,
            literal_d_range,
        } => {
            let seed = seed_or_default(seed)?;
            if trials == 0 {
                return Err(Failure::Usage("--trials must be at least 1".into()));
            }
            let p = load_pattern(&input)?;
            let criterion = match criterion {
                CriterionArg::Span => Criterion::PowerSpan,
                CriterionArg::Sequential => Criterion::SequentialSubspace,
            };
            let structural = check_structural(&p, k as u64, q as u64)?.decision;
            let mut reports = Vec::new();
            let mut successes = 0;
            for t in 0..trials as u64 {
                let inst = sample_instance(&p, k, q, trial_seed(seed, t), value_bound)?;
                let rep = controllability_rank(&inst, criterion, !literal_d_range)?;
                successes += usize::from(rep.controllable);
                reports.push(rep);
            }
            let max_rank = reports.iter().map(|r| r.rank).max().unwrap_or(0);
            let doc = json!({
                "k": k,
                "q": q,
                "trials": trials,
                "seed": seed,
                "value_bound": value_bound,
                "criterion": criterion.to_string(),
                "d_range_used": [reports[0].d_range_used.0, reports[0].d_range_used.1],
                "full_dim": reports[0].full_dim,
                "max_rank": max_rank,
                "successes": successes,
                "controllable": successes > 0,
                "structural": structural,
                "ranks": reports.iter().map(|r| r.rank).collect::<Vec<_>>(),
            });
            Ok(emit(out, doc, || {
                format!(
                    "structural: {structural}\nnumerical: {} ({successes}/{trials} samples of full rank {})\nmax rank: {max_rank}\n",
                    successes > 0,
                    reports[0].full_dim
                )
            }))
        }
        Command::Crosscheck { input, kmax, qmax } => {
            if qmax == 0 {
                return Err(Failure::Usage("--qmax must be at least 1".into()));
            }
            let p = load_pattern(&input)?;
            let r = crosscheck(&p, kmax, qmax)?;
            Ok(emit(out, r.to_json(), || {
                let mut s = format!(
                    "cells: {}\ndisagreements: {}\n",
                    r.cells.len(),
                    r.disagreements.len()
                );
                for d in &r.disagreements {
                    s += &format!("  {d}\n");
                }
                s
            }))
        }
        Command::Flowdump {
            input,
            k,
            q,
            lifted,
            witness_mode,
        } => {
            let p = load_pattern(&input)?;
            let g = to_digraph(&p);
            let net = if lifted {
                build_lifted_network(&g, k, q)?
            } else {
                build_small_network(&g, k, q, witness_mode)?
            };
            let f = max_flow(&net);
            write_dot(&cli.dot_out, || network_to_dot(&net, Some(&f)))?;
            Ok(emit(out, network_to_json(&net, Some(&f)), || {
                network_to_dot(&net, Some(&f))
            }))
        }
        Command::Bench {
            nmin,
            nmax,
            density,
            seed,
            k,
            q,
        } => {
            let seed = seed_or_default(seed)?;
            if nmin == 0 || nmax < nmin {
                return Err(Failure::Usage("need 1 <= --nmin <= --nmax".into()));
            }
            let mut sizes = vec![nmin];
            while *sizes.last().unwrap() * 2 <= nmax {
                sizes.push(sizes.last().unwrap() * 2);
            }
            if *sizes.last().unwrap() != nmax {
                sizes.push(nmax);
            }
            let cfg = BenchConfig {
                sizes,
                density,
                k,
                q,
                seed,
                ..BenchConfig::default()
            };
            let r = run_bench(&cfg)?;
            Ok(emit(out, r.to_json(), || r.to_text()))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
