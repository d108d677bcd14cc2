// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit status: 0 on success, 2 for invalid arguments, 1 for failures while
//! running.

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use permquery_core::adversary::OracleKind;
use permquery_core::circuit::CircuitProgram;
use permquery_core::inversion::{decider_circuit, iteration_circuit_for, iteration_layout, Mode};
use permquery_core::oracle_sim::{function_erasure, Construction};
use permquery_core::perm::sample_uniform;
use serde::Serialize;

use crate::formats::{parse_permutation, parse_problem, write_circuit};
use crate::runs;

#[derive(Debug, Parser)]
#[command(name = "permquery", version, about = "Query-model experiments with in-place permutation oracles")]
pub struct Cli {
    /// Write rows to this file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Emit a JSON array of objects instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the text listing of the circuit being run.
    #[arg(long, global = true, value_name = "FILE")]
    pub dump_circuit: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a preimage with in-place queries (one run).
    Invert(InvertArgs),
    /// Analytic success figures against empirical trajectory runs.
    Sweep(SweepArgs),
    /// Trace distance of the oracle constructions over all basis inputs.
    SimulateOracle(SimulateArgs),
    /// Function erasure, and the XOR oracle rebuilt from exact erasure.
    Erase(EraseArgs),
    /// Grover/XOR decider on random PermInvGarb instances.
    Garb(GarbArgs),
    /// Relative γ₂ search and structural checks on a problem file.
    Adversary(AdversaryArgs),
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    /// Qubit count; the permutation is sampled from the seed.
    #[arg(long, required_unless_present = "perm")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// trajectory, deferred or postselect-exact.
    #[arg(long, default_value = "trajectory")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub target: u64,
    /// Permutation file to invert instead of a sampled one.
    #[arg(long, value_name = "FILE")]
    pub perm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Qubit counts, `A..B` (inclusive) or a single value.
    #[arg(long, default_value = "2..8", value_parser = parse_range)]
    pub n: RangeInclusive<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub enum KindChoice {
    One(Construction),
    All,
}

fn parse_kind(s: &str) -> std::result::Result<KindChoice, String> {
    if s == "all" {
        return Ok(KindChoice::All);
    }
    s.parse().map(KindChoice::One).map_err(|e: permquery_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// xor, xor-inverse, inplace-inverse, erase-catalyst, fe, or all.
    #[arg(long, value_parser = parse_kind)]
    pub kind: KindChoice,
    #[arg(long, value_parser = parse_range)]
    pub n: RangeInclusive<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EraseArgs {
    #[arg(long, default_value = "2..5", value_parser = parse_range)]
    pub n: RangeInclusive<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GarbArgs {
    /// Instances act on `2n` qubits.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct AdversaryArgs {
    #[arg(long, value_name = "FILE")]
    pub problem: PathBuf,
    /// phase or inplace.
    #[arg(long)]
    pub kind: OracleKind,
    /// Search over all Hermitian matrices, not only label-disagreeing ones.
    #[arg(long)]
    pub extended: bool,
    #[arg(long, default_value_t = 200)]
    pub budget: usize,
    /// Adversary matrices sampled for the structural checks.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// `A..B`, `A..=B` (both inclusive) or `A`.
pub fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let number = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a count"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (number(a)?, number(b.strip_prefix('=').unwrap_or(b))?),
        None => {
            let v = number(s)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("`{s}` is not a nonempty range of positive counts"));
    }
    Ok(lo..=hi)
}

/// Failure attributed to the arguments rather than to the computation.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn single(range: &RangeInclusive<usize>) -> Result<usize> {
    if range.start() == range.end() {
        Ok(*range.start())
    } else {
        Err(usage("--dump-circuit needs a single value of --n"))
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn render<T: Serialize>(rows: &[T], json: bool) -> Result<Vec<u8>> {
    if json {
        let mut out = serde_json::to_vec_pretty(rows)?;
        out.push(b'\n');
        return Ok(out);
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    Ok(writer.into_inner()?)
}

struct Output {
    rows: Vec<u8>,
    circuit: Option<CircuitProgram>,
}

fn output<T: Serialize>(rows: &[T], json: bool, circuit: Option<CircuitProgram>) -> Result<Output> {
    Ok(Output {
        rows: render(rows, json)?,
        circuit,
    })
}

fn execute(cli: &Cli) -> Result<Output> {
    let want_circuit = cli.dump_circuit.is_some();
    match &cli.command {
        Command::Invert(a) => {
            let p = match &a.perm {
                Some(path) => {
                    let p = parse_permutation(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    if a.n.is_some_and(|n| n != p.qubits()) {
                        return Err(usage("--n disagrees with the permutation file"));
                    }
                    p
                }
                None => {
                    let n = a.n.filter(|&n| n > 0).ok_or_else(|| usage("--n must be positive"))?;
                    sample_uniform(n, a.seed)?
                }
            };
            if a.target >= p.size() as u64 {
                return Err(usage(format!("--target must be below {}", p.size())));
            }
            let circuit = want_circuit
                .then(|| iteration_circuit_for(&iteration_layout(p.qubits())?, a.target))
                .transpose()?;
            output(&[runs::invert_run(&p, a.target, a.mode, a.seed)?], cli.json, circuit)
        }
        Command::Sweep(a) => {
            if a.trials == 0 {
                return Err(usage("--trials must be positive"));
            }
            let circuit = if want_circuit {
                Some(iteration_circuit_for(&iteration_layout(single(&a.n)?)?, 0)?)
            } else {
                None
            };
            let ns: Vec<usize> = a.n.clone().collect();
            output(&runs::sweep(&ns, a.trials, a.seed)?, cli.json, circuit)
        }
        Command::SimulateOracle(a) => {
            let kinds: Vec<Construction> = match a.kind {
                KindChoice::One(c) => vec![c],
                KindChoice::All => Construction::ALL.to_vec(),
            };
            let circuit = match (want_circuit, a.kind) {
                (false, _) => None,
                (true, KindChoice::One(c)) => Some(c.build(single(&a.n)?)?),
                (true, KindChoice::All) => return Err(usage("--dump-circuit needs a single --kind")),
            };
            let mut rows = Vec::new();
            for n in a.n.clone() {
                for &c in &kinds {
                    rows.push(runs::simulate(c, n, a.seed)?);
                }
            }
            output(&rows, cli.json, circuit)
        }
        Command::Erase(a) => {
            let circuit = if want_circuit {
                Some(function_erasure(single(&a.n)?)?)
            } else {
                None
            };
            let rows = a.n.clone().map(|n| runs::erase(n, a.seed)).collect::<Result<Vec<_>>>()?;
            output(&rows, cli.json, circuit)
        }
        Command::Garb(a) => {
            if a.n == 0 || a.instances == 0 {
                return Err(usage("--n and --instances must be positive"));
            }
            let circuit = want_circuit.then(|| decider_circuit(a.n)).transpose()?;
            output(&[runs::garb(a.n, a.instances, a.seed)?], cli.json, circuit)
        }
        Command::Adversary(a) => {
            if want_circuit {
                return Err(usage("adversary runs no circuit; --dump-circuit is not accepted"));
            }
            if a.budget == 0 {
                return Err(usage("--budget must be positive"));
            }
            let text = read(&a.problem)?;
            let problem = parse_problem(&text).map_err(|e| usage(format!("{}: {e}", a.problem.display())))?;
            let row = runs::adversary(&problem, a.kind, a.extended, a.budget, a.samples, a.seed)?;
            output(&[row], cli.json, None)
        }
    }
}

fn deliver(cli: &Cli, out: Output, stdout: &mut dyn Write) -> Result<()> {
    if let (Some(path), Some(program)) = (&cli.dump_circuit, &out.circuit) {
        fs::write(path, write_circuit(program)).with_context(|| format!("writing {}", path.display()))?;
    }
    match &cli.out {
        Some(path) => fs::write(path, &out.rows).with_context(|| format!("writing {}", path.display()))?,
        None => stdout.write_all(&out.rows)?,
    }
    Ok(())
}

fn run_parsed(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let out = match cli.jobs {
        Some(0) => return Err(usage("--jobs must be positive")),
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()?
            .install(|| execute(cli))?,
        None => execute(cli)?,
    };
    deliver(cli, out, stdout)
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit status. Rows go to `stdout` unless `--out` is given.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render().ansi());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_parsed(&cli, stdout) {
        Ok(()) => 0,
        Err(e) if e.is::<Usage>() => {
            let _ = writeln!(stderr, "error: {e}\n\nFor more information, try '--help'.");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            1
        }
    }
}
