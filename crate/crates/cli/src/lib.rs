//! Command-line front end: generators, builders, checkers, restrictions and
//! the SOS degree search, each run optionally recorded in a manifest that
//! can be replayed byte for byte.

mod commands;
pub mod manifest;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

pub use manifest::{reproduce, sha256_hex, FileDigest, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// A checker rejected its input, or a builder's precondition failed.
    Check(String),
    /// Bad arguments or unreadable input.
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Usage(e)
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "sosforge", version, about = "Proof-complexity formula families, resolution and sums-of-squares certificates")]
pub struct Cli {
    /// Write a run manifest (command, seed, file hashes, timing) here.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct SeedArg {
    #[arg(long, env = "SOSFORGE_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// k-clique formula of a graph, as DIMACS.
    GenClique {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Block polynomial encoding of a k-partite graph, as constraint JSON.
    GenBlock {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random 3-XOR system with density·n equations.
    #[command(name = "gen-3xor")]
    Gen3xor {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        density: u32,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Graph whose k-cliques are the solutions of a 3-XOR system.
    GenXorGraph {
        #[arg(long)]
        xor: PathBuf,
        #[arg(long)]
        k: usize,
        /// Keep assignments violating their own block as isolated vertices.
        #[arg(long)]
        keep_violating: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Threshold formula over k counters and domain m.
    GenThreshold {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Relativizes a symmetric formula to domain m with threshold k.
    Relativize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tree-like refutation of the k-clique formula of a graph.
    RefuteClique {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        out: PathBuf,
        /// Also write the refuted formula.
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Refutation of the brute-force gadget with sizes m₁,…,m_k.
    RefuteBruteforce {
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Refutation of the threshold formula plus every clause ⋁_{ι∈D} ¬s_ι
    /// with |D| = k.
    RefuteThreshold {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Refutation of the relativized k-clique formula of a graph.
    RefuteRelativized {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Checks a resolution trace against a DIMACS formula.
    CheckRes {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        /// Accept derivations that do not end in the empty clause.
        #[arg(long)]
        allow_derivation: bool,
    },
    /// Compiles a resolution refutation into an SOS certificate.
    CompileSos {
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Checks an SOS certificate exactly.
    CheckSos {
        #[arg(long)]
        cert: PathBuf,
    },
    /// Rewrites a clique-formula certificate into a block-encoding one.
    TransformCliqueBlock {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rewrites a block-encoding certificate of an XOR graph into one for
    /// the parity system.
    TransformBlockXor {
        #[arg(long)]
        xor: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        keep_violating: bool,
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Samples a restriction of a relativized formula and renames the
    /// result onto the base domain.
    Restrict {
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Restriction and recovery witness, as JSON.
        #[arg(long)]
        witness: PathBuf,
        /// Base formula to compare the restricted formula against.
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Monte Carlo shrinkage experiment, as a JSON report.
    Shrink {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        lprime: u32,
        #[arg(long)]
        trials: u64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degree-bounded SOS refutation search.
    SosSearch {
        #[command(flatten)]
        input: SystemInput,
        /// Largest degree tried.
        #[arg(long, conflicts_with = "degree")]
        dmax: Option<usize>,
        /// Solve a single degree instead of searching.
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Solver outcome, as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exact certificate, when one is extracted.
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Size measures of a formula, system, proof or certificate.
    Measure {
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long, requires = "cnf")]
        proof: Option<PathBuf>,
        #[arg(long)]
        sys: Option<PathBuf>,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Replays a manifest and compares every recorded hash.
    Reproduce {
        #[arg(value_name = "MANIFEST")]
        recorded: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct SystemInput {
    /// Constraint system JSON.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// DIMACS formula, encoded clause by clause.
    #[arg(long)]
    pub cnf: Option<PathBuf>,
    /// 3-XOR system JSON, parity encoded.
    #[arg(long)]
    pub xor: Option<PathBuf>,
}

/// Files and text produced while running one command.
#[derive(Debug, Default)]
pub struct Session {
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub stdout: Vec<u8>,
    pub seed: Option<u64>,
}

impl Session {
    pub fn read(&mut self, flag: &str, path: &std::path::Path) -> anyhow::Result<String> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(FileDigest {
            flag: flag.into(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn write(&mut self, flag: &str, path: &std::path::Path, content: &str) -> anyhow::Result<()> {
        fs::write(path, content).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(FileDigest {
            flag: flag.into(),
            path: path.display().to_string(),
            sha256: sha256_hex(content.as_bytes()),
        });
        Ok(())
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.extend_from_slice(line.as_ref().as_bytes());
        self.stdout.push(b'\n');
    }
}

pub struct RunOutput {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

/// Parses `args` (program name first), runs the command, and writes the
/// manifest if one was requested.
pub fn run_captured(args: Vec<String>) -> RunOutput {
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                RunOutput { code, stdout: text.into_bytes(), stderr: String::new() }
            } else {
                RunOutput { code, stdout: Vec::new(), stderr: text }
            };
        }
    };
    let started = Instant::now();
    let mut session = Session::default();
    let result = commands::dispatch(&cli.command, &mut session);
    let (code, mut stderr) = match result {
        Ok(()) => (EXIT_OK, String::new()),
        Err(CliError::Check(msg)) => (EXIT_CHECK, format!("check failed: {msg}\n")),
        Err(CliError::Usage(e)) => (EXIT_USAGE, format!("error: {e:#}\n")),
    };

    if let Some(path) = &cli.manifest {
        let (command, parameters) = split_parameters(&args);
        let m = RunManifest {
            command,
            parameters,
            seed: session.seed,
            inputs: session.inputs.clone(),
            outputs: session.outputs.clone(),
            stdout_sha256: sha256_hex(&session.stdout),
            exit_code: code,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_ms: started.elapsed().as_millis() as u64,
        };
        if let Err(e) = fs::write(path, m.to_json()) {
            stderr.push_str(&format!("error: writing manifest {}: {e}\n", path.display()));
            return RunOutput { code: EXIT_USAGE, stdout: session.stdout, stderr };
        }
    }
    RunOutput { code, stdout: session.stdout, stderr }
}

/// Subcommand name and its arguments, dropping `--manifest` and `--seed`
/// (the resolved seed is recorded separately).
fn split_parameters(args: &[String]) -> (String, Vec<String>) {
    let mut rest = Vec::new();
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--manifest" || a == "--seed" {
            it.next();
        } else if !(a.starts_with("--manifest=") || a.starts_with("--seed=")) {
            rest.push(a.clone());
        }
    }
    let command = if rest.is_empty() { String::new() } else { rest.remove(0) };
    (command, rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameters_drop_seed_and_manifest() {
        let args: Vec<String> = ["sosforge", "--manifest", "m.json", "shrink", "--m", "8", "--seed=3", "--k", "2"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (cmd, params) = split_parameters(&args);
        assert_eq!(cmd, "shrink");
        assert_eq!(params, ["--m", "8", "--k", "2"]);
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        let out = run_captured(vec!["sosforge".into(), "frobnicate".into()]);
        assert_eq!(out.code, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let out = run_captured(vec!["sosforge".into(), "--help".into()]);
        assert_eq!(out.code, EXIT_OK);
        assert!(String::from_utf8(out.stdout).unwrap().contains("sos-search"));
    }
}
