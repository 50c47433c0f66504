//! Command-line front end. Machine-readable JSON goes to stdout, human
//! summaries to stderr; the exit code is the pass/fail contract.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;
use tsa_core::audit::{audit_scheme, AuditStatus, MiOptions, DEFAULT_BUDGET};
use tsa_core::engine::{check_recovery, run_round, RoundSampler};
use tsa_core::gf::FieldSpec;
use tsa_core::scheme::{
    build_complete, build_prism, build_ring, search_modulation, verify, SchemeError,
    SearchStrategy,
};
use tsa_core::{Scheme, Topology};

use crate::format::{
    parse_elements, scheme_from_str, scheme_to_string, status_name, topology_from_str, AuditJson,
    FormatError, InputsJson, SearchJson, TranscriptJson, VerifyJson,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;
pub const EXIT_SKIPPED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tsa", version, about = "Build, run and audit one-shot secure aggregation schemes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Ring,
    Prism,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Uniform,
    Blockwise,
    Exhaustive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a named scheme and write it as JSON.
    Build {
        #[arg(long, value_enum)]
        topology: Family,
        /// Number of users (ring, complete; prism takes K = 2M).
        #[arg(long)]
        k: Option<usize>,
        /// Cycle length of a prism.
        #[arg(long)]
        m: Option<usize>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the recovery and rank conditions of a scheme file.
    Verify { scheme: PathBuf },
    /// Execute seeded protocol rounds and emit JSON-lines transcripts.
    Run {
        scheme: PathBuf,
        #[arg(long, default_value_t = 1)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file with one input vector or a list of them (cycled).
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Run even if the scheme fails verification.
        #[arg(long)]
        force: bool,
    },
    /// Exhaustive security audit.
    Audit {
        scheme: PathBuf,
        /// Ceiling on q^(K+d) enumerated states.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Drop W_k from the conditioning tuple.
        #[arg(long)]
        reduced: bool,
    },
    /// Search modulation vectors maximizing the kernel dimension.
    Search {
        #[arg(long, value_enum, conflicts_with = "topology_file")]
        topology: Option<Family>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Topology JSON (`{"kind", "K", "edges"}`).
        #[arg(long)]
        topology_file: Option<PathBuf>,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        delta: Option<u64>,
        #[arg(long, value_enum, default_value_t = Strategy::Uniform)]
        strategy: Strategy,
        /// Blocks for the blockwise strategy, e.g. "1,2,3;4,5,6". Prisms
        /// default to their two cycles.
        #[arg(long)]
        blocks: Option<String>,
        /// Maximum number of candidates.
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Topology(#[from] tsa_core::topology::TopologyError),
    #[error(transparent)]
    Field(#[from] tsa_core::gf::GfError),
    #[error("{0}")]
    Usage(String),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_scheme(path: &Path) -> Result<Scheme, CliError> {
    Ok(scheme_from_str(&read(path)?)?)
}

fn prism_size(k: Option<usize>, m: Option<usize>) -> Result<usize, CliError> {
    match (m, k) {
        (Some(m), _) => Ok(m),
        (None, Some(k)) if k % 2 == 0 => Ok(k / 2),
        (None, Some(k)) => Err(CliError::Usage(format!("a prism needs an even K, got {k}"))),
        (None, None) => Err(CliError::Usage("prism needs --m (or --k = 2M)".into())),
    }
}

fn users(k: Option<usize>) -> Result<usize, CliError> {
    k.ok_or_else(|| CliError::Usage("--k is required".into()))
}

fn named_topology(family: Family, k: Option<usize>, m: Option<usize>) -> Result<Topology, CliError> {
    Ok(match family {
        Family::Ring => Topology::ring(users(k)?)?,
        Family::Prism => Topology::prism(prism_size(k, m)?)?,
        Family::Complete => Topology::complete(users(k)?)?,
    })
}

/// Parses `"1,2,3;4,5,6"` (1-based) into 0-based blocks.
fn parse_blocks(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split(';')
        .map(|block| {
            block
                .split(',')
                .map(|v| match v.trim().parse::<usize>() {
                    Ok(label) if label > 0 => Ok(label - 1),
                    _ => Err(CliError::Usage(format!("bad block entry {v:?}"))),
                })
                .collect()
        })
        .collect()
}

fn json_line<T: serde::Serialize>(out: &mut dyn Write, value: &T) {
    let _ = writeln!(out, "{}", serde_json::to_string(value).expect("plain data serializes"));
}

/// Runs a parsed command; returns the process exit code.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Argument
/// errors exit with 1; `--help` and `--version` with 0.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli, out, err),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Build {
            topology,
            k,
            m,
            out: path,
        } => {
            let scheme = match topology {
                Family::Ring => build_ring(users(k)?)?,
                Family::Prism => build_prism(prism_size(k, m)?)?,
                Family::Complete => build_complete(users(k)?)?,
            };
            let text = scheme_to_string(&scheme);
            match path {
                Some(p) => fs::write(&p, text + "\n").map_err(|source| CliError::Io {
                    path: p.clone(),
                    source,
                })?,
                None => {
                    let _ = writeln!(out, "{text}");
                }
            }
            let _ = writeln!(
                err,
                "built {} scheme: K={} d={} field {} rates {}",
                scheme.topology().kind(),
                scheme.users(),
                scheme.d(),
                scheme.spec(),
                scheme.rates()
            );
            Ok(EXIT_OK)
        }
        Command::Verify { scheme } => {
            let s = load_scheme(&scheme)?;
            let report = VerifyJson::new(&verify(&s), s.check_rates());
            json_line(out, &report);
            let _ = writeln!(
                err,
                "recovery {}, rank conditions {}/{} users, rates {}",
                if report.recovery_ok { "ok" } else { "FAILED" },
                report.users.iter().filter(|u| u.pass).count(),
                report.users.len(),
                report.rates_error.as_deref().unwrap_or("ok"),
            );
            Ok(if report.pass { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Run {
            scheme,
            rounds,
            seed,
            inputs,
            force,
        } => {
            let s = load_scheme(&scheme)?;
            if !verify(&s).passed() && !force {
                return Err(CliError::Usage(
                    "scheme fails verification; pass --force to run it anyway".into(),
                ));
            }
            let fixed = match inputs {
                Some(path) => {
                    let parsed: InputsJson =
                        serde_json::from_str(&read(&path)?).map_err(FormatError::from)?;
                    let vectors = parsed
                        .into_vectors()
                        .iter()
                        .map(|v| parse_elements(s.spec(), v))
                        .collect::<Result<Vec<_>, _>>()?;
                    if vectors.is_empty() || vectors.iter().any(|v| v.len() != s.users()) {
                        return Err(CliError::Usage(format!(
                            "inputs must be non-empty vectors of length {}",
                            s.users()
                        )));
                    }
                    Some(vectors)
                }
                None => None,
            };
            let mut sampler = RoundSampler::new(seed);
            let mut failures = 0u64;
            for round in 0..rounds {
                let w = match &fixed {
                    Some(v) => v[(round % v.len() as u64) as usize].clone(),
                    None => sampler.inputs(&s),
                };
                let n = sampler.source_key(&s);
                let t = run_round(&s, &w, &n).map_err(SchemeError::from)?;
                if !check_recovery(&t).iter().all(|&ok| ok) {
                    failures += 1;
                }
                json_line(out, &TranscriptJson::new(round, &t));
            }
            let _ = writeln!(err, "{rounds} rounds, {failures} with recovery failures");
            Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Audit {
            scheme,
            budget,
            reduced,
        } => {
            let s = load_scheme(&scheme)?;
            let options = MiOptions {
                condition_on_own_input: !reduced,
                swap_roles: false,
            };
            let report = audit_scheme(&s, budget, options);
            let status = report.status();
            json_line(out, &AuditJson::from(&report));
            let _ = writeln!(
                err,
                "audit {}: {}/{} users MI-audited over {} states",
                status_name(status),
                report.audited_users(),
                report.users.len(),
                report.states
            );
            Ok(match status {
                AuditStatus::Pass => EXIT_OK,
                AuditStatus::Fail => EXIT_FAILED,
                AuditStatus::PassWithSkips => EXIT_SKIPPED,
            })
        }
        Command::Search {
            topology,
            k,
            m,
            topology_file,
            p,
            delta,
            strategy,
            blocks,
            cap,
        } => {
            let t = match (topology, topology_file) {
                (Some(family), None) => named_topology(family, k, m)?,
                (None, Some(path)) => topology_from_str(&read(&path)?)?,
                _ => {
                    return Err(CliError::Usage(
                        "give exactly one of --topology or --topology-file".into(),
                    ))
                }
            };
            let f = FieldSpec::new(p, delta)?;
            let (name, strat) = match strategy {
                Strategy::Uniform => ("uniform", SearchStrategy::Uniform),
                Strategy::Exhaustive => ("exhaustive", SearchStrategy::Exhaustive),
                Strategy::Blockwise => {
                    let blocks = match blocks {
                        Some(text) => parse_blocks(&text)?,
                        None if t.kind() == tsa_core::topology::TopologyKind::Prism => {
                            let m = t.users() / 2;
                            vec![(0..m).collect(), (m..2 * m).collect()]
                        }
                        None => {
                            return Err(CliError::Usage(
                                "blockwise search needs --blocks".into(),
                            ))
                        }
                    };
                    ("blockwise", SearchStrategy::Blockwise(blocks))
                }
            };
            let r = search_modulation(&t, f, &strat, cap)?;
            let report = SearchJson::new(f, name, &t, &r);
            json_line(out, &report);
            let verdict = match report.feasible {
                Some(true) => "feasible",
                Some(false) => "infeasible",
                None => "n/a (graph not regular)",
            };
            let alpha: Vec<String> = r.best_alpha.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                err,
                "best alpha ({}) kernel dim {} over {} candidates: {verdict}",
                alpha.join(", "),
                r.kernel_dim,
                r.candidates
            );
            Ok(EXIT_OK)
        }
    }
}
