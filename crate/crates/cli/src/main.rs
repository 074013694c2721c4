//! `bi`: structure-relation verification and spectral data for the
//! Bannai–Ito algebra realized on `osp(1,2)^{⊗n}`.

mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bi_core::connection::{
    adjacent_path, compose_path, direct_overlap, recurrence_along_path, BasisCache,
};
use bi_core::linalg::parse_rational;
use bi_core::relations::verify_all;
use bi_core::spectral::{joint_eigenbasis, max_abs, tridiagonal_action, ChainAlgebra, Tolerances};
use bi_core::{BiError, SpaceConfig, SubsetLabel, TensorSpace};
use clap::{Args, Parser, Subcommand};

use crate::output::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "bi", version, about = "Exact Bannai–Ito algebra engine on osp(1,2) tensor products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct SpaceArgs {
    /// Number of tensor factors.
    #[arg(long)]
    n: Option<usize>,

    /// Comma-separated site parameters as exact rationals, e.g. 1/2,1/3,1/4.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Vec<String>,

    /// Largest retained level; every site is truncated there.
    #[arg(long)]
    max_level: Option<usize>,

    /// Tensor-space JSON: {"n":…, "sites":[{"mu":"p/q","truncation":N},…], "max_level":E}.
    #[arg(long, conflicts_with_all = ["n", "mu"])]
    config: Option<PathBuf>,

    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Emit JSON (default).
    #[arg(long, conflicts_with = "csv")]
    json: bool,

    /// Emit CSV.
    #[arg(long)]
    csv: bool,

    /// Eigenvector residual tolerance, relative to the block norm.
    #[arg(long, default_value_t = 1e-10)]
    eig_tol: f64,

    /// Orthogonality tolerance for connection-coefficient blocks.
    #[arg(long, default_value_t = 1e-9)]
    cc_tol: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check every anticommutation relation and centrality, exactly.
    Verify {
        #[command(flatten)]
        space: SpaceArgs,
        /// Include elapsed_ms in the report (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Joint eigenbasis of a chain subalgebra on one level.
    Spectrum {
        #[command(flatten)]
        space: SpaceArgs,
        /// Permutation defining the chain, e.g. 1,2,3.
        #[arg(long, value_delimiter = ',')]
        chain: Vec<usize>,
        #[arg(long)]
        level: usize,
    },
    /// Bands of a Casimir acting in a chain eigenbasis.
    Tridiag {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',')]
        chain: Vec<usize>,
        #[arg(long)]
        level: usize,
        /// Subset whose Casimir is applied, e.g. 2,3.
        #[arg(long, value_delimiter = ',')]
        op: Vec<usize>,
        /// Labeled subset to sort by; defaults to the first chain generator.
        #[arg(long, value_delimiter = ',')]
        sort_key: Vec<usize>,
    },
    /// Connection coefficients between two chain bases, with recurrence check.
    Cc {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_delimiter = ',')]
        from: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        to: Vec<usize>,
        #[arg(long)]
        level: usize,
    },
}

/// Bad input: exit 2. Mathematical failure: exit 1.
enum Failure {
    Usage(String),
    Math(String),
}

impl From<BiError> for Failure {
    fn from(e: BiError) -> Self {
        match e {
            BiError::Degeneracy { .. }
            | BiError::NotTridiagonal { .. }
            | BiError::Pairing { .. }
            | BiError::Numerical { .. } => Failure::Math(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl SpaceArgs {
    fn format(&self) -> Format {
        if self.csv {
            Format::Csv
        } else {
            Format::Json
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            eigen_residual: self.eig_tol,
            cc_orthogonality: self.cc_tol,
            ..Tolerances::default()
        }
    }

    fn build(&self, level: Option<usize>) -> Result<TensorSpace, Failure> {
        let config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                let mut cfg: SpaceConfig = serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                if let Some(m) = self.max_level {
                    cfg.max_level = m;
                }
                cfg
            }
            None => {
                let n = self
                    .n
                    .ok_or_else(|| Failure::Usage("--n is required without --config".into()))?;
                if self.mu.len() != n {
                    return Err(Failure::Usage(format!(
                        "--mu has {} entries but --n is {n}",
                        self.mu.len()
                    )));
                }
                let mus = self
                    .mu
                    .iter()
                    .map(|m| parse_rational(m))
                    .collect::<Result<Vec<_>, _>>()?;
                let max_level = self.max_level.or(level).ok_or_else(|| {
                    Failure::Usage("--max-level is required".into())
                })?;
                if max_level < 1 {
                    return Err(Failure::Usage("--max-level must be at least 1".into()));
                }
                SpaceConfig::uniform(&mus, max_level)
            }
        };
        Ok(TensorSpace::from_config(&config)?)
    }
}

fn subset(sites: &[usize], what: &str) -> Result<SubsetLabel, Failure> {
    if sites.is_empty() {
        return Err(Failure::Usage(format!("--{what} needs at least one site")));
    }
    Ok(SubsetLabel::from_sites(sites)?)
}

fn run(command: &Command) -> Result<(Report, bool, &SpaceArgs), Failure> {
    match command {
        Command::Verify { space: args, timing } => {
            let space = args.build(None)?;
            let report = verify_all(&space)?;
            eprintln!("verify: {} ms", report.elapsed.as_millis());
            let ok = report.passes();
            Ok((Report::verify(&report, *timing), ok, args))
        }
        Command::Spectrum {
            space: args,
            chain,
            level,
        } => {
            let space = args.build(Some(*level))?;
            let chain = ChainAlgebra::new(chain)?;
            let basis = joint_eigenbasis(&space, &chain, *level, &args.tolerances())?;
            Ok((Report::spectrum(&basis), true, args))
        }
        Command::Tridiag {
            space: args,
            chain,
            level,
            op,
            sort_key,
        } => {
            let space = args.build(Some(*level))?;
            let chain = ChainAlgebra::new(chain)?;
            let tol = args.tolerances();
            let basis = joint_eigenbasis(&space, &chain, *level, &tol)?;
            let op = subset(op, "op")?;
            let key = if sort_key.is_empty() {
                0
            } else {
                let key = subset(sort_key, "sort-key")?;
                basis.label_index(key).ok_or_else(|| {
                    Failure::Usage(format!("{key} does not label this chain basis"))
                })?
            };
            let action = tridiagonal_action(&space, op, &basis, key, &tol)?;
            Ok((Report::tridiag(&basis, &action), true, args))
        }
        Command::Cc {
            space: args,
            from,
            to,
            level,
        } => {
            let space = args.build(Some(*level))?;
            let tol = args.tolerances();
            let source = ChainAlgebra::new(from)?;
            let target = ChainAlgebra::new(to)?;
            let path = adjacent_path(from, to)?;
            let composed = compose_path(&space, &path, *level, &tol)?;
            let mut cache = BasisCache::new(&space, *level, &tol);
            let src = cache.get(&source)?.clone();
            let tgt = cache.get(&target)?.clone();
            let direct = direct_overlap(&src, &tgt, &tol)?;
            let composition = max_abs(&(&composed.assembled - &direct.assembled));
            let recurrence = recurrence_along_path(&space, &path, *level, &tol)?
                .iter()
                .map(|(_, r)| r.max_residual)
                .fold(0.0, f64::max);
            let ok = composed.orthogonality_residual <= tol.cc_orthogonality
                && composition <= tol.composition
                && recurrence <= tol.recurrence;
            Ok((
                Report::cc(&composed, &path, recurrence, composition),
                ok,
                args,
            ))
        }
    }
}

fn space_args(command: &Command) -> &SpaceArgs {
    match command {
        Command::Verify { space, .. }
        | Command::Spectrum { space, .. }
        | Command::Tridiag { space, .. }
        | Command::Cc { space, .. } => space,
    }
}

fn emit(args: &SpaceArgs, text: &str) -> std::io::Result<()> {
    match &args.out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads() {
    if let Some(n) = std::env::var("BI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let args = space_args(&cli.command);
    let (text, code) = match run(&cli.command) {
        Ok((report, ok, args)) => (report.render(args.format()), if ok { 0 } else { 1 }),
        Err(Failure::Usage(msg)) => {
            eprintln!("bi: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Math(msg)) => {
            eprintln!("bi: {msg}");
            (Report::error(&msg).render(args.format()), 1)
        }
    };
    if let Err(e) = emit(args, &text) {
        eprintln!("bi: cannot write output: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
