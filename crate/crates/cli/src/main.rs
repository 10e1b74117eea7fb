use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quarteig::numkit::RankStrategy;
use quarteig::probio::{self, ChainAt, Report, ReportFormat};
use quarteig::solver::EigvecMode;
use quarteig::{Error, SolveConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "quarteig", version, about = "Quartic eigenvalue solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem stored in a bundle directory.
    Solve {
        bundle: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Solve one bundle under several configurations and merge the results.
    Compare {
        bundle: PathBuf,
        /// Comma-separated overrides, e.g. `balance=off,scale=on`. Repeat
        /// at least twice.
        #[arg(long = "config", required = true)]
        configs: Vec<String>,
        #[command(flatten)]
        out: OutputArgs,
        #[arg(long, env = "QUARTEIG_THREADS")]
        threads: Option<usize>,
    },
    /// Write a synthetic problem bundle.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Target directory.
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Planted {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        zero_cols_e: usize,
        #[arg(long, default_value_t = 0)]
        zero_cols_a: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Jordan {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        len: usize,
        #[arg(long, value_enum, default_value_t = At::Zero)]
        at: At,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    MirrorLike {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Graded {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum At {
    Zero,
    Infinity,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Strategy {
    Norm,
    Dropoff,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    MinResidual,
    LeastSquares,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    #[arg(long, value_enum, default_value_t = Switch::On)]
    scale: Switch,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    balance: Switch,
    #[arg(long, default_value_t = 5)]
    balance_iters: usize,
    #[arg(long, value_enum, default_value_t = Strategy::Norm)]
    rank_strategy: Strategy,
    /// Rank tolerance in (0, 1); defaults to dim·ε (norm) or √ε (dropoff).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    deflate: Switch,
    #[arg(long, value_enum, default_value_t = Mode::MinResidual)]
    eigvec_mode: Mode,
    /// Skip left eigenvectors.
    #[arg(long)]
    no_left: bool,
    #[arg(long, env = "QUARTEIG_THREADS")]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Report path without extension; defaults to `<problem>-report`.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
}

impl ConfigArgs {
    fn to_config(&self) -> SolveConfig {
        let rank_strategy = match self.rank_strategy {
            Strategy::Norm => RankStrategy::NormThreshold { tau: self.tol },
            Strategy::Dropoff => match self.tol {
                Some(rho) => RankStrategy::Dropoff { rho },
                None => RankStrategy::dropoff(),
            },
        };
        SolveConfig {
            scale: self.scale.on(),
            balance: self.balance.on(),
            balance_iters: self.balance_iters,
            rank_strategy,
            deflate: self.deflate.on(),
            eigvec_mode: match self.eigvec_mode {
                Mode::MinResidual => EigvecMode::MinResidual,
                Mode::LeastSquares => EigvecMode::LeastSquares,
            },
            want_left: !self.no_left,
            threads: self.threads,
        }
    }

    /// `balance=off,scale=on` parsed with the same rules as the flags.
    fn from_overrides(spec: &str, threads: Option<usize>) -> Result<Self, Failure> {
        #[derive(Parser)]
        struct Wrap {
            #[command(flatten)]
            c: ConfigArgs,
        }
        let mut argv = vec!["config".to_string()];
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) => {
                    argv.push(format!("--{}", k.trim().replace('_', "-")));
                    argv.push(v.trim().to_string());
                }
                None => argv.push(format!("--{}", item.replace('_', "-"))),
            }
        }
        let mut c = Wrap::try_parse_from(&argv)
            .map_err(|e| Failure::usage(format!("config '{spec}': {}", e.kind())))?
            .c;
        if c.threads.is_none() {
            c.threads = threads;
        }
        Ok(c)
    }
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
            Format::Both => ReportFormat::Both,
        }
    }
}

/// Machine-readable failure printed as JSON on stderr.
#[derive(Debug, Serialize)]
struct Failure {
    kind: &'static str,
    message: String,
    exit_code: u8,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure {
            kind: "usage",
            message,
            exit_code: 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (kind, exit_code) = match &e {
            Error::MissingFile { .. } => ("missing_file", 3),
            Error::MalformedMatrix { .. } => ("malformed_matrix", 4),
            Error::Dimension(_) => ("dimension", 5),
            Error::NonFinite => ("non_finite", 6),
            Error::InvalidArgument(_) => ("invalid_argument", 7),
            Error::Deflation(_) => ("deflation", 8),
            Error::QzNoConvergence { .. } => ("qz_no_convergence", 9),
            Error::SvdNoConvergence => ("svd_no_convergence", 14),
            Error::SingularShift { .. } => ("singular_shift", 10),
            Error::Io { .. } => ("io", 11),
            Error::Json(_) => ("json", 12),
        };
        Failure {
            kind,
            message: e.to_string(),
            exit_code,
        }
    }
}

fn report_stem(out: &OutputArgs, problem: &str) -> PathBuf {
    out.output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{problem}-report")))
}

fn run_one(bundle: &probio::ProblemBundle, cfg: &SolveConfig) -> Result<Report, Failure> {
    let sol = quarteig::solve(&bundle.pencil, cfg)?;
    if sol.pairs.len() != 4 * bundle.pencil.n {
        return Err(Failure {
            kind: "incomplete",
            message: format!("{} of {} eigenpairs produced", sol.pairs.len(), 4 * bundle.pencil.n),
            exit_code: 13,
        });
    }
    Ok(Report::from_solution(&bundle.name, &sol))
}

fn cmd_solve(bundle: &Path, config: &ConfigArgs, out: &OutputArgs) -> Result<Vec<PathBuf>, Failure> {
    let b = probio::read_bundle(bundle)?;
    let report = run_one(&b, &config.to_config())?;
    Ok(probio::write_report(&report, &report_stem(out, &b.name), out.format.into())?)
}

fn modulus_key(p: &probio::PairRecord) -> f64 {
    p.lambda.map_or(f64::INFINITY, |[re, im]| re.hypot(im))
}

fn merged_csv(reports: &[Report]) -> Result<String, Failure> {
    let opt = |v: Option<f64>| v.map(quarteig::probio::csv_field).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["rank".to_string()];
    for k in 0..reports.len() {
        for col in ["index", "lambda_re", "lambda_im", "modulus", "class", "eta_right", "eta_left", "omega_right", "omega_left"] {
            header.push(format!("{col}_{k}"));
        }
    }
    let csv_err = |e: csv::Error| Failure::from(Error::InvalidArgument(format!("csv: {e}")));
    w.write_record(&header).map_err(csv_err)?;
    let sorted: Vec<Vec<&probio::PairRecord>> = reports
        .iter()
        .map(|r| {
            let mut v: Vec<_> = r.eigenpairs.iter().collect();
            v.sort_by(|a, b| modulus_key(a).total_cmp(&modulus_key(b)).then(a.index.cmp(&b.index)));
            v
        })
        .collect();
    for row in 0..sorted[0].len() {
        let mut rec = vec![row.to_string()];
        for s in &sorted {
            let p = s[row];
            let (re, im) = p.lambda.map_or((None, None), |[a, b]| (Some(a), Some(b)));
            rec.extend([
                p.index.to_string(),
                opt(re),
                opt(im),
                probio::csv_field(modulus_key(p)),
                probio::class_name(p.class).to_string(),
                opt(p.eta_right),
                opt(p.eta_left),
                opt(p.omega_right),
                opt(p.omega_left),
            ]);
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn cmd_compare(
    bundle: &Path,
    configs: &[String],
    out: &OutputArgs,
    threads: Option<usize>,
) -> Result<Vec<PathBuf>, Failure> {
    if configs.len() < 2 {
        return Err(Failure::usage("compare needs at least two --config values".into()));
    }
    let parsed = configs
        .iter()
        .map(|c| ConfigArgs::from_overrides(c, threads))
        .collect::<Result<Vec<_>, _>>()?;
    let b = probio::read_bundle(bundle)?;
    let stem = report_stem(out, &b.name);
    let mut written = Vec::new();
    let mut reports = Vec::new();
    for (k, c) in parsed.iter().enumerate() {
        let r = run_one(&b, &c.to_config())?;
        let name = format!("{}-cfg{k}", stem.file_name().map(|s| s.to_string_lossy()).unwrap_or_default());
        written.extend(probio::write_report(&r, &stem.with_file_name(name), out.format.into())?);
        reports.push(r);
    }
    let name = format!("{}-compare.csv", stem.file_name().map(|s| s.to_string_lossy()).unwrap_or_default());
    let merged = stem.with_file_name(name);
    fs::write(&merged, merged_csv(&reports)?).map_err(|e| Error::Io {
        path: merged.clone(),
        source: e,
    })?;
    written.push(merged);
    Ok(written)
}

fn cmd_gen(kind: &GenKind, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
    let b = match *kind {
        GenKind::Planted {
            n,
            zero_cols_e,
            zero_cols_a,
            seed,
        } => probio::gen_planted(n, zero_cols_e, zero_cols_a, seed)?,
        GenKind::Jordan { n, len, at, seed } => {
            let at = match at {
                At::Zero => ChainAt::Zero,
                At::Infinity => ChainAt::Infinity,
            };
            probio::gen_jordan_chain(n, len, at, seed)?
        }
        GenKind::MirrorLike { seed } => probio::gen_mirror_like(seed)?,
        GenKind::Graded { n, seed } => probio::gen_graded(n, seed)?,
    };
    probio::write_bundle(dir, &b)?;
    Ok(vec![dir.to_path_buf()])
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure::usage(e.to_string().trim_end().to_string());
            eprintln!("{}", serde_json::to_string(&f).expect("serializable"));
            return ExitCode::from(f.exit_code);
        }
    };
    let res = match &cli.cmd {
        Command::Solve { bundle, config, out } => cmd_solve(bundle, config, out),
        Command::Compare {
            bundle,
            configs,
            out,
            threads,
        } => cmd_compare(bundle, configs, out, *threads),
        Command::Gen { kind, output } => cmd_gen(kind, output),
    };
    match res {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", serde_json::to_string(&f).expect("serializable"));
            ExitCode::from(f.exit_code)
        }
    }
}
