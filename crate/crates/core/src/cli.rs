//! Command-line front end: `gen`, `svd`, `bench` and `compare`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bench::{parse_grid, run_benchmark, BenchReport, EntryOutcome};
use crate::datagen::{gen_low_rank, SpectrumKind, SpectrumSpec};
use crate::dense::{full_svd, DenseMatrix};
use crate::error::{HsvdError, Result};
use crate::factor::{rank_k_error_against, MatConfig, SvdFactor};
use crate::hierarchy::hierarchical_svd_full;
use crate::io::{load_matrix, save_matrix, to_csv, MatrixFormat};
use crate::refine::refine;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hsvd", version, about = "Hierarchical merge-and-truncate SVD")]
struct Cli {
    /// Print every number with 17 significant digits.
    #[arg(long, global = true)]
    precise: bool,

    /// Threads for the dense kernels.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded matrix with a prescribed spectrum.
    Gen(GenArgs),
    /// Approximate truncated SVD of a matrix file.
    Svd(SvdArgs),
    /// Time the pipeline over a block-size grid against the full SVD.
    Bench(BenchArgs),
    /// One block configuration side by side with the full SVD.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Number of singular values following the decay law.
    #[arg(long)]
    rank: usize,
    /// `exp:RATIO` or `pow:EXPONENT`.
    #[arg(long, value_parser = parse_decay)]
    decay: SpectrumKind,
    #[arg(long, default_value_t = 0.0)]
    noise_floor: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// `csv` or `hsvd`; inferred from the extension when omitted.
    #[arg(long, value_parser = parse_format)]
    format: Option<MatrixFormat>,
}

#[derive(Debug, Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_format)]
    format: Option<MatrixFormat>,
    #[arg(long, default_value_t = 1e-2)]
    gamma: f64,
}

#[derive(Debug, Args)]
struct SvdArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Rows per row slice; defaults to all rows.
    #[arg(long)]
    row_block: Option<usize>,
    /// Columns per column slice; defaults to all columns.
    #[arg(long)]
    col_block: Option<usize>,
    #[arg(long)]
    refine: bool,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 10)]
    max_iters: usize,
    /// Writes PREFIX_U.hsvd, PREFIX_S.hsvd, PREFIX_V.hsvd and PREFIX_sigma.csv.
    #[arg(long)]
    out_prefix: Option<String>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Block sizes as `d1xc1,d2xc2,...`.
    #[arg(long, value_parser = parse_grid_arg)]
    grid: Grid,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// Also show refined columns in the summary.
    #[arg(long)]
    refine: bool,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 10)]
    max_iters: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    c: usize,
}

#[derive(Debug, Clone)]
struct Grid(Vec<(usize, usize)>);

fn parse_grid_arg(s: &str) -> std::result::Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<MatrixFormat, String> {
    s.parse().map_err(|e: HsvdError| e.to_string())
}

fn parse_decay(s: &str) -> std::result::Result<SpectrumKind, String> {
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected exp:RATIO or pow:EXPONENT, got '{s}'"))?;
    let value: f64 = value
        .parse()
        .map_err(|_| format!("bad decay parameter '{value}'"))?;
    match kind {
        "exp" => Ok(SpectrumKind::Exponential { ratio: value }),
        "pow" => Ok(SpectrumKind::PowerLaw { exponent: value }),
        other => Err(format!("unknown decay law '{other}'")),
    }
}

struct Printer {
    precise: bool,
}

impl Printer {
    fn num(&self, v: f64) -> String {
        if self.precise {
            format!("{v:.16e}")
        } else {
            format!("{v:.6e}")
        }
    }

    fn list(&self, values: &[f64]) -> String {
        values.iter().map(|v| self.num(*v)).collect::<Vec<_>>().join(" ")
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    crate::set_kernel_threads(cli.threads);
    let p = Printer {
        precise: cli.precise,
    };
    let outcome = match &cli.command {
        Command::Gen(a) => cmd_gen(a, &p, out),
        Command::Svd(a) => cmd_svd(a, &p, out),
        Command::Bench(a) => cmd_bench(a, &p, out),
        Command::Compare(a) => cmd_compare(a, &p, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn format_for(path: &Path, explicit: Option<MatrixFormat>) -> MatrixFormat {
    explicit.unwrap_or_else(|| MatrixFormat::infer(path))
}

fn load(input: &InputArgs) -> Result<DenseMatrix> {
    load_matrix(&input.input, format_for(&input.input, input.format))
}

fn emit(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<()> {
    out.write_fmt(text)
        .map_err(|e| HsvdError::io(Path::new("<stdout>"), e))
}

fn cmd_gen(a: &GenArgs, p: &Printer, out: &mut dyn Write) -> Result<()> {
    let spec = SpectrumSpec {
        kind: a.decay.clone(),
        rank: a.rank,
        noise_floor: a.noise_floor,
        seed: a.seed,
    };
    let (x, truth) = gen_low_rank(a.rows, a.cols, &spec)?;
    save_matrix(&x, &a.out, format_for(&a.out, a.format))?;
    let head = &truth[..truth.len().min(10)];
    emit(out, format_args!("wrote {}x{} to {}\n", a.rows, a.cols, a.out.display()))?;
    emit(out, format_args!("sigma {}\n", p.list(head)))
}

fn cmd_svd(a: &SvdArgs, p: &Printer, out: &mut dyn Write) -> Result<()> {
    let x = load(&a.input)?;
    let cfg = MatConfig {
        gamma: a.input.gamma,
        row_block: a.row_block.unwrap_or(x.rows()),
        col_block: a.col_block.unwrap_or(x.cols()),
        epsilon: a.eps,
        max_iters: a.max_iters,
        max_rank: None,
    };
    cfg.validate()?;
    let mut f = hierarchical_svd_full(&x, &cfg)?;
    if a.refine {
        let r = refine(&x, &f, &cfg)?;
        emit(
            out,
            format_args!(
                "refine iterations {} change {} converged {}\n",
                r.iterations,
                p.num(r.final_error),
                r.converged
            ),
        )?;
        f = r.factor;
    }
    let f = f.normalize_signs();
    emit(out, format_args!("rank {}\n", f.rank()))?;
    emit(out, format_args!("sigma {}\n", p.list(f.sigma())))?;
    if let Some(prefix) = &a.out_prefix {
        write_factor(&f, prefix)?;
    }
    Ok(())
}

fn write_factor(f: &SvdFactor, prefix: &str) -> Result<()> {
    let bin = MatrixFormat::HsvdBinary;
    save_matrix(f.u().expect("full factor"), format!("{prefix}_U.hsvd"), bin)?;
    save_matrix(&DenseMatrix::diag(f.sigma()), format!("{prefix}_S.hsvd"), bin)?;
    save_matrix(f.v().expect("full factor"), format!("{prefix}_V.hsvd"), bin)?;
    let column = DenseMatrix::column(f.sigma());
    let path = format!("{prefix}_sigma.csv");
    std::fs::write(&path, to_csv(&column)).map_err(|e| HsvdError::io(Path::new(&path), e))
}

fn cmd_bench(a: &BenchArgs, p: &Printer, out: &mut dyn Write) -> Result<()> {
    let x = load(&a.input)?;
    let cfg = MatConfig {
        gamma: a.input.gamma,
        epsilon: a.eps,
        max_iters: a.max_iters,
        ..MatConfig::default()
    };
    let report = run_benchmark(&x, &cfg, &a.grid.0, a.repeats)?;
    print_summary(&report, a.refine, p, out)?;
    if let Some(path) = &a.json {
        std::fs::write(path, report.to_json()).map_err(|e| HsvdError::io(path, e))?;
    }
    Ok(())
}

/// Text table, one line per grid entry.
fn print_summary(report: &BenchReport, refined: bool, p: &Printer, out: &mut dyn Write) -> Result<()> {
    let (m, n) = report.matrix_dims;
    emit(
        out,
        format_args!(
            "matrix {m}x{n} gamma {} repeats {} threads {}\n",
            p.num(report.gamma),
            report.repeats,
            report.kernel_threads
        ),
    )?;
    for entry in &report.grid {
        let (d, c) = (entry.block_rows, entry.block_cols);
        match &entry.outcome {
            EntryOutcome::Metrics(mm) => {
                emit(
                    out,
                    format_args!(
                        "{d}x{c} rank {} speedup {} rel_error {} predicted {}",
                        mm.recovered_rank,
                        p.num(mm.speedup),
                        p.num(mm.rel_error),
                        p.num(mm.predicted.predicted_speedup())
                    ),
                )?;
                if refined {
                    emit(
                        out,
                        format_args!(
                            " speedup_refined {} rel_error_refined {}",
                            p.num(mm.speedup_refined),
                            p.num(mm.rel_error_refined)
                        ),
                    )?;
                }
                emit(out, format_args!("\n"))?;
            }
            EntryOutcome::Failed { error } => emit(out, format_args!("{d}x{c} error {error}\n"))?,
        }
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs, p: &Printer, out: &mut dyn Write) -> Result<()> {
    let x = load(&a.input)?;
    let cfg = MatConfig::new(a.input.gamma, a.d, a.c);
    cfg.validate()?;

    let start = Instant::now();
    let reference = full_svd(&x)?;
    let t_full = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let approx = hierarchical_svd_full(&x, &cfg)?;
    let t_mat = start.elapsed().as_secs_f64();

    let rank = approx.rank();
    let err = rank_k_error_against(&reference, &approx, rank)?;
    let head = |f: &SvdFactor| p.list(&f.sigma()[..f.rank().min(10)]);
    emit(out, format_args!("rank {rank}\n"))?;
    emit(out, format_args!("rel_error {}\n", p.num(err)))?;
    emit(out, format_args!("speedup {}\n", p.num(t_full / t_mat)))?;
    emit(out, format_args!("sigma_full {}\n", head(&reference)))?;
    emit(out, format_args!("sigma_mat {}\n", head(&approx)))
}
