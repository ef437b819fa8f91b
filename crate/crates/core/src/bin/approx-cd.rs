//! Command-line front end: solve a problem from a LibSVM file, generate
//! synthetic instances, or compare stepsize choices.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use approx_cd::eso::compare_stepsizes;
use approx_cd::io::{gen_synthetic_problem, read_libsvm, write_libsvm, write_runlog, LibsvmData, Regime};
use approx_cd::{
    run, BlockPartition, CompositeProblem, Engine, Error, Mode, Regularizer, Result, SamplingKind, ScalarLoss,
    SolverConfig, StepsizeKind,
};

#[derive(Parser)]
#[command(name = "approx-cd", version, about = "Accelerated parallel proximal coordinate descent")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize a composite objective built from a LibSVM file.
    Solve(SolveArgs),
    /// Write a synthetic instance in LibSVM format.
    Gen(GenArgs),
    /// Print the l1 norms of the fr, rt and nc stepsizes for several tau.
    CompareStepsizes(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Square,
    Logistic,
    SmoothedAbs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegArg {
    None,
    L1,
    BoxLinear,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Approx,
    Pcdm,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepArg {
    Fr,
    Rt,
    Nc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Nice,
    Independent,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    /// Rows of the file are the rows of A, labels are the targets.
    Generic,
    /// Dual of the linear SVM: one coordinate per example.
    DualSvm,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Uniform,
    Intermediate,
    Extreme,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    /// Standard normal targets.
    Real,
    /// Random +1/-1 labels.
    Sign,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "generic")]
    problem: ProblemArg,
    #[arg(long, value_enum, default_value = "square")]
    loss: LossArg,
    /// Smoothing parameter of the smoothed absolute loss.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, value_enum, default_value = "none")]
    reg: RegArg,
    /// L1 weight; for the dual SVM the regularization parameter (default 1/N).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    box_lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    box_hi: f64,
    /// Linear coefficient of the box-linear regularizer.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    box_slope: f64,
    /// Coordinates per block; the last block takes the remainder.
    #[arg(long, default_value_t = 1)]
    block_size: usize,
    #[arg(long, default_value_t = 1)]
    tau: usize,
    #[arg(long, value_enum, default_value = "nice")]
    sampling: SamplingArg,
    #[arg(long, value_enum, default_value = "approx")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "fr")]
    stepsizes: StepArg,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative objective decrease per 50 iterations below which to stop.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    log_period: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Write the final point here, one coordinate per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "real")]
    labels: LabelArg,
}

#[derive(clap::Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    tau: Vec<usize>,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn partition(dim: usize, block_size: usize) -> Result<BlockPartition> {
    if block_size == 0 {
        return Err(Error::Config("block size must be at least 1".into()));
    }
    let mut sizes = vec![block_size; dim / block_size];
    if !dim.is_multiple_of(block_size) {
        sizes.push(dim % block_size);
    }
    BlockPartition::new(&sizes)
}

fn build_problem(args: &SolveArgs, data: LibsvmData) -> Result<CompositeProblem> {
    if let ProblemArg::DualSvm = args.problem {
        data.require_binary_labels()?;
        let n = data.targets.len();
        let lambda = args.lambda.unwrap_or(1.0 / n as f64);
        return CompositeProblem::dual_svm(&data.matrix.transpose(), &data.targets, lambda);
    }
    let (matrix, loss) = match args.loss {
        LossArg::Square => (data.matrix, ScalarLoss::square(data.targets)),
        LossArg::SmoothedAbs => (data.matrix, ScalarLoss::smoothed_abs(data.targets, args.mu)?),
        LossArg::Logistic => {
            data.require_binary_labels()?;
            let flip: Vec<f64> = data.targets.iter().map(|y| -y).collect();
            (data.matrix.scale_rows(&flip)?, ScalarLoss::Logistic)
        }
    };
    let reg = match args.reg {
        RegArg::None => Regularizer::Zero,
        RegArg::L1 => Regularizer::l1(args.lambda.unwrap_or(0.0))?,
        RegArg::BoxLinear => Regularizer::box_linear(args.box_lo, args.box_hi, args.box_slope)?,
    };
    let p = partition(matrix.cols(), args.block_size)?;
    CompositeProblem::new(matrix, p, loss, reg)
}

fn solve(args: SolveArgs) -> Result<()> {
    let data = read_libsvm(&args.input)?;
    let problem = build_problem(&args, data)?;
    let mut x0 = vec![0.0; problem.dim()];
    problem.reg.project_domain(&mut x0);
    let config = SolverConfig {
        tau: args.tau,
        sampling: match args.sampling {
            SamplingArg::Nice => SamplingKind::TauNice,
            SamplingArg::Independent => SamplingKind::TauIndependent,
        },
        mode: match args.mode {
            ModeArg::Approx => Mode::Approx,
            ModeArg::Pcdm => Mode::Pcdm,
        },
        engine: Engine::Efficient,
        stepsizes: match args.stepsizes {
            StepArg::Fr => StepsizeKind::Fr,
            StepArg::Rt => StepsizeKind::Rt,
            StepArg::Nc => StepsizeKind::Nc,
        },
        max_iters: args.max_iters,
        seed: args.seed,
        log_period: args.log_period,
        tolerance: args.tolerance,
        threads: args.threads,
        x0: Some(x0),
        ..SolverConfig::default()
    };
    let result = run(&problem, &config)?;
    if let Some(path) = &args.log {
        write_runlog(&result.log, path)?;
    }
    if let Some(path) = &args.out {
        let mut w = BufWriter::new(File::create(path)?);
        for v in &result.x {
            writeln!(w, "{v}")?;
        }
        w.flush()?;
    }
    let last = result.log.records.last().expect("the log always has a first record");
    println!(
        "iterations={} objective={} elapsed_s={}",
        result.iterations, last.objective, last.elapsed_s
    );
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let regime = match args.regime {
        RegimeArg::Uniform => Regime::Uniform,
        RegimeArg::Intermediate => Regime::Intermediate,
        RegimeArg::Extreme => Regime::Extreme,
    };
    let mut data = gen_synthetic_problem(regime, args.m, args.n, args.seed)?;
    if let LabelArg::Sign = args.labels {
        for y in &mut data.targets {
            *y = if *y >= 0.0 { 1.0 } else { -1.0 };
        }
    }
    write_libsvm(&data, &args.out)
}

fn compare(args: CompareArgs) -> Result<()> {
    let data = read_libsvm(&args.input)?;
    let p = BlockPartition::unit(data.matrix.cols())?;
    let problem = CompositeProblem::new(data.matrix, p, ScalarLoss::square(data.targets), Regularizer::Zero)?;
    let rows = compare_stepsizes(&problem, &args.tau)?;
    let mut w: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(w, "tau,l1_fr,l1_rt,l1_nc,omega,omega_bar")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{},{}", r.tau, r.l1_fr, r.l1_rt, r.l1_nc, r.omega, r.omega_bar)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Gen(a) => gen(a),
        Command::CompareStepsizes(a) => compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
