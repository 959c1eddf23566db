mod grid;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use xychain::check::{faults, run_oracle_check_with, CheckConfig, PartitionFn};
use xychain::fcs::{
    cumulants, distribution, kink_observable, magnetization_observable, QuadraticObservable,
    Variant as FcsVariant, DEFAULT_CUMULANT_ORDER,
};
use xychain::oracle::MAX_ORACLE_LENGTH;
use xychain::partition::{z_exact, z_ppa};
use xychain::{ChainParams, Error as LibError, Thermal};

use grid::GridSpec;
use output::{Format, Table, Value};

const THREADS_ENV: &str = "XYCHAIN_THREADS";

#[derive(Parser, Debug)]
#[command(name = "xychain", version, about = "Partition functions and counting statistics of the periodic XY chain")]
struct Cli {
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact, PPA and two-level partition functions on a (beta, g) grid.
    Partition(SweepArgs),
    /// Probability distribution of an observable.
    Distribution(FcsArgs),
    /// Cumulants of an observable's distribution.
    Cumulants(FcsArgs),
    /// Compare the analytic results against dense exact diagonalization.
    OracleCheck(OracleArgs),
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Chain length (even).
    #[arg(long = "L")]
    length: usize,
    /// Anisotropy in [0, 1].
    #[arg(long, default_value = "1")]
    gamma: f64,
    /// Transverse field, `value` or `min:max:count`.
    #[arg(long)]
    g: GridSpec,
    /// Inverse temperature, `value` or `min:max:count`.
    #[arg(long)]
    beta: GridSpec,
    /// Space the beta grid logarithmically.
    #[arg(long)]
    log_beta: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FcsArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, value_enum, default_value = "kinks")]
    observable: Observable,
    /// Defaults to `exact` for distributions and `exact` plus `ppa` for cumulants.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Largest chain length in the comparison grid.
    #[arg(long = "L", alias = "l-max", default_value = "10")]
    l_max: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, hide = true)]
    inject_fault: Option<Fault>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Observable {
    Kinks,
    Magnetization,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Exact,
    Ppa,
    CoarseGrainedPpa,
    GroundState,
    InfiniteTemperature,
    TwoLevel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Fault {
    BoundarySign,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum Failure {
    Config(anyhow::Error),
    Io(anyhow::Error),
    Verification(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<LibError> for Failure {
    fn from(e: LibError) -> Self {
        match e {
            LibError::NegativeProbability { .. }
            | LibError::InvalidDistribution(_)
            | LibError::Eigen(_)
            | LibError::OffLattice(_) => Failure::Verification(e.into()),
            _ => Failure::Config(e.into()),
        }
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow!(msg.into()))
}

type Outcome<T> = std::result::Result<T, Failure>;

impl VariantArg {
    fn name(self) -> &'static str {
        match self {
            VariantArg::Exact => "exact",
            VariantArg::Ppa => "ppa",
            VariantArg::CoarseGrainedPpa => "coarse_grained_ppa",
            VariantArg::GroundState => "ground_state",
            VariantArg::InfiniteTemperature => "infinite_temperature",
            VariantArg::TwoLevel => "two_level",
        }
    }

    fn fcs(self) -> Outcome<FcsVariant> {
        Ok(match self {
            VariantArg::Exact => FcsVariant::Exact,
            VariantArg::Ppa => FcsVariant::Ppa,
            VariantArg::CoarseGrainedPpa => FcsVariant::CoarseGrainedPpa,
            VariantArg::GroundState => FcsVariant::GroundState,
            VariantArg::InfiniteTemperature => FcsVariant::InfiniteTemperature,
            VariantArg::TwoLevel => {
                return Err(config("two_level applies to partition functions, not observables"))
            }
        })
    }
}

impl Observable {
    fn name(self) -> &'static str {
        match self {
            Observable::Kinks => "kinks",
            Observable::Magnetization => "magnetization",
        }
    }

    fn build(self, params: &ChainParams) -> QuadraticObservable {
        match self {
            Observable::Kinks => kink_observable(params),
            Observable::Magnetization => magnetization_observable(params),
        }
    }
}

struct Grid {
    length: usize,
    gamma: f64,
    betas: Vec<f64>,
    fields: Vec<f64>,
}

impl Grid {
    fn from_args(a: &SweepArgs) -> Outcome<Self> {
        let betas = a.beta.points(a.log_beta).map_err(Failure::Config)?;
        let fields = a.g.points(false).map_err(Failure::Config)?;
        // validate every parameter up front so sweeps never fail halfway
        for &g in &fields {
            ChainParams::new(a.length, g, a.gamma)?;
        }
        for &b in &betas {
            Thermal::new(b)?;
        }
        Ok(Self {
            length: a.length,
            gamma: a.gamma,
            betas,
            fields,
        })
    }

    /// `(beta, g)` cells in output order: beta outer, g inner.
    fn cells(&self) -> Vec<(f64, f64)> {
        self.betas
            .iter()
            .flat_map(|&b| self.fields.iter().map(move |&g| (b, g)))
            .collect()
    }

    fn params(&self, g: f64) -> ChainParams {
        ChainParams::new(self.length, g, self.gamma).expect("validated")
    }

    fn meta(&self, table: &mut Table, command: &str) {
        table.meta.insert("command".into(), json!(command));
        table.meta.insert("L".into(), json!(self.length));
        table.meta.insert("gamma".into(), json!(self.gamma));
        table.meta.insert("beta".into(), json!(self.betas));
        table.meta.insert("g".into(), json!(self.fields));
        table
            .meta
            .insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    }
}

fn write(table: &Table, args: &SweepArgs) -> Outcome<()> {
    table.write(args.format, args.out.as_deref()).map_err(|e| {
        let target = args
            .out
            .as_ref()
            .map_or("stdout".to_string(), |p| p.display().to_string());
        Failure::Io(anyhow!("cannot write {target}: {e}"))
    })
}

fn cmd_partition(args: &SweepArgs) -> Outcome<()> {
    let grid = Grid::from_args(args)?;
    let rows: Vec<Vec<Value>> = grid
        .cells()
        .par_iter()
        .map(|&(b, g)| {
            let params = grid.params(g);
            let th = Thermal::new(b).expect("validated");
            let z = z_exact(&params, &th);
            let ppa = z_ppa(&params, &th);
            let two = z.z_two_level;
            vec![
                b.into(),
                g.into(),
                z.ln_z().into(),
                ppa.ln_abs().into(),
                ppa.ratio(z.z_exact).into(),
                two.map(|t| t.ln_abs()).into(),
                two.map(|t| t.ratio(z.z_exact)).into(),
                Value::B(z.flags.cancellation),
                Value::B(z.flags.overflow),
            ]
        })
        .collect();
    let mut table = Table::new(vec![
        "beta",
        "g",
        "log_z_exact",
        "log_z_ppa",
        "ratio_ppa",
        "log_z_two_level",
        "ratio_two_level",
        "cancellation_flag",
        "overflow_flag",
    ]);
    grid.meta(&mut table, "partition");
    table.rows = rows;
    write(&table, args)
}

fn check_combination(obs: Observable, variant: VariantArg) -> Outcome<FcsVariant> {
    let v = variant.fcs()?;
    if v == FcsVariant::CoarseGrainedPpa && obs != Observable::Kinks {
        return Err(config("coarse_grained_ppa is defined for the kink observable only"));
    }
    Ok(v)
}

fn cmd_distribution(args: &FcsArgs) -> Outcome<()> {
    let grid = Grid::from_args(&args.sweep)?;
    let variant = args.variant.unwrap_or(VariantArg::Exact);
    let fcs_variant = check_combination(args.observable, variant)?;
    let dists = grid
        .cells()
        .par_iter()
        .map(|&(b, g)| {
            let params = grid.params(g);
            let obs = args.observable.build(&params);
            let th = Thermal::new(b).expect("validated");
            Ok(((b, g), distribution(&obs, &params, &th, fcs_variant)?))
        })
        .collect::<Result<Vec<_>, LibError>>()?;

    let mut table = Table::new(vec!["beta", "g", "value", "probability"]);
    grid.meta(&mut table, "distribution");
    table.meta.insert("observable".into(), json!(args.observable.name()));
    table.meta.insert("variant".into(), json!(variant.name()));
    let mut residual: f64 = 0.0;
    for ((b, g), d) in &dists {
        residual = residual.max((d.total() - 1.0).abs());
        for (n, p) in d.iter() {
            table.push(vec![(*b).into(), (*g).into(), Value::I(n), p.into()]);
        }
    }
    table.meta.insert("normalization_residual".into(), json!(residual));
    write(&table, &args.sweep)
}

/// `|κ_exact - κ_approx| / |κ_exact|`, undefined when `κ_exact` vanishes.
fn relative_error(exact: f64, approx: f64) -> Option<f64> {
    (exact.abs() > 1e-12).then(|| (exact - approx).abs() / exact.abs())
}

fn cmd_cumulants(args: &FcsArgs) -> Outcome<()> {
    let grid = Grid::from_args(&args.sweep)?;
    let variants: Vec<VariantArg> = match args.variant {
        Some(v) => vec![v],
        None => vec![VariantArg::Exact, VariantArg::Ppa],
    };
    let fcs_variants = variants
        .iter()
        .map(|&v| check_combination(args.observable, v))
        .collect::<Outcome<Vec<_>>>()?;
    let m = DEFAULT_CUMULANT_ORDER;
    let cells = grid
        .cells()
        .par_iter()
        .map(|&(b, g)| {
            let params = grid.params(g);
            let obs = args.observable.build(&params);
            let th = Thermal::new(b).expect("validated");
            let sets = fcs_variants
                .iter()
                .map(|&v| Ok(cumulants(&distribution(&obs, &params, &th, v)?, m)?.kappa))
                .collect::<Result<Vec<_>, LibError>>()?;
            Ok(((b, g), sets))
        })
        .collect::<Result<Vec<_>, LibError>>()?;

    let mut table = Table::new(vec![
        "beta",
        "g",
        "variant",
        "kappa1",
        "kappa2",
        "kappa3",
        "kappa4",
        "rel_err_kappa1",
        "rel_err_kappa2",
        "rel_err_kappa3",
        "rel_err_kappa4",
    ]);
    grid.meta(&mut table, "cumulants");
    table.meta.insert("observable".into(), json!(args.observable.name()));
    table.meta.insert(
        "variants".into(),
        json!(variants.iter().map(|v| v.name()).collect::<Vec<_>>()),
    );
    let exact_idx = variants.iter().position(|&v| v == VariantArg::Exact);
    for ((b, g), sets) in &cells {
        for (vi, kappa) in sets.iter().enumerate() {
            let mut row = vec![(*b).into(), (*g).into(), Value::S(variants[vi].name().into())];
            row.extend(kappa.iter().map(|&k| Value::F(k)));
            for (j, &k) in kappa.iter().enumerate() {
                let err = match exact_idx {
                    Some(e) if e != vi => relative_error(sets[e][j], k),
                    _ => None,
                };
                row.push(err.into());
            }
            table.push(row);
        }
    }
    write(&table, &args.sweep)
}

fn cmd_oracle_check(args: &OracleArgs) -> Outcome<()> {
    if args.l_max < 2 || args.l_max > MAX_ORACLE_LENGTH {
        return Err(config(format!(
            "oracle chain length must lie in 2..={MAX_ORACLE_LENGTH}, got {}",
            args.l_max
        )));
    }
    let z_fn: PartitionFn = match args.inject_fault {
        None => z_exact,
        Some(Fault::BoundarySign) => faults::boundary_sign,
    };
    let cfg = CheckConfig::up_to(args.l_max, args.seed);
    let report = run_oracle_check_with(&cfg, z_fn)?;
    print!("{report}");
    if report.passed() {
        println!("all checks within tolerance");
        Ok(())
    } else {
        let names: Vec<String> = report
            .failures()
            .map(|r| {
                let at = r.worst.map(|w| w.to_string()).unwrap_or_default();
                format!("{} ({at})", r.check.name())
            })
            .collect();
        Err(Failure::Verification(anyhow!(
            "tolerance exceeded: {}",
            names.join(", ")
        )))
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config(format!("cannot configure thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Partition(a) => cmd_partition(a),
        Command::Distribution(a) => cmd_distribution(a),
        Command::Cumulants(a) => cmd_cumulants(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = f.code();
            let (Failure::Config(e) | Failure::Io(e) | Failure::Verification(e)) = f;
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
