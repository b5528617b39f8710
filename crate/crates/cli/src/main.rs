//! `sqkd3`: key-rate sweeps, thresholds, Monte Carlo runs and the invariant suite.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sqkd3::stats::{basis_error_direct, flatten, p_table_from_attack};
use sqkd3::verify::{run_all, Fault, VerifyInputs};
use sqkd3::{
    find_threshold, key_rate, run_protocol, AttackModel, BasisNoiseConvention, ChannelModel, ChannelScenario, Conventions,
    EigenHandling, Error, KeyRateReport, PMode, Variant, VectorFamilies, Weighting,
};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "sqkd3", version, about = "Key-rate analysis for 3-dimensional semi-quantum key distribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the key rate on a grid of Q and write CSV.
    Sweep(SweepArgs),
    /// Find the largest Q with a non-negative key rate and print JSON.
    Threshold(ThresholdArgs),
    /// Run the protocol against the twirl attack and compare with the analytic table.
    Simulate(SimulateArgs),
    /// Run the invariant suite; exit 0 iff every group passes.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Phi1,
    Phi2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Dep,
    Indep,
}

#[derive(Clone, Copy, ValueEnum)]
enum PModeArg {
    Printed,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Printed,
    Normalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    PerPair,
    Total,
    AsStated,
}

#[derive(Clone, Copy, ValueEnum)]
enum EigenArg {
    Clamped,
    Literal,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    TBasis,
    Appendix,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Phi1 => Variant::Phi1,
            VariantArg::Phi2 => Variant::Phi2,
        }
    }
}

impl From<ModelArg> for ChannelModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Dep => ChannelModel::Dependent,
            ModelArg::Indep => ChannelModel::Independent,
        }
    }
}

fn model_name(m: ChannelModel) -> &'static str {
    match m {
        ChannelModel::Dependent => "dep",
        ChannelModel::Independent => "indep",
    }
}

/// Convention flags; unset flags keep the paper-reproducing defaults.
#[derive(Args, Clone, Copy)]
struct ConventionArgs {
    #[arg(long, value_enum)]
    p_mode: Option<PModeArg>,
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
    #[arg(long, value_enum)]
    basis_convention: Option<BasisArg>,
    #[arg(long, value_enum)]
    eigen: Option<EigenArg>,
}

impl ConventionArgs {
    fn resolve(self) -> Conventions {
        let mut c = Conventions::paper();
        if let Some(p) = self.p_mode {
            c.p_mode = match p {
                PModeArg::Printed => PMode::Printed,
                PModeArg::Corrected => PMode::Corrected,
            };
        }
        if let Some(w) = self.weighting {
            c.weighting = match w {
                WeightingArg::Printed => Weighting::Printed,
                WeightingArg::Normalized => Weighting::Normalized,
            };
        }
        if let Some(b) = self.basis_convention {
            c.basis_noise = match b {
                BasisArg::PerPair => BasisNoiseConvention::PerPair,
                BasisArg::Total => BasisNoiseConvention::Total,
                BasisArg::AsStated => BasisNoiseConvention::AsStated,
            };
        }
        if let Some(e) = self.eigen {
            c.eigen = match e {
                EigenArg::Clamped => EigenHandling::Clamped,
                EigenArg::Literal => EigenHandling::Literal,
            };
        }
        c
    }
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, value_enum, default_value = "phi1")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "dep")]
    model: ModelArg,
    #[command(flatten)]
    conventions: ConventionArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0.0)]
    q_min: f64,
    #[arg(long, default_value_t = 0.25)]
    q_max: f64,
    #[arg(long, default_value_t = 51)]
    steps: usize,
    /// Output CSV path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value = "phi1")]
    variant: VariantArg,
    /// Number of protocol rounds.
    #[arg(long, short = 'n', default_value_t = 1_000_000)]
    rounds: u64,
    /// Channel noise of the twirl attack, both directions.
    #[arg(long, default_value_t = 0.1)]
    q: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// JSON summary path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the raw category counts as CSV.
    #[arg(long)]
    counts_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Validated sweep grid.
#[derive(Debug, Clone, Copy)]
struct SweepConfig {
    variant: Variant,
    model: ChannelModel,
    conventions: Conventions,
    q_min: f64,
    q_max: f64,
    steps: usize,
}

impl SweepConfig {
    fn new(args: &SweepArgs) -> CliResult<Self> {
        let (q_min, q_max, steps) = (args.q_min, args.q_max, args.steps);
        if !(0.0 <= q_min && q_min < q_max && q_max <= ChannelScenario::Q_MAX) {
            return Err(CliError::Usage(format!(
                "need 0 <= q-min < q-max <= {}, got q-min {q_min}, q-max {q_max}",
                ChannelScenario::Q_MAX
            )));
        }
        if steps < 2 {
            return Err(CliError::Usage(format!("need steps >= 2, got {steps}")));
        }
        Ok(Self {
            variant: args.scenario.variant.into(),
            model: args.scenario.model.into(),
            conventions: args.scenario.conventions.resolve(),
            q_min,
            q_max,
            steps,
        })
    }

    fn grid(&self) -> Vec<f64> {
        let span = self.q_max - self.q_min;
        (0..self.steps).map(|i| if i + 1 == self.steps { self.q_max } else { self.q_min + span * i as f64 / (self.steps - 1) as f64 }).collect()
    }
}

/// Fixed 9 significant digits; scientific notation outside `[1e-4, 1e9)`.
fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0.00000000".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-4..9).contains(&exp) {
        return format!("{v:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding can carry into a new digit, e.g. 9.999999999 -> 10.00000000
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    if digits.trim_start_matches('0').len() > 9 && decimals > 0 {
        let d = decimals - 1;
        return format!("{v:.d$}");
    }
    s
}

fn header(kind: &str, variant: Variant, model: Option<ChannelModel>, conventions: &Conventions) -> String {
    let model = model.map(|m| format!(" model={}", model_name(m))).unwrap_or_default();
    format!("# sqkd3 {kind} variant={variant}{model} {conventions}")
}

fn write_output(out: Option<&Path>, body: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(body.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn sweep_csv(cfg: &SweepConfig) -> CliResult<String> {
    let reports: Vec<KeyRateReport> = cfg
        .grid()
        .into_par_iter()
        .map(|q| key_rate(&ChannelScenario::new(q, cfg.model, cfg.variant, cfg.conventions)?))
        .collect::<Result<_, _>>()?;
    let mut out = header("sweep", cfg.variant, Some(cfg.model), &cfg.conventions);
    out.push_str("\nQ,r,t1,t2,t3,t4,X,p_lower,lambda1,lambda2,S_BEC,S_EC_upper,H_B_given_A\n");
    for r in &reports {
        let fields = [
            r.q.unwrap_or_default(),
            r.r,
            r.t[0],
            r.t[1],
            r.t[2],
            r.t[3],
            r.x,
            r.p_lower,
            r.lambda1,
            r.lambda2,
            r.s_bec,
            r.s_ec_upper,
            r.h_b_given_a,
        ];
        out.push_str(&fields.map(fmt_sig).join(","));
        out.push('\n');
    }
    Ok(out)
}

fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let cfg = SweepConfig::new(args)?;
    let csv = sweep_csv(&cfg)?;
    write_output(args.out.as_deref(), &csv)
}

#[derive(Serialize)]
struct ThresholdOutput {
    threshold: Option<f64>,
    /// Set when the rate stays positive up to this Q.
    positive_up_to: Option<f64>,
    variant: Variant,
    model: &'static str,
    convention: Conventions,
    convention_summary: String,
    report_at_threshold: Option<KeyRateReport>,
}

fn cmd_threshold(args: &ThresholdArgs) -> CliResult<()> {
    let variant: Variant = args.scenario.variant.into();
    let model: ChannelModel = args.scenario.model.into();
    let conventions = args.scenario.conventions.resolve();
    eprintln!("{}", header("threshold", variant, Some(model), &conventions));
    let (threshold, positive_up_to) = match find_threshold(variant, model, conventions) {
        Ok(q) => (Some(q), None),
        Err(Error::NoThreshold { max_q }) => {
            eprintln!("key rate stays positive up to Q = {max_q}");
            (None, Some(max_q))
        }
        Err(e) => return Err(e.into()),
    };
    let report_at_threshold = match threshold {
        Some(q) => Some(key_rate(&ChannelScenario::new(q, model, variant, conventions)?)?),
        None => None,
    };
    let out = ThresholdOutput {
        threshold,
        positive_up_to,
        variant,
        model: model_name(model),
        convention: conventions,
        convention_summary: conventions.to_string(),
        report_at_threshold,
    };
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))
}

#[derive(Serialize)]
struct SimulateOutput {
    rounds: u64,
    q: f64,
    seed: u64,
    variant: Variant,
    attack: &'static str,
    /// `[sent][bob][alice]`, normalized per sent trit.
    empirical: [f64; 27],
    analytic: [f64; 27],
    empirical_basis_err: [f64; 6],
    analytic_basis_err: [f64; 6],
    max_deviation_sigma: f64,
    sifted_fraction: f64,
    raw_key_length: usize,
    raw_key_error_rate: f64,
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let variant: Variant = args.variant.into();
    let attack = AttackModel::pauli_twirl(args.q, args.q)?;
    let fams = VectorFamilies::from_attack(&attack);
    let analytic = p_table_from_attack(&fams);
    let sim = run_protocol(args.rounds, &attack, variant, args.seed)?;
    let max_deviation_sigma = sim.max_deviation_sigma(&analytic);
    eprintln!("# sqkd3 simulate variant={variant} q={} rounds={} seed={}", args.q, args.rounds, args.seed);
    eprintln!("max deviation {max_deviation_sigma:.3} sigma");
    if let Some(path) = &args.counts_out {
        write_output(Some(path), &sim.counts_csv())?;
    }
    let out = SimulateOutput {
        rounds: args.rounds,
        q: args.q,
        seed: args.seed,
        variant,
        attack: "pauli-twirl",
        empirical: flatten(&sim.frequencies),
        analytic: flatten(&analytic),
        empirical_basis_err: sim.empirical_basis_err,
        analytic_basis_err: basis_error_direct(&fams, variant),
        max_deviation_sigma,
        sifted_fraction: sim.sifted_fraction,
        raw_key_length: sim.raw_key_pairs.len(),
        raw_key_error_rate: sim.raw_key_error_rate(),
    };
    write_output(args.out.as_deref(), &(serde_json::to_string_pretty(&out)? + "\n"))
}

fn cmd_verify(args: &VerifyArgs) -> CliResult<bool> {
    let mut inputs = VerifyInputs { seed: args.seed, ..VerifyInputs::default() };
    if let Some(fault) = args.inject_fault {
        inputs = inputs.with_fault(match fault {
            FaultArg::TBasis => Fault::TBasisPhase,
            FaultArg::Appendix => Fault::AppendixTable,
        });
    }
    let groups = run_all(&inputs)?;
    let mut stdout = io::stdout().lock();
    for g in &groups {
        writeln!(stdout, "[{}] {}: {}", if g.passed { "PASS" } else { "FAIL" }, g.name, g.detail)
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let failed = groups.iter().filter(|g| !g.passed).count();
    writeln!(stdout, "{} of {} groups passed", groups.len() - failed, groups.len()).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(failed == 0)
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("SQKD3_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SQKD3_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> CliResult<bool> {
    configure_threads()?;
    match &cli.command {
        Command::Sweep(a) => cmd_sweep(a).map(|()| true),
        Command::Threshold(a) => cmd_threshold(a).map(|()| true),
        Command::Simulate(a) => cmd_simulate(a).map(|()| true),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("I/O error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
