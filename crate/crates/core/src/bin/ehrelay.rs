use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ehrelay::analytic::{rho_star_closed_form, rho_star_no_direct};
use ehrelay::montecarlo::{Variant, DEFAULT_TRIALS};
use ehrelay::optimize::{maximize_rho, maximize_rs, RhoObjective, RsObjective};
use ehrelay::report::validation_report;
use ehrelay::scenario::{ScenarioConfig, ScenarioError};
use ehrelay::sweep::{plot_script, run_sweep, Engine, Preset, RhoPolicy, SweepSpec, SweepVar, BUILTIN_PRESETS};
use ehrelay::Error;

// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($arg)*);
        let _ = writeln!(std::io::stdout().lock());
    }};
}

const EXIT_PARSE: u8 = 2;
const EXIT_SCENARIO: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_FALLBACK: u8 = 5;

#[derive(Parser)]
#[command(name = "ehrelay", version, about = "Throughput analysis of an energy-harvesting DF relay in underlay spectrum sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare every closed form with a Monte Carlo estimate.
    Validate(ValidateArgs),
    /// Sweep one parameter and write a CSV table.
    Sweep(SweepArgs),
    /// Find the throughput-maximizing rho or rate.
    Optimize(OptimizeArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo trials.
    #[arg(long, env = "EHRELAY_TRIALS")]
    trials: Option<u64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    config: PathBuf,
    /// Override a scenario value, e.g. --set rho=0.3 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(flatten)]
    mc: McArgs,
    /// Where to write the JSON report [default: <config stem>.report.json].
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file; not needed with --preset.
    config: Option<PathBuf>,
    /// Built-in preset name or preset file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    var: Option<SweepVar>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated: analytic_full (analytic), analytic_sim (sim), mc.
    #[arg(long, value_delimiter = ',')]
    engines: Option<Vec<Engine>>,
    /// Comma-separated: incremental, direct_only, no_direct_two_hop, no_rp_constraint.
    #[arg(long, value_delimiter = ',')]
    variants: Option<Vec<Variant>>,
    #[arg(long, env = "EHRELAY_TRIALS")]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    rho_policy: Option<PolicyArg>,
    /// Output CSV. With a multi-series preset each series gets `<stem>-<label>.csv`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Fixed,
    Optimal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Rho,
    Rs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    Analytic,
    Sim,
    Mc,
}

#[derive(Args)]
struct OptimizeArgs {
    config: PathBuf,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, value_enum, default_value = "rho")]
    target: Target,
    #[arg(long, value_enum, default_value = "analytic")]
    engine: EngineArg,
    /// Optimize the two-hop protocol that ignores the direct link.
    #[arg(long)]
    no_direct: bool,
    #[arg(long, default_value_t = 0.5)]
    rs_from: f64,
    #[arg(long, default_value_t = 8.0)]
    rs_to: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[command(flatten)]
    mc: McArgs,
}

struct Failure {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match e {
            ScenarioError::Invalid(_) => EXIT_SCENARIO,
            _ => EXIT_PARSE,
        };
        fail(code, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidSweep(_) => EXIT_PARSE,
            _ => EXIT_SCENARIO,
        };
        fail(code, e.to_string())
    }
}

fn load(path: &Path, overrides: &[String]) -> CliResult<ScenarioConfig> {
    let mut cfg = ScenarioConfig::from_path(path)?;
    for o in overrides {
        cfg.apply_override(o)?;
    }
    cfg.system_params()?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| fail(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn validate(args: ValidateArgs) -> CliResult<()> {
    let cfg = load(&args.config, &args.overrides)?;
    let sys = cfg.system_params()?;
    let trials = args.mc.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(fail(EXIT_PARSE, "--trials must be positive"));
    }
    let report = validation_report(&sys, trials, args.mc.seed)?;
    out!("{}", report.to_string().trim_end());
    out!("overall: {}", if report.all_pass() { "PASS" } else { "FAIL" });
    let path = args.report.unwrap_or_else(|| {
        let stem = args.config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "scenario".into());
        PathBuf::from(format!("{stem}.report.json"))
    });
    write_file(&path, &to_json(&report))?;
    eprintln!("report written to {}", path.display());
    Ok(())
}

fn load_preset(name: &str) -> CliResult<Preset> {
    if let Some(p) = Preset::builtin(name) {
        return Ok(p);
    }
    let path = Path::new(name);
    if !path.exists() {
        let names: Vec<_> = BUILTIN_PRESETS.iter().map(|(n, _)| *n).collect();
        return Err(fail(EXIT_PARSE, format!("unknown preset '{name}' (built-in: {})", names.join(", "))));
    }
    let text = fs::read_to_string(path).map_err(|e| fail(EXIT_PARSE, format!("cannot read {name}: {e}")))?;
    Ok(Preset::from_json(&text)?)
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let (mut spec, series) = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let p = load_preset(name)?;
            let mut series = Vec::new();
            for s in p.series {
                let mut cfg = s.scenario;
                for o in &args.overrides {
                    cfg.apply_override(o)?;
                }
                series.push((Some(s.label), cfg));
            }
            (p.sweep, series)
        }
        (None, Some(path)) => {
            let cfg = load(path, &args.overrides)?;
            let need = |what: &str| fail(EXIT_PARSE, format!("--{what} is required without --preset"));
            let spec = SweepSpec {
                variable: args.var.ok_or_else(|| need("var"))?,
                from: args.from.ok_or_else(|| need("from"))?,
                to: args.to.ok_or_else(|| need("to"))?,
                steps: args.steps.ok_or_else(|| need("steps"))?,
                engines: args.engines.clone().unwrap_or_else(|| vec![Engine::AnalyticFull]),
                variants: args.variants.clone().unwrap_or_else(|| vec![Variant::Incremental]),
                rho_policy: RhoPolicy::Fixed,
                trials: DEFAULT_TRIALS,
                seed: 42,
            };
            (spec, vec![(None, cfg)])
        }
        (None, None) => return Err(fail(EXIT_PARSE, "give a scenario file or --preset")),
    };
    if let Some(v) = args.var {
        spec.variable = v;
    }
    if let Some(v) = args.from {
        spec.from = v;
    }
    if let Some(v) = args.to {
        spec.to = v;
    }
    if let Some(v) = args.steps {
        spec.steps = v;
    }
    if let Some(v) = args.engines {
        spec.engines = v;
    }
    if let Some(v) = args.variants {
        spec.variants = v;
    }
    if let Some(v) = args.trials {
        spec.trials = v;
    }
    if let Some(v) = args.seed {
        spec.seed = v;
    }
    if let Some(p) = args.rho_policy {
        spec.rho_policy = match p {
            PolicyArg::Fixed => RhoPolicy::Fixed,
            PolicyArg::Optimal => RhoPolicy::Optimal,
        };
    }
    spec.validate()?;

    let multi = series.len() > 1;
    for (label, cfg) in series {
        let out = match (&label, multi) {
            (Some(label), true) => {
                let stem = args.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                args.out.with_file_name(format!("{stem}-{label}.csv"))
            }
            _ => args.out.clone(),
        };
        let result = run_sweep(&cfg, &spec)?;
        let mut csv = Vec::new();
        result.write_csv(&mut csv).expect("in-memory write");
        write_file(&out, std::str::from_utf8(&csv).expect("ascii csv"))?;

        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = json!({
            "metadata": result.metadata,
            "series": label,
            "scenario": cfg,
            "generated_unix": timestamp,
        });
        write_file(&sidecar(&out, "meta.json"), &to_json(&meta))?;
        let csv_name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        write_file(&sidecar(&out, "plot.py"), &plot_script(&csv_name, spec.variable.name()))?;
        out!("{}: {} rows", out.display(), result.rows.len());
    }
    Ok(())
}

fn sidecar(out: &Path, ext: &str) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!(".{ext}"));
    out.with_file_name(name)
}

fn optimize(args: OptimizeArgs) -> CliResult<()> {
    let cfg = load(&args.config, &args.overrides)?;
    let sys = cfg.system_params()?;
    let trials = args.mc.trials.unwrap_or(DEFAULT_TRIALS);
    let seed = args.mc.seed;
    match args.target {
        Target::Rho => {
            let objective = match (args.engine, args.no_direct) {
                (EngineArg::Analytic, false) => RhoObjective::TauFull,
                (EngineArg::Analytic, true) => RhoObjective::TauNoDirect,
                (EngineArg::Sim, false) => RhoObjective::TauSim,
                (EngineArg::Sim, true) => RhoObjective::TauSimNoDirect,
                (EngineArg::Mc, nd) => RhoObjective::TauMc {
                    trials,
                    seed,
                    variant: if nd { Variant::NoDirectTwoHop } else { Variant::Incremental },
                },
            };
            let closed = rho_star_closed_form(&sys).ok();
            let closed_nd = rho_star_no_direct(&sys).ok();
            let reference = if args.no_direct { closed_nd } else { closed };
            let r = maximize_rho(&sys, objective, args.tol)?;
            let show = |v: Option<f64>| v.map_or("n/a (outside (0, 1))".to_string(), |v| format!("{v:.6}"));
            out!("closed-form rho*      {}", show(closed));
            out!("closed-form rho*_nd   {}", show(closed_nd));
            out!("numerical optimum     rho = {:.6}, tau = {:.6}", r.arg_opt, r.value_opt);
            if let Some(c) = reference {
                out!("gap to closed form    {:.6}", r.arg_opt - c);
            }
            out!(
                "{}",
                json!({
                    "target": "rho",
                    "objective": objective,
                    "rho_star_closed_form": closed,
                    "rho_star_no_direct": closed_nd,
                    "result": r,
                    "gap": reference.map(|c| r.arg_opt - c),
                })
            );
            if r.grid_fallback {
                return Err(fail(EXIT_FALLBACK, "objective not unimodal on the pre-scan; grid search used"));
            }
        }
        Target::Rs => {
            if args.no_direct {
                return Err(fail(EXIT_PARSE, "--no-direct applies only to --target rho"));
            }
            let objective = match args.engine {
                EngineArg::Analytic => RsObjective::TauFull,
                EngineArg::Mc => RsObjective::TauMc { trials, seed },
                EngineArg::Sim => return Err(fail(EXIT_PARSE, "rate search supports --engine analytic or mc")),
            };
            let r = maximize_rs(&sys, (args.rs_from, args.rs_to), objective)?;
            out!("optimal rate          rs = {:.6}, tau = {:.6}", r.arg_opt, r.value_opt);
            out!("{}", json!({"target": "rs", "objective": objective, "result": r}));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate(a) => validate(a),
        Command::Sweep(a) => sweep(a),
        Command::Optimize(a) => optimize(a),
        Command::Presets => {
            for (name, text) in BUILTIN_PRESETS {
                let p = Preset::from_json(text).expect("built-in preset is valid");
                out!("{name}: {}", p.description);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
