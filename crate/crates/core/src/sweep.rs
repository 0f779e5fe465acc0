//! Parameter sweeps producing CSV tables of analytic and simulated
//! throughput.

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    q2_direct_success, tau_incremental, tau_no_direct, tau_simplified, tau_simplified_no_direct, P3Variant,
};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_variants, Variant};
use crate::optimize::inner_rho;
use crate::scenario::{ScenarioConfig, ScenarioError};

pub const MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Rho,
    Rs,
    IOverNoDb,
    DSr,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Rho => "rho",
            SweepVar::Rs => "rs",
            SweepVar::IOverNoDb => "i_over_no_db",
            SweepVar::DSr => "d_sr",
        }
    }
}

impl FromStr for SweepVar {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "rho" => Ok(SweepVar::Rho),
            "rs" => Ok(SweepVar::Rs),
            "i_over_no_db" => Ok(SweepVar::IOverNoDb),
            "d_sr" => Ok(SweepVar::DSr),
            _ => Err(format!("unknown sweep variable '{s}' (rho, rs, i_over_no_db, d_sr)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[serde(alias = "analytic")]
    AnalyticFull,
    #[serde(alias = "sim")]
    AnalyticSim,
    Mc,
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "analytic" | "analytic_full" => Ok(Engine::AnalyticFull),
            "sim" | "analytic_sim" => Ok(Engine::AnalyticSim),
            "mc" => Ok(Engine::Mc),
            _ => Err(format!("unknown engine '{s}' (analytic_full, analytic_sim, mc)")),
        }
    }
}

/// How `rho` is chosen at each sweep point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoPolicy {
    /// Use the scenario's `rho` (or the swept value).
    #[default]
    Fixed,
    /// Re-optimize `rho` at every point.
    Optimal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub engines: Vec<Engine>,
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub rho_policy: RhoPolicy,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_trials() -> u64 {
    crate::montecarlo::DEFAULT_TRIALS
}

fn default_seed() -> u64 {
    42
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSweep(m));
        if !(self.from < self.to) {
            return bad(format!("from ({}) must be below to ({})", self.from, self.to));
        }
        if !(2..=MAX_STEPS).contains(&self.steps) {
            return bad(format!("steps must be in [2, {MAX_STEPS}], got {}", self.steps));
        }
        if self.engines.is_empty() || self.variants.is_empty() {
            return bad("at least one engine and one variant are required".into());
        }
        if self.variable == SweepVar::Rho && self.rho_policy == RhoPolicy::Optimal {
            return bad("cannot sweep rho with an optimal-rho policy".into());
        }
        if self.engines.contains(&Engine::Mc) && self.trials == 0 {
            return bad("Monte Carlo needs at least one trial".into());
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        let span = self.to - self.from;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.to
                } else {
                    self.from + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }

    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["x".to_string(), "rho".to_string()];
        for engine in &self.engines {
            match engine {
                Engine::AnalyticFull => {
                    cols.extend(["p1", "p2", "p3", "q1", "q2"].map(String::from));
                    cols.extend(self.variants.iter().map(|v| format!("tau_analytic_full_{}", v.name())));
                }
                Engine::AnalyticSim => {
                    cols.extend(self.variants.iter().map(|v| format!("tau_analytic_sim_{}", v.name())));
                }
                Engine::Mc => {
                    for v in &self.variants {
                        cols.push(format!("tau_mc_{}", v.name()));
                        cols.push(format!("tau_mc_{}_se", v.name()));
                    }
                }
            }
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub rho: f64,
    /// Values for every column after `x` and `rho`; NaN marks a point where
    /// the expression is undefined or outside its regime.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub scenario_sha256: String,
    pub seed: u64,
    pub trials: u64,
    pub tool_version: String,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub metadata: SweepMetadata,
}

fn scenario_err(e: ScenarioError) -> Error {
    match e {
        ScenarioError::Invalid(e) => e,
        other => Error::InvalidSweep(other.to_string()),
    }
}

fn apply_variable(base: &ScenarioConfig, var: SweepVar, x: f64) -> Result<ScenarioConfig> {
    let mut cfg = base.clone();
    match var {
        SweepVar::Rho => cfg.set("rho", x),
        SweepVar::Rs => cfg.set("rs", x),
        SweepVar::IOverNoDb => cfg.set("i_over_no_db", x),
        SweepVar::DSr => cfg.set_d_sr_collinear(x),
    }
    .map_err(scenario_err)?;
    Ok(cfg)
}

fn evaluate_point(base: &ScenarioConfig, spec: &SweepSpec, x: f64) -> Result<SweepRow> {
    let cfg = apply_variable(base, spec.variable, x)?;
    let mut sys = cfg.system_params()?;
    if spec.rho_policy == RhoPolicy::Optimal {
        sys = sys.with_rho(inner_rho(&sys)?)?;
    }
    let rs = sys.rs;
    let direct = rs * q2_direct_success(&sys);
    let ok = |r: Result<f64>| r.unwrap_or(f64::NAN);

    let mut values = Vec::new();
    for engine in &spec.engines {
        match engine {
            Engine::AnalyticFull => {
                let full = tau_incremental(&sys, P3Variant::Full);
                match &full {
                    Ok(b) => values.extend([b.p1, b.p2, b.p3, b.q1, b.q2]),
                    Err(_) => values.extend([f64::NAN; 5]),
                }
                for v in &spec.variants {
                    values.push(match v {
                        Variant::Incremental => full.as_ref().map(|b| b.tau).unwrap_or(f64::NAN),
                        Variant::DirectOnly => direct,
                        Variant::NoDirectTwoHop => ok(tau_no_direct(&sys)),
                        Variant::NoRpConstraint => ok(tau_incremental(&sys, P3Variant::NoRp).map(|b| b.tau)),
                    });
                }
            }
            Engine::AnalyticSim => {
                for v in &spec.variants {
                    values.push(match v {
                        Variant::Incremental | Variant::NoRpConstraint => ok(tau_simplified(&sys)),
                        Variant::DirectOnly => direct,
                        Variant::NoDirectTwoHop => ok(tau_simplified_no_direct(&sys)),
                    });
                }
            }
            Engine::Mc => {
                for e in estimate_variants(&sys, spec.trials, spec.seed, &spec.variants) {
                    values.push(e.mean);
                    values.push(e.std_error);
                }
            }
        }
    }
    Ok(SweepRow { x, rho: sys.rho, values })
}

/// Evaluates the sweep; points run in parallel and rows come back in
/// `x` order.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    base.system_params()?;
    let rows = spec
        .xs()
        .into_par_iter()
        .map(|x| evaluate_point(base, spec, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        columns: spec.columns(),
        rows,
        metadata: SweepMetadata {
            scenario_sha256: base.sha256(),
            seed: spec.seed,
            trials: spec.trials,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            spec: spec.clone(),
        },
    })
}

/// Formats a value with 9 significant digits, `%g` style.
pub fn format_sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut fields = vec![format_sig9(row.x), format_sig9(row.rho)];
            fields.extend(row.values.iter().map(|v| format_sig9(*v)));
            writeln!(out, "{}", fields.join(","))?;
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match idx {
                    0 => r.x,
                    1 => r.rho,
                    i => r.values[i - 2],
                })
                .collect(),
        )
    }
}

/// Matplotlib script that plots every throughput column of `csv_name`.
pub fn plot_script(csv_name: &str, x_label: &str) -> String {
    format!(
        r#"# Plot throughput columns of {csv_name}
import csv
import math
import os

import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(here, "{csv_name}"), newline="") as fh:
    rows = list(csv.DictReader(fh))

x = [float(r["x"]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
for col in rows[0].keys():
    if not col.startswith("tau_") or col.endswith("_se"):
        continue
    y = [float(r[col]) for r in rows]
    if col.startswith("tau_mc_"):
        err = [3 * float(r[col + "_se"]) for r in rows]
        ax.errorbar(x, y, yerr=err, fmt="o", markersize=3, label=col)
    else:
        ax.plot(x, [v if not math.isnan(v) else None for v in y], label=col)
ax.set_xlabel("{x_label}")
ax.set_ylabel("throughput (bits/channel use)")
ax.grid(True, alpha=0.3)
ax.legend(fontsize=7)
fig.tight_layout()
fig.savefig(os.path.join(here, "{csv_name}".rsplit(".", 1)[0] + ".png"), dpi=150)
"#
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSeries {
    pub label: String,
    pub scenario: ScenarioConfig,
}

/// A sweep definition applied to one or more scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Preset {
    pub description: String,
    pub sweep: SweepSpec,
    pub series: Vec<PresetSeries>,
}

/// Presets compiled into the binary, by name.
pub const BUILTIN_PRESETS: &[(&str, &str)] = &[
    ("fig-tau-vs-rho", include_str!("../presets/fig-tau-vs-rho.json")),
    ("fig-tau-vs-rs", include_str!("../presets/fig-tau-vs-rs.json")),
];

/// Reference scenario file contents.
pub const DEFAULT_SCENARIO: &str = include_str!("../presets/default-scenario.json");

impl Preset {
    pub fn from_json(text: &str) -> std::result::Result<Self, ScenarioError> {
        let p: Preset = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        if p.series.is_empty() {
            return Err(ScenarioError::Parse("preset has no series".into()));
        }
        for s in &p.series {
            s.scenario.system_params()?;
        }
        Ok(p)
    }

    pub fn builtin(name: &str) -> Option<Self> {
        BUILTIN_PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Preset::from_json(text).expect("built-in preset is valid"))
    }
}
