//! Closed form versus simulation, side by side.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{tau_incremental, OutageBreakdown, P3Variant};
use crate::error::Result;
use crate::model::SystemParams;
use crate::montecarlo::{estimate, McEstimate};

/// Standard errors allowed for the exact probabilities.
pub const EXACT_SIGMAS: f64 = 4.0;
pub const P3_TOL: f64 = 0.01;
pub const Q1_TOL: f64 = 0.02;
pub const TAU_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tolerance {
    /// Multiple of the binomial standard error of the analytic value.
    Sigmas(f64),
    Absolute(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub quantity: String,
    pub analytic: f64,
    pub mc: f64,
    pub mc_std_error: f64,
    pub tolerance: Tolerance,
    /// Allowed absolute difference after resolving the tolerance.
    pub allowed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: SystemParams,
    pub breakdown: OutageBreakdown,
    pub mc: McEstimate,
    pub seed: u64,
    pub lines: Vec<ReportLine>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn line(&self, quantity: &str) -> Option<&ReportLine> {
        self.lines.iter().find(|l| l.quantity == quantity)
    }
}

fn line(quantity: &str, analytic: f64, mc: f64, mc_std_error: f64, tolerance: Tolerance) -> ReportLine {
    let allowed = match tolerance {
        Tolerance::Sigmas(k) => k * mc_std_error,
        Tolerance::Absolute(t) => t,
    };
    ReportLine {
        quantity: quantity.to_string(),
        analytic,
        mc,
        mc_std_error,
        tolerance,
        allowed,
        pass: (analytic - mc).abs() <= allowed,
    }
}

/// Runs the simulation and compares every closed-form quantity with it.
///
/// Standard errors of the exact probabilities use the analytic value, so a
/// probability of exactly 0 or 1 must be matched exactly.
pub fn validation_report(sys: &SystemParams, trials: u64, seed: u64) -> Result<ValidationReport> {
    let b = tau_incremental(sys, P3Variant::Full)?;
    let mc = estimate(sys, trials, seed);
    let f = mc.freq;
    let exact = |p: f64| mc.binomial_std_error(p);
    let lines = vec![
        line("p1", b.p1, f.p1_event, exact(b.p1), Tolerance::Sigmas(EXACT_SIGMAS)),
        line("p2", b.p2, f.p2_event, exact(b.p2), Tolerance::Sigmas(EXACT_SIGMAS)),
        line("q2", b.q2, f.direct_success, exact(b.q2), Tolerance::Sigmas(EXACT_SIGMAS)),
        line("p3", b.p3, f.p3_event, exact(f.p3_event), Tolerance::Absolute(P3_TOL)),
        line("q1", b.q1, f.q1_event, exact(f.q1_event), Tolerance::Absolute(Q1_TOL)),
        line("tau", b.tau, mc.mean, mc.std_error, Tolerance::Absolute(TAU_TOL)),
    ];
    Ok(ValidationReport { params: *sys, breakdown: b, mc, seed, lines })
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "rho={} eta={} I/N0={:.6} rs={} gamma_th={:.6}",
            p.rho,
            p.eta,
            p.i_over_no,
            p.rs,
            p.gamma_th()
        )?;
        writeln!(f, "trials={} seed={}", self.mc.trials, self.seed)?;
        if self.breakdown.regime_warning {
            writeln!(f, "warning: closed-form p3 was clamped (raw {:.6})", self.breakdown.p3_raw)?;
        }
        writeln!(
            f,
            "{:<9}{:>12}{:>12}{:>12}{:>12}{:>12}  result",
            "quantity", "analytic", "mc", "mc_se", "|diff|", "allowed"
        )?;
        for l in &self.lines {
            writeln!(
                f,
                "{:<9}{:>12.6}{:>12.6}{:>12.2e}{:>12.2e}{:>12.2e}  {}",
                l.quantity,
                l.analytic,
                l.mc,
                l.mc_std_error,
                (l.analytic - l.mc).abs(),
                l.allowed,
                if l.pass { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
