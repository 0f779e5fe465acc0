//! Numerical search for the power-splitting fraction and the transmission
//! rate that maximize throughput.

use serde::{Deserialize, Serialize};

use crate::analytic::{
    rho_star_closed_form, tau_incremental, tau_no_direct, tau_simplified, tau_simplified_no_direct, P3Variant,
};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::montecarlo::{estimate_variant, Variant};

/// Search interval for `rho`; the closed forms degenerate at the endpoints.
pub const RHO_BOUNDS: (f64, f64) = (0.001, 0.999);

const PRESCAN_POINTS: usize = 21;
const RS_GRID_POINTS: usize = 32;
const MAX_GRID_POINTS: usize = 10_000;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    GoldenSection,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub arg_opt: f64,
    pub value_opt: f64,
    pub method: Method,
    pub evaluations: usize,
    /// Set when the unimodality pre-scan failed and a grid search was used.
    pub grid_fallback: bool,
}

/// Throughput objectives over `rho`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoObjective {
    /// Closed-form incremental throughput.
    TauFull,
    /// Simplified closed-form throughput.
    TauSim,
    /// Closed-form two-hop throughput without the direct link.
    TauNoDirect,
    /// Simplified two-hop throughput without the direct link.
    TauSimNoDirect,
    /// Simulated throughput of `variant`; every evaluation reuses the seed.
    TauMc { trials: u64, seed: u64, variant: Variant },
}

impl RhoObjective {
    pub fn evaluate(&self, sys: &SystemParams, rho: f64) -> Result<f64> {
        let sys = sys.with_rho(rho)?;
        match *self {
            RhoObjective::TauFull => Ok(tau_incremental(&sys, P3Variant::Full)?.tau),
            RhoObjective::TauSim => tau_simplified(&sys),
            RhoObjective::TauNoDirect => tau_no_direct(&sys),
            RhoObjective::TauSimNoDirect => tau_simplified_no_direct(&sys),
            RhoObjective::TauMc { trials, seed, variant } => Ok(estimate_variant(&sys, trials, seed, variant).mean),
        }
    }
}

/// Throughput objectives over `rs` (with `rho` re-optimized per rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RsObjective {
    TauFull,
    TauMc { trials: u64, seed: u64 },
}

/// Golden-section maximization of `f` on `[lo, hi]` until the bracket is
/// narrower than `tol`. Returns `(argmax, max, evaluations)`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut evals = 2;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        }
        evals += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    evals += 1;
    let best = [(x, fx), (x1, f1), (x2, f2)]
        .into_iter()
        .fold((x, fx), |acc, p| if p.1 > acc.1 { p } else { acc });
    Ok((best.0, best.1, evals))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best })
}

/// True when the sequence rises then falls at most once (plateaus allowed).
pub fn is_unimodal(values: &[f64]) -> bool {
    let mut falling = false;
    for w in values.windows(2) {
        let step = w[1] - w[0];
        if step < 0.0 {
            falling = true;
        } else if step > 0.0 && falling {
            return false;
        }
    }
    true
}

fn check_tol(tol: f64) -> Result<()> {
    if (1e-6..=0.05).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!("optimizer tolerance {tol} outside [1e-6, 0.05]")))
    }
}

/// Maximizes `f` on `[lo, hi]`.
///
/// A 21-point pre-scan checks unimodality; golden-section search then refines
/// the bracket around the best scan point. A non-unimodal scan falls back to
/// a grid search with step `tol` (at most 10⁴ points) and sets
/// [`OptResult::grid_fallback`].
pub fn maximize_scanned<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<OptResult>
where
    F: Fn(f64) -> Result<f64>,
{
    check_tol(tol)?;
    let scan_x = linspace(lo, hi, PRESCAN_POINTS);
    let scan_y = scan_x.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut evaluations = PRESCAN_POINTS;

    if is_unimodal(&scan_y) {
        let i = argmax(&scan_y);
        let a = scan_x[i.saturating_sub(1)];
        let b = scan_x[(i + 1).min(PRESCAN_POINTS - 1)];
        let (x, fx, n) = golden_section_max(&f, a, b, tol)?;
        evaluations += n;
        let (arg_opt, value_opt) = if scan_y[i] > fx { (scan_x[i], scan_y[i]) } else { (x, fx) };
        return Ok(OptResult { arg_opt, value_opt, method: Method::GoldenSection, evaluations, grid_fallback: false });
    }

    let points = (((hi - lo) / tol).ceil() as usize + 1).min(MAX_GRID_POINTS);
    let grid_x = linspace(lo, hi, points);
    let grid_y = grid_x.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    evaluations += points;
    let i = argmax(&grid_y);
    Ok(OptResult {
        arg_opt: grid_x[i],
        value_opt: grid_y[i],
        method: Method::Grid,
        evaluations,
        grid_fallback: true,
    })
}

/// Maximizes `objective` over `rho ∈ [0.001, 0.999]` with [`maximize_scanned`].
pub fn maximize_rho(sys: &SystemParams, objective: RhoObjective, tol: f64) -> Result<OptResult> {
    let (lo, hi) = RHO_BOUNDS;
    maximize_scanned(|rho| objective.evaluate(sys, rho), lo, hi, tol)
}

/// Optimal `rho` used inside the rate search: the closed form when it lies
/// in (0, 1), golden-section on the full throughput otherwise.
pub fn inner_rho(sys: &SystemParams) -> Result<f64> {
    match rho_star_closed_form(sys) {
        Ok(rho) => Ok(rho),
        Err(Error::OutOfRange { .. }) => Ok(maximize_rho(sys, RhoObjective::TauFull, 1e-3)?.arg_opt),
        Err(e) => Err(e),
    }
}

/// Throughput at rate `rs` with `rho` set by [`inner_rho`].
pub fn tau_at_rate(sys: &SystemParams, rs: f64, objective: RsObjective) -> Result<f64> {
    let at_rate = sys.with_rs(rs)?;
    let tuned = at_rate.with_rho(inner_rho(&at_rate)?)?;
    match objective {
        RsObjective::TauFull => Ok(tau_incremental(&tuned, P3Variant::Full)?.tau),
        RsObjective::TauMc { trials, seed } => Ok(estimate_variant(&tuned, trials, seed, Variant::Incremental).mean),
    }
}

/// Grid-then-golden-section maximization of throughput over the rate.
pub fn maximize_rs(sys: &SystemParams, rs_range: (f64, f64), objective: RsObjective) -> Result<OptResult> {
    let (lo, hi) = rs_range;
    if !(lo > 0.0 && hi <= 12.0 && lo <= hi) {
        return Err(Error::InvalidScenario(format!("rate range [{lo}, {hi}] not inside (0, 12]")));
    }
    let f = |rs: f64| tau_at_rate(sys, rs, objective);
    if lo == hi {
        return Ok(OptResult { arg_opt: lo, value_opt: f(lo)?, method: Method::Grid, evaluations: 1, grid_fallback: false });
    }
    let xs = linspace(lo, hi, RS_GRID_POINTS);
    let ys = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let i = argmax(&ys);
    let a = xs[i.saturating_sub(1)];
    let b = xs[(i + 1).min(RS_GRID_POINTS - 1)];
    let (x, fx, n) = golden_section_max(f, a, b, 1e-3)?;
    let (arg_opt, value_opt) = if ys[i] > fx { (xs[i], ys[i]) } else { (x, fx) };
    Ok(OptResult {
        arg_opt,
        value_opt,
        method: Method::GoldenSection,
        evaluations: RS_GRID_POINTS + n,
        grid_fallback: false,
    })
}
