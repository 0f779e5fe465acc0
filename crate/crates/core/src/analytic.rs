//! Closed-form outage probabilities and throughput of incremental DF
//! relaying with a power-splitting energy-harvesting relay.
//!
//! Event notation: `Γr` is the relay SNR, `Γd1` the direct-link SNR in the
//! first slot, `Γd2` the relayed SNR and `Γd = Γd1 + Γd2` the MRC output.
//!
//! * `p1 = Pr(Γr < γth)`
//! * `p2 = Pr(Γd1 ≥ γth, Γr ≥ γth)`
//! * `p3 = Pr(Γd < γth, Γr ≥ γth)`
//! * `q1 = 1 - p1 - p2 - p3 = Pr(Γd1 < γth ≤ Γd, Γr ≥ γth)`
//! * `q2 = Pr(Γd1 ≥ γth)`
//!
//! and the throughput is `τ = 0.5 Rs q1 + Rs q2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{p3_params, P3Params, SystemParams};
use crate::specfun::{exp_e1_scaled, exp_neg_ei_scaled};

/// Largest clamping of the closed-form `p3` accepted before the scenario is
/// reported as outside the approximation regime.
pub const P3_CLAMP_LIMIT: f64 = 0.02;

/// Outage decomposition and throughput at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageBreakdown {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub q1: f64,
    pub q2: f64,
    /// Bits per channel use.
    pub tau: f64,
    /// `p3` before clamping to [0, 1].
    pub p3_raw: f64,
    /// Set when `p3` was clamped or `q1` floored at zero.
    pub regime_warning: bool,
}

/// Which expression supplies `p3` inside [`tau_incremental`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P3Variant {
    /// Full expression including the relay-to-primary power cap.
    Full,
    /// Relay-to-primary link neglected.
    NoRp,
    /// Two-term high-SNR approximation of `NoRp`.
    HighSnr,
}

fn prob(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// `e^x (E1(x) - E1(x + shift))`, evaluated as a difference of scaled terms.
fn e1_window(x: f64, shift: f64) -> Result<f64> {
    Ok(exp_e1_scaled(x)? - (-shift).exp() * exp_e1_scaled(x + shift)?)
}

/// `e^{-y - shift} (Ei(y) - Ei(y + shift))`.
fn ei_window(y: f64, shift: f64) -> Result<f64> {
    Ok((-shift).exp() * exp_neg_ei_scaled(y)? - exp_neg_ei_scaled(y + shift)?)
}

/// Relay decoding outage `Pr(Γr < γth)`.
pub fn p1_relay_decode_outage(sys: &SystemParams) -> f64 {
    if sys.rho >= 1.0 {
        return 1.0;
    }
    let l = &sys.links;
    let k = l.lambda_sr * sys.psi() / (l.lambda_sp * (1.0 - sys.rho));
    prob(k / (1.0 + k))
}

/// Direct-link success `Pr(Γd1 ≥ γth)`; independent of `rho` and `eta`.
pub fn q2_direct_success(sys: &SystemParams) -> f64 {
    let l = &sys.links;
    prob(1.0 / (1.0 + l.lambda_sd * sys.psi() / l.lambda_sp))
}

/// Joint success of the direct link and relay decoding.
pub fn p2_both_succeed(sys: &SystemParams) -> f64 {
    if sys.rho >= 1.0 {
        return 0.0;
    }
    let l = &sys.links;
    let k = sys.psi() / l.lambda_sp * (l.lambda_sd + l.lambda_sr / (1.0 - sys.rho));
    prob(1.0 / (1.0 + k))
}

/// The twelve summands of the closed-form `p3`.
///
/// `p3 ≈ t · (sum of the t_* terms) + (sum of the r_* terms)`. The `t_*`
/// bracket is the expectation of the relay-cap correction; the `r_*` bracket
/// is exactly `p3` for an uncapped relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P3Terms {
    pub params: P3Params,
    pub t_e1_a: f64,
    pub t_ei: f64,
    pub t_e1_ab: f64,
    pub t_exp_ab: f64,
    pub t_exp_a: f64,
    pub t_const: f64,
    pub r_e1_b: f64,
    pub r_ei: f64,
    pub r_exp_b: f64,
    pub r_rational_s: f64,
    pub r_rational_c: f64,
    pub r_const: f64,
}

impl P3Terms {
    /// Bracket multiplied by `t`.
    pub fn capped_bracket(&self) -> f64 {
        self.t_e1_a + self.t_ei + self.t_e1_ab + self.t_exp_ab + self.t_exp_a + self.t_const
    }

    /// Bracket that survives when the relay power cap is inactive.
    pub fn uncapped_bracket(&self) -> f64 {
        self.r_e1_b + self.r_ei + self.r_exp_b + self.r_rational_s + self.r_rational_c + self.r_const
    }

    pub fn sum(&self) -> f64 {
        self.params.t * self.capped_bracket() + self.uncapped_bracket()
    }
}

pub fn p3_terms(sys: &SystemParams) -> Result<P3Terms> {
    let params = p3_params(sys)?;
    let P3Params { a, b, c, d, s, .. } = params;
    let lsr = sys.links.lambda_sr;
    let lsp = sys.links.lambda_sp;
    let ab = a + b;
    let den_t = ab + d * lsp;
    let den_r = b + d * lsp;
    let y = d * (lsr + lsp * s);
    let qs = c * s + lsp * s + lsr;
    let x_a = a * lsr / (c + lsp);
    let x_ab = ab * lsr / lsp;
    let x_b = b * lsr / lsp;

    Ok(P3Terms {
        params,
        t_e1_a: (a / (c + lsp)).powi(2) * lsp * lsr / den_t * e1_window(x_a, a * s)?,
        t_ei: d * d * lsp * lsr / den_t * (-a * s).exp() * ei_window(y, b * s)?,
        t_e1_ab: -lsr * ab * ab / (lsp * den_t) * e1_window(x_ab, ab * s)?,
        t_exp_ab: -lsr * (-s * ab).exp() / (lsp * s + lsr),
        t_exp_a: lsp * lsr * (-a * s).exp() / ((c + lsp) * qs),
        t_const: c / (c + lsp),
        r_e1_b: b * b * lsr / (lsp * den_r) * e1_window(x_b, b * s)?,
        r_ei: -d * d * lsp * lsr / den_r * ei_window(y, b * s)?,
        r_exp_b: lsr * (-b * s).exp() / (lsp * s + lsr),
        r_rational_s: c * lsp * s * s / ((lsp * s + lsr) * qs),
        r_rational_c: -lsp * lsr / ((c + lsp) * qs),
        r_const: -c / (c + lsp),
    })
}

/// Unclamped closed-form `p3` (requires `0 < rho < 1`).
pub fn p3_closed_form_raw(sys: &SystemParams) -> Result<f64> {
    Ok(p3_terms(sys)?.sum())
}

fn clamp_p3(raw: f64) -> Result<f64> {
    let clamped = prob(raw);
    if !raw.is_finite() || (raw - clamped).abs() > P3_CLAMP_LIMIT {
        return Err(Error::RegimeViolation { raw, limit: P3_CLAMP_LIMIT });
    }
    Ok(clamped)
}

/// Approximate `Pr(Γd < γth, Γr ≥ γth)` including the relay power cap.
pub fn p3_closed_form(sys: &SystemParams) -> Result<f64> {
    clamp_p3(p3_closed_form_raw(sys)?)
}

/// CDF of `X = min(hp, I/|g_rp|^2) |h_rd|^2` given the harvested power `hp`.
pub fn cdf_harvested_mrc(x: f64, hp: f64, sys: &SystemParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let l = &sys.links;
    let i = sys.i_over_no;
    let z = l.lambda_rd * x / (i * l.lambda_rp);
    let cap_active = -(-l.lambda_rp * i / hp).exp_m1();
    let survival = (-l.lambda_rd * x / hp).exp() * (1.0 - (1.0 - cap_active) * z / (1.0 + z));
    prob(1.0 - survival)
}

fn p3_no_rp_raw(sys: &SystemParams) -> Result<f64> {
    if !sys.rho_interior() {
        return Err(Error::DegenerateRho { what: "p3 without relay cap", rho: sys.rho });
    }
    let l = &sys.links;
    let (lsr, lsp, lrd, lsd) = (l.lambda_sr, l.lambda_sp, l.lambda_rd, l.lambda_sd);
    let beta = sys.beta();
    let psi = sys.psi();
    let one_minus = 1.0 - sys.rho;

    let denom = lrd * lsp / (beta * lsd) + lrd * psi / beta;
    let shift = lrd * one_minus / beta;
    let x = lrd * lsr * psi / (beta * lsp);
    let harvest = (lrd * psi / beta).powi(2) / (lsp * denom) * lsr * e1_window(x, shift)?;
    let decode = -lsr * psi * -(-shift).exp_m1() / (lsp * one_minus + lsr * psi);
    let ratio = lrd / (beta * lsd);
    let y = ratio * (lsr + lsp * one_minus / psi);
    let direct = -lsp * lsr / denom * ratio * ratio * ei_window(y, shift)?;
    Ok(harvest + decode + direct)
}

/// `p3` with the relay-to-primary constraint removed (`t = 0`).
pub fn p3_no_rp_limit(sys: &SystemParams) -> Result<f64> {
    clamp_p3(p3_no_rp_raw(sys)?)
}

/// High-SNR two-term approximation of [`p3_no_rp_limit`], meant for
/// `I lambda_sp / N0 >> gamma_th`.
pub fn p3_high_snr(sys: &SystemParams) -> Result<f64> {
    if !sys.rho_interior() {
        return Err(Error::DegenerateRho { what: "high-SNR p3", rho: sys.rho });
    }
    let l = &sys.links;
    let (lsr, lsp, lrd, lsd) = (l.lambda_sr, l.lambda_sp, l.lambda_rd, l.lambda_sd);
    let beta = sys.beta();
    let psi = sys.psi();
    let one_minus = 1.0 - sys.rho;
    let x = psi * lrd * lsr / (beta * lsp);
    let harvest = (psi * lrd / (beta * lsp)).powi(2) * lsp * lsr
        / (psi * lrd / beta + lrd * lsp / (beta * lsd))
        * exp_e1_scaled(x)?;
    let decode = lsr / (lsp * one_minus / psi + lsr) * (-lrd * one_minus / beta).exp_m1();
    Ok(prob(harvest + decode))
}

/// Assembles the full outage breakdown and throughput.
///
/// At `rho ∈ {0, 1}` the relayed branch is unavailable, so `q1 = 0` and
/// `tau = rs * q2` exactly.
pub fn tau_incremental(sys: &SystemParams, variant: P3Variant) -> Result<OutageBreakdown> {
    let p1 = p1_relay_decode_outage(sys);
    let p2 = p2_both_succeed(sys);
    let q2 = q2_direct_success(sys);
    if !sys.rho_interior() {
        let p3 = prob(1.0 - p1 - p2);
        return Ok(OutageBreakdown {
            p1,
            p2,
            p3,
            q1: 0.0,
            q2,
            tau: sys.rs * q2,
            p3_raw: p3,
            regime_warning: false,
        });
    }
    let (p3, p3_raw) = match variant {
        P3Variant::Full => {
            let raw = p3_closed_form_raw(sys)?;
            (clamp_p3(raw)?, raw)
        }
        P3Variant::NoRp => {
            let raw = p3_no_rp_raw(sys)?;
            (clamp_p3(raw)?, raw)
        }
        P3Variant::HighSnr => {
            let v = p3_high_snr(sys)?;
            (v, v)
        }
    };
    let q1_raw = 1.0 - (p1 + p2 + p3);
    let q1 = q1_raw.max(0.0);
    Ok(OutageBreakdown {
        p1,
        p2,
        p3,
        q1,
        q2,
        tau: 0.5 * sys.rs * q1 + sys.rs * q2,
        p3_raw,
        regime_warning: p3 != p3_raw || q1_raw < 0.0,
    })
}

/// Simplified throughput whose stationary point is [`rho_star_closed_form`].
pub fn tau_simplified(sys: &SystemParams) -> Result<f64> {
    if !sys.rho_interior() {
        return Err(Error::DegenerateRho { what: "simplified throughput", rho: sys.rho });
    }
    let l = &sys.links;
    let (lsr, lsp, lrd, lsd) = (l.lambda_sr, l.lambda_sp, l.lambda_rd, l.lambda_sd);
    let (psi, eta, rho) = (sys.psi(), sys.eta, sys.rho);
    let relay_fail = 1.0 / ((1.0 + lsp / (lsd * psi)) * (1.0 + eta * lsp * rho / (psi * lrd * lsr)));
    let decode_fail = eta * rho * lsr * psi / (lrd * lsp * (1.0 - rho));
    let direct_ok = 1.0 / (psi * lsd / lsp + 1.0);
    Ok(0.5 * sys.rs * (1.0 - (relay_fail + decode_fail + direct_ok)) + sys.rs * q2_direct_success(sys))
}

/// Simplified two-hop throughput without the direct link; its stationary
/// point is [`rho_star_no_direct`].
pub fn tau_simplified_no_direct(sys: &SystemParams) -> Result<f64> {
    if !sys.rho_interior() {
        return Err(Error::DegenerateRho { what: "simplified two-hop throughput", rho: sys.rho });
    }
    let l = &sys.links;
    let (lsr, lsp, lrd) = (l.lambda_sr, l.lambda_sp, l.lambda_rd);
    let (psi, eta, rho) = (sys.psi(), sys.eta, sys.rho);
    let relay_fail = 1.0 / (1.0 + eta * lsp * rho / (psi * lrd * lsr));
    let decode_fail = eta * rho * lsr * psi / (lrd * lsp * (1.0 - rho));
    Ok(0.5 * sys.rs * (1.0 - relay_fail - decode_fail))
}

/// Two-hop throughput with the direct link removed, the `lambda_sd → ∞`
/// limit of [`tau_incremental`]: `0.5 rs Pr(Γr ≥ γth, Γd2 ≥ γth)`.
pub fn tau_no_direct(sys: &SystemParams) -> Result<f64> {
    if !sys.rho_interior() {
        return Ok(0.0);
    }
    let l = &sys.links;
    let (lsr, lsp, lrd, lrp) = (l.lambda_sr, l.lambda_sp, l.lambda_rd, l.lambda_rp);
    let beta = sys.beta();
    let psi = sys.psi();
    let gamma = sys.gamma_th();
    let a = lrp / beta;
    let b = psi * lrd / beta;
    let s = (1.0 - sys.rho) / psi;
    let ab = a + b;
    let decode_odds = lsp * s + lsr;

    // the direct link never carries any power, so the conditional mean is zero
    let z = lrd * gamma / (sys.i_over_no * lrp);
    let t = z / (1.0 + z);

    let capped = -lsr * ab / lsp * e1_window(ab * lsr / lsp, ab * s)? - lsr * (-ab * s).exp() / decode_odds + 1.0;
    let uncapped = b * lsr / lsp * e1_window(b * lsr / lsp, b * s)? + lsr * (-b * s).exp_m1() / decode_odds;
    let p3 = clamp_p3(t * capped + uncapped)?;
    let q1 = (1.0 - p1_relay_decode_outage(sys) - p3).max(0.0);
    Ok(0.5 * sys.rs * q1)
}

/// Power-splitting fraction maximizing [`tau_simplified`].
pub fn rho_star_closed_form(sys: &SystemParams) -> Result<f64> {
    let l = &sys.links;
    let psi = sys.psi();
    let k = (1.0 + l.lambda_sp / (l.lambda_sd * psi)).sqrt();
    let rho = (1.0 - k * psi * l.lambda_sr / l.lambda_sp) / (1.0 + k * sys.eta / l.lambda_rd);
    if rho > 0.0 && rho < 1.0 {
        Ok(rho)
    } else {
        Err(Error::OutOfRange { what: "rho*", value: rho })
    }
}

/// Power-splitting fraction maximizing the two-hop throughput without a
/// direct link.
pub fn rho_star_no_direct(sys: &SystemParams) -> Result<f64> {
    let l = &sys.links;
    let rho = (1.0 - sys.psi() * l.lambda_sr / l.lambda_sp) / (1.0 + sys.eta / l.lambda_rd);
    if rho > 0.0 && rho < 1.0 {
        Ok(rho)
    } else {
        Err(Error::OutOfRange { what: "rho*_nd", value: rho })
    }
}
