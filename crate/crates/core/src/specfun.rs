//! Exponential integrals on the positive real axis.
//!
//! `E1(x) = ∫ₓ^∞ e^{-t}/t dt` and the principal-value `Ei(x) = ∫_{-∞}^x e^t/t dt`.
//! Small arguments use the convergent power series, `E1` switches to a
//! continued fraction at `x >= 1` and `Ei` to its asymptotic expansion at
//! `x >= 40`. Scaled variants avoid overflow in the `e^{x}E1(x)` and
//! `e^{-x}Ei(x)` products that show up in the outage expressions.

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_SWITCH: f64 = 1.0;
const EI_ASYMPTOTIC_SWITCH: f64 = 40.0;
const MAX_ITER: usize = 10_000;

/// A function value with an a-posteriori bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunResult {
    pub value: f64,
    pub est_abs_error: f64,
}

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { function, arg: x })
    }
}

/// Σ_{k≥1} (−x)^k / (k·k!) together with the sum of term magnitudes.
fn e1_series_tail(x: f64) -> (f64, f64) {
    let mut power = 1.0; // (-x)^k / k!
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        power *= -x / kf;
        let term = power / kf;
        sum += term;
        abs_sum += term.abs();
        if term.abs() <= f64::EPSILON * sum.abs() * 0.25 {
            break;
        }
    }
    (sum, abs_sum)
}

/// Σ_{k≥1} x^k / (k·k!), all terms positive.
fn ei_series_tail(x: f64) -> f64 {
    let mut power = 1.0;
    let mut sum = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        power *= x / kf;
        let term = power / kf;
        sum += term;
        if term <= f64::EPSILON * sum * 0.25 {
            break;
        }
    }
    sum
}

/// Modified Lentz evaluation of `e^x E1(x)`; returns (value, iterations).
fn e1_scaled_continued_fraction(x: f64) -> (f64, usize) {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    let mut iterations = 1;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        iterations = i + 1;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    (h, iterations)
}

/// `e^{-x} Ei(x)` by the asymptotic series, truncated at the smallest term.
/// Returns (value, truncation estimate).
fn ei_scaled_asymptotic(x: f64) -> (f64, f64) {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..MAX_ITER {
        let next = term * k as f64 / x;
        if next >= term || next <= f64::EPSILON * 0.25 * sum {
            term = next.min(term);
            break;
        }
        term = next;
        sum += term;
    }
    (sum / x, term / x)
}

/// Exponential integral `E1(x)` for `x > 0`.
///
/// Underflows to zero (not an error) once `e^{-x}` does, around `x ≈ 745`.
pub fn e1(x: f64) -> Result<SpecFunResult> {
    check_domain("e1", x)?;
    if x < SERIES_SWITCH {
        let (tail, abs_tail) = e1_series_tail(x);
        let ln_x = x.ln();
        let value = -EULER_GAMMA - ln_x - tail;
        let magnitude = EULER_GAMMA + ln_x.abs() + abs_tail;
        Ok(SpecFunResult {
            value,
            est_abs_error: 4.0 * f64::EPSILON * magnitude,
        })
    } else {
        let (scaled, iterations) = e1_scaled_continued_fraction(x);
        let value = scaled * (-x).exp();
        Ok(SpecFunResult {
            value,
            est_abs_error: (iterations as f64 + 4.0) * f64::EPSILON * value,
        })
    }
}

/// Principal-value exponential integral `Ei(x)` for `x > 0`.
///
/// Overflows to `+∞` past `x ≈ 709.8`; use [`exp_neg_ei_scaled`] there.
pub fn ei(x: f64) -> Result<SpecFunResult> {
    check_domain("ei", x)?;
    if x < EI_ASYMPTOTIC_SWITCH {
        let tail = ei_series_tail(x);
        let ln_x = x.ln();
        let value = EULER_GAMMA + ln_x + tail;
        let magnitude = EULER_GAMMA + ln_x.abs() + tail;
        Ok(SpecFunResult {
            value,
            est_abs_error: 4.0 * f64::EPSILON * magnitude,
        })
    } else {
        let (scaled, truncation) = ei_scaled_asymptotic(x);
        let growth = x.exp();
        let value = scaled * growth;
        Ok(SpecFunResult {
            value,
            est_abs_error: (4.0 * f64::EPSILON * scaled + truncation) * growth,
        })
    }
}

/// `e^x E1(x)` without intermediate overflow; lies in `(1/(1+x), 1/x)`.
pub fn exp_e1_scaled(x: f64) -> Result<f64> {
    check_domain("exp_e1_scaled", x)?;
    if x < SERIES_SWITCH {
        Ok(x.exp() * e1(x)?.value)
    } else {
        Ok(e1_scaled_continued_fraction(x).0)
    }
}

/// `e^{-x} Ei(x)` without intermediate overflow.
pub fn exp_neg_ei_scaled(x: f64) -> Result<f64> {
    check_domain("exp_neg_ei_scaled", x)?;
    if x < EI_ASYMPTOTIC_SWITCH {
        Ok((-x).exp() * ei(x)?.value)
    } else {
        Ok(ei_scaled_asymptotic(x).0)
    }
}
