//! Scenario definition: geometry, fading statistics and the protocol
//! constants derived from them.
//!
//! Noise power is normalized to one, so the interference temperature limit
//! enters only as the linear ratio `I/N0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a decibel ratio to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Normalized node distances and the path-loss exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_sd: f64,
    pub d_sp: f64,
    pub d_rp: f64,
    pub epsilon: f64,
}

impl NetworkGeometry {
    pub fn new(d_sr: f64, d_rd: f64, d_sd: f64, d_sp: f64, d_rp: f64, epsilon: f64) -> Result<Self> {
        let geo = Self { d_sr, d_rd, d_sd, d_sp, d_rp, epsilon };
        geo.validate()?;
        Ok(geo)
    }

    /// Relay on the source–destination segment: `d_rd = d_sd - d_sr`.
    pub fn collinear(d_sr: f64, d_sd: f64, d_sp: f64, d_rp: f64, epsilon: f64) -> Result<Self> {
        Self::new(d_sr, d_sd - d_sr, d_sd, d_sp, d_rp, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        let distances = [self.d_sr, self.d_rd, self.d_sd, self.d_sp, self.d_rp];
        if distances.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidScenario(format!(
                "distances must be finite and positive, got {distances:?}"
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon >= 2.0) {
            return Err(Error::InvalidScenario(format!(
                "path-loss exponent must be >= 2, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Every distance multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.d_sr * k,
            self.d_rd * k,
            self.d_sd * k,
            self.d_sp * k,
            self.d_rp * k,
            self.epsilon,
        )
    }
}

impl Default for NetworkGeometry {
    /// S–R 1.2, R–D 1.8, S–D 3, S–P and R–P 3, path-loss exponent 4.
    fn default() -> Self {
        Self { d_sr: 1.2, d_rd: 1.8, d_sd: 3.0, d_sp: 3.0, d_rp: 3.0, epsilon: 4.0 }
    }
}

/// Rate parameters of the exponentially distributed squared channel gains.
/// The mean squared gain of link `xy` is `1 / lambda_xy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkStats {
    pub lambda_sr: f64,
    pub lambda_rd: f64,
    pub lambda_sd: f64,
    pub lambda_sp: f64,
    pub lambda_rp: f64,
}

impl LinkStats {
    pub fn new(lambda_sr: f64, lambda_rd: f64, lambda_sd: f64, lambda_sp: f64, lambda_rp: f64) -> Result<Self> {
        let links = Self { lambda_sr, lambda_rd, lambda_sd, lambda_sp, lambda_rp };
        links.validate()?;
        Ok(links)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_sr, self.lambda_rd, self.lambda_sd, self.lambda_sp, self.lambda_rp];
        if all.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidScenario(format!(
                "fading rate parameters must be finite and positive, got {all:?}"
            )));
        }
        Ok(())
    }
}

impl From<&NetworkGeometry> for LinkStats {
    fn from(geo: &NetworkGeometry) -> Self {
        lambdas_from_geometry(geo)
    }
}

/// Path-loss mapping `lambda_xy = d_xy^epsilon` (mean gain `d^-epsilon`).
pub fn lambdas_from_geometry(geo: &NetworkGeometry) -> LinkStats {
    let lam = |d: f64| d.powf(geo.epsilon);
    LinkStats {
        lambda_sr: lam(geo.d_sr),
        lambda_rd: lam(geo.d_rd),
        lambda_sd: lam(geo.d_sd),
        lambda_sp: lam(geo.d_sp),
        lambda_rp: lam(geo.d_rp),
    }
}

/// A complete scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub links: LinkStats,
    /// Energy-harvesting conversion efficiency, in (0, 1].
    pub eta: f64,
    /// Power-splitting fraction routed to harvesting, in [0, 1].
    pub rho: f64,
    /// Interference temperature limit over noise power (linear).
    pub i_over_no: f64,
    /// Fixed transmission rate in bits per channel use.
    pub rs: f64,
}

impl SystemParams {
    pub fn new(links: LinkStats, eta: f64, rho: f64, i_over_no: f64, rs: f64) -> Result<Self> {
        let sys = Self { links, eta, rho, i_over_no, rs };
        sys.validate()?;
        Ok(sys)
    }

    /// Builds the ratio from absolute interference-limit and noise powers.
    pub fn from_powers(links: LinkStats, eta: f64, rho: f64, interference: f64, noise: f64, rs: f64) -> Result<Self> {
        Self::new(links, eta, rho, interference / noise, rs)
    }

    pub fn validate(&self) -> Result<()> {
        self.links.validate()?;
        let bad = |what: &str, v: f64| Err(Error::InvalidScenario(format!("{what} out of range: {v}")));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta", self.eta);
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad("rho", self.rho);
        }
        if !(self.i_over_no.is_finite() && self.i_over_no > 0.0) {
            return bad("i_over_no", self.i_over_no);
        }
        if !(self.rs.is_finite() && self.rs > 0.0) {
            return bad("rs", self.rs);
        }
        Ok(())
    }

    /// SNR threshold `2^rs - 1`.
    pub fn gamma_th(&self) -> f64 {
        self.rs.exp2() - 1.0
    }

    /// Normalized threshold `gamma_th / (I/N0)`.
    pub fn psi(&self) -> f64 {
        self.gamma_th() / self.i_over_no
    }

    /// Harvested-power factor `eta * rho`.
    pub fn beta(&self) -> f64 {
        self.eta * self.rho
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.links, self.eta, rho, self.i_over_no, self.rs)
    }

    pub fn with_rs(&self, rs: f64) -> Result<Self> {
        Self::new(self.links, self.eta, self.rho, self.i_over_no, rs)
    }

    pub fn with_i_over_no(&self, i_over_no: f64) -> Result<Self> {
        Self::new(self.links, self.eta, self.rho, i_over_no, self.rs)
    }

    pub fn with_links(&self, links: LinkStats) -> Result<Self> {
        Self::new(links, self.eta, self.rho, self.i_over_no, self.rs)
    }

    /// True when `rho` is strictly inside (0, 1).
    pub fn rho_interior(&self) -> bool {
        self.rho > 0.0 && self.rho < 1.0
    }
}

/// Auxiliary parameters of the closed-form relayed-outage expression.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P3Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub s: f64,
    /// Weight of the relay-to-primary correction, in [0, 1).
    pub t: f64,
}

pub fn p3_params(sys: &SystemParams) -> Result<P3Params> {
    if !sys.rho_interior() {
        return Err(Error::DegenerateRho { what: "p3 parameters", rho: sys.rho });
    }
    let l = &sys.links;
    let beta = sys.beta();
    let psi = sys.psi();
    Ok(P3Params {
        a: l.lambda_rp / beta,
        b: psi * l.lambda_rd / beta,
        c: psi * l.lambda_sd,
        d: l.lambda_rd / (beta * l.lambda_sd),
        s: (1.0 - sys.rho) / psi,
        t: relay_cap_weight(sys),
    })
}

/// Conditional mean of the direct-link received power `P_s |h_sd|^2`
/// given that it falls below `gamma_th` (noise normalized to one).
///
/// With `u = gamma_th * lambda_sd / (I * lambda_sp)` this is
/// `gamma_th * ((1 + u) ln(1 + u) - u) / u^2`.
pub fn mean_cond_direct(sys: &SystemParams) -> f64 {
    let gamma = sys.gamma_th();
    let u = gamma * sys.links.lambda_sd / (sys.i_over_no * sys.links.lambda_sp);
    let ratio = if u < 0.05 {
        // Σ_{k≥2} (-u)^{k-2} / (k (k-1))
        let mut sum = 0.0;
        let mut power = 1.0;
        for k in 2..20 {
            let kf = k as f64;
            sum += power / (kf * (kf - 1.0));
            power *= -u;
        }
        sum
    } else {
        ((1.0 + u) * u.ln_1p() - u) / (u * u)
    };
    gamma * ratio
}

/// The weight `t = z / (1 + z)` with
/// `z = lambda_rd / (I lambda_rp) * (gamma_th - E[P_s|h_sd|^2 | below threshold])`.
pub fn relay_cap_weight(sys: &SystemParams) -> f64 {
    let l = &sys.links;
    let headroom = sys.gamma_th() - mean_cond_direct(sys);
    let z = l.lambda_rd / (sys.i_over_no * l.lambda_rp) * headroom;
    z / (1.0 + z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(rho: f64) -> SystemParams {
        let links = lambdas_from_geometry(&NetworkGeometry::default());
        SystemParams::new(links, 0.7, rho, db_to_linear(6.0), 3.0).unwrap()
    }

    #[test]
    fn lambdas_follow_path_loss() {
        let l = lambdas_from_geometry(&NetworkGeometry::default());
        assert!((l.lambda_sr - 2.0736).abs() < 1e-12);
        assert!((l.lambda_sd - 81.0).abs() < 1e-12);
        let unit = NetworkGeometry::new(1.0, 1.0, 1.0, 1.0, 1.0, 3.3).unwrap();
        let l = lambdas_from_geometry(&unit);
        assert_eq!(l.lambda_rp, 1.0);
    }

    #[test]
    fn derived_constants() {
        let sys = reference(0.5);
        assert!((sys.gamma_th() - 7.0).abs() < 1e-15);
        assert!((sys.beta() - 0.35).abs() < 1e-15);
        let p = p3_params(&sys).unwrap();
        assert!((p.a - 81.0 / 0.35).abs() < 1e-9);
        assert!((p.s - 0.284_362_265).abs() < 1e-8);
        assert!(p.t >= 0.0 && p.t < 1.0);
    }

    #[test]
    fn degenerate_rho_rejected() {
        assert!(matches!(p3_params(&reference(0.0)), Err(Error::DegenerateRho { .. })));
        assert!(matches!(p3_params(&reference(1.0)), Err(Error::DegenerateRho { .. })));
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(NetworkGeometry::new(0.0, 1.0, 1.0, 1.0, 1.0, 4.0).is_err());
        assert!(NetworkGeometry::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.5).is_err());
        assert!(NetworkGeometry::collinear(3.5, 3.0, 3.0, 3.0, 4.0).is_err());
        let links = lambdas_from_geometry(&NetworkGeometry::default());
        assert!(SystemParams::new(links, 0.0, 0.5, 1.0, 1.0).is_err());
        assert!(SystemParams::new(links, 0.7, 1.5, 1.0, 1.0).is_err());
        assert!(SystemParams::new(links, 0.7, 0.5, -1.0, 1.0).is_err());
        assert!(SystemParams::new(links, 0.7, 0.5, 1.0, 0.0).is_err());
        assert!(LinkStats::new(1.0, 1.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn t_vanishes_without_relay_primary_coupling() {
        let mut sys = reference(0.5);
        sys.links.lambda_rp = 1e12;
        assert!(p3_params(&sys).unwrap().t < 1e-10);
    }

    #[test]
    fn conditional_mean_limits() {
        let sys = reference(0.5);
        let m = mean_cond_direct(&sys);
        assert!(m > 0.0 && m < sys.gamma_th());
        let tiny = sys.with_rs(1e-9).unwrap();
        assert!(mean_cond_direct(&tiny) < 1e-9);
        // series and closed branch meet continuously
        let mut lo = sys;
        lo.i_over_no = 7.0 / (0.05 * (1.0 - 1e-12));
        let mut hi = sys;
        hi.i_over_no = 7.0 / (0.05 * (1.0 + 1e-12));
        assert!((mean_cond_direct(&lo) - mean_cond_direct(&hi)).abs() < 1e-11);
    }
}
