//! JSON scenario files.
//!
//! A scenario gives either node distances plus a path-loss exponent or the
//! fading rate parameters directly, and exactly one reading of the
//! interference-to-noise ratio:
//!
//! ```json
//! {
//!   "geometry": {"d_sr": 1.2, "d_rd": 1.8, "d_sd": 3, "d_sp": 3, "d_rp": 3},
//!   "epsilon": 4,
//!   "eta": 0.7, "rho": 0.5, "i_over_no_db": 6, "rs": 3
//! }
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::Error;
use crate::model::{db_to_linear, lambdas_from_geometry, LinkStats, NetworkGeometry, SystemParams};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse scenario: {0}")]
    Parse(String),
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Distances {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_sd: f64,
    pub d_sp: f64,
    pub d_rp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lambdas {
    pub sr: f64,
    pub rd: f64,
    pub sd: f64,
    pub sp: f64,
    pub rp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Distances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Lambdas>,
    pub eta: f64,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_over_no_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_over_no_linear: Option<f64>,
    pub rs: f64,
}

fn parse_err(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse(msg.into())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        cfg.check_shape()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Structural rules that serde cannot express.
    fn check_shape(&self) -> Result<(), ScenarioError> {
        match (&self.geometry, &self.lambdas) {
            (Some(_), Some(_)) => return Err(parse_err("give exactly one of \"geometry\" or \"lambdas\", not both")),
            (None, None) => return Err(parse_err("one of \"geometry\" or \"lambdas\" is required")),
            (Some(_), None) if self.epsilon.is_none() => {
                return Err(parse_err("\"geometry\" requires \"epsilon\""))
            }
            (None, Some(_)) if self.epsilon.is_some() => {
                return Err(parse_err("\"epsilon\" only applies to \"geometry\""))
            }
            _ => {}
        }
        match (self.i_over_no_db, self.i_over_no_linear) {
            (Some(_), Some(_)) => Err(parse_err("give exactly one of \"i_over_no_db\" or \"i_over_no_linear\"")),
            (None, None) => Err(parse_err("one of \"i_over_no_db\" or \"i_over_no_linear\" is required")),
            _ => Ok(()),
        }
    }

    pub fn i_over_no(&self) -> f64 {
        match (self.i_over_no_db, self.i_over_no_linear) {
            (Some(db), _) => db_to_linear(db),
            (None, Some(lin)) => lin,
            (None, None) => f64::NAN,
        }
    }

    pub fn geometry(&self) -> Option<Result<NetworkGeometry, Error>> {
        let g = self.geometry?;
        let eps = self.epsilon.unwrap_or(f64::NAN);
        Some(NetworkGeometry::new(g.d_sr, g.d_rd, g.d_sd, g.d_sp, g.d_rp, eps))
    }

    pub fn links(&self) -> Result<LinkStats, Error> {
        if let Some(geo) = self.geometry() {
            return Ok(lambdas_from_geometry(&geo?));
        }
        match self.lambdas {
            Some(l) => LinkStats::new(l.sr, l.rd, l.sd, l.sp, l.rp),
            None => Err(Error::InvalidScenario("no link description".into())),
        }
    }

    pub fn system_params(&self) -> Result<SystemParams, Error> {
        SystemParams::new(self.links()?, self.eta, self.rho, self.i_over_no(), self.rs)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ScenarioError> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| parse_err(format!("override '{assignment}' is not key=value")))?;
        let key = key.trim();
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("override '{key}': '{}' is not a number", value.trim())))?;
        self.set(key, v)
    }

    /// Sets a numeric field by name.
    pub fn set(&mut self, key: &str, v: f64) -> Result<(), ScenarioError> {
        let not_applicable = || parse_err(format!("key '{key}' does not apply to this scenario"));
        match key {
            "eta" => self.eta = v,
            "rho" => self.rho = v,
            "rs" => self.rs = v,
            "i_over_no_db" => {
                self.i_over_no_db = Some(v);
                self.i_over_no_linear = None;
            }
            "i_over_no_linear" => {
                self.i_over_no_linear = Some(v);
                self.i_over_no_db = None;
            }
            "epsilon" => {
                if self.geometry.is_none() {
                    return Err(not_applicable());
                }
                self.epsilon = Some(v);
            }
            "d_sr" | "d_rd" | "d_sd" | "d_sp" | "d_rp" => {
                let g = self.geometry.as_mut().ok_or_else(not_applicable)?;
                *match key {
                    "d_sr" => &mut g.d_sr,
                    "d_rd" => &mut g.d_rd,
                    "d_sd" => &mut g.d_sd,
                    "d_sp" => &mut g.d_sp,
                    _ => &mut g.d_rp,
                } = v;
            }
            "lambda_sr" | "lambda_rd" | "lambda_sd" | "lambda_sp" | "lambda_rp" => {
                let l = self.lambdas.as_mut().ok_or_else(not_applicable)?;
                *match key {
                    "lambda_sr" => &mut l.sr,
                    "lambda_rd" => &mut l.rd,
                    "lambda_sd" => &mut l.sd,
                    "lambda_sp" => &mut l.sp,
                    _ => &mut l.rp,
                } = v;
            }
            _ => return Err(parse_err(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Moves the relay along the source–destination segment, keeping
    /// `d_sr + d_rd = d_sd`.
    pub fn set_d_sr_collinear(&mut self, d_sr: f64) -> Result<(), ScenarioError> {
        let g = self
            .geometry
            .as_mut()
            .ok_or_else(|| parse_err("sweeping d_sr needs a geometry-based scenario"))?;
        g.d_sr = d_sr;
        g.d_rd = g.d_sd - d_sr;
        Ok(())
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn sha256(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GEO: &str = r#"{"geometry": {"d_sr": 1.2, "d_rd": 1.8, "d_sd": 3, "d_sp": 3, "d_rp": 3},
        "epsilon": 4, "eta": 0.7, "rho": 0.5, "i_over_no_db": 6, "rs": 3}"#;

    #[test]
    fn parses_geometry_form() {
        let cfg = ScenarioConfig::from_json(GEO).unwrap();
        let sys = cfg.system_params().unwrap();
        assert!((sys.links.lambda_sr - 2.0736).abs() < 1e-12);
        assert!((sys.i_over_no - 10f64.powf(0.6)).abs() < 1e-12);
    }

    #[test]
    fn parses_lambda_form() {
        let cfg = ScenarioConfig::from_json(
            r#"{"lambdas": {"sr": 2, "rd": 10, "sd": 81, "sp": 81, "rp": 81},
                "eta": 0.7, "rho": 0.5, "i_over_no_linear": 6, "rs": 3}"#,
        )
        .unwrap();
        let sys = cfg.system_params().unwrap();
        assert_eq!(sys.i_over_no, 6.0);
        assert_eq!(sys.links.lambda_rd, 10.0);
    }

    #[test]
    fn rejects_ambiguous_shapes() {
        let both = GEO.replace("\"eta\"", "\"lambdas\": {\"sr\": 1, \"rd\": 1, \"sd\": 1, \"sp\": 1, \"rp\": 1}, \"eta\"");
        assert!(matches!(ScenarioConfig::from_json(&both), Err(ScenarioError::Parse(_))));
        let two_readings = GEO.replace("\"rs\"", "\"i_over_no_linear\": 6, \"rs\"");
        assert!(matches!(ScenarioConfig::from_json(&two_readings), Err(ScenarioError::Parse(_))));
        let no_reading = GEO.replace("\"i_over_no_db\": 6,", "");
        assert!(matches!(ScenarioConfig::from_json(&no_reading), Err(ScenarioError::Parse(_))));
        let no_eps = GEO.replace("\"epsilon\": 4,", "");
        assert!(matches!(ScenarioConfig::from_json(&no_eps), Err(ScenarioError::Parse(_))));
        let unknown = GEO.replace("\"rs\"", "\"bogus\": 1, \"rs\"");
        assert!(ScenarioConfig::from_json(&unknown).is_err());
        assert!(ScenarioConfig::from_json("{").is_err());
    }

    #[test]
    fn invalid_values_surface_as_scenario_errors() {
        let cfg = ScenarioConfig::from_json(&GEO.replace("\"rho\": 0.5", "\"rho\": 1.5")).unwrap();
        assert!(cfg.system_params().is_err());
    }

    #[test]
    fn overrides() {
        let mut cfg = ScenarioConfig::from_json(GEO).unwrap();
        cfg.apply_override("rho=0").unwrap();
        cfg.apply_override(" d_sr = 1.7").unwrap();
        cfg.apply_override("i_over_no_linear=6").unwrap();
        assert_eq!(cfg.rho, 0.0);
        assert_eq!(cfg.geometry.unwrap().d_sr, 1.7);
        assert_eq!(cfg.i_over_no_db, None);
        assert!(cfg.apply_override("lambda_sr=3").is_err());
        assert!(cfg.apply_override("nonsense=3").is_err());
        assert!(cfg.apply_override("rho").is_err());
        assert!(cfg.apply_override("rho=abc").is_err());
    }

    #[test]
    fn collinear_move() {
        let mut cfg = ScenarioConfig::from_json(GEO).unwrap();
        cfg.set_d_sr_collinear(1.7).unwrap();
        let g = cfg.geometry.unwrap();
        assert!((g.d_rd - 1.3).abs() < 1e-12);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ScenarioConfig::from_json(GEO).unwrap();
        let mut b = a.clone();
        assert_eq!(a.sha256(), b.sha256());
        assert_eq!(a.sha256().len(), 64);
        b.rho = 0.6;
        assert_ne!(a.sha256(), b.sha256());
    }
}
