//! Flat key-value run configuration: a diff-friendly text file plus
//! command-line `key=value` overrides. Every numeric field is validated
//! against the library preconditions before any computation starts.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use qdot_core::hamiltonian::{ModelParams, Sector};
use qdot_core::model::OmegaPolicy;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub v0: f64,
    pub beta: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub beta_points: usize,
    /// One or more lateral confinement lengths (scan series).
    pub l_perp: Vec<f64>,
    pub sector: Sector,
    pub interacting: bool,
    pub m_size: usize,
    /// None means the automatic well-scale policy.
    pub omega: Option<Complex64>,
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub omega_start: Complex64,
    pub omega_end: Complex64,
    pub omega_points: usize,
    pub state: StateChoice,
    pub m_list: Vec<usize>,
    pub grid_x_max: f64,
    pub grid_points: usize,
    pub output: String,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateChoice {
    Ground,
    Index(usize),
    Energy(Complex64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Tsv,
    Json,
    Both,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            v0: 2.0,
            beta: 4.0,
            beta_min: 0.5,
            beta_max: 8.0,
            beta_points: 40,
            l_perp: vec![0.2],
            sector: Sector::Symmetric,
            interacting: true,
            m_size: 20,
            omega: None,
            beta_lo: 0.8,
            beta_hi: 2.5,
            omega_start: Complex64::new(1.0, -0.05),
            omega_end: Complex64::new(1.0, -0.45),
            omega_points: 9,
            state: StateChoice::Ground,
            m_list: vec![12, 16, 20, 24],
            grid_x_max: 9.0,
            grid_points: 96,
            output: "qdot_out".to_string(),
            format: OutputFormat::Both,
        }
    }
}

impl RunConfig {
    /// Reads a key-value file (if given) and applies command-line overrides.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, String> {
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| format!("{}:{}: expected key = value", p.display(), lineno + 1))?;
                pairs.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        for (key, value) in overrides {
            pairs.insert(key.clone(), value.clone());
        }
        Self::from_pairs(&pairs)
    }

    fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        for (key, value) in pairs {
            match key.as_str() {
                "v0" => cfg.v0 = parse_f64(key, value)?,
                "beta" => cfg.beta = parse_f64(key, value)?,
                "beta_min" => cfg.beta_min = parse_f64(key, value)?,
                "beta_max" => cfg.beta_max = parse_f64(key, value)?,
                "beta_points" => cfg.beta_points = parse_usize(key, value)?,
                "l_perp" => {
                    cfg.l_perp = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("l_perp: {e}")))
                        .collect::<Result<Vec<_>, _>>()?;
                }
                "sector" => {
                    cfg.sector = match value.as_str() {
                        "symmetric" => Sector::Symmetric,
                        "antisymmetric" => Sector::Antisymmetric,
                        other => return Err(format!("sector: unknown value '{other}'")),
                    };
                }
                "interacting" => cfg.interacting = parse_bool(key, value)?,
                "m_size" => cfg.m_size = parse_usize(key, value)?,
                "omega" => {
                    cfg.omega = if value == "auto" { None } else { Some(parse_complex(key, value)?) };
                }
                "beta_lo" => cfg.beta_lo = parse_f64(key, value)?,
                "beta_hi" => cfg.beta_hi = parse_f64(key, value)?,
                "omega_start" => cfg.omega_start = parse_complex(key, value)?,
                "omega_end" => cfg.omega_end = parse_complex(key, value)?,
                "omega_points" => cfg.omega_points = parse_usize(key, value)?,
                "state" => {
                    cfg.state = if value == "ground" {
                        StateChoice::Ground
                    } else if let Some(rest) = value.strip_prefix("index:") {
                        StateChoice::Index(parse_usize(key, rest)?)
                    } else if let Some(rest) = value.strip_prefix("energy:") {
                        StateChoice::Energy(parse_complex(key, rest)?)
                    } else {
                        return Err(format!("state: expected ground | index:N | energy:re,im, got '{value}'"));
                    };
                }
                "m_list" => {
                    cfg.m_list = value
                        .split(',')
                        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("m_list: {e}")))
                        .collect::<Result<Vec<_>, _>>()?;
                }
                "grid_x_max" => cfg.grid_x_max = parse_f64(key, value)?,
                "grid_points" => cfg.grid_points = parse_usize(key, value)?,
                "output" => cfg.output = value.clone(),
                "format" => {
                    cfg.format = match value.as_str() {
                        "tsv" => OutputFormat::Tsv,
                        "json" => OutputFormat::Json,
                        "both" => OutputFormat::Both,
                        other => return Err(format!("format: unknown value '{other}'")),
                    };
                }
                other => return Err(format!("unknown configuration key '{other}'")),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        // the library constructors are the source of truth for domains
        ModelParams::new(self.v0, self.beta, self.l_perp[0], self.sector, self.interacting)
            .map_err(|e| e.to_string())?;
        for &l in &self.l_perp {
            if !(l > 0.0) {
                return Err(format!("l_perp must be positive, got {l}"));
            }
        }
        if self.m_size == 0 {
            return Err("m_size must be >= 1".into());
        }
        if self.beta_points < 1 {
            return Err("beta_points must be >= 1".into());
        }
        if !(self.beta_min > 0.0) || !(self.beta_max > self.beta_min) {
            return Err(format!(
                "beta range must satisfy 0 < beta_min < beta_max (got {} .. {})",
                self.beta_min, self.beta_max
            ));
        }
        if let Some(omega) = self.omega {
            if !(omega.re > 0.0) {
                return Err(format!("omega must have a positive real part, got {omega}"));
            }
        }
        if self.omega_points < 2 {
            return Err("omega_points must be >= 2".into());
        }
        if self.m_list.is_empty() {
            return Err("m_list must not be empty".into());
        }
        if self.grid_points < 64 {
            return Err("grid_points must be >= 64".into());
        }
        Ok(())
    }

    pub fn params_at(&self, beta: f64, l_perp: f64) -> Result<ModelParams, String> {
        ModelParams::new(self.v0, beta, l_perp, self.sector, self.interacting)
            .map_err(|e| e.to_string())
    }

    pub fn omega_policy(&self) -> OmegaPolicy {
        match self.omega {
            None => OmegaPolicy::WellScale,
            Some(w) => OmegaPolicy::Fixed(w),
        }
    }

    /// Logarithmically spaced β grid, concentrating points on the resonant side.
    pub fn beta_grid(&self) -> Vec<f64> {
        let n = self.beta_points;
        if n == 1 {
            return vec![self.beta_min];
        }
        (0..n)
            .map(|k| {
                self.beta_min
                    * (self.beta_max / self.beta_min).powf(k as f64 / (n as f64 - 1.0))
            })
            .collect()
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value.parse::<f64>().map_err(|e| format!("{key}: {e}"))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, String> {
    value.parse::<usize>().map_err(|e| format!("{key}: {e}"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("{key}: expected true/false, got '{other}'")),
    }
}

/// Complex numbers are written as `re,im` (or just `re`).
fn parse_complex(key: &str, value: &str) -> Result<Complex64, String> {
    match value.split_once(',') {
        Some((re, im)) => Ok(Complex64::new(
            parse_f64(key, re.trim())?,
            parse_f64(key, im.trim())?,
        )),
        None => Ok(Complex64::new(parse_f64(key, value.trim())?, 0.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::load(None, &[]).unwrap();
        assert_eq!(cfg.m_size, 20);
        assert_eq!(cfg.l_perp, vec![0.2]);
    }

    #[test]
    fn overrides_apply() {
        let overrides = vec![
            ("v0".to_string(), "5.0".to_string()),
            ("l_perp".to_string(), "0.1,0.2".to_string()),
            ("omega".to_string(), "1.2,-0.3".to_string()),
        ];
        let cfg = RunConfig::load(None, &overrides).unwrap();
        assert_eq!(cfg.v0, 5.0);
        assert_eq!(cfg.l_perp.len(), 2);
        assert_eq!(cfg.omega, Some(Complex64::new(1.2, -0.3)));
    }

    #[test]
    fn bad_values_rejected() {
        assert!(RunConfig::load(None, &[("v0".into(), "-1".into())]).is_err());
        assert!(RunConfig::load(None, &[("nonsense".into(), "1".into())]).is_err());
        assert!(RunConfig::load(None, &[("omega".into(), "-1,0".into())]).is_err());
    }
}
