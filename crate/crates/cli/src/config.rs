//! Run configuration, read from JSON and validated before any computation.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pinlab::pinning::DisorderLaw;
use pinlab::renewal::{Family, LawSpec, RenewalLaw};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Renewal,
    Pinning,
    Bessel,
    Decompose,
    Couple,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Renewal => "renewal",
            Command::Pinning => "pinning",
            Command::Bessel => "bessel",
            Command::Decompose => "decompose",
            Command::Couple => "couple",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,

    pub law: LawSpec,
    /// Terms of the renewal mass table and the decay-fit window.
    pub renewal_terms: usize,
    pub decay_window: Option<(usize, usize)>,

    pub beta: f64,
    pub h: f64,
    pub disorder: DisorderLaw,
    #[serde(rename = "N")]
    pub n: usize,
    pub replicas: usize,
    /// Lags of the two-point function; the window is `[−2·max, 2·max]`.
    pub lags: Vec<usize>,

    pub epsilon: f64,
    pub density_times: Vec<f64>,
    pub c0_grid: Vec<(f64, f64)>,
    pub c0_trials: u64,
    pub c0_mesh: usize,

    pub ks: Vec<i64>,
    pub pairs: usize,
    pub margin: i64,
    pub cap: usize,
    pub mesh: usize,
    pub steps_per_unit: usize,
    pub block_c: f64,
    pub max_block: i64,
    pub eta: f64,
    pub omega_ensemble: usize,

    pub h_grid: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 1,
            out: None,
            threads: None,
            law: LawSpec { family: Family::PowerLawConstL, alpha: Some(1.5), c: None, n_max: 1024, mass: None, tilt: None },
            renewal_terms: 200,
            decay_window: None,
            beta: 0.0,
            h: -0.2,
            disorder: DisorderLaw::Rademacher,
            n: 2048,
            replicas: 32,
            lags: Vec::new(),
            epsilon: 0.25,
            density_times: vec![0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0],
            c0_grid: Vec::new(),
            c0_trials: 4000,
            c0_mesh: 8,
            ks: vec![8, 16, 32, 64],
            pairs: 2000,
            margin: 256,
            cap: 16,
            mesh: 8,
            steps_per_unit: 64,
            block_c: 4.0,
            max_block: 8,
            eta: 0.1,
            omega_ensemble: 1,
            h_grid: vec![-0.4, -0.2, -0.1, -0.05],
        }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    /// Reads a config file; a run manifest (with a `config` member) is accepted too.
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))?;
        let value = match value.get("config") {
            Some(inner) => inner.clone(),
            None => value,
        };
        serde_json::from_value(value).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }

    pub fn command(&self) -> CliResult<Command> {
        self.command.ok_or_else(|| invalid("no command given"))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("pinlab-out"))
    }

    pub fn renewal_law(&self) -> CliResult<RenewalLaw> {
        RenewalLaw::from_spec(&self.law).map_err(|e| invalid(format!("law: {e}")))
    }

    fn alpha(&self) -> CliResult<f64> {
        match self.law.family {
            Family::PowerLawConstL | Family::PowerLawLogL => {
                self.law.alpha.ok_or_else(|| invalid("power-law family needs alpha"))
            }
            f => Err(invalid(format!("command needs a power-law family, got {f:?}"))),
        }
    }

    /// Checks every field the command will use against the owning module's preconditions.
    pub fn validate(&self) -> CliResult<Command> {
        let cmd = self.command()?;
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        self.renewal_law()?;
        let finite = |name: &str, x: f64| if x.is_finite() { Ok(()) } else { Err(invalid(format!("{name} must be finite"))) };
        finite("h", self.h)?;
        finite("beta", self.beta)?;
        if self.beta < 0.0 {
            return Err(invalid("beta must be non-negative"));
        }
        match cmd {
            Command::Renewal => {
                if self.renewal_terms < 2 {
                    return Err(invalid("renewal_terms must be at least 2"));
                }
                if let Some((a, b)) = self.decay_window {
                    if a > b || b > self.renewal_terms {
                        return Err(invalid("decay_window must satisfy lo ≤ hi ≤ renewal_terms"));
                    }
                }
            }
            Command::Pinning => {
                if self.n < 2 || self.replicas == 0 {
                    return Err(invalid("need N ≥ 2 and replicas ≥ 1"));
                }
                if self.lags.iter().any(|&l| l == 0) {
                    return Err(invalid("lags must be positive"));
                }
            }
            Command::Bessel | Command::Decompose => {
                self.alpha()?;
                if !(self.epsilon >= 0.0) {
                    return Err(invalid("epsilon must be ≥ 0"));
                }
                if self.law.n_max < 2 {
                    return Err(invalid("N_max must be at least 2"));
                }
                if self.density_times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
                    return Err(invalid("density_times must be positive"));
                }
                if !self.c0_grid.is_empty() {
                    if self.c0_trials < 1000 {
                        return Err(invalid("c0_trials must be at least 1000"));
                    }
                    if self.c0_mesh < 2 || self.c0_mesh % 2 != 0 {
                        return Err(invalid("c0_mesh must be even and ≥ 2"));
                    }
                    if self.c0_grid.iter().any(|&(u, v)| !(u > 0.0 && v > 0.0)) {
                        return Err(invalid("c0_grid points must be positive"));
                    }
                }
            }
            Command::Couple => {
                self.alpha()?;
                if self.ks.is_empty() || self.ks.iter().any(|&k| k <= 0) {
                    return Err(invalid("ks must be non-empty and positive"));
                }
                if self.pairs == 0 || self.omega_ensemble == 0 || self.replicas == 0 {
                    return Err(invalid("pairs, omega_ensemble and replicas must be positive"));
                }
                if self.mesh == 0 || self.steps_per_unit % self.mesh != 0 {
                    return Err(invalid("mesh must divide steps_per_unit"));
                }
                if self.margin <= 0 || self.max_block <= 0 || !(self.block_c > 0.0) || !(self.eta > 0.0 && self.eta <= 1.0) {
                    return Err(invalid("margin, max_block, block_c must be positive and 0 < eta ≤ 1"));
                }
            }
            Command::Sweep => {
                if self.h_grid.is_empty() || self.h_grid.iter().any(|h| !h.is_finite()) {
                    return Err(invalid("h_grid must be a non-empty list of finite values"));
                }
                if self.n < 2 || self.replicas == 0 {
                    return Err(invalid("need N ≥ 2 and replicas ≥ 1"));
                }
            }
        }
        Ok(cmd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig { command: Some(Command::Renewal), ..RunConfig::default() };
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);
        assert_eq!(back.validate().unwrap(), Command::Renewal);
    }

    #[test]
    fn rejects_bad_fields() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        let c = RunConfig { command: Some(Command::Couple), ks: vec![0], ..RunConfig::default() };
        assert!(matches!(c.validate(), Err(CliError::Validation(_))));
        let c = RunConfig { command: Some(Command::Bessel), epsilon: -1.0, ..RunConfig::default() };
        assert!(c.validate().is_err());
        assert!(RunConfig::default().validate().is_err());
    }
}
