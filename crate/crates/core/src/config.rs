//! Run configuration shared by the command-line tool and the canned
//! experiments. A TOML file may supply any field; command-line flags win.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criticality::ModelSpec;
use crate::dicke::{converge_truncation, DickeParams, Parity};
use crate::dynamics::{gaussian_packet, DEFAULT_CUTOFF, DEFAULT_THRESHOLD};
use crate::error::{Error, Result};
use crate::spectrum::EnergySpectrum;
use crate::vibron::{vibron_spectrum, VibronParams};

/// Levels added on top of the packet population when converging the Dicke
/// boson cutoff.
pub const TRUNCATION_MARGIN: usize = 20;

/// Tolerance used when converging the Dicke boson cutoff.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Vibron,
    Dicke,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelKind,

    /// Vibron: total number of bound states.
    pub n: Option<usize>,
    pub chi: Option<f64>,

    /// Dicke: spin length, frequencies, coupling, boson cutoff and sector.
    /// A missing `n_max` is converged automatically.
    pub j: Option<f64>,
    pub w0: f64,
    pub w: f64,
    pub lambda: Option<f64>,
    pub n_max: Option<usize>,
    pub parity: Parity,

    pub k0: usize,
    pub sigma: f64,
    pub cutoff: f64,

    /// Time step and horizon; default to `T_Cl/50` and `2.5·T_R`.
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub threshold: f64,

    /// Scan grid: `steps` evenly spaced points on `[from, to]`.
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,

    /// Bracket for `locate`.
    pub bracket: Option<(f64, f64)>,

    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    /// Execution setting only; never changes results.
    #[serde(skip_serializing)]
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::Vibron,
            n: None,
            chi: None,
            j: None,
            w0: 1.0,
            w: 1.0,
            lambda: None,
            n_max: None,
            parity: Parity::Even,
            k0: 0,
            sigma: 2.0,
            cutoff: DEFAULT_CUTOFF,
            dt: None,
            t_max: None,
            threshold: DEFAULT_THRESHOLD,
            from: None,
            to: None,
            steps: None,
            bracket: None,
            output: None,
            workers: 1,
        }
    }
}

fn cfg(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| cfg(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Compact JSON of every result-affecting field.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(cfg(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(0.0..1.0).contains(&self.cutoff) {
            return Err(cfg(format!(
                "cutoff must lie in [0, 1), got {}",
                self.cutoff
            )));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(cfg(format!(
                "threshold must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(cfg(format!("dt must be positive, got {dt}")));
            }
        }
        if let Some(t) = self.t_max {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(cfg(format!("t_max must be >= 0, got {t}")));
            }
        }
        if let Some((lo, hi)) = self.bracket {
            if !(lo < hi) {
                return Err(cfg(format!("bracket ({lo}, {hi}) is empty")));
            }
        }
        if self.workers == 0 {
            return Err(cfg("workers must be >= 1"));
        }
        match self.model {
            ModelKind::Vibron => {
                let n = self.n.ok_or_else(|| cfg("vibron model needs n"))?;
                if n < 2 {
                    return Err(cfg(format!("vibron n must be >= 2, got {n}")));
                }
                if let Some(chi) = self.chi {
                    VibronParams::new(n, chi).map_err(|e| cfg(e.to_string()))?;
                }
            }
            ModelKind::Dicke => {
                let j = self.j.ok_or_else(|| cfg("dicke model needs j"))?;
                DickeParams::new(
                    j,
                    self.w0,
                    self.w,
                    self.lambda.unwrap_or(0.0),
                    self.n_max.unwrap_or(1),
                    self.parity,
                )
                .map_err(|e| cfg(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Value of the control parameter (`χ` or `λ`).
    pub fn control(&self) -> Result<f64> {
        match self.model {
            ModelKind::Vibron => self.chi.ok_or_else(|| cfg("vibron model needs chi")),
            ModelKind::Dicke => self.lambda.ok_or_else(|| cfg("dicke model needs lambda")),
        }
    }

    /// Scan grid from `from`, `to`, `steps`.
    pub fn grid(&self) -> Result<Vec<f64>> {
        let (from, to, steps) = match (self.from, self.to, self.steps) {
            (Some(a), Some(b), Some(s)) => (a, b, s),
            _ => return Err(cfg("scan needs from, to and steps")),
        };
        if steps < 2 || !(from != to) || !from.is_finite() || !to.is_finite() {
            return Err(cfg("scan grid needs steps >= 2 and from != to"));
        }
        Ok((0..steps)
            .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
            .collect())
    }

    fn dicke_base(&self) -> Result<DickeParams> {
        let j = self.j.ok_or_else(|| cfg("dicke model needs j"))?;
        DickeParams::new(
            j,
            self.w0,
            self.w,
            self.lambda.unwrap_or(0.0),
            self.n_max.unwrap_or(1),
            self.parity,
        )
        .map_err(|e| cfg(e.to_string()))
    }

    /// Number of levels the configured packet populates, for `n_max`
    /// convergence. Uses an unbounded spectrum size.
    fn populated_levels(&self) -> Result<usize> {
        let size = self.k0
            + 1
            + (self.sigma * (1.0 / self.cutoff.max(1e-300)).ln())
                .sqrt()
                .ceil() as usize
            + 1;
        Ok(gaussian_packet(size, self.k0, self.sigma, self.cutoff)?.len())
    }

    /// Dicke cutoff: the configured one, or the converged one at `lambda`.
    pub fn resolve_n_max(&self, lambda: f64) -> Result<usize> {
        if let Some(n) = self.n_max {
            return Ok(n);
        }
        let base = self.dicke_base()?.with_lambda(lambda).with_n_max(1);
        let retained = self.populated_levels()? + TRUNCATION_MARGIN;
        converge_truncation(&base, retained, TRUNCATION_TOL)
    }

    /// Model with the cutoff fixed; `lambda_for_cutoff` selects where the
    /// Dicke truncation is converged.
    pub fn model_spec(&self, lambda_for_cutoff: f64) -> Result<ModelSpec> {
        match self.model {
            ModelKind::Vibron => Ok(ModelSpec::Vibron {
                n: self.n.ok_or_else(|| cfg("vibron model needs n"))?,
            }),
            ModelKind::Dicke => {
                let n_max = self.resolve_n_max(lambda_for_cutoff)?;
                Ok(ModelSpec::dicke(&self.dicke_base()?.with_n_max(n_max)))
            }
        }
    }

    /// Spectrum at the configured control value.
    pub fn spectrum(&self) -> Result<EnergySpectrum> {
        let control = self.control()?;
        match self.model {
            ModelKind::Vibron => {
                let p =
                    VibronParams::new(self.n.ok_or_else(|| cfg("vibron model needs n"))?, control)?;
                Ok(vibron_spectrum(&p)?.spectrum)
            }
            ModelKind::Dicke => {
                use crate::criticality::ControlledSpectrum;
                self.model_spec(control)?.spectrum_at(control)
            }
        }
    }

    /// Applies every `Some` field of `overrides` on top of `self`.
    pub fn merged(mut self, o: &Overrides) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = o.$f.clone() { self.$f = v; } )* };
        }
        macro_rules! take_opt {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f.clone(); } )* };
        }
        take!(model, w0, w, parity, k0, sigma, cutoff, threshold, workers);
        take_opt!(n, chi, j, lambda, n_max, dt, t_max, from, to, steps, bracket, output);
        self
    }
}

/// Command-line overrides; `None` leaves the file (or default) value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub n: Option<usize>,
    pub chi: Option<f64>,
    pub j: Option<f64>,
    pub w0: Option<f64>,
    pub w: Option<f64>,
    pub lambda: Option<f64>,
    pub n_max: Option<usize>,
    pub parity: Option<Parity>,
    pub k0: Option<usize>,
    pub sigma: Option<f64>,
    pub cutoff: Option<f64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub threshold: Option<f64>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub bracket: Option<(f64, f64)>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_toml_str("model = \"vibron\"\nn = 10\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn flags_override_file() {
        let file = RunConfig::from_toml_str("model = \"vibron\"\nn = 10\nchi = 0.3\nsigma = 3.0\n")
            .unwrap();
        let merged = file.merged(&Overrides {
            chi: Some(0.7),
            ..Default::default()
        });
        assert_eq!(merged.chi, Some(0.7));
        assert_eq!(merged.sigma, 3.0);
        assert_eq!(merged.n, Some(10));
    }

    #[test]
    fn validation() {
        let mut c = RunConfig {
            n: Some(10),
            chi: Some(0.5),
            ..Default::default()
        };
        c.validate().unwrap();
        c.chi = Some(2.0);
        assert!(c.validate().is_err());
        c.chi = Some(0.5);
        c.sigma = -1.0;
        assert!(c.validate().is_err());
        let d = RunConfig {
            model: ModelKind::Dicke,
            ..Default::default()
        };
        assert!(d.validate().is_err());
    }

    #[test]
    fn header_json_skips_execution_settings() {
        let c = RunConfig {
            n: Some(10),
            workers: 8,
            output: Some("x.csv".into()),
            ..Default::default()
        };
        let json = c.to_json();
        assert!(!json.contains("workers"));
        assert!(!json.contains("x.csv"));
    }

    #[test]
    fn grid_endpoints() {
        let c = RunConfig {
            from: Some(0.0),
            to: Some(1.0),
            steps: Some(5),
            ..Default::default()
        };
        assert_eq!(c.grid().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
