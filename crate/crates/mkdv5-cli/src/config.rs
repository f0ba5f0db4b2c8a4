//! Run configuration files and the named presets.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use mkdv5::solver::SolverConfig;
use mkdv5::{EquationCoefficients, SpectralField};
use serde::{Deserialize, Serialize};

/// One cosine mode `amplitude * cos(k x + phase)`.
pub type Mode = (i64, f64, f64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `(0, 0, 5, 1)` with `u0 = 0.2 (2 cos x + cos 2x)`.
    Integrable,
    /// `alpha = beta`, where `E1` is conserved.
    AlphaBeta,
    SmallData,
    Linear,
    Zero,
}

impl Preset {
    pub fn coefficients(self) -> EquationCoefficients {
        match self {
            Preset::Integrable | Preset::Zero => EquationCoefficients::integrable(),
            Preset::AlphaBeta | Preset::SmallData => EquationCoefficients::new(1.0, 1.0, 2.0, 1.0),
            Preset::Linear => EquationCoefficients::new(0.0, 0.0, 0.0, 0.0),
        }
    }

    pub fn modes(self) -> Vec<Mode> {
        match self {
            Preset::Integrable | Preset::Linear => vec![(1, 0.4, 0.0), (2, 0.2, 0.0)],
            Preset::AlphaBeta => vec![(1, 0.4, 0.0), (2, 0.2, 0.3)],
            Preset::SmallData => vec![(1, 0.05, 0.0), (2, 0.025, 0.3)],
            Preset::Zero => vec![],
        }
    }
}

/// A configuration file. A preset supplies coefficients and data; explicit fields override it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<EquationCoefficients>,
    /// Initial data as `[k, amplitude, phase]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<Mode>>,
    /// Trajectory CSV; the metadata goes next to it with extension `meta.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fills coefficients and data from the preset and validates everything.
    pub fn resolve(mut self) -> anyhow::Result<Self> {
        if let Some(p) = self.preset {
            self.coefficients.get_or_insert_with(|| p.coefficients());
            self.initial.get_or_insert_with(|| p.modes());
        }
        let Some(c) = self.coefficients else { bail!("no coefficients: give `coefficients` or a `preset`") };
        if !c.is_finite() {
            bail!("coefficients must be finite");
        }
        let Some(modes) = &self.initial else { bail!("no initial data: give `initial` or a `preset`") };
        for &(k, a, p) in modes {
            if k.unsigned_abs() as usize > self.solver.k {
                bail!("initial mode {k} lies outside the truncation radius {}", self.solver.k);
            }
            if !(a.is_finite() && p.is_finite()) {
                bail!("initial mode {k} has a non-finite amplitude or phase");
            }
        }
        self.solver.validate()?;
        Ok(self)
    }

    pub fn coefficients(&self) -> EquationCoefficients {
        self.coefficients.unwrap_or_else(EquationCoefficients::integrable)
    }

    pub fn initial_field(&self) -> SpectralField {
        let modes = self.initial.as_deref().unwrap_or(&[]);
        SpectralField::from_cosines(self.solver.k, modes)
    }
}

/// `dir/name.csv` -> `dir/name.meta.json`.
pub fn sidecar(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_fills_and_explicit_fields_win() {
        let cfg: RunConfig = serde_json::from_str(r#"{"preset": "small-data", "initial": [[3, 0.1, 0.0]]}"#).unwrap();
        let cfg = cfg.resolve().unwrap();
        assert_eq!(cfg.coefficients(), EquationCoefficients::new(1.0, 1.0, 2.0, 1.0));
        assert_eq!(cfg.initial.as_deref(), Some(&[(3, 0.1, 0.0)][..]));
    }

    #[test]
    fn missing_data_and_bad_modes_are_rejected() {
        let bare: RunConfig = serde_json::from_str("{}").unwrap();
        assert!(bare.resolve().is_err());
        let far: RunConfig = serde_json::from_str(r#"{"preset": "zero", "initial": [[40, 1.0, 0.0]]}"#).unwrap();
        assert!(far.resolve().is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"presett": "zero"}"#).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar(Path::new("out/run.csv")), PathBuf::from("out/run.meta.json"));
    }
}
