use owc_core::control::{DimensionStudyConfig, PenaltyConfig};
use owc_core::layout::{OptimizerConfig, PILE_RADIUS};
use owc_core::park::DEFAULT_ORDER;
use owc_core::wave::PhysicalConstants;
use owc_core::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub seeds: Option<Vec<u64>>,
    pub constants: ConstantsOverride,
    pub device: DeviceConfig,
    pub device_sim: DeviceSimConfig,
    pub power_matrix: PowerMatrixConfig,
    pub dim_sweep: DimSweepConfig,
    pub park: ParkConfig,
    pub park_opt: ParkOptConfig,
    pub park_verify: ParkVerifyConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantsOverride {
    pub rho: Option<f64>,
    pub g: Option<f64>,
    pub p_atm: Option<f64>,
    pub p_vapor: Option<f64>,
    pub nu: Option<f64>,
}

impl ConstantsOverride {
    pub fn resolve(&self) -> Result<PhysicalConstants> {
        let d = PhysicalConstants::default();
        let c = PhysicalConstants {
            rho: self.rho.unwrap_or(d.rho),
            g: self.g.unwrap_or(d.g),
            p_atm: self.p_atm.unwrap_or(d.p_atm),
            p_vapor: self.p_vapor.unwrap_or(d.p_vapor),
            nu: self.nu.unwrap_or(d.nu),
        };
        c.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Constant,
    Reference,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceConfig {
    pub preset: Preset,
    pub turbine_curves: Option<PathBuf>,
    pub cavitation: Option<PathBuf>,
    pub hydro: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeviceSimConfig {
    pub hs: f64,
    pub te: f64,
    /// Turbine speed; optimized for the sea state when absent.
    pub omega_t: Option<f64>,
    pub periods: f64,
    pub samples_per_period: usize,
    pub rtol: f64,
}

impl Default for DeviceSimConfig {
    fn default() -> Self {
        Self {
            hs: 3.0,
            te: 8.15,
            omega_t: None,
            periods: 20.0,
            samples_per_period: 200,
            rtol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerMatrixConfig {
    pub hs: Vec<f64>,
    pub te: Vec<f64>,
    pub models: Vec<String>,
    pub scatter: Option<PathBuf>,
    pub rel_tol: f64,
}

impl Default for PowerMatrixConfig {
    fn default() -> Self {
        Self {
            hs: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            te: vec![6.0, 7.0, 8.0, 9.0, 10.0],
            models: vec!["linear".into()],
            scatter: None,
            rel_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DimSweepConfig {
    pub radii: Vec<f64>,
    pub drafts: Vec<f64>,
    pub turbine_fraction: f64,
    pub penalty: PenaltyConfig,
    pub scatter: Option<PathBuf>,
}

impl Default for DimSweepConfig {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 0.75, 1.0],
            drafts: vec![1.0, 2.0, 4.0],
            turbine_fraction: 0.6,
            penalty: PenaltyConfig::default(),
            scatter: None,
        }
    }
}

impl DimSweepConfig {
    pub fn study(&self) -> DimensionStudyConfig {
        DimensionStudyConfig {
            radii: self.radii.clone(),
            drafts: self.drafts.clone(),
            turbine_fraction: self.turbine_fraction,
            penalty: self.penalty,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    #[default]
    Triangle,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParkConfig {
    pub hs: f64,
    pub te: f64,
    pub order: usize,
    pub domain: DomainKind,
    pub edge: f64,
    pub d_min: f64,
    pub pile_radius: f64,
}

impl Default for ParkConfig {
    fn default() -> Self {
        Self {
            hs: 3.0,
            te: 8.0,
            order: DEFAULT_ORDER,
            domain: DomainKind::Triangle,
            edge: 50.0,
            d_min: 1.6,
            pile_radius: PILE_RADIUS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParkOptConfig {
    pub devices: usize,
    pub randoms: usize,
    pub optimizer: OptimizerConfig,
    pub histogram_bins: usize,
}

impl Default for ParkOptConfig {
    fn default() -> Self {
        Self {
            devices: 10,
            randoms: 10,
            optimizer: OptimizerConfig::default(),
            histogram_bins: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParkVerifyConfig {
    pub layouts: Vec<PathBuf>,
    /// Layout the gains are measured against.
    pub baseline: Option<PathBuf>,
    pub periods: f64,
    pub rtol: f64,
}

impl Default for ParkVerifyConfig {
    fn default() -> Self {
        Self {
            layouts: Vec::new(),
            baseline: None,
            periods: 8.0,
            rtol: 1e-8,
        }
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    /// Reads a TOML config; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| {
            let line = e.span().map(|s| line_of(&text, s.start)).unwrap_or(1);
            Error::parse(path.display().to_string(), line, e.message())
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.device.turbine_curves,
            &mut self.device.cavitation,
            &mut self.device.hydro,
            &mut self.power_matrix.scatter,
            &mut self.dim_sweep.scatter,
            &mut self.park_verify.baseline,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        self.park_verify.layouts.iter_mut().for_each(fix);
    }
}
