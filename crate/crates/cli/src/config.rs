//! Scenario files.
//!
//! A scenario is a TOML document of dotted keys, one per typed field:
//!
//! ```toml
//! model = "tirem"
//! profile = "hill.csv"
//! seed = 7
//! geometry.tx_height_m = 25.0
//! geometry.distance_m = 10000.0
//! ground.preset = "average"
//! radio.tx_power_w = 1.0
//! fading.enabled = true
//! fading.k_factor = 0.5
//! ```
//!
//! Relative profile paths resolve against the scenario file's directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use radiolink_core::fading::RicianParameters;
use radiolink_core::linksim::{
    AntennaConfig, PropagationModel, RadioConfig, Scenario, TrafficConfig,
};
use radiolink_core::proploss::{
    AtmosphereParameters, GroundParameters, ScenarioLosses, TwoRayForm,
};
use radiolink_core::terrain::{load_profile, LinkGeometry, Polarization, TerrainProfile};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    #[default]
    Freespace,
    Tworay,
    Lostworay,
    Tirem,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub tx_height_m: f64,
    pub rx_height_m: f64,
    /// Carrier; falls back to `radio.min_frequency_mhz` when unset.
    pub frequency_mhz: Option<f64>,
    pub polarization: Polarization,
    /// Link distance; for terrain models defaults to the profile length.
    pub distance_m: Option<f64>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            tx_height_m: 25.0,
            rx_height_m: 25.0,
            frequency_mhz: None,
            polarization: Polarization::Vertical,
            distance_m: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundConfig {
    pub preset: Option<String>,
    pub relative_permittivity: Option<f64>,
    pub conductivity_s_per_m: Option<f64>,
}

impl GroundConfig {
    pub fn resolve(&self) -> Result<GroundParameters, CliError> {
        let base = match &self.preset {
            Some(name) => GroundParameters::from_preset(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown ground preset `{name}` (expected one of {})",
                    GroundParameters::PRESET_NAMES.join(", ")
                ))
            })?,
            None => GroundParameters::AVERAGE,
        };
        let ground = GroundParameters {
            relative_permittivity: self
                .relative_permittivity
                .unwrap_or(base.relative_permittivity),
            conductivity_s_per_m: self
                .conductivity_s_per_m
                .unwrap_or(base.conductivity_s_per_m),
        };
        ground.validate()?;
        Ok(ground)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingConfig {
    pub enabled: bool,
    pub k_factor: f64,
    pub sigma: f64,
    pub max_velocity_m_per_s: f64,
    pub table_offset: usize,
}

impl Default for FadingConfig {
    fn default() -> Self {
        let p = RicianParameters::default();
        Self {
            enabled: false,
            k_factor: p.k_factor,
            sigma: p.sigma,
            max_velocity_m_per_s: p.max_velocity_m_per_s,
            table_offset: p.table_offset,
        }
    }
}

impl FadingConfig {
    pub fn params(&self) -> RicianParameters {
        RicianParameters {
            k_factor: self.k_factor,
            sigma: self.sigma,
            max_velocity_m_per_s: self.max_velocity_m_per_s,
            table_offset: self.table_offset,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelName,
    pub two_ray_form: TwoRayForm,
    pub profile: Option<PathBuf>,
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub ground: GroundConfig,
    pub atmosphere: AtmosphereParameters,
    pub losses: ScenarioLosses,
    pub traffic: TrafficConfig,
    pub radio: RadioConfig,
    pub antennas: AntennaConfig,
    pub fading: FadingConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: ModelName::Freespace,
            two_ray_form: TwoRayForm::Standard,
            profile: None,
            seed: 0,
            geometry: GeometryConfig::default(),
            ground: GroundConfig::default(),
            atmosphere: AtmosphereParameters::default(),
            losses: ScenarioLosses::default(),
            traffic: TrafficConfig::default(),
            radio: RadioConfig::default(),
            antennas: AntennaConfig::default(),
            fading: FadingConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let (Some(profile), Some(dir)) = (&cfg.profile, path.parent()) {
            if profile.is_relative() {
                cfg.profile = Some(dir.join(profile));
            }
        }
        Ok(cfg)
    }

    pub fn frequency_mhz(&self) -> f64 {
        self.geometry
            .frequency_mhz
            .unwrap_or(self.radio.min_frequency_mhz)
    }

    pub fn load_profile(&self) -> Result<Option<TerrainProfile>, CliError> {
        let Some(path) = &self.profile else {
            return Ok(None);
        };
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        let profile = load_profile(std::io::BufReader::new(file))
            .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
        Ok(Some(profile))
    }

    /// Geometry for a link of `distance_m`.
    pub fn geometry_at(&self, distance_m: f64) -> Result<LinkGeometry, CliError> {
        Ok(LinkGeometry::new(
            self.geometry.tx_height_m,
            self.geometry.rx_height_m,
            self.frequency_mhz(),
            self.geometry.polarization,
            distance_m,
        )?)
    }

    /// Propagation model for a link of `distance_m`. Terrain models use the
    /// leading `distance_m` of the profile.
    pub fn model_at(
        &self,
        profile: Option<&TerrainProfile>,
        distance_m: f64,
    ) -> Result<PropagationModel, CliError> {
        Ok(match self.model {
            ModelName::Freespace => PropagationModel::FreeSpace,
            ModelName::Tworay => PropagationModel::TwoRay(self.two_ray_form),
            ModelName::Lostworay => PropagationModel::LosTwoRay {
                ground: self.ground.resolve()?,
            },
            ModelName::Tirem => {
                let profile = profile.ok_or_else(|| {
                    CliError::Usage("model `tirem` requires a terrain profile".into())
                })?;
                let within = distance_m <= profile.length_m() * (1.0 + 1e-9);
                if !within {
                    return Err(CliError::Usage(format!(
                        "distance {distance_m} m exceeds the {} m terrain profile",
                        profile.length_m()
                    )));
                }
                let profile = if (distance_m - profile.length_m()).abs() <= 1e-9 * distance_m {
                    profile.clone()
                } else {
                    profile.truncated(distance_m)?
                };
                PropagationModel::Tirem {
                    profile: Arc::new(profile),
                    ground: self.ground.resolve()?,
                    atmosphere: self.atmosphere,
                    extra: self.losses,
                }
            }
        })
    }

    /// Link distance for `run`: explicit, or the whole profile.
    pub fn link_distance(&self, profile: Option<&TerrainProfile>) -> Result<f64, CliError> {
        match (self.geometry.distance_m, profile) {
            (Some(d), _) => Ok(d),
            (None, Some(p)) => Ok(p.length_m()),
            (None, None) => Err(CliError::Usage(
                "geometry.distance_m is required without a terrain profile".into(),
            )),
        }
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let profile = self.load_profile()?;
        let distance = self.link_distance(profile.as_ref())?;
        let scenario = Scenario {
            traffic: self.traffic,
            radio: self.radio,
            antennas: self.antennas,
            geometry: self.geometry_at(distance)?,
            model: self.model_at(profile.as_ref(), distance)?,
            fading: self.fading.enabled.then(|| self.fading.params()),
        };
        Ok(scenario)
    }
}
