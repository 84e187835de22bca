//! Path-loss and received-power models.
//!
//! Closed-form models (free space, two-ray ground, LOS phasor sum,
//! knife-edge diffraction, troposcatter median loss) live here; the
//! terrain-driven composite model is in [`tirem`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_range, Error, Result};
use crate::terrain::{check_frequency, wavelength_m, Polarization};

mod tirem;

pub use tirem::{tirem_path_loss, ScenarioLosses};

/// Converts a linear power ratio to dB.
pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Electrical properties of the earth surface.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GroundParameters {
    pub relative_permittivity: f64,
    pub conductivity_s_per_m: f64,
}

impl GroundParameters {
    pub const AVERAGE: Self = Self::preset(15.0, 0.005);
    pub const POOR: Self = Self::preset(4.0, 0.001);
    pub const GOOD: Self = Self::preset(25.0, 0.020);
    pub const FRESH_WATER: Self = Self::preset(81.0, 0.010);
    pub const SEA_WATER: Self = Self::preset(81.0, 5.000);

    const fn preset(relative_permittivity: f64, conductivity_s_per_m: f64) -> Self {
        Self {
            relative_permittivity,
            conductivity_s_per_m,
        }
    }

    pub fn new(relative_permittivity: f64, conductivity_s_per_m: f64) -> Result<Self> {
        let g = Self::preset(relative_permittivity, conductivity_s_per_m);
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("PERMIT", self.relative_permittivity, 1.0, 100.0, "[1, 100]")?;
        check_range(
            "CONDUC",
            self.conductivity_s_per_m,
            1e-5,
            100.0,
            "[0.00001, 100] S/m",
        )
    }

    /// Looks up a named preset: `average`, `poor`, `good`, `fresh_water`, `sea_water`.
    pub fn from_preset(name: &str) -> Option<Self> {
        match name {
            "average" => Some(Self::AVERAGE),
            "poor" => Some(Self::POOR),
            "good" => Some(Self::GOOD),
            "fresh_water" => Some(Self::FRESH_WATER),
            "sea_water" => Some(Self::SEA_WATER),
            _ => None,
        }
    }

    pub const PRESET_NAMES: [&'static str; 5] =
        ["average", "poor", "good", "fresh_water", "sea_water"];
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtmosphereParameters {
    pub surface_refractivity_n: f64,
    pub humidity_g_per_m3: f64,
    /// Troposcatter climate constant `M`.
    pub climate_m_db: f64,
}

impl Default for AtmosphereParameters {
    fn default() -> Self {
        Self {
            surface_refractivity_n: 301.0,
            humidity_g_per_m3: 10.0,
            climate_m_db: 30.0,
        }
    }
}

impl AtmosphereParameters {
    pub fn new(
        surface_refractivity_n: f64,
        humidity_g_per_m3: f64,
        climate_m_db: f64,
    ) -> Result<Self> {
        let a = Self {
            surface_refractivity_n,
            humidity_g_per_m3,
            climate_m_db,
        };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        check_range(
            "REFRAC",
            self.surface_refractivity_n,
            200.0,
            450.0,
            "[200, 450] N-units",
        )?;
        check_range("HUMID", self.humidity_g_per_m3, 0.0, 50.0, "[0, 50] g/m^3")?;
        check_range("M", self.climate_m_db, 19.0, 40.0, "[19, 40] dB")
    }
}

/// Transmit power, linear antenna gains and system loss.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub gain_tx: f64,
    pub gain_rx: f64,
    pub system_loss: f64,
}

impl LinkBudget {
    pub fn new(tx_power_w: f64, gain_tx: f64, gain_rx: f64, system_loss: f64) -> Result<Self> {
        let b = Self {
            tx_power_w,
            gain_tx,
            gain_rx,
            system_loss,
        };
        b.validate()?;
        Ok(b)
    }

    /// Unit gains, no system loss.
    pub fn isotropic(tx_power_w: f64) -> Result<Self> {
        Self::new(tx_power_w, 1.0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_power_w > 0.0 && self.tx_power_w.is_finite()) {
            return Err(Error::domain(format!(
                "transmit power must be positive, got {} W",
                self.tx_power_w
            )));
        }
        if !(self.gain_tx > 0.0 && self.gain_rx > 0.0) {
            return Err(Error::domain("antenna gains must be positive"));
        }
        if !(self.system_loss >= 1.0) {
            return Err(Error::domain(format!(
                "system loss must be >= 1, got {}",
                self.system_loss
            )));
        }
        Ok(())
    }

    /// Received power after a basic transmission loss of `path_loss_db`.
    pub fn received_power_w(&self, path_loss_db: f64) -> f64 {
        self.tx_power_w * self.gain_tx * self.gain_rx / (self.system_loss * from_db(path_loss_db))
    }
}

fn check_distance(distance_m: f64) -> Result<()> {
    if distance_m > 0.0 && distance_m.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "distance must be positive (singular at {distance_m} m)"
        )))
    }
}

/// Free-space (Friis) received power, `Pt Gt Gr λ² / ((4π)² d² L)`.
pub fn free_space_received_power(
    budget: &LinkBudget,
    wavelength_m: f64,
    distance_m: f64,
) -> Result<f64> {
    check_distance(distance_m)?;
    let spread = 4.0 * PI * distance_m;
    Ok(
        budget.tx_power_w * budget.gain_tx * budget.gain_rx * wavelength_m * wavelength_m
            / (spread * spread * budget.system_loss),
    )
}

/// Basic free-space loss `20 log10(4πd/λ)` in dB.
pub fn free_space_loss_db(wavelength_m: f64, distance_m: f64) -> f64 {
    20.0 * (4.0 * PI * distance_m / wavelength_m).log10()
}

/// Height dependence used by [`two_ray_received_power`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoRayForm {
    /// `Pt Gt Gr ht² hr² / (d⁴ L)`.
    #[default]
    Standard,
    /// `Pt Gt Gr ht hr / d⁴`, heights unsquared and no system loss.
    Literal,
}

pub fn two_ray_received_power(
    budget: &LinkBudget,
    tx_height_m: f64,
    rx_height_m: f64,
    distance_m: f64,
    form: TwoRayForm,
) -> Result<f64> {
    check_distance(distance_m)?;
    if !(tx_height_m > 0.0 && rx_height_m > 0.0) {
        return Err(Error::domain("antenna heights must be positive"));
    }
    let d2 = distance_m * distance_m;
    let d4 = d2 * d2;
    let gains = budget.tx_power_w * budget.gain_tx * budget.gain_rx;
    Ok(match form {
        TwoRayForm::Standard => {
            let hh = tx_height_m * rx_height_m;
            gains * hh * hh / (d4 * budget.system_loss)
        }
        TwoRayForm::Literal => gains * tx_height_m * rx_height_m / d4,
    })
}

/// Coherent sum of a direct ray of length `r1` and a reflected ray of
/// length `r2` scaled by `reflection`, returned as `Pr / Pt`.
pub fn los_two_ray_ratio(
    wavelength_m: f64,
    r1_m: f64,
    r2_m: f64,
    reflection: Complex64,
) -> Result<f64> {
    if !(r1_m > 0.0 && r2_m > 0.0) {
        return Err(Error::domain(format!(
            "ray lengths must be positive (r1 = {r1_m}, r2 = {r2_m})"
        )));
    }
    if !(wavelength_m > 0.0) {
        return Err(Error::domain("wavelength must be positive"));
    }
    let k = 2.0 * PI / wavelength_m;
    let direct = Complex64::from_polar(1.0 / r1_m, -k * r1_m);
    let reflected = reflection * Complex64::from_polar(1.0 / r2_m, -k * r2_m);
    let scale = wavelength_m / (4.0 * PI);
    Ok(scale * scale * (direct + reflected).norm_sqr())
}

/// Single knife-edge loss in dB beyond free space.
///
/// Piecewise: 0 below ν = 0, `6 + 9ν + 1.27ν²` on `[0, 2.4]`, and
/// `13 + 20 log10 ν` above. The branches do not meet at 2.4.
pub fn knife_edge_loss(nu: f64) -> f64 {
    if nu < 0.0 {
        0.0
    } else if nu <= 2.4 {
        6.0 + 9.0 * nu + 1.27 * nu * nu
    } else {
        13.0 + 20.0 * nu.log10()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TroposcatterInputs {
    pub m_db: f64,
    pub frequency_mhz: f64,
    pub distance_km: f64,
    pub scatter_angle_mrad: f64,
    /// Common-volume height term, supplied directly in dB.
    pub common_volume_db: f64,
    pub coupling_loss_db: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
}

/// Empirical troposcatter median loss in dB.
pub fn troposcatter_loss(inputs: &TroposcatterInputs) -> Result<f64> {
    let positive = [
        ("frequency", inputs.frequency_mhz),
        ("distance", inputs.distance_km),
        ("scatter angle", inputs.scatter_angle_mrad),
    ];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::domain(format!(
                "troposcatter {name} must be positive, got {v}"
            )));
        }
    }
    Ok(inputs.m_db
        + 30.0 * inputs.frequency_mhz.log10()
        + 10.0 * inputs.distance_km.log10()
        + 30.0 * inputs.scatter_angle_mrad.log10()
        + inputs.common_volume_db
        + inputs.coupling_loss_db
        - inputs.gain_tx_dbi
        - inputs.gain_rx_dbi)
}

/// Dominant propagation mechanism behind a [`PathLossBreakdown`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropagationMode {
    LineOfSight,
    Diffraction,
    Troposcatter,
    Combined,
}

impl PropagationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            PropagationMode::LineOfSight => "LineOfSight",
            PropagationMode::Diffraction => "Diffraction",
            PropagationMode::Troposcatter => "Troposcatter",
            PropagationMode::Combined => "Combined",
        }
    }
}

impl std::fmt::Display for PropagationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Total loss split into free-space, local-screen, multiple-diffraction and
/// reflection components, all in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossBreakdown {
    pub free_space_db: f64,
    pub local_screen_db: f64,
    pub diffraction_db: f64,
    pub reflection_db: f64,
    pub total_db: f64,
    pub mode: PropagationMode,
}

/// Sums the four loss components. The mode is `Diffraction` when the
/// diffraction component is non-zero, `LineOfSight` otherwise; use
/// [`PathLossBreakdown::with_mode`] to override.
pub fn total_path_loss(
    free_space_db: f64,
    local_screen_db: f64,
    diffraction_db: f64,
    reflection_db: f64,
) -> Result<PathLossBreakdown> {
    for (name, v) in [
        ("L_o", free_space_db),
        ("L_l", local_screen_db),
        ("L_md", diffraction_db),
        ("L_r", reflection_db),
    ] {
        if !(v >= 0.0) {
            return Err(Error::domain(format!("{name} must be >= 0 dB, got {v}")));
        }
    }
    let mode = if diffraction_db > 0.0 {
        PropagationMode::Diffraction
    } else {
        PropagationMode::LineOfSight
    };
    Ok(PathLossBreakdown {
        free_space_db,
        local_screen_db,
        diffraction_db,
        reflection_db,
        total_db: free_space_db + local_screen_db + diffraction_db + reflection_db,
        mode,
    })
}

impl PathLossBreakdown {
    pub fn with_mode(self, mode: PropagationMode) -> Self {
        Self { mode, ..self }
    }
}

/// Plane-wave reflection coefficient of a smooth earth with complex
/// permittivity `εr - j60λσ` at the given grazing angle.
pub fn reflection_coefficient(
    ground: &GroundParameters,
    polarization: Polarization,
    grazing_angle_rad: f64,
    frequency_mhz: f64,
) -> Result<Complex64> {
    if !(grazing_angle_rad > 0.0 && grazing_angle_rad <= PI / 2.0) {
        return Err(Error::domain(format!(
            "grazing angle {grazing_angle_rad} rad outside (0, pi/2]"
        )));
    }
    ground.validate()?;
    check_frequency(frequency_mhz)?;
    let lambda = wavelength_m(frequency_mhz);
    let eps = Complex64::new(
        ground.relative_permittivity,
        -60.0 * lambda * ground.conductivity_s_per_m,
    );
    let (sin, cos) = grazing_angle_rad.sin_cos();
    let root = (eps - cos * cos).sqrt();
    Ok(match polarization {
        Polarization::Horizontal => (sin - root) / (sin + root),
        Polarization::Vertical => (eps * sin - root) / (eps * sin + root),
    })
}
