//! Composite terrain-integrated path loss.
//!
//! The procedure first checks the sightline against the terrain profile. A
//! clear path is scored with the coherent two-ray phasor model over a flat
//! reflecting plane. An obstructed path is scored twice, once as free space
//! plus single knife-edge diffraction and once as troposcatter, and the
//! lower loss wins.

use num_complex::Complex64;

use super::{
    free_space_loss_db, knife_edge_loss, los_two_ray_ratio, reflection_coefficient, to_db,
    total_path_loss, troposcatter_loss, AtmosphereParameters, GroundParameters, PathLossBreakdown,
    PropagationMode, TroposcatterInputs,
};
use crate::error::{Error, Result};
use crate::terrain::{diffraction_parameter, los_clearance, LinkGeometry, TerrainProfile};

/// Two mechanisms closer than this are reported as `Combined`.
const COMBINED_WINDOW_DB: f64 = 3.0;

/// Scenario-level loss terms that have no model of their own.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioLosses {
    /// Local-screen (nearby building) loss, `L_l`.
    pub local_screen_db: f64,
    /// Loss from wall reflection of the diffracted field, `L_r`.
    pub reflection_db: f64,
    /// Troposcatter common-volume term `LN`.
    pub common_volume_db: f64,
    /// Troposcatter aperture-to-medium coupling loss `LC`.
    pub coupling_loss_db: f64,
}

impl ScenarioLosses {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("local_screen_db", self.local_screen_db),
            ("reflection_db", self.reflection_db),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be >= 0 dB, got {v}")));
            }
        }
        for (name, v) in [
            ("common_volume_db", self.common_volume_db),
            ("coupling_loss_db", self.coupling_loss_db),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

/// Basic transmission loss over `profile`, excluding antenna gains and
/// system loss.
pub fn tirem_path_loss(
    profile: &TerrainProfile,
    geom: &LinkGeometry,
    ground: &GroundParameters,
    atmosphere: &AtmosphereParameters,
    extra: &ScenarioLosses,
) -> Result<PathLossBreakdown> {
    geom.validate()?;
    ground.validate()?;
    atmosphere.validate()?;
    extra.validate()?;

    let lambda = geom.wavelength_m();
    let distance = geom.path_length_m;
    let report = los_clearance(profile, geom)?;

    if report.has_los {
        let (ht, hr) = (geom.tx_height_m, geom.rx_height_m);
        let r1 = distance.hypot(ht - hr);
        let r2 = distance.hypot(ht + hr);
        let grazing = ((ht + hr) / distance).atan();
        let reflection: Complex64 =
            reflection_coefficient(ground, geom.polarization, grazing, geom.frequency_mhz)?;
        let ratio = los_two_ray_ratio(lambda, r1, r2, reflection)?;
        let los_db = (-to_db(ratio)).max(0.0);
        return Ok(
            total_path_loss(los_db, extra.local_screen_db, 0.0, extra.reflection_db)?
                .with_mode(PropagationMode::LineOfSight),
        );
    }

    let free_space_db = free_space_loss_db(lambda, distance).max(0.0);

    let obstacle = report
        .dominant_obstacle
        .ok_or_else(|| Error::geometry("obstructed path without an interior obstacle"))?;
    let nu = diffraction_parameter(&obstacle, lambda)?;
    let diffraction_total = free_space_db + knife_edge_loss(nu);

    let tropo = troposcatter_loss(&TroposcatterInputs {
        m_db: atmosphere.climate_m_db,
        frequency_mhz: geom.frequency_mhz,
        distance_km: distance / 1000.0,
        scatter_angle_mrad: scatter_angle_mrad(profile, geom),
        common_volume_db: extra.common_volume_db,
        coupling_loss_db: extra.coupling_loss_db,
        gain_tx_dbi: 0.0,
        gain_rx_dbi: 0.0,
    })?;
    // Scattered power never exceeds what free-space spreading delivers.
    let tropo_total = tropo.max(free_space_db);

    let (chosen, mode) = if (diffraction_total - tropo_total).abs() <= COMBINED_WINDOW_DB {
        (
            diffraction_total.min(tropo_total),
            PropagationMode::Combined,
        )
    } else if diffraction_total < tropo_total {
        (diffraction_total, PropagationMode::Diffraction)
    } else {
        (tropo_total, PropagationMode::Troposcatter)
    };

    Ok(total_path_loss(
        free_space_db,
        extra.local_screen_db,
        chosen - free_space_db,
        extra.reflection_db,
    )?
    .with_mode(mode))
}

/// Angle between the transmitter and receiver horizon rays, flat earth.
fn scatter_angle_mrad(profile: &TerrainProfile, geom: &LinkGeometry) -> f64 {
    let length = profile.length_m();
    let tx_tip = profile.start_elevation_m() + geom.tx_height_m;
    let rx_tip = profile.end_elevation_m() + geom.rx_height_m;
    let pts = profile.points();
    let interior = &pts[1..pts.len() - 1];
    let tx_horizon = interior
        .iter()
        .map(|p| ((p.elevation_m - tx_tip) / p.distance_m).atan())
        .fold(f64::NEG_INFINITY, f64::max);
    let rx_horizon = interior
        .iter()
        .map(|p| ((p.elevation_m - rx_tip) / (length - p.distance_m)).atan())
        .fold(f64::NEG_INFINITY, f64::max);
    (tx_horizon + rx_horizon) * 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::Polarization;

    fn hill(height: f64) -> TerrainProfile {
        TerrainProfile::from_samples(&[0.0, 5000.0, 10_000.0], &[100.0, 100.0 + height, 100.0])
            .unwrap()
    }

    fn geom(h: f64, length: f64) -> LinkGeometry {
        LinkGeometry::new(h, h, 905.0, Polarization::Vertical, length).unwrap()
    }

    fn run(profile: &TerrainProfile, g: &LinkGeometry) -> Result<PathLossBreakdown> {
        tirem_path_loss(
            profile,
            g,
            &GroundParameters::AVERAGE,
            &AtmosphereParameters::default(),
            &ScenarioLosses::default(),
        )
    }

    #[test]
    fn flat_profile_uses_los_two_ray() {
        let p = TerrainProfile::flat(1000.0, 100.0, 3).unwrap();
        let g = geom(25.0, 1000.0);
        let b = run(&p, &g).unwrap();
        assert_eq!(b.mode, PropagationMode::LineOfSight);

        let lambda = g.wavelength_m();
        let r2 = 1000f64.hypot(50.0);
        let refl = reflection_coefficient(
            &GroundParameters::AVERAGE,
            Polarization::Vertical,
            (50.0f64 / 1000.0).atan(),
            905.0,
        )
        .unwrap();
        let expected = -to_db(los_two_ray_ratio(lambda, 1000.0, r2, refl).unwrap());
        assert!((b.total_db - expected).abs() < 1e-12);
    }

    #[test]
    fn obstructed_exceeds_free_space_and_sums() {
        let p = hill(300.0);
        let g = geom(25.0, 10_000.0);
        let b = run(&p, &g).unwrap();
        assert!(matches!(
            b.mode,
            PropagationMode::Diffraction
                | PropagationMode::Combined
                | PropagationMode::Troposcatter
        ));
        let fs = free_space_loss_db(g.wavelength_m(), 10_000.0);
        assert!(b.total_db >= fs);
        let sum = b.free_space_db + b.local_screen_db + b.diffraction_db + b.reflection_db;
        assert!((b.total_db - sum).abs() < 1e-9);

        // Free space plus knife edge, evaluated directly.
        let nu = 275.0 * (2.0 / g.wavelength_m() * (2.0 / 5000.0)).sqrt();
        let knife = fs + 13.0 + 20.0 * nu.log10();
        assert!(b.total_db <= knife + 1e-9);
    }

    #[test]
    fn scenario_terms_add_to_total() {
        let p = hill(300.0);
        let g = geom(25.0, 10_000.0);
        let base = run(&p, &g).unwrap();
        let extra = ScenarioLosses {
            local_screen_db: 4.0,
            reflection_db: 2.5,
            ..Default::default()
        };
        let b = tirem_path_loss(
            &p,
            &g,
            &GroundParameters::AVERAGE,
            &AtmosphereParameters::default(),
            &extra,
        )
        .unwrap();
        assert!((b.total_db - base.total_db - 6.5).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_frequency_names_propfq() {
        let p = TerrainProfile::flat(1000.0, 0.0, 3).unwrap();
        let mut g = geom(25.0, 1000.0);
        g.frequency_mhz = 25_000.0;
        let err = run(&p, &g).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Range {
                    variable: "PROPFQ",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn tall_ridge_is_diffraction_limited() {
        let p =
            TerrainProfile::from_samples(&[0.0, 50_000.0, 100_000.0], &[0.0, 8000.0, 0.0]).unwrap();
        let g = LinkGeometry::new(10.0, 10.0, 100.0, Polarization::Horizontal, 100_000.0).unwrap();
        let atm = AtmosphereParameters::new(301.0, 10.0, 19.0).unwrap();
        let b = tirem_path_loss(
            &p,
            &g,
            &GroundParameters::POOR,
            &atm,
            &ScenarioLosses::default(),
        )
        .unwrap();
        assert_eq!(b.mode, PropagationMode::Diffraction);
        assert!(b.diffraction_db > 40.0);
    }

    #[test]
    fn grazing_obstruction_is_scatter_floored_at_free_space() {
        // The ridge barely cuts the ray, so the scatter angle is tiny and the
        // scatter loss drops under free space; the floor applies.
        let p =
            TerrainProfile::from_samples(&[0.0, 50_000.0, 100_000.0], &[0.0, 26.0, 0.0]).unwrap();
        let g = geom(25.0, 100_000.0);
        let b = run(&p, &g).unwrap();
        let fs = free_space_loss_db(g.wavelength_m(), 100_000.0);
        assert_eq!(b.mode, PropagationMode::Troposcatter);
        assert_eq!(b.total_db, fs);
        assert_eq!(b.diffraction_db, 0.0);
    }
}
