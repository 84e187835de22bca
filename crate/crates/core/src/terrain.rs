//! Elevation profiles, line-of-sight tests and knife-edge obstacle extraction.
//!
//! A profile is a sequence of `(distance, elevation)` samples along the
//! great-circle path, starting at the transmitter (distance 0) and ending at
//! the receiver. Terrain between samples is linearly interpolated, and the
//! earth is treated as flat.

use std::io::{Read, Write};

use crate::error::{check_range, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const MIN_PROFILE_POINTS: usize = 3;
pub const MIN_ELEVATION_M: f64 = -450.0;
pub const MAX_ELEVATION_M: f64 = 9000.0;
pub const MIN_FREQUENCY_MHZ: f64 = 1.0;
pub const MAX_FREQUENCY_MHZ: f64 = 20_000.0;
pub const MAX_ANTENNA_HEIGHT_M: f64 = 30_000.0;

const PROFILE_HEADER: [&str; 2] = ["distance_m", "elevation_m"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub distance_m: f64,
    pub elevation_m: f64,
}

/// Validated terrain profile between transmitter and receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainProfile {
    points: Vec<ProfilePoint>,
}

impl TerrainProfile {
    pub fn new(points: Vec<ProfilePoint>) -> Result<Self> {
        if points.len() < MIN_PROFILE_POINTS {
            return Err(Error::Validity {
                variable: "NPRFL",
                message: format!(
                    "profile has {} points, at least {MIN_PROFILE_POINTS} required",
                    points.len()
                ),
            });
        }
        if points[0].distance_m != 0.0 {
            return Err(Error::Validity {
                variable: "XPRFL",
                message: format!(
                    "first profile point must be at distance 0, found {}",
                    points[0].distance_m
                ),
            });
        }
        for (i, p) in points.iter().enumerate() {
            if !p.distance_m.is_finite() {
                return Err(Error::Validity {
                    variable: "XPRFL",
                    message: format!("distance at point {i} is not finite"),
                });
            }
            if i > 0 && p.distance_m <= points[i - 1].distance_m {
                return Err(Error::Validity {
                    variable: "XPRFL",
                    message: format!(
                        "distances must be strictly increasing ({} follows {})",
                        p.distance_m,
                        points[i - 1].distance_m
                    ),
                });
            }
            check_elevation(p.elevation_m)?;
        }
        Ok(Self { points })
    }

    /// Builds a profile from parallel distance/elevation slices.
    pub fn from_samples(distances_m: &[f64], elevations_m: &[f64]) -> Result<Self> {
        if distances_m.len() != elevations_m.len() {
            return Err(Error::Validity {
                variable: "NPRFL",
                message: format!(
                    "{} distances but {} elevations",
                    distances_m.len(),
                    elevations_m.len()
                ),
            });
        }
        Self::new(
            distances_m
                .iter()
                .zip(elevations_m)
                .map(|(&distance_m, &elevation_m)| ProfilePoint {
                    distance_m,
                    elevation_m,
                })
                .collect(),
        )
    }

    /// Profile of `n` equally spaced samples at a constant elevation.
    pub fn flat(length_m: f64, elevation_m: f64, n: usize) -> Result<Self> {
        let n = n.max(2);
        let step = length_m / (n - 1) as f64;
        Self::new(
            (0..n)
                .map(|i| ProfilePoint {
                    distance_m: if i == n - 1 {
                        length_m
                    } else {
                        i as f64 * step
                    },
                    elevation_m,
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[ProfilePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn length_m(&self) -> f64 {
        self.points[self.points.len() - 1].distance_m
    }

    pub fn start_elevation_m(&self) -> f64 {
        self.points[0].elevation_m
    }

    pub fn end_elevation_m(&self) -> f64 {
        self.points[self.points.len() - 1].elevation_m
    }

    pub fn max_elevation_m(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.elevation_m)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Linearly interpolated elevation at `distance_m`, clamped to the ends.
    pub fn elevation_at(&self, distance_m: f64) -> f64 {
        let pts = &self.points;
        if distance_m <= 0.0 {
            return pts[0].elevation_m;
        }
        if distance_m >= self.length_m() {
            return self.end_elevation_m();
        }
        let i = pts.partition_point(|p| p.distance_m <= distance_m);
        let (a, b) = (pts[i - 1], pts[i]);
        let t = (distance_m - a.distance_m) / (b.distance_m - a.distance_m);
        a.elevation_m + t * (b.elevation_m - a.elevation_m)
    }

    /// The leading part of the profile up to `length_m`, with the receiver
    /// end interpolated. A midpoint is inserted when fewer than three samples
    /// would remain.
    pub fn truncated(&self, length_m: f64) -> Result<Self> {
        if !(length_m > 0.0 && length_m <= self.length_m()) {
            return Err(Error::geometry(format!(
                "cannot truncate a {} m profile to {length_m} m",
                self.length_m()
            )));
        }
        let mut pts: Vec<ProfilePoint> = self
            .points
            .iter()
            .copied()
            .take_while(|p| p.distance_m < length_m)
            .collect();
        pts.push(ProfilePoint {
            distance_m: length_m,
            elevation_m: self.elevation_at(length_m),
        });
        if pts.len() < MIN_PROFILE_POINTS {
            let mid = 0.5 * length_m;
            pts.insert(
                1,
                ProfilePoint {
                    distance_m: mid,
                    elevation_m: self.elevation_at(mid),
                },
            );
        }
        Self::new(pts)
    }
}

fn check_elevation(elevation_m: f64) -> Result<()> {
    check_range(
        "HPRFL",
        elevation_m,
        MIN_ELEVATION_M,
        MAX_ELEVATION_M,
        "[-450, 9000] m",
    )
}

/// Reads a profile from CSV with the header `distance_m,elevation_m`.
pub fn load_profile<R: Read>(source: R) -> Result<TerrainProfile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);

    let header = reader.headers().map_err(|e| csv_error(e, 1))?;
    if header.iter().ne(PROFILE_HEADER) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                PROFILE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let field = |i: usize, name: &str| -> Result<f64> {
            record[i].parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid {name} `{}`", &record[i]),
            })
        };
        let point = ProfilePoint {
            distance_m: field(0, "distance_m")?,
            elevation_m: field(1, "elevation_m")?,
        };
        points.push(point);
    }
    TerrainProfile::new(points)
}

/// Writes a profile in the same CSV layout accepted by [`load_profile`].
pub fn write_profile<W: Write>(profile: &TerrainProfile, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(PROFILE_HEADER).map_err(csv_io)?;
    for p in profile.points() {
        writer
            .write_record([p.distance_m.to_string(), p.elevation_m.to_string()])
            .map_err(csv_io)?;
    }
    writer.flush()?;
    Ok(())
}

pub(crate) fn csv_error(err: csv::Error, fallback_line: u64) -> Error {
    let line = err.position().map_or(fallback_line, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::Parse {
            line,
            message: format!("{kind:?}"),
        },
    }
}

pub(crate) fn csv_io(err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::Io(std::io::Error::other(format!("{kind:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Polarization {
    #[serde(alias = "V", alias = "vertical")]
    Vertical,
    #[serde(alias = "H", alias = "horizontal")]
    Horizontal,
}

/// Antenna placement and carrier for one transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Structural height above local terrain at the transmitter.
    pub tx_height_m: f64,
    /// Structural height above local terrain at the receiver.
    pub rx_height_m: f64,
    pub frequency_mhz: f64,
    pub polarization: Polarization,
    pub path_length_m: f64,
}

impl LinkGeometry {
    pub fn new(
        tx_height_m: f64,
        rx_height_m: f64,
        frequency_mhz: f64,
        polarization: Polarization,
        path_length_m: f64,
    ) -> Result<Self> {
        let geom = Self {
            tx_height_m,
            rx_height_m,
            frequency_mhz,
            polarization,
            path_length_m,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        check_antenna_height("TANTHT", self.tx_height_m)?;
        check_antenna_height("RANTHT", self.rx_height_m)?;
        check_frequency(self.frequency_mhz)?;
        if !(self.path_length_m > 0.0 && self.path_length_m.is_finite()) {
            return Err(Error::geometry(format!(
                "path length must be positive, got {}",
                self.path_length_m
            )));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        wavelength_m(self.frequency_mhz)
    }

    /// Same antennas and carrier over a different path length.
    pub fn with_path_length(&self, path_length_m: f64) -> Self {
        Self {
            path_length_m,
            ..*self
        }
    }
}

pub fn wavelength_m(frequency_mhz: f64) -> f64 {
    SPEED_OF_LIGHT / (frequency_mhz * 1e6)
}

pub(crate) fn check_frequency(frequency_mhz: f64) -> Result<()> {
    check_range(
        "PROPFQ",
        frequency_mhz,
        MIN_FREQUENCY_MHZ,
        MAX_FREQUENCY_MHZ,
        "[1, 20000] MHz",
    )
}

fn check_antenna_height(variable: &'static str, height_m: f64) -> Result<()> {
    if height_m > 0.0 && height_m <= MAX_ANTENNA_HEIGHT_M {
        Ok(())
    } else {
        Err(Error::Range {
            variable,
            value: height_m,
            range: "(0, 30000] m",
        })
    }
}

/// A single knife edge relative to the direct transmitter-receiver ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleGeometry {
    /// Height of the edge above the sightline; negative when it lies below.
    pub h_m: f64,
    pub d_t_m: f64,
    pub d_r_m: f64,
}

impl ObstacleGeometry {
    pub fn new(h_m: f64, d_t_m: f64, d_r_m: f64) -> Result<Self> {
        if !(d_t_m > 0.0 && d_r_m > 0.0) {
            return Err(Error::geometry(format!(
                "obstacle distances must be positive (d_T = {d_t_m}, d_R = {d_r_m})"
            )));
        }
        Ok(Self { h_m, d_t_m, d_r_m })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosReport {
    pub has_los: bool,
    /// The interior point closest to (or furthest through) the sightline.
    pub dominant_obstacle: Option<ObstacleGeometry>,
}

/// Tests whether the ray between the two antenna tips clears the terrain and
/// locates the most intrusive interior profile point.
pub fn los_clearance(profile: &TerrainProfile, geom: &LinkGeometry) -> Result<LosReport> {
    let length = profile.length_m();
    if (length - geom.path_length_m).abs() > 1e-6 * length.max(geom.path_length_m) {
        return Err(Error::geometry(format!(
            "profile length {length} m does not match path length {} m",
            geom.path_length_m
        )));
    }
    let tx_tip = profile.start_elevation_m() + geom.tx_height_m;
    let rx_tip = profile.end_elevation_m() + geom.rx_height_m;
    let sightline = |x: f64| tx_tip + (rx_tip - tx_tip) * (x / length);

    let has_los = profile
        .points()
        .iter()
        .all(|p| p.elevation_m < sightline(p.distance_m));

    let pts = profile.points();
    let mut best: Option<(f64, f64)> = None;
    for p in &pts[1..pts.len() - 1] {
        let h = p.elevation_m - sightline(p.distance_m);
        if best.is_none_or(|(bh, _)| h > bh) {
            best = Some((h, p.distance_m));
        }
    }
    let dominant_obstacle = best
        .map(|(h, x)| ObstacleGeometry::new(h, x, length - x))
        .transpose()?;

    Ok(LosReport {
        has_los,
        dominant_obstacle,
    })
}

/// Dimensionless knife-edge diffraction parameter
/// `nu = h * sqrt((2 / lambda) * (1/d_T + 1/d_R))`, signed like `h`.
pub fn diffraction_parameter(obstacle: &ObstacleGeometry, wavelength_m: f64) -> Result<f64> {
    if !(obstacle.d_t_m > 0.0 && obstacle.d_r_m > 0.0) {
        return Err(Error::geometry(format!(
            "obstacle distances must be positive (d_T = {}, d_R = {})",
            obstacle.d_t_m, obstacle.d_r_m
        )));
    }
    if !(wavelength_m > 0.0) {
        return Err(Error::geometry(format!(
            "wavelength must be positive, got {wavelength_m}"
        )));
    }
    let inv = 1.0 / obstacle.d_t_m + 1.0 / obstacle.d_r_m;
    Ok(obstacle.h_m * (2.0 / wavelength_m * inv).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(length: f64) -> LinkGeometry {
        LinkGeometry::new(25.0, 25.0, 905.0, Polarization::Vertical, length).unwrap()
    }

    #[test]
    fn loads_minimal_flat_profile() {
        let p =
            load_profile("distance_m,elevation_m\n0,100\n500,100\n1000,100\n".as_bytes()).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.length_m(), 1000.0);
    }

    #[test]
    fn rejects_two_point_profile() {
        let err = load_profile("distance_m,elevation_m\n0,100\n500,95\n".as_bytes()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Validity {
                    variable: "NPRFL",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn rejects_elevation_above_range() {
        let err = load_profile("distance_m,elevation_m\n0,100\n500,9500\n1000,100\n".as_bytes())
            .unwrap_err();
        match err {
            Error::Range {
                variable, value, ..
            } => {
                assert_eq!(variable, "HPRFL");
                assert_eq!(value, 9500.0);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = load_profile("distance_m,elevation_m\n0,100\n500,abc\n1000,100\n".as_bytes())
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejects_wrong_header_and_unsorted_distances() {
        assert!(matches!(
            load_profile("x,y\n0,1\n1,1\n2,1\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(TerrainProfile::from_samples(&[0.0, 2.0, 1.0], &[0.0; 3]).is_err());
        assert!(TerrainProfile::from_samples(&[1.0, 2.0, 3.0], &[0.0; 3]).is_err());
    }

    #[test]
    fn flat_profile_has_los() {
        let p = TerrainProfile::flat(1000.0, 100.0, 3).unwrap();
        let r = los_clearance(&p, &geom(1000.0)).unwrap();
        assert!(r.has_los);
        assert_eq!(r.dominant_obstacle.unwrap().h_m, -25.0);
    }

    #[test]
    fn single_hill_blocks_los() {
        let p =
            TerrainProfile::from_samples(&[0.0, 500.0, 1000.0], &[100.0, 200.0, 100.0]).unwrap();
        let r = los_clearance(&p, &geom(1000.0)).unwrap();
        assert!(!r.has_los);
        let o = r.dominant_obstacle.unwrap();
        assert_eq!(o.d_t_m, 500.0);
        assert_eq!(o.d_r_m, 500.0);
        assert_eq!(o.h_m, 75.0);
    }

    #[test]
    fn equal_intrusion_prefers_nearer_point() {
        let p = TerrainProfile::from_samples(
            &[0.0, 400.0, 600.0, 1000.0],
            &[100.0, 180.0, 180.0, 100.0],
        )
        .unwrap();
        let o = los_clearance(&p, &geom(1000.0))
            .unwrap()
            .dominant_obstacle
            .unwrap();
        assert_eq!(o.d_t_m, 400.0);
    }

    #[test]
    fn path_length_mismatch_is_geometry_error() {
        let p = TerrainProfile::flat(1000.0, 0.0, 3).unwrap();
        assert!(matches!(
            los_clearance(&p, &geom(1200.0)),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn diffraction_parameter_values() {
        let zero = ObstacleGeometry::new(0.0, 1000.0, 1000.0).unwrap();
        assert_eq!(diffraction_parameter(&zero, 0.333).unwrap(), 0.0);

        // sqrt((2 / 0.333) * 0.002) * 10
        let above = ObstacleGeometry::new(10.0, 1000.0, 1000.0).unwrap();
        let nu = diffraction_parameter(&above, 0.333).unwrap();
        assert!((nu - 1.095_993_248_702_382).abs() < 1e-12, "{nu}");

        let below = ObstacleGeometry::new(-5.0, 1000.0, 1000.0).unwrap();
        let nu = diffraction_parameter(&below, 0.333).unwrap();
        assert!((nu + 0.547_996_624_351_191).abs() < 1e-12, "{nu}");
    }

    #[test]
    fn diffraction_parameter_rejects_bad_geometry() {
        let o = ObstacleGeometry {
            h_m: 1.0,
            d_t_m: 0.0,
            d_r_m: 10.0,
        };
        assert!(diffraction_parameter(&o, 0.3).is_err());
        assert!(ObstacleGeometry::new(1.0, 10.0, -1.0).is_err());
        let ok = ObstacleGeometry::new(1.0, 10.0, 10.0).unwrap();
        assert!(diffraction_parameter(&ok, 0.0).is_err());
    }

    #[test]
    fn truncation_keeps_three_points() {
        let p = TerrainProfile::from_samples(&[0.0, 500.0, 1000.0], &[0.0, 50.0, 0.0]).unwrap();
        let t = p.truncated(250.0).unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.length_m(), 250.0);
        assert_eq!(t.end_elevation_m(), 25.0);
        let t = p.truncated(750.0).unwrap();
        assert_eq!(t.points()[1].distance_m, 500.0);
        assert_eq!(t.end_elevation_m(), 25.0);
        assert!(p.truncated(1001.0).is_err());
    }

    #[test]
    fn geometry_validation_names_variables() {
        let e = LinkGeometry::new(0.0, 10.0, 905.0, Polarization::Vertical, 1.0).unwrap_err();
        assert!(matches!(
            e,
            Error::Range {
                variable: "TANTHT",
                ..
            }
        ));
        let e = LinkGeometry::new(10.0, 30_001.0, 905.0, Polarization::Vertical, 1.0).unwrap_err();
        assert!(matches!(
            e,
            Error::Range {
                variable: "RANTHT",
                ..
            }
        ));
        let e = LinkGeometry::new(10.0, 10.0, 25_000.0, Polarization::Vertical, 1.0).unwrap_err();
        assert!(matches!(
            e,
            Error::Range {
                variable: "PROPFQ",
                ..
            }
        ));
    }
}
