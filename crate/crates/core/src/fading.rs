//! Rician / Rayleigh fading.
//!
//! Instantaneous amplitudes and power envelopes are computed from pairs of
//! quadrature draws. Time-correlated envelopes come from [`FadingProcess`], a
//! sum-of-sinusoids generator: each quadrature is a sum of cosines whose
//! Doppler shifts follow from uniformly spaced arrival angles, and a constant
//! dominant term is added to the in-phase branch.

use std::f64::consts::{FRAC_PI_4, PI};
use std::io::{Read, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::terrain::{csv_error, csv_io};

pub const DEFAULT_OSCILLATORS: usize = 16;

const ENVELOPE_HEADER: [&str; 2] = ["t_s", "power_norm"];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct RicianParameters {
    /// Dominant-to-scattered power ratio `K`.
    pub k_factor: f64,
    /// Standard deviation of each scattered quadrature.
    pub sigma: f64,
    pub max_velocity_m_per_s: f64,
    /// Index rotation applied to generated envelope sequences.
    pub table_offset: usize,
}

impl Default for RicianParameters {
    fn default() -> Self {
        Self {
            k_factor: 0.5,
            sigma: 1.0,
            max_velocity_m_per_s: 1.0,
            table_offset: 0,
        }
    }
}

impl RicianParameters {
    pub fn new(
        k_factor: f64,
        sigma: f64,
        max_velocity_m_per_s: f64,
        table_offset: usize,
    ) -> Result<Self> {
        let p = Self {
            k_factor,
            sigma,
            max_velocity_m_per_s,
            table_offset,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k_factor >= 0.0 && self.k_factor.is_finite()) {
            return Err(Error::domain(format!(
                "K factor must be >= 0, got {}",
                self.k_factor
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::domain(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        if !(self.max_velocity_m_per_s >= 0.0 && self.max_velocity_m_per_s.is_finite()) {
            return Err(Error::domain(format!(
                "max velocity must be >= 0, got {}",
                self.max_velocity_m_per_s
            )));
        }
        Ok(())
    }

    /// Dominant amplitude `A = sigma * sqrt(2K)`.
    pub fn dominant_amplitude(&self) -> f64 {
        self.sigma * (2.0 * self.k_factor).sqrt()
    }

    /// Mean-square amplitude `A² + 2σ²`.
    pub fn mean_square(&self) -> f64 {
        let a = self.dominant_amplitude();
        a * a + 2.0 * self.sigma * self.sigma
    }
}

/// Envelope amplitude `sqrt((σx1 + A)² + (σx2)²)` for standard-normal draws.
pub fn rician_amplitude(x1: f64, x2: f64, params: &RicianParameters) -> f64 {
    let i = params.sigma * x1 + params.dominant_amplitude();
    let q = params.sigma * x2;
    i.hypot(q)
}

/// What the large-scale power `P` is taken to represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerNormalization {
    /// `P` is the total (dominant plus scattered) mean power.
    TotalPower,
    /// `P` is the power of the dominant path only.
    DominantPathPower,
}

/// Normalized power envelope `r² / P`.
pub fn normalized_power_envelope(
    x1: f64,
    x2: f64,
    k_factor: f64,
    mode: PowerNormalization,
) -> Result<f64> {
    if !(k_factor >= 0.0 && k_factor.is_finite()) {
        return Err(Error::domain(format!(
            "K factor must be >= 0, got {k_factor}"
        )));
    }
    let i = x1 + (2.0 * k_factor).sqrt();
    let numerator = i * i + x2 * x2;
    match mode {
        PowerNormalization::TotalPower => Ok(numerator / (2.0 * (k_factor + 1.0))),
        PowerNormalization::DominantPathPower => {
            if k_factor == 0.0 {
                Err(Error::domain(
                    "dominant-path normalization is undefined for K = 0",
                ))
            } else {
                Ok(numerator / (2.0 * k_factor))
            }
        }
    }
}

/// Seeded, time-correlated Rician fading generator.
#[derive(Debug, Clone)]
pub struct FadingProcess {
    k_factor: f64,
    doppler_hz: f64,
    /// Per-oscillator Doppler ratios and phases for the in-phase branch.
    in_phase: Vec<(f64, f64)>,
    quadrature: Vec<(f64, f64)>,
    scale: f64,
}

impl FadingProcess {
    pub fn new(params: &RicianParameters, wavelength_m: f64, seed: u64) -> Result<Self> {
        Self::with_oscillators(params, wavelength_m, seed, DEFAULT_OSCILLATORS)
    }

    pub fn with_oscillators(
        params: &RicianParameters,
        wavelength_m: f64,
        seed: u64,
        oscillators: usize,
    ) -> Result<Self> {
        params.validate()?;
        if !(wavelength_m > 0.0 && wavelength_m.is_finite()) {
            return Err(Error::domain(format!(
                "wavelength must be positive, got {wavelength_m}"
            )));
        }
        if oscillators == 0 {
            return Err(Error::domain("at least one oscillator is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = oscillators as f64;
        let mut in_phase = Vec::with_capacity(oscillators);
        let mut quadrature = Vec::with_capacity(oscillators);
        for n in 1..=oscillators {
            // Arrival angles spread over one quadrant with a fixed quarter
            // offset, so no two Doppler ratios in a branch coincide.
            let alpha = (2.0 * PI * n as f64 - PI + FRAC_PI_4) / (4.0 * m);
            in_phase.push((alpha.cos(), rng.random::<f64>() * 2.0 * PI));
            quadrature.push((alpha.sin(), rng.random::<f64>() * 2.0 * PI));
        }
        Ok(Self {
            k_factor: params.k_factor,
            doppler_hz: params.max_velocity_m_per_s / wavelength_m,
            in_phase,
            quadrature,
            scale: (2.0 / m).sqrt(),
        })
    }

    pub fn max_doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    /// Unit-variance scattered quadratures `(x1, x2)` at time `t_s`.
    pub fn quadratures_at(&self, t_s: f64) -> (f64, f64) {
        let w = 2.0 * PI * self.doppler_hz * t_s;
        let branch = |osc: &[(f64, f64)]| -> f64 {
            osc.iter()
                .map(|&(ratio, phase)| (w * ratio + phase).cos())
                .sum::<f64>()
                * self.scale
        };
        (branch(&self.in_phase), branch(&self.quadrature))
    }

    /// Envelope power normalized to the total mean power.
    pub fn power_at(&self, t_s: f64) -> f64 {
        let (x1, x2) = self.quadratures_at(t_s);
        let i = x1 + (2.0 * self.k_factor).sqrt();
        (i * i + x2 * x2) / (2.0 * (self.k_factor + 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub t_s: f64,
    pub power_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvelopeTrace {
    pub samples: Vec<EnvelopeSample>,
}

impl EnvelopeTrace {
    pub fn powers(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.power_norm)
    }

    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.powers().sum::<f64>() / self.samples.len() as f64
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(ENVELOPE_HEADER).map_err(csv_io)?;
        for s in &self.samples {
            w.write_record([s.t_s.to_string(), s.power_norm.to_string()])
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(source);
        let header = r.headers().map_err(|e| csv_error(e, 1))?;
        if header.iter().ne(ENVELOPE_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{}`", ENVELOPE_HEADER.join(",")),
            });
        }
        let mut samples = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| csv_error(e, 0))?;
            let line = rec.position().map_or(0, |p| p.line());
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("invalid field {}", i + 1),
                    })
            };
            samples.push(EnvelopeSample {
                t_s: parse(0)?,
                power_norm: parse(1)?,
            });
        }
        Ok(Self { samples })
    }
}

/// Samples a seeded [`FadingProcess`] on `t = i·dt`, rotated by the
/// parameters' table offset.
pub fn envelope_process(
    params: &RicianParameters,
    wavelength_m: f64,
    dt_s: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EnvelopeTrace> {
    if !(dt_s > 0.0 && dt_s.is_finite()) {
        return Err(Error::domain(format!(
            "time step must be positive, got {dt_s}"
        )));
    }
    if n_samples == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    let process = FadingProcess::new(params, wavelength_m, seed)?;
    let offset = params.table_offset % n_samples;
    let samples = (0..n_samples)
        .map(|i| {
            let src = (i + offset) % n_samples;
            EnvelopeSample {
                t_s: i as f64 * dt_s,
                power_norm: process.power_at(src as f64 * dt_s),
            }
        })
        .collect();
    Ok(EnvelopeTrace { samples })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
}

/// Discrete multipath channel: a list of delayed, phase-shifted impulses.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathProfile {
    taps: Vec<Tap>,
}

impl MultipathProfile {
    pub fn new(taps: Vec<Tap>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::domain("multipath profile needs at least one tap"));
        }
        for (i, t) in taps.iter().enumerate() {
            if !(t.delay_s >= 0.0 && t.delay_s.is_finite()) {
                return Err(Error::domain(format!("tap {i}: delay must be >= 0")));
            }
            if !(t.amplitude >= 0.0 && t.amplitude.is_finite()) {
                return Err(Error::domain(format!("tap {i}: amplitude must be >= 0")));
            }
            if !t.phase_rad.is_finite() {
                return Err(Error::domain(format!("tap {i}: phase must be finite")));
            }
            if i > 0 && t.delay_s < taps[i - 1].delay_s {
                return Err(Error::domain("tap delays must be non-decreasing"));
            }
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    /// Union of two profiles, re-sorted by delay.
    pub fn merged(&self, other: &MultipathProfile) -> MultipathProfile {
        let mut taps: Vec<Tap> = self.taps.iter().chain(&other.taps).copied().collect();
        taps.sort_by(|a, b| a.delay_s.total_cmp(&b.delay_s));
        MultipathProfile { taps }
    }
}

/// Places each tap's complex amplitude on the nearest sample of `t_grid`
/// (ties go to the earlier sample) and sums co-located taps.
pub fn impulse_response(profile: &MultipathProfile, t_grid: &[f64]) -> Result<Vec<Complex64>> {
    if profile.taps.is_empty() {
        return Err(Error::domain("multipath profile needs at least one tap"));
    }
    if t_grid.is_empty() {
        return Err(Error::domain("time grid is empty"));
    }
    if t_grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain("time grid must be sorted"));
    }
    let mut response = vec![Complex64::new(0.0, 0.0); t_grid.len()];
    for tap in &profile.taps {
        let idx = nearest_index(t_grid, tap.delay_s);
        response[idx] += Complex64::from_polar(tap.amplitude, tap.phase_rad);
    }
    Ok(response)
}

fn nearest_index(grid: &[f64], t: f64) -> usize {
    let upper = grid.partition_point(|&g| g < t);
    if upper == 0 {
        return 0;
    }
    if upper == grid.len() {
        return grid.len() - 1;
    }
    if t - grid[upper - 1] <= grid[upper] - t {
        upper - 1
    } else {
        upper
    }
}
