//! Packet-level radio pipeline.
//!
//! Every generated packet passes, in order, through the received-power,
//! SNR, BER and reception-decision stages. Per-packet outcomes are kept as
//! [`ReceptionRecord`]s and aggregated into [`LinkStats`].

use std::io::{Read, Write};
use std::sync::Arc;

use libm::erfc;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fading::{FadingProcess, RicianParameters};
use crate::proploss::{
    free_space_received_power, los_two_ray_ratio, reflection_coefficient, tirem_path_loss, to_db,
    two_ray_received_power, AtmosphereParameters, GroundParameters, LinkBudget, ScenarioLosses,
    TwoRayForm,
};
use crate::terrain::{csv_error, csv_io, LinkGeometry, TerrainProfile};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const REFERENCE_TEMPERATURE_K: f64 = 290.0;

const RECORD_HEADER: [&str; 5] = ["t_s", "rx_power_dbm", "snr_db", "ber", "verdict"];
const SUMMARY_HEADER: [&str; 4] = [
    "packets_sent",
    "packets_received",
    "packets_dropped",
    "throughput_bps",
];

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub packet_size_bits: u32,
    pub interarrival_s: f64,
    pub start_time_s: f64,
    pub horizon_s: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            packet_size_bits: 1024,
            interarrival_s: 1.0,
            start_time_s: 10.0,
            horizon_s: 100.0,
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        if self.packet_size_bits == 0 {
            return Err(Error::Config("packet size must be > 0".into()));
        }
        if !(self.interarrival_s > 0.0 && self.interarrival_s.is_finite()) {
            return Err(Error::Config("interarrival time must be > 0".into()));
        }
        if !(self.start_time_s >= 0.0 && self.start_time_s.is_finite()) {
            return Err(Error::Config("start time must be >= 0".into()));
        }
        if !(self.horizon_s > 0.0 && self.horizon_s.is_finite()) {
            return Err(Error::Config("horizon must be > 0".into()));
        }
        Ok(())
    }
}

/// Emission times `start, start + Δ, ...` strictly before the horizon.
pub fn generate_packets(traffic: &TrafficConfig) -> Vec<f64> {
    let mut times = Vec::new();
    if !(traffic.interarrival_s > 0.0) {
        return times;
    }
    let mut k = 0u64;
    loop {
        let t = traffic.start_time_s + k as f64 * traffic.interarrival_s;
        if t >= traffic.horizon_s {
            break;
        }
        times.push(t);
        k += 1;
    }
    times
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modulation {
    #[default]
    Bpsk,
    Qpsk,
    Qam16,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    pub data_rate_bps: f64,
    pub bandwidth_khz: f64,
    pub min_frequency_mhz: f64,
    pub modulation: Modulation,
    /// Transmit power; there is no meaningful default, so scenarios must set it.
    pub tx_power_w: f64,
    pub ber_threshold: f64,
    pub noise_figure_db: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            data_rate_bps: 1_000_000.0,
            bandwidth_khz: 20_000.0,
            min_frequency_mhz: 905.0,
            modulation: Modulation::Bpsk,
            tx_power_w: f64::NAN,
            ber_threshold: 1e-3,
            noise_figure_db: 0.0,
        }
    }
}

impl RadioConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("data rate", self.data_rate_bps),
            ("bandwidth", self.bandwidth_khz),
            ("minimum frequency", self.min_frequency_mhz),
            ("transmit power", self.tx_power_w),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.ber_threshold > 0.0 && self.ber_threshold < 1.0) {
            return Err(Error::Config(format!(
                "BER threshold must be in (0, 1), got {}",
                self.ber_threshold
            )));
        }
        if !(self.noise_figure_db >= 0.0 && self.noise_figure_db.is_finite()) {
            return Err(Error::Config("noise figure must be >= 0 dB".into()));
        }
        Ok(())
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_khz * 1e3
    }

    /// Thermal noise `k T B` scaled by the noise figure.
    pub fn noise_power_w(&self) -> f64 {
        BOLTZMANN
            * REFERENCE_TEMPERATURE_K
            * self.bandwidth_hz()
            * 10f64.powf(self.noise_figure_db / 10.0)
    }
}

/// Propagation model used by the received-power stage.
#[derive(Debug, Clone, PartialEq)]
pub enum PropagationModel {
    FreeSpace,
    TwoRay(TwoRayForm),
    /// Direct plus ground-reflected phasor sum over a flat plane.
    LosTwoRay {
        ground: GroundParameters,
    },
    Tirem {
        profile: Arc<TerrainProfile>,
        ground: GroundParameters,
        atmosphere: AtmosphereParameters,
        extra: ScenarioLosses,
    },
}

/// A fading generator bound to a pipeline, with its table offset applied as
/// a time shift.
#[derive(Debug, Clone)]
pub struct AttachedFading {
    pub process: FadingProcess,
    pub time_offset_s: f64,
}

impl AttachedFading {
    pub fn power_at(&self, t_s: f64) -> f64 {
        self.process.power_at(t_s + self.time_offset_s)
    }
}

/// Large-scale received power in watts for one model, before fading.
pub fn model_received_power(
    geometry: &LinkGeometry,
    model: &PropagationModel,
    budget: &LinkBudget,
) -> Result<f64> {
    budget.validate()?;
    let d = geometry.path_length_m;
    match model {
        PropagationModel::FreeSpace => {
            free_space_received_power(budget, geometry.wavelength_m(), d)
        }
        PropagationModel::TwoRay(form) => {
            two_ray_received_power(budget, geometry.tx_height_m, geometry.rx_height_m, d, *form)
        }
        PropagationModel::LosTwoRay { ground } => {
            let ratio = los_ratio(geometry, ground)?;
            Ok(budget.tx_power_w * budget.gain_tx * budget.gain_rx * ratio / budget.system_loss)
        }
        PropagationModel::Tirem {
            profile,
            ground,
            atmosphere,
            extra,
        } => {
            let loss = tirem_path_loss(profile, geometry, ground, atmosphere, extra)?;
            Ok(budget.received_power_w(loss.total_db))
        }
    }
}

/// `Pr/Pt` of the flat-plane direct plus reflected ray pair.
pub fn los_ratio(geometry: &LinkGeometry, ground: &GroundParameters) -> Result<f64> {
    geometry.validate()?;
    let (ht, hr, d) = (
        geometry.tx_height_m,
        geometry.rx_height_m,
        geometry.path_length_m,
    );
    let grazing = ((ht + hr) / d).atan();
    let reflection: Complex64 = reflection_coefficient(
        ground,
        geometry.polarization,
        grazing,
        geometry.frequency_mhz,
    )?;
    los_two_ray_ratio(
        geometry.wavelength_m(),
        d.hypot(ht - hr),
        d.hypot(ht + hr),
        reflection,
    )
}

/// Received power at `t_s`, with the fading envelope applied when present.
pub fn received_power_stage(
    t_s: f64,
    geometry: &LinkGeometry,
    model: &PropagationModel,
    budget: &LinkBudget,
    fading: Option<&AttachedFading>,
) -> Result<f64> {
    let power = model_received_power(geometry, model, budget)?;
    Ok(match fading {
        Some(f) => power * f.power_at(t_s),
        None => power,
    })
}

/// SNR in dB against thermal noise; zero power maps to `-inf`.
pub fn snr_stage(rx_power_w: f64, radio: &RadioConfig) -> Result<f64> {
    if !(rx_power_w >= 0.0) {
        return Err(Error::domain(format!(
            "received power must be >= 0, got {rx_power_w}"
        )));
    }
    if rx_power_w == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(to_db(rx_power_w / radio.noise_power_w()))
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Coherent BPSK bit error rate, `Q(sqrt(2 Eb/N0))`.
pub fn ber_stage(snr_db: f64, radio: &RadioConfig) -> Result<f64> {
    if radio.modulation != Modulation::Bpsk {
        return Err(Error::Config(format!(
            "no BER model for modulation {:?}",
            radio.modulation
        )));
    }
    if snr_db.is_nan() {
        return Err(Error::domain("SNR is NaN"));
    }
    let eb_n0 = 10f64.powf(snr_db / 10.0) * radio.bandwidth_hz() / radio.data_rate_bps;
    Ok(bpsk_ber(eb_n0))
}

/// BPSK BER for a linear `Eb/N0`; `Q(sqrt(2x)) = erfc(sqrt(x)) / 2`.
pub fn bpsk_ber(eb_n0: f64) -> f64 {
    if eb_n0 == f64::INFINITY {
        return 0.0;
    }
    0.5 * erfc(eb_n0.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Valid,
    Invalid,
    Dropped,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Valid => "Valid",
            Verdict::Invalid => "Invalid",
            Verdict::Dropped => "Dropped",
        }
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Valid" => Ok(Verdict::Valid),
            "Invalid" => Ok(Verdict::Invalid),
            "Dropped" => Ok(Verdict::Dropped),
            other => Err(Error::domain(format!("unknown verdict `{other}`"))),
        }
    }
}

/// Accepts a packet when its BER is strictly under the threshold. BER values
/// outside `[0, 0.5]` are malformed and yield `Invalid`.
pub fn reception_decision(ber: f64, radio: &RadioConfig) -> Verdict {
    if !(0.0..=0.5).contains(&ber) {
        Verdict::Invalid
    } else if ber < radio.ber_threshold {
        Verdict::Valid
    } else {
        Verdict::Dropped
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceptionRecord {
    pub t_s: f64,
    pub rx_power_w: f64,
    pub rx_power_dbm: f64,
    pub snr_db: f64,
    pub ber: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    pub packets_sent: usize,
    pub packets_received: usize,
    pub packets_dropped: usize,
    pub throughput_bps: f64,
    pub records: Vec<ReceptionRecord>,
}

pub fn watts_to_dbm(power_w: f64) -> f64 {
    10.0 * (power_w * 1e3).log10()
}

/// Linear antenna gains and system loss of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaConfig {
    pub gain_tx: f64,
    pub gain_rx: f64,
    pub system_loss: f64,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        Self {
            gain_tx: 1.0,
            gain_rx: 1.0,
            system_loss: 1.0,
        }
    }
}

/// Everything needed for one link simulation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub traffic: TrafficConfig,
    pub radio: RadioConfig,
    pub antennas: AntennaConfig,
    pub geometry: LinkGeometry,
    pub model: PropagationModel,
    pub fading: Option<RicianParameters>,
}

impl Scenario {
    pub fn budget(&self) -> LinkBudget {
        LinkBudget {
            tx_power_w: self.radio.tx_power_w,
            gain_tx: self.antennas.gain_tx,
            gain_rx: self.antennas.gain_rx,
            system_loss: self.antennas.system_loss,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.traffic.validate()?;
        self.radio.validate()?;
        self.budget().validate()?;
        if let Some(f) = &self.fading {
            f.validate()?;
        }
        Ok(())
    }

    /// Builds the seeded fading generator, if fading is enabled. The table
    /// offset advances the lookup by one interarrival per step.
    pub fn attach_fading(&self, seed: u64) -> Result<Option<AttachedFading>> {
        self.fading
            .as_ref()
            .map(|params| {
                Ok(AttachedFading {
                    process: FadingProcess::new(params, self.geometry.wavelength_m(), seed)?,
                    time_offset_s: params.table_offset as f64 * self.traffic.interarrival_s,
                })
            })
            .transpose()
    }

    /// Arrival time of a packet emitted at `emission_s`.
    pub fn arrival_time(&self, emission_s: f64) -> f64 {
        emission_s + self.traffic.packet_size_bits as f64 / self.radio.data_rate_bps
    }
}

/// Runs every generated packet through the pipeline.
pub fn run_link_simulation(scenario: &Scenario, seed: u64) -> Result<LinkStats> {
    scenario.validate()?;
    let fading = scenario.attach_fading(seed)?;
    let budget = scenario.budget();
    let radio = &scenario.radio;

    let emissions = generate_packets(&scenario.traffic);
    let mut records = Vec::with_capacity(emissions.len());
    for (packet, &emitted) in emissions.iter().enumerate() {
        let stage = |stage: &'static str| {
            move |e: Error| Error::Stage {
                packet,
                stage,
                source: Box::new(e),
            }
        };
        let t_s = scenario.arrival_time(emitted);
        let rx_power_w = received_power_stage(
            t_s,
            &scenario.geometry,
            &scenario.model,
            &budget,
            fading.as_ref(),
        )
        .map_err(stage("received power"))?;
        let snr_db = snr_stage(rx_power_w, radio).map_err(stage("snr"))?;
        let ber = ber_stage(snr_db, radio).map_err(stage("ber"))?;
        let verdict = reception_decision(ber, radio);
        records.push(ReceptionRecord {
            t_s,
            rx_power_w,
            rx_power_dbm: watts_to_dbm(rx_power_w),
            snr_db,
            ber,
            verdict,
        });
    }

    let packets_sent = records.len();
    let packets_received = records
        .iter()
        .filter(|r| r.verdict == Verdict::Valid)
        .count();
    let throughput_bps = packets_received as f64 * scenario.traffic.packet_size_bits as f64
        / scenario.traffic.horizon_s;
    Ok(LinkStats {
        packets_sent,
        packets_received,
        packets_dropped: packets_sent - packets_received,
        throughput_bps,
        records,
    })
}

/// One row of the per-packet time series as written to CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordRow {
    pub t_s: f64,
    pub rx_power_dbm: f64,
    pub snr_db: f64,
    pub ber: f64,
    pub verdict: Verdict,
}

impl From<&ReceptionRecord> for RecordRow {
    fn from(r: &ReceptionRecord) -> Self {
        Self {
            t_s: r.t_s,
            rx_power_dbm: r.rx_power_dbm,
            snr_db: r.snr_db,
            ber: r.ber,
            verdict: r.verdict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSummary {
    pub packets_sent: usize,
    pub packets_received: usize,
    pub packets_dropped: usize,
    pub throughput_bps: f64,
}

impl LinkStats {
    pub fn summary(&self) -> StatsSummary {
        StatsSummary {
            packets_sent: self.packets_sent,
            packets_received: self.packets_received,
            packets_dropped: self.packets_dropped,
            throughput_bps: self.throughput_bps,
        }
    }

    /// Writes `t_s,rx_power_dbm,snr_db,ber,verdict`.
    pub fn write_records_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(RECORD_HEADER).map_err(csv_io)?;
        for r in &self.records {
            w.write_record([
                r.t_s.to_string(),
                r.rx_power_dbm.to_string(),
                r.snr_db.to_string(),
                r.ber.to_string(),
                r.verdict.as_str().to_string(),
            ])
            .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `packets_sent,packets_received,packets_dropped,throughput_bps`.
    pub fn write_summary_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(SUMMARY_HEADER).map_err(csv_io)?;
        w.write_record([
            self.packets_sent.to_string(),
            self.packets_received.to_string(),
            self.packets_dropped.to_string(),
            self.throughput_bps.to_string(),
        ])
        .map_err(csv_io)?;
        w.flush()?;
        Ok(())
    }
}

fn read_rows<R: Read>(source: R, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let found = r.headers().map_err(|e| csv_error(e, 1))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", header.join(",")),
        });
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| csv_error(e, 0))?;
            let line = rec.position().map_or(0, |p| p.line());
            if rec.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} fields, found {}", header.len(), rec.len()),
                });
            }
            Ok((line, rec))
        })
        .collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, line: u64, i: usize) -> Result<T> {
    rec[i].parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid value `{}` in column {}", &rec[i], i + 1),
    })
}

pub fn read_records_csv<R: Read>(source: R) -> Result<Vec<RecordRow>> {
    read_rows(source, &RECORD_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            Ok(RecordRow {
                t_s: field(&rec, line, 0)?,
                rx_power_dbm: field(&rec, line, 1)?,
                snr_db: field(&rec, line, 2)?,
                ber: field(&rec, line, 3)?,
                verdict: rec[4].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid verdict `{}`", &rec[4]),
                })?,
            })
        })
        .collect()
}

pub fn read_summary_csv<R: Read>(source: R) -> Result<StatsSummary> {
    let rows = read_rows(source, &SUMMARY_HEADER)?;
    let [(line, rec)] = <[_; 1]>::try_from(rows).map_err(|rows: Vec<_>| Error::Parse {
        line: 2,
        message: format!("expected exactly one summary row, found {}", rows.len()),
    })?;
    Ok(StatsSummary {
        packets_sent: field(&rec, line, 0)?,
        packets_received: field(&rec, line, 1)?,
        packets_dropped: field(&rec, line, 2)?,
        throughput_bps: field(&rec, line, 3)?,
    })
}
