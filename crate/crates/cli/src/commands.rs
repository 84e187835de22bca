use std::io::Read;

use radiolink_core::fading::{envelope_process, EnvelopeTrace, RicianParameters};
use radiolink_core::linksim::{
    model_received_power, run_link_simulation, LinkStats, PropagationModel,
};
use radiolink_core::proploss::{tirem_path_loss, to_db};
use radiolink_core::terrain::wavelength_m;

use crate::config::ScenarioConfig;
use crate::error::CliError;

const SWEEP_HEADER: [&str; 3] = ["distance_m", "loss_db", "mode"];

#[derive(Debug, Clone, Copy)]
pub struct SweepGrid {
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub n_points: usize,
    pub log_spacing: bool,
}

impl SweepGrid {
    pub fn distances(&self) -> Result<Vec<f64>, CliError> {
        let SweepGrid {
            d_min_m: lo,
            d_max_m: hi,
            n_points: n,
            log_spacing,
        } = *self;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(CliError::Usage(format!(
                "sweep range must satisfy 0 < d_min < d_max (got {lo} .. {hi})"
            )));
        }
        if n < 2 {
            return Err(CliError::Usage(format!(
                "sweep needs at least 2 points, got {n}"
            )));
        }
        let last = (n - 1) as f64;
        Ok((0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else if log_spacing {
                    lo * (hi / lo).powf(i as f64 / last)
                } else {
                    lo + (hi - lo) * i as f64 / last
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub distance_m: f64,
    pub loss_db: f64,
    pub mode: String,
}

/// Attenuation (transmit minus receive power, dB) at every grid distance.
pub fn sweep(cfg: &ScenarioConfig, grid: &SweepGrid) -> Result<Vec<SweepRow>, CliError> {
    let distances = grid.distances()?;
    let profile = cfg.load_profile()?;
    let mut budget = cfg.antennas_budget();
    if !(budget.tx_power_w > 0.0) {
        budget.tx_power_w = 1.0;
    }
    budget.validate()?;

    distances
        .into_iter()
        .map(|d| {
            let geometry = cfg.geometry_at(d)?;
            let model = cfg.model_at(profile.as_ref(), d)?;
            let (rx, mode) = match &model {
                PropagationModel::Tirem {
                    profile,
                    ground,
                    atmosphere,
                    extra,
                } => {
                    let b = tirem_path_loss(profile, &geometry, ground, atmosphere, extra)?;
                    (budget.received_power_w(b.total_db), b.mode.as_str())
                }
                PropagationModel::FreeSpace => (
                    model_received_power(&geometry, &model, &budget)?,
                    "FreeSpace",
                ),
                PropagationModel::TwoRay(_) => {
                    (model_received_power(&geometry, &model, &budget)?, "TwoRay")
                }
                PropagationModel::LosTwoRay { .. } => (
                    model_received_power(&geometry, &model, &budget)?,
                    "LosTwoRay",
                ),
            };
            Ok(SweepRow {
                distance_m: d,
                loss_db: to_db(budget.tx_power_w / rx),
                mode: mode.to_string(),
            })
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.distance_m.to_string(),
            r.loss_db.to_string(),
            r.mode.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

pub fn read_sweep_csv<R: Read>(source: R) -> Result<Vec<SweepRow>, CliError> {
    let mut r = csv::Reader::from_reader(source);
    let bad = |e: csv::Error| CliError::Domain(format!("sweep CSV: {e}"));
    let header = r.headers().map_err(bad)?;
    if header.iter().ne(SWEEP_HEADER) {
        return Err(CliError::Domain(format!(
            "sweep CSV: expected header `{}`",
            SWEEP_HEADER.join(",")
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(bad)?;
            let num = |i: usize| {
                rec[i].parse::<f64>().map_err(|_| {
                    CliError::Domain(format!("sweep CSV: invalid number `{}`", &rec[i]))
                })
            };
            Ok(SweepRow {
                distance_m: num(0)?,
                loss_db: num(1)?,
                mode: rec[2].to_string(),
            })
        })
        .collect()
}

pub fn run(cfg: &ScenarioConfig) -> Result<LinkStats, CliError> {
    let scenario = cfg.scenario()?;
    Ok(run_link_simulation(&scenario, cfg.seed)?)
}

pub struct FadeRequest {
    pub params: RicianParameters,
    pub frequency_mhz: f64,
    pub dt_s: f64,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn fade(req: &FadeRequest) -> Result<EnvelopeTrace, CliError> {
    if req.n_samples == 0 {
        return Err(CliError::Usage(
            "fade needs at least one sample (--n)".into(),
        ));
    }
    if !(req.frequency_mhz > 0.0) {
        return Err(CliError::Domain(format!(
            "frequency must be positive, got {} MHz",
            req.frequency_mhz
        )));
    }
    Ok(envelope_process(
        &req.params,
        wavelength_m(req.frequency_mhz),
        req.dt_s,
        req.n_samples,
        req.seed,
    )?)
}

impl ScenarioConfig {
    fn antennas_budget(&self) -> radiolink_core::proploss::LinkBudget {
        radiolink_core::proploss::LinkBudget {
            tx_power_w: self.radio.tx_power_w,
            gain_tx: self.antennas.gain_tx,
            gain_rx: self.antennas.gain_rx,
            system_loss: self.antennas.system_loss,
        }
    }
}
