//! JSON scenario files.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "params": { "num_orgs": 2, "mbs_total_bandwidth": 625000.0, ... },
//!   "orgs": [ { "id": 0, "position": [310.2, -12.5] }, ... ],
//!   "sensors": [ { "org": 0, "data_size": 3e6, "channel_gain": 1.2e-7, "position": [...] }, ... ],
//!   "gains": [ [4.1e-13, 2.2e-13], [9.0e-14, 1.3e-13] ]
//! }
//! ```
//!
//! `gains` and individual sensor `channel_gain`s may be omitted; missing
//! values are drawn from the positions, `path_loss` and `seed` exactly as the
//! generator would have drawn them.

use std::fs;
use std::path::Path;

use fedalloc_core::{Organization64, Scenario64, Sensor64, SystemParams64};
use serde::{Deserialize, Serialize};

use crate::config::{GeneratorConfig, PathLoss};
use crate::error::{HarnessError, Result};
use crate::generate::{draw_channels, generate_layout, realize, Layout, OrgLayout};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsSection {
    pub num_orgs: usize,
    pub mbs_total_bandwidth: f64,
    pub noise_psd: f64,
    pub sensor_max_power: f64,
    pub sbs_max_power: f64,
    pub sbs_bandwidth: f64,
    pub sbs_max_freq: f64,
    pub switched_capacitance: f64,
    pub cycles_per_bit: f64,
    pub model_size: f64,
    pub waterfall_threshold: f64,
    pub alpha: f64,
    pub rho: f64,
}

impl From<&SystemParams64> for ParamsSection {
    fn from(p: &SystemParams64) -> Self {
        Self {
            num_orgs: p.num_orgs,
            mbs_total_bandwidth: p.mbs_total_bandwidth,
            noise_psd: p.noise_psd,
            sensor_max_power: p.sensor_max_power,
            sbs_max_power: p.sbs_max_power,
            sbs_bandwidth: p.sbs_bandwidth,
            sbs_max_freq: p.sbs_max_freq,
            switched_capacitance: p.switched_capacitance,
            cycles_per_bit: p.cycles_per_bit,
            model_size: p.model_size,
            waterfall_threshold: p.waterfall_threshold,
            alpha: p.alpha,
            rho: p.rho,
        }
    }
}

impl From<&ParamsSection> for SystemParams64 {
    fn from(p: &ParamsSection) -> Self {
        Self {
            num_orgs: p.num_orgs,
            mbs_total_bandwidth: p.mbs_total_bandwidth,
            noise_psd: p.noise_psd,
            sensor_max_power: p.sensor_max_power,
            sbs_max_power: p.sbs_max_power,
            sbs_bandwidth: p.sbs_bandwidth,
            sbs_max_freq: p.sbs_max_freq,
            switched_capacitance: p.switched_capacitance,
            cycles_per_bit: p.cycles_per_bit,
            model_size: p.model_size,
            waterfall_threshold: p.waterfall_threshold,
            alpha: p.alpha,
            rho: p.rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrgEntry {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorEntry {
    pub org: usize,
    pub data_size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub path_loss: PathLoss,
    #[serde(default = "default_fading")]
    pub fading: bool,
    pub params: ParamsSection,
    pub orgs: Vec<OrgEntry>,
    pub sensors: Vec<SensorEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<Vec<f64>>>,
}

fn default_fading() -> bool {
    true
}

impl ScenarioFile {
    pub fn from_scenario(scenario: &Scenario64, seed: Option<u64>, path_loss: PathLoss, fading: bool) -> Self {
        let orgs = scenario.orgs.iter().map(|o| OrgEntry { id: o.id, position: None }).collect();
        let sensors = scenario
            .orgs
            .iter()
            .enumerate()
            .flat_map(|(j, o)| {
                o.sensors.iter().map(move |s| SensorEntry {
                    org: j,
                    data_size: s.data_size,
                    channel_gain: Some(s.channel_gain),
                    position: s.position,
                })
            })
            .collect();
        Self {
            seed,
            path_loss,
            fading,
            params: ParamsSection::from(&scenario.params),
            orgs,
            sensors,
            gains: Some(scenario.orgs.iter().map(|o| o.uplink_gains.clone()).collect()),
        }
    }

    /// File for the scenario the generator produces from `seed`, including
    /// every position.
    pub fn generated(config: &GeneratorConfig, seed: u64) -> Result<Self> {
        let layout = generate_layout(config, seed)?;
        let scenario = realize(config, &layout, seed)?;
        let mut file = Self::from_scenario(&scenario, Some(seed), config.path_loss, config.fading);
        for (entry, org) in file.orgs.iter_mut().zip(&layout.orgs) {
            entry.position = Some(org.position);
        }
        Ok(file)
    }

    /// Builds the scenario, drawing any missing gains.
    pub fn to_scenario(&self) -> std::result::Result<Scenario64, String> {
        let j_count = self.orgs.len();
        let mut by_org: Vec<Vec<&SensorEntry>> = vec![Vec::new(); j_count];
        for (i, s) in self.sensors.iter().enumerate() {
            by_org
                .get_mut(s.org)
                .ok_or_else(|| format!("sensor {i} refers to org {} but only {j_count} orgs exist", s.org))?
                .push(s);
        }

        let incomplete = self.gains.is_none() || self.sensors.iter().any(|s| s.channel_gain.is_none());
        let drawn = if incomplete {
            let seed = self.seed.ok_or("gains are missing and no seed is given to draw them")?;
            let orgs = self
                .orgs
                .iter()
                .zip(&by_org)
                .map(|(o, sensors)| {
                    let position = o.position.ok_or(format!("org {} has no position to draw gains from", o.id))?;
                    let sensor_positions = sensors
                        .iter()
                        .map(|s| {
                            s.position.ok_or(format!("a sensor of org {} has no position to draw its gain from", o.id))
                        })
                        .collect::<std::result::Result<_, String>>()?;
                    Ok(OrgLayout { position, sensor_positions })
                })
                .collect::<std::result::Result<_, String>>()?;
            Some(draw_channels(&self.path_loss, self.fading, &Layout { orgs }, seed))
        } else {
            None
        };

        let orgs = self
            .orgs
            .iter()
            .enumerate()
            .map(|(j, o)| {
                let sensors = by_org[j]
                    .iter()
                    .enumerate()
                    .map(|(k, s)| Sensor64 {
                        data_size: s.data_size,
                        channel_gain: s
                            .channel_gain
                            .unwrap_or_else(|| drawn.as_ref().map_or(f64::NAN, |d| d.sensor[j][k])),
                        position: s.position,
                    })
                    .collect();
                let uplink_gains = match &self.gains {
                    Some(g) => g.get(j).cloned().ok_or(format!("gains has no row for org {j}"))?,
                    None => drawn.as_ref().map(|d| d.uplink[j].clone()).unwrap_or_default(),
                };
                Ok(Organization64 { id: o.id, sensors, uplink_gains })
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Scenario64::new(SystemParams64::from(&self.params), orgs).map_err(|e| e.to_string())
    }
}

pub fn read_scenario(path: &Path) -> Result<Scenario64> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| HarnessError::format(path, e))?;
    file.to_scenario().map_err(|e| HarnessError::format(path, e))
}

pub fn write_scenario_file(file: &ScenarioFile, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(file).map_err(|e| HarnessError::format(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::generate_scenario;

    fn file_for(seed: u64) -> (Scenario64, ScenarioFile) {
        let c = GeneratorConfig { num_orgs: 3, sensors_per_org: [2, 3], ..Default::default() };
        (generate_scenario(&c, seed).unwrap(), ScenarioFile::generated(&c, seed).unwrap())
    }

    #[test]
    fn round_trip_through_json() {
        let (s, f) = file_for(4);
        let text = serde_json::to_string(&f).unwrap();
        let back: ScenarioFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_scenario().unwrap(), s);
    }

    #[test]
    fn missing_gains_are_redrawn() {
        let (s, mut f) = file_for(9);
        f.gains = None;
        for sensor in &mut f.sensors {
            sensor.channel_gain = None;
        }
        assert_eq!(f.to_scenario().unwrap(), s);
    }

    #[test]
    fn missing_gains_without_seed_is_an_error() {
        let (_, mut f) = file_for(9);
        f.gains = None;
        f.seed = None;
        assert!(f.to_scenario().unwrap_err().contains("seed"));
    }

    #[test]
    fn dangling_sensor_is_an_error() {
        let (_, mut f) = file_for(1);
        f.sensors[0].org = 17;
        assert!(f.to_scenario().is_err());
    }
}
