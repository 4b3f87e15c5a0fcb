//! Generator configuration. Powers are given in dBm, noise in dBm/Hz.

use fedalloc_core::model::{db_to_linear, dbm_to_watts};
use fedalloc_core::SystemParams64;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Log-distance path loss: `gain(d) = 10^(reference_gain_db / 10) * d^-exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    /// Gain at 1 m, in dB.
    pub reference_gain_db: f64,
    pub exponent: f64,
}

impl Default for PathLoss {
    fn default() -> Self {
        Self { reference_gain_db: -30.0, exponent: 3.5 }
    }
}

impl PathLoss {
    pub fn gain(&self, distance: f64) -> f64 {
        db_to_linear(self.reference_gain_db) * distance.powf(-self.exponent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub num_orgs: usize,
    /// Radius of the served area around the MBS (m).
    pub area_radius: f64,
    /// SBS distance range from the MBS (m).
    pub org_ring: [f64; 2],
    /// Coverage radius of each SBS (m).
    pub sbs_radius: f64,
    pub sensors_per_org: [usize; 2],
    /// Sensor distance range from its SBS (m).
    pub sensor_ring: [f64; 2],
    /// Data held by each sensor (bits).
    pub sensor_data: f64,
    pub model_size: f64,
    pub sensor_power_dbm: f64,
    pub sbs_power_dbm: f64,
    pub mec_freq: f64,
    pub noise_psd_dbm: f64,
    pub kappa: f64,
    pub cycles_per_bit: f64,
    /// MBS bandwidth in Hz: the total over all subcarriers, or the width of
    /// one subcarrier when `mbs_bandwidth_per_subcarrier` is set.
    pub mbs_bandwidth: f64,
    pub mbs_bandwidth_per_subcarrier: bool,
    pub sbs_bandwidth: f64,
    pub waterfall_m: f64,
    pub alpha: f64,
    pub rho: f64,
    pub path_loss: PathLoss,
    /// When false every fading factor is 1.
    pub fading: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            num_orgs: 10,
            area_radius: 500.0,
            org_ring: [200.0, 500.0],
            sbs_radius: 50.0,
            sensors_per_org: [10, 20],
            sensor_ring: [5.0, 50.0],
            sensor_data: 3e6,
            model_size: 1e5,
            sensor_power_dbm: 23.0,
            sbs_power_dbm: 37.0,
            mec_freq: 5e9,
            noise_psd_dbm: -174.0,
            kappa: 2e-29,
            cycles_per_bit: 30.0,
            mbs_bandwidth: 3.125e6,
            mbs_bandwidth_per_subcarrier: false,
            sbs_bandwidth: 1e7,
            waterfall_m: 0.023,
            alpha: 0.5,
            rho: 0.5,
            path_loss: PathLoss::default(),
            fading: true,
        }
    }
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::InvalidConfig(msg.into())
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_orgs == 0 {
            return Err(bad("num_orgs must be at least 1"));
        }
        let ring = |name: &str, r: [f64; 2]| {
            if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return Err(bad(format!("{name} must satisfy 0 < lo <= hi, got {r:?}")));
            }
            Ok(())
        };
        ring("org_ring", self.org_ring)?;
        ring("sensor_ring", self.sensor_ring)?;
        if !(self.area_radius > 0.0) || self.org_ring[1] > self.area_radius {
            return Err(bad(format!("org_ring {:?} must lie inside area_radius {}", self.org_ring, self.area_radius)));
        }
        if !(self.sbs_radius > 0.0) || self.sensor_ring[1] > self.sbs_radius {
            return Err(bad(format!(
                "sensor_ring {:?} must lie inside sbs_radius {}",
                self.sensor_ring, self.sbs_radius
            )));
        }
        if self.sensors_per_org[0] > self.sensors_per_org[1] {
            return Err(bad(format!("sensors_per_org range {:?} is reversed", self.sensors_per_org)));
        }
        if !(self.path_loss.exponent > 0.0 && self.path_loss.reference_gain_db.is_finite()) {
            return Err(bad("path loss needs a positive exponent and finite reference gain"));
        }
        // Remaining physical checks happen on the converted parameters.
        self.system_params().validate().map_err(|e| bad(e.to_string()))
    }

    /// Subcarrier bandwidth under this configuration.
    pub fn subcarrier_bandwidth(&self) -> f64 {
        if self.mbs_bandwidth_per_subcarrier {
            self.mbs_bandwidth
        } else {
            self.mbs_bandwidth / self.num_orgs as f64
        }
    }

    pub fn system_params(&self) -> SystemParams64 {
        SystemParams64 {
            num_orgs: self.num_orgs,
            mbs_total_bandwidth: self.subcarrier_bandwidth() * self.num_orgs as f64,
            noise_psd: dbm_to_watts(self.noise_psd_dbm),
            sensor_max_power: dbm_to_watts(self.sensor_power_dbm),
            sbs_max_power: dbm_to_watts(self.sbs_power_dbm),
            sbs_bandwidth: self.sbs_bandwidth,
            sbs_max_freq: self.mec_freq,
            switched_capacitance: self.kappa,
            cycles_per_bit: self.cycles_per_bit,
            model_size: self.model_size,
            waterfall_threshold: self.waterfall_m,
            alpha: self.alpha,
            rho: self.rho,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_convert() {
        let p = GeneratorConfig::default().system_params();
        assert!((p.sbs_max_power - 5.011_872_336_272_722).abs() < 1e-12);
        assert!((p.sensor_max_power - 0.199_526_231_496_887_96).abs() < 1e-15);
        assert!((p.noise_psd / 3.981_071_705_534_972e-21 - 1.0).abs() < 1e-12);
        assert!((p.subcarrier_bandwidth() - 312_500.0).abs() < 1e-9);
        assert!(GeneratorConfig::default().validate().is_ok());
    }

    #[test]
    fn per_subcarrier_reading() {
        let c = GeneratorConfig { mbs_bandwidth_per_subcarrier: true, ..Default::default() };
        assert_eq!(c.system_params().subcarrier_bandwidth(), 3.125e6);
    }

    #[test]
    fn rejects_degenerate() {
        let c = GeneratorConfig { org_ring: [0.0, 0.0], ..Default::default() };
        assert!(c.validate().is_err());
        let c = GeneratorConfig { sensor_ring: [5.0, 80.0], ..Default::default() };
        assert!(c.validate().is_err());
        let c = GeneratorConfig { num_orgs: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = GeneratorConfig { rho: 1.5, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn path_loss_reference() {
        let pl = PathLoss::default();
        assert!((pl.gain(1.0) - 1e-3).abs() < 1e-18);
        assert!((pl.gain(10.0) - 1e-3 * 10f64.powf(-3.5)).abs() < 1e-20);
    }
}
