//! Closed-form sensor bandwidth allocation.
//!
//! Within one organization the receive time `max_k D_k / R_k` is minimized by
//! equalizing every sensor's upload time, which gives bandwidth shares
//! proportional to `D_k / log2(1 + SNR_k)`. Organizations are independent.

use crate::error::{invalid, Result};
use crate::model::{sensor_snr, Organization, Scenario, SystemParams};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthSolution<T> {
    /// Bandwidth given to each sensor, in the organization's sensor order.
    pub per_sensor_bandwidth: Vec<T>,
    /// Time until the SBS holds every sensor's data.
    pub receive_time: T,
}

/// Spectral efficiency `log2(1 + SNR_k)` of every sensor in `org`.
fn efficiencies<T: Scalar>(org: &Organization<T>, params: &SystemParams<T>) -> Result<Vec<T>> {
    org.sensors
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let snr = sensor_snr(s.channel_gain, params);
            if !(snr.is_finite() && snr > T::zero()) {
                return Err(invalid(format!("sensor {k} of org {} has SNR {snr}", org.id)));
            }
            Ok(snr.log2_1p())
        })
        .collect()
}

/// Bandwidth split that equalizes all sensor upload times in `org`.
///
/// An organization without sensors gets an empty split and zero receive time.
pub fn optimal_bandwidth<T: Scalar>(org: &Organization<T>, params: &SystemParams<T>) -> Result<BandwidthSolution<T>> {
    let eff = efficiencies(org, params)?;
    if eff.is_empty() {
        return Ok(BandwidthSolution { per_sensor_bandwidth: Vec::new(), receive_time: T::zero() });
    }
    // Bits-per-(bit/s/Hz): the bandwidth-seconds each sensor needs.
    let weights: Vec<T> = org.sensors.iter().zip(&eff).map(|(s, &e)| s.data_size / e).collect();
    let total: T = weights.iter().copied().sum();
    let budget = params.sbs_bandwidth;
    Ok(BandwidthSolution {
        per_sensor_bandwidth: weights.iter().map(|&w| budget * (w / total)).collect(),
        receive_time: total / budget,
    })
}

/// [`optimal_bandwidth`] for every organization of the scenario.
pub fn optimal_bandwidth_all<T: Scalar>(scenario: &Scenario<T>) -> Result<Vec<BandwidthSolution<T>>> {
    scenario.orgs.iter().map(|org| optimal_bandwidth(org, &scenario.params)).collect()
}

/// Even split of the SBS band; receive time is that of the slowest sensor.
pub fn equal_bandwidth<T: Scalar>(org: &Organization<T>, params: &SystemParams<T>) -> Result<BandwidthSolution<T>> {
    let eff = efficiencies(org, params)?;
    if eff.is_empty() {
        return Ok(BandwidthSolution { per_sensor_bandwidth: Vec::new(), receive_time: T::zero() });
    }
    let share = params.sbs_bandwidth / T::from_usize_lossy(eff.len());
    let receive_time = org.sensors.iter().zip(&eff).map(|(s, &e)| s.data_size / (share * e)).fold(T::zero(), T::max);
    Ok(BandwidthSolution { per_sensor_bandwidth: vec![share; eff.len()], receive_time })
}

pub fn equal_bandwidth_all<T: Scalar>(scenario: &Scenario<T>) -> Result<Vec<BandwidthSolution<T>>> {
    scenario.orgs.iter().map(|org| equal_bandwidth(org, &scenario.params)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sensor_rate, Sensor};

    fn params() -> SystemParams<f64> {
        SystemParams::reference()
    }

    fn org(sensors: &[(f64, f64)]) -> Organization<f64> {
        Organization {
            id: 0,
            sensors: sensors.iter().map(|&(d, h)| Sensor::new(d, h)).collect(),
            uplink_gains: vec![1e-12; 10],
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn single_sensor_takes_whole_band() {
        let p = params();
        let o = org(&[(3e6, 1e-9)]);
        let sol = optimal_bandwidth(&o, &p).unwrap();
        assert_eq!(sol.per_sensor_bandwidth, vec![p.sbs_bandwidth]);
        let snr = p.sensor_max_power * 1e-9 / (p.sbs_bandwidth * p.noise_psd);
        let expected = 3e6 / (p.sbs_bandwidth * (1.0 + snr).log2());
        assert!(rel(sol.receive_time, expected) < 1e-14);
    }

    #[test]
    fn symmetric_and_proportional_splits() {
        let p = params();
        let sol = optimal_bandwidth(&org(&[(3e6, 1e-9), (3e6, 1e-9)]), &p).unwrap();
        assert!(rel(sol.per_sensor_bandwidth[0], p.sbs_bandwidth / 2.0) < 1e-15);
        assert!(rel(sol.per_sensor_bandwidth[1], p.sbs_bandwidth / 2.0) < 1e-15);

        let sol = optimal_bandwidth(&org(&[(6e6, 1e-9), (3e6, 1e-9)]), &p).unwrap();
        assert!(rel(sol.per_sensor_bandwidth[0], 2.0 * p.sbs_bandwidth / 3.0) < 1e-15);
        assert!(rel(sol.per_sensor_bandwidth[1], p.sbs_bandwidth / 3.0) < 1e-15);
    }

    #[test]
    fn equal_times_and_full_budget() {
        let p = params();
        let o = org(&[(1e6, 3e-8), (4e6, 2e-10), (2.5e6, 7e-9), (3e6, 1e-11)]);
        let sol = optimal_bandwidth(&o, &p).unwrap();
        let sum: f64 = sol.per_sensor_bandwidth.iter().sum();
        assert!(rel(sum, p.sbs_bandwidth) < 1e-12);
        for (s, &bw) in o.sensors.iter().zip(&sol.per_sensor_bandwidth) {
            let t = s.data_size / sensor_rate(bw, s.channel_gain, &p).unwrap();
            assert!(rel(t, sol.receive_time) < 1e-12);
        }
    }

    #[test]
    fn empty_org_is_degenerate_not_an_error() {
        let sol = optimal_bandwidth(&org(&[]), &params()).unwrap();
        assert!(sol.per_sensor_bandwidth.is_empty());
        assert_eq!(sol.receive_time, 0.0);
    }

    #[test]
    fn equal_split_matches_optimal_for_identical_sensors() {
        let p = params();
        let o = org(&[(3e6, 1e-9); 5]);
        let a = optimal_bandwidth(&o, &p).unwrap();
        let b = equal_bandwidth(&o, &p).unwrap();
        assert!(rel(a.receive_time, b.receive_time) < 1e-14);
        let o = org(&[(3e6, 1e-9), (1e6, 1e-10)]);
        assert!(equal_bandwidth(&o, &p).unwrap().receive_time > optimal_bandwidth(&o, &p).unwrap().receive_time);
    }
}
