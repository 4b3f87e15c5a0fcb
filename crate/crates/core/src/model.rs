//! Domain types and the latency / energy / learning cost model.
//!
//! Every quantity is strict SI: watts, hertz, bits, seconds, joules. Channel
//! gains are linear power gains. Conversions from dBm or dB belong to whoever
//! builds a [`Scenario`].

use crate::error::{infeasible, invalid, Result};
use crate::scalar::{approx_le, Scalar};

/// Relative slack allowed when checking box and budget constraints.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

/// Global constants of the allocation problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<T> {
    /// Number of organizations, which is also the number of MBS subcarriers.
    pub num_orgs: usize,
    /// Total MBS uplink bandwidth, split evenly into `num_orgs` subcarriers.
    pub mbs_total_bandwidth: T,
    /// Noise power spectral density (W/Hz).
    pub noise_psd: T,
    /// Maximum sensor transmit power (W).
    pub sensor_max_power: T,
    /// Maximum SBS uplink power (W), the same for every organization.
    pub sbs_max_power: T,
    /// Bandwidth each SBS shares among its sensors (Hz).
    pub sbs_bandwidth: T,
    /// Maximum MEC CPU frequency (cycles/s).
    pub sbs_max_freq: T,
    /// Effective switched capacitance of the MEC chip.
    pub switched_capacitance: T,
    /// CPU cycles needed per bit of training data.
    pub cycles_per_bit: T,
    /// Size of the uploaded model parameters (bits).
    pub model_size: T,
    /// Waterfall threshold of the packet error approximation.
    pub waterfall_threshold: T,
    /// Latency versus energy trade-off inside the system cost.
    pub alpha: T,
    /// System cost versus learning cost trade-off.
    pub rho: T,
}

impl<T: Scalar> SystemParams<T> {
    /// Reference parameters for a ten-organization deployment: 3.125 MHz MBS
    /// band, 23 dBm sensors, 37 dBm SBSs, 5 GHz MEC servers, -174 dBm/Hz noise.
    pub fn reference() -> Self {
        Self {
            num_orgs: 10,
            mbs_total_bandwidth: T::lit(3.125e6),
            noise_psd: T::lit(dbm_to_watts(-174.0)),
            sensor_max_power: T::lit(dbm_to_watts(23.0)),
            sbs_max_power: T::lit(dbm_to_watts(37.0)),
            sbs_bandwidth: T::lit(1e7),
            sbs_max_freq: T::lit(5e9),
            switched_capacitance: T::lit(2e-29),
            cycles_per_bit: T::lit(30.0),
            model_size: T::lit(1e5),
            waterfall_threshold: T::lit(0.023),
            alpha: T::lit(0.5),
            rho: T::lit(0.5),
        }
    }

    /// Bandwidth of a single MBS subcarrier.
    pub fn subcarrier_bandwidth(&self) -> T {
        self.mbs_total_bandwidth / T::from_usize_lossy(self.num_orgs)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_orgs == 0 {
            return Err(invalid("num_orgs must be at least 1"));
        }
        let positive = [
            ("mbs_total_bandwidth", self.mbs_total_bandwidth),
            ("noise_psd", self.noise_psd),
            ("sensor_max_power", self.sensor_max_power),
            ("sbs_max_power", self.sbs_max_power),
            ("sbs_bandwidth", self.sbs_bandwidth),
            ("sbs_max_freq", self.sbs_max_freq),
            ("switched_capacitance", self.switched_capacitance),
            ("cycles_per_bit", self.cycles_per_bit),
            ("model_size", self.model_size),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(invalid(format!("{name} must be finite and positive, got {v}")));
            }
        }
        if !(self.waterfall_threshold.is_finite() && self.waterfall_threshold >= T::zero()) {
            return Err(invalid(format!(
                "waterfall_threshold must be finite and non-negative, got {}",
                self.waterfall_threshold
            )));
        }
        for (name, w) in [("alpha", self.alpha), ("rho", self.rho)] {
            if !(w >= T::zero() && w <= T::one()) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {w}")));
            }
        }
        Ok(())
    }
}

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power ratio in dB to a linear factor.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sensor<T> {
    /// Local data set size (bits).
    pub data_size: T,
    /// Linear power gain from the sensor to its SBS.
    pub channel_gain: T,
    /// Planar position in meters, only meaningful to scenario generators.
    pub position: Option<[T; 2]>,
}

impl<T: Scalar> Sensor<T> {
    pub fn new(data_size: T, channel_gain: T) -> Self {
        Self { data_size, channel_gain, position: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Organization<T> {
    pub id: usize,
    pub sensors: Vec<Sensor<T>>,
    /// Uplink gain from this SBS to the MBS on each subcarrier.
    pub uplink_gains: Vec<T>,
}

impl<T: Scalar> Organization<T> {
    /// Total data collected from the organization's sensors.
    pub fn data_total(&self) -> T {
        self.sensors.iter().map(|s| s.data_size).sum()
    }
}

/// A concrete network instance: parameters plus a channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub params: SystemParams<T>,
    pub orgs: Vec<Organization<T>>,
}

impl<T: Scalar> Scenario<T> {
    /// Builds a scenario after checking every structural invariant.
    pub fn new(params: SystemParams<T>, orgs: Vec<Organization<T>>) -> Result<Self> {
        let scenario = Self { params, orgs };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn num_orgs(&self) -> usize {
        self.orgs.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let j = self.params.num_orgs;
        if self.orgs.len() != j {
            return Err(invalid(format!("expected {j} organizations, found {}", self.orgs.len())));
        }
        for (idx, org) in self.orgs.iter().enumerate() {
            if org.uplink_gains.len() != j {
                return Err(invalid(format!(
                    "organization {idx} has {} uplink gains, expected {j}",
                    org.uplink_gains.len()
                )));
            }
            if let Some(g) = org.uplink_gains.iter().find(|g| !(g.is_finite() && **g > T::zero())) {
                return Err(invalid(format!("organization {idx} has non-positive uplink gain {g}")));
            }
            for (k, s) in org.sensors.iter().enumerate() {
                if !(s.data_size.is_finite() && s.data_size > T::zero()) {
                    return Err(invalid(format!("sensor {k} of organization {idx} has data size {}", s.data_size)));
                }
                if !(s.channel_gain.is_finite() && s.channel_gain > T::zero()) {
                    return Err(invalid(format!(
                        "sensor {k} of organization {idx} has channel gain {}",
                        s.channel_gain
                    )));
                }
            }
        }
        Ok(())
    }

    /// Returns a copy with the system/learning trade-off replaced.
    pub fn with_rho(&self, rho: T) -> Self {
        let mut out = self.clone();
        out.params.rho = rho;
        out
    }
}

/// A candidate decision for every variable of the joint problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation<T> {
    /// Bandwidth of every sensor, grouped by organization.
    pub sensor_bandwidths: Vec<Vec<T>>,
    /// MEC CPU frequency per organization.
    pub frequencies: Vec<T>,
    /// SBS uplink power per organization.
    pub powers: Vec<T>,
    /// Subcarrier index assigned to each organization.
    pub assignment: Vec<usize>,
    /// Round latency bound the allocation was designed for.
    pub latency_bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrgCost<T> {
    pub receive_time: T,
    pub compute_time: T,
    pub upload_time: T,
    pub compute_energy: T,
    pub upload_energy: T,
    /// Sensor transmit energy. Reported only; it does not enter `e_one`.
    pub sensor_energy: T,
    pub error_rate: T,
}

impl<T: Scalar> OrgCost<T> {
    pub fn total_time(&self) -> T {
        self.receive_time + self.compute_time + self.upload_time
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown<T> {
    pub t_one: T,
    pub e_one: T,
    pub c_learn: T,
    pub c_system: T,
    pub c_total: T,
    pub per_org: Vec<OrgCost<T>>,
}

fn check_finite<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {v}")))
    }
}

/// Per-bandwidth SNR a sensor sees when transmitting at the power-spectral
/// density `p^max / B_j`.
pub fn sensor_snr<T: Scalar>(gain: T, params: &SystemParams<T>) -> T {
    params.sensor_max_power * gain / (params.sbs_bandwidth * params.noise_psd)
}

/// Achievable sensor rate with transmit power proportional to bandwidth.
pub fn sensor_rate<T: Scalar>(bandwidth: T, gain: T, params: &SystemParams<T>) -> Result<T> {
    check_finite("bandwidth", bandwidth)?;
    check_finite("gain", gain)?;
    if bandwidth < T::zero() {
        return Err(invalid(format!("bandwidth must be non-negative, got {bandwidth}")));
    }
    if gain <= T::zero() {
        return Err(invalid(format!("gain must be positive, got {gain}")));
    }
    if bandwidth == T::zero() {
        return Ok(T::zero());
    }
    Ok(bandwidth * sensor_snr(gain, params).log2_1p())
}

/// Rate of an SBS on one MBS subcarrier.
pub fn uplink_rate<T: Scalar>(power: T, gain: T, params: &SystemParams<T>) -> Result<T> {
    check_finite("power", power)?;
    check_finite("gain", gain)?;
    if power < T::zero() {
        return Err(invalid(format!("power must be non-negative, got {power}")));
    }
    if gain <= T::zero() {
        return Err(invalid(format!("gain must be positive, got {gain}")));
    }
    let b = params.subcarrier_bandwidth();
    Ok(b * (power * gain / (b * params.noise_psd)).log2_1p())
}

/// Packet error probability of an uplink transmission over Rayleigh fading.
///
/// Zero power yields the limit value 1.
pub fn packet_error<T: Scalar>(power: T, gain: T, params: &SystemParams<T>) -> Result<T> {
    check_finite("power", power)?;
    check_finite("gain", gain)?;
    let m = params.waterfall_threshold;
    if m < T::zero() {
        return Err(invalid(format!("waterfall threshold must be non-negative, got {m}")));
    }
    if power < T::zero() || gain <= T::zero() {
        return Err(invalid(format!("need power >= 0 and gain > 0, got {power}, {gain}")));
    }
    if power == T::zero() {
        return Ok(T::one());
    }
    let b = params.subcarrier_bandwidth();
    Ok(-(-(m * b * params.noise_psd) / (power * gain)).exp_m1())
}

/// Evaluates the full cost model for `alloc`, rejecting allocations that
/// violate any constraint of the joint problem.
pub fn evaluate<T: Scalar>(scenario: &Scenario<T>, alloc: &Allocation<T>) -> Result<CostBreakdown<T>> {
    let params = &scenario.params;
    let j_count = scenario.num_orgs();
    let rtol = T::feasibility_rtol();
    validate_shape(scenario, alloc)?;

    let mut per_org = Vec::with_capacity(j_count);
    for (j, org) in scenario.orgs.iter().enumerate() {
        let bands = &alloc.sensor_bandwidths[j];
        let mut band_sum = T::zero();
        let mut receive_time = T::zero();
        let mut sensor_energy = T::zero();
        for (k, (sensor, &bw)) in org.sensors.iter().zip(bands).enumerate() {
            if !(bw >= T::zero()) {
                return Err(infeasible(format!("sensor {k} of org {j} has bandwidth {bw}")));
            }
            band_sum = band_sum + bw;
            let rate = sensor_rate(bw, sensor.channel_gain, params)?;
            if rate <= T::zero() {
                return Err(infeasible(format!("sensor {k} of org {j} cannot upload with zero bandwidth")));
            }
            let t_k = sensor.data_size / rate;
            receive_time = receive_time.max(t_k);
            sensor_energy = sensor_energy
                + params.sensor_max_power * sensor.data_size
                    / (params.sbs_bandwidth * sensor_snr(sensor.channel_gain, params).log2_1p());
        }
        if !approx_le(band_sum, params.sbs_bandwidth, rtol) {
            return Err(infeasible(format!(
                "org {j} allocates {band_sum} Hz over its budget {}",
                params.sbs_bandwidth
            )));
        }

        let data = org.data_total();
        let f = alloc.frequencies[j];
        if !(f >= T::zero()) || !approx_le(f, params.sbs_max_freq, rtol) {
            return Err(infeasible(format!("org {j} frequency {f} outside [0, {}]", params.sbs_max_freq)));
        }
        let (compute_time, compute_energy) = if data > T::zero() {
            if f == T::zero() {
                return Err(infeasible(format!("org {j} has data but zero CPU frequency")));
            }
            (params.cycles_per_bit * data / f, params.switched_capacitance * params.cycles_per_bit * data * f * f)
        } else {
            (T::zero(), T::zero())
        };

        let p = alloc.powers[j];
        if !(p >= T::zero()) || !approx_le(p, params.sbs_max_power, rtol) {
            return Err(infeasible(format!("org {j} power {p} outside [0, {}]", params.sbs_max_power)));
        }
        if p == T::zero() {
            return Err(infeasible(format!("org {j} has zero uplink power (infinite upload time)")));
        }
        let gain = org.uplink_gains[alloc.assignment[j]];
        let upload_time = params.model_size / uplink_rate(p, gain, params)?;
        per_org.push(OrgCost {
            receive_time,
            compute_time,
            upload_time,
            compute_energy,
            upload_energy: p * upload_time,
            sensor_energy,
            error_rate: packet_error(p, gain, params)?,
        });
    }

    let t_one = per_org.iter().map(OrgCost::total_time).fold(T::zero(), T::max);
    let e_one = per_org.iter().map(|c| c.compute_energy + c.upload_energy).sum();
    let c_learn = scenario.orgs.iter().zip(&per_org).map(|(org, c)| org.data_total() * c.error_rate).sum();
    let (c_system, c_total) = combine_costs(params, t_one, e_one, c_learn);
    Ok(CostBreakdown { t_one, e_one, c_learn, c_system, c_total, per_org })
}

/// Weighted system cost and total cost from the three raw components.
pub fn combine_costs<T: Scalar>(params: &SystemParams<T>, t_one: T, e_one: T, c_learn: T) -> (T, T) {
    let c_system = params.alpha * t_one + (T::one() - params.alpha) * e_one;
    let c_total = params.rho * c_system + (T::one() - params.rho) * c_learn;
    (c_system, c_total)
}

fn validate_shape<T: Scalar>(scenario: &Scenario<T>, alloc: &Allocation<T>) -> Result<()> {
    let j_count = scenario.num_orgs();
    if alloc.sensor_bandwidths.len() != j_count
        || alloc.frequencies.len() != j_count
        || alloc.powers.len() != j_count
        || alloc.assignment.len() != j_count
    {
        return Err(invalid(format!("allocation does not cover all {j_count} organizations")));
    }
    for (j, (org, bands)) in scenario.orgs.iter().zip(&alloc.sensor_bandwidths).enumerate() {
        if org.sensors.len() != bands.len() {
            return Err(invalid(format!(
                "org {j} has {} sensors but {} bandwidth entries",
                org.sensors.len(),
                bands.len()
            )));
        }
    }
    let mut used = vec![false; j_count];
    for (j, &n) in alloc.assignment.iter().enumerate() {
        if n >= j_count || used[n] {
            return Err(infeasible(format!("assignment is not a permutation (org {j} -> {n})")));
        }
        used[n] = true;
    }
    Ok(())
}
