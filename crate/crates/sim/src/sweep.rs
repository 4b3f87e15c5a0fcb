//! Monte Carlo parameter sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use fedalloc_core::{solve, Error as SolveError, Scheme, SolverOptions64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GeneratorConfig;
use crate::error::{HarnessError, Result};
use crate::generate::{derive_seed, generate_layout, realize};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FEDALLOC_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepParam {
    /// SBS bandwidth `B_j` (Hz).
    SbsBandwidth,
    /// SBS transmit power cap (dBm).
    SbsMaxPower,
    /// Data per sensor (bits).
    SensorDataSize,
    /// Number of organizations; the subcarrier width is held fixed.
    OrgCount,
    /// MBS bandwidth (Hz, same reading as the config).
    MbsBandwidth,
    /// MEC CPU frequency cap (Hz).
    MecCapacity,
    Rho,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::SbsBandwidth,
        SweepParam::SbsMaxPower,
        SweepParam::SensorDataSize,
        SweepParam::OrgCount,
        SweepParam::MbsBandwidth,
        SweepParam::MecCapacity,
        SweepParam::Rho,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::SbsBandwidth => "sbs-bandwidth",
            SweepParam::SbsMaxPower => "sbs-max-power",
            SweepParam::SensorDataSize => "sensor-data-size",
            SweepParam::OrgCount => "org-count",
            SweepParam::MbsBandwidth => "mbs-bandwidth",
            SweepParam::MecCapacity => "mec-capacity",
            SweepParam::Rho => "rho",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &GeneratorConfig, value: f64) -> Result<GeneratorConfig> {
        let mut c = base.clone();
        match self {
            SweepParam::SbsBandwidth => c.sbs_bandwidth = value,
            SweepParam::SbsMaxPower => c.sbs_power_dbm = value,
            SweepParam::SensorDataSize => c.sensor_data = value,
            SweepParam::OrgCount => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(HarnessError::InvalidConfig(format!(
                        "org count must be a positive integer, got {value}"
                    )));
                }
                let width = base.subcarrier_bandwidth();
                c.num_orgs = value as usize;
                c.mbs_bandwidth = if c.mbs_bandwidth_per_subcarrier { width } else { width * c.num_orgs as f64 };
            }
            SweepParam::MbsBandwidth => c.mbs_bandwidth = value,
            SweepParam::MecCapacity => c.mec_freq = value,
            SweepParam::Rho => c.rho = value,
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        SweepParam::ALL.into_iter().find(|p| p.name().replace('-', "") == key).ok_or_else(|| {
            let known: Vec<_> = SweepParam::ALL.iter().map(|p| p.name()).collect();
            HarnessError::InvalidConfig(format!("unknown sweep parameter '{s}', expected one of {known:?}"))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.values.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad(format!("sweep values must be finite, got {:?}", self.values));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return bad(format!("sweep values must be strictly monotone, got {:?}", self.values));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        Ok(())
    }
}

/// One solve of one scheme on one trial at one swept value. Cost fields are
/// `None` when the scheme found no feasible allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub scheme: String,
    pub parameter: String,
    pub value: f64,
    pub c_total: Option<f64>,
    pub c_system: Option<f64>,
    pub c_learn: Option<f64>,
    pub t_one: Option<f64>,
    pub e_one: Option<f64>,
    pub iterations: usize,
    pub wall_time_s: f64,
}

impl TrialRecord {
    pub fn is_feasible(&self) -> bool {
        self.c_total.is_some()
    }
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn thread_limit() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(HarnessError::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(HarnessError::InvalidConfig(format!("{THREADS_ENV}: {e}"))),
    }
}

/// Seed of the channel realization used by `trial`. Shared across swept
/// values so that every value sees the same channels.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    derive_seed(base_seed, &[0x7472_6961_6c00, trial as u64])
}

fn run_one(
    spec: &SweepSpec,
    config: &GeneratorConfig,
    opts: &SolverOptions64,
    base_seed: u64,
    value: f64,
    trial: usize,
) -> Result<Vec<TrialRecord>> {
    let layout = generate_layout(config, base_seed)?;
    let scenario = realize(config, &layout, trial_seed(base_seed, trial))?;
    spec.schemes
        .iter()
        .map(|&scheme| {
            let started = Instant::now();
            let mut record = TrialRecord {
                trial,
                scheme: scheme.name().to_string(),
                parameter: spec.parameter.name().to_string(),
                value,
                c_total: None,
                c_system: None,
                c_learn: None,
                t_one: None,
                e_one: None,
                iterations: 0,
                wall_time_s: 0.0,
            };
            match solve(scheme, &scenario, opts) {
                Ok(r) => {
                    record.c_total = Some(r.cost.c_total);
                    record.c_system = Some(r.cost.c_system);
                    record.c_learn = Some(r.cost.c_learn);
                    record.t_one = Some(r.cost.t_one);
                    record.e_one = Some(r.cost.e_one);
                    record.iterations = r.iterations;
                }
                Err(SolveError::Infeasible(_)) => {}
                Err(e) => return Err(e.into()),
            }
            record.wall_time_s = started.elapsed().as_secs_f64();
            Ok(record)
        })
        .collect()
}

/// Runs every (value, trial, scheme) combination. Records come back ordered
/// by value, then trial, then scheme in `spec.schemes` order, regardless of
/// how many threads ran them.
pub fn run_sweep(
    spec: &SweepSpec,
    config: &GeneratorConfig,
    base_seed: u64,
    opts: &SolverOptions64,
) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let configs: Vec<(f64, GeneratorConfig)> =
        spec.values.iter().map(|&v| spec.parameter.apply(config, v).map(|c| (v, c))).collect::<Result<_>>()?;
    let jobs: Vec<(f64, &GeneratorConfig, usize)> =
        configs.iter().flat_map(|(v, c)| (0..spec.trials).map(move |t| (*v, c, t))).collect();

    let work = || -> Result<Vec<TrialRecord>> {
        let nested: Vec<Vec<TrialRecord>> =
            jobs.par_iter().map(|&(v, c, t)| run_one(spec, c, opts, base_seed, v, t)).collect::<Result<_>>()?;
        Ok(nested.into_iter().flatten().collect())
    };
    match thread_limit()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::InvalidConfig(format!("cannot start {n} worker threads: {e}")))?
            .install(work),
        None => work(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GeneratorConfig {
        GeneratorConfig { num_orgs: 3, sensors_per_org: [2, 4], ..Default::default() }
    }

    #[test]
    fn param_names_parse() {
        for p in SweepParam::ALL {
            assert_eq!(p.name().parse::<SweepParam>().unwrap(), p);
        }
        assert_eq!("SbsBandwidth".parse::<SweepParam>().unwrap(), SweepParam::SbsBandwidth);
        assert_eq!("org_count".parse::<SweepParam>().unwrap(), SweepParam::OrgCount);
        assert!("gravity".parse::<SweepParam>().is_err());
    }

    #[test]
    fn org_count_keeps_subcarrier_width() {
        let base = GeneratorConfig::default();
        let c = SweepParam::OrgCount.apply(&base, 4.0).unwrap();
        assert_eq!(c.num_orgs, 4);
        assert!((c.subcarrier_bandwidth() - base.subcarrier_bandwidth()).abs() < 1e-6);
        assert!(SweepParam::OrgCount.apply(&base, 2.5).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec {
            parameter: SweepParam::Rho,
            values: vec![0.1, 0.5],
            trials: 1,
            schemes: vec![Scheme::Proposed],
        };
        assert!(s.validate().is_ok());
        s.values = vec![0.5, 0.1, 0.3];
        assert!(s.validate().is_err());
        s.values = vec![];
        assert!(s.validate().is_err());
        s.values = vec![0.5];
        s.trials = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn single_combination_gives_one_record() {
        let spec =
            SweepSpec { parameter: SweepParam::Rho, values: vec![0.5], trials: 1, schemes: vec![Scheme::Proposed] };
        let recs = run_sweep(&spec, &small(), 1, &SolverOptions64::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].is_feasible());
        assert_eq!(recs[0].scheme, "proposed");
        assert_eq!(recs[0].parameter, "rho");
    }

    #[test]
    fn record_order_is_value_trial_scheme() {
        let spec = SweepSpec {
            parameter: SweepParam::SbsBandwidth,
            values: vec![5e6, 1e7],
            trials: 2,
            schemes: vec![Scheme::TimeBiased, Scheme::Proposed],
        };
        let recs = run_sweep(&spec, &small(), 3, &SolverOptions64::default()).unwrap();
        let keys: Vec<(f64, usize, &str)> = recs.iter().map(|r| (r.value, r.trial, r.scheme.as_str())).collect();
        assert_eq!(
            keys,
            vec![
                (5e6, 0, "time-biased"),
                (5e6, 0, "proposed"),
                (5e6, 1, "time-biased"),
                (5e6, 1, "proposed"),
                (1e7, 0, "time-biased"),
                (1e7, 0, "proposed"),
                (1e7, 1, "time-biased"),
                (1e7, 1, "proposed"),
            ]
        );
    }
}
