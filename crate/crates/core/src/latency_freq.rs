//! Round latency bound and MEC frequencies for fixed powers and subcarriers.
//!
//! With powers and the assignment fixed, each organization needs
//! `f_j = eps D_j / (T - a_j - t_up_j)` to finish by `T`, and the problem
//! collapses to the scalar convex program
//!
//! ```text
//! min_T  rho alpha T + rho (1 - alpha) kappa eps^3 sum_j D_j^3 / (T - a_j - t_up_j)^2
//! s.t.   T >= t_min = max_j (a_j + t_up_j + eps D_j / f_max)
//! ```
//!
//! whose derivative is increasing in `T`, so the optimum is either `t_min` or
//! the root of the derivative found by bisection.

use crate::error::{infeasible, invalid, Error, Result};
use crate::model::{uplink_rate, Scenario};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyFreqSolution<T> {
    pub latency_bound: T,
    pub frequencies: Vec<T>,
    pub t_min: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatencyOptions<T> {
    /// Used as the latency bound when `alpha = 0` makes the problem unbounded.
    pub t_cap: Option<T>,
    /// Skip the optimization and bind every constraint at `t_min`.
    pub pin_t_min: bool,
    /// Relative bracket width at which bisection stops.
    pub bisection_rtol: T,
}

impl<T: Scalar> Default for LatencyOptions<T> {
    fn default() -> Self {
        Self { t_cap: None, pin_t_min: false, bisection_rtol: T::lit(1e-15) }
    }
}

/// Upload time of every organization on its assigned subcarrier.
pub fn upload_times<T: Scalar>(scenario: &Scenario<T>, powers: &[T], assignment: &[usize]) -> Result<Vec<T>> {
    let params = &scenario.params;
    if powers.len() != scenario.num_orgs() || assignment.len() != scenario.num_orgs() {
        return Err(invalid("powers and assignment must cover every organization"));
    }
    scenario
        .orgs
        .iter()
        .zip(powers.iter().zip(assignment))
        .map(|(org, (&p, &n))| {
            let gain = *org.uplink_gains.get(n).ok_or_else(|| invalid(format!("subcarrier {n} out of range")))?;
            let rate = uplink_rate(p, gain, params)?;
            if rate <= T::zero() {
                return Err(infeasible(format!("org {} transmits with zero power", org.id)));
            }
            Ok(params.model_size / rate)
        })
        .collect()
}

/// Computation load `eps D_j` (cycles) of every organization.
fn workloads<T: Scalar>(scenario: &Scenario<T>) -> Vec<T> {
    scenario.orgs.iter().map(|o| scenario.params.cycles_per_bit * o.data_total()).collect()
}

/// Smallest latency bound reachable with every MEC server at full speed.
pub fn compute_t_min<T: Scalar>(scenario: &Scenario<T>, receive_times: &[T], upload_times: &[T]) -> T {
    let f_max = scenario.params.sbs_max_freq;
    workloads(scenario)
        .iter()
        .zip(receive_times.iter().zip(upload_times))
        .map(|(&w, (&a, &up))| a + up + w / f_max)
        .fold(T::neg_infinity(), T::max)
}

/// Objective of the scalar latency problem: latency term plus the compute
/// energy of running every server at the slowest speed that meets `t`.
pub fn objective<T: Scalar>(t: T, scenario: &Scenario<T>, receive_times: &[T], upload_times: &[T]) -> T {
    let p = &scenario.params;
    let energy: T = workloads(scenario)
        .iter()
        .zip(receive_times.iter().zip(upload_times))
        .filter(|(&w, _)| w > T::zero())
        .map(|(&w, (&a, &up))| {
            let f = w / (t - a - up);
            p.switched_capacitance * w * f * f
        })
        .sum();
    p.rho * p.alpha * t + p.rho * (T::one() - p.alpha) * energy
}

/// Derivative of [`objective`] with respect to the latency bound.
///
/// Defined only above every pole `a_j + t_up_j` of an organization with data.
pub fn g_of_t<T: Scalar>(t: T, scenario: &Scenario<T>, receive_times: &[T], upload_times: &[T]) -> Result<T> {
    let p = &scenario.params;
    let mut cubes = T::zero();
    for (j, (&w, (&a, &up))) in workloads(scenario).iter().zip(receive_times.iter().zip(upload_times)).enumerate() {
        if w == T::zero() {
            continue;
        }
        let slack = t - a - up;
        if !(slack > T::zero()) {
            return Err(Error::Domain(format!("T = {t} is at or below the pole {} of org {j}", a + up)));
        }
        let f = w / slack;
        cubes = cubes + f * f * f;
    }
    let two = T::lit(2.0);
    Ok(p.rho * p.alpha - two * p.rho * (T::one() - p.alpha) * p.switched_capacitance * cubes)
}

/// Optimal latency bound and CPU frequencies for the given powers and
/// subcarrier assignment.
pub fn solve<T: Scalar>(
    scenario: &Scenario<T>,
    powers: &[T],
    assignment: &[usize],
    receive_times: &[T],
    opts: &LatencyOptions<T>,
) -> Result<LatencyFreqSolution<T>> {
    if receive_times.len() != scenario.num_orgs() {
        return Err(invalid("receive_times must cover every organization"));
    }
    let up = upload_times(scenario, powers, assignment)?;
    let t_min = compute_t_min(scenario, receive_times, &up);
    let latency_bound = optimal_latency(scenario, receive_times, &up, t_min, opts)?;
    Ok(LatencyFreqSolution {
        latency_bound,
        frequencies: frequencies_for(scenario, receive_times, &up, latency_bound),
        t_min,
    })
}

/// Slowest frequencies that meet `latency_bound`, clipped to the hardware cap.
pub fn frequencies_for<T: Scalar>(
    scenario: &Scenario<T>,
    receive_times: &[T],
    upload_times: &[T],
    latency_bound: T,
) -> Vec<T> {
    let f_max = scenario.params.sbs_max_freq;
    workloads(scenario)
        .iter()
        .zip(receive_times.iter().zip(upload_times))
        .map(|(&w, (&a, &up))| if w == T::zero() { T::zero() } else { (w / (latency_bound - a - up)).min(f_max) })
        .collect()
}

fn optimal_latency<T: Scalar>(
    scenario: &Scenario<T>,
    receive_times: &[T],
    up: &[T],
    t_min: T,
    opts: &LatencyOptions<T>,
) -> Result<T> {
    let p = &scenario.params;
    if opts.pin_t_min || p.rho == T::zero() {
        return Ok(t_min);
    }
    let has_energy = p.alpha < T::one() && scenario.orgs.iter().any(|o| !o.sensors.is_empty());
    if !has_energy {
        return Ok(t_min);
    }
    if p.alpha == T::zero() {
        return match opts.t_cap {
            Some(cap) if cap >= t_min => Ok(cap),
            Some(cap) => Err(infeasible(format!("latency cap {cap} is below t_min = {t_min}"))),
            None => Err(Error::Unbounded(
                "alpha = 0 makes the compute energy decrease forever in T; supply a latency cap".into(),
            )),
        };
    }
    let g = |t: T| g_of_t(t, scenario, receive_times, up);
    if g(t_min)? >= T::zero() {
        return Ok(t_min);
    }

    // g -> rho alpha > 0 as T grows, so doubling the offset terminates.
    let mut offset = t_min * T::lit(1e-12);
    let mut hi = t_min + offset;
    while g(hi)? <= T::zero() {
        offset = offset + offset;
        hi = t_min + offset;
        if !hi.is_finite() {
            return Err(Error::Domain("failed to bracket the latency optimum".into()));
        }
    }
    let mut lo = t_min;
    let (mut g_lo, mut g_hi) = (g(lo)?, g(hi)?);
    while hi - lo > opts.bisection_rtol * hi {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm == T::zero() {
            return Ok(mid);
        }
        if gm < T::zero() {
            lo = mid;
            g_lo = gm;
        } else {
            hi = mid;
            g_hi = gm;
        }
    }
    Ok(if g_hi.abs() <= g_lo.abs() { hi } else { lo })
}
