//! Uplink power of one organization on one subcarrier.
//!
//! The per-organization cost
//!
//! ```text
//! h(p) = a p / log2(1 + b p) + c (1 - exp(-d / p))
//! ```
//!
//! trades upload energy against packet-error-weighted data loss and is not
//! convex in general. It is minimized over `[p_min, p_max]` by successive
//! convex approximation: each step minimizes the strongly convex quadratic
//! model `h(q) + h'(q)(p - q) + tau/2 (p - q)^2` in closed form and then
//! backtracks along the resulting direction with the Armijo rule.

use crate::error::{invalid, Error, Result};
use crate::model::{Scenario, SystemParams};
use crate::scalar::Scalar;

/// Tuning knobs of the SCA iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaParams<T> {
    /// Curvature of the quadratic surrogate. `None` picks one per problem
    /// from the curvature of `h` (see [`PowerProblem::tau_for`]).
    pub tau: Option<T>,
    /// Stop once an iterate moves less than this (W).
    pub tolerance: T,
    pub max_iterations: usize,
    /// Armijo shrink factor, in (0, 1).
    pub beta: T,
    /// Armijo sufficient-decrease constant, in (0, 0.5).
    pub sigma: T,
    /// Backtracking attempts before the step is declared zero.
    pub max_backtracks: usize,
}

impl<T: Scalar> Default for ScaParams<T> {
    fn default() -> Self {
        Self {
            tau: None,
            tolerance: T::lit(1e-8),
            max_iterations: 200,
            beta: T::lit(0.5),
            sigma: T::lit(0.1),
            max_backtracks: 60,
        }
    }
}

impl<T: Scalar> ScaParams<T> {
    pub fn validate(&self) -> Result<()> {
        if let Some(tau) = self.tau {
            if !(tau > T::zero() && tau.is_finite()) {
                return Err(invalid(format!("tau must be positive, got {tau}")));
            }
        }
        if !(self.beta > T::zero() && self.beta < T::one()) {
            return Err(invalid(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if !(self.sigma > T::zero() && self.sigma < T::lit(0.5)) {
            return Err(invalid(format!("sigma must lie in (0, 0.5), got {}", self.sigma)));
        }
        if !(self.tolerance > T::zero()) || self.max_iterations == 0 {
            return Err(invalid("tolerance must be positive and max_iterations at least 1"));
        }
        Ok(())
    }
}

/// Smallest power that uploads the model within what is left of the round
/// after receiving and computing.
///
/// Returns `None` when no power up to `p_max` meets the deadline. Values
/// within [`Scalar::feasibility_rtol`] above `p_max`
/// are accepted and clipped to `p_max`.
pub fn p_min<T: Scalar>(
    latency_bound: T,
    receive_time: T,
    frequency: T,
    gain: T,
    data_total: T,
    params: &SystemParams<T>,
) -> Option<T> {
    let compute_time = if data_total > T::zero() { params.cycles_per_bit * data_total / frequency } else { T::zero() };
    let budget = latency_bound - receive_time - compute_time;
    if !(budget > T::zero()) {
        return None;
    }
    let b = params.subcarrier_bandwidth();
    let exponent = params.model_size / (b * budget);
    let p = b * params.noise_psd / gain * (exponent * T::LN_2()).exp_m1();
    let p_max = params.sbs_max_power;
    if !p.is_finite() || p > p_max * (T::one() + T::feasibility_rtol()) {
        return None;
    }
    Some(p.min(p_max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerProblem<T> {
    /// Energy weight `rho (1 - alpha) D / B`.
    pub a: T,
    /// Linear SNR per watt `h / (B N0)`.
    pub b: T,
    /// Learning weight `(1 - rho) D_j`.
    pub c: T,
    /// Error scale `m B N0 / h`.
    pub d: T,
    pub p_min: T,
    pub p_max: T,
    pub sca: ScaParams<T>,
    /// Objective reported for infeasible problems.
    pub penalty: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult<T> {
    pub power: T,
    pub objective: T,
    pub iterations: usize,
    pub feasible: bool,
}

impl<T: Scalar> PowerProblem<T> {
    /// Power problem of organization `org` on subcarrier `subcarrier` given
    /// the latency bound and the organization's CPU frequency.
    #[allow(clippy::too_many_arguments)]
    pub fn for_pair(
        scenario: &Scenario<T>,
        org: usize,
        subcarrier: usize,
        latency_bound: T,
        frequency: T,
        receive_time: T,
        sca: ScaParams<T>,
        penalty: T,
    ) -> Self {
        let params = &scenario.params;
        let o = &scenario.orgs[org];
        let gain = o.uplink_gains[subcarrier];
        let data = o.data_total();
        let bw = params.subcarrier_bandwidth();
        let noise = bw * params.noise_psd;
        let p_lo = p_min(latency_bound, receive_time, frequency, gain, data, params);
        Self {
            a: params.rho * (T::one() - params.alpha) * params.model_size / bw,
            b: gain / noise,
            c: (T::one() - params.rho) * data,
            d: params.waterfall_threshold * noise / gain,
            // An empty interval marks the pair as infeasible.
            p_min: p_lo.map_or(T::infinity(), |p| p.max(T::min_positive_value())),
            p_max: params.sbs_max_power,
            sca,
            penalty,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.p_min <= self.p_max
    }

    /// `h(p)` without argument checks; `p` must be positive.
    pub fn h(&self, p: T) -> T {
        let energy = if self.a == T::zero() { T::zero() } else { self.a * p / (self.b * p).log2_1p() };
        let learning = if self.c == T::zero() { T::zero() } else { -self.c * (-self.d / p).exp_m1() };
        energy + learning
    }

    /// `h'(p)` without argument checks; `p` must be positive.
    pub fn h_prime(&self, p: T) -> T {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let bp = b * p;
        let l = bp.log2_1p();
        let energy = (a * l - a * bp / ((T::one() + bp) * T::LN_2())) / (l * l);
        let learning = c * d / (p * p) * (-d / p).exp();
        energy - learning
    }

    pub fn objective_h(&self, p: T) -> Result<T> {
        if !(p > T::zero()) {
            return Err(Error::Domain(format!("power must be positive, got {p}")));
        }
        Ok(self.h(p))
    }

    pub fn objective_h_prime(&self, p: T) -> Result<T> {
        if !(p > T::zero()) {
            return Err(Error::Domain(format!("power must be positive, got {p}")));
        }
        Ok(self.h_prime(p))
    }

    /// Surrogate curvature used when iterating from `start`.
    ///
    /// Without a fixed `tau` this is the smallest positive `|h''|` among
    /// `start` and points spread log-uniformly over the box. A small value
    /// only costs a few backtracking steps, a large one stalls the iteration.
    pub fn tau_for(&self, start: T) -> Result<T> {
        match self.sca.tau {
            Some(tau) if tau > T::zero() && tau.is_finite() => Ok(tau),
            Some(tau) => Err(invalid(format!("tau must be positive, got {tau}"))),
            None => {
                let curvature = |p: T| {
                    let e = p * T::lit(1e-4);
                    ((self.h_prime(p + e) - self.h_prime(p - e)) / (e + e)).abs()
                };
                let lo = self.p_min.max(T::min_positive_value());
                let hi = self.p_max.max(lo);
                let samples = 9;
                let ratio = (hi / lo).ln() / T::from_usize_lossy(samples - 1);
                let best = (0..samples)
                    .map(|i| lo * (ratio * T::from_usize_lossy(i)).exp())
                    .chain(std::iter::once(start))
                    .filter(|&p| p > T::zero() && p.is_finite())
                    .map(curvature)
                    .filter(|c| c.is_normal())
                    .fold(T::infinity(), T::min);
                Ok(if best.is_finite() { best } else { T::one() })
            }
        }
    }

    /// Quadratic model of `h` anchored at `p_prev`.
    pub fn surrogate_g(&self, p: T, p_prev: T) -> Result<T> {
        let tau = self.tau_for(p_prev)?;
        let step = p - p_prev;
        Ok(self.objective_h(p_prev)? + self.h_prime(p_prev) * step + tau / T::lit(2.0) * step * step)
    }

    /// Minimizer of [`surrogate_g`](Self::surrogate_g) over `[p_min, p_max]`.
    pub fn surrogate_argmin(&self, p_prev: T) -> Result<T> {
        Ok(self.clamp(p_prev - self.h_prime(p_prev) / self.tau_for(p_prev)?))
    }

    fn clamp(&self, p: T) -> T {
        p.max(self.p_min).min(self.p_max)
    }

    /// Runs the SCA iteration from `p_init` (clipped into the box).
    pub fn optimize(&self, p_init: T) -> PowerResult<T> {
        if !self.is_feasible() {
            return PowerResult { power: self.p_max, objective: self.penalty, iterations: 0, feasible: false };
        }
        let sca = &self.sca;
        let mut p = self.clamp(p_init);
        let mut value = self.h(p);
        let tau = self.tau_for(p).unwrap_or(T::one());
        let mut iterations = 0;
        while iterations < sca.max_iterations {
            iterations += 1;
            let slope = self.h_prime(p);
            let direction = self.clamp(p - slope / tau) - p;
            if direction.abs() < sca.tolerance {
                break;
            }
            let decrease = sca.sigma * slope * direction;
            let mut step = T::one();
            let mut accepted = None;
            for _ in 0..=sca.max_backtracks {
                let candidate = self.clamp(p + step * direction);
                let v = self.h(candidate);
                if v <= value + step * decrease {
                    accepted = Some((candidate, v));
                    break;
                }
                step = step * sca.beta;
            }
            let Some((next, next_value)) = accepted else { break };
            let moved = (next - p).abs();
            p = next;
            value = next_value;
            if moved < sca.tolerance {
                break;
            }
        }
        PowerResult { power: p, objective: value, iterations, feasible: true }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(a: f64, c: f64) -> PowerProblem<f64> {
        PowerProblem { a, b: 300.0, c, d: 2.0, p_min: 0.05, p_max: 5.0, sca: ScaParams::default(), penalty: 1e12 }
    }

    #[test]
    fn p_min_examples() {
        let params = SystemParams { num_orgs: 1, mbs_total_bandwidth: 1e5, ..SystemParams::<f64>::reference() };
        let gain = 1e-12;
        let noise = 1e5 * params.noise_psd;
        // budget chosen so D / (B budget) = 1: budget = 1e5 / 1e5 = 1 s.
        let p = p_min(1.5, 0.5, 0.0, gain, 0.0, &params).unwrap();
        assert!((p - noise / gain).abs() <= 1e-14 * p);
        let far = p_min(1e12, 0.5, 0.0, gain, 0.0, &params).unwrap();
        assert!(far < 1e-15);
        assert_eq!(p_min(0.5, 0.5, 0.0, gain, 0.0, &params), None);
        // Deadline reachable only above p_max.
        assert_eq!(p_min(0.51, 0.5, 0.0, gain, 0.0, &params), None);
    }

    #[test]
    fn weight_corners_of_objective() {
        let energy_only = problem(0.02, 0.0);
        let p = 1.3;
        assert!((energy_only.h(p) - 0.02 * p / (1.0 + 300.0 * p).log2()).abs() < 1e-15);
        assert!(energy_only.h_prime(p) > 0.0);

        let learning_only = problem(0.0, 1e3);
        assert!((learning_only.h(p) - 1e3 * (1.0 - (-2.0f64 / p).exp())).abs() < 1e-10);
        assert!(learning_only.h_prime(p) < 0.0);

        assert!(matches!(energy_only.objective_h(0.0), Err(Error::Domain(_))));
        assert!(matches!(energy_only.objective_h_prime(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn derivative_matches_central_difference() {
        let prob = problem(0.05, 40.0);
        for i in 1..100 {
            let p = 0.05 + 4.9 * i as f64 / 100.0;
            let e = 1e-3 * p;
            let fd = (8.0 * (prob.h(p + e) - prob.h(p - e)) - (prob.h(p + 2.0 * e) - prob.h(p - 2.0 * e))) / (12.0 * e);
            let an = prob.h_prime(p);
            // Floor: the roundoff any difference quotient of h carries at this step.
            let floor = 1e-12 * prob.h(p) / e;
            assert!((fd - an).abs() <= 1e-6 * an.abs() + floor, "p={p}: {fd} vs {an}");
        }
    }

    #[test]
    fn surrogate_anchoring_and_curvature() {
        let prob = problem(0.05, 40.0);
        let q = 1.7;
        assert_eq!(prob.surrogate_g(q, q).unwrap(), prob.h(q));
        let e = 1e-3;
        let second = (prob.surrogate_g(q + e, q).unwrap() - 2.0 * prob.surrogate_g(q, q).unwrap()
            + prob.surrogate_g(q - e, q).unwrap())
            / (e * e);
        assert!((second - prob.tau_for(q).unwrap()).abs() < 1e-4 * second.max(1.0));

        let mut bad = prob.clone();
        bad.sca.tau = Some(0.0);
        assert!(bad.surrogate_g(1.0, 1.0).is_err());
    }

    #[test]
    fn surrogate_argmin_matches_grid() {
        for (a, c, tau) in [(0.05, 40.0, Some(1.0)), (0.5, 0.1, None), (0.0, 3.0, None), (0.05, 40.0, None)] {
            let mut prob = problem(a, c);
            prob.sca.tau = tau;
            for &q in &[0.05, 0.3, 2.0, 4.99] {
                let best = (0..=20_000)
                    .map(|i| prob.p_min + (prob.p_max - prob.p_min) * i as f64 / 20_000.0)
                    .map(|p| (p, prob.surrogate_g(p, q).unwrap()))
                    .fold((f64::NAN, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
                let closed = prob.surrogate_argmin(q).unwrap();
                let at_closed = prob.surrogate_g(closed, q).unwrap();
                assert!(at_closed <= best.1 + 1e-9 * (1.0 + best.1.abs()), "a={a} c={c} q={q}: {closed} vs {}", best.0);
            }
        }
    }

    #[test]
    fn corners_converge_to_bounds() {
        let energy_only = problem(0.02, 0.0);
        let r = energy_only.optimize(3.0);
        assert!((r.power - energy_only.p_min).abs() < 1e-6);

        let learning_only = problem(0.0, 1e3);
        let r = learning_only.optimize(0.1);
        assert!((r.power - learning_only.p_max).abs() < 1e-6);
    }

    #[test]
    fn fixed_unit_tau_still_descends() {
        let mut prob = problem(0.05, 40.0);
        prob.sca.tau = Some(1.0);
        let r = prob.optimize(5.0);
        assert!(r.objective <= prob.h(5.0));
        assert!(r.power >= prob.p_min && r.power <= prob.p_max);
    }

    #[test]
    fn descent_and_box_feasibility() {
        let prob = problem(0.05, 40.0);
        for &start in &[0.05, 0.2, 1.0, 3.0, 5.0, 100.0] {
            let r = prob.optimize(start);
            assert!(r.feasible);
            assert!(r.power >= prob.p_min && r.power <= prob.p_max);
            let clipped = start.clamp(prob.p_min, prob.p_max);
            assert!(r.objective <= prob.h(clipped));
            assert_eq!(r.objective, prob.h(r.power));
        }
    }

    #[test]
    fn infeasible_problem_reports_penalty() {
        let mut prob = problem(0.05, 40.0);
        prob.p_min = f64::INFINITY;
        let r = prob.optimize(1.0);
        assert!(!r.feasible);
        assert_eq!(r.objective, 1e12);
    }
}
