mod common;

use common::{log_uniform, rng};
use fedalloc_core::power_sca::p_min;
use fedalloc_core::{PowerProblem64, ScaParams, SystemParams64};
use proptest::prelude::*;
use rand::Rng;

/// Power problem at the reference weights with a random channel and deadline.
fn problem(seed: u64) -> PowerProblem64 {
    let mut r = rng(seed);
    let p = SystemParams64 { mbs_total_bandwidth: 3.125e6, ..SystemParams64::reference() };
    let gain = log_uniform(&mut r, 1e-15, 1e-11);
    let data = r.random_range(3e7..6e7);
    let b = p.subcarrier_bandwidth();
    let noise = b * p.noise_psd;
    let compute = p.cycles_per_bit * data / p.sbs_max_freq;
    let fastest = p.model_size / (b * (1.0 + p.sbs_max_power * gain / noise).log2());
    let latency = compute + fastest * r.random_range(1.0..20.0);
    let lo = p_min(latency, 0.0, p.sbs_max_freq, gain, data, &p).unwrap();
    PowerProblem64 {
        a: p.rho * (1.0 - p.alpha) * p.model_size / b,
        b: gain / noise,
        c: (1.0 - p.rho) * data,
        d: p.waterfall_threshold * noise / gain,
        p_min: lo.max(f64::MIN_POSITIVE),
        p_max: p.sbs_max_power,
        sca: ScaParams::default(),
        penalty: 1e12,
    }
}

fn grid_min(prob: &PowerProblem64, n: usize) -> (f64, bool) {
    let vals: Vec<f64> =
        (0..=n).map(|i| prob.h(prob.p_min + (prob.p_max - prob.p_min) * i as f64 / n as f64)).collect();
    let interior_minima = vals.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count();
    (vals.iter().copied().fold(f64::INFINITY, f64::min), interior_minima <= 1)
}

#[test]
fn sca_reaches_the_grid_minimum() {
    for seed in 0..80 {
        let prob = problem(seed);
        let mut r = rng(seed + 1000);
        let start = r.random_range(prob.p_min..=prob.p_max);
        let res = prob.optimize(start);
        assert!(res.feasible);
        assert!(res.power >= prob.p_min && res.power <= prob.p_max);
        assert!(res.objective <= prob.h(start));
        let (best, unimodal) = grid_min(&prob, 100_000);
        if unimodal {
            assert!(res.objective <= best + 1e-6 * (1.0 + best.abs()), "seed {seed}: {} vs {best}", res.objective);
        }
    }
}

#[test]
fn analytic_derivative_matches_differences() {
    for seed in 0..40 {
        let prob = problem(seed);
        for i in 0..100 {
            let p = prob.p_min + (prob.p_max - prob.p_min) * (i as f64 + 0.5) / 100.0;
            let e = 1e-3 * p;
            let fd = (8.0 * (prob.h(p + e) - prob.h(p - e)) - (prob.h(p + 2.0 * e) - prob.h(p - 2.0 * e))) / (12.0 * e);
            let an = prob.h_prime(p);
            let floor = 1e-12 * prob.h(p) / e;
            assert!((fd - an).abs() <= 1e-6 * an.abs() + floor, "seed {seed}, p = {p}: {fd} vs {an}");
        }
    }
}

#[test]
fn surrogate_touches_and_majorizes_nothing_it_should_not() {
    // The quadratic model agrees with h in value and slope at its anchor.
    let prob = problem(3);
    for &q in &[prob.p_min.max(0.01), 1.0, prob.p_max] {
        assert_eq!(prob.surrogate_g(q, q).unwrap(), prob.h(q));
        let e = 1e-6 * q;
        let slope = (prob.surrogate_g(q + e, q).unwrap() - prob.surrogate_g(q - e, q).unwrap()) / (2.0 * e);
        assert!((slope - prob.h_prime(q)).abs() <= 1e-6 * prob.h_prime(q).abs() + 1e-6);
    }
}

proptest! {
    #[test]
    fn warm_start_never_loses(seed in 0u64..5000, frac in 0.0f64..=1.0) {
        let prob = problem(seed);
        let start = prob.p_min + (prob.p_max - prob.p_min) * frac;
        let res = prob.optimize(start);
        prop_assert!(res.objective <= prob.h(start));
        let again = prob.optimize(res.power);
        prop_assert!(again.objective <= res.objective);
    }

    #[test]
    fn fixed_tau_stays_feasible_and_descends(seed in 0u64..5000, tau in 1e-3f64..1e3) {
        let mut prob = problem(seed);
        prob.sca.tau = Some(tau);
        let res = prob.optimize(prob.p_max);
        prop_assert!(res.power >= prob.p_min && res.power <= prob.p_max);
        prop_assert!(res.objective <= prob.h(prob.p_max));
    }
}
