//! Network layouts and channel realizations.
//!
//! The MBS sits at the origin. SBS positions and sensor positions depend only
//! on the layout seed; fading is drawn from a separate seed so that channels
//! can be redrawn per trial over a fixed geometry.

use fedalloc_core::{Organization64, Scenario64, Sensor64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::config::{GeneratorConfig, PathLoss};
use crate::error::Result;

/// Mixes `words` into a 64-bit seed (splitmix64 finalizer).
pub fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    words.iter().fold(mix(base), |acc, &w| mix(acc ^ mix(w.wrapping_add(0x9e37_79b9_7f4a_7c15))))
}

const LAYOUT_TAG: u64 = 1;
const FADING_TAG: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct OrgLayout {
    pub position: [f64; 2],
    pub sensor_positions: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub orgs: Vec<OrgLayout>,
}

fn point_in_annulus(rng: &mut impl Rng, center: [f64; 2], ring: [f64; 2]) -> [f64; 2] {
    // Uniform over the annulus area, not over the radius.
    let r = rng.random_range(ring[0] * ring[0]..=ring[1] * ring[1]).sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    [center[0] + r * theta.cos(), center[1] + r * theta.sin()]
}

pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Positions of every SBS and sensor. Organization `j` draws from its own
/// stream, so the first `J` organizations are the same for any larger count.
pub fn generate_layout(config: &GeneratorConfig, seed: u64) -> Result<Layout> {
    config.validate()?;
    let orgs = (0..config.num_orgs)
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[LAYOUT_TAG, j as u64]));
            let position = point_in_annulus(&mut rng, [0.0, 0.0], config.org_ring);
            let count = rng.random_range(config.sensors_per_org[0]..=config.sensors_per_org[1]);
            let sensor_positions =
                (0..count).map(|_| point_in_annulus(&mut rng, position, config.sensor_ring)).collect();
            OrgLayout { position, sensor_positions }
        })
        .collect();
    Ok(Layout { orgs })
}

/// Unit-mean exponential fading power, or 1 when fading is off.
fn fading(rng: &mut impl Rng, enabled: bool) -> f64 {
    if enabled {
        rng.sample(Exp1)
    } else {
        1.0
    }
}

/// Channel gains over a layout: `sensor[j][k]` for sensor `k` of
/// organization `j`, and `uplink[j][n]` for organization `j` on subcarrier `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Channels {
    pub sensor: Vec<Vec<f64>>,
    pub uplink: Vec<Vec<f64>>,
}

/// Draws every link gain. Each organization has its own fading stream.
pub fn draw_channels(path_loss: &PathLoss, with_fading: bool, layout: &Layout, fading_seed: u64) -> Channels {
    let j_count = layout.orgs.len();
    let mut sensor = Vec::with_capacity(j_count);
    let mut uplink = Vec::with_capacity(j_count);
    for (j, org) in layout.orgs.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(fading_seed, &[FADING_TAG, j as u64]));
        sensor.push(
            org.sensor_positions
                .iter()
                .map(|&pos| path_loss.gain(distance(pos, org.position)) * fading(&mut rng, with_fading))
                .collect(),
        );
        let mean = path_loss.gain(distance(org.position, [0.0, 0.0]));
        uplink.push((0..j_count).map(|_| mean * fading(&mut rng, with_fading)).collect());
    }
    Channels { sensor, uplink }
}

/// Scenario over `layout` with channels drawn from `fading_seed`.
pub fn realize(config: &GeneratorConfig, layout: &Layout, fading_seed: u64) -> Result<Scenario64> {
    config.validate()?;
    let channels = draw_channels(&config.path_loss, config.fading, layout, fading_seed);
    let orgs = layout
        .orgs
        .iter()
        .zip(channels.sensor)
        .zip(channels.uplink)
        .enumerate()
        .map(|(j, ((org, gains), uplink_gains))| {
            let sensors = org
                .sensor_positions
                .iter()
                .zip(gains)
                .map(|(&pos, gain)| Sensor64 { data_size: config.sensor_data, channel_gain: gain, position: Some(pos) })
                .collect();
            Organization64 { id: j, sensors, uplink_gains }
        })
        .collect();
    Ok(Scenario64::new(config.system_params(), orgs)?)
}

/// Layout and fading both drawn from `seed`.
pub fn generate_scenario(config: &GeneratorConfig, seed: u64) -> Result<Scenario64> {
    let layout = generate_layout(config, seed)?;
    realize(config, &layout, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scenario() {
        let c = GeneratorConfig::default();
        assert_eq!(generate_scenario(&c, 7).unwrap(), generate_scenario(&c, 7).unwrap());
        assert_ne!(generate_scenario(&c, 7).unwrap(), generate_scenario(&c, 8).unwrap());
    }

    #[test]
    fn geometry_respects_rings() {
        let c = GeneratorConfig::default();
        let layout = generate_layout(&c, 3).unwrap();
        assert_eq!(layout.orgs.len(), 10);
        for org in &layout.orgs {
            let r = distance(org.position, [0.0, 0.0]);
            assert!((200.0..=500.0).contains(&r));
            assert!((10..=20).contains(&org.sensor_positions.len()));
            for &s in &org.sensor_positions {
                let d = distance(s, org.position);
                assert!((5.0 - 1e-9..=50.0 + 1e-9).contains(&d));
            }
        }
    }

    #[test]
    fn layouts_nest_across_org_counts() {
        let small = GeneratorConfig { num_orgs: 4, ..Default::default() };
        let big = GeneratorConfig { num_orgs: 8, ..Default::default() };
        let a = generate_layout(&small, 11).unwrap();
        let b = generate_layout(&big, 11).unwrap();
        assert_eq!(a.orgs[..], b.orgs[..4]);
    }

    #[test]
    fn without_fading_gain_falls_with_distance() {
        let c = GeneratorConfig { fading: false, ..Default::default() };
        let s = generate_scenario(&c, 5).unwrap();
        let mut links: Vec<(f64, f64)> = s
            .orgs
            .iter()
            .flat_map(|o| {
                let center = [0.0, 0.0];
                let org_pos = generate_layout(&c, 5).unwrap().orgs[o.id].position;
                let up = (distance(org_pos, center), o.uplink_gains[0]);
                o.sensors.iter().map(move |x| (distance(x.position.unwrap(), org_pos), x.channel_gain)).chain([up])
            })
            .collect();
        links.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in links.windows(2) {
            if w[1].0 > w[0].0 {
                assert!(w[1].1 < w[0].1);
            }
        }
    }

    #[test]
    fn fading_has_unit_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let mean = (0..n).map(|_| fading(&mut rng, true)).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn distinct_links_are_uncorrelated() {
        let c = GeneratorConfig { num_orgs: 2, sensors_per_org: [1, 1], ..Default::default() };
        let layout = generate_layout(&c, 0).unwrap();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for t in 0..10_000u64 {
            let s = realize(&c, &layout, derive_seed(9, &[t])).unwrap();
            xs.push(s.orgs[0].uplink_gains[0]);
            ys.push(s.orgs[1].uplink_gains[1]);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (mx, my) = (mean(&xs), mean(&ys));
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        assert!((cov / (vx * vy).sqrt()).abs() < 0.05);
    }
}
