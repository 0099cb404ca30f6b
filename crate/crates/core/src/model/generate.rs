use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, Point, SensorSpec, Strategy};
use crate::canonical::quantize;
use crate::error::{Error, Result};

/// Parameters for [`generate_instance`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub m: usize,
    pub width: f64,
    pub height: f64,
    pub len_min: f64,
    pub len_max: f64,
    pub speed: f64,
    pub period: f64,
    pub n_sensors: usize,
    pub strategy: Strategy,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            m: 10,
            width: 100.0,
            height: 100.0,
            len_min: 1.0,
            len_max: 10.0,
            speed: 1.0,
            period: 20.0,
            n_sensors: 0,
            strategy: Strategy::Stationary,
        }
    }
}

const SENSOR_STREAM_BASE: u64 = 1 << 40;

/// ChaCha8 keyed by `seed`, one stream per generated entity so that the
/// sensor count never perturbs segment geometry.
fn entity_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Random instance: uniform lengths and orientations, midpoints uniform over
/// the positions where the whole segment fits inside the box. Coordinates
/// are stored at file precision so the result round-trips through disk.
pub fn generate_instance(p: &GenParams) -> Result<Instance> {
    let bad = |msg: String| Err(Error::Parameter(msg));
    if p.m == 0 {
        return bad("segment count must be at least 1".into());
    }
    if !(p.width > 0.0 && p.height > 0.0 && p.width.is_finite() && p.height.is_finite()) {
        return bad(format!(
            "bbox must be positive, got {}x{}",
            p.width, p.height
        ));
    }
    if !(p.len_min > 0.0 && p.len_min <= p.len_max && p.len_max.is_finite()) {
        return bad(format!(
            "length range must satisfy 0 < min <= max, got [{}, {}]",
            p.len_min, p.len_max
        ));
    }
    if p.len_max > p.width.min(p.height) {
        return bad(format!(
            "max length {} does not fit a {}x{} box in every orientation",
            p.len_max, p.width, p.height
        ));
    }

    let endpoints: Vec<(Point, Point)> = (0..p.m as u64)
        .map(|i| {
            let mut rng = entity_rng(p.seed, i);
            let len = rng.gen_range(p.len_min..=p.len_max);
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            let (dx, dy) = (len * theta.cos() / 2.0, len * theta.sin() / 2.0);
            let (hx, hy) = (dx.abs(), dy.abs());
            let cx = hx + rng.gen::<f64>() * (p.width - 2.0 * hx);
            let cy = hy + rng.gen::<f64>() * (p.height - 2.0 * hy);
            let snap = |v: f64, hi: f64| quantize(v).clamp(0.0, hi);
            (
                Point::new(snap(cx - dx, p.width), snap(cy - dy, p.height)),
                Point::new(snap(cx + dx, p.width), snap(cy + dy, p.height)),
            )
        })
        .collect();

    let lengths: Vec<f64> = endpoints.iter().map(|(a, b)| a.dist(*b)).collect();
    let sensors = (0..p.n_sensors)
        .map(|j| {
            let mut rng = entity_rng(p.seed, SENSOR_STREAM_BASE + j as u64);
            let segment_id = rng.gen_range(0..p.m);
            let len = lengths[segment_id];
            let offset0 = quantize(rng.gen::<f64>() * len).clamp(0.0, len);
            SensorSpec {
                id: j,
                segment_id,
                offset0,
                strategy: p.strategy,
            }
        })
        .collect();

    Instance::new(endpoints, p.speed, p.period, sensors)
}
