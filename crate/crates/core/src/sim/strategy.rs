//! Sensor motion, one linear leg at a time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Point, RoadSegment, Strategy};

/// Straight-line motion along the segment between two instants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub t0: f64,
    pub t1: f64,
    pub offset0: f64,
    pub offset1: f64,
}

impl Leg {
    pub fn offset_at(&self, t: f64) -> f64 {
        if self.t1 <= self.t0 {
            return self.offset1;
        }
        let u = ((t - self.t0) / (self.t1 - self.t0)).clamp(0.0, 1.0);
        self.offset0 + (self.offset1 - self.offset0) * u
    }
}

/// Mutable per-sensor state carried between legs.
#[derive(Debug, Clone)]
pub struct SensorState {
    pub time: f64,
    pub offset: f64,
    rng: ChaCha8Rng,
    pause_next: bool,
}

impl SensorState {
    /// `seed` and `stream` key the waypoint generator; other strategies
    /// ignore them.
    pub fn new(offset: f64, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        SensorState {
            time: 0.0,
            offset,
            rng,
            pause_next: false,
        }
    }
}

/// Direction (+1 toward B, −1 toward A) that increases the distance to
/// `threat` along the segment.
fn flee_direction(seg: &RoadSegment, offset: f64, threat: Point) -> f64 {
    let here = seg.point_at(offset);
    let along = (threat - here).dot(seg.direction());
    if along > 0.0 {
        -1.0
    } else if along < 0.0 {
        1.0
    } else if threat.dist(seg.a) >= threat.dist(seg.b) {
        -1.0
    } else {
        1.0
    }
}

/// Produces the sensor's next leg, starting at `state.time` and ending no
/// later than `t_max`, and advances `state` to its end. `mules` are the
/// physical mule positions at `state.time`.
pub fn step_strategy(
    strategy: &Strategy,
    seg: &RoadSegment,
    state: &mut SensorState,
    t_max: f64,
    mules: &[Point],
) -> Leg {
    let (t0, x0) = (state.time, state.offset);
    let len = seg.length;
    let leg = match *strategy {
        Strategy::Stationary => Leg {
            t0,
            t1: t_max,
            offset0: x0,
            offset1: x0,
        },
        Strategy::Waypoint {
            v_max, pause_max, ..
        } => {
            if state.pause_next {
                state.pause_next = false;
                let pause = state.rng.gen::<f64>() * pause_max;
                Leg {
                    t0,
                    t1: (t0 + pause).min(t_max),
                    offset0: x0,
                    offset1: x0,
                }
            } else {
                state.pause_next = true;
                let target = state.rng.gen::<f64>() * len;
                let speed = v_max * state.rng.gen_range(0.1..=1.0);
                let t1 = t0 + (target - x0).abs() / speed;
                if t1 <= t_max {
                    Leg {
                        t0,
                        t1,
                        offset0: x0,
                        offset1: target,
                    }
                } else {
                    let reached = x0 + (target - x0).signum() * speed * (t_max - t0);
                    Leg {
                        t0,
                        t1: t_max,
                        offset0: x0,
                        offset1: reached,
                    }
                }
            }
        }
        Strategy::Adversarial {
            v_max,
            decision_interval,
        } => {
            let here = seg.point_at(x0);
            let threat = mules
                .iter()
                .copied()
                .min_by(|a, b| a.dist(here).total_cmp(&b.dist(here)));
            let t_end = (t0 + decision_interval).min(t_max);
            match threat {
                None => Leg {
                    t0,
                    t1: t_end,
                    offset0: x0,
                    offset1: x0,
                },
                Some(threat) => {
                    let dir = flee_direction(seg, x0, threat);
                    let room = if dir > 0.0 { len - x0 } else { x0 };
                    let t_wall = t0 + room / v_max;
                    if room > 0.0 && t_wall < t_end {
                        // stop at the end of the segment; the next decision
                        // starts from there
                        Leg {
                            t0,
                            t1: t_wall,
                            offset0: x0,
                            offset1: if dir > 0.0 { len } else { 0.0 },
                        }
                    } else {
                        Leg {
                            t0,
                            t1: t_end,
                            offset0: x0,
                            offset1: (x0 + dir * v_max * (t_end - t0)).clamp(0.0, len),
                        }
                    }
                }
            }
        }
    };
    state.time = leg.t1;
    state.offset = leg.offset1.clamp(0.0, len);
    leg
}
