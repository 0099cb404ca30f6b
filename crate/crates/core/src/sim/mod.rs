//! Continuous-time replay of a plan against moving sensors.
//!
//! Between breakpoints every mule and every sensor moves in a straight line
//! at constant speed, so the closest approach of each pair on each interval
//! is the minimum of a quadratic. A contact is any time the pair is within
//! the contact radius; overlapping contacts merge into one visit stamped at
//! the start of the window.

mod strategy;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::deploy::{mule_position, DeploymentPlan, Side};
use crate::error::{Error, Result};
use crate::euler::point_at_clamped;
use crate::model::{Instance, Point, SensorSpec, Strategy};

pub use strategy::{step_strategy, Leg, SensorState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: f64,
    pub contact_radius: f64,
    pub max_step: f64,
    pub warmup: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults for period `t`: horizon `5t`, radius 1 mm, step `t/1000`.
    pub fn for_period(period: f64) -> Self {
        SimConfig {
            horizon: 5.0 * period,
            contact_radius: 1e-3,
            max_step: period / 1000.0,
            warmup: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self, period: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        if !(self.horizon >= 2.0 * period) || !self.horizon.is_finite() {
            return bad(format!(
                "horizon {} must be at least twice the period {period}",
                self.horizon
            ));
        }
        if !(self.contact_radius > 0.0) {
            return bad(format!(
                "contact radius must be positive, got {}",
                self.contact_radius
            ));
        }
        if !(self.max_step > 0.0) {
            return bad(format!("max step must be positive, got {}", self.max_step));
        }
        if !(self.warmup >= 0.0 && self.warmup < self.horizon) {
            return bad(format!("warmup {} must lie in [0, horizon)", self.warmup));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorCoverage {
    pub id: usize,
    pub segment_id: usize,
    pub strategy: String,
    pub first_visit: Option<f64>,
    pub max_gap: f64,
    pub visit_count: usize,
    pub pass: bool,
    #[serde(skip)]
    pub visit_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub period: f64,
    pub tolerance: f64,
    pub sensors: Vec<SensorCoverage>,
    pub violations: usize,
    pub pass: bool,
}

impl SimReport {
    pub fn to_canonical_json(&self) -> String {
        canonical::to_string(self)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        canonical::write_file(self, path)
    }
}

/// Piecewise-linear motion through `(time, point)` knots.
#[derive(Debug, Clone)]
pub struct Track {
    pub knots: Vec<(f64, Point)>,
}

impl Track {
    fn bbox(&self) -> (Point, Point) {
        self.knots.iter().fold(
            (
                Point::new(f64::INFINITY, f64::INFINITY),
                Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), &(_, p)| {
                (
                    Point::new(lo.x.min(p.x), lo.y.min(p.y)),
                    Point::new(hi.x.max(p.x), hi.y.max(p.y)),
                )
            },
        )
    }
}

/// Knots of one mule over `[0, horizon]`: every station departure, every
/// polyline vertex crossing and every turnaround.
pub fn mule_track(plan: &DeploymentPlan, mule_id: usize, horizon: f64) -> Result<Track> {
    let slot = plan.locate(mule_id)?;
    let planned = &plan.trees[slot.tree];
    let piece = planned.pieces[slot.piece];
    let speed = plan.speed;
    let half = 0.5 * piece.len();
    let cycle = piece.len() / speed;
    let mid = piece.midpoint();
    let station = match slot.side {
        Side::Left => piece.s_start,
        Side::Right => piece.s_end,
    };
    // distances from the station to interior polyline vertices, ascending
    let mut inner: Vec<f64> = planned
        .euler
        .vertex_arcs_between(piece.s_start.min(mid), piece.s_end.max(mid))
        .map(|s| (s - station).abs())
        .filter(|&d| d > 0.0 && d < half)
        .collect();
    inner.sort_by(f64::total_cmp);
    let arc = |d: f64| match slot.side {
        Side::Left => piece.s_start + d,
        Side::Right => piece.s_end - d,
    };

    let mut knots = Vec::new();
    let mut n = 0u64;
    loop {
        let base = n as f64 * cycle;
        if base > horizon {
            break;
        }
        knots.push((base, station));
        knots.extend(inner.iter().map(|&d| (base + d / speed, arc(d))));
        knots.push((base + 0.5 * cycle, mid));
        knots.extend(
            inner
                .iter()
                .rev()
                .map(|&d| (base + cycle - d / speed, arc(d))),
        );
        n += 1;
    }
    knots.push((n as f64 * cycle, station));
    Ok(Track {
        knots: knots
            .into_iter()
            .map(|(t, s)| (t, point_at_clamped(&planned.euler, s)))
            .collect(),
    })
}

/// Runs the sensor's strategy to `horizon`; returns its legs.
pub fn sensor_legs(
    inst: &Instance,
    plan: &DeploymentPlan,
    sensor: &SensorSpec,
    config: &SimConfig,
) -> Result<Vec<Leg>> {
    let seg = inst.segment(sensor.segment_id);
    let stream_seed = match sensor.strategy {
        Strategy::Waypoint { seed, .. } => seed ^ config.seed.rotate_left(32),
        _ => config.seed,
    };
    let mut state = SensorState::new(sensor.offset0, stream_seed, sensor.id as u64);
    let needs_mules = matches!(sensor.strategy, Strategy::Adversarial { .. });
    let mut legs: Vec<Leg> = Vec::new();
    let mut mules = Vec::new();
    let mut stalled = 0;
    while state.time < config.horizon {
        mules.clear();
        if needs_mules {
            for id in 0..plan.mule_count as usize {
                mules.push(mule_position(plan, id, state.time)?.1);
            }
        }
        let leg = step_strategy(&sensor.strategy, seg, &mut state, config.horizon, &mules);
        if leg.t1 > leg.t0 {
            stalled = 0;
            legs.push(leg);
            continue;
        }
        // instantaneous legs (a wall hit within one ulp, an empty pause)
        // only update the offset
        stalled += 1;
        if stalled > 8 {
            return Err(Error::Internal(format!(
                "sensor {} strategy made no progress at t={}",
                sensor.id, leg.t0
            )));
        }
        if let Some(last) = legs.last_mut() {
            last.offset1 = state.offset;
        }
    }
    Ok(legs)
}

fn sensor_track(inst: &Instance, sensor: &SensorSpec, legs: &[Leg]) -> Track {
    let seg = inst.segment(sensor.segment_id);
    let mut knots = Vec::with_capacity(legs.len() + 1);
    knots.push((0.0, seg.point_at(sensor.offset0)));
    for leg in legs {
        if leg.t1 > knots[knots.len() - 1].0 {
            knots.push((leg.t1, seg.point_at(leg.offset1)));
        }
    }
    Track { knots }
}

/// Sub-interval of `[0, 1]` where `|r0 + u·(r1 − r0)| ≤ radius`.
pub fn contact_interval(r0: Point, r1: Point, radius: f64) -> Option<(f64, f64)> {
    let d = r1 - r0;
    let a = d.dot(d);
    let b = 2.0 * r0.dot(d);
    let c = r0.dot(r0) - radius * radius;
    if a <= f64::EPSILON * c.abs().max(radius * radius) {
        return (c <= 0.0).then_some((0.0, 1.0));
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let lo = ((-b - root) / (2.0 * a)).max(0.0);
    let hi = ((-b + root) / (2.0 * a)).min(1.0);
    (lo <= hi).then_some((lo, hi))
}

fn interpolate(knots: &[(f64, Point)], idx: usize, t: f64) -> Point {
    let (t0, p0) = knots[idx];
    match knots.get(idx + 1) {
        Some(&(t1, p1)) if t1 > t0 => p0.lerp(p1, ((t - t0) / (t1 - t0)).clamp(0.0, 1.0)),
        _ => p0,
    }
}

/// Contact windows of one mule/sensor pair over `[0, horizon]`, on the
/// merged breakpoint grid of both tracks and multiples of `max_step`.
pub fn contact_windows(mule: &Track, sensor: &Track, config: &SimConfig) -> Vec<(f64, f64)> {
    let (mk, sk) = (&mule.knots, &sensor.knots);
    let mut windows: Vec<(f64, f64)> = Vec::new();
    let (mut i, mut j, mut g) = (0usize, 0usize, 1u64);
    let mut t = 0.0;
    while t < config.horizon {
        while i + 1 < mk.len() && mk[i + 1].0 <= t {
            i += 1;
        }
        while j + 1 < sk.len() && sk[j + 1].0 <= t {
            j += 1;
        }
        while (g as f64) * config.max_step <= t {
            g += 1;
        }
        let mut next = (g as f64 * config.max_step).min(config.horizon);
        if let Some(&(tm, _)) = mk.get(i + 1) {
            next = next.min(tm);
        }
        if let Some(&(ts, _)) = sk.get(j + 1) {
            next = next.min(ts);
        }
        let r0 = interpolate(mk, i, t) - interpolate(sk, j, t);
        let r1 = interpolate(mk, i, next) - interpolate(sk, j, next);
        if let Some((lo, hi)) = contact_interval(r0, r1, config.contact_radius) {
            let (w0, w1) = (t + lo * (next - t), t + hi * (next - t));
            match windows.last_mut() {
                Some(last) if w0 <= last.1 => last.1 = last.1.max(w1),
                _ => windows.push((w0, w1)),
            }
        }
        t = next;
    }
    windows
}

/// Merges overlapping windows and returns their start times, clipped to
/// `warmup`.
fn coalesce(mut windows: Vec<(f64, f64)>, warmup: f64) -> Vec<f64> {
    windows.retain(|w| w.1 >= warmup);
    windows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for w in windows {
        match merged.last_mut() {
            Some(last) if w.0 <= last.1 => last.1 = last.1.max(w.1),
            _ => merged.push(w),
        }
    }
    merged.into_iter().map(|w| w.0.max(warmup)).collect()
}

/// Largest wait including the lead-in from `warmup` and the tail to
/// `horizon`.
pub fn max_gap(visits: &[f64], warmup: f64, horizon: f64) -> f64 {
    let Some((&first, &last)) = visits.first().zip(visits.last()) else {
        return horizon - warmup;
    };
    visits
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold((first - warmup).max(horizon - last), f64::max)
}

fn boxes_overlap(a: (Point, Point), b: (Point, Point), pad: f64) -> bool {
    a.0.x - pad <= b.1.x && b.0.x - pad <= a.1.x && a.0.y - pad <= b.1.y && b.0.y - pad <= a.1.y
}

/// Replays `plan` against every sensor of `inst`.
pub fn simulate(inst: &Instance, plan: &DeploymentPlan, config: &SimConfig) -> Result<SimReport> {
    plan.check_instance(inst)?;
    config.validate(inst.period())?;
    let tracks: Vec<Track> = (0..plan.mule_count as usize)
        .map(|id| mule_track(plan, id, config.horizon))
        .collect::<Result<_>>()?;
    let boxes: Vec<_> = tracks.iter().map(Track::bbox).collect();
    let tolerance = config.max_step;

    let mut sensors = Vec::with_capacity(inst.sensors().len());
    for sensor in inst.sensors() {
        let legs = sensor_legs(inst, plan, sensor, config)?;
        let track = sensor_track(inst, sensor, &legs);
        let seg = inst.segment(sensor.segment_id);
        let seg_box = (
            Point::new(seg.a.x.min(seg.b.x), seg.a.y.min(seg.b.y)),
            Point::new(seg.a.x.max(seg.b.x), seg.a.y.max(seg.b.y)),
        );
        let mut windows = Vec::new();
        for (mule, bbox) in tracks.iter().zip(&boxes) {
            if boxes_overlap(*bbox, seg_box, config.contact_radius) {
                windows.extend(contact_windows(mule, &track, config));
            }
        }
        let visits = coalesce(windows, config.warmup);
        let gap = max_gap(&visits, config.warmup, config.horizon);
        sensors.push(SensorCoverage {
            id: sensor.id,
            segment_id: sensor.segment_id,
            strategy: sensor.strategy.name().to_string(),
            first_visit: visits.first().copied(),
            max_gap: gap,
            visit_count: visits.len(),
            pass: gap <= inst.period() + tolerance,
            visit_times: visits,
        });
    }
    let violations = sensors.iter().filter(|s| !s.pass).count();
    Ok(SimReport {
        config: *config,
        period: inst.period(),
        tolerance,
        sensors,
        violations,
        pass: violations == 0,
    })
}
