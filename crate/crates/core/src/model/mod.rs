//! Geometry, the problem instance and its file format.

mod generate;
mod geometry;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::canonical;
use crate::error::{Error, Result};

pub use generate::{generate_instance, GenParams};
pub use geometry::{End, Point, RoadSegment, GEOMETRIC_EPS};

/// How a sensor moves along its segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum Strategy {
    Stationary,
    /// Random targets on the segment, approached at a random speed up to
    /// `v_max`, each followed by a pause of at most `pause_max` seconds.
    Waypoint {
        seed: u64,
        v_max: f64,
        pause_max: f64,
    },
    /// Every `decision_interval` seconds, run at `v_max` away from the
    /// nearest mule.
    Adversarial {
        v_max: f64,
        decision_interval: f64,
    },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Stationary => "stationary",
            Strategy::Waypoint { .. } => "waypoint",
            Strategy::Adversarial { .. } => "adversarial",
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        match *self {
            Strategy::Stationary => Ok(()),
            Strategy::Waypoint {
                v_max, pause_max, ..
            } => {
                positive("v_max", v_max)?;
                if pause_max.is_finite() && pause_max >= 0.0 {
                    Ok(())
                } else {
                    Err(format!("pause_max must be non-negative, got {pause_max}"))
                }
            }
            Strategy::Adversarial {
                v_max,
                decision_interval,
            } => {
                positive("v_max", v_max)?;
                positive("decision_interval", decision_interval)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub id: usize,
    pub segment_id: usize,
    pub offset0: f64,
    pub strategy: Strategy,
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    segments: Vec<RoadSegment>,
    speed: f64,
    period: f64,
    sensors: Vec<SensorSpec>,
}

impl Instance {
    /// Validates and builds an instance. Segment ids are assigned by
    /// position.
    pub fn new(
        endpoints: impl IntoIterator<Item = (Point, Point)>,
        speed: f64,
        period: f64,
        sensors: Vec<SensorSpec>,
    ) -> Result<Self> {
        let segments = endpoints
            .into_iter()
            .enumerate()
            .map(|(id, (a, b))| RoadSegment::new(id, a, b))
            .collect();
        let inst = Instance {
            segments,
            speed,
            period,
            sensors,
        };
        inst.validate().map_err(Error::Validation)?;
        Ok(inst)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return Err(format!("speed must be positive, got {}", self.speed));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(format!("period must be positive, got {}", self.period));
        }
        if self.segments.is_empty() {
            return Err("at least one segment is required".into());
        }
        for seg in &self.segments {
            if !seg.a.is_finite() || !seg.b.is_finite() {
                return Err(format!("segment {} has non-finite coordinates", seg.id));
            }
            if seg.length < GEOMETRIC_EPS {
                return Err(format!("zero-length segment {}", seg.id));
            }
        }
        let mut seen = vec![false; self.sensors.len()];
        for sensor in &self.sensors {
            match seen.get_mut(sensor.id) {
                Some(slot) if !*slot => *slot = true,
                _ => {
                    return Err(format!(
                        "sensor ids must be unique and contiguous, found {}",
                        sensor.id
                    ))
                }
            }
            let seg = self.segments.get(sensor.segment_id).ok_or_else(|| {
                format!(
                    "sensor {} references unknown segment {}",
                    sensor.id, sensor.segment_id
                )
            })?;
            if !(sensor.offset0 >= 0.0 && sensor.offset0 <= seg.length) {
                return Err(format!(
                    "sensor {} offset {} outside [0, {}] of segment {}",
                    sensor.id, sensor.offset0, seg.length, seg.id
                ));
            }
            sensor
                .strategy
                .validate()
                .map_err(|e| format!("sensor {}: {e}", sensor.id))?;
        }
        Ok(())
    }

    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn segment(&self, id: usize) -> &RoadSegment {
        &self.segments[id]
    }

    /// Number of road segments, `M`.
    pub fn m(&self) -> usize {
        self.segments.len()
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Distance a mule covers in one period, `V·t`.
    pub fn reach(&self) -> f64 {
        self.speed * self.period
    }

    pub fn sensors(&self) -> &[SensorSpec] {
        &self.sensors
    }

    /// Returns a copy with every sensor's strategy replaced.
    pub fn with_strategy(&self, strategy: Strategy) -> Result<Self> {
        let sensors = self
            .sensors
            .iter()
            .map(|s| SensorSpec { strategy, ..*s })
            .collect();
        let inst = Instance {
            sensors,
            ..self.clone()
        };
        inst.validate().map_err(Error::Validation)?;
        Ok(inst)
    }

    pub fn to_canonical_json(&self) -> String {
        canonical::to_string(&InstanceFile::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|source| Error::Parse {
            what: "instance",
            source,
        })?;
        file.try_into()
    }
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let file: InstanceFile = canonical::read_file(path, "instance")?;
    file.try_into()
}

pub fn save_instance(inst: &Instance, path: &Path) -> Result<()> {
    canonical::write_file(&InstanceFile::from(inst), path)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    speed: f64,
    period: f64,
    segments: Vec<SegmentRecord>,
    #[serde(default)]
    sensors: Vec<SensorSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRecord {
    id: usize,
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
}

impl From<&Instance> for InstanceFile {
    fn from(inst: &Instance) -> Self {
        InstanceFile {
            speed: inst.speed,
            period: inst.period,
            segments: inst
                .segments
                .iter()
                .map(|s| SegmentRecord {
                    id: s.id,
                    ax: s.a.x,
                    ay: s.a.y,
                    bx: s.b.x,
                    by: s.b.y,
                })
                .collect(),
            sensors: inst.sensors.clone(),
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        for (pos, rec) in file.segments.iter().enumerate() {
            if rec.id != pos {
                return Err(Error::Validation(format!(
                    "segment ids must be contiguous from 0, found id {} at position {pos}",
                    rec.id
                )));
            }
        }
        Instance::new(
            file.segments
                .iter()
                .map(|r| (Point::new(r.ax, r.ay), Point::new(r.bx, r.by))),
            file.speed,
            file.period,
            file.sensors,
        )
    }
}
