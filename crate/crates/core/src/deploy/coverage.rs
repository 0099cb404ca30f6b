//! Closed-form visit times for points on the road network.
//!
//! A point at distance `d` from a piece station is passed by that station's
//! mule at `d/V` and `P − d/V` in every period `P = ℓ/V`. The largest
//! circular gap between all passes of all copies of the point is its
//! worst-case wait.

use serde::{Deserialize, Serialize};

use super::{DeploymentPlan, PatrolPiece};
use crate::euler::{segment_arc_positions, vertex_id, EdgeTag};
use crate::model::{End, Instance};

pub const DEFAULT_SAMPLES: usize = 64;

/// Absolute slack, in seconds, allowed on the period bound.
pub const GAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCoverage {
    pub segment_id: usize,
    pub offset: f64,
    pub max_gap: f64,
    /// Some copy of the point sits on a piece boundary.
    pub at_station: bool,
    /// Length of the covering pieces, equal across the point's tree.
    pub piece_length: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCoverageReport {
    pub period: f64,
    pub samples_per_segment: usize,
    pub max_gap: f64,
    pub violations: usize,
    pub pass: bool,
    pub points: Vec<PointCoverage>,
}

fn boundary_tolerance(piece_len: f64) -> f64 {
    1e-9 * piece_len.max(1.0)
}

/// Pieces whose closed interval contains `s`.
fn covering_pieces(pieces: &[PatrolPiece], s: f64) -> impl Iterator<Item = &PatrolPiece> {
    let tol = boundary_tolerance(pieces[0].len());
    let hi = pieces.partition_point(|p| p.s_start <= s + tol);
    let lo = hi.saturating_sub(2);
    pieces[lo..hi]
        .iter()
        .filter(move |p| s >= p.s_start - tol && s <= p.s_end + tol)
}

/// Largest gap between consecutive points of `times` on a circle of
/// circumference `period`.
pub fn circular_max_gap(times: &mut [f64], period: f64) -> f64 {
    if times.is_empty() {
        return f64::INFINITY;
    }
    times.sort_by(f64::total_cmp);
    let wrap = times[0] + period - times[times.len() - 1];
    times.windows(2).map(|w| w[1] - w[0]).fold(wrap, f64::max)
}

/// Offsets checked on one segment: `samples` interior midpoints, both ends,
/// and every place a piece boundary lands on the segment.
fn sample_offsets(
    plan: &DeploymentPlan,
    tree: usize,
    inst: &Instance,
    seg: usize,
    samples: usize,
) -> Vec<f64> {
    let len = inst.segment(seg).length;
    let mut offsets: Vec<f64> = (0..samples)
        .map(|i| (i as f64 + 0.5) * len / samples as f64)
        .chain([0.0, len])
        .collect();
    let planned = &plan.trees[tree];
    for step in &planned.euler.steps {
        if !matches!(step.edge, EdgeTag::Segment { segment, .. } if segment == seg) {
            continue;
        }
        let span = step.s_end - step.s_start;
        for piece in &planned.pieces {
            let s = piece.s_start;
            if s < step.s_start || s > step.s_end {
                continue;
            }
            let along = (s - step.s_start) / span * len;
            let offset = if step.from == vertex_id(seg, End::A) {
                along
            } else {
                len - along
            };
            offsets.push(offset.clamp(0.0, len));
        }
    }
    offsets.sort_by(f64::total_cmp);
    offsets.dedup();
    offsets
}

/// Checks that every sampled road point is passed by some mule at least
/// once per period.
pub fn verify_point_coverage(
    plan: &DeploymentPlan,
    inst: &Instance,
    samples_per_segment: usize,
) -> PointCoverageReport {
    let speed = plan.speed;
    let mut points = Vec::new();
    for seg in 0..inst.m() {
        let Some(tree) = plan.tree_of(seg) else {
            points.push(PointCoverage {
                segment_id: seg,
                offset: 0.0,
                max_gap: f64::INFINITY,
                at_station: false,
                piece_length: 0.0,
                pass: false,
            });
            continue;
        };
        let planned = &plan.trees[tree];
        let piece_length = planned.pieces[0].len();
        let cycle = piece_length / speed;
        let tol = boundary_tolerance(piece_length);
        for offset in sample_offsets(plan, tree, inst, seg, samples_per_segment) {
            let arcs = segment_arc_positions(&planned.euler, inst, seg, offset)
                .expect("segment belongs to its tree");
            let mut times = Vec::with_capacity(4 * arcs.len());
            let mut at_station = false;
            for &s in &arcs {
                for piece in covering_pieces(&planned.pieces, s) {
                    let from_left = (s - piece.s_start).max(0.0);
                    let from_right = (piece.s_end - s).max(0.0);
                    at_station |= from_left <= tol || from_right <= tol;
                    let d = from_left.min(from_right).min(0.5 * piece.len());
                    times.push((d / speed).rem_euclid(cycle));
                    times.push((cycle - d / speed).rem_euclid(cycle));
                }
            }
            let max_gap = circular_max_gap(&mut times, cycle);
            points.push(PointCoverage {
                segment_id: seg,
                offset,
                max_gap,
                at_station,
                piece_length,
                pass: max_gap <= plan.period + GAP_TOLERANCE,
            });
        }
    }
    let violations = points.iter().filter(|p| !p.pass).count();
    PointCoverageReport {
        period: plan.period,
        samples_per_segment,
        max_gap: points.iter().map(|p| p.max_gap).fold(0.0, f64::max),
        violations,
        pass: violations == 0,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deploy::{make_plan, CountMode};
    use crate::model::Point;

    /// Passes of a mule over arc `s` on a piece, found by scanning the
    /// triangle wave on a fine time grid.
    fn scanned_visits(piece: &PatrolPiece, speed: f64, s: f64, horizon: f64) -> Vec<f64> {
        let steps = 200_000;
        let dt = horizon / steps as f64;
        let mut hits = Vec::new();
        let mut prev = f64::NAN;
        for i in 0..=steps {
            let tau = i as f64 * dt;
            let d = crate::deploy::excursion(piece.len(), speed, tau);
            let left = piece.s_start + d - s;
            let right = piece.s_end - d - s;
            let near = left.abs().min(right.abs());
            if near <= 0.5 * speed * dt && !(tau - prev < 10.0 * dt) {
                hits.push(tau);
                prev = tau;
            }
        }
        hits
    }

    #[test]
    fn visit_times_match_triangle_wave() {
        let piece = PatrolPiece {
            s_start: 0.0,
            s_end: 5.0,
            mule_left: 0,
            mule_right: 1,
        };
        let hits = scanned_visits(&piece, 1.0, 1.25, 10.0);
        let expected = [1.25, 3.75, 6.25, 8.75];
        assert_eq!(hits.len(), expected.len(), "{hits:?}");
        for (h, e) in hits.iter().zip(expected) {
            assert!((h - e).abs() < 1e-3);
        }
        let mut times = vec![1.25, 3.75];
        assert_eq!(circular_max_gap(&mut times, 5.0), 2.5);
    }

    #[test]
    fn station_gap_is_the_period() {
        let mut times = vec![0.0, 5.0f64.rem_euclid(5.0)];
        assert_eq!(circular_max_gap(&mut times, 5.0), 5.0);
    }

    #[test]
    fn midpoint_is_passed_once_per_period() {
        let mut times = vec![2.5, 2.5];
        assert_eq!(circular_max_gap(&mut times, 5.0), 5.0);
    }

    #[test]
    fn three_collinear_passes_with_tight_stations() {
        let inst = Instance::new(
            [(0.0, 1.0), (2.0, 3.0), (5.0, 6.0)]
                .map(|(a, b)| (Point::new(a, 0.0), Point::new(b, 0.0))),
            1.0,
            5.0,
            vec![],
        )
        .unwrap();
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        let report = verify_point_coverage(&plan, &inst, DEFAULT_SAMPLES);
        assert!(report.pass);
        assert!(report.max_gap <= 5.0);
        let p = report
            .points
            .iter()
            .find(|p| p.segment_id == 0 && p.offset == 31.5 / 64.0)
            .expect("sample 31 of r0");
        // r0 is walked B->A on [0, 1] then A->B on [1, 2], so the point sits
        // at arcs 0.5078125 and 1.4921875 of the piece [0, 5]; passes at
        // 0.5078125, 1.4921875, 3.5078125, 4.4921875 leave a 2.015625 gap.
        assert!((p.max_gap - 2.015625).abs() < 1e-12, "{}", p.max_gap);
    }
}
