//! Round selection, patrol pieces and mule trajectories.
//!
//! Every Euler path of the chosen forest is cut into equal pieces no longer
//! than `V·t`. Two mules start at the ends of each piece, walk inward until
//! they meet in the middle, walk back, and repeat with period `ℓ/V`.

mod coverage;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::canonical;
use crate::error::{Error, Result};
use crate::euler::{build_euler_path, point_at_clamped, EulerPath};
use crate::forest::{compute_connectors, Component, Components, ForestRound, Sweep, Tree};
use crate::model::{Instance, Point};

pub use coverage::{verify_point_coverage, PointCoverage, PointCoverageReport, DEFAULT_SAMPLES};

/// How many pieces a tree's path is cut into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMode {
    /// `⌈L(E)/Vt⌉`, from the actual path length.
    #[default]
    Tight,
    /// `⌈2·L(T)/Vt⌉`, the looser bound.
    Step5,
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Tight => "tight",
            CountMode::Step5 => "step5",
        })
    }
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tight" => Ok(CountMode::Tight),
            "step5" => Ok(CountMode::Step5),
            other => Err(Error::Parameter(format!(
                "unknown count mode {other:?}, expected tight or step5"
            ))),
        }
    }
}

fn ceil_count(x: f64) -> u64 {
    (x.ceil() as u64).max(1)
}

/// Number of pieces for one tree of weight `weight` whose Euler path is
/// `euler_length` long.
pub fn piece_count(mode: CountMode, weight: f64, euler_length: f64, reach: f64) -> u64 {
    match mode {
        CountMode::Tight => ceil_count(euler_length / reach),
        CountMode::Step5 => ceil_count(2.0 * weight / reach),
    }
}

fn tree_euler_length(tree: &Tree, inst: &Instance) -> f64 {
    let removed = match tree.heaviest_connector() {
        Some(c) => c.length,
        None => inst.segment(tree.segment_ids[0]).length,
    };
    2.0 * tree.weight - removed
}

fn component_mules(c: &Component, mode: CountMode, reach: f64) -> u64 {
    2 * piece_count(mode, c.weight, c.euler_length(), reach)
}

/// Mule count `n_k` of one materialized round.
pub fn count_round(round: &ForestRound, inst: &Instance, mode: CountMode) -> u64 {
    round
        .trees
        .iter()
        .map(|t| 2 * piece_count(mode, t.weight, tree_euler_length(t, inst), inst.reach()))
        .sum()
}

/// `n_1 … n_M` in one incremental pass over the accepted connectors.
pub fn round_counts(inst: &Instance, sweep: &Sweep, mode: CountMode) -> Vec<u64> {
    let reach = inst.reach();
    let mut comps = Components::new(inst);
    let mut n: u64 = (0..inst.m())
        .map(|s| component_mules(&comps.component(s), mode, reach))
        .sum();
    let mut counts = Vec::with_capacity(inst.m());
    counts.push(n);
    for c in sweep.accepted() {
        let (a, b, merged) = comps
            .merge(c)
            .expect("accepted connectors never close a cycle");
        n = n - component_mules(&a, mode, reach) - component_mules(&b, mode, reach)
            + component_mules(&merged, mode, reach);
        counts.push(n);
    }
    counts
}

/// 1-based round with the fewest mules; the earliest round wins ties.
pub fn select_round(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &n) in counts.iter().enumerate() {
        if n < counts[best] {
            best = i;
        }
    }
    best + 1
}

/// One equal-length stretch `[s_start, s_end]` of an Euler path, swept by
/// two mules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatrolPiece {
    pub s_start: f64,
    pub s_end: f64,
    /// Stationed at `s_start` at time 0.
    pub mule_left: usize,
    /// Stationed at `s_end` at time 0.
    pub mule_right: usize,
}

impl PatrolPiece {
    pub fn len(&self) -> f64 {
        self.s_end - self.s_start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.s_start + self.s_end)
    }

    /// Seconds between successive returns to a station.
    pub fn sweep_period(&self, speed: f64) -> f64 {
        self.len() / speed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedTree {
    pub tree: Tree,
    pub euler: EulerPath,
    pub pieces: Vec<PatrolPiece>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCount {
    pub k: usize,
    pub n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Where a mule lives in the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MuleSlot {
    pub tree: usize,
    pub piece: usize,
    pub side: Side,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    /// SHA-256 of the canonical instance file the plan was built from.
    pub instance_ref: String,
    pub count_mode: CountMode,
    pub speed: f64,
    pub period: f64,
    pub round_j: usize,
    pub mule_count: u64,
    pub all_rounds_n: Vec<RoundCount>,
    pub trees: Vec<PlannedTree>,
}

pub fn instance_ref(inst: &Instance) -> String {
    let digest = Sha256::digest(inst.to_canonical_json().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Cuts `path` into `count` equal pieces, numbering mules from `first_mule`.
pub fn partition_path(path: &EulerPath, count: u64, first_mule: usize) -> Vec<PatrolPiece> {
    let total = path.total_length;
    let piece = total / count as f64;
    (0..count as usize)
        .map(|i| PatrolPiece {
            s_start: i as f64 * piece,
            s_end: if i + 1 == count as usize {
                total
            } else {
                (i + 1) as f64 * piece
            },
            mule_left: first_mule + 2 * i,
            mule_right: first_mule + 2 * i + 1,
        })
        .collect()
}

/// Builds the full deployment for `inst`.
pub fn make_plan(inst: &Instance, mode: CountMode) -> Result<DeploymentPlan> {
    let connectors = compute_connectors(inst);
    let sweep = Sweep::new(inst, &connectors);
    drop(connectors);
    let counts = round_counts(inst, &sweep, mode);
    let round_j = select_round(&counts);
    let round = sweep.round(inst, round_j);

    let mut trees = Vec::with_capacity(round.trees.len());
    let mut next_mule = 0;
    for tree in round.trees {
        let euler = build_euler_path(&tree, inst)?;
        let count = piece_count(
            mode,
            tree.weight,
            tree_euler_length(&tree, inst),
            inst.reach(),
        );
        let pieces = partition_path(&euler, count, next_mule);
        next_mule += 2 * pieces.len();
        trees.push(PlannedTree {
            tree,
            euler,
            pieces,
        });
    }
    let mule_count = next_mule as u64;
    if mule_count != counts[round_j - 1] {
        return Err(Error::Internal(format!(
            "deployed {mule_count} mules but round {round_j} counted {}",
            counts[round_j - 1]
        )));
    }
    Ok(DeploymentPlan {
        instance_ref: instance_ref(inst),
        count_mode: mode,
        speed: inst.speed(),
        period: inst.period(),
        round_j,
        mule_count,
        all_rounds_n: counts
            .iter()
            .enumerate()
            .map(|(i, &n)| RoundCount { k: i + 1, n })
            .collect(),
        trees,
    })
}

impl DeploymentPlan {
    pub fn reach(&self) -> f64 {
        self.speed * self.period
    }

    pub fn pieces(&self) -> impl Iterator<Item = (usize, &PatrolPiece)> {
        self.trees
            .iter()
            .enumerate()
            .flat_map(|(t, pt)| pt.pieces.iter().map(move |p| (t, p)))
    }

    pub fn locate(&self, mule_id: usize) -> Result<MuleSlot> {
        let mut first = 0;
        for (t, pt) in self.trees.iter().enumerate() {
            let span = 2 * pt.pieces.len();
            if mule_id < first + span {
                let local = mule_id - first;
                return Ok(MuleSlot {
                    tree: t,
                    piece: local / 2,
                    side: if local.is_multiple_of(2) {
                        Side::Left
                    } else {
                        Side::Right
                    },
                });
            }
            first += span;
        }
        Err(Error::UnknownMule(mule_id))
    }

    /// Tree index holding `segment_id`.
    pub fn tree_of(&self, segment_id: usize) -> Option<usize> {
        self.trees.iter().position(|t| t.tree.contains(segment_id))
    }

    /// Errors unless the plan was built from `inst`.
    pub fn check_instance(&self, inst: &Instance) -> Result<()> {
        let expected = instance_ref(inst);
        if self.instance_ref != expected {
            return Err(Error::Mismatch(format!(
                "plan was built for instance {} but this instance hashes to {}",
                self.instance_ref, expected
            )));
        }
        let covered: usize = self.trees.iter().map(|t| t.tree.segment_ids.len()).sum();
        if covered != inst.m() {
            return Err(Error::Mismatch(format!(
                "plan covers {covered} segments, instance has {}",
                inst.m()
            )));
        }
        Ok(())
    }

    pub fn to_canonical_json(&self) -> String {
        canonical::to_string(self)
    }
}

pub fn save_plan(plan: &DeploymentPlan, path: &Path) -> Result<()> {
    canonical::write_file(plan, path)
}

pub fn load_plan(path: &Path) -> Result<DeploymentPlan> {
    canonical::read_file(path, "plan")
}

/// Distance from the station after `tau` seconds on a piece of length
/// `len`: a triangle wave reaching `len/2` at half period.
pub fn excursion(len: f64, speed: f64, tau: f64) -> f64 {
    let period = len / speed;
    if period <= 0.0 {
        return 0.0;
    }
    let phase = tau.rem_euclid(period);
    (speed * phase.min(period - phase)).clamp(0.0, 0.5 * len)
}

/// Arc position on the mule's Euler path and physical location at time
/// `tau`.
pub fn mule_position(plan: &DeploymentPlan, mule_id: usize, tau: f64) -> Result<(f64, Point)> {
    if !(tau >= 0.0) {
        return Err(Error::Parameter(format!(
            "time must be non-negative, got {tau}"
        )));
    }
    let slot = plan.locate(mule_id)?;
    let planned = &plan.trees[slot.tree];
    let piece = &planned.pieces[slot.piece];
    let d = excursion(piece.len(), plan.speed, tau);
    let arc = match slot.side {
        Side::Left => piece.s_start + d,
        Side::Right => piece.s_end - d,
    };
    Ok((arc, point_at_clamped(&planned.euler, arc)))
}

/// Lower bound `Σ⌈L(T)/Vt⌉` over the chosen forest and the ratio of the
/// deployed count to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lower_bound: u64,
    pub mule_count: u64,
    pub ratio: f64,
}

pub fn approximation_report(plan: &DeploymentPlan) -> BoundReport {
    let reach = plan.reach();
    let lower_bound: u64 = plan
        .trees
        .iter()
        .map(|t| ceil_count(t.tree.weight / reach))
        .sum();
    BoundReport {
        lower_bound,
        mule_count: plan.mule_count,
        ratio: plan.mule_count as f64 / lower_bound as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::forest_rounds;

    fn collinear(segs: &[(f64, f64)], speed: f64, period: f64) -> Instance {
        Instance::new(
            segs.iter()
                .map(|&(a, b)| (Point::new(a, 0.0), Point::new(b, 0.0))),
            speed,
            period,
            vec![],
        )
        .unwrap()
    }

    fn three_collinear() -> Instance {
        collinear(&[(0.0, 1.0), (2.0, 3.0), (5.0, 6.0)], 1.0, 5.0)
    }

    #[test]
    fn piece_count_arithmetic() {
        assert_eq!(2 * piece_count(CountMode::Tight, 1.0, 1.0, 5.0), 2);
        assert_eq!(2 * piece_count(CountMode::Step5, 1.0, 1.0, 5.0), 2);
        assert_eq!(2 * piece_count(CountMode::Tight, 10.0, 18.0, 5.0), 8);
        assert_eq!(2 * piece_count(CountMode::Step5, 10.0, 18.0, 5.0), 8);
    }

    #[test]
    fn three_collinear_counts() {
        let inst = three_collinear();
        let connectors = compute_connectors(&inst);
        let sweep = Sweep::new(&inst, &connectors);
        let counts = round_counts(&inst, &sweep, CountMode::Tight);
        assert_eq!(counts, vec![6, 4, 4]);
        assert_eq!(select_round(&counts), 2);
        let rounds = forest_rounds(&inst, &connectors);
        let recount: Vec<u64> = rounds
            .iter()
            .map(|r| count_round(r, &inst, CountMode::Tight))
            .collect();
        assert_eq!(recount, counts);
    }

    #[test]
    fn single_segment_forces_round_one() {
        let inst = collinear(&[(0.0, 4.0)], 1.0, 5.0);
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        assert_eq!(plan.round_j, 1);
        assert_eq!(plan.mule_count, 2);
        let p = plan.trees[0].pieces[0];
        assert_eq!(
            (p.s_start, p.s_end, p.mule_left, p.mule_right),
            (0.0, 4.0, 0, 1)
        );
        let report = approximation_report(&plan);
        assert_eq!(
            (report.lower_bound, report.mule_count, report.ratio),
            (1, 2, 2.0)
        );
    }

    #[test]
    fn far_apart_short_segments_stay_separate() {
        // reach 10; segments of length 4 spaced 20 apart
        let inst = collinear(
            &[(0.0, 4.0), (24.0, 28.0), (48.0, 52.0), (72.0, 76.0)],
            2.0,
            5.0,
        );
        let connectors = compute_connectors(&inst);
        let counts = round_counts(&inst, &Sweep::new(&inst, &connectors), CountMode::Tight);
        assert!(counts[1..].iter().all(|&n| n > counts[0]), "{counts:?}");
        assert_eq!(select_round(&counts), 1);
    }

    #[test]
    fn three_collinear_plan() {
        let inst = three_collinear();
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        assert_eq!(plan.round_j, 2);
        assert_eq!(plan.mule_count, 4);
        assert_eq!(plan.trees.len(), 2);
        assert_eq!(plan.trees[0].euler.total_length, 5.0);
        let p0 = plan.trees[0].pieces.as_slice();
        assert_eq!(p0.len(), 1);
        assert_eq!((p0[0].s_start, p0[0].s_end), (0.0, 5.0));
        let p1 = plan.trees[1].pieces.as_slice();
        assert_eq!((p1[0].s_start, p1[0].s_end), (0.0, 1.0));
        assert_eq!((p1[0].mule_left, p1[0].mule_right), (2, 3));
        let bound = approximation_report(&plan);
        assert_eq!((bound.lower_bound, bound.ratio), (2, 2.0));
    }

    #[test]
    fn partition_into_equal_pieces() {
        let inst = collinear(&[(0.0, 3.0), (4.0, 6.0)], 1.0, 5.0);
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        // L(T) = 6, L(E) = 11 in round 2 -> 3 pieces; round 1 needs 2 + 2
        assert_eq!(plan.round_j, 1);
        let path = build_euler_path(
            &forest_rounds(&inst, &compute_connectors(&inst))[1].trees[0],
            &inst,
        )
        .unwrap();
        assert_eq!(path.total_length, 11.0);
        let pieces = partition_path(&path, 2, 0);
        let bounds: Vec<_> = pieces.iter().map(|p| (p.s_start, p.s_end)).collect();
        assert_eq!(bounds, vec![(0.0, 5.5), (5.5, 11.0)]);
        let mules: Vec<_> = pieces
            .iter()
            .flat_map(|p| [p.mule_left, p.mule_right])
            .collect();
        assert_eq!(mules, vec![0, 1, 2, 3]);
    }

    #[test]
    fn triangle_wave_positions() {
        let inst = three_collinear();
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        assert_eq!(mule_position(&plan, 0, 2.5).unwrap().0, 2.5);
        assert_eq!(mule_position(&plan, 1, 2.5).unwrap().0, 2.5);
        assert_eq!(mule_position(&plan, 0, 5.0).unwrap().0, 0.0);
        assert_eq!(mule_position(&plan, 0, 1.0).unwrap().0, 1.0);
        assert_eq!(mule_position(&plan, 0, 4.0).unwrap().0, 1.0);
        assert!(matches!(
            mule_position(&plan, 4, 0.0),
            Err(Error::UnknownMule(4))
        ));
        assert!(mule_position(&plan, 0, -1.0).is_err());
    }

    #[test]
    fn mirrored_right_mule() {
        let piece = PatrolPiece {
            s_start: 5.0,
            s_end: 10.0,
            mule_left: 0,
            mule_right: 1,
        };
        assert_eq!(piece.s_end - excursion(piece.len(), 1.0, 1.0), 9.0);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("step5".parse::<CountMode>().unwrap(), CountMode::Step5);
        assert!("loose".parse::<CountMode>().is_err());
    }

    #[test]
    fn plan_round_trips_through_json() {
        let inst = three_collinear();
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        let text = plan.to_canonical_json();
        let back: DeploymentPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);
        back.check_instance(&inst).unwrap();
        let other = collinear(&[(0.0, 1.0)], 1.0, 5.0);
        assert!(matches!(
            back.check_instance(&other),
            Err(Error::Mismatch(_))
        ));
    }
}
