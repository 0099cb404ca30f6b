//! Euler paths over doubled trees.
//!
//! Every tree edge (segment or connector) is doubled so all degrees are
//! even, one copy of the heaviest connector is dropped, and Hierholzer's
//! algorithm walks the rest from one end of the dropped edge to the other.
//! A singleton tree drops one copy of its own segment, so its path is the
//! segment walked once from `A` to `B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::Tree;
use crate::model::{End, Instance, Point};

/// Vertex id of a segment endpoint: `2·segment + (0 for A, 1 for B)`.
pub fn vertex_id(segment: usize, end: End) -> usize {
    2 * segment + end.index()
}

fn vertex_point(inst: &Instance, vid: usize) -> Point {
    let end = if vid.is_multiple_of(2) {
        End::A
    } else {
        End::B
    };
    inst.segment(vid / 2).end(end)
}

/// Identity of one copy of a doubled tree edge. The derived order is the
/// traversal preference used by Hierholzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EdgeTag {
    Segment {
        segment: usize,
        copy: u8,
    },
    Connector {
        seg_i: usize,
        seg_j: usize,
        copy: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiEdge {
    pub tag: EdgeTag,
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

/// A tree with every edge present twice.
#[derive(Debug, Clone)]
pub struct DoubledMultigraph {
    /// Ascending vertex ids.
    pub vertices: Vec<usize>,
    /// Ascending by tag.
    pub edges: Vec<MultiEdge>,
}

impl DoubledMultigraph {
    pub fn new(tree: &Tree, inst: &Instance) -> Self {
        let mut vertices = Vec::with_capacity(2 * tree.segment_ids.len());
        let mut edges = Vec::with_capacity(2 * (tree.segment_ids.len() + tree.connectors.len()));
        for &s in &tree.segment_ids {
            let (u, v) = (vertex_id(s, End::A), vertex_id(s, End::B));
            vertices.extend([u, v]);
            for copy in 0..2 {
                edges.push(MultiEdge {
                    tag: EdgeTag::Segment { segment: s, copy },
                    u,
                    v,
                    length: inst.segment(s).length,
                });
            }
        }
        for c in &tree.connectors {
            for copy in 0..2 {
                edges.push(MultiEdge {
                    tag: EdgeTag::Connector {
                        seg_i: c.seg_i,
                        seg_j: c.seg_j,
                        copy,
                    },
                    u: vertex_id(c.seg_i, c.end_i),
                    v: vertex_id(c.seg_j, c.end_j),
                    length: c.length,
                });
            }
        }
        vertices.sort_unstable();
        edges.sort_by_key(|e| e.tag);
        DoubledMultigraph { vertices, edges }
    }

    fn local(&self, vid: usize) -> usize {
        self.vertices
            .binary_search(&vid)
            .expect("edge endpoint belongs to the tree")
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for e in &self.edges {
            deg[self.local(e.u)] += 1;
            deg[self.local(e.v)] += 1;
        }
        deg
    }
}

/// One traversed edge of the walk, occupying arc lengths
/// `[s_start, s_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkStep {
    pub edge: EdgeTag,
    pub from: usize,
    pub to: usize,
    pub s_start: f64,
    pub s_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolylineVertex {
    pub x: f64,
    pub y: f64,
    /// Cumulative arc length.
    pub s: f64,
}

impl PolylineVertex {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Arc-length parameterized walk over a doubled tree minus one edge copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerPath {
    /// Segments of the tree this path covers, ascending.
    pub segment_ids: Vec<usize>,
    pub removed_edge: EdgeTag,
    pub removed_length: f64,
    pub steps: Vec<WalkStep>,
    /// Walk vertices with zero-length moves collapsed, so `s` is strictly
    /// increasing.
    pub polyline: Vec<PolylineVertex>,
    pub total_length: f64,
}

impl EulerPath {
    pub fn vertex_walk(&self) -> Vec<usize> {
        let mut walk = Vec::with_capacity(self.steps.len() + 1);
        if let Some(first) = self.steps.first() {
            walk.push(first.from);
        }
        walk.extend(self.steps.iter().map(|s| s.to));
        walk
    }

    pub fn start(&self) -> Point {
        self.polyline[0].point()
    }

    pub fn end(&self) -> Point {
        self.polyline[self.polyline.len() - 1].point()
    }

    /// Polyline vertex arc positions strictly inside `(lo, hi)`.
    pub fn vertex_arcs_between(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        let start = self.polyline.partition_point(|p| p.s <= lo);
        self.polyline[start..]
            .iter()
            .map(|p| p.s)
            .take_while(move |&s| s < hi)
    }
}

/// Builds the Euler path of `tree`.
pub fn build_euler_path(tree: &Tree, inst: &Instance) -> Result<EulerPath> {
    let graph = DoubledMultigraph::new(tree, inst);
    let (removed_edge, removed_length) = match tree.heaviest_connector() {
        Some(c) => (
            EdgeTag::Connector {
                seg_i: c.seg_i,
                seg_j: c.seg_j,
                copy: 1,
            },
            c.length,
        ),
        None => {
            let &[s] = tree.segment_ids.as_slice() else {
                return Err(Error::Internal(format!(
                    "tree with {} segments has no connectors",
                    tree.segment_ids.len()
                )));
            };
            (
                EdgeTag::Segment {
                    segment: s,
                    copy: 1,
                },
                inst.segment(s).length,
            )
        }
    };
    let removed = graph
        .edges
        .iter()
        .position(|e| e.tag == removed_edge)
        .ok_or_else(|| Error::Internal("removed edge missing from multigraph".into()))?;

    let deg = graph.degrees();
    if let Some(v) = deg.iter().position(|d| d % 2 == 1) {
        return Err(Error::Internal(format!(
            "doubled multigraph has odd vertex {}",
            graph.vertices[v]
        )));
    }

    let n = graph.vertices.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (idx, e) in graph.edges.iter().enumerate() {
        if idx == removed {
            continue;
        }
        adj[graph.local(e.u)].push(idx);
        adj[graph.local(e.v)].push(idx);
    }

    let r = graph.edges[removed];
    let start = graph.local(r.u.min(r.v));
    let mut used = vec![false; graph.edges.len()];
    used[removed] = true;
    let mut next = vec![0usize; n];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    let mut circuit: Vec<(usize, Option<usize>)> = Vec::with_capacity(graph.edges.len());
    while let Some(&(v, _)) = stack.last() {
        while next[v] < adj[v].len() && used[adj[v][next[v]]] {
            next[v] += 1;
        }
        if let Some(&e) = adj[v].get(next[v]) {
            used[e] = true;
            let edge = &graph.edges[e];
            let lv = graph.vertices[v];
            let w = if edge.u == lv { edge.v } else { edge.u };
            stack.push((graph.local(w), Some(e)));
        } else {
            circuit.push(stack.pop().expect("stack is non-empty"));
        }
    }
    circuit.reverse();
    if circuit.len() != graph.edges.len() {
        return Err(Error::Internal(format!(
            "walk used {} of {} edges; multigraph is disconnected",
            circuit.len() - 1,
            graph.edges.len() - 1
        )));
    }

    let mut steps = Vec::with_capacity(circuit.len() - 1);
    let mut polyline = Vec::with_capacity(circuit.len());
    let first = vertex_point(inst, graph.vertices[start]);
    polyline.push(PolylineVertex {
        x: first.x,
        y: first.y,
        s: 0.0,
    });
    let mut s = 0.0;
    for pair in circuit.windows(2) {
        let (from, to) = (graph.vertices[pair[0].0], graph.vertices[pair[1].0]);
        let edge = graph.edges[pair[1].1.expect("every non-root entry has an edge")];
        let s_end = s + edge.length;
        steps.push(WalkStep {
            edge: edge.tag,
            from,
            to,
            s_start: s,
            s_end,
        });
        if s_end > polyline[polyline.len() - 1].s {
            let p = vertex_point(inst, to);
            polyline.push(PolylineVertex {
                x: p.x,
                y: p.y,
                s: s_end,
            });
        }
        s = s_end;
    }

    Ok(EulerPath {
        segment_ids: tree.segment_ids.clone(),
        removed_edge,
        removed_length,
        steps,
        polyline,
        total_length: s,
    })
}

fn arc_tolerance(total: f64) -> f64 {
    1e-9 * total.max(1.0)
}

/// Position at arc length `s` along the path.
pub fn point_at(path: &EulerPath, s: f64) -> Result<Point> {
    let total = path.total_length;
    if !(s >= -arc_tolerance(total) && s <= total + arc_tolerance(total)) {
        return Err(Error::ArcOutOfRange { s, total });
    }
    Ok(point_at_clamped(path, s))
}

/// As [`point_at`], clamping `s` into range.
pub fn point_at_clamped(path: &EulerPath, s: f64) -> Point {
    let poly = &path.polyline;
    let hi = poly.partition_point(|p| p.s < s);
    if hi == 0 {
        return poly[0].point();
    }
    if hi == poly.len() {
        return poly[poly.len() - 1].point();
    }
    let (p0, p1) = (&poly[hi - 1], &poly[hi]);
    let u = (s - p0.s) / (p1.s - p0.s);
    p0.point().lerp(p1.point(), u)
}

/// Arc positions at which the walk passes the point `offset` meters from
/// end `A` of `segment_id`; one per traversal of that segment.
pub fn segment_arc_positions(
    path: &EulerPath,
    inst: &Instance,
    segment_id: usize,
    offset: f64,
) -> Result<Vec<f64>> {
    if path.segment_ids.binary_search(&segment_id).is_err() {
        return Err(Error::SegmentNotInTree(segment_id));
    }
    let len = inst.segment(segment_id).length;
    if !(0.0..=len).contains(&offset) {
        return Err(Error::Parameter(format!(
            "offset {offset} outside [0, {len}] of segment {segment_id}"
        )));
    }
    let frac = offset / len;
    Ok(path
        .steps
        .iter()
        .filter(|st| matches!(st.edge, EdgeTag::Segment { segment, .. } if segment == segment_id))
        .map(|st| {
            let span = st.s_end - st.s_start;
            if st.from == vertex_id(segment_id, End::A) {
                st.s_start + frac * span
            } else {
                st.s_end - frac * span
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{compute_connectors, forest_rounds};

    fn collinear(segs: &[(f64, f64)]) -> Instance {
        Instance::new(
            segs.iter()
                .map(|&(a, b)| (Point::new(a, 0.0), Point::new(b, 0.0))),
            1.0,
            5.0,
            vec![],
        )
        .unwrap()
    }

    fn paths_of_round(inst: &Instance, k: usize) -> Vec<EulerPath> {
        let rounds = forest_rounds(inst, &compute_connectors(inst));
        rounds[k - 1]
            .trees
            .iter()
            .map(|t| build_euler_path(t, inst).unwrap())
            .collect()
    }

    #[test]
    fn singleton_is_the_segment() {
        let inst = collinear(&[(0.0, 1.0)]);
        let p = &paths_of_round(&inst, 1)[0];
        assert_eq!(p.total_length, 1.0);
        assert_eq!(p.vertex_walk(), vec![0, 1]);
        assert_eq!(point_at(p, 0.25).unwrap(), Point::new(0.25, 0.0));
        assert_eq!(segment_arc_positions(p, &inst, 0, 0.4).unwrap(), vec![0.4]);
    }

    #[test]
    fn two_segments_unit_connector() {
        let inst = collinear(&[(0.0, 1.0), (2.0, 3.0)]);
        let p = &paths_of_round(&inst, 2)[0];
        assert_eq!(p.total_length, 5.0);
        // starts and ends on the removed connector: vertex 1 = r0.B, 2 = r1.A
        let walk = p.vertex_walk();
        assert_eq!((walk[0], walk[walk.len() - 1]), (1, 2));
        for seg in 0..2 {
            assert_eq!(segment_arc_positions(p, &inst, seg, 0.3).unwrap().len(), 2);
        }
    }

    #[test]
    fn three_collinear_walk_resums_to_ten() {
        let inst = collinear(&[(0.0, 1.0), (2.0, 3.0), (5.0, 6.0)]);
        let p = &paths_of_round(&inst, 3)[0];
        assert_eq!(p.total_length, 10.0);
        let resum: f64 = p
            .polyline
            .windows(2)
            .map(|w| w[0].point().dist(w[1].point()))
            .sum();
        assert!((resum - 10.0).abs() < 1e-12);
        let arcs = segment_arc_positions(p, &inst, 0, 0.5).unwrap();
        assert_eq!(arcs.len(), 2);
        for s in arcs {
            assert!(point_at(p, s).unwrap().dist(Point::new(0.5, 0.0)) < 1e-9);
        }
        assert_eq!(p.start(), Point::new(3.0, 0.0));
        assert_eq!(p.end(), Point::new(5.0, 0.0));
    }

    #[test]
    fn out_of_range_queries() {
        let inst = collinear(&[(0.0, 1.0), (5.0, 6.0)]);
        let p = &paths_of_round(&inst, 1)[0];
        assert!(matches!(point_at(p, 1.5), Err(Error::ArcOutOfRange { .. })));
        assert!(matches!(
            point_at(p, -0.1),
            Err(Error::ArcOutOfRange { .. })
        ));
        assert!(matches!(
            segment_arc_positions(p, &inst, 1, 0.0),
            Err(Error::SegmentNotInTree(1))
        ));
    }

    #[test]
    fn touching_segments_collapse_zero_steps() {
        let inst = collinear(&[(0.0, 1.0), (1.0, 2.0)]);
        let p = &paths_of_round(&inst, 2)[0];
        assert_eq!(p.total_length, 4.0);
        assert!(p.polyline.windows(2).all(|w| w[0].s < w[1].s));
        assert_eq!(p.steps.len(), 5);
    }
}
