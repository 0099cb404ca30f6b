//! Inter-segment connectors and the greedy spanning-forest rounds.
//!
//! Segments are super-nodes; two segments are linked by the shortest of the
//! four endpoint-to-endpoint distances. Round `k` is the minimum spanning
//! forest with `k - 1` connectors, read off a single Kruskal pass.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::model::{End, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub seg_i: usize,
    pub seg_j: usize,
    pub end_i: End,
    pub end_j: End,
    pub length: f64,
}

impl Connector {
    /// Kruskal order: ascending length, then segment ids.
    pub fn sort_cmp(&self, other: &Connector) -> Ordering {
        self.length
            .total_cmp(&other.length)
            .then(self.seg_i.cmp(&other.seg_i))
            .then(self.seg_j.cmp(&other.seg_j))
    }

    /// True when `self` should be removed in preference to `other`:
    /// longer, or equally long with the smaller id pair.
    pub fn heavier_than(&self, other: &Connector) -> bool {
        match self.length.total_cmp(&other.length) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.seg_i, self.seg_j) < (other.seg_i, other.seg_j),
        }
    }
}

/// One connector per unordered segment pair, in `(seg_i, seg_j)` order.
pub fn compute_connectors(inst: &Instance) -> Vec<Connector> {
    let segs = inst.segments();
    let m = segs.len();
    let mut out = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let mut best: Option<Connector> = None;
            for end_i in End::BOTH {
                for end_j in End::BOTH {
                    let length = segs[i].end(end_i).dist(segs[j].end(end_j));
                    if best.is_none_or(|b| length < b.length) {
                        best = Some(Connector {
                            seg_i: i,
                            seg_j: j,
                            end_i,
                            end_j,
                            length,
                        });
                    }
                }
            }
            out.extend(best);
        }
    }
    out
}

/// A tree of segments joined by connectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Ascending.
    pub segment_ids: Vec<usize>,
    /// In the order the greedy pass accepted them.
    pub connectors: Vec<Connector>,
    /// Total segment plus connector length, `L(T)`.
    pub weight: f64,
}

impl Tree {
    pub fn heaviest_connector(&self) -> Option<&Connector> {
        self.connectors
            .iter()
            .reduce(|best, c| if c.heavier_than(best) { c } else { best })
    }

    pub fn connector_weight(&self) -> f64 {
        self.connectors.iter().map(|c| c.length).sum()
    }

    pub fn contains(&self, segment_id: usize) -> bool {
        self.segment_ids.binary_search(&segment_id).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestRound {
    /// 1-based; the forest uses `k - 1` connectors.
    pub k: usize,
    /// Ordered by smallest segment id.
    pub trees: Vec<Tree>,
}

impl ForestRound {
    pub fn connector_count(&self) -> usize {
        self.trees.iter().map(|t| t.connectors.len()).sum()
    }

    pub fn connector_weight(&self) -> f64 {
        self.trees.iter().map(Tree::connector_weight).sum()
    }

    pub fn tree_of(&self, segment_id: usize) -> Option<usize> {
        self.trees.iter().position(|t| t.contains(segment_id))
    }
}

/// Running totals for one union-find component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub heaviest: Option<Connector>,
    /// Length of the lone segment, used while the component is a singleton.
    pub first_segment_length: f64,
}

impl Component {
    /// Length of the edge copy dropped when the doubled tree is opened into
    /// a path: the heaviest connector, or the segment itself for a
    /// singleton.
    pub fn removed_length(&self) -> f64 {
        self.heaviest
            .map_or(self.first_segment_length, |c| c.length)
    }

    /// `2·L(T) − removed`.
    pub fn euler_length(&self) -> f64 {
        2.0 * self.weight - self.removed_length()
    }
}

/// Union-find over segments that also carries each component's weight and
/// heaviest connector. Both the incremental mule count and the materialized
/// trees use it, so their arithmetic is identical.
#[derive(Debug, Clone)]
pub struct Components {
    parent: Vec<usize>,
    rank: Vec<u8>,
    data: Vec<Component>,
}

impl Components {
    pub fn new(inst: &Instance) -> Self {
        let m = inst.m();
        Components {
            parent: (0..m).collect(),
            rank: vec![0; m],
            data: inst
                .segments()
                .iter()
                .map(|s| Component {
                    weight: s.length,
                    heaviest: None,
                    first_segment_length: s.length,
                })
                .collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    pub fn component(&mut self, x: usize) -> Component {
        let r = self.find(x);
        self.data[r]
    }

    /// Joins the components of `c`'s two segments. Returns the two old
    /// components and the merged one, or `None` if `c` would close a cycle.
    pub fn merge(&mut self, c: &Connector) -> Option<(Component, Component, Component)> {
        let ri = self.find(c.seg_i);
        let rj = self.find(c.seg_j);
        if ri == rj {
            return None;
        }
        let (a, b) = (self.data[ri], self.data[rj]);
        let heaviest = [a.heaviest, b.heaviest, Some(*c)]
            .into_iter()
            .flatten()
            .reduce(|best, x| if x.heavier_than(&best) { x } else { best });
        let merged = Component {
            weight: a.weight + b.weight + c.length,
            heaviest,
            first_segment_length: a.first_segment_length,
        };
        let (root, child) = match self.rank[ri].cmp(&self.rank[rj]) {
            Ordering::Less => (rj, ri),
            Ordering::Greater => (ri, rj),
            Ordering::Equal => {
                self.rank[ri] += 1;
                (ri, rj)
            }
        };
        self.parent[child] = root;
        self.data[root] = merged;
        Some((a, b, merged))
    }
}

/// Result of the single greedy pass: the connectors Kruskal accepted, in
/// acceptance order. Round `k` uses the first `k - 1` of them.
#[derive(Debug, Clone)]
pub struct Sweep {
    accepted: Vec<Connector>,
}

impl Sweep {
    pub fn new(inst: &Instance, connectors: &[Connector]) -> Self {
        let mut order: Vec<&Connector> = connectors.iter().collect();
        order.sort_unstable_by(|a, b| a.sort_cmp(b));
        let mut comps = Components::new(inst);
        let target = inst.m() - 1;
        let mut accepted = Vec::with_capacity(target);
        for c in order {
            if accepted.len() == target {
                break;
            }
            if comps.merge(c).is_some() {
                accepted.push(*c);
            }
        }
        Sweep { accepted }
    }

    pub fn accepted(&self) -> &[Connector] {
        &self.accepted
    }

    /// Materializes round `k` (1-based).
    pub fn round(&self, inst: &Instance, k: usize) -> ForestRound {
        assert!(k >= 1 && k <= inst.m(), "round {k} out of range");
        let m = inst.m();
        let mut comps = Components::new(inst);
        for c in &self.accepted[..k - 1] {
            comps.merge(c);
        }
        let mut slot_of_root = vec![usize::MAX; m];
        let mut trees: Vec<Tree> = Vec::with_capacity(m - k + 1);
        for seg in 0..m {
            let root = comps.find(seg);
            if slot_of_root[root] == usize::MAX {
                slot_of_root[root] = trees.len();
                trees.push(Tree {
                    segment_ids: Vec::new(),
                    connectors: Vec::new(),
                    weight: comps.data[root].weight,
                });
            }
            trees[slot_of_root[root]].segment_ids.push(seg);
        }
        for c in &self.accepted[..k - 1] {
            let root = comps.find(c.seg_i);
            trees[slot_of_root[root]].connectors.push(*c);
        }
        ForestRound { k, trees }
    }
}

/// All `M` rounds, from `M` singletons to one spanning tree.
pub fn forest_rounds(inst: &Instance, connectors: &[Connector]) -> Vec<ForestRound> {
    let sweep = Sweep::new(inst, connectors);
    (1..=inst.m()).map(|k| sweep.round(inst, k)).collect()
}
