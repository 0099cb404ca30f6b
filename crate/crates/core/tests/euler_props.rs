use std::collections::BTreeMap;

use mulepatrol::euler::{
    build_euler_path, point_at, segment_arc_positions, vertex_id, EdgeTag, EulerPath,
};
use mulepatrol::forest::{compute_connectors, forest_rounds, Tree};
use mulepatrol::model::{generate_instance, End, GenParams, Instance};
use proptest::prelude::*;

fn edge_endpoints(tag: EdgeTag, tree: &Tree) -> (usize, usize) {
    match tag {
        EdgeTag::Segment { segment, .. } => {
            (vertex_id(segment, End::A), vertex_id(segment, End::B))
        }
        EdgeTag::Connector { seg_i, seg_j, .. } => {
            let c = tree
                .connectors
                .iter()
                .find(|c| (c.seg_i, c.seg_j) == (seg_i, seg_j))
                .expect("walked connector belongs to the tree");
            (vertex_id(seg_i, c.end_i), vertex_id(seg_j, c.end_j))
        }
    }
}

fn strip_copy(tag: EdgeTag) -> EdgeTag {
    match tag {
        EdgeTag::Segment { segment, .. } => EdgeTag::Segment { segment, copy: 0 },
        EdgeTag::Connector { seg_i, seg_j, .. } => EdgeTag::Connector {
            seg_i,
            seg_j,
            copy: 0,
        },
    }
}

fn check_path(inst: &Instance, tree: &Tree, path: &EulerPath) -> Result<(), TestCaseError> {
    // length identity, recomputed from the tree
    let removed = tree
        .connectors
        .iter()
        .map(|c| c.length)
        .fold(None, |m: Option<f64>, l| Some(m.map_or(l, |m| m.max(l))))
        .unwrap_or_else(|| inst.segment(tree.segment_ids[0]).length);
    let expected = 2.0 * tree.weight - removed;
    prop_assert!((path.total_length - expected).abs() <= 1e-9 * expected.max(1.0));

    // each remaining edge copy exactly once
    let mut want: BTreeMap<EdgeTag, i32> = BTreeMap::new();
    for &s in &tree.segment_ids {
        *want
            .entry(EdgeTag::Segment {
                segment: s,
                copy: 0,
            })
            .or_default() += 2;
    }
    for c in &tree.connectors {
        *want
            .entry(EdgeTag::Connector {
                seg_i: c.seg_i,
                seg_j: c.seg_j,
                copy: 0,
            })
            .or_default() += 2;
    }
    *want.get_mut(&strip_copy(path.removed_edge)).unwrap() -= 1;
    let mut got: BTreeMap<EdgeTag, i32> = BTreeMap::new();
    let mut tags: Vec<EdgeTag> = path.steps.iter().map(|s| s.edge).collect();
    for s in &path.steps {
        *got.entry(strip_copy(s.edge)).or_default() += 1;
    }
    tags.sort();
    tags.dedup();
    prop_assert_eq!(tags.len(), path.steps.len());
    want.retain(|_, v| *v > 0);
    prop_assert_eq!(got, want);

    // the walk is connected and follows real edges
    for pair in path.steps.windows(2) {
        prop_assert_eq!(pair[0].to, pair[1].from);
        prop_assert_eq!(pair[0].s_end, pair[1].s_start);
    }
    for st in &path.steps {
        let (u, v) = edge_endpoints(st.edge, tree);
        prop_assert!((st.from, st.to) == (u, v) || (st.from, st.to) == (v, u));
    }
    let (ru, rv) = edge_endpoints(path.removed_edge, tree);
    let walk = path.vertex_walk();
    prop_assert_eq!(walk[0], ru.min(rv));
    prop_assert_eq!(*walk.last().unwrap(), ru.max(rv));

    // arc lengths
    prop_assert!(path.polyline.windows(2).all(|w| w[0].s < w[1].s));
    prop_assert_eq!(path.polyline.last().unwrap().s, path.total_length);
    let resum: f64 = path
        .polyline
        .windows(2)
        .map(|w| w[0].point().dist(w[1].point()))
        .sum();
    prop_assert!((resum - path.total_length).abs() <= 1e-9 * path.total_length.max(1.0));

    // every road point appears once per traversal
    for &s in &tree.segment_ids {
        let seg = inst.segment(s);
        for frac in [0.0, 0.3, 1.0] {
            let arcs = segment_arc_positions(path, inst, s, frac * seg.length).unwrap();
            prop_assert_eq!(arcs.len(), if tree.segment_ids.len() == 1 { 1 } else { 2 });
            for a in arcs {
                let p = point_at(path, a).unwrap();
                prop_assert!(
                    p.dist(seg.point_at(frac * seg.length)) <= 1e-9 * seg.length.max(1.0) + 1e-9
                );
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_tree_of_every_round(seed in 0u64..100_000, m in 1usize..16) {
        let inst = generate_instance(&GenParams { seed, m, width: 60.0, height: 60.0, ..GenParams::default() }).unwrap();
        for round in forest_rounds(&inst, &compute_connectors(&inst)) {
            for tree in &round.trees {
                let path = build_euler_path(tree, &inst).unwrap();
                check_path(&inst, tree, &path)?;
                prop_assert_eq!(&build_euler_path(tree, &inst).unwrap(), &path);
            }
        }
    }

    #[test]
    fn point_at_is_one_lipschitz(seed in 0u64..100_000, u in 0.0f64..1.0, delta in 0.0f64..5.0) {
        let inst = generate_instance(&GenParams { seed, m: 6, ..GenParams::default() }).unwrap();
        let rounds = forest_rounds(&inst, &compute_connectors(&inst));
        let path = build_euler_path(&rounds[5].trees[0], &inst).unwrap();
        let s = u * path.total_length;
        let t = (s + delta).min(path.total_length);
        let d = point_at(&path, s).unwrap().dist(point_at(&path, t).unwrap());
        prop_assert!(d <= (t - s) + 1e-9);
    }
}
