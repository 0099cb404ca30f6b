use mulepatrol::deploy::{
    approximation_report, count_round, make_plan, mule_position, round_counts, select_round,
    verify_point_coverage, CountMode, DeploymentPlan,
};
use mulepatrol::forest::{compute_connectors, forest_rounds, Sweep};
use mulepatrol::model::{generate_instance, GenParams, Instance, Point};
use proptest::prelude::*;

fn random_instance(seed: u64, m: usize) -> Instance {
    generate_instance(&GenParams {
        seed,
        m,
        width: 80.0,
        height: 80.0,
        len_min: 1.0,
        len_max: 15.0,
        speed: 1.0,
        period: 25.0,
        ..GenParams::default()
    })
    .unwrap()
}

fn check_tiling(plan: &DeploymentPlan) -> Result<(), TestCaseError> {
    let reach = plan.reach();
    let mut expected_mule = 0;
    for t in &plan.trees {
        let len = t.pieces[0].len();
        prop_assert_eq!(t.pieces[0].s_start, 0.0);
        prop_assert_eq!(t.pieces.last().unwrap().s_end, t.euler.total_length);
        for pair in t.pieces.windows(2) {
            prop_assert_eq!(pair[0].s_end, pair[1].s_start);
        }
        for p in &t.pieces {
            prop_assert!((p.len() - len).abs() <= 1e-9 * len);
            prop_assert!(p.len() <= reach * (1.0 + 1e-12));
            prop_assert_eq!(
                (p.mule_left, p.mule_right),
                (expected_mule, expected_mule + 1)
            );
            expected_mule += 2;
        }
    }
    prop_assert_eq!(expected_mule as u64, plan.mule_count);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ceiling_doubling(x in 1e-6f64..1e6) {
        prop_assert!((2.0 * x).ceil() <= 2.0 * x.ceil());
    }

    #[test]
    fn counts_and_bounds(seed in 0u64..100_000, m in 1usize..25) {
        let inst = random_instance(seed, m);
        let tight = make_plan(&inst, CountMode::Tight).unwrap();
        let step5 = make_plan(&inst, CountMode::Step5).unwrap();
        prop_assert!(tight.mule_count <= step5.mule_count);
        for plan in [&tight, &step5] {
            check_tiling(plan)?;
            let b = approximation_report(plan);
            prop_assert!(b.lower_bound >= 1);
            prop_assert!(b.mule_count <= 4 * b.lower_bound);
            prop_assert!(b.ratio <= 4.0);
        }
    }

    #[test]
    fn incremental_counts_match_recount(seed in 0u64..100_000, m in 1usize..20) {
        let inst = random_instance(seed, m);
        let connectors = compute_connectors(&inst);
        let sweep = Sweep::new(&inst, &connectors);
        for mode in [CountMode::Tight, CountMode::Step5] {
            let counts = round_counts(&inst, &sweep, mode);
            let recount: Vec<u64> = forest_rounds(&inst, &connectors)
                .iter()
                .map(|r| count_round(r, &inst, mode))
                .collect();
            prop_assert_eq!(&counts, &recount);
            let j = select_round(&counts);
            prop_assert_eq!(counts[j - 1], *counts.iter().min().unwrap());
            prop_assert!(counts[..j - 1].iter().all(|&n| n > counts[j - 1]));
            let tight_le_step5 = round_counts(&inst, &sweep, CountMode::Tight)
                .iter()
                .zip(round_counts(&inst, &sweep, CountMode::Step5))
                .all(|(a, b)| *a <= b);
            prop_assert!(tight_le_step5);
        }
    }

    #[test]
    fn mules_move_at_speed_and_meet_mid_piece(seed in 0u64..100_000, tau in 0.0f64..200.0, delta in 0.0f64..3.0) {
        let inst = random_instance(seed, 8);
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        for (_, piece) in plan.pieces() {
            for id in [piece.mule_left, piece.mule_right] {
                let (a0, p0) = mule_position(&plan, id, tau).unwrap();
                let (a1, p1) = mule_position(&plan, id, tau + delta).unwrap();
                prop_assert!((a1 - a0).abs() <= plan.speed * delta + 1e-9);
                prop_assert!(p0.dist(p1) <= plan.speed * delta + 1e-9);
            }
            let cycle = piece.sweep_period(plan.speed);
            let n = (tau / cycle).floor();
            let meet = (n + 0.5) * cycle;
            let (l, pl) = mule_position(&plan, piece.mule_left, meet).unwrap();
            let (r, pr) = mule_position(&plan, piece.mule_right, meet).unwrap();
            prop_assert!((l - piece.midpoint()).abs() <= 1e-9 * piece.s_end.max(1.0));
            prop_assert!((r - piece.midpoint()).abs() <= 1e-9 * piece.s_end.max(1.0));
            prop_assert!(pl.dist(pr) <= 1e-9 * piece.s_end.max(1.0));
        }
    }

    #[test]
    fn analytic_coverage_holds(seed in 0u64..100_000, m in 1usize..15) {
        let inst = random_instance(seed, m);
        let plan = make_plan(&inst, CountMode::Tight).unwrap();
        let report = verify_point_coverage(&plan, &inst, 16);
        prop_assert!(report.pass, "max gap {}", report.max_gap);
    }
}

#[test]
fn plans_are_deterministic() {
    let inst = random_instance(5, 30);
    let a = make_plan(&inst, CountMode::Tight)
        .unwrap()
        .to_canonical_json();
    let b = make_plan(&inst, CountMode::Tight)
        .unwrap()
        .to_canonical_json();
    assert_eq!(a, b);
}

#[test]
fn full_length_piece_midpoint_waits_one_period() {
    // single segment exactly V·t long: station and midpoint both see one
    // pass per period
    let inst = Instance::new(
        [(Point::new(0.0, 0.0), Point::new(5.0, 0.0))],
        1.0,
        5.0,
        vec![],
    )
    .unwrap();
    let plan = make_plan(&inst, CountMode::Tight).unwrap();
    let report = verify_point_coverage(&plan, &inst, 2);
    let gap_at = |x: f64| {
        report
            .points
            .iter()
            .find(|p| p.offset == x)
            .unwrap()
            .max_gap
    };
    assert_eq!(gap_at(0.0), 5.0);
    assert_eq!(gap_at(5.0), 5.0);
    assert!((gap_at(1.25) - 2.5).abs() < 1e-12);
    assert!(report.pass);
}
