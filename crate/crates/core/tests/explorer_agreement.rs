use hsf_core::engine::ScriptedResolver;
use hsf_core::explorer::{Counterexample, Explorer};
use hsf_core::stats::sample_runs;
use hsf_core::{
    wait_for_graph, Bounds, Coord, Ordering, RunOptions, SimConfig, Variant, Verdict, World,
};

fn verdict(n: usize, variant: Variant, ordering: Ordering) -> (SimConfig, Verdict) {
    let cfg = SimConfig::new(n, variant, ordering);
    (cfg, hsf_core::explore(cfg, Bounds::default()).unwrap())
}

/// Steps the simulator tick by tick along the counterexample and compares
/// every state with the explorer's path.
fn replay_matches_path(cfg: SimConfig, trace: &Counterexample) {
    let grid = cfg.grid().unwrap();
    let explorer = Explorer::new(&grid, cfg, None).unwrap();
    let mut world = World::with_sequence(&grid, cfg, trace.sequence.clone());
    assert_eq!(explorer.encode(&world), trace.path[0]);
    let mut events = Vec::new();
    for (k, choices) in trace.choices.iter().enumerate() {
        let mut resolver = ScriptedResolver::new(choices.clone());
        events.clear();
        let report = world.step(&mut resolver, &mut events).unwrap();
        assert!(report.actions > 0);
        assert!(resolver.exhausted(), "tick {} left choices unused", k + 1);
        world.check_invariants().unwrap();
        assert_eq!(
            explorer.encode(&world),
            trace.path[k + 1],
            "state after tick {}",
            k + 1
        );
    }
    events.clear();
    let report = world
        .step(&mut ScriptedResolver::new(Vec::new()), &mut events)
        .unwrap();
    assert_eq!(report.actions, 0);
    assert_eq!(report.tick, trace.deadlock_tick);
    assert!(!wait_for_graph(&world).cycles.is_empty());
}

fn mc_deadlocks(cfg: SimConfig, runs: usize) -> usize {
    let grid = cfg.grid().unwrap();
    sample_runs(&grid, cfg, 7, 0..runs)
        .unwrap()
        .iter()
        .filter(|r| r.deadlocked)
        .count()
}

#[test]
fn reachable_verdicts_replay_state_for_state() {
    for (n, variant, ordering) in [
        (2, Variant::basic(), Ordering::SWtoNEx),
        (4, Variant::basic(), Ordering::SWtoNEx),
        (4, Variant::basic(), Ordering::Alternating),
        (4, Variant::acks_ne(), Ordering::SWtoNEy),
        (4, Variant::queue(1), Ordering::NEtoSWx),
        (4, Variant::parallel(), Ordering::NEtoSWy),
    ] {
        let (cfg, v) = verdict(n, variant, ordering);
        let Verdict::DeadlockReachable { trace, .. } = v else {
            panic!("{n} {variant} {ordering}: {v:?}")
        };
        replay_matches_path(cfg, &trace);
        let grid = cfg.grid().unwrap();
        let (r, _) = trace.replay(&grid, cfg, RunOptions::default()).unwrap();
        assert_eq!(r.deadlock_tick, Some(trace.deadlock_tick));
    }
}

#[test]
fn free_verdicts_agree_with_sampling() {
    for (n, variant, ordering) in [
        (2, Variant::queue(1), Ordering::SWtoNEx),
        (2, Variant::acks_ne(), Ordering::Alternating),
        (4, Variant::acks_ne_queue(1), Ordering::SWtoNEx),
        (4, Variant::acks_ne_queue(1), Ordering::NEtoSWy),
        (4, Variant::queue(1), Ordering::SWtoNEy),
    ] {
        let (cfg, v) = verdict(n, variant, ordering);
        assert!(
            matches!(v, Verdict::DeadlockFree { .. }),
            "{n} {variant} {ordering}: {v:?}"
        );
        assert_eq!(mc_deadlocks(cfg, 10_000), 0, "{n} {variant} {ordering}");
    }
}

#[test]
fn prefixes_restrict_the_sequence() {
    let cfg = SimConfig::new(4, Variant::basic(), Ordering::SWtoNEx);
    let grid = cfg.grid().unwrap();
    let ex = Explorer::new(&grid, cfg, Some(3)).unwrap();
    assert_eq!(
        ex.sequence(),
        &[Coord::new(0, 0), Coord::new(1, 0), Coord::new(2, 0)][..]
    );
    let v = ex.explore(Bounds::default()).unwrap();
    assert!(!matches!(v, Verdict::BoundExceeded { .. }));
}

#[test]
fn large_grids_are_refused() {
    let cfg = SimConfig::new(16, Variant::basic(), Ordering::SWtoNEx);
    let grid = cfg.grid().unwrap();
    assert!(Explorer::new(&grid, cfg, None).is_err());
}
