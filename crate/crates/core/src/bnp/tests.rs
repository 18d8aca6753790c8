use std::collections::BTreeSet;
use std::path::PathBuf;

use super::*;
use crate::ilp::Assignment;

pub(crate) fn bundled() -> Vec<ConnectionNetwork> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/networks");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| ConnectionNetwork::load(p).unwrap()).collect()
}

fn toy() -> ConnectionNetwork {
    bundled().into_iter().find(|n| n.name() == "toy6").unwrap()
}

fn integer_oracle(net: &ConnectionNetwork) -> Option<i64> {
    oracle::integer_optimum(net).unwrap()
}

/// Enumerated LP, certified by complementary duality.
fn full_lp(net: &ConnectionNetwork) -> f64 {
    let (pool, s) = oracle::enumerated_lp(net).unwrap();
    let dual: f64 = s.pi.iter().sum();
    assert!((dual - s.objective).abs() < 1e-7);
    for c in pool.columns() {
        assert!(s.reduced_cost(c) >= -1e-9);
    }
    s.objective
}

fn run(net: &ConnectionNetwork, cfg: &BnpConfig, heuristic: Option<&mut dyn IntegerHeuristic>) -> BnpResult {
    let r = branch_and_price(net, cfg, heuristic).unwrap();
    assert!(r.stats.accounting_holds(), "{:?}", r.stats);
    r
}

fn check_incumbent(net: &ConnectionNetwork, inc: &Incumbent) {
    let mut seen = vec![0; net.n_flights()];
    let mut total = 0;
    for route in &inc.routes {
        total += net.route_cost(route).expect("legal route");
        route.iter().for_each(|&f| seen[f] += 1);
    }
    assert!(seen.iter().all(|&c| c == 1));
    assert_eq!(total, inc.cost);
}

#[test]
fn bundled_networks_are_small() {
    let nets = bundled();
    assert!(nets.len() >= 6);
    assert!(nets.iter().all(|n| n.n_flights() <= 10));
    assert_eq!(toy().n_flights(), 6);
}

#[test]
fn root_cg_matches_full_enumeration() {
    for net in bundled() {
        let cfg = BnpConfig::default();
        let mut state = SearchState::new(&net, None);
        let view = NodeView::new(&state.pool, &[], &BTreeSet::new()).unwrap();
        let cg = column_generation(&mut state, &view, f64::NEG_INFINITY, &cfg.cg).unwrap();
        assert_eq!(cg.status, CgStatus::Converged);
        let oracle = full_lp(&net);
        assert!((cg.rmp.objective - oracle).abs() < 1e-7, "{}: {} vs {oracle}", net.name(), cg.rmp.objective);
        for w in cg.trace.windows(2) {
            assert!(w[1].objective <= w[0].objective + 1e-9);
        }
        assert!(cg.bound <= oracle + 1e-7);
        for it in &cg.trace {
            assert!(it.lower_bound <= oracle + 1e-7);
        }
    }
}

#[test]
fn full_branch_is_exact_with_and_without_heuristic() {
    let mut strictly_fewer = false;
    for net in bundled() {
        let oracle = integer_oracle(&net);
        let mut cfg = BnpConfig::default();
        let plain = run(&net, &cfg, None);
        cfg.cg.policy = HeuristicPolicy::Always;
        let mut mock = MockExact::default();
        let with = run(&net, &cfg, Some(&mut mock));
        for r in [&plain, &with] {
            assert_eq!(r.status, BnpStatus::Optimal);
            let inc = r.incumbent.as_ref().unwrap();
            assert_eq!(Some(inc.cost), oracle, "{}", net.name());
            check_incumbent(&net, inc);
        }
        assert!(with.stats.nodes_created <= plain.stats.nodes_created, "{}", net.name());
        strictly_fewer |= with.stats.nodes_created < plain.stats.nodes_created;
    }
    assert!(strictly_fewer);
}

#[test]
fn root_bound_below_integer_optimum() {
    for net in bundled() {
        let r = run(&net, &BnpConfig::default(), None);
        assert!(r.root_bound <= integer_oracle(&net).unwrap() as f64 + 1e-7);
        assert!(r.root_lp <= integer_oracle(&net).unwrap() as f64 + 1e-7);
    }
}

#[test]
fn integral_root_needs_one_node() {
    let net = ConnectionNetwork::from_json_str(
        r#"{"name":"apart","min_turn":30,"route_cost":10,
            "flights":[{"id":"a","dep":0,"arr":60,"cost":5},{"id":"b","dep":100,"arr":160,"cost":5},
                       {"id":"c","dep":40,"arr":100,"cost":7}]}"#,
    )
    .unwrap();
    let r = run(&net, &BnpConfig::default(), None);
    assert_eq!(r.stats.nodes_created, 1);
    assert_eq!(r.stats.pruned_integrality, 1);
    assert_eq!(r.incumbent.unwrap().cost, integer_oracle(&net).unwrap());
}

#[test]
fn dive_tie_break_and_conflict_removal() {
    let mut pool = ColumnPool::with_slacks(4, 100.0);
    let a = pool.add(&[0, 1], 3.0).0;
    let b = pool.add(&[2, 3], 3.0).0;
    let c = pool.add(&[1, 2], 3.0).0;
    assert_eq!(dive_choice(&pool, &[a, b, c], &[0.5, 0.5, 1.0]), Some(a));
    let view = NodeView::new(&pool, &[a], &BTreeSet::new()).unwrap();
    for id in view.columns(&pool) {
        assert!(pool.column(id).flights.iter().all(|f| ![0, 1].contains(f)));
    }
    assert!(!view.columns(&pool).contains(&c));
    assert_eq!(dive_choice(&pool, &[a, b], &[1.0, 0.0]), None);
}

#[test]
fn dive_reaches_feasible_solution() {
    for net in bundled() {
        let cfg = BnpConfig {
            mode: SearchMode::Dive,
            ..Default::default()
        };
        let r = run(&net, &cfg, None);
        assert_eq!(r.status, BnpStatus::Feasible, "{}", net.name());
        let inc = r.incumbent.unwrap();
        check_incumbent(&net, &inc);
        assert!(inc.cost >= integer_oracle(&net).unwrap());
    }
}

#[test]
fn threshold_stops_on_first_incumbent_at_cost() {
    let net = toy();
    let opt = integer_oracle(&net).unwrap();
    let cfg = BnpConfig {
        threshold: Some(opt),
        ..Default::default()
    };
    let mut mock = MockExact::default();
    let r = run(&net, &cfg, Some(&mut mock));
    assert_eq!(r.status, BnpStatus::ThresholdReached);
    assert_eq!(r.incumbent.unwrap().cost, opt);
}

#[test]
fn promising_calls_heuristic_less_often_than_always() {
    let mut fewer = false;
    for net in bundled() {
        let mut cfg = BnpConfig::default();
        cfg.cg.policy = HeuristicPolicy::Always;
        let mut m1 = MockExact::default();
        let always = run(&net, &cfg, Some(&mut m1));
        cfg.cg.policy = HeuristicPolicy::Promising;
        let mut m2 = MockExact::default();
        let promising = run(&net, &cfg, Some(&mut m2));
        assert!(promising.stats.heuristic_calls <= always.stats.heuristic_calls);
        assert_eq!(promising.incumbent.unwrap().cost, always.incumbent.unwrap().cost);
        fewer |= promising.stats.heuristic_calls < always.stats.heuristic_calls;
    }
    assert!(fewer);
}

#[test]
fn tight_upper_bound_shortens_column_generation() {
    let mut shorter = false;
    for net in bundled() {
        let opt = integer_oracle(&net).unwrap();
        let mut cfg = BnpConfig::default();
        let mut with_stop = SearchState::new(&net, None);
        let view = NodeView::new(&with_stop.pool, &[], &BTreeSet::new()).unwrap();
        // an incumbent at the optimum, as a perfect heuristic would supply
        with_stop.incumbent = Some(Incumbent {
            routes: Vec::new(),
            cost: opt,
            origin: IncumbentOrigin::Heuristic,
            node: 0,
        });
        let stopped = column_generation(&mut with_stop, &view, f64::NEG_INFINITY, &cfg.cg).unwrap();
        cfg.cg.early_stop = false;
        let mut plain = SearchState::new(&net, None);
        let full = column_generation(&mut plain, &view, f64::NEG_INFINITY, &cfg.cg).unwrap();
        assert!(stopped.trace.len() <= full.trace.len());
        shorter |= stopped.trace.len() < full.trace.len();
    }
    assert!(shorter);
}

#[test]
fn everything_fixed_gives_empty_pricing() {
    let net = toy();
    let mut state = SearchState::new(&net, None);
    let ids: Vec<usize> = (0..net.n_flights()).map(|f| state.pool.add(&[f], 1.0).0).collect();
    let view = NodeView::new(&state.pool, &ids, &BTreeSet::new()).unwrap();
    let cg = column_generation(&mut state, &view, f64::NEG_INFINITY, &CgConfig::default()).unwrap();
    assert_eq!(cg.status, CgStatus::Converged);
    assert_eq!(cg.trace.len(), 1);
    assert_eq!(cg.trace[0].columns_added, 0);
}

#[test]
fn heuristic_incumbents_are_feasible() {
    for net in bundled() {
        let mut cfg = BnpConfig::default();
        cfg.cg.policy = HeuristicPolicy::Always;
        let mut mock = MockExact::default();
        let r = run(&net, &cfg, Some(&mut mock));
        assert!(r.stats.heuristic_calls > 0);
        let inc = r.incumbent.unwrap();
        check_incumbent(&net, &inc);
    }
}

#[test]
fn infeasible_network_is_reported() {
    // the only route of the only flight is forbidden
    let net = ConnectionNetwork::from_json_str(
        r#"{"name":"tiny","min_turn":0,"flights":[{"id":"a","dep":0,"arr":10,"cost":1}]}"#,
    )
    .unwrap();
    let mut state = SearchState::new(&net, None);
    let a = state.pool.add(&[0], 1.0).0;
    let forbidden: BTreeSet<usize> = [a].into();
    let view = NodeView::new(&state.pool, &[], &forbidden).unwrap();
    let cg = column_generation(&mut state, &view, f64::NEG_INFINITY, &CgConfig::default()).unwrap();
    assert!(cg.uses_slack(&state.pool));
}

#[test]
fn report_round_trips_and_matches_schema() {
    let net = toy();
    let cfg = BnpConfig::default();
    let mut mock = MockExact::default();
    let r = run(&net, &cfg, Some(&mut mock));
    let report = RunReport::new(&net, &cfg, "mock-exact", 0, &r, 0.1);
    let json: serde_json::Value = serde_json::from_str(&report.to_json_string().unwrap()).unwrap();
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    assert!(jsonschema::is_valid(&schema, &json));
    let back: RunReport = serde_json::from_value(json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn assignment_over_pool_is_consistent() {
    let net = toy();
    let routes = net.enumerate_routes(10_000).unwrap();
    assert!(routes.iter().all(|(p, c)| net.route_cost(p) == Some(*c)));
    let a = Assignment::zeros(routes.len());
    assert_eq!(a.selected().count(), 0);
}

