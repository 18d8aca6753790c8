//! Flight connection networks and resource-constrained pricing.
//!
//! A route starts at a virtual source, visits flights along legal connections
//! and ends at a virtual sink. Its cost is the optional fixed `route_cost`, the
//! flight costs and the connection costs. One resource (flight minutes by
//! default) accumulates along the route and is capped by `resource_limit`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlightSpec {
    pub id: String,
    pub dep: i64,
    pub arr: i64,
    pub cost: i64,
    /// Defaults to the flight duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_use: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub from: String,
    pub to: String,
    /// Defaults to the idle cost of the ground time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<i64>,
}

/// On-disk network description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub flights: Vec<FlightSpec>,
    /// Replaces the time-based connection rule when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<ArcSpec>>,
    #[serde(default)]
    pub min_turn: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resource_limit: Option<i64>,
    #[serde(default)]
    pub route_cost: i64,
    #[serde(default)]
    pub idle_cost_per_minute: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Flight {
    pub id: String,
    pub dep: i64,
    pub arr: i64,
    pub cost: i64,
    pub resource: i64,
}

/// Validated connection DAG.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionNetwork {
    name: String,
    flights: Vec<Flight>,
    succ: Vec<Vec<(usize, i64)>>,
    topo: Vec<usize>,
    resource_limit: i64,
    route_cost: i64,
}

impl ConnectionNetwork {
    pub fn from_file(file: &NetworkFile) -> Result<Self> {
        if file.flights.is_empty() {
            return Err(Error::input("network has no flights"));
        }
        let mut ids = std::collections::HashMap::new();
        let mut flights = Vec::with_capacity(file.flights.len());
        for (i, f) in file.flights.iter().enumerate() {
            if ids.insert(f.id.clone(), i).is_some() {
                return Err(Error::input(format!("duplicate flight id {}", f.id)));
            }
            if f.arr < f.dep {
                return Err(Error::input(format!("flight {} arrives before it departs", f.id)));
            }
            if f.cost < 0 {
                return Err(Error::input(format!("flight {} has negative cost", f.id)));
            }
            let resource = f.resource_use.unwrap_or(f.arr - f.dep);
            if resource < 0 {
                return Err(Error::input(format!("flight {} has negative resource use", f.id)));
            }
            flights.push(Flight {
                id: f.id.clone(),
                dep: f.dep,
                arr: f.arr,
                cost: f.cost,
                resource,
            });
        }
        let resource_limit = file.resource_limit.unwrap_or(i64::MAX);
        if let Some(f) = flights.iter().find(|f| f.resource > resource_limit) {
            return Err(Error::input(format!("flight {} alone exceeds the resource limit", f.id)));
        }
        if file.route_cost < 0 || file.idle_cost_per_minute < 0 {
            return Err(Error::input("route and idle costs must be nonnegative"));
        }

        let n = flights.len();
        let idle = |a: &Flight, b: &Flight| file.idle_cost_per_minute * (b.dep - a.arr).max(0);
        let mut succ = vec![Vec::new(); n];
        match &file.arcs {
            Some(arcs) => {
                let mut seen = HashSet::new();
                for a in arcs {
                    let lookup = |id: &str| {
                        ids.get(id)
                            .copied()
                            .ok_or_else(|| Error::input(format!("arc references unknown flight {id}")))
                    };
                    let (u, v) = (lookup(&a.from)?, lookup(&a.to)?);
                    if u == v || !seen.insert((u, v)) {
                        return Err(Error::input(format!("invalid or repeated arc {} -> {}", a.from, a.to)));
                    }
                    let cost = a.cost.unwrap_or_else(|| idle(&flights[u], &flights[v]));
                    if cost < 0 {
                        return Err(Error::input("arc costs must be nonnegative"));
                    }
                    succ[u].push((v, cost));
                }
            }
            None => {
                for u in 0..n {
                    for v in 0..n {
                        if u != v && flights[u].arr + file.min_turn <= flights[v].dep {
                            succ[u].push((v, idle(&flights[u], &flights[v])));
                        }
                    }
                }
            }
        }
        let topo = topological_order(&succ)?;
        Ok(ConnectionNetwork {
            name: file.name.clone().unwrap_or_else(|| "network".into()),
            flights,
            succ,
            topo,
            resource_limit,
            route_cost: file.route_cost,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_flights(&self) -> usize {
        self.flights.len()
    }

    pub fn flights(&self) -> &[Flight] {
        &self.flights
    }

    pub fn successors(&self, f: usize) -> &[(usize, i64)] {
        &self.succ[f]
    }

    pub fn resource_limit(&self) -> i64 {
        self.resource_limit
    }

    fn arc_cost(&self, u: usize, v: usize) -> Option<i64> {
        self.succ[u].iter().find(|&&(w, _)| w == v).map(|&(_, c)| c)
    }

    /// Cost of a flight sequence, or `None` when it is not a legal route.
    pub fn route_cost(&self, path: &[usize]) -> Option<i64> {
        let first = *path.first()?;
        if path.iter().any(|&f| f >= self.n_flights()) {
            return None;
        }
        let mut cost = self.route_cost + self.flights[first].cost;
        let mut resource = self.flights[first].resource;
        for w in path.windows(2) {
            cost += self.arc_cost(w[0], w[1])? + self.flights[w[1]].cost;
            resource += self.flights[w[1]].resource;
        }
        (resource <= self.resource_limit).then_some(cost)
    }

    /// Every resource-feasible source-to-sink path, in DFS order.
    pub fn enumerate_routes(&self, limit: usize) -> Result<Vec<(Vec<usize>, i64)>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        for &s in &self.topo {
            path.push(s);
            self.extend_all(&mut path, self.flights[s].resource, self.route_cost + self.flights[s].cost, &mut out, limit)?;
            path.pop();
        }
        Ok(out)
    }

    fn extend_all(
        &self,
        path: &mut Vec<usize>,
        resource: i64,
        cost: i64,
        out: &mut Vec<(Vec<usize>, i64)>,
        limit: usize,
    ) -> Result<()> {
        if out.len() >= limit {
            return Err(Error::Size {
                what: "route enumeration",
                size: out.len() + 1,
                limit,
            });
        }
        out.push((path.clone(), cost));
        let u = *path.last().expect("nonempty path");
        for &(v, arc) in &self.succ[u] {
            let r = resource + self.flights[v].resource;
            if r <= self.resource_limit {
                path.push(v);
                self.extend_all(path, r, cost + arc + self.flights[v].cost, out, limit)?;
                path.pop();
            }
        }
        Ok(())
    }

    /// `1 +` the sum of all resource-unconstrained route costs, a safe cost for
    /// slack columns. Saturates rather than overflowing.
    pub fn big_m(&self) -> f64 {
        // paths ending at each node: count and cost sum
        let n = self.n_flights();
        let mut count = vec![1.0f64; n];
        let mut sum: Vec<f64> = self.flights.iter().map(|f| (self.route_cost + f.cost) as f64).collect();
        for &u in &self.topo {
            for &(v, arc) in &self.succ[u] {
                count[v] += count[u];
                sum[v] += sum[u] + count[u] * (arc + self.flights[v].cost) as f64;
            }
        }
        (1.0 + sum.iter().sum::<f64>()).min(1e12)
    }

    /// Minimum-reduced-cost routes by label setting.
    ///
    /// `duals` holds one value per flight. Flights marked in `excluded` are
    /// removed from the network, and routes whose flight set appears in
    /// `forbidden` are never returned.
    pub fn price(&self, duals: &[f64], excluded: &[bool], forbidden: &[Vec<usize>], max_routes: usize) -> Result<PricingResult> {
        let n = self.n_flights();
        if duals.len() != n || excluded.len() != n {
            return Err(Error::Dimension {
                expected: n,
                actual: if duals.len() != n { duals.len() } else { excluded.len() },
            });
        }
        let forbidden_masks: Vec<Vec<bool>> = forbidden
            .iter()
            .map(|set| {
                let mut m = vec![false; n];
                for &f in set {
                    if f < n {
                        m[f] = true;
                    }
                }
                m
            })
            .collect();
        let forbidden_sets: HashSet<Vec<usize>> = forbidden
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect();
        // a label is tainted while some forbidden route still contains its flights
        let tainted = |path: &[usize]| forbidden_masks.iter().any(|m| path.iter().all(|&f| m[f]));

        let mut pending: Vec<Vec<Label>> = vec![Vec::new(); n];
        for f in 0..n {
            if !excluded[f] {
                let path = vec![f];
                pending[f].push(Label {
                    resource: self.flights[f].resource,
                    cost: self.route_cost + self.flights[f].cost,
                    reduced: (self.route_cost + self.flights[f].cost) as f64 - duals[f],
                    tainted: tainted(&path),
                    path,
                });
            }
        }
        let mut labels_created = pending.iter().map(Vec::len).sum::<usize>();
        let mut complete: Vec<Label> = Vec::new();
        let mut min_by_last = vec![None; n];
        for &u in &self.topo {
            if excluded[u] {
                continue;
            }
            let here = dominance_filter(std::mem::take(&mut pending[u]));
            for l in &here {
                for &(v, arc) in &self.succ[u] {
                    if excluded[v] {
                        continue;
                    }
                    let resource = l.resource + self.flights[v].resource;
                    if resource > self.resource_limit {
                        continue;
                    }
                    let mut path = l.path.clone();
                    path.push(v);
                    let step = arc + self.flights[v].cost;
                    pending[v].push(Label {
                        resource,
                        cost: l.cost + step,
                        reduced: l.reduced + step as f64 - duals[v],
                        tainted: l.tainted && tainted(&path),
                        path,
                    });
                    labels_created += 1;
                }
            }
            let legal: Vec<Label> = here
                .into_iter()
                .filter(|l| {
                    if !l.tainted {
                        return true;
                    }
                    let mut s = l.path.clone();
                    s.sort_unstable();
                    !forbidden_sets.contains(&s)
                })
                .collect();
            min_by_last[u] = legal.iter().map(|l| l.reduced).min_by(f64::total_cmp);
            complete.extend(legal);
        }

        complete.sort_by(|a, b| a.reduced.total_cmp(&b.reduced).then_with(|| a.path.cmp(&b.path)));
        let min_reduced_cost = complete.first().map(|l| l.reduced);
        let mut seen = HashSet::new();
        let routes = complete
            .into_iter()
            .filter(|l| l.reduced < -1e-9)
            .filter(|l| {
                let mut s = l.path.clone();
                s.sort_unstable();
                seen.insert(s)
            })
            .take(max_routes)
            .map(|l| PricedRoute {
                flights: l.path,
                cost: l.cost,
                reduced_cost: l.reduced,
            })
            .collect();
        Ok(PricingResult {
            routes,
            min_reduced_cost,
            min_by_last,
            labels_created,
        })
    }
}

#[derive(Clone, Debug)]
struct Label {
    resource: i64,
    cost: i64,
    reduced: f64,
    tainted: bool,
    path: Vec<usize>,
}

/// Drops labels dominated by an untainted label with no larger reduced cost
/// and resource use. Exact ties keep the first label only.
fn dominance_filter(mut labels: Vec<Label>) -> Vec<Label> {
    labels.sort_by(|a, b| {
        a.reduced
            .total_cmp(&b.reduced)
            .then(a.resource.cmp(&b.resource))
            .then(a.tainted.cmp(&b.tainted))
            .then_with(|| a.path.cmp(&b.path))
    });
    let mut kept: Vec<Label> = Vec::with_capacity(labels.len());
    for l in labels {
        let dominated = kept
            .iter()
            .any(|k| !k.tainted && k.reduced <= l.reduced + 1e-12 && k.resource <= l.resource);
        if !dominated {
            kept.push(l);
        }
    }
    kept
}

fn topological_order(succ: &[Vec<(usize, i64)>]) -> Result<Vec<usize>> {
    let n = succ.len();
    let mut indeg = vec![0usize; n];
    for s in succ {
        for &(v, _) in s {
            indeg[v] += 1;
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for &(v, _) in &succ[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert(v);
            }
        }
    }
    if order.len() != n {
        return Err(Error::input("connection network contains a cycle"));
    }
    Ok(order)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PricedRoute {
    /// Flights in visiting order.
    pub flights: Vec<usize>,
    pub cost: i64,
    pub reduced_cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PricingResult {
    /// Routes with negative reduced cost, best first.
    pub routes: Vec<PricedRoute>,
    /// Smallest reduced cost over all admissible routes.
    pub min_reduced_cost: Option<f64>,
    /// Smallest reduced cost of the admissible routes ending at each flight.
    pub min_by_last: Vec<Option<f64>>,
    pub labels_created: usize,
}

impl PricingResult {
    /// Lower bound on `Σ_r c̄_r x_r` over partitions: the routes ending at one
    /// flight share it, so at most one of them is used.
    pub fn reduced_cost_bound(&self) -> f64 {
        self.min_by_last.iter().flatten().map(|m| m.min(0.0)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chain() -> ConnectionNetwork {
        ConnectionNetwork::from_json_str(
            r#"{"flights":[{"id":"f1","dep":0,"arr":60,"cost":2},{"id":"f2","dep":90,"arr":150,"cost":3}],
                "min_turn":30}"#,
        )
        .unwrap()
    }

    #[test]
    fn zero_duals_give_nothing() {
        let net = chain();
        let r = net.price(&[0.0; 2], &[false; 2], &[], 10).unwrap();
        assert!(r.routes.is_empty());
        assert!(r.min_reduced_cost.unwrap() >= 0.0);
    }

    #[test]
    fn hand_evaluated_chain() {
        let net = chain();
        let r = net.price(&[10.0, 10.0], &[false; 2], &[], 10).unwrap();
        assert_eq!(r.routes[0].flights, vec![0, 1]);
        assert_eq!(r.routes[0].cost, 5);
        assert!((r.routes[0].reduced_cost + 15.0).abs() < 1e-12);
        assert_eq!(r.routes.len(), 3);
    }

    #[test]
    fn forbidden_route_skipped_and_exclusion() {
        let net = chain();
        let r = net.price(&[10.0, 10.0], &[false; 2], &[vec![0, 1]], 10).unwrap();
        assert!(r.routes.iter().all(|p| p.flights != vec![0, 1]));
        assert!((r.min_reduced_cost.unwrap() + 8.0).abs() < 1e-12);
        let r = net.price(&[10.0, 10.0], &[true, false], &[], 10).unwrap();
        assert_eq!(r.routes.len(), 1);
        assert_eq!(r.routes[0].flights, vec![1]);
    }

    #[test]
    fn rejects_cycles_and_bad_flights() {
        let cyc = r#"{"flights":[{"id":"a","dep":0,"arr":1,"cost":1},{"id":"b","dep":2,"arr":3,"cost":1}],
                      "arcs":[{"from":"a","to":"b"},{"from":"b","to":"a"}]}"#;
        assert!(ConnectionNetwork::from_json_str(cyc).is_err());
        let over = r#"{"flights":[{"id":"a","dep":0,"arr":100,"cost":1}],"resource_limit":50}"#;
        assert!(ConnectionNetwork::from_json_str(over).is_err());
        let dup = r#"{"flights":[{"id":"a","dep":0,"arr":1,"cost":1},{"id":"a","dep":2,"arr":3,"cost":1}]}"#;
        assert!(ConnectionNetwork::from_json_str(dup).is_err());
    }

    fn random_network(rng: &mut ChaCha8Rng, n: usize) -> ConnectionNetwork {
        let flights: Vec<FlightSpec> = (0..n)
            .map(|i| {
                let dep = rng.gen_range(0..600);
                FlightSpec {
                    id: format!("F{i}"),
                    dep,
                    arr: dep + rng.gen_range(40..120),
                    cost: rng.gen_range(0..20),
                    resource_use: None,
                }
            })
            .collect();
        ConnectionNetwork::from_file(&NetworkFile {
            name: None,
            flights,
            arcs: None,
            min_turn: 20,
            resource_limit: Some(rng.gen_range(150..300)),
            route_cost: rng.gen_range(0..30),
            idle_cost_per_minute: rng.gen_range(0..2),
        })
        .unwrap()
    }

    #[test]
    fn best_route_matches_path_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..60 {
            let net = random_network(&mut rng, 10);
            let duals: Vec<f64> = (0..10).map(|_| rng.gen_range(-10.0..80.0)).collect();
            let excluded: Vec<bool> = (0..10).map(|_| rng.gen_bool(0.15)).collect();
            let all = net.enumerate_routes(100_000).unwrap();
            let admissible: Vec<_> = all.iter().filter(|(p, _)| p.iter().all(|&f| !excluded[f])).collect();
            let forbidden: Vec<Vec<usize>> = admissible
                .iter()
                .filter(|_| rng.gen_bool(0.1))
                .map(|(p, _)| p.clone())
                .collect();
            let rc = |p: &[usize], c: i64| c as f64 - p.iter().map(|&f| duals[f]).sum::<f64>();
            let oracle = admissible
                .iter()
                .filter(|(p, _)| !forbidden.contains(p))
                .map(|(p, c)| rc(p, *c))
                .fold(f64::INFINITY, f64::min);
            let r = net.price(&duals, &excluded, &forbidden, 10).unwrap();
            match r.min_reduced_cost {
                Some(m) => assert!((m - oracle).abs() < 1e-9, "{m} vs {oracle}"),
                None => assert!(oracle.is_infinite()),
            }
            for (last, m) in r.min_by_last.iter().enumerate() {
                let expect = admissible
                    .iter()
                    .filter(|(p, _)| !forbidden.contains(p) && p.last() == Some(&last))
                    .map(|(p, c)| rc(p, *c))
                    .fold(f64::INFINITY, f64::min);
                match m {
                    Some(m) => assert!((m - expect).abs() < 1e-9),
                    None => assert!(expect.is_infinite()),
                }
            }
            for route in &r.routes {
                assert_eq!(net.route_cost(&route.flights), Some(route.cost));
                assert!(!forbidden.contains(&route.flights));
                assert!((rc(&route.flights, route.cost) - route.reduced_cost).abs() < 1e-9);
                assert!(route.flights.windows(2).all(|w| net.flights()[w[0]].arr <= net.flights()[w[1]].dep));
            }
        }
    }

    #[test]
    fn big_m_exceeds_any_route_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = random_network(&mut rng, 8);
        let total: i64 = net.enumerate_routes(100_000).unwrap().iter().map(|r| r.1).sum();
        assert!(net.big_m() > total as f64);
    }
}
