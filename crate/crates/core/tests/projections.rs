use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgpursuit::projection::{
    exact_project_oracle, head_project, tail_project, Backend, ProjectionMode, TopologyConstraint,
};
use sgpursuit::{AttributedNetwork, IndexSet};

/// Random graph with `n <= 15` nodes plus a random, partly sparse signal.
pub fn random_instance(seed: u64) -> (AttributedNetwork, Vec<f64>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=15);
    let q: f64 = rng.random_range(0.1..0.6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(q) {
                edges.push((u, v));
            }
        }
    }
    let density: f64 = rng.random_range(0.2..1.0);
    let x: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(density) {
                rng.random_range(-3.0..3.0)
            } else {
                0.0
            }
        })
        .collect();
    let k = rng.random_range(1..=n);
    let net = AttributedNetwork::new(n, edges, vec![vec![0.0]; n]).unwrap();
    (net, x, k)
}

fn connected_oracle(net: &AttributedNetwork, s: &IndexSet) -> bool {
    // union-find over induced edges
    let mut parent: Vec<usize> = (0..net.node_count()).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        if p[v] != v {
            let r = find(p, p[v]);
            p[v] = r;
        }
        p[v]
    }
    for &(u, v) in net.edges() {
        if s.contains(u) && s.contains(v) {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            parent[a] = b;
        }
    }
    let roots: std::collections::HashSet<usize> = s.iter().map(|v| find(&mut parent, v)).collect();
    roots.len() == 1
}

#[test]
fn pcst_meets_approximation_factors() {
    let (c_t, c_h) = Backend::PcstApprox.approx_factors();
    let mut worst_head = f64::INFINITY;
    let mut worst_tail: f64 = 0.0;
    for seed in 0..200 {
        let (net, x, k) = random_instance(seed);
        let best_head = exact_project_oracle(&x, k, &net, ProjectionMode::Head, 15).unwrap();
        let best_tail = exact_project_oracle(&x, k, &net, ProjectionMode::Tail, 15).unwrap();
        let c = TopologyConstraint::connected(k, Backend::PcstApprox);
        let head = head_project(&x, &c, &net).unwrap();
        let tail = tail_project(&x, &c, &net).unwrap();
        for r in [&head, &tail] {
            if !r.degenerate {
                assert!(r.support.len() <= r.relaxed_budget, "seed {seed}");
                assert!(connected_oracle(&net, &r.support), "seed {seed}");
            }
        }
        assert!(
            head.captured_mass >= c_h * best_head.captured_mass - 1e-12,
            "seed {seed}: head {} vs exact {}",
            head.captured_mass,
            best_head.captured_mass
        );
        let (res, best_res) = (tail.residual(&x), best_tail.residual(&x));
        assert!(
            res <= c_t * best_res + 1e-12,
            "seed {seed}: tail {res} vs exact {best_res}"
        );
        if best_head.captured_mass > 0.0 {
            worst_head = worst_head.min(head.captured_mass / best_head.captured_mass);
        }
        if best_res > 0.0 {
            worst_tail = worst_tail.max(res / best_res);
        }
    }
    eprintln!("worst head ratio {worst_head:.4}, worst tail ratio {worst_tail:.4}");
}

#[test]
fn exact_head_monotone_in_budget() {
    for seed in 0..50 {
        let (net, x, _) = random_instance(1000 + seed);
        let mut last = 0.0;
        for k in 1..=net.node_count() {
            let r = exact_project_oracle(&x, k, &net, ProjectionMode::Head, 15).unwrap();
            assert!(r.captured_mass >= last - 1e-12);
            last = r.captured_mass;
        }
    }
}

#[test]
fn exact_head_and_tail_agree_on_unique_feasible_optimum() {
    // Signal supported on a connected path segment; k covers it.
    let edges: Vec<(usize, usize)> = (0..9).map(|i| (i, i + 1)).collect();
    let net = AttributedNetwork::new(10, edges, vec![vec![0.0]; 10]).unwrap();
    let mut x = vec![0.0; 10];
    x[3] = 1.0;
    x[4] = -2.0;
    x[5] = 0.5;
    let head = exact_project_oracle(&x, 3, &net, ProjectionMode::Head, 15).unwrap();
    let tail = exact_project_oracle(&x, 3, &net, ProjectionMode::Tail, 15).unwrap();
    assert_eq!(head.support, tail.support);
    assert_eq!(head.support.as_slice(), &[3, 4, 5]);
}

#[test]
fn induced_connectivity_matches_union_find() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..100 {
        let (net, _, _) = random_instance(2000 + seed);
        let n = net.node_count();
        for _ in 0..20 {
            let s: IndexSet = (0..n).filter(|_| rng.random_bool(0.5)).collect();
            if s.is_empty() {
                continue;
            }
            assert_eq!(
                net.induced_subgraph_connected(&s).unwrap(),
                connected_oracle(&net, &s)
            );
        }
    }
}
