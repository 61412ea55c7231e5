//! Prize-collecting Steiner tree projection.
//!
//! Node prizes are `x_i^2`, every edge costs the same multiplier `lambda`.
//! For a fixed `lambda` the unrooted Goemans-Williamson moat-growing scheme
//! builds a forest of tight edges, and the best subtree of that forest
//! (maximum prize minus edge cost) is extracted by dynamic programming. An
//! outer bisection on `lambda` steers the tree size into `[k, budget]`.
//!
//! Growth events are driven by per-cluster heaps of edge halves. Each half
//! stores the value of its cluster's growth clock at which it becomes due;
//! heaps are merged smaller-into-larger, which keeps one growth phase at
//! `O(m log^2 n)`. A node's heap is only built once its cluster first needs
//! it.
//!
//! Before any of this the graph is cut down to the nodes within `budget - 1`
//! hops of a positive prize, the only region a budget-sized connected
//! support with nonzero mass can occupy.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Backend, ProjectionResult};
use crate::error::{Error, Result};
use crate::graph::{AttributedNetwork, IndexSet};
use crate::util::OrdF64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcstOptions {
    /// Tree sizes up to `ceil(relaxation * k)` are accepted.
    pub relaxation: f64,
    pub max_bisections: usize,
}

impl Default for PcstOptions {
    fn default() -> Self {
        PcstOptions {
            relaxation: 1.0,
            max_bisections: 32,
        }
    }
}

impl PcstOptions {
    pub fn budget(&self, k: usize) -> usize {
        ((self.relaxation.max(1.0) * k as f64).ceil() as usize).max(k)
    }
}

/// Min-heap entry: (key, edge half, version of that half).
type PartEntry = Reverse<(OrdF64, usize, u32)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum EventKind {
    Edge,
    Deactivate,
}

/// Global queue entry: (time, kind, cluster, cluster version).
type Event = Reverse<(OrdF64, EventKind, usize, u64)>;

struct Cluster {
    active: bool,
    merged: bool,
    prize: f64,
    /// Sum of all moats inside the cluster at time `since`.
    dual_base: f64,
    /// Growth clock of the cluster's heap at time `since`.
    clock_base: f64,
    since: f64,
    /// Version of the queued edge event.
    version: u64,
    /// Due time of the queued edge event, if any.
    pending: Option<f64>,
    heap: BinaryHeap<PartEntry>,
}

impl Cluster {
    fn clock(&self, t: f64) -> f64 {
        if self.active {
            self.clock_base + (t - self.since)
        } else {
            self.clock_base
        }
    }

    fn dual(&self, t: f64) -> f64 {
        if self.active {
            self.dual_base + (t - self.since)
        } else {
            self.dual_base
        }
    }
}

/// Edge halves incident to each node, in CSR layout. Half `2e` belongs to
/// the lower endpoint of edge `e`, half `2e + 1` to the upper one.
pub(crate) struct Incidence {
    start: Vec<usize>,
    parts: Vec<usize>,
}

impl Incidence {
    pub(crate) fn new(net: &AttributedNetwork) -> Self {
        let n = net.node_count();
        let mut start = vec![0; n + 1];
        for &(u, v) in net.edges() {
            start[u + 1] += 1;
            start[v + 1] += 1;
        }
        for i in 0..n {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut parts = vec![0; 2 * net.edge_count()];
        for (e, &(u, v)) in net.edges().iter().enumerate() {
            parts[fill[u]] = 2 * e;
            fill[u] += 1;
            parts[fill[v]] = 2 * e + 1;
            fill[v] += 1;
        }
        Incidence { start, parts }
    }

    fn of(&self, v: usize) -> &[usize] {
        &self.parts[self.start[v]..self.start[v + 1]]
    }
}

struct Grower<'a> {
    net: &'a AttributedNetwork,
    incidence: &'a Incidence,
    eps: f64,
    now: f64,
    clusters: Vec<Cluster>,
    part_key: Vec<f64>,
    part_version: Vec<u32>,
    seeded: Vec<bool>,
    uf_parent: Vec<usize>,
    /// Cluster owning each union-find root.
    root_cluster: Vec<usize>,
    events: BinaryHeap<Event>,
    forest: Vec<usize>,
}

impl<'a> Grower<'a> {
    fn new(
        net: &'a AttributedNetwork,
        incidence: &'a Incidence,
        prizes: &[f64],
        cost: f64,
    ) -> Self {
        let n = net.node_count();
        let scale = prizes.iter().fold(cost, |a, &b| a.max(b));
        let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let clusters = prizes
            .iter()
            .map(|&p| Cluster {
                active: p > eps,
                merged: false,
                prize: p,
                dual_base: 0.0,
                clock_base: 0.0,
                since: 0.0,
                version: 0,
                pending: None,
                heap: BinaryHeap::new(),
            })
            .collect();
        let m = net.edge_count();
        let mut part_key = vec![0.0; 2 * m];
        for (e, &(u, v)) in net.edges().iter().enumerate() {
            let (ku, kv) = match (prizes[u] > eps, prizes[v] > eps) {
                (true, false) => (cost, 0.0),
                (false, true) => (0.0, cost),
                _ => (cost / 2.0, cost / 2.0),
            };
            part_key[2 * e] = ku;
            part_key[2 * e + 1] = kv;
        }
        let mut g = Grower {
            net,
            incidence,
            eps,
            now: 0.0,
            clusters,
            part_key,
            part_version: vec![0; 2 * m],
            seeded: vec![false; n],
            uf_parent: (0..n).collect(),
            root_cluster: (0..n).collect(),
            events: BinaryHeap::new(),
            forest: Vec::new(),
        };
        for c in 0..n {
            if g.clusters[c].active {
                g.schedule(c);
                g.schedule_deactivation(c);
            }
        }
        g
    }

    /// Node clusters get their heap of incident edge halves on first use;
    /// zero-prize nodes far from any activity never pay for it.
    fn seed(&mut self, c: usize) {
        if c >= self.seeded.len() || self.seeded[c] {
            return;
        }
        self.seeded[c] = true;
        let entries: Vec<PartEntry> = self
            .incidence
            .of(c)
            .iter()
            .map(|&part| Reverse((OrdF64(self.part_key[part]), part, self.part_version[part])))
            .collect();
        self.clusters[c].heap = BinaryHeap::from(entries);
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.uf_parent[root] != root {
            root = self.uf_parent[root];
        }
        let mut cur = v;
        while self.uf_parent[cur] != root {
            let next = self.uf_parent[cur];
            self.uf_parent[cur] = root;
            cur = next;
        }
        root
    }

    fn cluster_of(&mut self, v: usize) -> usize {
        let r = self.find(v);
        self.root_cluster[r]
    }

    fn endpoint(&self, part: usize) -> usize {
        let (u, v) = self.net.edges()[part / 2];
        if part.is_multiple_of(2) {
            u
        } else {
            v
        }
    }

    fn set_part(&mut self, part: usize, cluster: usize, key: f64) {
        self.seed(cluster);
        self.part_version[part] += 1;
        self.part_key[part] = key;
        let version = self.part_version[part];
        self.clusters[cluster]
            .heap
            .push(Reverse((OrdF64(key), part, version)));
    }

    /// Drops stale entries and returns the earliest live edge half.
    fn heap_top(&mut self, c: usize) -> Option<(f64, usize)> {
        self.seed(c);
        let heap = &mut self.clusters[c].heap;
        while let Some(&Reverse((OrdF64(key), part, version))) = heap.peek() {
            if self.part_version[part] == version {
                return Some((key, part));
            }
            heap.pop();
        }
        None
    }

    /// (Re)queues the edge event of an active cluster; a no-op when the
    /// queued event is still due at the same time.
    fn schedule(&mut self, c: usize) {
        if !self.clusters[c].active || self.clusters[c].merged {
            return;
        }
        let now = self.now;
        let due = self
            .heap_top(c)
            .map(|(key, _)| now + (key - self.clusters[c].clock(now)).max(0.0));
        let cl = &mut self.clusters[c];
        if due == cl.pending {
            return;
        }
        cl.version += 1;
        cl.pending = due;
        if let Some(t) = due {
            self.events
                .push(Reverse((OrdF64(t), EventKind::Edge, c, cl.version)));
        }
    }

    /// A cluster's deactivation time is fixed from its creation until it
    /// is merged, so this is queued once.
    fn schedule_deactivation(&mut self, c: usize) {
        let cl = &self.clusters[c];
        let t = cl.since + (cl.prize - cl.dual_base).max(0.0);
        self.events.push(Reverse((
            OrdF64(t.max(self.now)),
            EventKind::Deactivate,
            c,
            0,
        )));
    }

    fn run(&mut self) {
        while let Some(Reverse((OrdF64(t), kind, c, version))) = self.events.pop() {
            let cl = &self.clusters[c];
            if cl.merged || !cl.active || (kind == EventKind::Edge && cl.version != version) {
                continue;
            }
            self.now = self.now.max(t);
            let now = self.now;
            let cl = &mut self.clusters[c];
            cl.pending = None;
            cl.version += 1;
            match kind {
                EventKind::Deactivate => {
                    cl.dual_base = cl.prize;
                    cl.clock_base = cl.clock(now);
                    cl.active = false;
                    cl.since = now;
                }
                EventKind::Edge => self.edge_event(c),
            }
        }
    }

    fn edge_event(&mut self, c: usize) {
        let Some((_, part)) = self.heap_top(c) else {
            self.schedule(c);
            return;
        };
        self.clusters[c].heap.pop();
        let other_part = part ^ 1;
        let other = self.cluster_of(self.endpoint(other_part));
        if other == c {
            self.part_version[part] += 1;
            self.part_version[other_part] += 1;
            self.schedule(c);
            return;
        }
        let now = self.now;
        let slack = (self.part_key[other_part] - self.clusters[other].clock(now)).max(0.0);
        if slack <= self.eps {
            self.merge(c, other, part / 2);
        } else if self.clusters[other].active {
            let kc = self.clusters[c].clock(now) + slack / 2.0;
            let ko = self.clusters[other].clock(now) + slack / 2.0;
            self.set_part(part, c, kc);
            self.set_part(other_part, other, ko);
            self.schedule(c);
            self.schedule(other);
        } else {
            let kc = self.clusters[c].clock(now) + slack;
            let ko = self.clusters[other].clock(now);
            self.set_part(part, c, kc);
            self.set_part(other_part, other, ko);
            self.schedule(c);
        }
    }

    fn merge(&mut self, a: usize, b: usize, edge: usize) {
        self.seed(a);
        self.seed(b);
        let now = self.now;
        let (large, small) = if self.clusters[a].heap.len() >= self.clusters[b].heap.len() {
            (a, b)
        } else {
            (b, a)
        };
        let clock_base = self.clusters[large].clock(now);
        let shift = clock_base - self.clusters[small].clock(now);
        let prize = self.clusters[a].prize + self.clusters[b].prize;
        let dual_base = self.clusters[a].dual(now) + self.clusters[b].dual(now);
        let mut heap = std::mem::take(&mut self.clusters[large].heap);
        let moved = std::mem::take(&mut self.clusters[small].heap);
        for Reverse((OrdF64(key), part, version)) in moved {
            if self.part_version[part] == version {
                self.part_version[part] += 1;
                self.part_key[part] = key + shift;
                heap.push(Reverse((OrdF64(key + shift), part, version + 1)));
            }
        }
        for c in [a, b] {
            let cl = &mut self.clusters[c];
            cl.merged = true;
            cl.active = false;
            cl.version += 1;
        }
        let id = self.clusters.len();
        self.clusters.push(Cluster {
            active: prize - dual_base > self.eps,
            merged: false,
            prize,
            dual_base,
            clock_base,
            since: now,
            version: 0,
            pending: None,
            heap,
        });
        let (u, v) = self.net.edges()[edge];
        let (ru, rv) = (self.find(u), self.find(v));
        self.uf_parent[ru] = rv;
        self.root_cluster[rv] = id;
        self.forest.push(edge);
        if self.clusters[id].active {
            self.schedule(id);
            self.schedule_deactivation(id);
        }
    }
}

/// Best subtree of the tight-edge forest for edge cost `cost`: node list and
/// tree edges (as node pairs).
pub(crate) fn pcst_tree(
    net: &AttributedNetwork,
    incidence: &Incidence,
    prizes: &[f64],
    cost: f64,
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut grower = Grower::new(net, incidence, prizes, cost);
    grower.run();
    let n = net.node_count();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in &grower.forest {
        let (u, v) = net.edges()[e];
        adj[u].push(v);
        adj[v].push(u);
    }

    // Rooted DP per forest component; value(v) = prize + sum of profitable
    // child subtrees, each child paying the connecting edge.
    let mut parent = vec![usize::MAX; n];
    let mut value = vec![0.0f64; n];
    let mut visited = vec![false; n];
    let mut best: Option<(f64, usize)> = None;
    for root in 0..n {
        if visited[root] {
            continue;
        }
        let mut order = Vec::new();
        let mut stack = vec![root];
        visited[root] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &u in &adj[v] {
                if !visited[u] {
                    visited[u] = true;
                    parent[u] = v;
                    stack.push(u);
                }
            }
        }
        for &v in order.iter().rev() {
            let mut total = prizes[v];
            for &u in &adj[v] {
                if u != parent[v] {
                    total += (value[u] - cost).max(0.0);
                }
            }
            value[v] = total;
            let better = match best {
                None => true,
                Some((b, bv)) => total > b || (total == b && v < bv),
            };
            if better {
                best = Some((total, v));
            }
        }
    }
    let Some((_, top)) = best else {
        return (Vec::new(), Vec::new());
    };
    let mut nodes = vec![top];
    let mut edges = Vec::new();
    let mut stack = vec![top];
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if u != parent[v] && value[u] - cost > 0.0 {
                nodes.push(u);
                edges.push((v, u));
                stack.push(u);
            }
        }
    }
    (nodes, edges)
}

/// Best-first spanning tree: starting from the highest-prize node, always
/// attach the frontier node with the largest prize. When `within` is given
/// the search stays inside that node set (which must be connected). Stops
/// after `limit` nodes. Returns nodes in attachment order plus tree edges;
/// every prefix of the order is connected.
pub(crate) fn prize_first_tree(
    net: &AttributedNetwork,
    prizes: &[f64],
    within: Option<&[usize]>,
    limit: usize,
) -> (Vec<usize>, Vec<(usize, usize)>) {
    let n = net.node_count();
    let mut allowed = vec![within.is_none(); n];
    if let Some(set) = within {
        for &v in set {
            allowed[v] = true;
        }
    }
    let start = (0..n)
        .filter(|&v| allowed[v])
        .max_by(|&a, &b| prizes[a].total_cmp(&prizes[b]).then(b.cmp(&a)));
    let Some(start) = start else {
        return (Vec::new(), Vec::new());
    };
    let mut taken = vec![false; n];
    let mut order = Vec::new();
    let mut edges = Vec::new();
    let mut frontier: BinaryHeap<(OrdF64, Reverse<usize>, usize)> = BinaryHeap::new();
    frontier.push((OrdF64(prizes[start]), Reverse(start), usize::MAX));
    while let Some((_, Reverse(v), from)) = frontier.pop() {
        if taken[v] {
            continue;
        }
        taken[v] = true;
        order.push(v);
        if from != usize::MAX {
            edges.push((from, v));
        }
        if order.len() >= limit {
            break;
        }
        for &u in net.neighbors(v) {
            if allowed[u] && !taken[u] {
                frontier.push((OrdF64(prizes[u]), Reverse(u), v));
            }
        }
    }
    (order, edges)
}

/// Grows `start` (connected) up to `budget` nodes by repeatedly attaching
/// the path with the best prize per added node. Paths are found by a
/// breadth-first search from the current set that keeps, per node, the
/// highest-prize shortest path, so zero-prize connectors are looked through.
fn augment(net: &AttributedNetwork, prizes: &[f64], start: &[usize], budget: usize) -> Vec<usize> {
    let n = net.node_count();
    let mut inside = vec![false; n];
    let mut set = start.to_vec();
    for &v in start {
        inside[v] = true;
    }
    let mut depth = vec![usize::MAX; n];
    let mut gain = vec![0.0f64; n];
    let mut via = vec![usize::MAX; n];
    while set.len() < budget {
        let slack = budget - set.len();
        let mut touched = Vec::new();
        let mut layer: Vec<usize> = set.clone();
        let mut best: Option<(f64, usize)> = None;
        for d in 1..=slack {
            let mut next = Vec::new();
            for &v in &layer {
                let base = if inside[v] { 0.0 } else { gain[v] };
                for &u in net.neighbors(v) {
                    if inside[u] {
                        continue;
                    }
                    if depth[u] == usize::MAX {
                        depth[u] = d;
                        gain[u] = base + prizes[u];
                        via[u] = v;
                        touched.push(u);
                        next.push(u);
                    } else if depth[u] == d && base + prizes[u] > gain[u] {
                        gain[u] = base + prizes[u];
                        via[u] = v;
                    }
                }
            }
            for &u in &next {
                if prizes[u] > 0.0 {
                    let ratio = gain[u] / d as f64;
                    if best.is_none_or(|(r, _)| ratio > r) {
                        best = Some((ratio, u));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            layer = next;
        }
        let chosen = best.map(|(_, u)| u);
        if let Some(mut u) = chosen {
            while !inside[u] {
                inside[u] = true;
                set.push(u);
                u = via[u];
            }
        }
        for v in touched {
            depth[v] = usize::MAX;
            gain[v] = 0.0;
            via[v] = usize::MAX;
        }
        if chosen.is_none() {
            break;
        }
    }
    set
}

/// Removes the lowest-prize leaves until at most `budget` nodes remain.
fn trim_tree(
    nodes: &[usize],
    edges: &[(usize, usize)],
    prizes: &[f64],
    budget: usize,
) -> Vec<usize> {
    if nodes.len() <= budget {
        return nodes.to_vec();
    }
    let mut local = std::collections::HashMap::with_capacity(nodes.len());
    for (i, &v) in nodes.iter().enumerate() {
        local.insert(v, i);
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for &(u, v) in edges {
        let (a, b) = (local[&u], local[&v]);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; nodes.len()];
    let mut leaves: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
    for (i, &d) in degree.iter().enumerate() {
        if d <= 1 {
            leaves.push(Reverse((OrdF64(prizes[nodes[i]]), nodes[i])));
        }
    }
    let mut remaining = nodes.len();
    while remaining > budget {
        let Reverse((_, v)) = leaves.pop().expect("a tree always has a leaf");
        let i = local[&v];
        if removed[i] {
            continue;
        }
        removed[i] = true;
        remaining -= 1;
        for &j in &adj[i] {
            if !removed[j] {
                degree[j] -= 1;
                if degree[j] == 1 {
                    leaves.push(Reverse((OrdF64(prizes[nodes[j]]), nodes[j])));
                }
            }
        }
    }
    nodes
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed[*i])
        .map(|(_, &v)| v)
        .collect()
}

/// Keeps the candidate support with the most captured prize (smaller
/// support on ties).
struct Candidates<'a> {
    prizes: &'a [f64],
    best: Option<(f64, Vec<usize>)>,
}

impl Candidates<'_> {
    fn offer(&mut self, nodes: Vec<usize>) {
        let mass: f64 = nodes.iter().map(|&v| self.prizes[v]).sum();
        let better = match &self.best {
            None => true,
            Some((b, bn)) => mass > *b || (mass == *b && nodes.len() < bn.len()),
        };
        if better {
            self.best = Some((mass, nodes));
        }
    }
}

/// Nodes within `budget - 1` hops of a positive prize. Every connected set
/// of at most `budget` nodes that captures any prize lies inside, so the
/// search can run on this induced subgraph.
fn budget_ball(net: &AttributedNetwork, prizes: &[f64], budget: usize) -> Vec<usize> {
    let mut depth = vec![usize::MAX; net.node_count()];
    let mut order: Vec<usize> = (0..prizes.len()).filter(|&v| prizes[v] > 0.0).collect();
    for &v in &order {
        depth[v] = 0;
    }
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        if depth[v] + 1 >= budget {
            continue;
        }
        for &u in net.neighbors(v) {
            if depth[u] == usize::MAX {
                depth[u] = depth[v] + 1;
                order.push(u);
            }
        }
    }
    order.sort_unstable();
    order
}

/// Best candidate support for the given prizes on `net`.
fn pcst_support(
    net: &AttributedNetwork,
    prizes: &[f64],
    k: usize,
    budget: usize,
    opts: &PcstOptions,
) -> Vec<usize> {
    let max_prize = prizes.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut pool = Candidates { prizes, best: None };
    let offer_tree = |pool: &mut Candidates, nodes: &[usize], edges: &[(usize, usize)]| {
        pool.offer(trim_tree(nodes, edges, prizes, budget));
        if nodes.len() > budget {
            let (order, tree) = prize_first_tree(net, prizes, Some(nodes), usize::MAX);
            pool.offer(trim_tree(&order, &tree, prizes, budget));
            pool.offer(order[..budget].to_vec());
        }
    };

    let (grown, _) = prize_first_tree(net, prizes, None, budget);
    pool.offer(grown);

    let incidence = Incidence::new(net);
    let mut hi = 2.0 * max_prize * (1.0 + 1e-9);
    let (nodes, edges) = pcst_tree(net, &incidence, prizes, hi);
    offer_tree(&mut pool, &nodes, &edges);
    pool.offer(augment(net, prizes, &nodes[..1], budget));
    let mut lo = 0.0;
    for _ in 0..opts.max_bisections {
        let mid = 0.5 * (lo + hi);
        let (nodes, edges) = pcst_tree(net, &incidence, prizes, mid);
        let size = nodes.len();
        offer_tree(&mut pool, &nodes, &edges);
        if size > budget {
            lo = mid;
        } else if size < k {
            hi = mid;
        } else {
            break;
        }
    }
    let nodes = pool.best.expect("at least one candidate tree").1;
    augment(net, prizes, &nodes, budget)
}

/// PCST-based approximate projection onto connected subsets.
///
/// Head and tail share one search: both objectives reduce to maximizing the
/// captured prize `sum_{i in S} x_i^2` for a tree whose size fits the budget.
pub fn pcst_project(
    x: &[f64],
    k: usize,
    net: &AttributedNetwork,
    opts: &PcstOptions,
) -> Result<ProjectionResult> {
    let n = net.node_count();
    if x.len() != n {
        return Err(Error::InvalidArgument(format!(
            "vector has length {}, network has {n} nodes",
            x.len()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("budget k must be at least 1".into()));
    }
    let budget = opts.budget(k);
    let prizes: Vec<f64> = x.iter().map(|v| v * v).collect();
    let max_prize = prizes.iter().fold(0.0f64, |a, &b| a.max(b));
    if max_prize <= 0.0 || !max_prize.is_finite() {
        return Ok(ProjectionResult::degenerate(Backend::PcstApprox, budget));
    }

    let ball = budget_ball(net, &prizes, budget);
    let nodes = if ball.len() == n {
        pcst_support(net, &prizes, k, budget, opts)
    } else {
        let mut local = vec![usize::MAX; n];
        for (i, &v) in ball.iter().enumerate() {
            local[v] = i;
        }
        let edges = net
            .edges()
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]));
        let sub = AttributedNetwork::from_flat(ball.len(), 1, edges, vec![0.0; ball.len()])?;
        let sub_prizes: Vec<f64> = ball.iter().map(|&v| prizes[v]).collect();
        pcst_support(&sub, &sub_prizes, k, budget, opts)
            .into_iter()
            .map(|i| ball[i])
            .collect()
    };
    Ok(ProjectionResult::from_support(
        x,
        IndexSet::new(nodes),
        Backend::PcstApprox,
        budget,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(n: usize, edges: &[(usize, usize)]) -> AttributedNetwork {
        AttributedNetwork::new(n, edges.iter().copied(), vec![vec![0.0]; n]).unwrap()
    }

    #[test]
    fn single_spike() {
        let g = net(4, &[(0, 1), (1, 2), (2, 3)]);
        let r = pcst_project(&[0.0, 0.0, 3.0, 0.0], 1, &g, &PcstOptions::default()).unwrap();
        assert_eq!(r.support.as_slice(), &[2]);
    }

    #[test]
    fn zero_vector_is_degenerate() {
        let g = net(3, &[(0, 1)]);
        let r = pcst_project(&[0.0; 3], 2, &g, &PcstOptions::default()).unwrap();
        assert!(r.degenerate && r.support.is_empty());
    }

    #[test]
    fn bridges_through_zero_node() {
        // 0 - 1 - 2 with mass on both ends: the connector must be bought.
        let g = net(3, &[(0, 1), (1, 2)]);
        let r = pcst_project(&[1.0, 0.0, 1.0], 3, &g, &PcstOptions::default()).unwrap();
        assert_eq!(r.support.as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn connected_support_recovered_exactly() {
        let g = net(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]);
        let x = [0.0, 2.0, 1.0, 0.5, 0.0, 0.0];
        let r = pcst_project(&x, 4, &g, &PcstOptions::default()).unwrap();
        assert_eq!(r.support.as_slice(), &[1, 2, 3]);
    }

    #[test]
    fn trims_to_budget_and_stays_connected() {
        let edges: Vec<(usize, usize)> = (0..9).map(|i| (i, i + 1)).collect();
        let g = net(10, &edges);
        let x: Vec<f64> = (0..10).map(|i| 1.0 + i as f64 * 0.1).collect();
        let r = pcst_project(&x, 3, &g, &PcstOptions::default()).unwrap();
        assert!(r.support.len() <= 3);
        assert!(g.induced_subgraph_connected(&r.support).unwrap());
        assert_eq!(r.support.as_slice(), &[7, 8, 9]);
    }

    #[test]
    fn disconnected_graph_picks_heaviest_component() {
        let g = net(5, &[(0, 1), (2, 3), (3, 4)]);
        let x = [1.0, 1.0, 0.9, 0.9, 0.9];
        let r = pcst_project(&x, 3, &g, &PcstOptions::default()).unwrap();
        assert_eq!(r.support.as_slice(), &[2, 3, 4]);
    }

    #[test]
    fn ball_keeps_budget_reach_only() {
        let edges: Vec<(usize, usize)> = (0..49).map(|i| (i, i + 1)).collect();
        let g = net(50, &edges);
        let mut prizes = vec![0.0; 50];
        prizes[0] = 1.0;
        prizes[49] = 1.0;
        let ball = budget_ball(&g, &prizes, 4);
        assert_eq!(ball, vec![0, 1, 2, 3, 46, 47, 48, 49]);
    }

    #[test]
    fn far_spikes_resolved_inside_ball() {
        // Two lumps 40 hops apart; only one fits a budget of 4.
        let edges: Vec<(usize, usize)> = (0..49).map(|i| (i, i + 1)).collect();
        let g = net(50, &edges);
        let mut x = vec![0.0; 50];
        x[0] = 1.0;
        x[2] = 1.0;
        x[45] = 1.0;
        x[47] = 1.2;
        x[49] = 0.5;
        let r = pcst_project(&x, 4, &g, &PcstOptions::default()).unwrap();
        assert!(r.support.len() <= 4);
        assert!(g.induced_subgraph_connected(&r.support).unwrap());
        assert!(r.support.contains(45) && r.support.contains(47));
    }
}
