//! Network simplex for the uncapacitated transportation problem.
//!
//! Supplies and demands are scaled to integers summing to `2^40`, so flows
//! are exact and the pivot arithmetic never drifts. Costs stay in `f64`.
//! The starting basis is the north-west corner tree; entering arcs are
//! chosen by block search and the leaving arc by the last-blocking-arc rule.

use crate::error::{Error, Result};

/// Total integer mass on each side.
pub const MASS_SCALE: i64 = 1 << 40;
/// Reduced-cost tolerance of the optimality certificate, relative to the
/// largest cost.
pub const CERTIFICATE_TOL: f64 = 1e-9;
const PRICING_TOL: f64 = 1e-13;
const REFRESH_EVERY: usize = 2048;

/// Solution of a transportation problem.
#[derive(Clone, Debug)]
pub struct FlowSolution {
    /// `(i, j, mass)` for every arc with positive flow; masses sum to one.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub left_potential: Vec<f64>,
    pub right_potential: Vec<f64>,
    /// Most negative reduced cost over all arcs (relative to the largest cost).
    pub min_reduced_cost: f64,
    pub pivots: usize,
}

/// Integer masses summing exactly to `MASS_SCALE` (largest remainder).
pub fn integer_masses(weights: &[f64]) -> Result<Vec<i64>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Infeasible("weights must be finite, nonnegative and not all zero".into()));
    }
    let scaled: Vec<f64> = weights.iter().map(|w| w / total * MASS_SCALE as f64).collect();
    let mut out: Vec<i64> = scaled.iter().map(|v| v.floor() as i64).collect();
    let mut rest = MASS_SCALE - out.iter().sum::<i64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut k = 0;
    while rest > 0 {
        let i = order[k % order.len()];
        if weights[i] > 0.0 {
            out[i] += 1;
            rest -= 1;
        }
        k += 1;
    }
    while rest < 0 {
        let i = order[order.len() - 1 - (k % order.len())];
        if out[i] > 0 {
            out[i] -= 1;
            rest += 1;
        }
        k += 1;
    }
    Ok(out)
}

struct Tree<'a> {
    n: usize,
    m: usize,
    cost: &'a [f64],
    parent: Vec<usize>,
    // arc (i, j) of the edge to the parent; flow on it
    arc: Vec<(usize, usize)>,
    flow: Vec<i64>,
    children: Vec<Vec<usize>>,
    pi: Vec<f64>,
    mark: Vec<usize>,
    stamp: usize,
}

const NONE: usize = usize::MAX;

impl<'a> Tree<'a> {
    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.m + j]
    }

    /// Whether the edge from `v` to its parent is directed source to sink
    /// with `v` as the source.
    fn up(&self, v: usize) -> bool {
        v < self.n
    }

    fn reduced(&self, i: usize, j: usize) -> f64 {
        self.c(i, j) + self.pi[i] - self.pi[self.n + j]
    }

    fn build(n: usize, m: usize, cost: &'a [f64], arcs: &[(usize, usize, i64)]) -> Self {
        let nodes = n + m;
        let mut adj: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); nodes];
        for &(i, j, f) in arcs {
            adj[i].push((n + j, j, f));
            adj[n + j].push((i, i, f));
        }
        let mut t = Tree {
            n,
            m,
            cost,
            parent: vec![NONE; nodes],
            arc: vec![(NONE, NONE); nodes],
            flow: vec![0; nodes],
            children: vec![Vec::new(); nodes],
            pi: vec![0.0; nodes],
            mark: vec![0; nodes],
            stamp: 0,
        };
        let mut seen = vec![false; nodes];
        seen[0] = true;
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            for &(v, _, f) in &adj[u] {
                if seen[v] {
                    continue;
                }
                seen[v] = true;
                t.parent[v] = u;
                t.children[u].push(v);
                t.flow[v] = f;
                t.arc[v] = if u < n { (u, v - n) } else { (v, u - n) };
                stack.push(v);
            }
        }
        t.refresh_potentials();
        t
    }

    /// Recomputes all potentials from the root, so that every tree arc has
    /// zero reduced cost.
    fn refresh_potentials(&mut self) {
        self.pi[0] = 0.0;
        let mut stack = vec![0usize];
        while let Some(u) = stack.pop() {
            for k in 0..self.children[u].len() {
                let v = self.children[u][k];
                self.set_potential(v);
                stack.push(v);
            }
        }
    }

    fn set_potential(&mut self, v: usize) {
        let (i, j) = self.arc[v];
        let c = self.c(i, j);
        let p = self.parent[v];
        // c + π_i − π_{n+j} = 0
        self.pi[v] = if self.up(v) { self.pi[p] - c } else { self.pi[p] + c };
    }

    /// Lowest common ancestor of `a` and `b`.
    fn join(&mut self, a: usize, b: usize) -> usize {
        self.stamp += 1;
        let mut u = a;
        loop {
            self.mark[u] = self.stamp;
            if self.parent[u] == NONE {
                break;
            }
            u = self.parent[u];
        }
        let mut v = b;
        while self.mark[v] != self.stamp {
            v = self.parent[v];
        }
        v
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let s = i;
        let t = self.n + j;
        let apex = self.join(s, t);
        // flow goes s → t, up from t to the apex, then down from the apex to s
        let mut t_path = Vec::new();
        let mut v = t;
        while v != apex {
            t_path.push(v);
            v = self.parent[v];
        }
        let mut s_path = Vec::new();
        let mut v = s;
        while v != apex {
            s_path.push(v);
            v = self.parent[v];
        }
        // Walk the cycle apex → s (downwards), entering arc, t → apex; keep the
        // last blocking arc.
        let mut delta = i64::MAX;
        let mut leaving = NONE;
        let mut leaving_on_s = false;
        for &v in s_path.iter().rev() {
            // traversed parent → v: against an up arc
            if self.up(v) && self.flow[v] <= delta {
                delta = self.flow[v];
                leaving = v;
                leaving_on_s = true;
            }
        }
        for &v in &t_path {
            // traversed v → parent: against a down arc
            if !self.up(v) && self.flow[v] <= delta {
                delta = self.flow[v];
                leaving = v;
                leaving_on_s = false;
            }
        }
        debug_assert!(leaving != NONE, "uncapacitated cycle without a blocking arc");
        for &v in &s_path {
            if self.up(v) {
                self.flow[v] -= delta;
            } else {
                self.flow[v] += delta;
            }
        }
        for &v in &t_path {
            if self.up(v) {
                self.flow[v] += delta;
            } else {
                self.flow[v] -= delta;
            }
        }
        let rc = self.reduced(i, j);
        // Re-hang the subtree below `leaving` at the entering arc.
        let (q, o, path) = if leaving_on_s { (s, t, &s_path) } else { (t, s, &t_path) };
        let stop = path.iter().position(|&v| v == leaving).expect("leaving arc on path");
        let chain: Vec<usize> = path[..=stop].to_vec();
        let mut prev_arc = (i, j);
        let mut prev_flow = delta;
        let mut prev_parent = o;
        for &v in &chain {
            let old_parent = self.parent[v];
            let old_arc = self.arc[v];
            let old_flow = self.flow[v];
            let siblings = &mut self.children[old_parent];
            let pos = siblings.iter().position(|&c| c == v).expect("child listed");
            siblings.swap_remove(pos);
            self.parent[v] = prev_parent;
            self.children[prev_parent].push(v);
            self.arc[v] = prev_arc;
            self.flow[v] = prev_flow;
            prev_parent = v;
            prev_arc = old_arc;
            prev_flow = old_flow;
        }
        // Every node now below q shifts by the same amount.
        let shift = if q < self.n { -rc } else { rc };
        let mut stack = vec![q];
        while let Some(u) = stack.pop() {
            self.pi[u] += shift;
            stack.extend(self.children[u].iter().copied());
        }
    }
}

/// Solves `min Σ c_ij γ_ij` subject to the marginals `a` (rows) and `b`
/// (columns). `cost` is row-major `n × m`.
pub fn solve(a: &[f64], b: &[f64], cost: &[f64]) -> Result<FlowSolution> {
    let (n, m) = (a.len(), b.len());
    if n == 0 || m == 0 || cost.len() != n * m {
        return Err(Error::LengthMismatch {
            left: cost.len(),
            right: n * m,
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteValue("transport cost".into()));
    }
    let sa = integer_masses(a)?;
    let sb = integer_masses(b)?;
    let scale = cost.iter().fold(0.0f64, |acc, c| acc.max(c.abs())).max(1e-300);

    // North-west corner basis
    let mut arcs = Vec::with_capacity(n + m - 1);
    let (mut ra, mut rb) = (sa.clone(), sb.clone());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]);
        arcs.push((i, j, x));
        ra[i] -= x;
        rb[j] -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if (ra[i] == 0 && i < n - 1) || j == m - 1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut tree = Tree::build(n, m, cost, &arcs);

    let total = n * m;
    let block = ((total as f64).sqrt().ceil() as usize).clamp(16, total.max(16));
    let tol = PRICING_TOL * scale;
    let mut cursor = 0usize;
    let mut pivots = 0usize;
    let max_pivots = 50 * (n + m) * (n + m).max(64);
    'outer: loop {
        // block search over all arcs, starting where the last one stopped
        let mut scanned = 0usize;
        let mut best = (-tol, NONE, NONE);
        while scanned < total {
            let end = (scanned + block).min(total);
            for _ in scanned..end {
                let a = cursor;
                cursor += 1;
                if cursor == total {
                    cursor = 0;
                }
                let (ii, jj) = (a / m, a % m);
                let r = tree.reduced(ii, jj);
                if r < best.0 {
                    best = (r, ii, jj);
                }
            }
            scanned = end;
            if best.1 != NONE {
                break;
            }
        }
        if best.1 == NONE {
            tree.refresh_potentials();
            let min_rc = min_reduced(&tree, n, m) / scale;
            if min_rc < -CERTIFICATE_TOL {
                if pivots >= max_pivots {
                    break 'outer;
                }
                continue;
            }
            break;
        }
        tree.pivot(best.1, best.2);
        pivots += 1;
        if pivots.is_multiple_of(REFRESH_EVERY) {
            tree.refresh_potentials();
        }
        if pivots >= max_pivots {
            return Err(Error::Infeasible(format!("network simplex did not converge in {pivots} pivots")));
        }
    }
    tree.refresh_potentials();
    let min_reduced_cost = min_reduced(&tree, n, m) / scale;
    if min_reduced_cost < -CERTIFICATE_TOL {
        return Err(Error::Infeasible(format!(
            "optimality certificate failed (reduced cost {min_reduced_cost:e})"
        )));
    }
    let unit = MASS_SCALE as f64;
    let mut flows = Vec::new();
    let mut total_cost = 0.0;
    for v in 1..n + m {
        let f = tree.flow[v];
        if f < 0 {
            return Err(Error::Infeasible("negative flow in final basis".into()));
        }
        if f > 0 {
            let (i, j) = tree.arc[v];
            let mass = f as f64 / unit;
            total_cost += mass * tree.c(i, j);
            flows.push((i, j, mass));
        }
    }
    flows.sort_by_key(|x| (x.0, x.1));
    Ok(FlowSolution {
        flows,
        cost: total_cost,
        left_potential: tree.pi[..n].to_vec(),
        right_potential: tree.pi[n..].to_vec(),
        min_reduced_cost,
        pivots,
    })
}

fn min_reduced(tree: &Tree<'_>, n: usize, m: usize) -> f64 {
    let mut lo = f64::INFINITY;
    for i in 0..n {
        for j in 0..m {
            lo = lo.min(tree.reduced(i, j));
        }
    }
    lo
}
