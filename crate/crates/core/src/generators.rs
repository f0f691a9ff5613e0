//! Seeded random instance families: majority-closed networks over a random
//! majority operation, tree-preserving networks over random tree domains,
//! and inconsistent variants of majority-closed networks.
//!
//! Every instance plants a random solution, so generated networks are
//! consistent unless made otherwise on purpose.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitset::ValueSet;
use crate::error::{Error, Result};
use crate::majority::{is_tree_preserving, MajorityOp, TreeDomain};
use crate::network::{Domain, Network};
use crate::oracle;
use crate::relation::Relation;

/// Size and shape of a generated instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub d: usize,
    /// Fraction of the `n(n-1)/2` variable pairs that get a constraint.
    pub rho: f64,
    /// Target fraction of allowed tuples per constraint.
    pub l: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::Precondition("n and d must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) || !(0.0..=1.0).contains(&self.l) {
            return Err(Error::Precondition("rho and l must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// `⌈rho · n(n-1)/2⌉`.
    pub fn num_constraints(&self) -> usize {
        let pairs = self.n * (self.n - 1) / 2;
        ((self.rho * pairs as f64).ceil() as usize).min(pairs)
    }

    fn target_tuples(&self) -> usize {
        ((self.l * (self.d * self.d) as f64).round() as usize).max(1)
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn shared_domain(d: usize) -> Arc<Domain> {
    Arc::new(Domain::numeric("D", d))
}

fn empty_network(n: usize, dom: &Arc<Domain>) -> Network {
    let mut net = Network::new();
    for v in 0..n {
        net.add_variable_shared(format!("v{v}"), dom.clone()).expect("fresh names");
    }
    net
}

fn pick_scopes(p: &GenParams, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let pairs: Vec<(usize, usize)> = (0..p.n)
        .flat_map(|i| (i + 1..p.n).map(move |j| (i, j)))
        .collect();
    let mut chosen: Vec<usize> = sample(rng, pairs.len(), p.num_constraints()).into_vec();
    chosen.sort_unstable();
    chosen.into_iter().map(|k| pairs[k]).collect()
}

/// The repeated value on non-rainbow triples, a uniform value otherwise.
pub fn gen_majority_op(d: usize, seed: u64) -> MajorityOp {
    gen_majority_op_with(d, &mut rng_for(seed))
}

pub fn gen_majority_op_with(d: usize, rng: &mut ChaCha8Rng) -> MajorityOp {
    let mut table = Vec::with_capacity(d * d * d);
    for x in 0..d {
        for y in 0..d {
            for z in 0..d {
                table.push(if x == y || x == z {
                    x
                } else if y == z {
                    y
                } else {
                    rng.gen_range(0..d)
                });
            }
        }
    }
    MajorityOp::new(d, table).expect("majority by construction")
}

/// Adds `extra` to a relation already closed under `(φ_i, φ_j)` and closes
/// again. Only triples involving a new tuple need to be examined.
fn extend_closed(r: &mut Relation, extra: (usize, usize), phi_i: &MajorityOp, phi_j: &MajorityOp) {
    if !r.insert(extra.0, extra.1) {
        return;
    }
    let mut tuples: Vec<(usize, usize)> = r.tuples().collect();
    let mut queue = vec![extra];
    while let Some(t) = queue.pop() {
        let snapshot = tuples.clone();
        for &u in &snapshot {
            for &v in &snapshot {
                for (x, y, z) in [(t, u, v), (u, t, v), (u, v, t)] {
                    let a = phi_i.apply(x.0, y.0, z.0);
                    let b = phi_j.apply(x.1, y.1, z.1);
                    if r.insert(a, b) {
                        tuples.push((a, b));
                        queue.push((a, b));
                    }
                }
            }
        }
    }
}

/// A majority-closed instance with its operation (shared by all variables)
/// and planted solution.
#[derive(Clone, Debug)]
pub struct MajorityInstance {
    pub network: Network,
    pub op: MajorityOp,
    pub planted: Vec<usize>,
    /// Mean fraction of allowed tuples over the generated constraints.
    pub looseness: f64,
}

impl MajorityInstance {
    /// One operation per variable, as consumed by the closure checks.
    pub fn ops(&self) -> Vec<MajorityOp> {
        vec![self.op.clone(); self.network.len()]
    }
}

fn mean_looseness(net: &Network) -> f64 {
    let scopes = net.scopes();
    if scopes.is_empty() {
        return 0.0;
    }
    scopes
        .iter()
        .map(|&(i, j)| net.constraint(i, j).unwrap().looseness())
        .sum::<f64>()
        / scopes.len() as f64
}

/// Random majority-closed network: each constraint grows from the planted
/// tuple by adding random tuples and closing under the operation, skipping
/// tuples whose closure would be universal. Closure may overshoot `l`.
pub fn gen_majority_closed_network(p: &GenParams) -> Result<MajorityInstance> {
    p.validate()?;
    let mut rng = rng_for(p.seed);
    let dom = shared_domain(p.d);
    let op = gen_majority_op_with(p.d, &mut rng);
    let planted: Vec<usize> = (0..p.n).map(|_| rng.gen_range(0..p.d)).collect();
    let mut net = empty_network(p.n, &dom);
    let target = p.target_tuples();
    let all: Vec<(usize, usize)> = (0..p.d).flat_map(|a| (0..p.d).map(move |b| (a, b))).collect();
    for (i, j) in pick_scopes(p, &mut rng) {
        let mut r = Relation::from_tuples(p.d, p.d, [(planted[i], planted[j])]);
        let mut order = all.clone();
        order.shuffle(&mut rng);
        for t in order {
            if r.len() >= target {
                break;
            }
            if r.contains(t.0, t.1) {
                continue;
            }
            let mut next = r.clone();
            extend_closed(&mut next, t, &op, &op);
            if !next.is_universal() {
                r = next;
            }
        }
        net.set_constraint(i, j, r)?;
    }
    let looseness = mean_looseness(&net);
    Ok(MajorityInstance {
        network: net,
        op,
        planted,
        looseness,
    })
}

/// A tree-preserving instance: one tree domain per variable.
#[derive(Clone, Debug)]
pub struct TreeInstance {
    pub network: Network,
    pub trees: Vec<TreeDomain>,
    pub planted: Vec<usize>,
    pub looseness: f64,
}

/// A uniformly labelled random recursive tree on `d` values.
pub fn random_tree(d: usize, rng: &mut ChaCha8Rng) -> TreeDomain {
    let mut labels: Vec<usize> = (0..d).collect();
    labels.shuffle(rng);
    let edges: Vec<(usize, usize)> = (1..d)
        .map(|k| (labels[rng.gen_range(0..k)], labels[k]))
        .collect();
    TreeDomain::new(d, &edges).expect("recursive trees are trees")
}

/// A random connected set of about `size` vertices containing `start`.
fn random_subtree(t: &TreeDomain, start: usize, size: usize, rng: &mut ChaCha8Rng) -> ValueSet {
    let mut set = ValueSet::singleton(t.size(), start);
    let mut frontier: Vec<usize> = t.neighbors(start).to_vec();
    while set.len() < size && !frontier.is_empty() {
        let k = rng.gen_range(0..frontier.len());
        let v = frontier.swap_remove(k);
        if set.insert(v) {
            frontier.extend(t.neighbors(v).iter().filter(|&&w| !set.contains(w)));
        }
    }
    set
}

/// Smallest connected superset of `set`: prune leaves outside `set` until
/// none remain.
fn hull(t: &TreeDomain, set: &ValueSet) -> ValueSet {
    let n = t.size();
    if set.is_empty() || t.is_connected(set) {
        return set.clone();
    }
    let mut deg: Vec<usize> = (0..n).map(|v| t.neighbors(v).len()).collect();
    let mut alive = ValueSet::full(n);
    let mut stack: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1 && !set.contains(v)).collect();
    while let Some(v) = stack.pop() {
        if !alive.remove(v) {
            continue;
        }
        for &w in t.neighbors(v) {
            if alive.contains(w) {
                deg[w] -= 1;
                if deg[w] <= 1 && !set.contains(w) {
                    stack.push(w);
                }
            }
        }
    }
    alive
}

/// Shortest path joining two disjoint nonempty sets, endpoints included.
fn bridge(t: &TreeDomain, from: &ValueSet, to: &ValueSet) -> Vec<usize> {
    let n = t.size();
    let mut prev = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for v in from.iter() {
        prev[v] = v;
        queue.push_back(v);
    }
    while let Some(u) = queue.pop_front() {
        if to.contains(u) {
            let mut path = vec![u];
            let mut cur = u;
            while prev[cur] != cur {
                cur = prev[cur];
                path.push(cur);
            }
            return path;
        }
        for &w in t.neighbors(u) {
            if prev[w] == usize::MAX {
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    Vec::new()
}

/// A relation held as row and column sets kept in sync, so both repair
/// directions avoid transposing.
struct Grid {
    rows: Vec<ValueSet>,
    cols: Vec<ValueSet>,
}

impl Grid {
    fn new(r: &Relation) -> Self {
        let inv = r.inverse();
        Grid {
            rows: (0..r.rows()).map(|a| r.row_set(a)).collect(),
            cols: (0..r.cols()).map(|b| inv.row_set(b)).collect(),
        }
    }

    fn to_relation(&self) -> Relation {
        let mut r = Relation::empty(self.rows.len(), self.cols.len());
        for (a, row) in self.rows.iter().enumerate() {
            for b in row.iter() {
                r.insert(a, b);
            }
        }
        r
    }

    fn len(&self) -> usize {
        self.rows.iter().map(ValueSet::len).sum()
    }

    /// Repairs rows against (`ti`, `tj`), then columns against (`tj`, `ti`).
    fn repair(&mut self, ti: &TreeDomain, tj: &TreeDomain, si: usize, sj: usize) -> bool {
        let rows = repair_lines(&mut self.rows, &mut self.cols, ti, tj, sj);
        let cols = repair_lines(&mut self.cols, &mut self.rows, tj, ti, si);
        rows || cols
    }
}

fn put(lines: &mut [ValueSet], cross: &mut [ValueSet], a: usize, b: usize) -> bool {
    let added = lines[a].insert(b);
    if added {
        cross[b].insert(a);
    }
    added
}

/// Adds tuples until every line is a nonempty subtree of `tv` and lines of
/// adjacent values of `tl` have connected union. Returns whether anything
/// was added.
fn repair_lines(
    lines: &mut [ValueSet],
    cross: &mut [ValueSet],
    tl: &TreeDomain,
    tv: &TreeDomain,
    fallback: usize,
) -> bool {
    let mut changed = false;
    for a in 0..lines.len() {
        if lines[a].is_empty() {
            let donor = tl
                .neighbors(a)
                .iter()
                .find_map(|&u| lines[u].first())
                .unwrap_or(fallback);
            put(lines, cross, a, donor);
            changed = true;
        }
        if !tv.is_connected(&lines[a]) {
            for b in hull(tv, &lines[a]).iter() {
                changed |= put(lines, cross, a, b);
            }
        }
    }
    for (u, v) in tl.edges() {
        if lines[u].intersects(&lines[v]) {
            continue;
        }
        let mut union = lines[u].clone();
        union.union_with(&lines[v]);
        if !tv.is_connected(&union) {
            for b in bridge(tv, &lines[u], &lines[v]) {
                changed |= put(lines, cross, u, b);
            }
        }
    }
    changed
}

fn tree_preserving_relation(
    ti: &TreeDomain,
    tj: &TreeDomain,
    si: usize,
    sj: usize,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> Relation {
    let d_i = ti.size();
    let d_j = tj.size();
    let side = |d: usize, rng: &mut ChaCha8Rng| rng.gen_range(1..=((d as f64).sqrt().ceil() as usize).max(1));
    let mut r = Relation::empty(d_i, d_j);
    let (a0, b0) = (side(d_i, rng), side(d_j, rng));
    for a in random_subtree(ti, si, a0, rng).iter() {
        for b in random_subtree(tj, sj, b0, rng).iter() {
            r.insert(a, b);
        }
    }
    let mut grid = Grid::new(&r);
    let mut attempts = 0;
    while grid.len() < target && attempts < 4 * d_i.max(d_j) {
        attempts += 1;
        let s = random_subtree(ti, rng.gen_range(0..d_i), side(d_i, rng), rng);
        let t = random_subtree(tj, rng.gen_range(0..d_j), side(d_j, rng), rng);
        let mut next = Grid {
            rows: grid.rows.clone(),
            cols: grid.cols.clone(),
        };
        for a in s.iter() {
            for b in t.iter() {
                put(&mut next.rows, &mut next.cols, a, b);
            }
        }
        let mut rounds = 0;
        loop {
            rounds += 1;
            if !next.repair(ti, tj, si, sj) || rounds > 4 * (d_i + d_j) {
                break;
            }
        }
        let len = next.len();
        if len < d_i * d_j && len <= target + target / 2 + 1 {
            grid = next;
        }
    }
    while grid.repair(ti, tj, si, sj) {}
    let r = grid.to_relation();
    let ok = is_tree_preserving(&r, ti, tj).unwrap_or(false) && is_tree_preserving(&r.inverse(), tj, ti).unwrap_or(false);
    if (r.is_universal() && d_i * d_j > 1) || !ok {
        let mut cross = Relation::empty(d_i, d_j);
        for b in 0..d_j {
            cross.insert(si, b);
        }
        for a in 0..d_i {
            cross.insert(a, sj);
        }
        return cross;
    }
    r
}

/// Random tree-preserving network: every constraint is arc-consistent and
/// tree-preserving in both directions and contains the planted tuple.
pub fn gen_tree_preserving_network(p: &GenParams) -> Result<TreeInstance> {
    p.validate()?;
    let mut rng = rng_for(p.seed);
    let dom = shared_domain(p.d);
    let trees: Vec<TreeDomain> = (0..p.n).map(|_| random_tree(p.d, &mut rng)).collect();
    let planted: Vec<usize> = (0..p.n).map(|_| rng.gen_range(0..p.d)).collect();
    let mut net = empty_network(p.n, &dom);
    let target = p.target_tuples();
    for (i, j) in pick_scopes(p, &mut rng) {
        let r = tree_preserving_relation(&trees[i], &trees[j], planted[i], planted[j], target, &mut rng);
        net.set_constraint(i, j, r)?;
    }
    let looseness = mean_looseness(&net);
    Ok(TreeInstance {
        network: net,
        trees,
        planted,
        looseness,
    })
}

/// Shrinks constraints of a majority-closed network, keeping each one
/// closed under `ops`, until the oracle finds no solution. Each round
/// removes the pair used by the current oracle solution from one
/// constraint. Gives up after `max_rounds` rounds.
pub fn gen_inconsistent_variant(
    net: &Network,
    ops: &[MajorityOp],
    seed: u64,
    max_rounds: usize,
) -> Result<Network> {
    if ops.len() != net.len() {
        return Err(Error::Precondition("one majority operation per variable expected".into()));
    }
    let mut rng = rng_for(seed);
    let mut out = net.clone();
    for _ in 0..max_rounds {
        let sols = oracle::enumerate_solutions(&out, 1)?;
        let Some(sol) = sols.first() else {
            return Ok(out);
        };
        let candidates: Vec<(usize, usize)> = out
            .scopes()
            .into_iter()
            .filter(|&(i, j)| out.constraint(i, j).unwrap().len() > 1)
            .collect();
        let Some(&(i, j)) = candidates.choose(&mut rng) else {
            return Err(Error::GaveUp(max_rounds));
        };
        let banned = (sol.get(i).unwrap(), sol.get(j).unwrap());
        let r = out.constraint(i, j).unwrap().clone();
        let mut tuples: Vec<(usize, usize)> = r.tuples().filter(|&t| t != banned).collect();
        tuples.shuffle(&mut rng);
        let mut kept = Relation::empty(r.rows(), r.cols());
        for t in tuples {
            if kept.contains(t.0, t.1) {
                continue;
            }
            let mut next = kept.clone();
            extend_closed(&mut next, t, &ops[i], &ops[j]);
            if !next.contains(banned.0, banned.1) {
                kept = next;
            }
        }
        out.set_constraint(i, j, kept)?;
    }
    if oracle::is_consistent(&out)? {
        Err(Error::GaveUp(max_rounds))
    } else {
        Ok(out)
    }
}
