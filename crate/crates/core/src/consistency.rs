//! Arc- and path-consistency: checks, the AC fixpoint, the naive strong-PC
//! enforcer used as reference baseline, and the strong-DPC predicate.
//!
//! All checks read relations through the active domains: a tuple mentioning
//! a pruned value is ignored, and supports must be active values.

use std::collections::BTreeSet;

use crate::bitset::ValueSet;
use crate::error::{Error, Result};
use crate::graph::VarOrder;
use crate::network::Network;
use crate::relation::Relation;

/// Result of a propagation pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Propagation {
    Ok,
    Inconsistent,
}

/// `D_i <- D_i ∩ R_ji(D_j)`. Returns whether `D_i` shrank.
fn revise(net: &mut Network, i: usize, j: usize) -> bool {
    let supported = net.constraint(j, i).unwrap().image(net.active(j));
    net.prune_active(i, &supported)
}

/// Arc-consistency by an AC-3 style worklist, arcs processed in
/// lexicographic `(variable, neighbour)` order.
pub fn enforce_ac(net: &mut Network) -> Propagation {
    if (0..net.len()).any(|v| net.active(v).is_empty()) {
        return Propagation::Inconsistent;
    }
    let mut queue: BTreeSet<(usize, usize)> = BTreeSet::new();
    for i in 0..net.len() {
        for j in net.neighbors(i) {
            queue.insert((i, j));
        }
    }
    while let Some((i, j)) = queue.pop_first() {
        if revise(net, i, j) {
            if net.active(i).is_empty() {
                return Propagation::Inconsistent;
            }
            let back: Vec<usize> = net.neighbors(i).filter(|&k| k != j).collect();
            for k in back {
                queue.insert((k, i));
            }
        }
    }
    Propagation::Ok
}

/// Whether every tuple of `R_0k` (over active values) extends through the
/// chain `v_0, v_1, ..., v_k`. Missing intermediate constraints count as
/// universal; `R_0k` itself must be stored.
pub fn is_path_consistent(net: &Network, path: &[usize]) -> Result<bool> {
    if path.len() < 2 {
        return Err(Error::MalformedPath("a path needs at least two variables".into()));
    }
    for &v in path {
        if v >= net.len() {
            return Err(Error::VariableOutOfRange(v));
        }
    }
    for w in path.windows(2) {
        if w[0] == w[1] {
            return Err(Error::MalformedPath(format!("repeated consecutive variable {}", w[0])));
        }
    }
    let (first, last) = (path[0], *path.last().unwrap());
    if first == last {
        return Err(Error::MalformedPath("endpoints coincide".into()));
    }
    let end = net.constraint(first, last).ok_or_else(|| {
        Error::MalformedPath(format!(
            "no constraint between {} and {}",
            net.name(first),
            net.name(last)
        ))
    })?;
    for a in net.active(first).iter() {
        let wanted = end.row_set(a).intersection(net.active(last));
        if wanted.is_empty() {
            continue;
        }
        let mut reach = ValueSet::singleton(net.domain_size(first), a);
        for w in path.windows(2) {
            let step = net.relation(w[0], w[1]);
            reach = step.image(&reach);
            reach.intersect_with(net.active(w[1]));
        }
        if !wanted.is_subset(&reach) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn compose_via(net: &Network, i: usize, k: usize, j: usize) -> Relation {
    let rik = net.relation(i, k);
    let rkj = net.relation(k, j);
    rik.compose_through(net.active(k), &rkj)
        .expect("network relations match their domains")
}

/// Statistics of a strong-PC run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PcStats {
    pub passes: usize,
    pub revisions: u64,
}

/// Strong path-consistency by a naive fixpoint over every triangle of the
/// completed constraint graph, interleaved with arc-consistency.
///
/// This is the comparison baseline, not a tuned PC algorithm.
pub fn enforce_strong_pc(net: &mut Network) -> Propagation {
    enforce_strong_pc_with_stats(net).0
}

pub fn enforce_strong_pc_with_stats(net: &mut Network) -> (Propagation, PcStats) {
    let mut stats = PcStats::default();
    if net.is_trivially_inconsistent() {
        return (Propagation::Inconsistent, stats);
    }
    let n = net.len();
    for i in 0..n {
        for j in i + 1..n {
            if !net.has_constraint(i, j) {
                let u = Relation::product(net.active(i), net.active(j));
                net.set_constraint(i, j, u).expect("completion edge");
            }
        }
    }
    loop {
        stats.passes += 1;
        if enforce_ac(net) == Propagation::Inconsistent {
            return (Propagation::Inconsistent, stats);
        }
        for (i, j) in net.scopes() {
            net.restrict_constraint_to_active(i, j);
        }
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    let comp = compose_via(net, i, k, j);
                    stats.revisions += 1;
                    if net.intersect_constraint(i, j, &comp).expect("same shape") {
                        changed = true;
                        if net.constraint(i, j).unwrap().is_empty() {
                            return (Propagation::Inconsistent, stats);
                        }
                    }
                }
            }
        }
        if !changed {
            return (Propagation::Ok, stats);
        }
    }
}

/// Directional arc-consistency relative to `order`: every `v_i` is AC
/// relative to each constrained later `v_k`.
pub fn is_dac(net: &Network, order: &VarOrder) -> Result<bool> {
    order.check_covers(net.len())?;
    for i in 0..net.len() {
        for k in net.neighbors(i) {
            if order.position(k) > order.position(i)
                && !net.constraint(i, k).unwrap().supports_all(net.active(i), net.active(k))
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Directional path-consistency relative to `order`: each constrained pair
/// `(v_i, v_j)` is PC relative to every later common neighbour `v_k`.
pub fn is_dpc(net: &Network, order: &VarOrder) -> Result<bool> {
    order.check_covers(net.len())?;
    for (i, j) in net.scopes() {
        let mut rij = net.constraint(i, j).unwrap().clone();
        rij.restrict_to(net.active(i), net.active(j));
        let latest = order.position(i).max(order.position(j));
        for k in net.neighbors(i) {
            if order.position(k) <= latest || !net.has_constraint(j, k) {
                continue;
            }
            let comp = compose_via(net, i, k, j);
            if !rij.is_subset(&comp)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Strong DPC: both [`is_dac`] and [`is_dpc`].
pub fn is_strongly_dpc(net: &Network, order: &VarOrder) -> Result<bool> {
    Ok(is_dac(net, order)? && is_dpc(net, order)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Domain;

    #[test]
    fn ac_on_universal_constraint_prunes_nothing() {
        let mut n = Network::new();
        n.add_variable("x", Domain::numeric("D", 3)).unwrap();
        n.add_variable("y", Domain::numeric("D", 3)).unwrap();
        n.set_constraint(0, 1, Relation::universal(3, 3)).unwrap();
        assert_eq!(enforce_ac(&mut n), Propagation::Ok);
        assert!(n.active(0).is_full() && n.active(1).is_full());
    }

    #[test]
    fn empty_end_constraint_is_vacuously_pc() {
        let mut n = Network::new();
        for v in ["a", "b", "c"] {
            n.add_variable(v, Domain::numeric("D", 2)).unwrap();
        }
        n.set_constraint(0, 2, Relation::empty(2, 2)).unwrap();
        n.set_constraint(0, 1, Relation::empty(2, 2)).unwrap();
        assert!(is_path_consistent(&n, &[0, 1, 2]).unwrap());
    }

    #[test]
    fn malformed_paths_rejected() {
        let mut n = Network::new();
        for v in ["a", "b"] {
            n.add_variable(v, Domain::numeric("D", 2)).unwrap();
        }
        assert!(is_path_consistent(&n, &[0]).is_err());
        assert!(is_path_consistent(&n, &[0, 1]).is_err());
        assert!(is_path_consistent(&n, &[0, 0, 1]).is_err());
    }

    #[test]
    fn empty_pair_is_dpc_but_not_dac() {
        let mut n = Network::new();
        for v in ["a", "b", "c"] {
            n.add_variable(v, Domain::numeric("D", 2)).unwrap();
        }
        n.set_constraint(0, 1, Relation::empty(2, 2)).unwrap();
        let order = VarOrder::identity(3);
        assert!(is_dpc(&n, &order).unwrap());
        assert!(!is_dac(&n, &order).unwrap());
        assert!(!is_strongly_dpc(&n, &order).unwrap());
    }

    #[test]
    fn strong_pc_is_idempotent() {
        let mut n = Network::new();
        for v in ["a", "b", "c"] {
            n.add_variable(v, Domain::numeric("D", 3)).unwrap();
        }
        let lt = Relation::from_tuples(3, 3, [(0, 1), (0, 2), (1, 2)]);
        n.set_constraint(0, 1, lt.clone()).unwrap();
        n.set_constraint(1, 2, lt).unwrap();
        assert_eq!(enforce_strong_pc(&mut n), Propagation::Ok);
        let once = n.clone();
        assert_eq!(enforce_strong_pc(&mut n), Propagation::Ok);
        assert_eq!(n, once);
    }
}
