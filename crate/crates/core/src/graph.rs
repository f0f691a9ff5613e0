//! Constraint graphs, variable orderings, perfect elimination orderings and
//! induced width.
//!
//! Orderings handed to the algorithms are *processing* orders
//! `(v_1, ..., v_n)`: the algorithms visit `v_n` first, so the elimination
//! order is the reverse. [`VarOrder::from_elimination`] converts.

use crate::bitset::ValueSet;
use crate::error::{Error, Result};
use crate::network::Network;

/// A permutation of the variables `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarOrder {
    seq: Vec<usize>,
    pos: Vec<usize>,
}

impl VarOrder {
    /// `seq[k]` is the variable at position `k`.
    pub fn new(seq: Vec<usize>) -> Result<Self> {
        let n = seq.len();
        let mut pos = vec![usize::MAX; n];
        for (k, &v) in seq.iter().enumerate() {
            if v >= n {
                return Err(Error::OrderingMismatch(format!("variable {v} out of range 0..{n}")));
            }
            if pos[v] != usize::MAX {
                return Err(Error::OrderingMismatch(format!("variable {v} listed twice")));
            }
            pos[v] = k;
        }
        Ok(VarOrder { seq, pos })
    }

    pub fn identity(n: usize) -> Self {
        VarOrder {
            seq: (0..n).collect(),
            pos: (0..n).collect(),
        }
    }

    /// The processing order whose reverse is `elimination`.
    pub fn from_elimination(mut elimination: Vec<usize>) -> Result<Self> {
        elimination.reverse();
        Self::new(elimination)
    }

    /// Resolves variable names against `net`.
    pub fn from_names<S: AsRef<str>>(net: &Network, names: &[S]) -> Result<Self> {
        let seq = names
            .iter()
            .map(|s| net.var(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        let order = Self::new(seq)?;
        order.check_covers(net.len())?;
        Ok(order)
    }

    pub fn reversed(&self) -> VarOrder {
        let mut seq = self.seq.clone();
        seq.reverse();
        VarOrder::new(seq).expect("reverse of a permutation")
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    #[inline]
    pub fn at(&self, k: usize) -> usize {
        self.seq[k]
    }

    #[inline]
    pub fn position(&self, var: usize) -> usize {
        self.pos[var]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.seq
    }

    pub fn check_covers(&self, n: usize) -> Result<()> {
        if self.seq.len() != n {
            return Err(Error::OrderingMismatch(format!(
                "ordering has {} entries, network has {n} variables",
                self.seq.len()
            )));
        }
        Ok(())
    }
}

/// An undirected simple graph over `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph {
    adj: Vec<ValueSet>,
}

impl ConstraintGraph {
    pub fn empty(n: usize) -> Self {
        ConstraintGraph {
            adj: vec![ValueSet::empty(n); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n);
        for &(i, j) in edges {
            g.add_edge(i, j);
        }
        g
    }

    /// One edge per stored constraint (`e_ij ∈ E` iff `R_ij ∈ C`).
    pub fn of_network(net: &Network) -> Self {
        Self::from_edges(net.len(), &net.scopes())
    }

    /// One edge per stored constraint that is not the universal relation.
    pub fn of_network_non_universal(net: &Network) -> Self {
        let edges: Vec<_> = net
            .scopes()
            .into_iter()
            .filter(|&(i, j)| !net.constraint(i, j).unwrap().is_universal())
            .collect();
        Self::from_edges(net.len(), &edges)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert_ne!(i, j, "self-loop");
        self.adj[i].insert(j);
        self.adj[j].insert(i);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(j)
    }

    pub fn neighbors(&self, v: usize) -> &ValueSet {
        &self.adj[v]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, s) in self.adj.iter().enumerate() {
            out.extend(s.iter().filter(|&j| j > i).map(|j| (i, j)));
        }
        out
    }

    fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(k, &a)| vs[k + 1..].iter().all(|&b| self.has_edge(a, b)))
    }
}

/// Whether `elim` is a perfect elimination ordering of `g`: the neighbours
/// of each vertex that come after it in `elim` form a clique.
pub fn is_peo(g: &ConstraintGraph, elim: &VarOrder) -> Result<bool> {
    elim.check_covers(g.len())?;
    for v in 0..g.len() {
        let later: Vec<usize> = g
            .neighbors(v)
            .iter()
            .filter(|&w| elim.position(w) > elim.position(v))
            .collect();
        if !g.is_clique(&later) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Maximum cardinality search visit order: repeatedly number the vertex with
/// the most numbered neighbours, lowest index first on ties.
pub fn mcs_order(g: &ConstraintGraph) -> VarOrder {
    let n = g.len();
    let mut weight = vec![0usize; n];
    let mut numbered = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !numbered[v])
            .max_by(|&a, &b| weight[a].cmp(&weight[b]).then(b.cmp(&a)))
            .expect("unnumbered vertex");
        numbered[v] = true;
        seq.push(v);
        for w in g.neighbors(v).iter() {
            if !numbered[w] {
                weight[w] += 1;
            }
        }
    }
    VarOrder::new(seq).expect("MCS visits every vertex once")
}

/// A perfect elimination ordering of `g` if it is chordal. The reverse of
/// the MCS visit order is a PEO exactly when `g` is chordal, so the
/// candidate is checked and discarded otherwise.
pub fn find_peo(g: &ConstraintGraph) -> Option<VarOrder> {
    let peo = mcs_order(g).reversed();
    match is_peo(g, &peo) {
        Ok(true) => Some(peo),
        _ => None,
    }
}

pub fn is_triangulated(g: &ConstraintGraph) -> bool {
    find_peo(g).is_some()
}

/// Simulates elimination along the reverse of `order`, connecting the
/// earlier neighbours of each eliminated vertex. Returns the filled graph
/// and the largest earlier-neighbour count seen (the induced width).
pub fn simulate_fill(g: &ConstraintGraph, order: &VarOrder) -> Result<(ConstraintGraph, usize)> {
    order.check_covers(g.len())?;
    let mut filled = g.clone();
    let mut width = 0;
    for k in (0..order.len()).rev() {
        let v = order.at(k);
        let earlier: Vec<usize> = filled
            .neighbors(v)
            .iter()
            .filter(|&w| order.position(w) < k)
            .collect();
        width = width.max(earlier.len());
        for (a, &x) in earlier.iter().enumerate() {
            for &y in &earlier[a + 1..] {
                filled.add_edge(x, y);
            }
        }
    }
    Ok((filled, width))
}

/// `w*(order)`: see [`simulate_fill`].
pub fn induced_width(g: &ConstraintGraph, order: &VarOrder) -> Result<usize> {
    simulate_fill(g, order).map(|(_, w)| w)
}

/// The default processing order for a network: when the constraint graph is
/// chordal, the reverse of its MCS-derived PEO (so the algorithms eliminate
/// along the PEO); otherwise declaration order.
pub fn default_order(net: &Network) -> VarOrder {
    let g = ConstraintGraph::of_network(net);
    match find_peo(&g) {
        Some(peo) => peo.reversed(),
        None => VarOrder::identity(net.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Edges 12, 23, 24, 34 (zero-based).
    fn diamond() -> ConstraintGraph {
        ConstraintGraph::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)])
    }

    #[test]
    fn diamond_peo_orders() {
        let g = diamond();
        assert!(is_peo(&g, &VarOrder::new(vec![0, 1, 2, 3]).unwrap()).unwrap());
        assert!(!is_peo(&g, &VarOrder::new(vec![1, 0, 2, 3]).unwrap()).unwrap());
    }

    #[test]
    fn diamond_has_peo() {
        let g = diamond();
        let peo = find_peo(&g).expect("chordal");
        assert!(is_peo(&g, &peo).unwrap());
    }

    #[test]
    fn chordless_four_cycle_has_no_peo() {
        let g = ConstraintGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(find_peo(&g).is_none());
        assert!(!is_triangulated(&g));
    }

    #[test]
    fn complete_graph_any_order_is_peo() {
        let g = ConstraintGraph::complete(5);
        assert!(is_peo(&g, &VarOrder::new(vec![3, 1, 4, 0, 2]).unwrap()).unwrap());
        assert_eq!(induced_width(&g, &VarOrder::identity(5)).unwrap(), 4);
    }

    #[test]
    fn chain_width_is_one() {
        let g = ConstraintGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(induced_width(&g, &VarOrder::identity(5)).unwrap(), 1);
    }

    #[test]
    fn diamond_width_is_two() {
        // eliminating v4 sees {v2, v3}; v3 sees {v2}; v2 sees {v1}
        assert_eq!(induced_width(&diamond(), &VarOrder::identity(4)).unwrap(), 2);
    }

    #[test]
    fn ordering_mismatch_reported() {
        assert!(VarOrder::new(vec![0, 0]).is_err());
        assert!(is_peo(&diamond(), &VarOrder::identity(3)).is_err());
    }
}
