//! Majority operations and the constraint classes built on them: closure
//! tests, tree domains and tree-preserving relations, 2-decomposability,
//! binarization, and the binary closure of a language.

use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::bitset::ValueSet;
use crate::elimination::Language;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::relation::Relation;

/// A ternary operation `φ: D³ -> D` with `φ(e,d,d) = φ(d,e,d) = φ(d,d,e) = d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MajorityOp {
    size: usize,
    table: Vec<usize>,
}

impl MajorityOp {
    /// Validates `table`, indexed `x*d² + y*d + z`.
    pub fn new(size: usize, table: Vec<usize>) -> Result<Self> {
        if table.len() != size * size * size {
            return Err(Error::InvalidMajority(format!(
                "table has {} entries, expected {}",
                table.len(),
                size * size * size
            )));
        }
        let op = MajorityOp { size, table };
        for (k, &v) in op.table.iter().enumerate() {
            if v >= size {
                return Err(Error::InvalidMajority(format!("entry {k} = {v} outside the domain")));
            }
        }
        for d in 0..size {
            for e in 0..size {
                if op.apply(e, d, d) != d || op.apply(d, e, d) != d || op.apply(d, d, e) != d {
                    return Err(Error::InvalidMajority(format!(
                        "majority axiom fails for values {d}, {e}"
                    )));
                }
            }
        }
        Ok(op)
    }

    pub fn from_fn(size: usize, f: impl Fn(usize, usize, usize) -> usize) -> Result<Self> {
        let mut table = Vec::with_capacity(size * size * size);
        for x in 0..size {
            for y in 0..size {
                for z in 0..size {
                    table.push(f(x, y, z));
                }
            }
        }
        Self::new(size, table)
    }

    /// The repeated value when two arguments agree, otherwise `rainbow(x,y,z)`.
    pub fn with_rainbow(size: usize, rainbow: impl Fn(usize, usize, usize) -> usize) -> Result<Self> {
        Self::from_fn(size, |x, y, z| {
            if x == y || x == z {
                x
            } else if y == z {
                y
            } else {
                rainbow(x, y, z)
            }
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, x: usize, y: usize, z: usize) -> usize {
        self.table[(x * self.size + y) * self.size + z]
    }
}

/// Every majority operation on a domain of `size` values, in lexicographic
/// order of their rainbow entries. Fails when there are more than `limit`.
pub fn enumerate_majority_ops(size: usize, limit: usize) -> Result<Vec<MajorityOp>> {
    let rainbow: Vec<(usize, usize, usize)> = (0..size)
        .flat_map(|x| (0..size).flat_map(move |y| (0..size).map(move |z| (x, y, z))))
        .filter(|&(x, y, z)| x != y && y != z && x != z)
        .collect();
    let count = (size as f64).powi(rainbow.len() as i32);
    if count > limit as f64 {
        return Err(Error::ClosureCapExceeded(limit));
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; rainbow.len()];
    loop {
        let pick = |x: usize, y: usize, z: usize| {
            let k = rainbow.iter().position(|&t| t == (x, y, z)).unwrap();
            choice[k]
        };
        out.push(MajorityOp::with_rainbow(size, pick)?);
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(out);
            }
            choice[k] += 1;
            if choice[k] < size {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn check_ops(r: &Relation, phi_i: &MajorityOp, phi_j: &MajorityOp) -> Result<()> {
    if r.rows() != phi_i.size || r.cols() != phi_j.size {
        return Err(Error::DimensionMismatch {
            left_rows: r.rows(),
            left_cols: r.cols(),
            right_rows: phi_i.size,
            right_cols: phi_j.size,
        });
    }
    Ok(())
}

/// Whether `R` is closed under `(φ_i, φ_j)` applied componentwise.
pub fn is_closed_under(r: &Relation, phi_i: &MajorityOp, phi_j: &MajorityOp) -> Result<bool> {
    check_ops(r, phi_i, phi_j)?;
    let tuples: Vec<(usize, usize)> = r.tuples().collect();
    for &(a1, b1) in &tuples {
        for &(a2, b2) in &tuples {
            for &(a3, b3) in &tuples {
                if !r.contains(phi_i.apply(a1, a2, a3), phi_j.apply(b1, b2, b3)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The least superset of `R` closed under `(φ_i, φ_j)`.
pub fn close_under(r: &Relation, phi_i: &MajorityOp, phi_j: &MajorityOp) -> Result<Relation> {
    check_ops(r, phi_i, phi_j)?;
    let mut out = r.clone();
    let mut tuples: Vec<(usize, usize)> = r.tuples().collect();
    let mut queue: VecDeque<(usize, usize)> = tuples.iter().copied().collect();
    while let Some(t) = queue.pop_front() {
        let snapshot = tuples.clone();
        for &u in &snapshot {
            for &v in &snapshot {
                for (x, y, z) in [(t, u, v), (u, t, v), (u, v, t)] {
                    let a = phi_i.apply(x.0, y.0, z.0);
                    let b = phi_j.apply(x.1, y.1, z.1);
                    if out.insert(a, b) {
                        tuples.push((a, b));
                        queue.push_back((a, b));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Whether every constraint of `net` is closed under the operations of its
/// endpoints' domains; `ops[v]` is the operation for variable `v`.
pub fn is_network_closed(net: &Network, ops: &[MajorityOp]) -> Result<bool> {
    if ops.len() != net.len() {
        return Err(Error::Precondition(format!(
            "{} majority operations for {} variables",
            ops.len(),
            net.len()
        )));
    }
    for (i, j) in net.scopes() {
        if !is_closed_under(net.constraint(i, j).unwrap(), &ops[i], &ops[j])? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether every relation of `lang` is closed; `ops[k]` belongs to domain `k`.
pub fn is_language_closed(lang: &Language, ops: &[MajorityOp]) -> Result<bool> {
    for r in lang.relations() {
        let (pi, pj) = match (ops.get(r.source), ops.get(r.target)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Precondition(format!("no majority operation for relation {}", r.name))),
        };
        if !is_closed_under(&r.relation, pi, pj)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A tree over the values `0..size` of a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDomain {
    adj: Vec<Vec<usize>>,
    parent: Vec<usize>,
    depth: Vec<usize>,
}

impl TreeDomain {
    pub fn new(size: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidTree("empty domain".into()));
        }
        if edges.len() != size - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges for {size} values",
                edges.len()
            )));
        }
        let mut adj = vec![Vec::new(); size];
        for &(u, v) in edges {
            if u >= size || v >= size || u == v {
                return Err(Error::InvalidTree(format!("bad edge ({u}, {v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        let mut parent = vec![usize::MAX; size];
        let mut depth = vec![0; size];
        let mut seen = vec![false; size];
        let mut stack = vec![0];
        seen[0] = true;
        parent[0] = 0;
        while let Some(u) = stack.pop() {
            for &w in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = u;
                    depth[w] = depth[u] + 1;
                    stack.push(w);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTree("not connected".into()));
        }
        Ok(TreeDomain { adj, parent, depth })
    }

    /// The chain `0 - 1 - ... - (size-1)`.
    pub fn chain(size: usize) -> Self {
        let edges: Vec<_> = (1..size).map(|v| (v - 1, v)).collect();
        Self::new(size, &edges).expect("a chain is a tree")
    }

    pub fn size(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (1..self.size())
            .flat_map(|v| self.adj[v].iter().filter(move |&&w| w < v).map(move |&w| (w, v)))
            .collect()
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a];
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b];
        }
        while a != b {
            a = self.parent[a];
            b = self.parent[b];
        }
        a
    }

    /// The vertex lying on all three pairwise paths.
    pub fn median(&self, a: usize, b: usize, c: usize) -> usize {
        [self.lca(a, b), self.lca(b, c), self.lca(a, c)]
            .into_iter()
            .max_by_key(|&v| self.depth[v])
            .unwrap()
    }

    /// Whether `set` induces a connected subgraph. The empty set counts as
    /// connected.
    pub fn is_connected(&self, set: &ValueSet) -> bool {
        // a vertex set of a tree induces a forest, which is connected iff it
        // has one edge fewer than vertices
        let mut vertices = 0;
        let mut edges = 0;
        for v in set.iter() {
            vertices += 1;
            edges += self.adj[v].iter().filter(|&&w| w > v && set.contains(w)).count();
        }
        vertices == 0 || edges + 1 == vertices
    }

    /// Calls `f` on every nonempty connected vertex set exactly once.
    pub fn for_each_subtree(&self, mut f: impl FnMut(&ValueSet) -> bool) -> bool {
        fn grow(
            t: &TreeDomain,
            root: usize,
            current: &mut ValueSet,
            frontier: &[usize],
            excluded: &mut ValueSet,
            f: &mut dyn FnMut(&ValueSet) -> bool,
        ) -> bool {
            if !f(current) {
                return false;
            }
            for (idx, &v) in frontier.iter().enumerate() {
                current.insert(v);
                let mut next: Vec<usize> = frontier[idx + 1..].to_vec();
                for &w in t.neighbors(v) {
                    if w > root && !current.contains(w) && !excluded.contains(w) && !next.contains(&w) {
                        next.push(w);
                    }
                }
                let ok = grow(t, root, current, &next, excluded, f);
                current.remove(v);
                if !ok {
                    return false;
                }
                excluded.insert(v);
            }
            for &v in frontier {
                excluded.remove(v);
            }
            true
        }
        for root in 0..self.size() {
            let mut current = ValueSet::singleton(self.size(), root);
            let mut excluded = ValueSet::empty(self.size());
            let frontier: Vec<usize> = self.adj[root].iter().copied().filter(|&w| w > root).collect();
            if !grow(self, root, &mut current, &frontier, &mut excluded, &mut f) {
                return false;
            }
        }
        true
    }
}

/// The standard majority operation of a tree: the median of three vertices.
pub fn standard_tree_majority(t: &TreeDomain) -> MajorityOp {
    MajorityOp::from_fn(t.size(), |a, b, c| t.median(a, b, c)).expect("the median is a majority operation")
}

fn check_trees(r: &Relation, ti: &TreeDomain, tj: &TreeDomain) -> Result<()> {
    if r.rows() != ti.size() || r.cols() != tj.size() {
        return Err(Error::DimensionMismatch {
            left_rows: r.rows(),
            left_cols: r.cols(),
            right_rows: ti.size(),
            right_cols: tj.size(),
        });
    }
    Ok(())
}

/// Whether the image of every subtree of `T_i` is a subtree of `T_j`, by
/// enumerating all subtrees. An empty image is accepted.
pub fn is_tree_preserving_exhaustive(r: &Relation, ti: &TreeDomain, tj: &TreeDomain) -> Result<bool> {
    check_trees(r, ti, tj)?;
    Ok(ti.for_each_subtree(|s| tj.is_connected(&r.image(s))))
}

/// Same verdict as [`is_tree_preserving_exhaustive`]. When every row is
/// nonempty it suffices that each row is connected and the rows of adjacent
/// values have connected union; otherwise it falls back to enumeration.
pub fn is_tree_preserving(r: &Relation, ti: &TreeDomain, tj: &TreeDomain) -> Result<bool> {
    check_trees(r, ti, tj)?;
    let rows: Vec<ValueSet> = (0..r.rows()).map(|a| r.row_set(a)).collect();
    if rows.iter().any(|s| s.is_empty()) {
        return is_tree_preserving_exhaustive(r, ti, tj);
    }
    if !rows.iter().all(|s| tj.is_connected(s)) {
        return Ok(false);
    }
    Ok(ti.edges().into_iter().all(|(u, v)| {
        let mut s = rows[u].clone();
        s.union_with(&rows[v]);
        tj.is_connected(&s)
    }))
}

/// For a nonempty relation arc-consistent in both directions: whether
/// closure under the standard tree majorities agrees with being
/// tree-preserving in both directions.
pub fn tree_closure_equivalence(r: &Relation, ti: &TreeDomain, tj: &TreeDomain) -> Result<bool> {
    check_trees(r, ti, tj)?;
    let full_i = ValueSet::full(r.rows());
    let full_j = ValueSet::full(r.cols());
    let inv = r.inverse();
    if r.is_empty() || !r.supports_all(&full_i, &full_j) || !inv.supports_all(&full_j, &full_i) {
        return Err(Error::Precondition("relation must be nonempty and arc-consistent both ways".into()));
    }
    let closed = is_closed_under(r, &standard_tree_majority(ti), &standard_tree_majority(tj))?;
    let preserving = is_tree_preserving(r, ti, tj)? && is_tree_preserving(&inv, tj, ti)?;
    Ok(closed == preserving)
}

/// Maximum arity handled by the decomposition routines.
pub const MAX_ARITY: usize = 4;

/// A relation of arity `sizes.len()` as a set of value tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaryRelation {
    sizes: Vec<usize>,
    tuples: BTreeSet<Vec<usize>>,
}

impl NaryRelation {
    pub fn new(sizes: Vec<usize>, tuples: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != sizes.len() || t.iter().zip(&sizes).any(|(&v, &s)| v >= s) {
                return Err(Error::Format(format!("tuple {t:?} does not fit sizes {sizes:?}")));
            }
            set.insert(t);
        }
        Ok(NaryRelation { sizes, tuples: set })
    }

    pub fn arity(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn tuples(&self) -> &BTreeSet<Vec<usize>> {
        &self.tuples
    }

    pub fn contains(&self, t: &[usize]) -> bool {
        self.tuples.contains(t)
    }

    /// Projection onto positions `(p, q)`.
    pub fn project2(&self, p: usize, q: usize) -> Relation {
        Relation::from_tuples(self.sizes[p], self.sizes[q], self.tuples.iter().map(|t| (t[p], t[q])))
    }

    pub fn project1(&self, p: usize) -> ValueSet {
        ValueSet::from_values(self.sizes[p], self.tuples.iter().map(|t| t[p]))
    }

    fn check_arity(&self) -> Result<()> {
        if self.arity() > MAX_ARITY {
            return Err(Error::ArityOverflow(self.arity()));
        }
        Ok(())
    }
}

/// Whether every tuple agreeing with all projections of `R` onto at most
/// two positions belongs to `R`.
pub fn is_2_decomposable(r: &NaryRelation) -> Result<bool> {
    r.check_arity()?;
    let m = r.arity();
    let unary: Vec<ValueSet> = (0..m).map(|p| r.project1(p)).collect();
    let binary: Vec<Vec<Option<Relation>>> = (0..m)
        .map(|p| (0..m).map(|q| (p < q).then(|| r.project2(p, q))).collect())
        .collect();
    let mut t = vec![0usize; m];
    fn rec(
        r: &NaryRelation,
        unary: &[ValueSet],
        binary: &[Vec<Option<Relation>>],
        t: &mut Vec<usize>,
        pos: usize,
    ) -> bool {
        if pos == t.len() {
            return r.contains(t);
        }
        for v in unary[pos].iter() {
            if (0..pos).all(|p| binary[p][pos].as_ref().unwrap().contains(t[p], v)) {
                t[pos] = v;
                if !rec(r, unary, binary, t, pos + 1) {
                    return false;
                }
            }
        }
        true
    }
    Ok(rec(r, &unary, &binary, &mut t, 0))
}

/// The pairwise projections `(p, q, π_pq(R))`, `p < q`, whose conjunction
/// equals `R` when `R` is 2-decomposable.
pub fn binarize(r: &NaryRelation) -> Result<Vec<(usize, usize, Relation)>> {
    r.check_arity()?;
    if r.arity() < 2 {
        return Err(Error::Precondition("binarize needs arity at least 2".into()));
    }
    let mut out = Vec::new();
    for p in 0..r.arity() {
        for q in p + 1..r.arity() {
            out.push((p, q, r.project2(p, q)));
        }
    }
    Ok(out)
}

/// The least superset of `lang` closed under inverse, intersection,
/// composition and restriction to unary sets definable as images, seeded
/// with full domains and singletons. Fails once more than `cap` relations
/// would be needed.
pub fn binary_closure(lang: &Language, cap: usize) -> Result<Language> {
    let canon: Vec<usize> = (0..lang.domains().len()).map(|d| lang.canonical_domain(d)).collect();
    let size = |d: usize| lang.domain(d).size();

    let mut rels: Vec<(usize, usize, Relation)> = Vec::new();
    let mut seen: HashSet<(usize, usize, Relation)> = HashSet::new();
    let mut unary: Vec<(usize, ValueSet)> = Vec::new();
    let mut seen_unary: HashSet<(usize, ValueSet)> = HashSet::new();

    fn push_rel(
        rels: &mut Vec<(usize, usize, Relation)>,
        seen: &mut HashSet<(usize, usize, Relation)>,
        item: (usize, usize, Relation),
        cap: usize,
    ) -> Result<bool> {
        if seen.contains(&item) {
            return Ok(false);
        }
        if rels.len() >= cap {
            return Err(Error::ClosureCapExceeded(cap));
        }
        seen.insert(item.clone());
        rels.push(item);
        Ok(true)
    }
    let push_unary = |unary: &mut Vec<(usize, ValueSet)>, seen_unary: &mut HashSet<(usize, ValueSet)>, item: (usize, ValueSet)| {
        if seen_unary.insert(item.clone()) {
            unary.push(item);
        }
    };

    for r in lang.relations() {
        push_rel(&mut rels, &mut seen, (canon[r.source], canon[r.target], r.relation.clone()), cap)?;
    }
    let mut domains: Vec<usize> = canon.clone();
    domains.sort_unstable();
    domains.dedup();
    for &d in &domains {
        push_unary(&mut unary, &mut seen_unary, (d, ValueSet::full(size(d))));
    }
    for r in lang.relations() {
        for (a, b) in r.relation.tuples() {
            push_unary(&mut unary, &mut seen_unary, (canon[r.source], ValueSet::singleton(size(r.source), a)));
            push_unary(&mut unary, &mut seen_unary, (canon[r.target], ValueSet::singleton(size(r.target), b)));
        }
    }

    loop {
        let mut grew = false;
        let n_rel = rels.len();
        let n_un = unary.len();
        for k in 0..n_rel {
            let (s, t, r) = rels[k].clone();
            grew |= push_rel(&mut rels, &mut seen, (t, s, r.inverse()), cap)?;
            for m in 0..n_rel {
                let (s2, t2, r2) = rels[m].clone();
                if s2 == s && t2 == t {
                    grew |= push_rel(&mut rels, &mut seen, (s, t, r.intersect(&r2)?), cap)?;
                }
                if s2 == t {
                    grew |= push_rel(&mut rels, &mut seen, (s, t2, r.compose(&r2)?), cap)?;
                }
            }
            for u in 0..n_un {
                let (d, set) = unary[u].clone();
                if d == s {
                    let img = r.image(&set);
                    if seen_unary.insert((t, img.clone())) {
                        unary.push((t, img));
                        grew = true;
                    }
                }
            }
        }
        for k in 0..n_rel {
            let (s, t, r) = rels[k].clone();
            for u in 0..n_un {
                for w in 0..n_un {
                    if unary[u].0 == s && unary[w].0 == t {
                        let mut restricted = r.clone();
                        restricted.restrict_to(&unary[u].1, &unary[w].1);
                        grew |= push_rel(&mut rels, &mut seen, (s, t, restricted), cap)?;
                    }
                }
            }
        }
        for u in 0..n_un {
            for w in u + 1..n_un {
                if unary[u].0 == unary[w].0 {
                    let meet = unary[u].1.intersection(&unary[w].1);
                    let d = unary[u].0;
                    if seen_unary.insert((d, meet.clone())) {
                        unary.push((d, meet));
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            break;
        }
    }

    let mut out = Language::new();
    for d in lang.domains() {
        out.add_domain((**d).clone());
    }
    let mut named = 0;
    for r in lang.relations() {
        out.add_relation(r.name.clone(), r.source, r.target, r.relation.clone())?;
    }
    let original: HashSet<(usize, usize, Relation)> = lang
        .relations()
        .iter()
        .map(|r| (canon[r.source], canon[r.target], r.relation.clone()))
        .collect();
    for (s, t, r) in rels {
        if !original.contains(&(s, t, r.clone())) {
            out.add_relation(format!("c{named}"), s, t, r)?;
            named += 1;
        }
    }
    Ok(out)
}
