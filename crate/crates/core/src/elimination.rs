//! Variable elimination, instance-level checks of the (weak) variable
//! elimination property, and the Helly property of a constraint language.

use std::sync::Arc;

use crate::bitset::ValueSet;
use crate::error::{Error, Result};
use crate::network::{Assignment, Domain, Network};
use crate::oracle;
use crate::relation::Relation;

/// The network obtained by eliminating `x`.
///
/// With exactly one constraint on `x`, that constraint is dropped and the
/// neighbour's domain shrinks to the values supported by `D_x`. Otherwise
/// every pair of neighbours `i, j` receives `R_ix ∘ R_xj ∩ R_ij`. Variables
/// keep declaration order; indices above `x` shift down by one.
pub fn eliminate(net: &Network, x: usize) -> Result<Network> {
    if x >= net.len() {
        return Err(Error::VariableOutOfRange(x));
    }
    let mut out = net.without(x)?;
    let shift = |v: usize| if v > x { v - 1 } else { v };
    let nbrs: Vec<usize> = net.neighbors(x).collect();
    if let [i] = nbrs[..] {
        let img = net.constraint(x, i).unwrap().image(net.active(x));
        out.prune_active(shift(i), &img);
        return Ok(out);
    }
    for (a, &i) in nbrs.iter().enumerate() {
        for &j in &nbrs[a + 1..] {
            let comp = net
                .constraint(i, x)
                .unwrap()
                .compose_through(net.active(x), net.constraint(x, j).unwrap())?;
            out.add_constraint(shift(i), shift(j), comp)?;
        }
    }
    Ok(out)
}

/// Outcome of a VEP instance check. A counterexample is a solution of the
/// eliminated network (in the original variable numbering, `x` unbound)
/// that has no extension to `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VepCheck {
    Holds,
    Counterexample(Assignment),
}

/// Whether `x` is arc-consistent relative to every constraint on it.
pub fn is_ac_relative_to_neighbors(net: &Network, x: usize) -> bool {
    net.neighbors(x)
        .all(|i| net.constraint(x, i).unwrap().supports_all(net.active(x), net.active(i)))
}

/// Checks that every solution of `eliminate(net, x)` extends to `x`.
///
/// With `weak`, instances where `x` is not arc-consistent relative to its
/// constraints hold vacuously. `bound` caps the enumerated search space.
pub fn check_vep_instance(net: &Network, x: usize, weak: bool, bound: f64) -> Result<VepCheck> {
    if x >= net.len() {
        return Err(Error::VariableOutOfRange(x));
    }
    if weak && !is_ac_relative_to_neighbors(net, x) {
        return Ok(VepCheck::Holds);
    }
    let reduced = eliminate(net, x)?;
    let unshift = |v: usize| if v >= x { v + 1 } else { v };
    for sol in oracle::enumerate_solutions_bounded(&reduced, usize::MAX, bound)? {
        let mut full = Assignment::new(net.len());
        for (v, a) in sol.bindings() {
            full.bind(unshift(v), a);
        }
        let mut candidates = net.active(x).clone();
        for i in net.neighbors(x) {
            let a = full.get(i).unwrap();
            candidates.intersect_with(&net.constraint(i, x).unwrap().row_set(a));
        }
        if candidates.is_empty() {
            return Ok(VepCheck::Counterexample(full));
        }
    }
    Ok(VepCheck::Holds)
}

/// A named relation of a language between two of its domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LanguageRelation {
    pub name: String,
    pub source: usize,
    pub target: usize,
    pub relation: Relation,
}

/// A finite set of binary relations over named domains.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Language {
    domains: Vec<Arc<Domain>>,
    relations: Vec<LanguageRelation>,
}

impl Language {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_domain(&mut self, domain: Domain) -> usize {
        self.domains.push(Arc::new(domain));
        self.domains.len() - 1
    }

    pub fn domains(&self) -> &[Arc<Domain>] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> &Domain {
        &self.domains[i]
    }

    pub fn domain_index(&self, name: &str) -> Option<usize> {
        self.domains.iter().position(|d| d.name() == name)
    }

    pub fn relations(&self) -> &[LanguageRelation] {
        &self.relations
    }

    pub fn add_relation<S: Into<String>>(
        &mut self,
        name: S,
        source: usize,
        target: usize,
        relation: Relation,
    ) -> Result<usize> {
        let (rows, cols) = match (self.domains.get(source), self.domains.get(target)) {
            (Some(s), Some(t)) => (s.size(), t.size()),
            _ => return Err(Error::Format("relation endpoint is not a declared domain".into())),
        };
        if relation.rows() != rows || relation.cols() != cols {
            return Err(Error::DimensionMismatch {
                left_rows: rows,
                left_cols: cols,
                right_rows: relation.rows(),
                right_cols: relation.cols(),
            });
        }
        self.relations.push(LanguageRelation {
            name: name.into(),
            source,
            target,
            relation,
        });
        Ok(self.relations.len() - 1)
    }

    /// First domain index with the same labels as domain `i`.
    pub fn canonical_domain(&self, i: usize) -> usize {
        (0..=i)
            .find(|&j| self.domains[j].same_values(&self.domains[i]))
            .unwrap()
    }

    /// Every relation in both orientations: `(index, inverted, source,
    /// target, relation)`.
    pub fn oriented(&self) -> Vec<(usize, bool, usize, usize, Relation)> {
        let mut out = Vec::with_capacity(2 * self.relations.len());
        for (k, r) in self.relations.iter().enumerate() {
            out.push((k, false, r.source, r.target, r.relation.clone()));
            out.push((k, true, r.target, r.source, r.relation.inverse()));
        }
        out
    }
}

/// Where an image set came from: `R(value)` for relation `relation`, or
/// `R^-1(value)` when `inverse`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImageSource {
    pub relation: usize,
    pub inverse: bool,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HellyWitness {
    /// Canonical index of the target domain.
    pub domain: usize,
    /// Pairwise intersecting images whose total intersection is empty.
    pub members: Vec<ImageSource>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Helly {
    Holds,
    Witness(HellyWitness),
}

impl Helly {
    pub fn holds(&self) -> bool {
        matches!(self, Helly::Holds)
    }
}

/// The Helly property: for every domain, every pairwise-intersecting family
/// of nonempty images `R(a)` (relations and their inverses) has a common
/// value.
pub fn check_helly(lang: &Language) -> Helly {
    let oriented = lang.oriented();
    let mut targets: Vec<usize> = (0..lang.domains.len()).map(|d| lang.canonical_domain(d)).collect();
    targets.sort_unstable();
    targets.dedup();
    for dom in targets {
        let mut family: Vec<(ValueSet, ImageSource)> = Vec::new();
        for (k, inv, source, target, rel) in &oriented {
            if lang.canonical_domain(*target) != dom {
                continue;
            }
            for a in 0..lang.domains[*source].size() {
                let img = rel.row_set(a);
                if img.is_empty() || family.iter().any(|(s, _)| *s == img) {
                    continue;
                }
                family.push((
                    img,
                    ImageSource {
                        relation: *k,
                        inverse: *inv,
                        value: a,
                    },
                ));
            }
        }
        if let Some(members) = empty_pairwise_family(&family) {
            return Helly::Witness(HellyWitness { domain: dom, members });
        }
    }
    Helly::Holds
}

/// Searches for a pairwise intersecting subfamily with empty intersection.
/// Only families whose running intersection strictly shrinks with every
/// added set are explored; a minimal witness always admits such an order.
fn empty_pairwise_family(family: &[(ValueSet, ImageSource)]) -> Option<Vec<ImageSource>> {
    fn dfs(
        family: &[(ValueSet, ImageSource)],
        start: usize,
        current: &ValueSet,
        chosen: &mut Vec<usize>,
    ) -> Option<Vec<ImageSource>> {
        for t in start..family.len() {
            let set = &family[t].0;
            if !chosen.iter().all(|&c| family[c].0.intersects(set)) {
                continue;
            }
            let next = current.intersection(set);
            if next.len() == current.len() {
                continue;
            }
            chosen.push(t);
            if next.is_empty() {
                return Some(chosen.iter().map(|&c| family[c].1).collect());
            }
            if let Some(w) = dfs(family, t + 1, &next, chosen) {
                return Some(w);
            }
            chosen.pop();
        }
        None
    }
    for s in 0..family.len() {
        let mut chosen = vec![s];
        if let Some(w) = dfs(family, s + 1, &family[s].0, &mut chosen) {
            return Some(w);
        }
    }
    None
}

/// A star network over `lang`: a centre variable with domain `centre`, and
/// one leaf per arm `(relation, inverted)` whose oriented relation must end
/// in the centre's domain. The leaf constraint is `R_{leaf,centre}`.
pub fn star_network(lang: &Language, centre: usize, arms: &[(usize, bool)]) -> Result<Network> {
    let mut net = Network::new();
    let c = net.add_variable_shared("x", lang.domains[centre].clone())?;
    for (n, &(k, inv)) in arms.iter().enumerate() {
        let r = &lang.relations[k];
        let (src, tgt, rel) = if inv {
            (r.target, r.source, r.relation.inverse())
        } else {
            (r.source, r.target, r.relation.clone())
        };
        if !lang.domains[tgt].same_values(&lang.domains[centre]) {
            return Err(Error::Precondition(format!("relation {} does not end in the centre domain", r.name)));
        }
        let leaf = net.add_variable_shared(format!("y{n}"), lang.domains[src].clone())?;
        net.add_constraint(leaf, c, rel)?;
    }
    Ok(net)
}
