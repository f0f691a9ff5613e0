//! Domains, binary constraint networks and (partial) assignments.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::bitset::ValueSet;
use crate::error::{Error, Result};
use crate::relation::Relation;

/// A finite domain. The order of `labels` fixes matrix indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    name: String,
    labels: Vec<String>,
}

impl Domain {
    pub fn new<S: Into<String>, L: Into<String>>(
        name: S,
        labels: impl IntoIterator<Item = L>,
    ) -> Result<Self> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateValue {
                    domain: name,
                    value: l.clone(),
                });
            }
        }
        Ok(Domain { name, labels })
    }

    /// Domain with labels `"0"`, `"1"`, ... `"size-1"`.
    pub fn numeric<S: Into<String>>(name: S, size: usize) -> Self {
        Domain {
            name: name.into(),
            labels: (0..size).map(|v| v.to_string()).collect(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, value: usize) -> &str {
        &self.labels[value]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Two domains are the same sort when they list the same values in the
    /// same order; names are presentation only.
    pub fn same_values(&self, other: &Domain) -> bool {
        self.labels == other.labels
    }
}

/// A binary constraint network `<V, D, C>`.
///
/// Constraints are kept in both orientations so that `R_ji` is always the
/// transpose of `R_ij`; every mutation goes through methods that rewrite
/// both copies. Pairs without a stored constraint are implicitly universal.
#[derive(Clone, PartialEq, Eq)]
pub struct Network {
    names: Vec<String>,
    index: HashMap<String, usize>,
    domains: Vec<Arc<Domain>>,
    active: Vec<ValueSet>,
    adj: Vec<BTreeMap<usize, Relation>>,
}

impl Default for Network {
    fn default() -> Self {
        Self::new()
    }
}

impl Network {
    pub fn new() -> Self {
        Network {
            names: Vec::new(),
            index: HashMap::new(),
            domains: Vec::new(),
            active: Vec::new(),
            adj: Vec::new(),
        }
    }

    pub fn add_variable<S: Into<String>>(&mut self, name: S, domain: Domain) -> Result<usize> {
        self.add_variable_shared(name, Arc::new(domain))
    }

    pub fn add_variable_shared<S: Into<String>>(
        &mut self,
        name: S,
        domain: Arc<Domain>,
    ) -> Result<usize> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::DuplicateVariable(name));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.active.push(ValueSet::full(domain.size()));
        self.domains.push(domain);
        self.adj.push(BTreeMap::new());
        Ok(id)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn var(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn domain(&self, var: usize) -> &Domain {
        &self.domains[var]
    }

    pub fn domain_size(&self, var: usize) -> usize {
        self.domains[var].size()
    }

    /// Label-to-index lookup for a variable's declared domain.
    pub fn value(&self, var: usize, label: &str) -> Result<usize> {
        self.domains[var]
            .index_of(label)
            .ok_or_else(|| Error::UnknownValue {
                context: self.names[var].clone(),
                value: label.to_string(),
            })
    }

    /// The active (not yet pruned) values of `var`.
    #[inline]
    pub fn active(&self, var: usize) -> &ValueSet {
        &self.active[var]
    }

    pub fn set_active(&mut self, var: usize, values: ValueSet) {
        assert_eq!(values.capacity(), self.domains[var].size());
        self.active[var] = values;
    }

    /// `D_var <- D_var ∩ keep`; returns whether anything was pruned.
    pub fn prune_active(&mut self, var: usize, keep: &ValueSet) -> bool {
        self.active[var].intersect_with(keep)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.len() {
            return Err(Error::VariableOutOfRange(i));
        }
        if j >= self.len() {
            return Err(Error::VariableOutOfRange(j));
        }
        if i == j {
            return Err(Error::SelfLoop(i));
        }
        Ok(())
    }

    fn check_shape(&self, i: usize, j: usize, rel: &Relation) -> Result<()> {
        let (rows, cols) = (self.domain_size(i), self.domain_size(j));
        if rel.rows() != rows || rel.cols() != cols {
            return Err(Error::DimensionMismatch {
                left_rows: rows,
                left_cols: cols,
                right_rows: rel.rows(),
                right_cols: rel.cols(),
            });
        }
        Ok(())
    }

    /// Stores `rel` as `R_ij` (and its inverse as `R_ji`), replacing any
    /// previous constraint on the pair.
    pub fn set_constraint(&mut self, i: usize, j: usize, rel: Relation) -> Result<()> {
        self.check_pair(i, j)?;
        self.check_shape(i, j, &rel)?;
        let inv = rel.inverse();
        self.adj[i].insert(j, rel);
        self.adj[j].insert(i, inv);
        Ok(())
    }

    /// Adds `rel` on `(i, j)`, conjoining it with an existing constraint so
    /// that each pair carries at most one relation.
    pub fn add_constraint(&mut self, i: usize, j: usize, rel: Relation) -> Result<()> {
        self.check_pair(i, j)?;
        self.check_shape(i, j, &rel)?;
        if self.adj[i].contains_key(&j) {
            self.intersect_constraint(i, j, &rel)?;
            Ok(())
        } else {
            self.set_constraint(i, j, rel)
        }
    }

    pub fn remove_constraint(&mut self, i: usize, j: usize) -> Option<Relation> {
        let r = self.adj.get_mut(i)?.remove(&j);
        if r.is_some() {
            self.adj[j].remove(&i);
        }
        r
    }

    #[inline]
    pub fn constraint(&self, i: usize, j: usize) -> Option<&Relation> {
        self.adj.get(i)?.get(&j)
    }

    #[inline]
    pub fn has_constraint(&self, i: usize, j: usize) -> bool {
        self.adj.get(i).is_some_and(|m| m.contains_key(&j))
    }

    /// `R_ij`, or the universal relation over the declared domains when the
    /// pair is unconstrained.
    pub fn relation(&self, i: usize, j: usize) -> Cow<'_, Relation> {
        match self.constraint(i, j) {
            Some(r) => Cow::Borrowed(r),
            None => Cow::Owned(Relation::universal(self.domain_size(i), self.domain_size(j))),
        }
    }

    /// `R_ij <- R_ij ∩ rel`, creating the constraint when absent. Returns
    /// whether the stored relation shrank.
    pub fn intersect_constraint(&mut self, i: usize, j: usize, rel: &Relation) -> Result<bool> {
        self.check_pair(i, j)?;
        self.check_shape(i, j, rel)?;
        match self.adj[i].get_mut(&j) {
            Some(r) => {
                let changed = r.intersect_with(rel)?;
                if changed {
                    let inv = r.inverse();
                    self.adj[j].insert(i, inv);
                }
                Ok(changed)
            }
            None => {
                self.set_constraint(i, j, rel.clone())?;
                Ok(true)
            }
        }
    }

    /// `R_ij <- R_ij ∩ (D_i x D_j)` over active domains.
    pub fn restrict_constraint_to_active(&mut self, i: usize, j: usize) -> bool {
        let (left, right) = (self.active[i].clone(), self.active[j].clone());
        match self.adj[i].get_mut(&j) {
            Some(r) => {
                let changed = r.restrict_to(&left, &right);
                if changed {
                    let inv = r.inverse();
                    self.adj[j].insert(i, inv);
                }
                changed
            }
            None => false,
        }
    }

    /// Variables sharing a stored constraint with `var`, ascending.
    pub fn neighbors(&self, var: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[var].keys().copied()
    }

    pub fn degree(&self, var: usize) -> usize {
        self.adj[var].len()
    }

    /// Stored scopes as `(i, j)` with `i < j`.
    pub fn scopes(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, m) in self.adj.iter().enumerate() {
            for &j in m.keys() {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn num_constraints(&self) -> usize {
        self.adj.iter().map(|m| m.len()).sum::<usize>() / 2
    }

    /// Number of stored constraints that are not the universal relation.
    pub fn num_non_universal(&self) -> usize {
        self.scopes()
            .into_iter()
            .filter(|&(i, j)| !self.adj[i][&j].is_universal())
            .count()
    }

    /// Some active domain or some stored relation is empty.
    pub fn is_trivially_inconsistent(&self) -> bool {
        self.active.iter().any(|d| d.is_empty())
            || self.adj.iter().any(|m| m.values().any(|r| r.is_empty()))
    }

    /// Verifies the stored-inverse invariant `R_ji = R_ij^-1`.
    pub fn check_symmetry(&self) -> bool {
        self.adj.iter().enumerate().all(|(i, m)| {
            m.iter().all(|(&j, r)| {
                self.adj[j]
                    .get(&i)
                    .is_some_and(|back| *back == r.inverse())
            })
        })
    }

    /// The restriction of the network to `keep` (declaration order is
    /// preserved; variable `k` of the result is the `k`-th kept variable).
    pub fn restrict(&self, keep: &[usize]) -> Result<Network> {
        let mut sorted: Vec<usize> = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut map = vec![None; self.len()];
        let mut out = Network::new();
        for &v in &sorted {
            if v >= self.len() {
                return Err(Error::VariableOutOfRange(v));
            }
            let id = out.add_variable_shared(self.names[v].clone(), self.domains[v].clone())?;
            out.active[id] = self.active[v].clone();
            map[v] = Some(id);
        }
        for (i, j) in self.scopes() {
            if let (Some(a), Some(b)) = (map[i], map[j]) {
                out.set_constraint(a, b, self.adj[i][&j].clone())?;
            }
        }
        Ok(out)
    }

    /// The network without `var` and its constraints.
    pub fn without(&self, var: usize) -> Result<Network> {
        if var >= self.len() {
            return Err(Error::VariableOutOfRange(var));
        }
        let keep: Vec<usize> = (0..self.len()).filter(|&v| v != var).collect();
        self.restrict(&keep)
    }

    /// Whether `a` satisfies every constraint whose scope it fully binds and
    /// every binding lies in the variable's active domain.
    pub fn is_solution(&self, a: &Assignment) -> Result<bool> {
        for (var, _) in a.bindings() {
            if var >= self.len() {
                return Err(Error::VariableOutOfRange(var));
            }
        }
        for (var, value) in a.bindings() {
            if !self.active[var].contains(value) {
                return Ok(false);
            }
        }
        for (i, vi) in a.bindings() {
            for (&j, r) in &self.adj[i] {
                if j <= i {
                    continue;
                }
                if let Some(vj) = a.get(j) {
                    if !r.contains(vi, vj) {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Builds an assignment from `(variable, value)` label pairs.
    pub fn assignment<'a>(
        &self,
        bindings: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Assignment> {
        let mut out = Assignment::new(self.len());
        for (var, label) in bindings {
            let v = self.var(var)?;
            out.bind(v, self.value(v, label)?);
        }
        Ok(out)
    }

    /// Renders an assignment as `name=label` pairs.
    pub fn format_assignment(&self, a: &Assignment) -> String {
        a.bindings()
            .map(|(v, x)| format!("{}={}", self.names[v], self.domains[v].label(x)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Network {{")?;
        for v in 0..self.len() {
            writeln!(f, "  {}: {:?}", self.names[v], self.active[v])?;
        }
        for (i, j) in self.scopes() {
            writeln!(f, "  ({}, {}): {:?}", self.names[i], self.names[j], self.adj[i][&j])?;
        }
        write!(f, "}}")
    }
}

/// A partial map from variables to value indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    values: Vec<Option<usize>>,
}

impl Assignment {
    pub fn new(num_vars: usize) -> Self {
        Assignment {
            values: vec![None; num_vars],
        }
    }

    pub fn from_values(values: &[usize]) -> Self {
        Assignment {
            values: values.iter().copied().map(Some).collect(),
        }
    }

    pub fn bind(&mut self, var: usize, value: usize) {
        if var >= self.values.len() {
            self.values.resize(var + 1, None);
        }
        self.values[var] = Some(value);
    }

    pub fn unbind(&mut self, var: usize) {
        if let Some(slot) = self.values.get_mut(var) {
            *slot = None;
        }
    }

    #[inline]
    pub fn get(&self, var: usize) -> Option<usize> {
        self.values.get(var).copied().flatten()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(v, x)| x.map(|x| (v, x)))
    }

    pub fn num_bound(&self) -> usize {
        self.values.iter().filter(|x| x.is_some()).count()
    }

    /// Whether every variable in `0..num_vars` is bound.
    pub fn is_complete(&self, num_vars: usize) -> bool {
        (0..num_vars).all(|v| self.get(v).is_some())
    }

    /// The restriction of this assignment to `vars`.
    pub fn project(&self, vars: &[usize]) -> Assignment {
        let mut out = Assignment::new(self.values.len());
        for &v in vars {
            if let Some(x) = self.get(v) {
                out.bind(v, x);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc(name: &str) -> Domain {
        Domain::new(name, ["a", "b", "c"]).unwrap()
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(matches!(
            Domain::new("d", ["a", "a"]),
            Err(Error::DuplicateValue { .. })
        ));
    }

    #[test]
    fn inverse_storage_is_maintained() {
        let mut n = Network::new();
        let x = n.add_variable("x", abc("D")).unwrap();
        let y = n.add_variable("y", abc("D")).unwrap();
        n.set_constraint(x, y, Relation::from_tuples(3, 3, [(0, 1), (1, 2)]))
            .unwrap();
        assert_eq!(n.constraint(y, x).unwrap(), &n.constraint(x, y).unwrap().inverse());
        n.intersect_constraint(y, x, &Relation::from_tuples(3, 3, [(2, 1)]))
            .unwrap();
        assert!(n.check_symmetry());
        assert_eq!(n.constraint(x, y).unwrap().tuples().collect::<Vec<_>>(), vec![(1, 2)]);
    }

    #[test]
    fn self_loops_and_bad_shapes_rejected() {
        let mut n = Network::new();
        let x = n.add_variable("x", abc("D")).unwrap();
        let y = n.add_variable("y", Domain::numeric("E", 2)).unwrap();
        assert!(matches!(
            n.set_constraint(x, x, Relation::universal(3, 3)),
            Err(Error::SelfLoop(0))
        ));
        assert!(matches!(
            n.set_constraint(x, y, Relation::universal(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_assignment_is_vacuous_solution() {
        let mut n = Network::new();
        let x = n.add_variable("x", abc("D")).unwrap();
        let y = n.add_variable("y", abc("D")).unwrap();
        n.set_constraint(x, y, Relation::empty(3, 3)).unwrap();
        assert!(n.is_solution(&Assignment::new(2)).unwrap());
        assert!(n.is_trivially_inconsistent());
    }

    #[test]
    fn unknown_variable_binding_is_an_error() {
        let mut n = Network::new();
        n.add_variable("x", abc("D")).unwrap();
        let mut a = Assignment::new(1);
        a.bind(3, 0);
        assert!(n.is_solution(&a).is_err());
    }

    #[test]
    fn restrict_to_everything_is_identity() {
        let mut n = Network::new();
        for v in ["p", "q", "r"] {
            n.add_variable(v, abc("D")).unwrap();
        }
        n.set_constraint(0, 2, Relation::from_tuples(3, 3, [(0, 0)])).unwrap();
        assert_eq!(n.restrict(&[0, 1, 2]).unwrap(), n);
        let sub = n.restrict(&[1, 2]).unwrap();
        assert_eq!(sub.num_constraints(), 0);
    }
}
