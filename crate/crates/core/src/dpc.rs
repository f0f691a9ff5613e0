//! The directional path-consistency algorithms DPC and DPC*, and
//! backtrack-free solution extraction.
//!
//! Both algorithms take a processing order `(v_1, ..., v_n)` and visit
//! `v_n` first. The earlier neighbours of `v_k` are its neighbours in the
//! current (possibly filled) graph with a smaller position.

use std::fmt;

use crate::bitset::ValueSet;
use crate::error::Result;
use crate::graph::VarOrder;
use crate::network::{Assignment, Network};
use crate::relation::Relation;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Inconsistent,
    Processed,
}

/// Result of a DPC or DPC* run.
///
/// `network` is the transformed network. After an `Inconsistent` verdict it
/// is the state at the point of failure and carries no guarantees.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub verdict: Verdict,
    pub network: Network,
    /// Scopes created during the run, `(i, j)` with `i < j`, in creation order.
    pub fill_edges: Vec<(usize, usize)>,
    /// Domain revisions plus relation updates performed.
    pub revisions: u64,
}

impl SolveOutcome {
    pub fn is_processed(&self) -> bool {
        self.verdict == Verdict::Processed
    }
}

struct Run {
    net: Network,
    fill_edges: Vec<(usize, usize)>,
    revisions: u64,
}

impl Run {
    fn finish(self, verdict: Verdict) -> SolveOutcome {
        SolveOutcome {
            verdict,
            network: self.net,
            fill_edges: self.fill_edges,
            revisions: self.revisions,
        }
    }

    /// Earlier neighbours of `v`, ascending by position.
    fn earlier(&self, order: &VarOrder, v: usize) -> Vec<usize> {
        let k = order.position(v);
        let mut out: Vec<usize> = self
            .net
            .neighbors(v)
            .filter(|&u| order.position(u) < k)
            .collect();
        out.sort_by_key(|&u| order.position(u));
        out
    }

    /// `D_i <- D_i ∩ R_ki(D_k)`. Returns false when `D_i` empties.
    fn revise_towards(&mut self, k: usize, i: usize) -> bool {
        self.revisions += 1;
        let img = self.net.constraint(k, i).unwrap().image(self.net.active(k));
        self.net.prune_active(i, &img);
        !self.net.active(i).is_empty()
    }

    /// `R_ij <- R_ij ∩ (R_ik ∘ R_kj)`, creating `R_ij = D_i x D_j` first when
    /// absent. Returns false when `R_ij` empties.
    fn update_pair(&mut self, i: usize, k: usize, j: usize) -> bool {
        self.revisions += 1;
        if !self.net.has_constraint(i, j) {
            let fresh = Relation::product(self.net.active(i), self.net.active(j));
            self.net.set_constraint(i, j, fresh).expect("valid scope");
            self.fill_edges.push((i.min(j), i.max(j)));
        }
        let comp = {
            let rik = self.net.constraint(i, k).unwrap();
            let rkj = self.net.constraint(k, j).unwrap();
            rik.compose_through(self.net.active(k), rkj)
                .expect("relations match their domains")
        };
        self.net.intersect_constraint(i, j, &comp).expect("same shape");
        !self.net.constraint(i, j).unwrap().is_empty()
    }
}

fn start(net: &Network, order: &VarOrder) -> Result<Run> {
    order.check_covers(net.len())?;
    Ok(Run {
        net: net.clone(),
        fill_edges: Vec::new(),
        revisions: 0,
    })
}

/// DPC: enforces strong directional path-consistency relative to `order`.
pub fn dpc(net: &Network, order: &VarOrder) -> Result<SolveOutcome> {
    let mut run = start(net, order)?;
    if run.net.is_trivially_inconsistent() {
        return Ok(run.finish(Verdict::Inconsistent));
    }
    for pos in (0..order.len()).rev() {
        let k = order.at(pos);
        let earlier = run.earlier(order, k);
        for &i in &earlier {
            if !run.revise_towards(k, i) {
                return Ok(run.finish(Verdict::Inconsistent));
            }
        }
        for (a, &j) in earlier.iter().enumerate() {
            for &i in &earlier[a + 1..] {
                if !run.update_pair(i, k, j) {
                    return Ok(run.finish(Verdict::Inconsistent));
                }
            }
        }
    }
    Ok(run.finish(Verdict::Processed))
}

/// DPC*: the variant that prunes the eliminated variable's own domain before
/// composing, deciding consistency for majority-closed networks.
pub fn dpc_star(net: &Network, order: &VarOrder) -> Result<SolveOutcome> {
    let mut run = start(net, order)?;
    if run.net.is_trivially_inconsistent() {
        return Ok(run.finish(Verdict::Inconsistent));
    }
    for pos in (0..order.len()).rev() {
        let k = order.at(pos);
        let earlier = run.earlier(order, k);
        if let [i] = earlier[..] {
            if !run.revise_towards(k, i) {
                return Ok(run.finish(Verdict::Inconsistent));
            }
            continue;
        }
        for &i in &earlier {
            if !run.revise_towards(i, k) {
                return Ok(run.finish(Verdict::Inconsistent));
            }
        }
        for (a, &i) in earlier.iter().enumerate() {
            run.net.restrict_constraint_to_active(i, k);
            for &j in &earlier[..a] {
                run.net.restrict_constraint_to_active(j, k);
                if !run.update_pair(i, k, j) {
                    return Ok(run.finish(Verdict::Inconsistent));
                }
            }
        }
    }
    Ok(run.finish(Verdict::Processed))
}

/// Extraction stopped because no value of `variable` was compatible with
/// the values already chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractionFailure {
    pub variable: usize,
    pub name: String,
}

impl fmt::Display for ExtractionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "no compatible value left for variable {}; the network is not decomposable along this order",
            self.name
        )
    }
}

impl std::error::Error for ExtractionFailure {}

/// Assigns `v_1, ..., v_n` in order, each time taking the least active value
/// compatible with every earlier constrained neighbour.
pub fn extract_solution(net: &Network, order: &VarOrder) -> Result<std::result::Result<Assignment, ExtractionFailure>> {
    order.check_covers(net.len())?;
    let mut assignment = Assignment::new(net.len());
    for pos in 0..order.len() {
        let v = order.at(pos);
        let mut candidates: ValueSet = net.active(v).clone();
        for u in net.neighbors(v) {
            if order.position(u) < pos {
                let a = assignment.get(u).expect("earlier variable assigned");
                candidates.intersect_with(&net.constraint(u, v).unwrap().row_set(a));
            }
        }
        match candidates.first() {
            Some(value) => assignment.bind(v, value),
            None => {
                return Ok(Err(ExtractionFailure {
                    variable: v,
                    name: net.name(v).to_string(),
                }))
            }
        }
    }
    Ok(Ok(assignment))
}
