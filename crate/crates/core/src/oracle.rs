//! Brute-force ground truth.
//!
//! Plain chronological backtracking in declaration order with no
//! propagation at all, so it shares nothing with the algorithms it checks.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::network::{Assignment, Network};

/// Environment variable overriding the search-space bound.
pub const MAX_ORACLE_ENV: &str = "DPCSTAR_MAX_ORACLE";

const DEFAULT_BOUND: f64 = 1e8;

/// Product-of-active-domain-sizes bound used to refuse hopeless searches.
pub fn default_bound() -> f64 {
    std::env::var(MAX_ORACLE_ENV)
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(DEFAULT_BOUND)
}

fn check_bound(net: &Network, bound: f64) -> Result<()> {
    let estimate: f64 = (0..net.len()).map(|v| net.active(v).len() as f64).product();
    if estimate > bound {
        return Err(Error::SearchSpaceTooLarge { estimate, bound });
    }
    Ok(())
}

fn consistent_with_prefix(net: &Network, values: &[usize], var: usize, value: usize) -> bool {
    (0..var).all(|prev| match net.constraint(prev, var) {
        Some(r) => r.contains(values[prev], value),
        None => true,
    })
}

fn search(net: &Network, var: usize, values: &mut Vec<usize>, limit: usize, out: &mut Vec<Assignment>) {
    if out.len() >= limit {
        return;
    }
    if var == net.len() {
        out.push(Assignment::from_values(values));
        return;
    }
    for value in net.active(var).iter() {
        if consistent_with_prefix(net, values, var, value) {
            values.push(value);
            search(net, var + 1, values, limit, out);
            values.pop();
            if out.len() >= limit {
                return;
            }
        }
    }
}

/// Up to `limit` solutions, in lexicographic order of value indices.
pub fn enumerate_solutions(net: &Network, limit: usize) -> Result<Vec<Assignment>> {
    enumerate_solutions_bounded(net, limit, default_bound())
}

pub fn enumerate_solutions_bounded(net: &Network, limit: usize, bound: f64) -> Result<Vec<Assignment>> {
    check_bound(net, bound)?;
    let mut out = Vec::new();
    if limit == 0 {
        return Ok(out);
    }
    search(net, 0, &mut Vec::with_capacity(net.len()), limit, &mut out);
    Ok(out)
}

pub fn all_solutions(net: &Network) -> Result<Vec<Assignment>> {
    enumerate_solutions(net, usize::MAX)
}

pub fn is_consistent(net: &Network) -> Result<bool> {
    Ok(!enumerate_solutions(net, 1)?.is_empty())
}

/// Every subset of `0..n` with at most `k` elements, smallest first.
pub(crate) fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All partial solutions over `vars` (constraints with both ends in `vars`).
pub fn partial_solutions(net: &Network, vars: &[usize]) -> Vec<Vec<usize>> {
    fn rec(net: &Network, vars: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let k = cur.len();
        if k == vars.len() {
            out.push(cur.clone());
            return;
        }
        let var = vars[k];
        for value in net.active(var).iter() {
            let ok = (0..k).all(|p| match net.constraint(vars[p], var) {
                Some(r) => r.contains(cur[p], value),
                None => true,
            });
            if ok {
                cur.push(value);
                rec(net, vars, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(net, vars, &mut Vec::new(), &mut out);
    out
}

/// Whether every partial solution on every subset of at most `k` variables
/// extends to a full solution. The empty subset counts, so an inconsistent
/// network is never globally consistent.
pub fn check_global_consistency(net: &Network, k: usize) -> Result<bool> {
    let solutions = all_solutions(net)?;
    for subset in subsets_up_to(net.len(), k) {
        let projected: HashSet<Vec<usize>> = solutions
            .iter()
            .map(|s| subset.iter().map(|&v| s.get(v).unwrap()).collect())
            .collect();
        for partial in partial_solutions(net, &subset) {
            if !projected.contains(&partial) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The solution set as a set of value vectors, for equality checks.
pub fn solution_set(net: &Network) -> Result<HashSet<Vec<usize>>> {
    Ok(all_solutions(net)?
        .into_iter()
        .map(|a| (0..net.len()).map(|v| a.get(v).unwrap()).collect())
        .collect())
}
