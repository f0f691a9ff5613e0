#![allow(dead_code)]

use std::path::PathBuf;

use dpcstar::format::{parse_language, parse_network, LanguageDoc, NetworkDoc};
use dpcstar::{Domain, Network, Relation, ValueSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn load(name: &str) -> NetworkDoc {
    parse_network(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

pub fn load_language(name: &str) -> LanguageDoc {
    parse_language(&std::fs::read_to_string(fixture_path(name)).unwrap()).unwrap()
}

/// Uniformly random network: each pair constrained with probability
/// `density`, each tuple allowed with probability `looseness`.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize, d: usize, density: f64, looseness: f64) -> Network {
    let mut net = Network::new();
    for v in 0..n {
        net.add_variable(format!("v{v}"), Domain::numeric("D", d)).unwrap();
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let mut r = Relation::empty(d, d);
                for a in 0..d {
                    for b in 0..d {
                        if rng.gen_bool(looseness) {
                            r.insert(a, b);
                        }
                    }
                }
                net.set_constraint(i, j, r).unwrap();
            }
        }
    }
    net
}

pub fn random_relation(rng: &mut ChaCha8Rng, rows: usize, cols: usize, looseness: f64) -> Relation {
    let mut r = Relation::empty(rows, cols);
    for a in 0..rows {
        for b in 0..cols {
            if rng.gen_bool(looseness) {
                r.insert(a, b);
            }
        }
    }
    r
}

/// Row-convex relation: every row is an interval (possibly empty).
pub fn random_row_convex(rng: &mut ChaCha8Rng, d: usize) -> Relation {
    let mut r = Relation::empty(d, d);
    for a in 0..d {
        if rng.gen_bool(0.85) {
            let lo = rng.gen_range(0..d);
            let hi = rng.gen_range(lo..d);
            for b in lo..=hi {
                r.insert(a, b);
            }
        }
    }
    r
}

pub fn values(d: usize, xs: &[usize]) -> ValueSet {
    ValueSet::from_values(d, xs.iter().copied())
}

/// Label-level view of a constraint for readable golden assertions.
pub fn labelled(net: &Network, i: &str, j: &str) -> Vec<(String, String)> {
    let (vi, vj) = (net.var(i).unwrap(), net.var(j).unwrap());
    net.relation(vi, vj)
        .tuples()
        .map(|(a, b)| (net.domain(vi).label(a).to_string(), net.domain(vj).label(b).to_string()))
        .collect()
}

pub fn active_labels(net: &Network, v: &str) -> Vec<String> {
    let x = net.var(v).unwrap();
    net.active(x).iter().map(|a| net.domain(x).label(a).to_string()).collect()
}

pub fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}
