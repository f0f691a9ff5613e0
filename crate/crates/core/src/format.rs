//! JSON documents for networks and languages.
//!
//! A network document looks like
//!
//! ```json
//! {
//!   "variables": ["x", "y"],
//!   "domains": {"x": ["a", "b"], "y": ["a", "b"]},
//!   "constraints": [{"scope": ["x", "y"], "tuples": [["a", "b"]]}],
//!   "trees": {"x": [["a", "b"]]},
//!   "majority": {"*": ["a", "a", "a", "..."]}
//! }
//! ```
//!
//! Tuples and tables use value labels; the label order in `domains` fixes
//! value indices. A majority table is flattened as `x*d² + y*d + z` and the
//! key `"*"` applies to every variable without its own entry. Optional keys:
//! `domain_names`, `active` (pruned domains), `trees`, `majority`,
//! `nary_constraints`, `description`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::elimination::Language;
use crate::error::{Error, Result};
use crate::majority::{MajorityOp, NaryRelation, TreeDomain};
use crate::network::{Domain, Network};
use crate::relation::Relation;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    variables: Vec<String>,
    domains: BTreeMap<String, Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain_names: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    active: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default)]
    constraints: Vec<ConstraintEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trees: Option<BTreeMap<String, Vec<[String; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    majority: Option<BTreeMap<String, Vec<String>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    nary_constraints: Vec<NaryEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintEntry {
    scope: [String; 2],
    tuples: Vec<[String; 2]>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NaryEntry {
    scope: Vec<String>,
    tuples: Vec<Vec<String>>,
}

/// A constraint of arbitrary arity over network variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaryConstraint {
    pub scope: Vec<usize>,
    pub relation: NaryRelation,
}

/// A parsed network document.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkDoc {
    pub description: Option<String>,
    pub network: Network,
    /// Tree domain per variable, when given.
    pub trees: Option<Vec<Option<TreeDomain>>>,
    /// Majority operation per variable, when given.
    pub majority: Option<Vec<MajorityOp>>,
    pub nary: Vec<NaryConstraint>,
}

impl NetworkDoc {
    pub fn new(network: Network) -> Self {
        NetworkDoc {
            description: None,
            network,
            trees: None,
            majority: None,
            nary: Vec::new(),
        }
    }
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn label_index(dom: &Domain, var: &str, label: &str) -> Result<usize> {
    dom.index_of(label).ok_or_else(|| Error::UnknownValue {
        context: var.to_string(),
        value: label.to_string(),
    })
}

fn parse_table(dom: &Domain, key: &str, table: &[String]) -> Result<MajorityOp> {
    let values = table
        .iter()
        .map(|l| label_index(dom, key, l))
        .collect::<Result<Vec<_>>>()?;
    MajorityOp::new(dom.size(), values)
}

fn render_table(dom: &Domain, op: &MajorityOp) -> Vec<String> {
    op.table().iter().map(|&v| dom.label(v).to_string()).collect()
}

pub fn parse_network(text: &str) -> Result<NetworkDoc> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
    let mut net = Network::new();
    let mut shared: HashMap<(String, Vec<String>), Arc<Domain>> = HashMap::new();
    for name in &file.variables {
        let labels = file
            .domains
            .get(name)
            .ok_or_else(|| fmt_err(format!("no domain for variable `{name}`")))?;
        let dom_name = file
            .domain_names
            .as_ref()
            .and_then(|m| m.get(name))
            .cloned()
            .unwrap_or_else(|| name.clone());
        let key = (dom_name.clone(), labels.clone());
        let dom = match shared.get(&key) {
            Some(d) => d.clone(),
            None => {
                let d = Arc::new(Domain::new(dom_name, labels.iter().cloned())?);
                shared.insert(key, d.clone());
                d
            }
        };
        net.add_variable_shared(name.clone(), dom)?;
    }
    for key in file.domains.keys() {
        net.var(key)?;
    }
    if let Some(active) = &file.active {
        for (name, labels) in active {
            let v = net.var(name)?;
            let mut set = crate::bitset::ValueSet::empty(net.domain_size(v));
            for l in labels {
                set.insert(label_index(net.domain(v), name, l)?);
            }
            net.set_active(v, set);
        }
    }
    for c in &file.constraints {
        let (i, j) = (net.var(&c.scope[0])?, net.var(&c.scope[1])?);
        let mut rel = Relation::empty(net.domain_size(i), net.domain_size(j));
        for [a, b] in &c.tuples {
            rel.insert(
                label_index(net.domain(i), &c.scope[0], a)?,
                label_index(net.domain(j), &c.scope[1], b)?,
            );
        }
        net.add_constraint(i, j, rel)?;
    }
    let trees = match &file.trees {
        None => None,
        Some(map) => {
            let mut out = vec![None; net.len()];
            for (name, edges) in map {
                let v = net.var(name)?;
                let dom = net.domain(v);
                let pairs = edges
                    .iter()
                    .map(|[a, b]| Ok((label_index(dom, name, a)?, label_index(dom, name, b)?)))
                    .collect::<Result<Vec<_>>>()?;
                out[v] = Some(TreeDomain::new(dom.size(), &pairs)?);
            }
            Some(out)
        }
    };
    let majority = match &file.majority {
        None => None,
        Some(map) => {
            let mut out = Vec::with_capacity(net.len());
            for v in 0..net.len() {
                let name = net.name(v);
                let table = map
                    .get(name)
                    .or_else(|| map.get("*"))
                    .ok_or_else(|| fmt_err(format!("no majority table covers `{name}`")))?;
                out.push(parse_table(net.domain(v), name, table)?);
            }
            for key in map.keys() {
                if key != "*" {
                    net.var(key)?;
                }
            }
            Some(out)
        }
    };
    let mut nary = Vec::new();
    for c in &file.nary_constraints {
        let scope = c.scope.iter().map(|s| net.var(s)).collect::<Result<Vec<_>>>()?;
        let sizes: Vec<usize> = scope.iter().map(|&v| net.domain_size(v)).collect();
        let mut tuples = Vec::new();
        for t in &c.tuples {
            if t.len() != scope.len() {
                return Err(fmt_err(format!("tuple {t:?} does not match scope {:?}", c.scope)));
            }
            tuples.push(
                t.iter()
                    .zip(&scope)
                    .map(|(l, &v)| label_index(net.domain(v), net.name(v), l))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        nary.push(NaryConstraint {
            scope,
            relation: NaryRelation::new(sizes, tuples)?,
        });
    }
    Ok(NetworkDoc {
        description: file.description,
        network: net,
        trees,
        majority,
        nary,
    })
}

pub fn serialize_network(doc: &NetworkDoc) -> String {
    let net = &doc.network;
    let mut domains = BTreeMap::new();
    let mut domain_names = BTreeMap::new();
    let mut active = BTreeMap::new();
    for v in 0..net.len() {
        let name = net.name(v).to_string();
        let dom = net.domain(v);
        domains.insert(name.clone(), dom.labels().to_vec());
        if dom.name() != name {
            domain_names.insert(name.clone(), dom.name().to_string());
        }
        if !net.active(v).is_full() {
            active.insert(name, net.active(v).iter().map(|x| dom.label(x).to_string()).collect());
        }
    }
    let constraints = net
        .scopes()
        .into_iter()
        .map(|(i, j)| ConstraintEntry {
            scope: [net.name(i).to_string(), net.name(j).to_string()],
            tuples: net
                .constraint(i, j)
                .unwrap()
                .tuples()
                .map(|(a, b)| [net.domain(i).label(a).to_string(), net.domain(j).label(b).to_string()])
                .collect(),
        })
        .collect();
    let trees = doc.trees.as_ref().map(|ts| {
        ts.iter()
            .enumerate()
            .filter_map(|(v, t)| {
                let t = t.as_ref()?;
                let dom = net.domain(v);
                let edges = t
                    .edges()
                    .into_iter()
                    .map(|(a, b)| [dom.label(a).to_string(), dom.label(b).to_string()])
                    .collect();
                Some((net.name(v).to_string(), edges))
            })
            .collect()
    });
    let majority = doc.majority.as_ref().map(|ops| {
        let uniform = !ops.is_empty()
            && ops.iter().all(|op| *op == ops[0])
            && (0..net.len()).all(|v| net.domain(v).same_values(net.domain(0)));
        let mut map = BTreeMap::new();
        if uniform {
            map.insert("*".to_string(), render_table(net.domain(0), &ops[0]));
        } else {
            for (v, op) in ops.iter().enumerate() {
                map.insert(net.name(v).to_string(), render_table(net.domain(v), op));
            }
        }
        map
    });
    let nary_constraints = doc
        .nary
        .iter()
        .map(|c| NaryEntry {
            scope: c.scope.iter().map(|&v| net.name(v).to_string()).collect(),
            tuples: c
                .relation
                .tuples()
                .iter()
                .map(|t| {
                    t.iter()
                        .zip(&c.scope)
                        .map(|(&x, &v)| net.domain(v).label(x).to_string())
                        .collect()
                })
                .collect(),
        })
        .collect();
    let file = NetworkFile {
        description: doc.description.clone(),
        variables: net.names().to_vec(),
        domains,
        domain_names: (!domain_names.is_empty()).then_some(domain_names),
        active: (!active.is_empty()).then_some(active),
        constraints,
        trees,
        majority,
        nary_constraints,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LanguageFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    domains: BTreeMap<String, Vec<String>>,
    relations: Vec<RelationEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    majority: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationEntry {
    name: String,
    source: String,
    target: String,
    tuples: Vec<[String; 2]>,
}

/// A parsed language document. Domains are indexed in name order.
#[derive(Clone, Debug, PartialEq)]
pub struct LanguageDoc {
    pub description: Option<String>,
    pub language: Language,
    /// Majority operation per domain, when given.
    pub majority: Option<Vec<Option<MajorityOp>>>,
}

pub fn parse_language(text: &str) -> Result<LanguageDoc> {
    let file: LanguageFile = serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
    let mut lang = Language::new();
    for (name, labels) in &file.domains {
        lang.add_domain(Domain::new(name.clone(), labels.iter().cloned())?);
    }
    let dom = |name: &str| {
        lang.domain_index(name)
            .ok_or_else(|| fmt_err(format!("unknown domain `{name}`")))
    };
    let mut rels = Vec::new();
    for r in &file.relations {
        let (s, t) = (dom(&r.source)?, dom(&r.target)?);
        let mut rel = Relation::empty(lang.domain(s).size(), lang.domain(t).size());
        for [a, b] in &r.tuples {
            rel.insert(
                label_index(lang.domain(s), &r.name, a)?,
                label_index(lang.domain(t), &r.name, b)?,
            );
        }
        rels.push((r.name.clone(), s, t, rel));
    }
    let majority = match &file.majority {
        None => None,
        Some(map) => {
            let mut out = vec![None; lang.domains().len()];
            for (name, table) in map {
                let d = dom(name)?;
                out[d] = Some(parse_table(lang.domain(d), name, table)?);
            }
            Some(out)
        }
    };
    for (name, s, t, rel) in rels {
        lang.add_relation(name, s, t, rel)?;
    }
    Ok(LanguageDoc {
        description: file.description,
        language: lang,
        majority,
    })
}

pub fn serialize_language(doc: &LanguageDoc) -> String {
    let lang = &doc.language;
    let domains = lang
        .domains()
        .iter()
        .map(|d| (d.name().to_string(), d.labels().to_vec()))
        .collect();
    let relations = lang
        .relations()
        .iter()
        .map(|r| RelationEntry {
            name: r.name.clone(),
            source: lang.domain(r.source).name().to_string(),
            target: lang.domain(r.target).name().to_string(),
            tuples: r
                .relation
                .tuples()
                .map(|(a, b)| {
                    [
                        lang.domain(r.source).label(a).to_string(),
                        lang.domain(r.target).label(b).to_string(),
                    ]
                })
                .collect(),
        })
        .collect();
    let majority = doc.majority.as_ref().map(|ops| {
        ops.iter()
            .enumerate()
            .filter_map(|(d, op)| {
                let op = op.as_ref()?;
                Some((lang.domain(d).name().to_string(), render_table(lang.domain(d), op)))
            })
            .collect()
    });
    let file = LanguageFile {
        description: doc.description.clone(),
        domains,
        relations,
        majority,
    };
    let mut text = serde_json::to_string_pretty(&file).expect("plain data serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "variables": ["x", "y"],
        "domains": {"x": ["a", "b"], "y": ["c", "d"]},
        "constraints": [{"scope": ["y", "x"], "tuples": [["c", "b"]]}]
    }"#;

    #[test]
    fn parses_reversed_scope() {
        let doc = parse_network(SMALL).unwrap();
        let n = &doc.network;
        let r = n.constraint(0, 1).unwrap();
        assert_eq!(r.tuples().collect::<Vec<_>>(), vec![(1, 0)]);
    }

    #[test]
    fn round_trip() {
        let doc = parse_network(SMALL).unwrap();
        let again = parse_network(&serialize_network(&doc)).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn unknown_label_rejected() {
        let bad = SMALL.replace(r#"["c", "b"]"#, r#"["c", "z"]"#);
        assert!(matches!(parse_network(&bad), Err(Error::UnknownValue { .. })));
    }

    #[test]
    fn unknown_field_rejected() {
        let bad = SMALL.replace("\"constraints\"", "\"constraint\"");
        assert!(parse_network(&bad).is_err());
    }

    #[test]
    fn missing_majority_cover_rejected() {
        let bad = SMALL.replace(
            "\"constraints\"",
            "\"majority\": {\"x\": [\"a\",\"a\",\"a\",\"b\",\"a\",\"b\",\"b\",\"b\"]}, \"constraints\"",
        );
        assert!(parse_network(&bad).is_err());
    }
}
