//! Command implementations behind the `dpcstar` binary.
//!
//! Every command returns a [`Report`]: the text to print and the process
//! exit status. Exit codes: 0 consistent / processed / property holds,
//! 1 inconsistent / property fails, 2 usage or parse error, 3 extraction
//! failure.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use dpcstar::consistency::{enforce_strong_pc_with_stats, Propagation};
use dpcstar::format::{parse_language, parse_network, serialize_network, LanguageDoc, NetworkDoc};
use dpcstar::generators::{gen_majority_closed_network, gen_tree_preserving_network, GenParams};
use dpcstar::graph::{find_peo, is_peo, mcs_order, ConstraintGraph};
use dpcstar::majority::{is_2_decomposable, is_language_closed, is_network_closed, is_tree_preserving};
use dpcstar::{oracle, Helly, Network, VarOrder, Verdict};
use rayon::prelude::*;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EXTRACTION: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] dpcstar::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub text: String,
}

impl Report {
    fn new(code: i32, text: String) -> Self {
        Report { code, text }
    }
}

pub fn read_file(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algo {
    Dpc,
    DpcStar,
    /// Naive strong path-consistency enforcement, the reference baseline.
    Pc,
    Oracle,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Dpc => "dpc",
            Algo::DpcStar => "dpcstar",
            Algo::Pc => "pc",
            Algo::Oracle => "oracle",
        }
    }
}

impl FromStr for Algo {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "dpc" => Ok(Algo::Dpc),
            "dpcstar" => Ok(Algo::DpcStar),
            "pc" => Ok(Algo::Pc),
            "oracle" => Ok(Algo::Oracle),
            _ => Err(usage(format!("unknown algorithm `{s}` (expected dpc, dpcstar, pc or oracle)"))),
        }
    }
}

/// How the processing order is chosen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderSpec {
    /// Explicit elimination order: the first name is eliminated first.
    Elimination(Vec<String>),
    /// Eliminate along the reverse of a maximum cardinality search.
    ReverseMcs,
    /// Process in declaration order, so the last variable goes first.
    Declaration,
}

impl FromStr for OrderSpec {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "reverse-mcs" => Ok(OrderSpec::ReverseMcs),
            "declaration" => Ok(OrderSpec::Declaration),
            list => {
                let names: Vec<String> = list.split(',').map(|v| v.trim().to_string()).collect();
                if names.iter().any(String::is_empty) {
                    return Err(usage(format!("malformed order `{list}`")));
                }
                Ok(OrderSpec::Elimination(names))
            }
        }
    }
}

impl OrderSpec {
    /// The processing order handed to the algorithms.
    pub fn resolve(&self, net: &Network) -> CliResult<VarOrder> {
        Ok(match self {
            OrderSpec::ReverseMcs => mcs_order(&ConstraintGraph::of_network(net)),
            OrderSpec::Declaration => VarOrder::identity(net.len()),
            OrderSpec::Elimination(names) => VarOrder::from_names(net, names)?.reversed(),
        })
    }
}

fn render_order(net: &Network, order: &VarOrder) -> String {
    let names: Vec<&str> = order.as_slice().iter().rev().map(|&v| net.name(v)).collect();
    names.join(",")
}

fn render_edges(net: &Network, edges: &[(usize, usize)]) -> String {
    let parts: Vec<String> = edges.iter().map(|&(i, j)| format!("{}-{}", net.name(i), net.name(j))).collect();
    parts.join(" ")
}

/// `solve`: run one algorithm on a network document.
pub fn cmd_solve(doc: &NetworkDoc, algo: Algo, order: &OrderSpec, extract: bool) -> CliResult<Report> {
    if extract && algo != Algo::DpcStar {
        return Err(usage("--extract is only available with --algo dpcstar"));
    }
    let net = &doc.network;
    let mut out = String::new();
    match algo {
        Algo::Dpc | Algo::DpcStar => {
            let order = order.resolve(net)?;
            let outcome = if algo == Algo::Dpc {
                dpcstar::dpc(net, &order)?
            } else {
                dpcstar::dpc_star(net, &order)?
            };
            let _ = writeln!(out, "elimination order: {}", render_order(net, &order));
            let _ = writeln!(out, "revisions: {}", outcome.revisions);
            if !outcome.fill_edges.is_empty() {
                let _ = writeln!(out, "fill edges: {}", render_edges(net, &outcome.fill_edges));
            }
            if outcome.verdict == Verdict::Inconsistent {
                out.push_str("Inconsistent\n");
                return Ok(Report::new(EXIT_NEGATIVE, out));
            }
            out.push_str("Processed\n");
            if extract {
                match dpcstar::extract_solution(&outcome.network, &order)? {
                    Ok(sol) if net.is_solution(&sol)? => {
                        let _ = writeln!(out, "solution: {}", net.format_assignment(&sol));
                    }
                    Ok(_) => {
                        out.push_str("extraction produced a non-solution\n");
                        return Ok(Report::new(EXIT_EXTRACTION, out));
                    }
                    Err(fail) => {
                        let _ = writeln!(
                            out,
                            "extraction failed: {fail}; the network is probably not majority-closed"
                        );
                        return Ok(Report::new(EXIT_EXTRACTION, out));
                    }
                }
            }
            Ok(Report::new(EXIT_OK, out))
        }
        Algo::Pc => {
            let mut work = net.clone();
            let (prop, stats) = enforce_strong_pc_with_stats(&mut work);
            let _ = writeln!(out, "passes: {}", stats.passes);
            let _ = writeln!(out, "revisions: {}", stats.revisions);
            match prop {
                Propagation::Ok => {
                    out.push_str("Path-consistent\n");
                    Ok(Report::new(EXIT_OK, out))
                }
                Propagation::Inconsistent => {
                    out.push_str("Inconsistent\n");
                    Ok(Report::new(EXIT_NEGATIVE, out))
                }
            }
        }
        Algo::Oracle => {
            let sols = oracle::enumerate_solutions(net, 1)?;
            match sols.first() {
                Some(sol) => {
                    out.push_str("Consistent\n");
                    let _ = writeln!(out, "solution: {}", net.format_assignment(sol));
                    Ok(Report::new(EXIT_OK, out))
                }
                None => {
                    out.push_str("Inconsistent\n");
                    Ok(Report::new(EXIT_NEGATIVE, out))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Property {
    Chordal,
    Peo,
    Helly,
    MajorityClosed,
    TreePreserving,
    TwoDecomposable,
    StronglyDpc,
}

impl FromStr for Property {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "chordal" => Ok(Property::Chordal),
            "peo" => Ok(Property::Peo),
            "helly" => Ok(Property::Helly),
            "majority-closed" => Ok(Property::MajorityClosed),
            "tree-preserving" => Ok(Property::TreePreserving),
            "2decomposable" => Ok(Property::TwoDecomposable),
            "strongly-dpc" => Ok(Property::StronglyDpc),
            _ => Err(usage(format!("unknown property `{s}`"))),
        }
    }
}

fn verdict(holds: bool, name: &str, mut text: String) -> Report {
    let _ = writeln!(text, "{name}: {holds}");
    Report::new(if holds { EXIT_OK } else { EXIT_NEGATIVE }, text)
}

fn helly_report(doc: &LanguageDoc) -> Report {
    let lang = &doc.language;
    match dpcstar::check_helly(lang) {
        Helly::Holds => Report::new(EXIT_OK, "Holds\n".into()),
        Helly::Witness(w) => {
            let mut text = String::from("Witness\n");
            let _ = writeln!(text, "domain: {}", lang.domain(w.domain).name());
            for m in &w.members {
                let r = &lang.relations()[m.relation];
                let (src, suffix) = if m.inverse { (r.target, "^-1") } else { (r.source, "") };
                let _ = writeln!(
                    text,
                    "  {}{}({})",
                    r.name,
                    suffix,
                    lang.domain(src).label(m.value)
                );
            }
            Report::new(EXIT_NEGATIVE, text)
        }
    }
}

/// `check`: evaluate a structural property of a network or language file.
pub fn cmd_check(text: &str, property: Property, order: Option<&OrderSpec>) -> CliResult<Report> {
    if property == Property::Helly {
        return Ok(helly_report(&parse_language(text)?));
    }
    if property == Property::MajorityClosed {
        if let Ok(doc) = parse_language(text) {
            let ops = doc
                .majority
                .ok_or_else(|| usage("the language declares no majority operations"))?
                .into_iter()
                .enumerate()
                .map(|(k, op)| {
                    op.ok_or_else(|| usage(format!("no majority table for domain `{}`", doc.language.domain(k).name())))
                })
                .collect::<CliResult<Vec<_>>>()?;
            let holds = is_language_closed(&doc.language, &ops)?;
            return Ok(verdict(holds, "majority-closed", String::new()));
        }
    }
    let doc = parse_network(text)?;
    let net = &doc.network;
    let graph = ConstraintGraph::of_network(net);
    match property {
        Property::Chordal => {
            let peo = find_peo(&graph);
            let mut text = String::new();
            if let Some(p) = &peo {
                let _ = writeln!(text, "peo: {}", render_order(net, &p.reversed()));
            }
            Ok(verdict(peo.is_some(), "chordal", text))
        }
        Property::Peo => match order {
            Some(OrderSpec::Elimination(names)) => {
                let elim = VarOrder::from_names(net, names)?;
                Ok(verdict(is_peo(&graph, &elim)?, "peo", String::new()))
            }
            _ => Err(usage("--property peo needs --order with an explicit elimination order")),
        },
        Property::MajorityClosed => {
            let ops = doc
                .majority
                .as_ref()
                .ok_or_else(|| usage("the network declares no majority operations"))?;
            Ok(verdict(is_network_closed(net, ops)?, "majority-closed", String::new()))
        }
        Property::TreePreserving => {
            let trees = doc.trees.as_ref().ok_or_else(|| usage("the network declares no trees"))?;
            let mut text = String::new();
            let mut holds = true;
            for (i, j) in net.scopes() {
                let (Some(ti), Some(tj)) = (&trees[i], &trees[j]) else {
                    return Err(usage(format!(
                        "constraint {}-{} needs trees on both variables",
                        net.name(i),
                        net.name(j)
                    )));
                };
                let r = net.constraint(i, j).unwrap();
                if !is_tree_preserving(r, ti, tj)? || !is_tree_preserving(&r.inverse(), tj, ti)? {
                    let _ = writeln!(text, "violated by {}-{}", net.name(i), net.name(j));
                    holds = false;
                }
            }
            Ok(verdict(holds, "tree-preserving", text))
        }
        Property::TwoDecomposable => {
            if doc.nary.is_empty() {
                return Err(usage("the network declares no nary_constraints"));
            }
            let mut text = String::new();
            let mut holds = true;
            for c in &doc.nary {
                let ok = is_2_decomposable(&c.relation)?;
                let scope: Vec<&str> = c.scope.iter().map(|&v| net.name(v)).collect();
                let _ = writeln!(text, "{}: {ok}", scope.join(","));
                holds &= ok;
            }
            Ok(verdict(holds, "2decomposable", text))
        }
        Property::StronglyDpc => {
            let order = order.cloned().unwrap_or(OrderSpec::ReverseMcs).resolve(net)?;
            let text = format!("elimination order: {}\n", render_order(net, &order));
            Ok(verdict(dpcstar::is_strongly_dpc(net, &order)?, "strongly-dpc", text))
        }
        Property::Helly => unreachable!("handled above"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Majority,
    TreePreserving,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Majority => "majority",
            Family::TreePreserving => "tree-preserving",
        }
    }
}

impl FromStr for Family {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "majority" | "majority-closed" => Ok(Family::Majority),
            "tree-preserving" | "tree" => Ok(Family::TreePreserving),
            _ => Err(usage(format!("unknown family `{s}` (expected majority or tree-preserving)"))),
        }
    }
}

/// A generated instance as a document, with the operation or trees attached.
pub fn generate(family: Family, p: &GenParams) -> CliResult<NetworkDoc> {
    let header = format!(
        "{} instance n={} d={} rho={} l={} seed={}",
        family.name(),
        p.n,
        p.d,
        p.rho,
        p.l,
        p.seed
    );
    Ok(match family {
        Family::Majority => {
            let inst = gen_majority_closed_network(p)?;
            let mut doc = NetworkDoc::new(inst.network.clone());
            doc.majority = Some(inst.ops());
            doc.description = Some(format!("{header}; achieved looseness {:.4}", inst.looseness));
            doc
        }
        Family::TreePreserving => {
            let inst = gen_tree_preserving_network(p)?;
            let mut doc = NetworkDoc::new(inst.network);
            doc.trees = Some(inst.trees.into_iter().map(Some).collect());
            doc.description = Some(format!("{header}; achieved looseness {:.4}", inst.looseness));
            doc
        }
    })
}

/// `gen`: serialized instance text.
pub fn cmd_gen(family: Family, p: &GenParams) -> CliResult<String> {
    p.validate()?;
    Ok(serialize_network(&generate(family, p)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    N,
    D,
    Rho,
    L,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::D => "d",
            SweepParam::Rho => "rho",
            SweepParam::L => "l",
        }
    }
}

/// One swept parameter and its values, parsed from `name=v1,v2,...` or
/// `name=start:end:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Self> {
        let (name, list) = s
            .split_once('=')
            .ok_or_else(|| usage(format!("sweep `{s}` should look like n=20,40 or n=20:120:20")))?;
        let param = match name.trim() {
            "n" => SweepParam::N,
            "d" => SweepParam::D,
            "rho" => SweepParam::Rho,
            "l" => SweepParam::L,
            other => return Err(usage(format!("cannot sweep `{other}`"))),
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| usage(format!("bad sweep value `{t}`")))
        };
        let values = match list.split(':').collect::<Vec<_>>()[..] {
            [start, end, step] => {
                let (start, end, step) = (num(start)?, num(end)?, num(step)?);
                if step <= 0.0 || end < start {
                    return Err(usage(format!("empty sweep range `{list}`")));
                }
                let count = ((end - start) / step + 1e-9).floor() as usize + 1;
                (0..count).map(|k| start + k as f64 * step).collect()
            }
            [_] => list.split(',').map(num).collect::<CliResult<Vec<_>>>()?,
            _ => return Err(usage(format!("malformed sweep `{list}`"))),
        };
        if values.is_empty() {
            return Err(usage("sweep has no values"));
        }
        Ok(Sweep { param, values })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    pub l: f64,
    pub sweep: Option<Sweep>,
    pub reps: usize,
    pub seed: u64,
    pub algos: Vec<Algo>,
    /// Worker threads; points and repetitions are spread across them.
    pub jobs: usize,
    /// When false, `time_ms` is written as `-` so reruns compare equal.
    pub timing: bool,
}

impl BenchSpec {
    /// Generator parameters of every sweep point, in sweep order.
    pub fn points(&self) -> CliResult<Vec<GenParams>> {
        let base = GenParams {
            n: self.n,
            d: self.d,
            rho: self.rho,
            l: self.l,
            seed: self.seed,
        };
        let Some(sweep) = &self.sweep else {
            base.validate()?;
            return Ok(vec![base]);
        };
        let mut out = Vec::with_capacity(sweep.values.len());
        for &v in &sweep.values {
            let mut p = base;
            let as_count = |v: f64| {
                if v < 1.0 || v.fract() != 0.0 {
                    Err(usage(format!("{} must be a positive integer, got {v}", sweep.param.name())))
                } else {
                    Ok(v as usize)
                }
            };
            match sweep.param {
                SweepParam::N => p.n = as_count(v)?,
                SweepParam::D => p.d = as_count(v)?,
                SweepParam::Rho => p.rho = v,
                SweepParam::L => p.l = v,
            }
            p.validate()?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Seed of repetition `rep` at sweep point `point`.
pub fn instance_seed(base: u64, point: usize, rep: usize) -> u64 {
    base.wrapping_add((point as u64) * 1_000_003).wrapping_add(rep as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub algo: Algo,
    pub params: GenParams,
    pub rep: usize,
    pub result: String,
    pub time_ms: f64,
    pub revisions: Option<u64>,
}

fn run_algo(algo: Algo, net: &Network, order: &VarOrder) -> CliResult<(String, f64, Option<u64>)> {
    let start = Instant::now();
    let (result, revisions) = match algo {
        Algo::Dpc | Algo::DpcStar => {
            let out = if algo == Algo::Dpc {
                dpcstar::dpc(net, order)?
            } else {
                dpcstar::dpc_star(net, order)?
            };
            let r = match out.verdict {
                Verdict::Processed => "processed",
                Verdict::Inconsistent => "inconsistent",
            };
            (r, Some(out.revisions))
        }
        Algo::Pc => {
            let mut work = net.clone();
            let (prop, stats) = enforce_strong_pc_with_stats(&mut work);
            let r = match prop {
                Propagation::Ok => "ok",
                Propagation::Inconsistent => "inconsistent",
            };
            (r, Some(stats.revisions))
        }
        Algo::Oracle => {
            let r = if oracle::is_consistent(net)? { "consistent" } else { "inconsistent" };
            (r, None)
        }
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((result.to_string(), ms, revisions))
}

/// Runs every (point, repetition) task, possibly in parallel, and returns
/// the rows in sweep order: points, then repetitions, then algorithms.
pub fn run_bench(plan: &BenchSpec) -> CliResult<Vec<BenchRow>> {
    if plan.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    if plan.algos.is_empty() {
        return Err(usage("no algorithms selected"));
    }
    let points = plan.points()?;
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..plan.reps).map(move |r| (p, r)))
        .collect();
    let task = |&(p, rep): &(usize, usize)| -> CliResult<Vec<BenchRow>> {
        let params = GenParams {
            seed: instance_seed(plan.seed, p, rep),
            ..points[p]
        };
        let doc = generate(plan.family, &params)?;
        let net = &doc.network;
        let order = OrderSpec::ReverseMcs.resolve(net)?;
        plan.algos
            .iter()
            .map(|&algo| {
                let (result, time_ms, revisions) = run_algo(algo, net, &order)?;
                Ok(BenchRow {
                    algo,
                    params,
                    rep,
                    result,
                    time_ms,
                    revisions,
                })
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.jobs.max(1))
        .build()
        .map_err(|e| usage(e.to_string()))?;
    let chunks: Vec<CliResult<Vec<BenchRow>>> = pool.install(|| tasks.par_iter().map(task).collect());
    let mut rows = Vec::new();
    for c in chunks {
        rows.extend(c?);
    }
    Ok(rows)
}

/// Mean `time_ms` per (algorithm, point), in first-appearance order.
pub fn mean_times(rows: &[BenchRow]) -> Vec<(Algo, GenParams, f64)> {
    let mut out: Vec<(Algo, GenParams, f64, usize)> = Vec::new();
    for r in rows {
        let key = GenParams { seed: 0, ..r.params };
        match out.iter_mut().find(|(a, p, _, _)| *a == r.algo && *p == key) {
            Some(e) => {
                e.2 += r.time_ms;
                e.3 += 1;
            }
            None => out.push((r.algo, key, r.time_ms, 1)),
        }
    }
    out.into_iter().map(|(a, p, t, c)| (a, p, t / c as f64)).collect()
}

pub const CSV_HEADER: &str = "algo,family,n,d,rho,l,seed,rep,result,time_ms,revisions";

/// CSV with a header, one row per run and, after each point, one `mean`
/// row per algorithm whose result column counts non-inconsistent runs.
pub fn render_csv(plan: &BenchSpec, rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let time = |t: f64| if plan.timing { format!("{t:.3}") } else { "-".to_string() };
    let per_point = plan.reps * plan.algos.len();
    for block in rows.chunks(per_point) {
        for r in block {
            let p = &r.params;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.algo.name(),
                plan.family.name(),
                p.n,
                p.d,
                p.rho,
                p.l,
                p.seed,
                r.rep,
                r.result,
                time(r.time_ms),
                r.revisions.map(|v| v.to_string()).unwrap_or_default()
            );
        }
        for &algo in &plan.algos {
            let runs: Vec<&BenchRow> = block.iter().filter(|r| r.algo == algo).collect();
            let p = &runs[0].params;
            let passed = runs.iter().filter(|r| r.result != "inconsistent").count();
            let mean_t = runs.iter().map(|r| r.time_ms).sum::<f64>() / runs.len() as f64;
            let mean_rev = if runs.iter().all(|r| r.revisions.is_some()) {
                let total: u64 = runs.iter().map(|r| r.revisions.unwrap()).sum();
                format!("{:.1}", total as f64 / runs.len() as f64)
            } else {
                String::new()
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},mean,{}/{},{},{}",
                algo.name(),
                plan.family.name(),
                p.n,
                p.d,
                p.rho,
                p.l,
                plan.seed,
                passed,
                runs.len(),
                time(mean_t),
                mean_rev
            );
        }
    }
    out
}

/// `bench`: run the sweep and render it.
pub fn cmd_bench(plan: &BenchSpec) -> CliResult<String> {
    let rows = run_bench(plan)?;
    Ok(render_csv(plan, &rows))
}
