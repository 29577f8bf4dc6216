//! Interprocedural control-flow graphs with kill/gen edge annotations, their
//! encoding as pushdown systems, and per-node analysis tables.
//!
//! The encoding uses one control location `p`; program points are stack
//! symbols, and a call pushes the callee's entry on top of the return point.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{killgen_algebra, parse_brace_set, FlowAlgebra, KillGen, KillGenAlgebra};
use crate::automaton::{Direction, PAutomaton};
use crate::pds::{PushdownSystem, Rule, StateId, Symbol};
use crate::solver::Solution;
use crate::text::FormatError;

/// The single control location of encoded programs.
pub const LOCATION: &str = "p";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub entry: String,
    pub exit: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Edge {
    Intra {
        proc: String,
        src: String,
        dst: String,
        kill: BTreeSet<String>,
        gen: BTreeSet<String>,
    },
    Call {
        proc: String,
        src: String,
        callee: String,
        ret: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Icfg {
    pub domain: Vec<String>,
    pub procedures: Vec<Procedure>,
    /// Each edge is tagged with the procedure it belongs to.
    pub edges: Vec<Edge>,
    pub main: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("invalid ICFG: {}", .0.join("; "))]
    Validation(Vec<String>),
}

fn split_kill_gen(line: usize, text: &str) -> Result<(BTreeSet<String>, BTreeSet<String>), FormatError> {
    let bad = || FormatError::at(line, "expected `kill={...} gen={...}`");
    let rest = text.trim().strip_prefix("kill=").ok_or_else(bad)?;
    let close = rest.find('}').ok_or_else(bad)?;
    let (kill, rest) = rest.split_at(close + 1);
    let gen = rest.trim().strip_prefix("gen=").ok_or_else(bad)?;
    let set = |s: &str| -> Result<BTreeSet<String>, FormatError> {
        Ok(parse_brace_set(s).ok_or_else(bad)?.into_iter().map(str::to_string).collect())
    };
    Ok((set(kill)?, set(gen)?))
}

/// Reads the ICFG text format. Structural checks are left to
/// [`Icfg::validate`].
pub fn parse_icfg(text: &str) -> Result<Icfg, FormatError> {
    let mut g = Icfg::default();
    let mut domain_seen = false;
    let mut main_seen = false;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let current = || {
            g.procedures
                .last()
                .map(|p| p.name.clone())
                .ok_or_else(|| FormatError::at(n, "edge outside of any `proc` block"))
        };
        match words[0] {
            "domain" => {
                if domain_seen {
                    return Err(FormatError::at(n, "duplicate `domain` line"));
                }
                let set = parse_brace_set(line["domain".len()..].trim())
                    .ok_or_else(|| FormatError::at(n, "expected `domain {...}`"))?;
                g.domain = set.into_iter().map(str::to_string).collect();
                domain_seen = true;
            }
            "proc" => {
                let ["proc", name, "entry", entry, "exit", exit] = words.as_slice() else {
                    return Err(FormatError::at(n, "expected `proc <name> entry <node> exit <node>`"));
                };
                g.procedures.push(Procedure {
                    name: name.to_string(),
                    entry: entry.to_string(),
                    exit: exit.to_string(),
                });
            }
            "edge" => {
                let [_, src, "->", dst, ..] = words.as_slice() else {
                    return Err(FormatError::at(n, "expected `edge <src> -> <dst> kill={...} gen={...}`"));
                };
                let rest = line.splitn(5, char::is_whitespace).nth(4).unwrap_or("");
                let (kill, gen) = split_kill_gen(n, rest)?;
                g.edges.push(Edge::Intra {
                    proc: current()?,
                    src: src.to_string(),
                    dst: dst.to_string(),
                    kill,
                    gen,
                });
            }
            "call" => {
                let ["call", src, "->", callee, "return", ret] = words.as_slice() else {
                    return Err(FormatError::at(n, "expected `call <src> -> <proc> return <node>`"));
                };
                g.edges.push(Edge::Call {
                    proc: current()?,
                    src: src.to_string(),
                    callee: callee.to_string(),
                    ret: ret.to_string(),
                });
            }
            "main" => {
                let ["main", name] = words.as_slice() else {
                    return Err(FormatError::at(n, "expected `main <proc>`"));
                };
                if main_seen {
                    return Err(FormatError::at(n, "duplicate `main` line"));
                }
                g.main = name.to_string();
                main_seen = true;
            }
            other => return Err(FormatError::at(n, format!("unknown directive `{other}`"))),
        }
    }
    if !domain_seen {
        return Err(FormatError::whole("missing `domain` line"));
    }
    if !main_seen {
        return Err(FormatError::whole("missing `main` line"));
    }
    Ok(g)
}

impl Icfg {
    /// Nodes per procedure: entry, exit and every edge endpoint in its block.
    pub fn nodes_by_procedure(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut nodes: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for p in &self.procedures {
            nodes.entry(&p.name).or_default().extend([p.entry.as_str(), p.exit.as_str()]);
        }
        for e in &self.edges {
            let (proc, ends) = match e {
                Edge::Intra { proc, src, dst, .. } => (proc, [src, dst]),
                Edge::Call { proc, src, ret, .. } => (proc, [src, ret]),
            };
            nodes.entry(proc).or_default().extend(ends.map(String::as_str));
        }
        nodes
    }

    /// Every node, sorted.
    pub fn nodes(&self) -> BTreeSet<&str> {
        self.nodes_by_procedure().into_values().flatten().collect()
    }

    /// Collects every violated structural invariant.
    pub fn validate(&self) -> Result<(), EncodeError> {
        let mut problems = Vec::new();
        let mut names = BTreeSet::new();
        for p in &self.procedures {
            if !names.insert(p.name.as_str()) {
                problems.push(format!("procedure {} is declared twice", p.name));
            }
        }
        if !names.contains(self.main.as_str()) {
            problems.push(format!("main procedure {} is not declared", self.main));
        }
        let mut facts = BTreeSet::new();
        for f in &self.domain {
            if !facts.insert(f.as_str()) {
                problems.push(format!("fact {f} appears twice in the domain"));
            }
        }
        let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
        for (proc, nodes) in self.nodes_by_procedure() {
            for node in nodes {
                if node.contains(':') {
                    problems.push(format!("node name {node} contains `:`"));
                }
                if let Some(other) = owner.insert(node, proc) {
                    problems.push(format!("node {node} belongs to both {other} and {proc}"));
                }
            }
        }
        for e in &self.edges {
            match e {
                Edge::Intra { src, dst, kill, gen, .. } => {
                    for f in kill.iter().chain(gen) {
                        if !facts.contains(f.as_str()) {
                            problems.push(format!("edge {src} -> {dst} mentions fact {f} outside the domain"));
                        }
                    }
                }
                Edge::Call { src, callee, .. } => {
                    if !names.contains(callee.as_str()) {
                        problems.push(format!("call at {src} targets unknown procedure {callee}"));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(EncodeError::Validation(problems))
        }
    }

    pub fn algebra(&self) -> Result<KillGenAlgebra, EncodeError> {
        killgen_algebra(&self.domain).map_err(|e| EncodeError::Validation(vec![e.to_string()]))
    }
}

/// Edges become swap rules with their kill/gen weight, calls become push
/// rules `⟨p,n⟩ ↪ ⟨p, entry r⟩` and exits become pop rules, both at `1̄`.
pub fn encode_icfg(g: &Icfg) -> Result<(KillGenAlgebra, PushdownSystem<KillGen>), EncodeError> {
    g.validate()?;
    let alg = g.algebra()?;
    let set = |s: &BTreeSet<String>| alg.set_of(s.iter().map(String::as_str));
    let entry: BTreeMap<&str, &str> = g.procedures.iter().map(|p| (p.name.as_str(), p.entry.as_str())).collect();
    let mut rules = Vec::new();
    for e in &g.edges {
        match e {
            Edge::Intra { src, dst, kill, gen, .. } => {
                let kill = set(kill).map_err(|e| EncodeError::Validation(vec![e.to_string()]))?;
                let gen = set(gen).map_err(|e| EncodeError::Validation(vec![e.to_string()]))?;
                rules.push(Rule::new(LOCATION, src, LOCATION, &[dst], KillGen::new(kill, gen)));
            }
            Edge::Call { src, callee, ret, .. } => {
                rules.push(Rule::new(LOCATION, src, LOCATION, &[entry[callee.as_str()], ret], alg.one()));
            }
        }
    }
    for p in &g.procedures {
        rules.push(Rule::new(LOCATION, &p.exit, LOCATION, &[], alg.one()));
    }
    let pds = PushdownSystem::new(&alg, rules)
        .map_err(|e| EncodeError::Validation(vec![e.to_string()]))?
        .with_locations([StateId::new(LOCATION)])
        .with_symbols(g.nodes().into_iter().map(Symbol::new));
    Ok((alg, pds))
}

/// Join of the readouts of all accepted stacks below each state: for a state
/// `q`, the join over runs from `q` to a final state, multiplied in readout
/// order. `None` marks states with no such run.
fn suffix_weights<A: FlowAlgebra>(alg: &A, aut: &PAutomaton, sol: &Solution<A::Elem>) -> BTreeMap<StateId, A::Elem> {
    let mut acc: BTreeMap<StateId, A::Elem> = aut.finals().iter().map(|q| (q.clone(), alg.one())).collect();
    loop {
        let mut changed = false;
        for t in aut.transitions() {
            if t.is_epsilon() {
                continue;
            }
            let (Some(below), Some(w)) = (acc.get(&t.dst), sol.get(t)) else { continue };
            let through = match aut.direction() {
                Direction::Pre => alg.extend(w, below),
                Direction::Post => alg.extend(below, w),
            };
            let next = match acc.get(&t.src) {
                Some(old) => alg.combine(old, &through),
                None => through,
            };
            if acc.get(&t.src) != Some(&next) {
                acc.insert(t.src.clone(), next);
                changed = true;
            }
        }
        if !changed {
            return acc;
        }
    }
}

/// For each node, the join of the query weights of all accepted
/// configurations with that node on top of the stack. `None` when no such
/// configuration is accepted. Exact for distributive algebras.
pub fn analysis_report<A: FlowAlgebra>(
    alg: &A,
    g: &Icfg,
    aut: &PAutomaton,
    sol: &Solution<A::Elem>,
) -> Vec<(String, Option<A::Elem>)> {
    let below = suffix_weights(alg, aut, sol);
    let mut per_node: BTreeMap<&str, Option<A::Elem>> = g.nodes().into_iter().map(|n| (n, None)).collect();
    let mut add = |node: &str, w: A::Elem| {
        if let Some(slot) = per_node.get_mut(node) {
            *slot = Some(match slot.take() {
                Some(old) => alg.combine(&old, &w),
                None => w,
            });
        }
    };
    for p in aut.initials() {
        let mut starts = vec![(p.clone(), None)];
        if aut.direction() == Direction::Post {
            for e in aut.successors(p, None) {
                if let Some(w) = sol.get(e) {
                    starts.push((e.dst.clone(), Some(w.clone())));
                }
            }
        }
        for (q, eps) in starts {
            for t in aut.outgoing(&q) {
                let Some(label) = &t.label else { continue };
                let (Some(rest), Some(w)) = (below.get(&t.dst), sol.get(t)) else { continue };
                let run = match aut.direction() {
                    Direction::Pre => alg.extend(w, rest),
                    Direction::Post => alg.extend(rest, w),
                };
                let run = match &eps {
                    Some(e) => alg.extend(&run, e),
                    None => run,
                };
                add(label.as_str(), run);
            }
        }
    }
    per_node.into_iter().map(|(n, w)| (n.to_string(), w)).collect()
}

/// One `<node> <weight>` line per node, `unreachable` when absent.
pub fn render_report<A: FlowAlgebra>(alg: &A, report: &[(String, Option<A::Elem>)]) -> String {
    let width = report.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
    report
        .iter()
        .map(|(n, w)| {
            let value = w.as_ref().map_or("unreachable".to_string(), |w| alg.render(w));
            format!("{n:<width$} {value}\n")
        })
        .collect()
}
