//! Line-based text formats for systems, automata, constraints, solutions
//! and configuration literals.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;

use crate::algebra::{
    boolean_algebra, killgen_algebra, minplus_algebra, parse_lattice_params, tabulated_framework_algebra,
    AlgebraError, BoolAlgebra, FlowAlgebra, KillGen, KillGenAlgebra, MinPlus, MinPlusAlgebra, Table,
    TabulatedAlgebra,
};
use crate::automaton::{Direction, PAutomaton, Transition};
use crate::pds::{Configuration, PushdownSystem, Rule, StateId, Symbol};
use crate::saturation::Constraint;
use crate::solver::Solution;

const ID: &str = r"[A-Za-z0-9_.$]+";

static IDENT: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!("^{ID}$")).unwrap());
static RULE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"^rule\s*<\s*({ID})\s*,\s*({ID})\s*>\s*->\s*<\s*({ID})\s*,\s*([^>]*)>\s*weight\s+(.+)$"
    ))
    .unwrap()
});
static CONFIG: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"^<\s*({ID})\s*:([^>]*)>$")).unwrap());

/// A parse or validation failure, with the 1-based line when it has one.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct FormatError {
    pub line: Option<usize>,
    pub message: String,
}

impl FormatError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        FormatError {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn whole(message: impl Into<String>) -> Self {
        FormatError {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Non-blank lines with comments removed, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn ident(line: usize, what: &str, text: &str) -> Result<(), FormatError> {
    if IDENT.is_match(text) {
        Ok(())
    } else {
        Err(FormatError::at(line, format!("invalid {what} `{text}`")))
    }
}

/// A system together with the algebra named in its header.
#[derive(Debug, Clone)]
pub enum LoadedPds {
    KillGen(KillGenAlgebra, PushdownSystem<KillGen>),
    MinPlus(MinPlusAlgebra, PushdownSystem<MinPlus>),
    Bool(BoolAlgebra, PushdownSystem<bool>),
    Tabulated(TabulatedAlgebra, PushdownSystem<Table>),
}

/// Calls `$body` with `$alg` and `$pds` bound to the concrete pair.
#[macro_export]
macro_rules! with_loaded {
    ($loaded:expr, |$alg:ident, $pds:ident| $body:expr) => {
        match $loaded {
            $crate::text::LoadedPds::KillGen($alg, $pds) => $body,
            $crate::text::LoadedPds::MinPlus($alg, $pds) => $body,
            $crate::text::LoadedPds::Bool($alg, $pds) => $body,
            $crate::text::LoadedPds::Tabulated($alg, $pds) => $body,
        }
    };
}

fn algebra_error(line: usize, e: AlgebraError) -> FormatError {
    FormatError::at(line, e.to_string())
}

/// Reads a system file: an `algebra` header followed by `rule` lines.
pub fn parse_pds(text: &str) -> Result<LoadedPds, FormatError> {
    let mut lines = content_lines(text);
    let Some((n, header)) = lines.next() else {
        return Err(FormatError::whole("missing `algebra` header"));
    };
    let Some(rest) = header.strip_prefix("algebra") else {
        return Err(FormatError::at(n, "expected `algebra <name> [<params>]`"));
    };
    let rest = rest.trim();
    let (name, params) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
    let params = params.trim();
    let no_params = || {
        if params.is_empty() {
            Ok(())
        } else {
            Err(FormatError::at(n, format!("algebra {name} takes no parameters")))
        }
    };
    match name {
        "killgen" => {
            let domain = params
                .strip_prefix("domain=")
                .and_then(crate::algebra::parse_brace_set)
                .ok_or_else(|| FormatError::at(n, "expected `domain={...}`"))?;
            let alg = killgen_algebra(domain).map_err(|e| algebra_error(n, e))?;
            let pds = parse_rules(&alg, text)?;
            Ok(LoadedPds::KillGen(alg, pds))
        }
        "minplus" => {
            no_params()?;
            let alg = minplus_algebra();
            let pds = parse_rules(&alg, text)?;
            Ok(LoadedPds::MinPlus(alg, pds))
        }
        "boolean" => {
            no_params()?;
            let alg = boolean_algebra();
            let pds = parse_rules(&alg, text)?;
            Ok(LoadedPds::Bool(alg, pds))
        }
        "tabulated" => {
            let lattice = parse_lattice_params(params).map_err(|e| algebra_error(n, e))?;
            let open = TabulatedAlgebra::over(lattice.clone());
            let loose = parse_rules(&open, text)?;
            let tables: Vec<Table> = loose.rules().iter().map(|r| r.weight.clone()).collect();
            let alg = tabulated_framework_algebra(lattice, &tables).map_err(|e| algebra_error(n, e))?;
            Ok(LoadedPds::Tabulated(alg, loose))
        }
        other => Err(FormatError::at(n, format!("unknown algebra `{other}`"))),
    }
}

/// Reads the `rule` lines of a system file with weights in `alg`. The
/// header line is skipped.
pub fn parse_rules<A: FlowAlgebra>(alg: &A, text: &str) -> Result<PushdownSystem<A::Elem>, FormatError> {
    let mut rules = Vec::new();
    let mut seen_header = false;
    for (n, line) in content_lines(text) {
        if !seen_header && line.starts_with("algebra") {
            seen_header = true;
            continue;
        }
        let caps = RULE
            .captures(line)
            .ok_or_else(|| FormatError::at(n, "expected `rule <loc, sym> -> <loc, rhs> weight <w>`"))?;
        let rhs = caps[4].trim();
        let word: Vec<&str> = if rhs == "eps" { Vec::new() } else { rhs.split_whitespace().collect() };
        if word.is_empty() && rhs != "eps" {
            return Err(FormatError::at(n, "empty right-hand side; write `eps`"));
        }
        for w in &word {
            ident(n, "stack symbol", w)?;
        }
        if word.len() > 2 {
            return Err(FormatError::at(
                n,
                format!("rule <{}, {}> pushes {} symbols; at most 2 are allowed", &caps[1], &caps[2], word.len()),
            ));
        }
        let weight = alg.parse(caps[5].trim()).map_err(|e| algebra_error(n, e))?;
        rules.push(Rule::new(&caps[1], &caps[2], &caps[3], &word, weight));
    }
    if !seen_header {
        return Err(FormatError::whole("missing `algebra` header"));
    }
    PushdownSystem::new(alg, rules).map_err(|e| FormatError::whole(e.to_string()))
}

pub fn write_pds<A: FlowAlgebra>(alg: &A, pds: &PushdownSystem<A::Elem>) -> String {
    let mut out = format!("{}\n", alg.header());
    for r in pds.rules() {
        let rhs = if r.to_word.is_empty() {
            "eps".to_string()
        } else {
            r.to_word.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
        };
        let head = r.from_sym.as_ref().map_or("eps", Symbol::as_str);
        out.push_str(&format!(
            "rule <{}, {}> -> <{}, {}> weight {}\n",
            r.from_loc,
            head,
            r.to_loc,
            rhs,
            alg.render(&r.weight)
        ));
    }
    out
}

/// Reads an input automaton. Initial states are `initials` (the system's
/// control locations); the usual input restrictions are checked per line.
pub fn parse_automaton(
    text: &str,
    direction: Direction,
    initials: &BTreeSet<StateId>,
) -> Result<PAutomaton, FormatError> {
    let mut states = Vec::new();
    let mut finals = Vec::new();
    let mut transitions = Vec::new();
    for (n, line) in content_lines(text) {
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        let args: Vec<&str> = words.collect();
        for a in &args {
            if *a != "eps" {
                ident(n, "identifier", a)?;
            }
        }
        match keyword {
            "states" => states.extend(args.iter().map(|&s| StateId::new(s))),
            "final" => {
                for s in &args {
                    let q = StateId::new(s);
                    if initials.contains(&q) {
                        return Err(FormatError::at(n, format!("control location {q} cannot be final")));
                    }
                    finals.push(q);
                }
            }
            "trans" => {
                let [src, label, dst] = args.as_slice() else {
                    return Err(FormatError::at(n, "expected `trans <src> <label> <dst>`"));
                };
                if *label == "eps" {
                    return Err(FormatError::at(n, "input automata have no ε-transitions"));
                }
                if *src == "eps" || *dst == "eps" {
                    return Err(FormatError::at(n, "`eps` is not a state name"));
                }
                let t = Transition::new(src, Some(label), dst);
                if initials.contains(&t.dst) {
                    return Err(FormatError::at(n, format!("transition {t} enters control location {}", t.dst)));
                }
                transitions.push(t);
            }
            other => return Err(FormatError::at(n, format!("unknown directive `{other}`"))),
        }
    }
    PAutomaton::new(direction, initials.iter().cloned(), states, finals, transitions)
        .map_err(|e| FormatError::whole(e.to_string()))
}

/// `states`, `final` and `trans` lines, all sorted.
pub fn write_automaton(aut: &PAutomaton) -> String {
    let join = |set: &BTreeSet<StateId>| set.iter().map(StateId::as_str).collect::<Vec<_>>().join(" ");
    let mut out = format!("states {}\nfinal {}\n", join(aut.states()), join(aut.finals()));
    for t in aut.transitions() {
        let label = t.label.as_ref().map_or("eps", Symbol::as_str);
        out.push_str(&format!("trans {} {} {}\n", t.src, label, t.dst));
    }
    out
}

/// Parses `<loc: sym sym ...>`, top of stack first; `<loc:>` is the empty stack.
pub fn parse_config(text: &str) -> Result<Configuration, FormatError> {
    let caps = CONFIG
        .captures(text.trim())
        .ok_or_else(|| FormatError::whole(format!("malformed configuration `{text}`; expected `<loc: sym ...>`")))?;
    let stack: Vec<&str> = caps[2].split_whitespace().collect();
    for s in &stack {
        if !IDENT.is_match(s) {
            return Err(FormatError::whole(format!("invalid stack symbol `{s}` in `{text}`")));
        }
    }
    Ok(Configuration::new(&caps[1], &stack))
}

pub fn write_constraints<A: FlowAlgebra>(alg: &A, constraints: &[Constraint<A::Elem>]) -> String {
    let mut lines: Vec<String> = constraints.iter().map(|c| c.render(alg)).collect();
    lines.sort();
    lines.dedup();
    lines.into_iter().map(|l| l + "\n").collect()
}

pub fn write_solution<A: FlowAlgebra>(alg: &A, sol: &Solution<A::Elem>) -> String {
    let mut lines: Vec<String> = sol.iter().map(|(t, v)| format!("{t} = {}", alg.render(v))).collect();
    lines.sort();
    lines.into_iter().map(|l| l + "\n").collect()
}
