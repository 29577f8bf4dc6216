//! Brute-force ground truth: bounded search over rule sequences of the
//! composite systems, and checks of saturated readouts against it.
//!
//! Nothing here calls into saturation or the solver; only [`pds::step`]-level
//! rule application and path weights are shared.
//!
//! [`pds::step`]: crate::pds::step

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::algebra::{check_laws, AlgebraError, FlowAlgebra, Law, Verdict};
use crate::automaton::{query, AutomatonError, Direction, PAutomaton};
use crate::pds::{build_delta_post2, build_delta_pre, path_weight, Configuration, PushdownSystem, Rule, StateId, Symbol};
use crate::solver::Solution;

pub type RuleSequence<E> = Vec<Rule<E>>;

/// Which configurations end a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// `⟨q_f, ε⟩` for some `q_f` in the set.
    EmptyAt(BTreeSet<StateId>),
    Exact(Configuration),
}

impl Target {
    pub fn matches(&self, c: &Configuration) -> bool {
        match self {
            Target::EmptyAt(finals) => c.stack.is_empty() && finals.contains(&c.loc),
            Target::Exact(t) => t == c,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathQuery<'r, E> {
    pub rules: &'r [Rule<E>],
    pub source: Configuration,
    pub target: Target,
    /// Longest sequence considered.
    pub depth_bound: usize,
    /// Highest stack allowed along the way; defaults to
    /// `|source| + 2 · depth_bound`.
    pub stack_bound: Option<usize>,
}

impl<'r, E> PathQuery<'r, E> {
    pub fn new(rules: &'r [Rule<E>], source: Configuration, target: Target, depth_bound: usize) -> Self {
        PathQuery {
            rules,
            source,
            target,
            depth_bound,
            stack_bound: None,
        }
    }

    fn stack_bound(&self) -> usize {
        self.stack_bound
            .unwrap_or(self.source.stack.len() + 2 * self.depth_bound)
            .max(self.source.stack.len())
    }
}

/// `⊕ v(σ)` over the sequences found. `value` is `None` when there are none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSetValue<E> {
    pub value: Option<E>,
    pub count: u128,
    /// The whole search space below the bounds was explored.
    pub exhausted: bool,
    /// A shortest sequence among those found.
    pub witness: Option<RuleSequence<E>>,
}

/// Every matching sequence of length at most `depth_bound`, shortest first,
/// ties in rule order.
pub fn enumerate_paths<E: Clone>(q: &PathQuery<'_, E>) -> Vec<RuleSequence<E>> {
    let bound = q.stack_bound();
    let mut found = Vec::new();
    let mut layer: Vec<(Configuration, Vec<usize>)> = vec![(q.source.clone(), Vec::new())];
    for depth in 0..=q.depth_bound {
        for (c, seq) in &layer {
            if q.target.matches(c) {
                found.push(seq.iter().map(|&i| q.rules[i].clone()).collect());
            }
        }
        if depth == q.depth_bound {
            break;
        }
        let mut next = Vec::new();
        for (c, seq) in &layer {
            for (i, r) in q.rules.iter().enumerate() {
                if let Some(c2) = r.apply(c) {
                    if c2.stack.len() <= bound {
                        let mut s = seq.clone();
                        s.push(i);
                        next.push((c2, s));
                    }
                }
            }
        }
        layer = next;
    }
    found
}

/// One way of ending at a configuration with a given prefix weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrival<E> {
    pub weight: E,
    pub depth: usize,
    pub count: u128,
    node: usize,
}

/// Result of a layered search where sequences reaching the same
/// configuration with the same weight at the same depth are merged.
#[derive(Debug, Clone)]
pub struct Exploration<E> {
    /// `(parent node, rule index)` per node; the root has no parent.
    nodes: Vec<(Option<usize>, usize)>,
    pub arrivals: BTreeMap<Configuration, Vec<Arrival<E>>>,
    pub exhausted: bool,
}

impl<E: Clone> Exploration<E> {
    pub fn sequence(&self, rules: &[Rule<E>], arrival: &Arrival<E>) -> RuleSequence<E> {
        let mut seq = Vec::new();
        let mut node = arrival.node;
        while let (Some(parent), rule) = self.nodes[node] {
            seq.push(rules[rule].clone());
            node = parent;
        }
        seq.reverse();
        seq
    }
}

/// Layered search from `source`. Arrivals are recorded at configurations
/// accepted by `is_target`. With `prune_to = Some(h)`, states whose stack is
/// too high to come down to `h` within the remaining steps are dropped.
/// Dropped or stack-bounded states make the exploration non-exhaustive.
pub fn explore<A: FlowAlgebra>(
    alg: &A,
    rules: &[Rule<A::Elem>],
    source: &Configuration,
    depth_bound: usize,
    stack_bound: usize,
    prune_to: Option<usize>,
    is_target: impl Fn(&Configuration) -> bool,
) -> Exploration<A::Elem> {
    let mut ex = Exploration {
        nodes: vec![(None, 0)],
        arrivals: BTreeMap::new(),
        exhausted: false,
    };
    let mut layer: BTreeMap<(Configuration, A::Elem), (u128, usize)> = BTreeMap::new();
    layer.insert((source.clone(), alg.one()), (1, 0));
    let mut cut = false;
    for depth in 0..=depth_bound {
        for ((c, w), &(count, node)) in &layer {
            if is_target(c) {
                ex.arrivals.entry(c.clone()).or_default().push(Arrival {
                    weight: w.clone(),
                    depth,
                    count,
                    node,
                });
            }
        }
        let remaining = depth_bound - depth;
        let mut next: BTreeMap<(Configuration, A::Elem), (u128, usize)> = BTreeMap::new();
        for ((c, w), &(count, node)) in &layer {
            for (i, r) in rules.iter().enumerate() {
                let Some(c2) = r.apply(c) else { continue };
                let too_high = c2.stack.len() > stack_bound
                    || prune_to.is_some_and(|h| c2.stack.len() > h + remaining.saturating_sub(1));
                if too_high || remaining == 0 {
                    cut = true;
                    continue;
                }
                let w2 = alg.extend(w, &r.weight);
                let slot = next.entry((c2, w2)).or_insert_with(|| {
                    ex.nodes.push((Some(node), i));
                    (0, ex.nodes.len() - 1)
                });
                slot.0 = slot.0.saturating_add(count);
            }
        }
        if next.is_empty() {
            ex.exhausted = !cut;
            break;
        }
        layer = next;
    }
    ex
}

pub fn join_over_paths<A: FlowAlgebra>(alg: &A, q: &PathQuery<'_, A::Elem>) -> PathSetValue<A::Elem> {
    let ex = explore(alg, q.rules, &q.source, q.depth_bound, q.stack_bound(), None, |c| q.target.matches(c));
    let arrivals: Vec<&Arrival<A::Elem>> = ex.arrivals.values().flatten().collect();
    let shortest = arrivals.iter().min_by_key(|a| a.depth);
    PathSetValue {
        value: (!arrivals.is_empty()).then(|| arrivals.iter().fold(alg.zero(), |acc, a| alg.combine(&acc, &a.weight))),
        count: arrivals.iter().fold(0u128, |n, a| n.saturating_add(a.count)),
        exhausted: ex.exhausted,
        witness: shortest.map(|a| ex.sequence(q.rules, a)),
    }
}

/// Every configuration reachable from `source` without exceeding
/// `stack_bound`, with no depth limit.
pub fn reachable_configurations<E>(
    rules: &[Rule<E>],
    source: &Configuration,
    stack_bound: usize,
) -> BTreeSet<Configuration> {
    let mut seen = BTreeSet::from([source.clone()]);
    let mut queue = VecDeque::from([source.clone()]);
    while let Some(c) = queue.pop_front() {
        for r in rules {
            if let Some(c2) = r.apply(&c) {
                if c2.stack.len() <= stack_bound && seen.insert(c2.clone()) {
                    queue.push_back(c2);
                }
            }
        }
    }
    seen
}

/// All configurations over `locations` with stacks of length ≤ `max_stack`,
/// shorter stacks first.
pub fn configurations(
    locations: &BTreeSet<StateId>,
    alphabet: &BTreeSet<Symbol>,
    max_stack: usize,
) -> Vec<Configuration> {
    let mut stacks: Vec<Vec<Symbol>> = vec![Vec::new()];
    let mut level: Vec<Vec<Symbol>> = vec![Vec::new()];
    for _ in 0..max_stack {
        level = level
            .iter()
            .flat_map(|s| {
                alphabet.iter().map(move |g| {
                    let mut s2 = s.clone();
                    s2.push(g.clone());
                    s2
                })
            })
            .collect();
        stacks.extend(level.iter().cloned());
    }
    stacks
        .into_iter()
        .flat_map(|stack| {
            locations.iter().map(move |loc| Configuration {
                loc: loc.clone(),
                stack: stack.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Longest rule sequence explored.
    pub depth: usize,
    /// Configurations with stacks up to this length are checked.
    pub max_stack: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { depth: 12, max_stack: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub config: Configuration,
    pub sigma_length: usize,
    /// Path side: `v(σ)` or the join over paths, or `none`.
    pub lhs: String,
    /// Readout side: the query weight, or `UNREACHABLE`.
    pub rhs: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VIOLATION {} {} {} {}", self.config, self.sigma_length, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
    /// Configurations whose path set was not fully explored.
    pub bound_limited: usize,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if self.violations.is_empty() {
            out.push_str("OK\n");
        }
        for v in &self.violations {
            out.push_str(&format!("{v}\n"));
        }
        out.push_str(&format!(
            "checked={} violations={} bound_limited={}\n",
            self.checked,
            self.violations.len(),
            self.bound_limited
        ));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("completeness check needs a distributive algebra: {0}")]
    PreconditionNotMet(String),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Path arrivals per configuration of `P × Γ^{≤k}`, found by searching the
/// composite system of the input automaton's direction.
struct PathIndex<E> {
    rules: Vec<Rule<E>>,
    /// `(exploration, arrivals)` per configuration, merged over sources.
    found: BTreeMap<Configuration, Vec<(usize, Arrival<E>)>>,
    explorations: Vec<Exploration<E>>,
    /// Per configuration (pre) or globally (post), whether all searches
    /// involved were exhaustive.
    exhausted: BTreeMap<Configuration, bool>,
    configs: Vec<Configuration>,
}

impl<E: Clone> PathIndex<E> {
    fn build<A: FlowAlgebra<Elem = E>>(
        alg: &A,
        pds: &PushdownSystem<E>,
        input: &PAutomaton,
        bounds: Bounds,
        prune: bool,
    ) -> Self {
        let mut alphabet = pds.alphabet().clone();
        alphabet.extend(input.labels());
        let configs = configurations(input.initials(), &alphabet, bounds.max_stack);
        let mut index = PathIndex {
            rules: Vec::new(),
            found: BTreeMap::new(),
            explorations: Vec::new(),
            exhausted: BTreeMap::new(),
            configs,
        };
        match input.direction() {
            Direction::Pre => {
                index.rules = build_delta_pre(alg, pds, input);
                let target = Target::EmptyAt(input.finals().clone());
                for c in index.configs.clone() {
                    let stack_bound = c.stack.len() + 2 * bounds.depth;
                    let ex = explore(alg, &index.rules, &c, bounds.depth, stack_bound, prune.then_some(0), |d| {
                        target.matches(d)
                    });
                    index.exhausted.insert(c.clone(), ex.exhausted);
                    index.absorb(ex, Some(&c));
                }
            }
            Direction::Post => {
                index.rules = build_delta_post2(alg, pds, input);
                let mut all_exhausted = true;
                for qf in input.finals() {
                    let source = Configuration {
                        loc: qf.clone(),
                        stack: Vec::new(),
                    };
                    let prune_to = prune.then_some(bounds.max_stack);
                    let ex = explore(alg, &index.rules, &source, bounds.depth, 2 * bounds.depth, prune_to, |d| {
                        d.stack.len() <= bounds.max_stack && input.initials().contains(&d.loc)
                    });
                    all_exhausted &= ex.exhausted;
                    index.absorb(ex, None);
                }
                for c in &index.configs {
                    index.exhausted.insert(c.clone(), all_exhausted);
                }
            }
        }
        index
    }

    /// Files arrivals under their own configuration, or under `source` when
    /// paths run from the checked configuration to a fixed target.
    fn absorb(&mut self, ex: Exploration<E>, source: Option<&Configuration>) {
        let id = self.explorations.len();
        for (c, arrivals) in &ex.arrivals {
            self.found
                .entry(source.unwrap_or(c).clone())
                .or_default()
                .extend(arrivals.iter().map(|a| (id, a.clone())));
        }
        self.explorations.push(ex);
    }

    fn arrivals(&self, c: &Configuration) -> &[(usize, Arrival<E>)] {
        self.found.get(c).map_or(&[], Vec::as_slice)
    }

    fn sigma_length(&self, (id, a): &(usize, Arrival<E>)) -> usize {
        self.explorations[*id].sequence(&self.rules, a).len()
    }
}

/// Every sequence found must weigh at most the readout of its
/// configuration, and its configuration must be accepted.
pub fn check_soundness<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    input: &PAutomaton,
    saturated: &PAutomaton,
    sol: &Solution<A::Elem>,
    bounds: Bounds,
) -> Result<OracleReport, OracleError> {
    let index = PathIndex::build(alg, pds, input, bounds, true);
    let mut report = OracleReport::default();
    for c in &index.configs {
        report.checked += 1;
        if !index.exhausted[c] {
            report.bound_limited += 1;
        }
        let arrivals = index.arrivals(c);
        if arrivals.is_empty() {
            continue;
        }
        let readout = if saturated.accepts(c)? {
            Some(query(alg, saturated, sol, c)?)
        } else {
            None
        };
        for arrival in arrivals {
            let w = &arrival.1.weight;
            if readout.as_ref().is_some_and(|r| alg.leq(w, r)) {
                continue;
            }
            report.violations.push(Violation {
                config: c.clone(),
                sigma_length: index.sigma_length(arrival),
                lhs: alg.render(w),
                rhs: readout.as_ref().map_or("UNREACHABLE".into(), |r| alg.render(r)),
            });
        }
    }
    Ok(report)
}

/// On fully explored configurations the readout must equal the join over
/// paths; elsewhere only the soundness direction is checked and the
/// configuration is counted as bound-limited.
pub fn check_completeness<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    input: &PAutomaton,
    saturated: &PAutomaton,
    sol: &Solution<A::Elem>,
    bounds: Bounds,
) -> Result<OracleReport, OracleError> {
    let samples: Vec<A::Elem> = pds
        .rules()
        .iter()
        .map(|r| r.weight.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let laws = check_laws(alg, Some(&samples))?;
    for law in [Law::LeftDistributive, Law::RightDistributive] {
        if let Verdict::Fails(cx) = laws.verdict(law) {
            return Err(OracleError::PreconditionNotMet(format!(
                "{} fails at [{}]",
                law.label(),
                cx.elements.join("; ")
            )));
        }
    }
    let index = PathIndex::build(alg, pds, input, bounds, false);
    let mut report = OracleReport::default();
    for c in &index.configs {
        report.checked += 1;
        let exhausted = index.exhausted[c];
        if !exhausted {
            report.bound_limited += 1;
        }
        let arrivals = index.arrivals(c);
        let readout = if saturated.accepts(c)? {
            Some(query(alg, saturated, sol, c)?)
        } else {
            None
        };
        let join = (!arrivals.is_empty())
            .then(|| arrivals.iter().fold(alg.zero(), |acc, (_, a)| alg.combine(&acc, &a.weight)));
        let ok = match (&join, &readout) {
            (None, None) => true,
            (None, Some(_)) => !exhausted,
            (Some(_), None) => false,
            (Some(j), Some(r)) => {
                if exhausted {
                    j == r
                } else {
                    alg.leq(j, r)
                }
            }
        };
        if !ok {
            let sigma_length = arrivals
                .iter()
                .min_by_key(|(_, a)| a.depth)
                .map_or(0, |a| index.sigma_length(a));
            report.violations.push(Violation {
                config: c.clone(),
                sigma_length,
                lhs: join.as_ref().map_or("none".into(), |j| alg.render(j)),
                rhs: readout.as_ref().map_or("UNREACHABLE".into(), |r| alg.render(r)),
            });
        }
    }
    Ok(report)
}

/// Convenience wrapper: `path_weight` of every sequence, joined.
pub fn join_of<A: FlowAlgebra>(alg: &A, sequences: &[RuleSequence<A::Elem>]) -> Option<A::Elem> {
    (!sequences.is_empty()).then(|| {
        sequences
            .iter()
            .fold(alg.zero(), |acc, s| alg.combine(&acc, &path_weight(alg, s)))
    })
}
