//! Constraint-generating saturation for pre* and post*.
//!
//! Both procedures add transitions exactly as the unweighted algorithms do,
//! and for every (rule, matched run) pair they emit a constraint
//! `factor ⊗ … ⊗ factor ⊑ l(t)` on the weight of the produced transition.
//! Solving the constraints is left to [`crate::solver`].

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::algebra::FlowAlgebra;
use crate::automaton::{AutomatonError, Direction, PAutomaton, Transition};
use crate::pds::{mid_state, PushdownSystem, Rule, RuleShape, StateId, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor<E> {
    Const(E),
    Var(Transition),
}

/// `lhs[0] ⊗ lhs[1] ⊗ … ⊑ rhs`. Factor order matters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint<E> {
    pub lhs: Vec<Factor<E>>,
    pub rhs: Transition,
}

impl<E> Constraint<E> {
    pub fn new(lhs: Vec<Factor<E>>, rhs: Transition) -> Self {
        Constraint { lhs, rhs }
    }

    /// Variables on the left-hand side, in factor order.
    pub fn vars(&self) -> impl Iterator<Item = &Transition> {
        self.lhs.iter().filter_map(|f| match f {
            Factor::Var(t) => Some(t),
            Factor::Const(_) => None,
        })
    }

    /// Whether the left-hand side has one of the shapes the given
    /// saturation can emit.
    pub fn has_legal_shape(&self, direction: Direction, one: &E) -> bool
    where
        E: PartialEq,
    {
        use Factor::{Const, Var};
        match (direction, self.lhs.as_slice()) {
            (_, [Const(w)]) if w == one => true,
            (Direction::Pre, [Const(_)] | [Const(_), Var(_)] | [Const(_), Var(_), Var(_)]) => true,
            (Direction::Post, [Var(_), Const(_)] | [Var(_), Var(_), Const(_)]) => true,
            _ => false,
        }
    }

    pub fn render<A: FlowAlgebra<Elem = E>>(&self, alg: &A) -> String {
        let factors: Vec<String> = self
            .lhs
            .iter()
            .map(|f| match f {
                Factor::Const(w) => alg.render(w),
                Factor::Var(t) => t.to_string(),
            })
            .collect();
        format!("{} <= {}", factors.join(" (x) "), self.rhs)
    }
}

/// Why a transition entered the automaton (first time only).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cause {
    /// Present in the input automaton.
    Seed,
    /// Rule `rule` (index into the system's rules) fired on `run`.
    Rule { rule: usize, run: Vec<Transition> },
    /// The `p' →γ' q_{p',γ'}` half of push rule `rule`.
    PushEntry { rule: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub transition: Transition,
    pub cause: Cause,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationResult<E> {
    pub automaton: PAutomaton,
    /// Deduplicated, sorted by right-hand side then left-hand side.
    pub constraints: Vec<Constraint<E>>,
    /// One entry per transition, in the order they were added.
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SaturationError {
    #[error(transparent)]
    InvalidInputAutomaton(#[from] AutomatonError),
    #[error("{name} expects a {expected}-direction automaton")]
    WrongDirection { name: &'static str, expected: Direction },
}

/// Transitions already taken off the worklist, indexed for run matching.
#[derive(Default)]
struct Processed {
    by_src: BTreeSet<Transition>,
    by_dst: HashMap<StateId, Vec<Transition>>,
}

impl Processed {
    fn insert(&mut self, t: &Transition) {
        if self.by_src.insert(t.clone()) {
            self.by_dst.entry(t.dst.clone()).or_default().push(t.clone());
        }
    }

    fn from_with(&self, src: &StateId, label: Option<&Symbol>) -> Vec<Transition> {
        let lo = Transition {
            src: src.clone(),
            label: label.cloned(),
            dst: StateId::new(""),
        };
        self.by_src
            .range(lo..)
            .take_while(|t| &t.src == src && t.label.as_ref() == label)
            .cloned()
            .collect()
    }

    fn into_state(&self, dst: &StateId) -> &[Transition] {
        self.by_dst.get(dst).map_or(&[], Vec::as_slice)
    }
}

struct Saturator<'a, A: FlowAlgebra> {
    alg: &'a A,
    rules: &'a [Rule<A::Elem>],
    automaton: PAutomaton,
    constraints: HashSet<Constraint<A::Elem>>,
    trace: Vec<TraceEntry>,
    worklist: VecDeque<Transition>,
    processed: Processed,
}

impl<'a, A: FlowAlgebra> Saturator<'a, A> {
    fn new(alg: &'a A, pds: &'a PushdownSystem<A::Elem>, automaton: PAutomaton) -> Self {
        Saturator {
            alg,
            rules: pds.rules(),
            automaton,
            constraints: HashSet::new(),
            trace: Vec::new(),
            worklist: VecDeque::new(),
            processed: Processed::default(),
        }
    }

    fn resume(alg: &'a A, pds: &'a PushdownSystem<A::Elem>, prev: &SaturationResult<A::Elem>) -> Self {
        let mut s = Saturator::new(alg, pds, prev.automaton.clone());
        s.constraints = prev.constraints.iter().cloned().collect();
        s.trace = prev.trace.clone();
        s.worklist = prev.automaton.transitions().iter().cloned().collect();
        s
    }

    fn seed(&mut self) {
        let one = self.alg.one();
        let original: Vec<Transition> = self.automaton.transitions().iter().cloned().collect();
        for t in original {
            self.constraints
                .insert(Constraint::new(vec![Factor::Const(one.clone())], t.clone()));
            self.trace.push(TraceEntry {
                transition: t.clone(),
                cause: Cause::Seed,
            });
            self.worklist.push_back(t);
        }
    }

    fn emit(&mut self, t: Transition, lhs: Vec<Factor<A::Elem>>, cause: impl FnOnce() -> Cause) {
        self.constraints.insert(Constraint::new(lhs, t.clone()));
        let fresh = self
            .automaton
            .insert_transition(t.clone())
            .expect("saturation only adds ε-transitions to post automata");
        if fresh {
            self.trace.push(TraceEntry {
                transition: t.clone(),
                cause: cause(),
            });
            self.worklist.push_back(t);
        }
    }

    fn finish(self) -> SaturationResult<A::Elem> {
        let mut constraints: Vec<_> = self.constraints.into_iter().collect();
        constraints.sort_by(|a, b| (&a.rhs, &a.lhs).cmp(&(&b.rhs, &b.lhs)));
        SaturationResult {
            automaton: self.automaton,
            constraints,
            trace: self.trace,
        }
    }

    fn run_pre(&mut self) {
        for (i, r) in self.rules.iter().enumerate() {
            if r.shape() == RuleShape::Pop {
                let t = Transition {
                    src: r.from_loc.clone(),
                    label: r.from_sym.clone(),
                    dst: r.to_loc.clone(),
                };
                self.emit(t, vec![Factor::Const(r.weight.clone())], || Cause::Rule { rule: i, run: vec![] });
            }
        }
        while let Some(t) = self.worklist.pop_front() {
            self.processed.insert(&t);
            for (i, r) in self.rules.iter().enumerate() {
                if r.to_loc != t.src || r.to_word.is_empty() {
                    continue;
                }
                let rhs = |dst: &StateId| Transition {
                    src: r.from_loc.clone(),
                    label: r.from_sym.clone(),
                    dst: dst.clone(),
                };
                let label = t.label.as_ref().expect("pre automata have no ε-transitions");
                match r.to_word.as_slice() {
                    [g] if g == label => {
                        let lhs = vec![Factor::Const(r.weight.clone()), Factor::Var(t.clone())];
                        self.emit(rhs(&t.dst), lhs, || Cause::Rule { rule: i, run: vec![t.clone()] });
                    }
                    [g1, g2] if g1 == label => {
                        for t2 in self.processed.from_with(&t.dst, Some(g2)) {
                            let lhs = vec![
                                Factor::Const(r.weight.clone()),
                                Factor::Var(t.clone()),
                                Factor::Var(t2.clone()),
                            ];
                            let run = vec![t.clone(), t2.clone()];
                            self.emit(rhs(&t2.dst), lhs, || Cause::Rule { rule: i, run });
                        }
                    }
                    _ => {}
                }
            }
            // `t` as the second step of a push match
            for (i, r) in self.rules.iter().enumerate() {
                let [g1, g2] = r.to_word.as_slice() else { continue };
                if Some(g2) != t.label.as_ref() {
                    continue;
                }
                let firsts: Vec<Transition> = self
                    .processed
                    .into_state(&t.src)
                    .iter()
                    .filter(|t1| t1.src == r.to_loc && t1.label.as_ref() == Some(g1))
                    .cloned()
                    .collect();
                for t1 in firsts {
                    let lhs = vec![
                        Factor::Const(r.weight.clone()),
                        Factor::Var(t1.clone()),
                        Factor::Var(t.clone()),
                    ];
                    let out = Transition {
                        src: r.from_loc.clone(),
                        label: r.from_sym.clone(),
                        dst: t.dst.clone(),
                    };
                    let run = vec![t1, t.clone()];
                    self.emit(out, lhs, || Cause::Rule { rule: i, run });
                }
            }
        }
    }

    fn run_post(&mut self) {
        for r in self.rules {
            if r.shape() == RuleShape::Push {
                self.automaton.add_state(mid_state(&r.to_loc, &r.to_word[0]));
            }
        }
        while let Some(t) = self.worklist.pop_front() {
            self.processed.insert(&t);
            // runs q ⇐γ p matched with `t`: (p, γ, q, weight variables in factor order)
            let mut runs: Vec<(StateId, Symbol, StateId, Vec<Transition>)> = Vec::new();
            match &t.label {
                Some(g) => {
                    runs.push((t.src.clone(), g.clone(), t.dst.clone(), vec![t.clone()]));
                    for e in self.processed.into_state(&t.src) {
                        if e.is_epsilon() {
                            runs.push((e.src.clone(), g.clone(), t.dst.clone(), vec![t.clone(), e.clone()]));
                        }
                    }
                }
                None => {
                    let nexts: Vec<Transition> = self
                        .processed
                        .by_src
                        .iter()
                        .filter(|t2| t2.src == t.dst && !t2.is_epsilon())
                        .cloned()
                        .collect();
                    for t2 in nexts {
                        let g = t2.label.clone().expect("non-ε");
                        runs.push((t.src.clone(), g, t2.dst.clone(), vec![t2, t.clone()]));
                    }
                }
            }
            for (p, g, q, vars) in runs {
                for (i, r) in self.rules.iter().enumerate() {
                    if r.from_loc != p || r.from_sym.as_ref() != Some(&g) {
                        continue;
                    }
                    let mut lhs: Vec<Factor<A::Elem>> = vars.iter().cloned().map(Factor::Var).collect();
                    lhs.push(Factor::Const(r.weight.clone()));
                    let cause = || Cause::Rule { rule: i, run: vars.clone() };
                    match r.to_word.as_slice() {
                        [] => {
                            let out = Transition {
                                src: r.to_loc.clone(),
                                label: None,
                                dst: q.clone(),
                            };
                            self.emit(out, lhs, cause);
                        }
                        [g1] => {
                            let out = Transition {
                                src: r.to_loc.clone(),
                                label: Some(g1.clone()),
                                dst: q.clone(),
                            };
                            self.emit(out, lhs, cause);
                        }
                        [g1, g2] => {
                            let mid = mid_state(&r.to_loc, g1);
                            let entry = Transition {
                                src: r.to_loc.clone(),
                                label: Some(g1.clone()),
                                dst: mid.clone(),
                            };
                            let one = self.alg.one();
                            self.emit(entry, vec![Factor::Const(one)], || Cause::PushEntry { rule: i });
                            let out = Transition {
                                src: mid,
                                label: Some(g2.clone()),
                                dst: q.clone(),
                            };
                            self.emit(out, lhs, cause);
                        }
                        _ => unreachable!("rules push at most two symbols"),
                    }
                }
            }
        }
    }
}

fn check_input<E>(
    pds: &PushdownSystem<E>,
    aut: &PAutomaton,
    name: &'static str,
    expected: Direction,
) -> Result<(), SaturationError> {
    if aut.direction() != expected {
        return Err(SaturationError::WrongDirection { name, expected });
    }
    aut.validate_input()?;
    if let Some(p) = pds.locations().iter().find(|p| !aut.initials().contains(*p)) {
        return Err(AutomatonError::InvalidInput(format!("control location {p} is not an initial state")).into());
    }
    Ok(())
}

/// Saturates `aut` into `A_pre*` and collects its constraints. Adds no states.
pub fn pre_star<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    aut: &PAutomaton,
) -> Result<SaturationResult<A::Elem>, SaturationError> {
    check_input(pds, aut, "pre_star", Direction::Pre)?;
    let mut s = Saturator::new(alg, pds, aut.clone());
    s.seed();
    s.run_pre();
    Ok(s.finish())
}

/// Saturates `aut` into `A_post*` and collects its constraints. Adds one
/// mid-state per distinct push target `(p', γ')`.
pub fn post_star<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    aut: &PAutomaton,
) -> Result<SaturationResult<A::Elem>, SaturationError> {
    check_input(pds, aut, "post_star", Direction::Post)?;
    let mut s = Saturator::new(alg, pds, aut.clone());
    s.seed();
    s.run_post();
    Ok(s.finish())
}

/// Dispatches on the automaton's direction.
pub fn saturate<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    aut: &PAutomaton,
) -> Result<SaturationResult<A::Elem>, SaturationError> {
    match aut.direction() {
        Direction::Pre => pre_star(alg, pds, aut),
        Direction::Post => post_star(alg, pds, aut),
    }
}

impl<E: Clone + Ord + std::hash::Hash + std::fmt::Debug> SaturationResult<E> {
    /// Runs the saturation loop again on the saturated automaton, without
    /// new seed constraints. A fixpoint yields an identical result.
    pub fn resaturate<A: FlowAlgebra<Elem = E>>(&self, alg: &A, pds: &PushdownSystem<E>) -> SaturationResult<E> {
        let mut s = Saturator::resume(alg, pds, self);
        match self.automaton.direction() {
            Direction::Pre => s.run_pre(),
            Direction::Post => s.run_post(),
        }
        s.finish()
    }

    pub fn cause_of(&self, t: &Transition) -> Option<&Cause> {
        self.trace.iter().find(|e| &e.transition == t).map(|e| &e.cause)
    }
}

/// A rule sequence justifying a saturated transition `q →γ q'`:
/// over `Δ_pre` it drives `⟨q,γ⟩` to `⟨q',ε⟩`; over `Δ_post-2` it drives
/// `⟨q',ε⟩` to `⟨q,γ⟩`. Rules are built exactly as the composite systems
/// build them, so the sequence can be replayed with [`crate::pds::step`].
pub fn witness<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    result: &SaturationResult<A::Elem>,
    t: &Transition,
) -> Option<Vec<Rule<A::Elem>>> {
    let causes: HashMap<&Transition, &Cause> = result.trace.iter().map(|e| (&e.transition, &e.cause)).collect();
    let mut memo = HashMap::new();
    witness_rec(alg, pds, result.automaton.direction(), &causes, &mut memo, t)
}

fn witness_rec<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    direction: Direction,
    causes: &HashMap<&Transition, &Cause>,
    memo: &mut HashMap<Transition, Vec<Rule<A::Elem>>>,
    t: &Transition,
) -> Option<Vec<Rule<A::Elem>>> {
    if let Some(seq) = memo.get(t) {
        return Some(seq.clone());
    }
    let seq = match (*causes.get(t)?, direction) {
        (Cause::Seed, Direction::Pre) => vec![Rule {
            from_loc: t.src.clone(),
            from_sym: t.label.clone(),
            to_loc: t.dst.clone(),
            to_word: vec![],
            weight: alg.one(),
        }],
        (Cause::Seed, Direction::Post) => vec![Rule {
            from_loc: t.dst.clone(),
            from_sym: None,
            to_loc: t.src.clone(),
            to_word: t.label.iter().cloned().collect(),
            weight: alg.one(),
        }],
        (Cause::PushEntry { rule }, _) => {
            let r = pds.rules().get(*rule)?;
            vec![Rule {
                from_loc: mid_state(&r.to_loc, &r.to_word[0]),
                from_sym: None,
                to_loc: r.to_loc.clone(),
                to_word: vec![r.to_word[0].clone()],
                weight: alg.one(),
            }]
        }
        (Cause::Rule { rule, run }, Direction::Pre) => {
            let mut seq = vec![pds.rules().get(*rule)?.clone()];
            for step in run {
                seq.extend(witness_rec(alg, pds, direction, causes, memo, step)?);
            }
            seq
        }
        (Cause::Rule { rule, run }, Direction::Post) => {
            let r = pds.rules().get(*rule)?;
            let mut seq = Vec::new();
            for step in run {
                seq.extend(witness_rec(alg, pds, direction, causes, memo, step)?);
            }
            if r.shape() == RuleShape::Push {
                seq.push(Rule {
                    from_loc: r.from_loc.clone(),
                    from_sym: r.from_sym.clone(),
                    to_loc: mid_state(&r.to_loc, &r.to_word[0]),
                    to_word: vec![r.to_word[1].clone()],
                    weight: r.weight.clone(),
                });
            } else {
                seq.push(r.clone());
            }
            seq
        }
    };
    memo.insert(t.clone(), seq.clone());
    Some(seq)
}
