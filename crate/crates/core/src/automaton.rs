//! P-automata: regular sets of configurations and weighted readout along
//! accepting runs.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebra::FlowAlgebra;
use crate::pds::{Configuration, StateId, Symbol};
use crate::solver::Solution;

/// Which saturation an automaton belongs to; fixes the readout orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Pre,
    Post,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Pre => "pre",
            Direction::Post => "post",
        })
    }
}

/// `src →label dst`; a `None` label is ε.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: StateId,
    pub label: Option<Symbol>,
    pub dst: StateId,
}

impl Transition {
    pub fn new(src: &str, label: Option<&str>, dst: &str) -> Self {
        Transition {
            src: src.into(),
            label: label.map(Symbol::from),
            dst: dst.into(),
        }
    }

    pub fn is_epsilon(&self) -> bool {
        self.label.is_none()
    }

    fn label_text(&self) -> &str {
        self.label.as_ref().map_or("eps", Symbol::as_str)
    }
}

/// Renders as the constraint variable `l(src,label,dst)`.
impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l({},{},{})", self.src, self.label_text(), self.dst)
    }
}

impl fmt::Debug for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A chain of transitions, in the order they are taken.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run(pub Vec<Transition>);

impl Run {
    /// The non-ε labels, in order.
    pub fn spelled(&self) -> Vec<Symbol> {
        self.0.iter().filter_map(|t| t.label.clone()).collect()
    }

    /// Consecutive transitions share endpoints.
    pub fn is_chained(&self) -> bool {
        self.0.windows(2).all(|w| w[0].dst == w[1].src)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AutomatonError {
    #[error("invalid input automaton: {0}")]
    InvalidInput(String),
    #[error("ε-transition {0} is not allowed in a pre-direction automaton")]
    EpsilonInPre(Transition),
    #[error("`{0}` is not a control location")]
    UnknownLocation(StateId),
    #[error("{0} is not accepted")]
    NotAccepted(Configuration),
    #[error("no weight assigned to {0}")]
    MissingAssignment(Transition),
    #[error("readout expects a {expected}-direction automaton")]
    WrongDirection { expected: Direction },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAutomaton {
    direction: Direction,
    states: BTreeSet<StateId>,
    initials: BTreeSet<StateId>,
    finals: BTreeSet<StateId>,
    transitions: BTreeSet<Transition>,
}

impl PAutomaton {
    /// States are the union of `initials`, `states`, `finals` and all
    /// transition endpoints.
    pub fn new(
        direction: Direction,
        initials: impl IntoIterator<Item = StateId>,
        states: impl IntoIterator<Item = StateId>,
        finals: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Self, AutomatonError> {
        let mut aut = PAutomaton {
            direction,
            states: BTreeSet::new(),
            initials: initials.into_iter().collect(),
            finals: finals.into_iter().collect(),
            transitions: BTreeSet::new(),
        };
        aut.states.extend(aut.initials.iter().cloned());
        aut.states.extend(aut.finals.iter().cloned());
        aut.states.extend(states);
        for t in transitions {
            aut.insert_transition(t)?;
        }
        Ok(aut)
    }

    /// Checks the preconditions shared by both saturations: no transition
    /// enters an initial state, no ε-transitions, and no initial state is final.
    pub fn validate_input(&self) -> Result<(), AutomatonError> {
        if let Some(t) = self.transitions.iter().find(|t| self.initials.contains(&t.dst)) {
            return Err(AutomatonError::InvalidInput(format!(
                "transition {t} enters the initial state {}",
                t.dst
            )));
        }
        if let Some(t) = self.transitions.iter().find(|t| t.is_epsilon()) {
            return Err(AutomatonError::InvalidInput(format!("ε-transition {t}")));
        }
        if let Some(q) = self.initials.intersection(&self.finals).next() {
            return Err(AutomatonError::InvalidInput(format!(
                "initial state {q} is also final"
            )));
        }
        Ok(())
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn states(&self) -> &BTreeSet<StateId> {
        &self.states
    }

    pub fn initials(&self) -> &BTreeSet<StateId> {
        &self.initials
    }

    pub fn finals(&self) -> &BTreeSet<StateId> {
        &self.finals
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn contains(&self, t: &Transition) -> bool {
        self.transitions.contains(t)
    }

    /// All symbols labelling some transition.
    pub fn labels(&self) -> BTreeSet<Symbol> {
        self.transitions.iter().filter_map(|t| t.label.clone()).collect()
    }

    pub(crate) fn add_state(&mut self, q: StateId) -> bool {
        self.states.insert(q)
    }

    /// Returns whether the transition is new.
    pub(crate) fn insert_transition(&mut self, t: Transition) -> Result<bool, AutomatonError> {
        if t.is_epsilon() && self.direction == Direction::Pre {
            return Err(AutomatonError::EpsilonInPre(t));
        }
        self.states.insert(t.src.clone());
        self.states.insert(t.dst.clone());
        Ok(self.transitions.insert(t))
    }

    /// Outgoing transitions of `src` with the given label, in sorted order.
    pub fn successors<'a>(
        &'a self,
        src: &'a StateId,
        label: Option<&'a Symbol>,
    ) -> impl Iterator<Item = &'a Transition> + 'a {
        let lo = Transition {
            src: src.clone(),
            label: label.cloned(),
            dst: StateId::new(""),
        };
        self.transitions
            .range(lo..)
            .take_while(move |t| &t.src == src && t.label.as_ref() == label)
    }

    /// All outgoing transitions of `src`.
    pub fn outgoing<'a>(&'a self, src: &'a StateId) -> impl Iterator<Item = &'a Transition> + 'a {
        self.transitions.iter().filter(move |t| &t.src == src)
    }

    pub fn accepts(&self, c: &Configuration) -> Result<bool, AutomatonError> {
        Ok(!self.accepting_runs(c)?.is_empty())
    }

    /// Every accepting run for `c`, ordered lexicographically by transition.
    ///
    /// In the post direction a run may start with a single ε-transition
    /// leaving the initial state; no other ε-steps are taken.
    pub fn accepting_runs(&self, c: &Configuration) -> Result<Vec<Run>, AutomatonError> {
        if !self.initials.contains(&c.loc) {
            return Err(AutomatonError::UnknownLocation(c.loc.clone()));
        }
        let mut runs = Vec::new();
        let mut prefix = Vec::new();
        if self.direction == Direction::Post {
            for eps in self.successors(&c.loc, None) {
                prefix.push(eps.clone());
                self.collect_runs(&eps.dst, &c.stack, &mut prefix, &mut runs);
                prefix.pop();
            }
        }
        self.collect_runs(&c.loc, &c.stack, &mut prefix, &mut runs);
        runs.sort();
        Ok(runs)
    }

    fn collect_runs(&self, q: &StateId, rest: &[Symbol], prefix: &mut Vec<Transition>, out: &mut Vec<Run>) {
        let Some((sym, tail)) = rest.split_first() else {
            if self.finals.contains(q) {
                out.push(Run(prefix.clone()));
            }
            return;
        };
        for t in self.successors(q, Some(sym)) {
            prefix.push(t.clone());
            self.collect_runs(&t.dst, tail, prefix, out);
            prefix.pop();
        }
    }
}

fn lookup<'s, E>(sol: &'s Solution<E>, t: &Transition) -> Result<&'s E, AutomatonError> {
    sol.get(t).ok_or_else(|| AutomatonError::MissingAssignment(t.clone()))
}

/// `λ*`: the product of the run's weights in the order taken.
pub fn read_weight_pre<A: FlowAlgebra>(
    alg: &A,
    aut: &PAutomaton,
    sol: &Solution<A::Elem>,
    run: &Run,
) -> Result<A::Elem, AutomatonError> {
    if aut.direction() != Direction::Pre {
        return Err(AutomatonError::WrongDirection { expected: Direction::Pre });
    }
    run.0
        .iter()
        .try_fold(alg.one(), |acc, t| Ok(alg.extend(&acc, lookup(sol, t)?)))
}

/// `λ_R*`: the product of the run's weights in reverse order, so the
/// transition read last is multiplied first. A leading ε-step therefore
/// contributes last, giving `l(q',γ,q) ⊗ l(p,ε,q')` for a two-step prefix.
pub fn read_weight_post<A: FlowAlgebra>(
    alg: &A,
    aut: &PAutomaton,
    sol: &Solution<A::Elem>,
    run: &Run,
) -> Result<A::Elem, AutomatonError> {
    if aut.direction() != Direction::Post {
        return Err(AutomatonError::WrongDirection { expected: Direction::Post });
    }
    run.0
        .iter()
        .rev()
        .try_fold(alg.one(), |acc, t| Ok(alg.extend(&acc, lookup(sol, t)?)))
}

/// `δ(c)`: the join of the readouts of all accepting runs of `c`.
pub fn query<A: FlowAlgebra>(
    alg: &A,
    aut: &PAutomaton,
    sol: &Solution<A::Elem>,
    c: &Configuration,
) -> Result<A::Elem, AutomatonError> {
    let runs = aut.accepting_runs(c)?;
    if runs.is_empty() {
        return Err(AutomatonError::NotAccepted(c.clone()));
    }
    runs.iter().try_fold(alg.zero(), |acc, run| {
        let w = match aut.direction() {
            Direction::Pre => read_weight_pre(alg, aut, sol, run)?,
            Direction::Post => read_weight_post(alg, aut, sol, run)?,
        };
        Ok(alg.combine(&acc, &w))
    })
}
