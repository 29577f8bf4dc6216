//! Least solutions of saturation constraints by Kleene iteration.
//!
//! The constraint set defines `F(m) t = ⊕_{c ∈ C_t} lhs_m(c)`; starting from
//! the all-`0̄` assignment, chaotic worklist iteration reaches the least
//! fixpoint whenever the ascending chains of the carrier are finite.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::algebra::FlowAlgebra;
use crate::automaton::Transition;
use crate::saturation::{Constraint, Factor};

/// An assignment of weights to transition variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution<E>(BTreeMap<Transition, E>);

impl<E> Solution<E> {
    pub fn new() -> Self {
        Solution(BTreeMap::new())
    }

    pub fn get(&self, t: &Transition) -> Option<&E> {
        self.0.get(t)
    }

    pub fn insert(&mut self, t: Transition, value: E) -> Option<E> {
        self.0.insert(t, value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Transition, &E)> {
        self.0.iter()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Transition> {
        self.0.keys()
    }

    /// Pointwise `⊑` over the union of both domains; a missing entry fails.
    pub fn leq<A: FlowAlgebra<Elem = E>>(&self, alg: &A, other: &Self) -> bool {
        self.0
            .iter()
            .all(|(t, v)| other.get(t).is_some_and(|w| alg.leq(v, w)))
            && other.0.keys().all(|t| self.0.contains_key(t))
    }
}

impl<E> Default for Solution<E> {
    fn default() -> Self {
        Solution::new()
    }
}

impl<E> FromIterator<(Transition, E)> for Solution<E> {
    fn from_iter<I: IntoIterator<Item = (Transition, E)>>(iter: I) -> Self {
        Solution(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceLevel {
    #[default]
    Off,
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub max_applications: usize,
    pub trace_level: TraceLevel,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_applications: 1_000_000,
            trace_level: TraceLevel::Off,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SolveStats {
    /// Constraint evaluations performed.
    pub applications: usize,
    /// Times some variable strictly increased.
    pub increases: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("no weight assigned to {0}")]
    MissingAssignment(Transition),
    #[error("no fixpoint after {0} constraint applications")]
    IterationLimitExceeded(usize),
    #[error("max_applications must be at least 1")]
    InvalidConfig,
}

/// Every transition named by some constraint, on either side.
pub fn variables<E>(constraints: &[Constraint<E>]) -> BTreeSet<Transition> {
    let mut vars = BTreeSet::new();
    for c in constraints {
        vars.insert(c.rhs.clone());
        vars.extend(c.vars().cloned());
    }
    vars
}

/// The all-`0̄` assignment over the constraint variables.
pub fn bottom<A: FlowAlgebra>(alg: &A, constraints: &[Constraint<A::Elem>]) -> Solution<A::Elem> {
    variables(constraints)
        .into_iter()
        .map(|t| (t, alg.zero()))
        .collect()
}

/// `lhs_m(c)`: the left-to-right product with variables substituted.
pub fn eval_lhs<A: FlowAlgebra>(
    alg: &A,
    sol: &Solution<A::Elem>,
    c: &Constraint<A::Elem>,
) -> Result<A::Elem, SolverError> {
    c.lhs.iter().try_fold(alg.one(), |acc, f| {
        let v = match f {
            Factor::Const(w) => w,
            Factor::Var(t) => sol
                .get(t)
                .ok_or_else(|| SolverError::MissingAssignment(t.clone()))?,
        };
        Ok(alg.extend(&acc, v))
    })
}

/// One application of `F`. Variables without constraints map to `0̄`.
pub fn apply_f<A: FlowAlgebra>(
    alg: &A,
    sol: &Solution<A::Elem>,
    constraints: &[Constraint<A::Elem>],
) -> Result<Solution<A::Elem>, SolverError> {
    let mut next: Solution<A::Elem> = sol.variables().map(|t| (t.clone(), alg.zero())).collect();
    for t in variables(constraints) {
        next.0.entry(t).or_insert_with(|| alg.zero());
    }
    for c in constraints {
        let v = eval_lhs(alg, sol, c)?;
        let slot = next.0.get_mut(&c.rhs).expect("rhs is a variable");
        *slot = alg.combine(slot, &v);
    }
    Ok(next)
}

/// Iterates `F` from `⊥` until two consecutive assignments agree.
pub fn solve_naive<A: FlowAlgebra>(
    alg: &A,
    constraints: &[Constraint<A::Elem>],
    max_rounds: usize,
) -> Result<Solution<A::Elem>, SolverError> {
    let mut current = bottom(alg, constraints);
    for _ in 0..max_rounds {
        let next = apply_f(alg, &current, constraints)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
    Err(SolverError::IterationLimitExceeded(max_rounds))
}

pub fn solve_least<A: FlowAlgebra>(
    alg: &A,
    constraints: &[Constraint<A::Elem>],
    config: SolverConfig,
) -> Result<Solution<A::Elem>, SolverError> {
    solve_from(alg, constraints, bottom(alg, constraints), config).map(|(sol, _)| sol)
}

/// Worklist iteration from `init`. The result is the least solution above
/// `init`; from `⊥` it is the least solution.
pub fn solve_from<A: FlowAlgebra>(
    alg: &A,
    constraints: &[Constraint<A::Elem>],
    init: Solution<A::Elem>,
    config: SolverConfig,
) -> Result<(Solution<A::Elem>, SolveStats), SolverError> {
    if config.max_applications == 0 {
        return Err(SolverError::InvalidConfig);
    }
    let mut sol = init;
    for t in variables(constraints) {
        sol.0.entry(t).or_insert_with(|| alg.zero());
    }
    let mut readers: HashMap<&Transition, Vec<usize>> = HashMap::new();
    for (i, c) in constraints.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for v in c.vars() {
            if seen.insert(v) {
                readers.entry(v).or_default().push(i);
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..constraints.len()).collect();
    let mut queued = vec![true; constraints.len()];
    let mut stats = SolveStats::default();
    while let Some(i) = queue.pop_front() {
        queued[i] = false;
        if stats.applications == config.max_applications {
            return Err(SolverError::IterationLimitExceeded(config.max_applications));
        }
        stats.applications += 1;
        let c = &constraints[i];
        let v = eval_lhs(alg, &sol, c)?;
        let slot = sol.0.get_mut(&c.rhs).expect("rhs is a variable");
        let joined = alg.combine(slot, &v);
        if joined != *slot {
            *slot = joined;
            stats.increases += 1;
            for &j in readers.get(&c.rhs).into_iter().flatten() {
                if !queued[j] {
                    queued[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    if config.trace_level == TraceLevel::Summary {
        log::info!(
            "solved {} constraints over {} variables: {} applications, {} increases",
            constraints.len(),
            sol.len(),
            stats.applications,
            stats.increases
        );
    }
    Ok((sol, stats))
}
