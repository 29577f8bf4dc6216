//! Pushdown systems, their transition relation, and the composite rule
//! systems used to state soundness and completeness.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::algebra::FlowAlgebra;
use crate::automaton::PAutomaton;

/// A control location or automaton state.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(Arc<str>);

/// A stack symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

macro_rules! name_type {
    ($ty:ident) => {
        impl $ty {
            pub fn new(name: &str) -> Self {
                $ty(Arc::from(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $ty {
            fn from(name: &str) -> Self {
                $ty::new(name)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

name_type!(StateId);
name_type!(Symbol);

/// The fresh location `q_{p',γ}` introduced for push rules `⟨p,γ₀⟩ ↪ ⟨p',γ γ'⟩`.
///
/// `:` cannot occur in user identifiers, so these never collide.
pub fn mid_state(loc: &StateId, sym: &Symbol) -> StateId {
    StateId::new(&format!("mid:{loc}:{sym}"))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule<E> {
    pub from_loc: StateId,
    /// `None` only for the ε-headed rules of derived systems.
    pub from_sym: Option<Symbol>,
    pub to_loc: StateId,
    pub to_word: Vec<Symbol>,
    pub weight: E,
}

impl<E> Rule<E> {
    pub fn new(from_loc: &str, from_sym: &str, to_loc: &str, to_word: &[&str], weight: E) -> Self {
        Rule {
            from_loc: from_loc.into(),
            from_sym: Some(from_sym.into()),
            to_loc: to_loc.into(),
            to_word: to_word.iter().map(|&s| s.into()).collect(),
            weight,
        }
    }

    pub fn shape(&self) -> RuleShape {
        match self.to_word.len() {
            0 => RuleShape::Pop,
            1 => RuleShape::Swap,
            _ => RuleShape::Push,
        }
    }

    /// Rewrites `c` with this rule, if it applies.
    pub fn apply(&self, c: &Configuration) -> Option<Configuration> {
        if c.loc != self.from_loc {
            return None;
        }
        let rest = match &self.from_sym {
            Some(sym) => match c.stack.split_first() {
                Some((top, rest)) if top == sym => rest,
                _ => return None,
            },
            None => &c.stack[..],
        };
        let mut stack = Vec::with_capacity(self.to_word.len() + rest.len());
        stack.extend_from_slice(&self.to_word);
        stack.extend_from_slice(rest);
        Some(Configuration {
            loc: self.to_loc.clone(),
            stack,
        })
    }

    /// The rule without its weight, for display.
    pub fn head(&self) -> String {
        let from = self.from_sym.as_ref().map_or("eps".to_string(), |s| s.to_string());
        let word = if self.to_word.is_empty() {
            "eps".to_string()
        } else {
            self.to_word.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
        };
        format!("<{}, {}> -> <{}, {}>", self.from_loc, from, self.to_loc, word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleShape {
    Pop,
    Swap,
    Push,
}

/// `⟨loc, stack⟩` with the top of the stack first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub loc: StateId,
    pub stack: Vec<Symbol>,
}

impl Configuration {
    pub fn new(loc: &str, stack: &[&str]) -> Self {
        Configuration {
            loc: loc.into(),
            stack: stack.iter().map(|&s| s.into()).collect(),
        }
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}:", self.loc)?;
        for s in &self.stack {
            write!(f, " {s}")?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PdsError {
    #[error("rule {0} pushes more than two symbols")]
    WordTooLong(String),
    #[error("rule {0} has an ε left-hand side")]
    EpsilonHead(String),
}

/// `(P, Γ, Δ)` with weights. Locations and symbols are those mentioned by
/// the rules plus any declared explicitly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PushdownSystem<E> {
    locations: BTreeSet<StateId>,
    alphabet: BTreeSet<Symbol>,
    rules: Vec<Rule<E>>,
}

impl<E: Clone + Ord> PushdownSystem<E> {
    /// Validates the rules and merges duplicates (same head and right-hand
    /// side) by `⊕`. Rules end up sorted.
    pub fn new<A>(alg: &A, rules: Vec<Rule<E>>) -> Result<Self, PdsError>
    where
        A: FlowAlgebra<Elem = E>,
    {
        let mut merged: BTreeMap<(StateId, Option<Symbol>, StateId, Vec<Symbol>), E> = BTreeMap::new();
        for r in rules {
            if r.from_sym.is_none() {
                return Err(PdsError::EpsilonHead(r.head()));
            }
            if r.to_word.len() > 2 {
                return Err(PdsError::WordTooLong(r.head()));
            }
            let key = (r.from_loc, r.from_sym, r.to_loc, r.to_word);
            let w = match merged.remove(&key) {
                Some(prev) => alg.combine(&prev, &r.weight),
                None => r.weight,
            };
            merged.insert(key, w);
        }
        let rules: Vec<Rule<E>> = merged
            .into_iter()
            .map(|((from_loc, from_sym, to_loc, to_word), weight)| Rule {
                from_loc,
                from_sym,
                to_loc,
                to_word,
                weight,
            })
            .collect();
        let mut locations = BTreeSet::new();
        let mut alphabet = BTreeSet::new();
        for r in &rules {
            locations.insert(r.from_loc.clone());
            locations.insert(r.to_loc.clone());
            alphabet.extend(r.from_sym.iter().cloned());
            alphabet.extend(r.to_word.iter().cloned());
        }
        Ok(PushdownSystem {
            locations,
            alphabet,
            rules,
        })
    }

    /// Adds control locations that no rule mentions.
    pub fn with_locations(mut self, locations: impl IntoIterator<Item = StateId>) -> Self {
        self.locations.extend(locations);
        self
    }

    pub fn with_symbols(mut self, symbols: impl IntoIterator<Item = Symbol>) -> Self {
        self.alphabet.extend(symbols);
        self
    }
}

impl<E> PushdownSystem<E> {
    pub fn locations(&self) -> &BTreeSet<StateId> {
        &self.locations
    }

    pub fn alphabet(&self) -> &BTreeSet<Symbol> {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule<E>] {
        &self.rules
    }
}

/// Every `(r, c')` with `c ⇒_r c'`, in rule order.
pub fn step<'r, E>(rules: &'r [Rule<E>], c: &Configuration) -> Vec<(&'r Rule<E>, Configuration)> {
    rules
        .iter()
        .filter_map(|r| r.apply(c).map(|next| (r, next)))
        .collect()
}

/// Replays a rule sequence from `start`; `None` if some rule does not apply.
pub fn replay<'r, E: 'r>(
    sequence: impl IntoIterator<Item = &'r Rule<E>>,
    start: &Configuration,
) -> Option<Configuration> {
    sequence
        .into_iter()
        .try_fold(start.clone(), |c, r| r.apply(&c))
}

/// `v(σ) = f(r₁) ⊗ ⋯ ⊗ f(rₙ)`; the empty sequence weighs `1̄`.
pub fn path_weight<'r, A>(alg: &A, sequence: impl IntoIterator<Item = &'r Rule<A::Elem>>) -> A::Elem
where
    A: FlowAlgebra,
    A::Elem: 'r,
{
    sequence
        .into_iter()
        .fold(alg.one(), |acc, r| alg.extend(&acc, &r.weight))
}

/// `Δ_pre = Δ ∪ {⟨q,γ⟩ ↪ ⟨q',ε⟩ @ 1̄ | q →γ q'}`.
pub fn build_delta_pre<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    aut: &PAutomaton,
) -> Vec<Rule<A::Elem>> {
    let mut rules = pds.rules().to_vec();
    for t in aut.transitions() {
        rules.push(Rule {
            from_loc: t.src.clone(),
            from_sym: t.label.clone(),
            to_loc: t.dst.clone(),
            to_word: Vec::new(),
            weight: alg.one(),
        });
    }
    rules
}

/// `Δ_post-2`: generator rules `⟨q',ε⟩ ↪ ⟨q,γ⟩ @ 1̄` for each automaton
/// transition `q →γ q'`, push rules split through their mid-location, all
/// other rules unchanged.
pub fn build_delta_post2<A: FlowAlgebra>(
    alg: &A,
    pds: &PushdownSystem<A::Elem>,
    aut: &PAutomaton,
) -> Vec<Rule<A::Elem>> {
    let mut rules = Vec::new();
    for t in aut.transitions() {
        rules.push(Rule {
            from_loc: t.dst.clone(),
            from_sym: None,
            to_loc: t.src.clone(),
            to_word: t.label.iter().cloned().collect(),
            weight: alg.one(),
        });
    }
    let mut entries = BTreeSet::new();
    for r in pds.rules() {
        if r.shape() != RuleShape::Push {
            rules.push(r.clone());
            continue;
        }
        let (first, second) = (&r.to_word[0], &r.to_word[1]);
        let mid = mid_state(&r.to_loc, first);
        rules.push(Rule {
            from_loc: r.from_loc.clone(),
            from_sym: r.from_sym.clone(),
            to_loc: mid.clone(),
            to_word: vec![second.clone()],
            weight: r.weight.clone(),
        });
        if entries.insert((r.to_loc.clone(), first.clone())) {
            rules.push(Rule {
                from_loc: mid,
                from_sym: None,
                to_loc: r.to_loc.clone(),
                to_word: vec![first.clone()],
                weight: alg.one(),
            });
        }
    }
    rules
}
