//! Flow algebras: the weight domains attached to pushdown rules.
//!
//! A flow algebra `(F, ⊕, ⊗, 0̄, 1̄)` asks for an idempotent commutative
//! monoid `(F, ⊕, 0̄)`, a monoid `(F, ⊗, 1̄)` and monotonicity of `⊗` in both
//! arguments with respect to the order induced by `⊕`. Distributivity and
//! annihilation by `0̄` are optional; [`check_laws`] reports which of them an
//! instance satisfies.

use std::fmt;
use std::hash::Hash;

mod boolean;
mod killgen;
mod laws;
mod minplus;
mod tabulated;

pub use boolean::{boolean_algebra, BoolAlgebra};
pub use killgen::{killgen_algebra, KillGen, KillGenAlgebra, MAX_DOMAIN, MAX_ENUMERATED_DOMAIN};
pub use laws::{check_laws, check_laws_with_budget, Counterexample, Law, LawBudget, LawReport, Verdict};
pub use minplus::{minplus_algebra, MinPlus, MinPlusAlgebra};
pub(crate) use tabulated::parse_lattice_params;
pub use tabulated::{
    tabulated_framework_algebra, tabulated_framework_algebra_with_bound, Lattice, Table,
    TabulatedAlgebra, DEFAULT_CLOSURE_BOUND,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("kill/gen domain must not be empty")]
    EmptyDomain,
    #[error("kill/gen domain has {0} facts; at most {max} are supported", max = MAX_DOMAIN)]
    DomainTooLarge(usize),
    #[error("duplicate domain fact `{0}`")]
    DuplicateFact(String),
    #[error("`{0}` is not in the domain")]
    UnknownFact(String),
    #[error("cannot parse `{text}` as a {algebra} element: {reason}")]
    BadLiteral {
        algebra: &'static str,
        text: String,
        reason: String,
    },
    #[error("function {function} is not monotone: {lo} ⊑ {hi} but f({lo}) = {f_lo} ⋢ f({hi}) = {f_hi}")]
    NonMonotoneFunction {
        function: String,
        lo: String,
        hi: String,
        f_lo: String,
        f_hi: String,
    },
    #[error("closure of the function space exceeds {bound} elements")]
    ClosureExplosion { bound: usize },
    #[error("malformed lattice: {0}")]
    BadLattice(String),
    #[error("carrier of {0} is not enumerable; samples are required")]
    NoSamplesForAbstractCarrier(String),
}

/// How the elements of an algebra are known.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier<E> {
    /// Every element, in canonical order.
    Explicit(Vec<E>),
    /// Elements only arise from literals and operations.
    Abstract,
}

/// A flow algebra instance.
///
/// Element equality is canonical: two elements compare equal exactly when
/// their rendered forms are identical, so `Eq` on `Elem` is what fixpoint
/// detection relies on.
pub trait FlowAlgebra {
    type Elem: Clone + Eq + Ord + Hash + fmt::Debug;

    /// Name used in file headers.
    fn name(&self) -> &'static str;

    /// Full header line, parameters included (e.g. `algebra killgen domain={a,b}`).
    fn header(&self) -> String;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn combine(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn extend(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn render(&self, a: &Self::Elem) -> String;
    fn parse(&self, text: &str) -> Result<Self::Elem, AlgebraError>;

    fn carrier(&self) -> Carrier<Self::Elem>;

    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        induced_leq(self, a, b)
    }
}

/// `a ⊑ b` iff `a ⊕ b = b`.
pub fn induced_leq<A: FlowAlgebra + ?Sized>(alg: &A, a: &A::Elem, b: &A::Elem) -> bool {
    alg.combine(a, b) == *b
}

/// `0̄ ⊕ e₁ ⊕ … ⊕ eₙ`.
pub fn combine_all<'e, A, I>(alg: &A, elems: I) -> A::Elem
where
    A: FlowAlgebra + ?Sized,
    A::Elem: 'e,
    I: IntoIterator<Item = &'e A::Elem>,
{
    elems
        .into_iter()
        .fold(alg.zero(), |acc, e| alg.combine(&acc, e))
}

/// `1̄ ⊗ e₁ ⊗ … ⊗ eₙ`, left to right.
pub fn extend_all<'e, A, I>(alg: &A, elems: I) -> A::Elem
where
    A: FlowAlgebra + ?Sized,
    A::Elem: 'e,
    I: IntoIterator<Item = &'e A::Elem>,
{
    elems
        .into_iter()
        .fold(alg.one(), |acc, e| alg.extend(&acc, e))
}

/// Splits `{a, b ,c}` into its trimmed members. `{}` yields an empty list.
pub(crate) fn parse_brace_set(text: &str) -> Option<Vec<&str>> {
    let inner = text.trim().strip_prefix('{')?.strip_suffix('}')?.trim();
    if inner.is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|s| Some(s.trim())).collect()
}

pub(crate) fn render_set<'a>(items: impl IntoIterator<Item = &'a str>) -> String {
    let items: Vec<&str> = items.into_iter().collect();
    format!("{{{}}}", items.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brace_sets() {
        assert_eq!(parse_brace_set("{}"), Some(vec![]));
        assert_eq!(parse_brace_set(" { a, b ,c } "), Some(vec!["a", "b", "c"]));
        assert_eq!(parse_brace_set("a,b"), None);
        assert_eq!(render_set(["x", "y"]), "{x,y}");
    }

    #[test]
    fn folds_start_at_neutral_elements() {
        let alg = minplus_algebra();
        assert_eq!(combine_all(&alg, []), alg.zero());
        assert_eq!(extend_all(&alg, []), alg.one());
        let xs = [MinPlus::Finite(3), MinPlus::Finite(5)];
        assert_eq!(combine_all(&alg, &xs), MinPlus::Finite(3));
        assert_eq!(extend_all(&alg, &xs), MinPlus::Finite(8));
    }
}
