use super::{parse_brace_set, render_set, AlgebraError, Carrier, FlowAlgebra};

/// Largest domain a bitmask element can hold.
pub const MAX_DOMAIN: usize = 64;
/// Domains up to this size expose their `4^|D|` elements explicitly.
pub const MAX_ENUMERATED_DOMAIN: usize = 8;

/// A transfer function `l ↦ (l \ kill) ∪ gen`, stored as the raw pair.
///
/// Pairs are not normalized: `kill ∩ gen` may be nonempty, and two pairs
/// denoting the same function are still distinct elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KillGen {
    pub kill: u64,
    pub gen: u64,
}

impl KillGen {
    pub fn new(kill: u64, gen: u64) -> Self {
        KillGen { kill, gen }
    }

    /// Applies the transfer function to a fact set.
    pub fn apply(&self, facts: u64) -> u64 {
        (facts & !self.kill) | self.gen
    }
}

/// Bitvector kill/gen analyses over a finite fact domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KillGenAlgebra {
    facts: Vec<String>,
    full: u64,
}

pub fn killgen_algebra<I, S>(domain: I) -> Result<KillGenAlgebra, AlgebraError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut facts: Vec<String> = domain.into_iter().map(Into::into).collect();
    if facts.is_empty() {
        return Err(AlgebraError::EmptyDomain);
    }
    facts.sort();
    if let Some(w) = facts.windows(2).find(|w| w[0] == w[1]) {
        return Err(AlgebraError::DuplicateFact(w[0].clone()));
    }
    if facts.len() > MAX_DOMAIN {
        return Err(AlgebraError::DomainTooLarge(facts.len()));
    }
    let full = if facts.len() == 64 {
        u64::MAX
    } else {
        (1u64 << facts.len()) - 1
    };
    Ok(KillGenAlgebra { facts, full })
}

impl KillGenAlgebra {
    /// Facts in canonical (sorted) order; bit `i` stands for `facts()[i]`.
    pub fn facts(&self) -> &[String] {
        &self.facts
    }

    pub fn full_set(&self) -> u64 {
        self.full
    }

    pub fn fact_bit(&self, fact: &str) -> Result<u64, AlgebraError> {
        self.facts
            .binary_search_by(|f| f.as_str().cmp(fact))
            .map(|i| 1u64 << i)
            .map_err(|_| AlgebraError::UnknownFact(fact.to_string()))
    }

    pub fn set_of<'a>(&self, facts: impl IntoIterator<Item = &'a str>) -> Result<u64, AlgebraError> {
        facts
            .into_iter()
            .try_fold(0u64, |acc, f| Ok(acc | self.fact_bit(f)?))
    }

    pub fn element<'a>(
        &self,
        kill: impl IntoIterator<Item = &'a str>,
        gen: impl IntoIterator<Item = &'a str>,
    ) -> Result<KillGen, AlgebraError> {
        Ok(KillGen::new(self.set_of(kill)?, self.set_of(gen)?))
    }

    pub fn render_set(&self, bits: u64) -> String {
        render_set(
            self.facts
                .iter()
                .enumerate()
                .filter(|(i, _)| bits & (1u64 << i) != 0)
                .map(|(_, f)| f.as_str()),
        )
    }

    pub fn parse_set(&self, text: &str) -> Result<u64, AlgebraError> {
        let members = parse_brace_set(text).ok_or_else(|| AlgebraError::BadLiteral {
            algebra: "killgen",
            text: text.to_string(),
            reason: "expected a braced set like {a,b}".into(),
        })?;
        self.set_of(members)
    }
}

impl FlowAlgebra for KillGenAlgebra {
    type Elem = KillGen;

    fn name(&self) -> &'static str {
        "killgen"
    }

    fn header(&self) -> String {
        format!(
            "algebra killgen domain={}",
            render_set(self.facts.iter().map(String::as_str))
        )
    }

    fn zero(&self) -> KillGen {
        KillGen::new(self.full, 0)
    }

    fn one(&self) -> KillGen {
        KillGen::new(0, 0)
    }

    fn combine(&self, a: &KillGen, b: &KillGen) -> KillGen {
        KillGen::new(a.kill & b.kill, a.gen | b.gen)
    }

    fn extend(&self, a: &KillGen, b: &KillGen) -> KillGen {
        KillGen::new(a.kill | b.kill, (a.gen & !b.kill) | b.gen)
    }

    fn render(&self, a: &KillGen) -> String {
        format!("kill={} gen={}", self.render_set(a.kill), self.render_set(a.gen))
    }

    fn parse(&self, text: &str) -> Result<KillGen, AlgebraError> {
        let bad = |reason: &str| AlgebraError::BadLiteral {
            algebra: "killgen",
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let rest = text
            .trim()
            .strip_prefix("kill=")
            .ok_or_else(|| bad("expected `kill={...} gen={...}`"))?;
        let close = rest.find('}').ok_or_else(|| bad("unterminated kill set"))?;
        let (kill, rest) = rest.split_at(close + 1);
        let gen = rest
            .trim_start()
            .strip_prefix("gen=")
            .ok_or_else(|| bad("expected `gen={...}` after the kill set"))?;
        Ok(KillGen::new(self.parse_set(kill)?, self.parse_set(gen)?))
    }

    fn carrier(&self) -> Carrier<KillGen> {
        if self.facts.len() > MAX_ENUMERATED_DOMAIN {
            return Carrier::Abstract;
        }
        let subsets = 1u64 << self.facts.len();
        Carrier::Explicit(
            (0..subsets)
                .flat_map(|kill| (0..subsets).map(move |gen| KillGen::new(kill, gen)))
                .collect(),
        )
    }
}
