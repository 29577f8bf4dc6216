use std::fmt;

use super::{AlgebraError, Carrier, FlowAlgebra};

/// Nonnegative integers extended with `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MinPlus {
    Finite(u64),
    Infinity,
}

impl fmt::Display for MinPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinPlus::Finite(n) => write!(f, "{n}"),
            MinPlus::Infinity => f.write_str("inf"),
        }
    }
}

/// Shortest-path weights: `⊕ = min`, `⊗ = +`, `0̄ = ∞`, `1̄ = 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MinPlusAlgebra;

pub fn minplus_algebra() -> MinPlusAlgebra {
    MinPlusAlgebra
}

impl FlowAlgebra for MinPlusAlgebra {
    type Elem = MinPlus;

    fn name(&self) -> &'static str {
        "minplus"
    }

    fn header(&self) -> String {
        "algebra minplus".to_string()
    }

    fn zero(&self) -> MinPlus {
        MinPlus::Infinity
    }

    fn one(&self) -> MinPlus {
        MinPlus::Finite(0)
    }

    fn combine(&self, a: &MinPlus, b: &MinPlus) -> MinPlus {
        *a.min(b)
    }

    fn extend(&self, a: &MinPlus, b: &MinPlus) -> MinPlus {
        match (a, b) {
            (MinPlus::Finite(x), MinPlus::Finite(y)) => MinPlus::Finite(x.saturating_add(*y)),
            _ => MinPlus::Infinity,
        }
    }

    fn render(&self, a: &MinPlus) -> String {
        a.to_string()
    }

    fn parse(&self, text: &str) -> Result<MinPlus, AlgebraError> {
        let text = text.trim();
        if text == "inf" {
            return Ok(MinPlus::Infinity);
        }
        if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(n) = text.parse() {
                return Ok(MinPlus::Finite(n));
            }
        }
        Err(AlgebraError::BadLiteral {
            algebra: "minplus",
            text: text.to_string(),
            reason: "expected a decimal integer or `inf`".into(),
        })
    }

    fn carrier(&self) -> Carrier<MinPlus> {
        Carrier::Abstract
    }
}
