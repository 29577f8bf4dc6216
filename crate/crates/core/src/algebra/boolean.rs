use super::{AlgebraError, Carrier, FlowAlgebra};

/// Plain reachability: `true` means "reachable".
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BoolAlgebra;

pub fn boolean_algebra() -> BoolAlgebra {
    BoolAlgebra
}

impl FlowAlgebra for BoolAlgebra {
    type Elem = bool;

    fn name(&self) -> &'static str {
        "bool"
    }

    fn header(&self) -> String {
        "algebra bool".to_string()
    }

    fn zero(&self) -> bool {
        false
    }

    fn one(&self) -> bool {
        true
    }

    fn combine(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }

    fn extend(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }

    fn render(&self, a: &bool) -> String {
        if *a { "1" } else { "0" }.to_string()
    }

    fn parse(&self, text: &str) -> Result<bool, AlgebraError> {
        match text.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(AlgebraError::BadLiteral {
                algebra: "bool",
                text: other.to_string(),
                reason: "expected `0` or `1`".into(),
            }),
        }
    }

    fn carrier(&self) -> Carrier<bool> {
        Carrier::Explicit(vec![false, true])
    }
}
