//! Operator and problem files shipped with the library.

pub const FIXTURE_NAMES: [&str; 6] = ["div2", "curl2-m1", "curl2-m2", "sys4", "maxwell3", "circle"];

/// Text of a bundled fixture file.
pub fn fixture(name: &str) -> Option<&'static str> {
    Some(match name {
        "div2" => include_str!("../../fixtures/div2.json"),
        "curl2-m1" => include_str!("../../fixtures/curl2-m1.json"),
        "curl2-m2" => include_str!("../../fixtures/curl2-m2.json"),
        "sys4" => include_str!("../../fixtures/sys4.json"),
        "maxwell3" => include_str!("../../fixtures/maxwell3.json"),
        "circle" => include_str!("../../fixtures/circle.json"),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{from_json, OperatorFile, ProblemFile};
    use crate::operator::builtin;

    #[test]
    fn operator_fixtures_match_builtins() {
        for name in &FIXTURE_NAMES[..5] {
            let op = from_json::<OperatorFile>(fixture(name).unwrap()).unwrap().to_operator().unwrap();
            assert_eq!(op, builtin(name).unwrap(), "{name}");
        }
        let div2 = from_json::<OperatorFile>(fixture("div2").unwrap()).unwrap();
        assert_eq!((div2.n, div2.d, div2.m), (2, 2, 1));
    }

    #[test]
    fn circle_problem_loads() {
        let p = from_json::<ProblemFile>(fixture("circle").unwrap()).unwrap().to_problem().unwrap();
        assert_eq!(p.xi.as_slice(), &[0.5, 0.0]);
        assert!(fixture("nope").is_none());
    }
}
