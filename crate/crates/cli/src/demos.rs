//! Built-in scenarios.

use crate::error::CliError;
use crate::scenario::Scenario;

pub const DEMOS: [(&str, &str); 5] = [
    ("circle", include_str!("../scenarios/circle.toml")),
    ("damped", include_str!("../scenarios/damped.toml")),
    ("periodic-2-3", include_str!("../scenarios/periodic-2-3.toml")),
    ("similarity", include_str!("../scenarios/similarity.toml")),
    ("pair", include_str!("../scenarios/pair.toml")),
];

pub fn names() -> Vec<&'static str> {
    DEMOS.iter().map(|(n, _)| *n).collect()
}

pub fn demo(name: &str) -> Result<Scenario, CliError> {
    let (_, text) = DEMOS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::validation("demo", format!("unknown demo {name:?}; expected one of {}", names().join(", ")))
    })?;
    Scenario::from_toml(text, name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_parses() {
        for name in names() {
            let s = demo(name).unwrap();
            assert_eq!(s.name, name);
        }
    }

    #[test]
    fn unknown_demo() {
        assert_eq!(demo("spiral").unwrap_err().exit_code(), 2);
    }
}
