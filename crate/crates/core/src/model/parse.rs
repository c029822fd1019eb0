//! JSON model files.
//!
//! ```json
//! {
//!   "initial": 0,
//!   "states": [
//!     { "owner": "max", "actions": [ { "label": "a", "to": { "0": "0.98", "1": "1/100", "2": "1/100" } } ] },
//!     { "owner": "max", "target": true, "actions": [ { "label": "loop", "to": { "1": "1" } } ] },
//!     { "owner": "max", "actions": [ { "label": "loop", "to": { "2": "1" } } ] }
//!   ]
//! }
//! ```
//!
//! Probabilities must be strings, either decimal (`"0.25"`, `"1e-2"`) or
//! fractions (`"1/3"`), and are read as exact rationals. Bare JSON numbers are
//! rejected because they have already gone through binary floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Map;

use super::{validate, Action, Game, Player, State, Transition};
use crate::error::ModelError;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<usize>,
    states: Vec<RawState>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    owner: RawOwner,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    target: bool,
    actions: Vec<RawAction>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawOwner {
    Max,
    Min,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAction {
    label: String,
    to: Map<String, serde_json::Value>,
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<Game, ModelError> {
    let raw: RawGame = serde_json::from_str(text)?;
    let mut states = Vec::with_capacity(raw.states.len());
    for (s, rs) in raw.states.into_iter().enumerate() {
        let mut actions = Vec::with_capacity(rs.actions.len());
        for ra in rs.actions {
            let literal_error = |message: String| ModelError::Literal {
                state: s,
                action: ra.label.clone(),
                message,
            };
            let mut transitions = Vec::with_capacity(ra.to.len());
            for (key, value) in &ra.to {
                let to: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| literal_error(format!("successor key {key:?} is not a state index")))?;
                let literal = match value {
                    serde_json::Value::String(text) => text,
                    other => {
                        return Err(literal_error(format!(
                            "probability for successor {to} must be a decimal or fraction string, found {other}"
                        )))
                    }
                };
                let exact = parse_probability(literal)
                    .map_err(|e| literal_error(format!("successor {to}: {e}")))?;
                transitions.push(Transition::new(to, exact));
            }
            transitions.sort_by_key(|t| t.to);
            actions.push(Action {
                label: ra.label,
                transitions,
            });
        }
        states.push(State {
            owner: match rs.owner {
                RawOwner::Max => Player::Max,
                RawOwner::Min => Player::Min,
            },
            target: rs.target,
            actions,
        });
    }
    let game = Game {
        states,
        initial: raw.initial,
    };
    let violations = validate(&game);
    if violations.is_empty() {
        Ok(game)
    } else {
        Err(ModelError::Invalid(violations))
    }
}

/// Writes `game` in the model file format, probabilities as exact fractions.
pub fn serialize_model(game: &Game) -> String {
    let raw = RawGame {
        initial: game.initial,
        states: game
            .states
            .iter()
            .map(|st| RawState {
                owner: match st.owner {
                    Player::Max => RawOwner::Max,
                    Player::Min => RawOwner::Min,
                },
                target: st.target,
                actions: st
                    .actions
                    .iter()
                    .map(|a| RawAction {
                        label: a.label.clone(),
                        to: a
                            .transitions
                            .iter()
                            .map(|t| (t.to.to_string(), serde_json::Value::String(t.exact.to_string())))
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("model serialization cannot fail")
}

/// Reads `"0.25"`, `"1e-3"`, `"3"` or `"1/3"` as an exact rational.
pub fn parse_probability(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num = parse_decimal(num.trim())?;
        let den = parse_decimal(den.trim())?;
        if den.is_zero() {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(num / den);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Result<BigRational, String> {
    let bad = || format!("malformed probability literal {text:?}");
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => {
            let exp: i32 = body[i + 1..].parse().map_err(|_| bad())?;
            (&body[..i], exp)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    debug_assert!(!negative || !value.is_positive());
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ratio;

    #[test]
    fn decimal_and_fraction_literals_are_exact() {
        assert_eq!(parse_probability("0.98").unwrap(), ratio(49, 50));
        assert_eq!(parse_probability("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_probability("1").unwrap(), ratio(1, 1));
        assert_eq!(parse_probability(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_probability("2.5e-1").unwrap(), ratio(1, 4));
        assert_eq!(parse_probability(" 0.2 / 0.4 ").unwrap(), ratio(1, 2));
        assert!(parse_probability("abc").is_err());
        assert!(parse_probability("1/0").is_err());
        assert!(parse_probability("").is_err());
        assert!(parse_probability("0.5.1").is_err());
    }

    #[test]
    fn smallest_legal_game() {
        let game = parse_model(
            r#"{"states": [{"owner": "max", "target": true, "actions": [{"label": "a", "to": {"0": "1"}}]}]}"#,
        )
        .unwrap();
        assert_eq!(game.len(), 1);
        assert_eq!(game.targets().into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn bad_sum_is_a_semantic_error() {
        let err = parse_model(
            r#"{"states": [
                {"owner": "max", "actions": [{"label": "a", "to": {"0": "0.5", "1": "0.49"}}]},
                {"owner": "max", "target": true, "actions": [{"label": "a", "to": {"1": "1"}}]}
            ]}"#,
        )
        .unwrap_err();
        match err {
            ModelError::Invalid(v) => assert!(v[0].contains("distribution sum"), "{v:?}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_probabilities_are_rejected() {
        let err = parse_model(r#"{"states": [{"owner": "max", "actions": [{"label": "a", "to": {"0": 1.0}}]}]}"#)
            .unwrap_err();
        assert!(matches!(err, ModelError::Literal { state: 0, .. }), "{err}");
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_model("{\n  \"states\": [\n   oops ]}").unwrap_err();
        match err {
            ModelError::Syntax { line, column, .. } => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_successor_spelled_twice_is_caught() {
        let err = parse_model(
            r#"{"states": [{"owner": "max", "target": true, "actions": [{"label": "a", "to": {"0": "1/2", "00": "1/2"}}]}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate successor"), "{err}");
    }

    #[test]
    fn dangling_successor_is_reported() {
        let err = parse_model(r#"{"states": [{"owner": "min", "actions": [{"label": "x", "to": {"4": "1"}}]}]}"#)
            .unwrap_err();
        assert!(err.to_string().contains("state 0 action x: successor 4 out of range"), "{err}");
    }
}
