use serde::Serialize;
use serde_json::Value;

use qpmc_core::rational::{approx, parse_rational};

/// Final status of a command. The process exit code is a function of this alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
    Pass,
    Fail,
    Found,
    None,
    InputError,
    Disagreement,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Holds | Status::Pass | Status::Found => 0,
            Status::Fails | Status::Fail | Status::None => 1,
            Status::Unknown => 2,
            Status::InputError => 3,
            Status::Disagreement => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Holds => "HOLDS",
            Status::Fails => "FAILS",
            Status::Unknown => "UNKNOWN",
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Found => "FOUND",
            Status::None => "NONE",
            Status::InputError => "INPUT_ERROR",
            Status::Disagreement => "DISAGREEMENT",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Probability {
    pub label: String,
    /// Exact `p/q`, or `[lo, hi]` when the horizon ran out.
    pub value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the inputs.
    pub digest: Option<String>,
    pub verdict: Status,
    pub probabilities: Vec<Probability>,
    pub horizon: Option<u64>,
    pub quiescent: Option<bool>,
    pub agreement: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub details: Value,
}

impl RunReport {
    pub fn new(command: &str, verdict: Status) -> Self {
        Self {
            command: command.to_string(),
            digest: None,
            verdict,
            probabilities: Vec::new(),
            horizon: None,
            quiescent: None,
            agreement: None,
            timing_ms: None,
            warnings: Vec::new(),
            error: None,
            details: Value::Null,
        }
    }

    pub fn input_error(command: &str, message: String) -> Self {
        let mut r = Self::new(command, Status::InputError);
        r.error = Some(message);
        r
    }

    pub fn to_json(&self, with_approx: bool) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if with_approx {
            add_approx(&mut v);
        }
        serde_json::to_string_pretty(&v).expect("value serializes")
    }
}

const PROBABILITY_KEYS: [&str; 6] = [
    "value",
    "upper_probability",
    "lower_probability",
    "sum",
    "formula_interval",
    "interval",
];

/// Decimal rendering of `1/3` or `[1/4, 1/2]`.
pub fn approx_text(exact: &str) -> Option<String> {
    let one = |s: &str| parse_rational(s.trim()).ok().map(|r| format!("{:.6}", approx(&r)));
    if let Some(inner) = exact.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
        let (lo, hi) = inner.split_once(',')?;
        return Some(format!("[{}, {}]", one(lo)?, one(hi)?));
    }
    one(exact)
}

fn add_approx(v: &mut Value) {
    match v {
        Value::Object(map) => {
            let extra: Vec<(String, String)> = map
                .iter()
                .filter(|(k, _)| PROBABILITY_KEYS.contains(&k.as_str()))
                .filter_map(|(k, val)| Some((format!("{k}_approx"), approx_text(val.as_str()?)?)))
                .collect();
            for val in map.values_mut() {
                add_approx(val);
            }
            for (k, a) in extra {
                map.insert(k, Value::String(a));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(add_approx),
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approx_columns() {
        assert_eq!(approx_text("15/16").as_deref(), Some("0.937500"));
        assert_eq!(approx_text("[0, 1/2]").as_deref(), Some("[0.000000, 0.500000]"));
        assert_eq!(approx_text("AAA"), None);
    }

    #[test]
    fn exit_codes_follow_the_verdict() {
        assert_eq!(Status::Holds.exit_code(), 0);
        assert_eq!(Status::None.exit_code(), 1);
        assert_eq!(Status::Unknown.exit_code(), 2);
        assert_eq!(Status::InputError.exit_code(), 3);
        assert_eq!(Status::Disagreement.exit_code(), 4);
    }

    #[test]
    fn approx_is_added_next_to_exact_values() {
        let mut r = RunReport::new("check", Status::Holds);
        r.probabilities.push(Probability {
            label: "P".into(),
            value: "1/4".into(),
        });
        let text = r.to_json(true);
        assert!(text.contains("\"value_approx\": \"0.250000\""), "{text}");
        assert!(!r.to_json(false).contains("approx"));
    }
}
