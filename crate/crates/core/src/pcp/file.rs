//! Line-oriented `pcp v1` format.

use thiserror::Error;

use super::{word_from_str, Letter, PcpError, PcpInstance, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct PcpParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> PcpParseError {
    PcpParseError {
        line,
        column,
        message: message.into(),
    }
}

pub fn parse_pcp(text: &str) -> Result<PcpInstance, PcpParseError> {
    let mut header_seen = false;
    let mut alphabet: Option<Vec<Letter>> = None;
    let mut pairs: Vec<(Word, Word)> = Vec::new();
    let mut bound = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let line = line.trim();
        if !header_seen {
            if line.split_whitespace().collect::<Vec<_>>() != ["pcp", "v1"] {
                return Err(err(line_no, indent + 1, "expected header `pcp v1`"));
            }
            header_seen = true;
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(err(line_no, indent + 1, "expected `key: value`"));
        };
        let value_col = indent + key.len() + 2;
        let tokens: Vec<&str> = value.split_whitespace().collect();
        match key.trim() {
            "alphabet" => {
                if alphabet.is_some() {
                    return Err(err(line_no, indent + 1, "duplicate `alphabet`"));
                }
                let mut letters = Vec::new();
                for t in &tokens {
                    match *t {
                        "A" => letters.push(Letter::A),
                        "B" => letters.push(Letter::B),
                        other => {
                            return Err(err(
                                line_no,
                                value_col,
                                format!("alphabet letter `{other}` is not A or B"),
                            ))
                        }
                    }
                }
                if letters.is_empty() {
                    return Err(err(line_no, value_col, "empty alphabet"));
                }
                alphabet = Some(letters);
            }
            "pair" => {
                if tokens.len() != 2 {
                    return Err(err(line_no, value_col, "expected two words"));
                }
                let allowed = alphabet.clone().unwrap_or_else(|| vec![Letter::A, Letter::B]);
                let mut ws = Vec::with_capacity(2);
                for t in &tokens {
                    let w = word_from_str(t)
                        .filter(|w| w.iter().all(|l| allowed.contains(l)))
                        .ok_or_else(|| {
                            err(line_no, value_col, format!("word `{t}` is not over the alphabet"))
                        })?;
                    ws.push(w);
                }
                let v = ws.pop().unwrap();
                let u = ws.pop().unwrap();
                pairs.push((u, v));
            }
            "k" => {
                if bound.is_some() {
                    return Err(err(line_no, indent + 1, "duplicate `k`"));
                }
                let [t] = tokens.as_slice() else {
                    return Err(err(line_no, value_col, "expected one integer"));
                };
                let k: usize = t
                    .parse()
                    .map_err(|_| err(line_no, value_col, format!("invalid bound `{t}`")))?;
                bound = Some(k);
            }
            other => return Err(err(line_no, indent + 1, format!("unknown key `{other}`"))),
        }
    }
    if !header_seen {
        return Err(err(last_line.max(1), 1, "missing header `pcp v1`"));
    }
    PcpInstance::new(pairs, bound).map_err(|e| {
        let msg = match e {
            PcpError::NoPairs => "no `pair` lines".to_string(),
            other => other.to_string(),
        };
        err(last_line.max(1), 1, msg)
    })
}

/// Canonical rendering; `parse_pcp(&render_pcp(p)) == Ok(p)`.
pub fn render_pcp(instance: &PcpInstance) -> String {
    let mut out = String::from("pcp v1\nalphabet: A B\n");
    for (u, v) in instance.pairs() {
        let w = |w: &Word| {
            if w.is_empty() {
                "-".to_string()
            } else {
                w.iter().map(|l| l.as_char()).collect()
            }
        };
        out.push_str(&format!("pair: {} {}\n", w(u), w(v)));
    }
    if let Some(k) = instance.bound() {
        out.push_str(&format!("k: {k}\n"));
    }
    out
}
