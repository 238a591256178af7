use std::fmt::Write as _;

use thiserror::Error;

use super::{Head, Qpds, QpdsBuilder, StateId};
use crate::amplitude::Amplitude;
use crate::rational::{format_rational, parse_rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct SystemParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> SystemParseError {
    SystemParseError {
        line,
        column,
        message: message.into(),
    }
}

/// Column (1-based, in characters) of `needle` inside `line`, or 1.
fn col(line: &str, needle: &str) -> usize {
    line.find(needle)
        .map(|b| line[..b].chars().count() + 1)
        .unwrap_or(1)
}

/// Parses the line-oriented `qpds v1` format.
pub fn parse_system(text: &str) -> Result<Qpds, SystemParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty());

    let Some((hl, header)) = lines.next() else {
        return Err(err(1, 1, "empty input, expected `qpds v1`"));
    };
    if header.split_whitespace().collect::<Vec<_>>() != ["qpds", "v1"] {
        return Err(err(hl, 1, "expected header `qpds v1`"));
    }

    let mut builder: Option<QpdsBuilder> = None;
    let mut saw_start = false;
    let mut last_line = hl;
    for (ln, line) in lines {
        last_line = ln;
        let Some((key, value)) = line.split_once(':') else {
            return Err(err(ln, 1, "expected `key: value`"));
        };
        let key = key.trim();
        let vcol = line[..key.len()].chars().count() + 2;
        if key == "states" {
            if builder.is_some() {
                return Err(err(ln, 1, "`states:` must precede every other entry"));
            }
            let names: Vec<&str> = value.split_whitespace().collect();
            if names.is_empty() {
                return Err(err(ln, vcol, "`states:` needs at least one state"));
            }
            builder = Some(QpdsBuilder::with_states(&names).map_err(|e| err(ln, vcol, e.to_string()))?);
            continue;
        }
        let b = builder.get_or_insert_with(QpdsBuilder::stateless);
        let stateful = !b.sys.stateless;
        match key {
            "stack" => {
                for s in value.split_whitespace() {
                    b.symbol(s).map_err(|e| err(ln, col(line, s), e.to_string()))?;
                }
            }
            "start" => {
                if saw_start {
                    return Err(err(ln, 1, "duplicate `start:`"));
                }
                saw_start = true;
                let mut toks: Vec<&str> = value.split_whitespace().collect();
                let control = if stateful {
                    if toks.is_empty() {
                        return Err(err(ln, vcol, "`start:` needs a control state"));
                    }
                    Some(toks.remove(0))
                } else {
                    None
                };
                if toks == ["-"] {
                    toks.clear();
                }
                if toks.is_empty() && !stateful && value.trim().is_empty() {
                    return Err(err(ln, vcol, "`start:` needs a stack (use `-` for empty)"));
                }
                b.start(control, &toks).map_err(|e| err(ln, vcol, e.to_string()))?;
            }
            "rule" => parse_rule(b, value, line, ln, stateful)?,
            "label" => {
                let Some((prop, heads)) = value.split_once("=>") else {
                    return Err(err(ln, vcol, "expected `label: NAME => HEAD ...`"));
                };
                let heads: Vec<&str> = heads.split_whitespace().collect();
                if heads.is_empty() {
                    return Err(err(ln, col(line, "=>") + 2, "label needs at least one head"));
                }
                b.label(prop.trim(), &heads)
                    .map_err(|e| err(ln, vcol, e.to_string()))?;
            }
            other => return Err(err(ln, 1, format!("unknown key `{other}`"))),
        }
    }
    if !saw_start {
        return Err(err(last_line, 1, "missing `start:` entry"));
    }
    Ok(builder.expect("start implies a builder").build())
}

fn parse_rule(
    b: &mut QpdsBuilder,
    value: &str,
    line: &str,
    ln: usize,
    stateful: bool,
) -> Result<(), SystemParseError> {
    let Some((lhs, rest)) = value.split_once("->") else {
        return Err(err(ln, col(line, "rule") + 5, "expected `->` in rule"));
    };
    let Some((rhs, amp)) = rest.split_once('@') else {
        return Err(err(ln, line.chars().count() + 1, "expected `@ <squared modulus>`"));
    };
    let (mod2_text, phase_text) = match amp.split_once('%') {
        Some((m, p)) => (m.trim(), Some(p.trim())),
        None => (amp.trim(), None),
    };
    let mod2 = parse_rational(mod2_text).map_err(|e| err(ln, col(line, "@") + 1, e.to_string()))?;
    let phase = match phase_text {
        Some(p) => p
            .parse::<f64>()
            .map_err(|_| err(ln, col(line, "%") + 1, format!("invalid phase `{p}`")))?,
        None => std::f64::consts::TAU,
    };
    let amp = Amplitude::new(mod2, phase).map_err(|e| err(ln, col(line, "@") + 1, e.to_string()))?;

    let mut lhs: Vec<&str> = lhs.split_whitespace().collect();
    let mut rhs: Vec<&str> = rhs.split_whitespace().collect();
    let (ls, rs) = if stateful {
        if lhs.len() != 2 || rhs.is_empty() {
            return Err(err(ln, col(line, "rule") + 5, "stateful rule must read `p X -> q ...`"));
        }
        (Some(lhs.remove(0)), Some(rhs.remove(0)))
    } else {
        (None, None)
    };
    if lhs.len() != 1 {
        return Err(err(ln, col(line, "rule") + 5, "rule needs exactly one left-hand symbol"));
    }
    if rhs.is_empty() {
        return Err(err(ln, col(line, "->") + 2, "empty right-hand side (use `-` for ε)"));
    }
    if rhs == ["-"] {
        rhs.clear();
    }
    b.rule_full(ls, lhs[0], rs, &rhs, amp)
        .map_err(|e| err(ln, col(line, "->"), e.to_string()))?;
    Ok(())
}

/// Canonical text of a system; `parse_system` reads it back to an equal system.
pub fn render_system(sys: &Qpds) -> String {
    let mut out = String::from("qpds v1\n");
    if !sys.stateless {
        let _ = writeln!(out, "states: {}", sys.control_states.join(" "));
    }
    let _ = writeln!(out, "stack: {}", sys.stack_alphabet.join(" "));
    let _ = writeln!(out, "start: {}", sys.render_configuration(&sys.start));
    let state_prefix = |q: StateId| {
        if sys.stateless {
            String::new()
        } else {
            format!("{} ", sys.state_name(q))
        }
    };
    for r in &sys.rules {
        let rhs = if r.rhs.is_empty() {
            "-".to_string()
        } else {
            r.rhs
                .iter()
                .map(|s| sys.symbol_name(*s))
                .collect::<Vec<_>>()
                .join(" ")
        };
        // the identity phase is the parser default
        let phase = if r.amp.phase() == std::f64::consts::TAU {
            String::new()
        } else {
            format!(" % {}", r.amp.phase())
        };
        let _ = writeln!(
            out,
            "rule: {}{} -> {}{} @ {}{phase}",
            state_prefix(r.lhs_state),
            sys.symbol_name(r.lhs_symbol),
            state_prefix(r.rhs_state),
            rhs,
            format_rational(r.amp.mod2()),
        );
    }
    for (prop, heads) in &sys.assignment.heads {
        let heads: Vec<String> = heads
            .iter()
            .map(|h| match (sys.stateless, h) {
                (true, Head::Control(_)) => "-".to_string(),
                _ => sys.head_name(*h),
            })
            .collect();
        let _ = writeln!(out, "label: {prop} => {}", heads.join(" "));
    }
    out
}
