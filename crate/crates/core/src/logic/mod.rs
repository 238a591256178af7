//! PCTL and bounded PCTL formulas.
//!
//! The AST has no derived operators: disjunction and the indexed
//! conjunctions used by the encoders are expanded into `!` / `&` by the
//! helper constructors below.

mod parse;

use std::fmt;
use std::ops::Add;

use crate::rational::{format_rational, Rational};

pub use parse::{parse_formula, parse_formula_file, parse_formula_with, Bindings, ParseError};

/// Probability comparison. Only `>` and `=` exist in the logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    Greater,
    Equal,
}

impl Comparison {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparison::Greater => ">",
            Comparison::Equal => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StateFormula {
    True,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Prob {
        cmp: Comparison,
        bound: Rational,
        path: Box<PathFormula>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PathFormula {
    Next(Box<StateFormula>),
    Until(Box<StateFormula>, Box<StateFormula>),
    BoundedUntil(Box<StateFormula>, Box<StateFormula>, u32),
}

impl StateFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        StateFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: StateFormula) -> Self {
        StateFormula::Not(Box::new(f))
    }

    pub fn and(a: StateFormula, b: StateFormula) -> Self {
        StateFormula::And(Box::new(a), Box::new(b))
    }

    /// `!( !a & !b )`.
    pub fn or(a: StateFormula, b: StateFormula) -> Self {
        Self::not(Self::and(Self::not(a), Self::not(b)))
    }

    pub fn prob(cmp: Comparison, bound: Rational, path: PathFormula) -> Self {
        StateFormula::Prob {
            cmp,
            bound,
            path: Box::new(path),
        }
    }

    /// Right-nested conjunction; `true` when empty.
    pub fn conj<I: IntoIterator<Item = StateFormula>>(items: I) -> Self {
        let mut items: Vec<_> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return StateFormula::True;
        };
        while let Some(f) = items.pop() {
            acc = Self::and(f, acc);
        }
        acc
    }

    /// Disjunction via De Morgan: `!(!a & !b & ...)`. A single item is returned as is.
    pub fn disj<I: IntoIterator<Item = StateFormula>>(items: I) -> Self {
        let items: Vec<_> = items.into_iter().collect();
        match items.len() {
            0 => Self::not(StateFormula::True),
            1 => items.into_iter().next().unwrap(),
            _ => Self::not(Self::conj(items.into_iter().map(Self::not))),
        }
    }

    /// Atomic propositions mentioned anywhere in the formula.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            StateFormula::True => {}
            StateFormula::Atom(a) => out.push(a),
            StateFormula::Not(f) => f.collect_atoms(out),
            StateFormula::And(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            StateFormula::Prob { path, .. } => match path.as_ref() {
                PathFormula::Next(f) => f.collect_atoms(out),
                PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
                    a.collect_atoms(out);
                    b.collect_atoms(out);
                }
            },
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            StateFormula::True | StateFormula::Atom(_) => 1,
            StateFormula::Not(f) => 1 + f.depth(),
            StateFormula::And(a, b) => 1 + a.depth().max(b.depth()),
            StateFormula::Prob { path, .. } => 1 + path.depth(),
        }
    }
}

impl PathFormula {
    pub fn next(f: StateFormula) -> Self {
        PathFormula::Next(Box::new(f))
    }

    pub fn until(a: StateFormula, b: StateFormula) -> Self {
        PathFormula::Until(Box::new(a), Box::new(b))
    }

    pub fn bounded_until(a: StateFormula, b: StateFormula, k: u32) -> Self {
        PathFormula::BoundedUntil(Box::new(a), Box::new(b), k)
    }

    pub fn depth(&self) -> usize {
        match self {
            PathFormula::Next(f) => 1 + f.depth(),
            PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::True => f.write_str("true"),
            StateFormula::Atom(a) => f.write_str(a),
            StateFormula::Not(inner) => write!(f, "!{inner}"),
            StateFormula::And(a, b) => write!(f, "({a} & {b})"),
            StateFormula::Prob { cmp, bound, path } => {
                write!(f, "P{}{} [ {path} ]", cmp.symbol(), format_rational(bound))
            }
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::Next(s) => write!(f, "X {s}"),
            PathFormula::Until(a, b) => write!(f, "{a} U {b}"),
            PathFormula::BoundedUntil(a, b, k) => write!(f, "{a} U<={k} {b}"),
        }
    }
}

/// Canonical text; `parse_formula(&render_formula(f)) == Ok(f)`.
pub fn render_formula(f: &StateFormula) -> String {
    f.to_string()
}

/// Number of transition steps on which satisfaction can depend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Horizon {
    Bounded(u64),
    Unbounded,
}

impl Horizon {
    pub fn max(self, other: Horizon) -> Horizon {
        std::cmp::max(self, other)
    }

    pub fn as_bounded(self) -> Option<u64> {
        match self {
            Horizon::Bounded(k) => Some(k),
            Horizon::Unbounded => None,
        }
    }

    pub fn is_bounded(self) -> bool {
        matches!(self, Horizon::Bounded(_))
    }
}

impl Add<u64> for Horizon {
    type Output = Horizon;

    fn add(self, rhs: u64) -> Horizon {
        match self {
            Horizon::Bounded(k) => Horizon::Bounded(k.saturating_add(rhs)),
            Horizon::Unbounded => Horizon::Unbounded,
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Bounded(k) => write!(f, "{k}"),
            Horizon::Unbounded => f.write_str("unbounded"),
        }
    }
}

pub fn required_horizon(f: &StateFormula) -> Horizon {
    match f {
        StateFormula::True | StateFormula::Atom(_) => Horizon::Bounded(0),
        StateFormula::Not(g) => required_horizon(g),
        StateFormula::And(a, b) => required_horizon(a).max(required_horizon(b)),
        StateFormula::Prob { path, .. } => path_horizon(path),
    }
}

pub fn path_horizon(p: &PathFormula) -> Horizon {
    match p {
        PathFormula::Next(g) => required_horizon(g) + 1,
        PathFormula::BoundedUntil(a, b, k) => {
            required_horizon(a).max(required_horizon(b)) + u64::from(*k)
        }
        PathFormula::Until(..) => Horizon::Unbounded,
    }
}
