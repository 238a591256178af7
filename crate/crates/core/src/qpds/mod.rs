//! Quantum pushdown systems and the chain they induce on configurations.
//!
//! A stateless system (qBPA) is a [`Qpds`] with one anonymous control state.
//! Stacks are read leftmost-as-top. A configuration with an empty stack is an
//! absorbing self-loop labelled `empty`.

mod file;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::chain::{row_inner_product, OrthogonalityIssue};
use crate::checker::Model;
use crate::rational::{format_rational, Rational};

pub use file::{parse_system, render_system, SystemParseError};

/// Proposition carried by every empty-stack configuration.
pub const EMPTY_LABEL: &str = "empty";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QpdsError {
    #[error("unknown stack symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown stack symbol id {0}")]
    UnknownSymbolId(u32),
    #[error("unknown control state `{0}`")]
    UnknownState(String),
    #[error("invalid symbol name `{0}`")]
    InvalidName(String),
    #[error("stateful system needs a control state in `{0}`")]
    MissingControl(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub(crate) u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub(crate) u32);

impl SymbolId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub lhs_state: StateId,
    pub lhs_symbol: SymbolId,
    pub rhs_state: StateId,
    pub rhs: Vec<SymbolId>,
    pub amp: Amplitude,
}

/// Control state plus stack; `stack[0]` is the top.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub control: StateId,
    pub stack: Vec<SymbolId>,
}

impl Configuration {
    pub fn top(&self) -> Option<SymbolId> {
        self.stack.first().copied()
    }
}

/// Head of a configuration. For stateless systems the control is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    Control(StateId),
    Pair(StateId, SymbolId),
}

/// Per-proposition head sets. Empty means "identity labelling only".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimpleAssignment {
    heads: BTreeMap<String, BTreeSet<Head>>,
}

impl SimpleAssignment {
    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn propositions(&self) -> impl Iterator<Item = &str> {
        self.heads.keys().map(String::as_str)
    }

    pub fn heads_of(&self, prop: &str) -> Option<&BTreeSet<Head>> {
        self.heads.get(prop)
    }
}

#[derive(Debug, Clone)]
pub struct Qpds {
    stateless: bool,
    control_states: Vec<String>,
    stack_alphabet: Vec<String>,
    symbol_index: HashMap<String, SymbolId>,
    undeclared: BTreeSet<SymbolId>,
    rules: Vec<Rule>,
    by_lhs: HashMap<(StateId, SymbolId), Vec<usize>>,
    assignment: SimpleAssignment,
    start: Configuration,
}

pub(crate) fn valid_symbol_name(name: &str) -> bool {
    use crate::logic::parse_formula;
    if name == "-" || name == EMPTY_LABEL || ["true", "P", "X", "U"].contains(&name) {
        return false;
    }
    // a symbol must be usable as an atom in formulas
    matches!(parse_formula(name), Ok(crate::logic::StateFormula::Atom(ref a)) if a == name)
}

/// Incremental construction of a [`Qpds`].
#[derive(Debug, Clone)]
pub struct QpdsBuilder {
    sys: Qpds,
    declared: BTreeSet<SymbolId>,
}

impl QpdsBuilder {
    pub fn stateless() -> Self {
        Self::with_states_inner(true, vec![String::new()])
    }

    pub fn with_states<S: AsRef<str>>(states: &[S]) -> Result<Self, QpdsError> {
        let mut seen = BTreeSet::new();
        for s in states {
            let s = s.as_ref();
            if !valid_symbol_name(s) || s.contains('.') {
                return Err(QpdsError::InvalidName(s.to_string()));
            }
            if !seen.insert(s) {
                return Err(QpdsError::Duplicate(s.to_string()));
            }
        }
        if states.is_empty() {
            return Ok(Self::stateless());
        }
        Ok(Self::with_states_inner(
            false,
            states.iter().map(|s| s.as_ref().to_string()).collect(),
        ))
    }

    fn with_states_inner(stateless: bool, control_states: Vec<String>) -> Self {
        Self {
            sys: Qpds {
                stateless,
                control_states,
                stack_alphabet: Vec::new(),
                symbol_index: HashMap::new(),
                undeclared: BTreeSet::new(),
                rules: Vec::new(),
                by_lhs: HashMap::new(),
                assignment: SimpleAssignment::default(),
                start: Configuration {
                    control: StateId(0),
                    stack: Vec::new(),
                },
            },
            declared: BTreeSet::new(),
        }
    }

    fn intern(&mut self, name: &str) -> Result<SymbolId, QpdsError> {
        if let Some(id) = self.sys.symbol_index.get(name) {
            return Ok(*id);
        }
        if !valid_symbol_name(name) {
            return Err(QpdsError::InvalidName(name.to_string()));
        }
        let id = SymbolId(self.sys.stack_alphabet.len() as u32);
        self.sys.stack_alphabet.push(name.to_string());
        self.sys.symbol_index.insert(name.to_string(), id);
        Ok(id)
    }

    /// Declares a stack symbol (the `stack:` line).
    pub fn symbol(&mut self, name: &str) -> Result<SymbolId, QpdsError> {
        let id = self.intern(name)?;
        if !self.declared.insert(id) {
            return Err(QpdsError::Duplicate(name.to_string()));
        }
        Ok(id)
    }

    /// Symbol use; undeclared names are added and reported by validation.
    fn use_symbol(&mut self, name: &str) -> Result<SymbolId, QpdsError> {
        self.intern(name)
    }

    fn state(&self, name: Option<&str>) -> Result<StateId, QpdsError> {
        match (self.sys.stateless, name) {
            (true, None) => Ok(StateId(0)),
            (true, Some(n)) => Err(QpdsError::UnknownState(n.to_string())),
            (false, None) => Err(QpdsError::MissingControl(String::new())),
            (false, Some(n)) => self
                .sys
                .control_states
                .iter()
                .position(|s| s == n)
                .map(|i| StateId(i as u32))
                .ok_or_else(|| QpdsError::UnknownState(n.to_string())),
        }
    }

    /// Adds `lhs_state lhs -> rhs_state rhs`. States are `None` for stateless systems.
    pub fn rule_full(
        &mut self,
        lhs_state: Option<&str>,
        lhs: &str,
        rhs_state: Option<&str>,
        rhs: &[&str],
        amp: Amplitude,
    ) -> Result<usize, QpdsError> {
        let lhs_state = self.state(lhs_state)?;
        let rhs_state = self.state(rhs_state)?;
        let lhs_symbol = self.use_symbol(lhs)?;
        let rhs = rhs
            .iter()
            .map(|s| self.use_symbol(s))
            .collect::<Result<Vec<_>, _>>()?;
        let idx = self.sys.rules.len();
        self.sys.rules.push(Rule {
            lhs_state,
            lhs_symbol,
            rhs_state,
            rhs,
            amp,
        });
        self.sys.by_lhs.entry((lhs_state, lhs_symbol)).or_default().push(idx);
        Ok(idx)
    }

    /// Stateless rule `lhs -> rhs`.
    pub fn rule(&mut self, lhs: &str, rhs: &[&str], amp: Amplitude) -> Result<usize, QpdsError> {
        self.rule_full(None, lhs, None, rhs, amp)
    }

    pub fn start(&mut self, control: Option<&str>, stack: &[&str]) -> Result<(), QpdsError> {
        let control = self.state(control)?;
        let stack = stack
            .iter()
            .map(|s| self.use_symbol(s))
            .collect::<Result<Vec<_>, _>>()?;
        self.sys.start = Configuration { control, stack };
        Ok(())
    }

    /// Adds heads to proposition `prop`. A head is `X` (stateless), `q` or
    /// `q.X` (stateful), or `-` for the empty stack of a stateless system.
    pub fn label(&mut self, prop: &str, heads: &[&str]) -> Result<(), QpdsError> {
        if !valid_symbol_name(prop) {
            return Err(QpdsError::InvalidName(prop.to_string()));
        }
        let mut parsed = BTreeSet::new();
        for h in heads {
            let head = if self.sys.stateless {
                if *h == "-" {
                    Head::Control(StateId(0))
                } else {
                    Head::Pair(StateId(0), self.use_symbol(h)?)
                }
            } else if let Some((q, x)) = h.split_once('.') {
                Head::Pair(self.state(Some(q))?, self.use_symbol(x)?)
            } else {
                Head::Control(self.state(Some(h))?)
            };
            parsed.insert(head);
        }
        self.sys
            .assignment
            .heads
            .entry(prop.to_string())
            .or_default()
            .extend(parsed);
        Ok(())
    }

    pub fn build(mut self) -> Qpds {
        let all: BTreeSet<SymbolId> = (0..self.sys.stack_alphabet.len() as u32).map(SymbolId).collect();
        self.sys.undeclared = all.difference(&self.declared).copied().collect();
        self.sys
    }
}

impl Qpds {
    pub fn is_stateless(&self) -> bool {
        self.stateless
    }

    pub fn stack_alphabet(&self) -> &[String] {
        &self.stack_alphabet
    }

    pub fn control_states(&self) -> &[String] {
        if self.stateless {
            &[]
        } else {
            &self.control_states
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> &Configuration {
        &self.start
    }

    pub fn assignment(&self) -> &SimpleAssignment {
        &self.assignment
    }

    pub fn symbol(&self, name: &str) -> Result<SymbolId, QpdsError> {
        self.symbol_index
            .get(name)
            .copied()
            .ok_or_else(|| QpdsError::UnknownSymbol(name.to_string()))
    }

    pub fn symbol_name(&self, id: SymbolId) -> &str {
        &self.stack_alphabet[id.index()]
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.control_states[id.index()]
    }

    pub fn rules_for(&self, state: StateId, symbol: SymbolId) -> impl Iterator<Item = &Rule> {
        self.by_lhs
            .get(&(state, symbol))
            .into_iter()
            .flatten()
            .map(|&i| &self.rules[i])
    }

    /// Same system with every rule phase replaced by `phase(rule_index)`.
    pub fn rephased(&self, mut phase: impl FnMut(usize) -> f64) -> Qpds {
        let mut out = self.clone();
        for (i, r) in out.rules.iter_mut().enumerate() {
            r.amp = r.amp.with_phase(phase(i)).expect("finite phase");
        }
        out
    }

    /// Same system with rules reordered by `order` (a permutation of rule indices).
    pub fn with_rule_order(&self, order: &[usize]) -> Qpds {
        assert_eq!(order.len(), self.rules.len());
        let mut out = self.clone();
        out.rules = order.iter().map(|&i| self.rules[i].clone()).collect();
        out.by_lhs.clear();
        for (i, r) in out.rules.iter().enumerate() {
            out.by_lhs.entry((r.lhs_state, r.lhs_symbol)).or_default().push(i);
        }
        out
    }

    /// Parses `N p(A,A) Zp` (stateless) or `q0 Z Zp` (stateful); `-` is the empty stack.
    pub fn parse_configuration(&self, text: &str) -> Result<Configuration, QpdsError> {
        let mut tokens: Vec<&str> = text.split_whitespace().collect();
        let control = if self.stateless {
            StateId(0)
        } else {
            if tokens.is_empty() {
                return Err(QpdsError::MissingControl(text.to_string()));
            }
            let q = tokens.remove(0);
            self.control_states
                .iter()
                .position(|s| s == q)
                .map(|i| StateId(i as u32))
                .ok_or_else(|| QpdsError::UnknownState(q.to_string()))?
        };
        if tokens == ["-"] {
            tokens.clear();
        }
        let stack = tokens
            .iter()
            .map(|t| self.symbol(t))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Configuration { control, stack })
    }

    pub fn render_configuration(&self, c: &Configuration) -> String {
        let mut parts: Vec<&str> = Vec::new();
        if !self.stateless {
            parts.push(self.state_name(c.control));
        }
        if c.stack.is_empty() {
            parts.push("-");
        }
        parts.extend(c.stack.iter().map(|s| self.symbol_name(*s)));
        parts.join(" ")
    }

    fn check_configuration(&self, c: &Configuration) -> Result<(), QpdsError> {
        if c.control.index() >= self.control_states.len() {
            return Err(QpdsError::UnknownState(format!("#{}", c.control.0)));
        }
        match c.stack.iter().find(|s| s.index() >= self.stack_alphabet.len()) {
            Some(bad) => Err(QpdsError::UnknownSymbolId(bad.0)),
            None => Ok(()),
        }
    }

    /// One entry per applicable rule, in rule order; empty stacks self-loop.
    pub fn successors(&self, c: &Configuration) -> Result<Vec<(Configuration, Amplitude)>, QpdsError> {
        self.check_configuration(c)?;
        Ok(self.successors_unchecked(c))
    }

    fn successors_unchecked(&self, c: &Configuration) -> Vec<(Configuration, Amplitude)> {
        let Some(top) = c.top() else {
            return vec![(c.clone(), Amplitude::identity())];
        };
        let rest = &c.stack[1..];
        let out: Vec<_> = self
            .rules_for(c.control, top)
            .map(|r| {
                let mut stack = Vec::with_capacity(r.rhs.len() + rest.len());
                stack.extend_from_slice(&r.rhs);
                stack.extend_from_slice(rest);
                (
                    Configuration {
                        control: r.rhs_state,
                        stack,
                    },
                    r.amp.clone(),
                )
            })
            .collect();
        if out.is_empty() {
            // non-total system: treat the stuck configuration as absorbing
            vec![(c.clone(), Amplitude::identity())]
        } else {
            out
        }
    }

    pub fn head(&self, c: &Configuration) -> Head {
        match c.top() {
            Some(x) => Head::Pair(c.control, x),
            None => Head::Control(c.control),
        }
    }

    /// Identity-labelling name of a head: `X`, `q.X`, `q`, or `empty`.
    pub fn head_name(&self, head: Head) -> String {
        match (self.stateless, head) {
            (true, Head::Pair(_, x)) => self.symbol_name(x).to_string(),
            (true, Head::Control(_)) => EMPTY_LABEL.to_string(),
            (false, Head::Pair(q, x)) => format!("{}.{}", self.state_name(q), self.symbol_name(x)),
            (false, Head::Control(q)) => self.state_name(q).to_string(),
        }
    }

    /// Propositions of `c`: the explicit assignment when one exists, the head
    /// name otherwise; empty stacks also carry `empty`.
    pub fn labels(&self, c: &Configuration) -> BTreeSet<String> {
        let head = self.head(c);
        let mut out: BTreeSet<String> = if self.assignment.is_empty() {
            [self.head_name(head)].into()
        } else {
            self.assignment
                .heads
                .iter()
                .filter(|(_, hs)| hs.contains(&head))
                .map(|(a, _)| a.clone())
                .collect()
        };
        if c.stack.is_empty() {
            out.insert(EMPTY_LABEL.to_string());
        }
        out
    }

    /// Whether `c` satisfies `atom`; atoms outside the explicit assignment
    /// resolve through the identity labelling.
    pub fn satisfies(&self, c: &Configuration, atom: &str) -> bool {
        if let Some(heads) = self.assignment.heads.get(atom) {
            return heads.contains(&self.head(c));
        }
        if atom == EMPTY_LABEL {
            return c.stack.is_empty();
        }
        self.identity_matches(c, atom)
    }

    fn identity_matches(&self, c: &Configuration, atom: &str) -> bool {
        match (self.stateless, c.top()) {
            (true, Some(x)) => self.symbol_name(x) == atom,
            (true, None) => false,
            (false, Some(x)) => atom
                .split_once('.')
                .is_some_and(|(q, s)| q == self.state_name(c.control) && s == self.symbol_name(x)),
            (false, None) => atom == self.state_name(c.control),
        }
    }

    /// Whether `atom` names a proposition of this system.
    pub fn knows(&self, atom: &str) -> bool {
        if atom == EMPTY_LABEL || self.assignment.heads.contains_key(atom) {
            return true;
        }
        if self.stateless {
            return self.symbol_index.contains_key(atom);
        }
        match atom.split_once('.') {
            Some((q, x)) => self.control_states.iter().any(|s| s == q) && self.symbol_index.contains_key(x),
            None => self.control_states.iter().any(|s| s == atom),
        }
    }

    pub fn head_of(&self, c: &Configuration) -> String {
        self.head_name(self.head(c))
    }
}

impl Model for Qpds {
    type State = Configuration;

    fn successors(&self, s: &Configuration) -> Vec<(Configuration, Amplitude)> {
        self.successors_unchecked(s)
    }

    fn holds(&self, s: &Configuration, atom: &str) -> bool {
        self.satisfies(s, atom)
    }

    fn knows(&self, atom: &str) -> bool {
        Qpds::knows(self, atom)
    }

    fn is_absorbing(&self, s: &Configuration) -> bool {
        match s.top() {
            None => true,
            Some(x) => self.rules_for(s.control, x).next().is_none(),
        }
    }

    fn describe(&self, s: &Configuration) -> String {
        self.render_configuration(s)
    }
}

/// One well-formedness violation of a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Squared moduli of the rules for one left-hand side do not sum to 1.
    Normalization { head: String, sum: String },
    /// A (control, symbol) pair has no rule.
    MissingRules { head: String },
    /// Right-hand side longer than two symbols (strict mode only).
    RhsTooLong { rule: usize, len: usize },
    /// Symbol used without a `stack:` declaration.
    UndeclaredSymbol { symbol: String },
    ModulusAboveOne { rule: usize, mod2: String },
    DuplicateRule { rule: usize, first: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Normalization { head, sum } => {
                write!(f, "rules for {head} sum to {sum}, not 1")
            }
            Violation::MissingRules { head } => write!(f, "no rule for {head}"),
            Violation::RhsTooLong { rule, len } => {
                write!(f, "rule #{rule} pushes {len} symbols (limit 2)")
            }
            Violation::UndeclaredSymbol { symbol } => write!(f, "symbol {symbol} is not declared"),
            Violation::ModulusAboveOne { rule, mod2 } => {
                write!(f, "rule #{rule} has squared modulus {mod2} > 1")
            }
            Violation::DuplicateRule { rule, first } => {
                write!(f, "rule #{rule} duplicates rule #{first}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SystemReport {
    pub violations: Vec<Violation>,
}

impl SystemReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Normalization, totality, closure and (in strict mode) the `|rhs| <= 2` bound.
pub fn validate_system(sys: &Qpds, strict: bool) -> SystemReport {
    let mut violations = Vec::new();
    for s in &sys.undeclared {
        violations.push(Violation::UndeclaredSymbol {
            symbol: sys.symbol_name(*s).to_string(),
        });
    }
    let lhs_name = |q: StateId, x: SymbolId| sys.head_name(Head::Pair(q, x));
    let mut first_seen: HashMap<(StateId, SymbolId, StateId, &[SymbolId]), usize> = HashMap::new();
    for (i, r) in sys.rules.iter().enumerate() {
        if r.amp.mod2() > &Rational::one() {
            violations.push(Violation::ModulusAboveOne {
                rule: i,
                mod2: format_rational(r.amp.mod2()),
            });
        }
        if strict && r.rhs.len() > 2 {
            violations.push(Violation::RhsTooLong {
                rule: i,
                len: r.rhs.len(),
            });
        }
        let key = (r.lhs_state, r.lhs_symbol, r.rhs_state, r.rhs.as_slice());
        if let Some(first) = first_seen.get(&key) {
            violations.push(Violation::DuplicateRule { rule: i, first: *first });
        } else {
            first_seen.insert(key, i);
        }
    }
    for q in 0..sys.control_states.len() as u32 {
        for x in 0..sys.stack_alphabet.len() as u32 {
            let (q, x) = (StateId(q), SymbolId(x));
            let mut any = false;
            let mut sum = Rational::from_integer(0.into());
            for r in sys.rules_for(q, x) {
                any = true;
                sum += r.amp.mod2();
            }
            if !any {
                violations.push(Violation::MissingRules { head: lhs_name(q, x) });
            } else if !sum.is_one() || sum.is_negative() {
                violations.push(Violation::Normalization {
                    head: lhs_name(q, x),
                    sum: format_rational(&sum),
                });
            }
        }
    }
    SystemReport { violations }
}

/// Orthogonality of the materialized rows of the one-symbol configurations.
/// Diagnostic only: the operator on all configurations is infinite.
pub fn orthogonality_diagnostic(sys: &Qpds, tol: f64) -> Vec<OrthogonalityIssue> {
    let mut rows = Vec::new();
    for q in 0..sys.control_states.len() as u32 {
        for x in 0..sys.stack_alphabet.len() as u32 {
            let c = Configuration {
                control: StateId(q),
                stack: vec![SymbolId(x)],
            };
            let row = sys.successors_unchecked(&c);
            rows.push((sys.render_configuration(&c), row));
        }
    }
    let mut out = Vec::new();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let ip = row_inner_product(&rows[i].1, &rows[j].1);
            if ip > tol {
                out.push(OrthogonalityIssue {
                    row_a: rows[i].0.clone(),
                    row_b: rows[j].0.clone(),
                    inner_product: ip,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests;
