//! Three-valued PCTL / bounded-PCTL evaluation over successor-generating models.
//!
//! Probabilities are exact rationals built from squared moduli only. Every
//! evaluation carries a step budget; when the budget runs out before a path
//! formula resolves, the leftover mass widens the result into an interval and
//! comparisons may come back [`Truth::Unknown`].

pub mod reference;

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::amplitude::Amplitude;
use crate::chain::{FiniteQmc, ProbInterval};
use crate::logic::{required_horizon, Comparison, Horizon, PathFormula, StateFormula};
use crate::rational::Rational;

/// A (possibly infinite) quantum Markov chain given by a successor function.
pub trait Model {
    type State: Clone + Eq + Hash + fmt::Debug;

    /// Outgoing transitions; squared moduli sum to 1.
    fn successors(&self, s: &Self::State) -> Vec<(Self::State, Amplitude)>;

    fn holds(&self, s: &Self::State, atom: &str) -> bool;

    /// Whether `atom` is a proposition of this model at all.
    fn knows(&self, atom: &str) -> bool;

    fn is_absorbing(&self, s: &Self::State) -> bool {
        let succ = self.successors(s);
        succ.len() == 1 && &succ[0].0 == s
    }

    fn describe(&self, s: &Self::State) -> String {
        format!("{s:?}")
    }
}

impl Model for FiniteQmc {
    type State = usize;

    fn successors(&self, s: &usize) -> Vec<(usize, Amplitude)> {
        self.row(*s).to_vec()
    }

    fn holds(&self, s: &usize, atom: &str) -> bool {
        self.labels_of(*s).contains(atom)
    }

    fn knows(&self, atom: &str) -> bool {
        (0..self.len()).any(|s| self.labels_of(s).contains(atom))
    }

    fn describe(&self, s: &usize) -> String {
        self.state_name(*s).to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Truth {
    Holds,
    Fails,
    Unknown,
}

impl Truth {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Truth::Holds
        } else {
            Truth::Fails
        }
    }

    pub fn negate(self) -> Self {
        match self {
            Truth::Holds => Truth::Fails,
            Truth::Fails => Truth::Holds,
            Truth::Unknown => Truth::Unknown,
        }
    }

    pub fn and(self, other: Truth) -> Self {
        match (self, other) {
            (Truth::Fails, _) | (_, Truth::Fails) => Truth::Fails,
            (Truth::Holds, Truth::Holds) => Truth::Holds,
            _ => Truth::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Truth::Holds => "HOLDS",
            Truth::Fails => "FAILS",
            Truth::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Truth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Compares an interval against `cmp r`.
pub fn compare(cmp: Comparison, r: &Rational, iv: &ProbInterval) -> Truth {
    match cmp {
        Comparison::Greater if iv.lo() > r => Truth::Holds,
        Comparison::Greater if iv.hi() <= r => Truth::Fails,
        Comparison::Equal if iv.is_point() && iv.lo() == r => Truth::Holds,
        Comparison::Equal if !iv.contains(r) => Truth::Fails,
        _ => Truth::Unknown,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub truth: Truth,
    /// Interval of the outermost probability operator, if the formula is one.
    pub interval: Option<ProbInterval>,
    /// True iff the result did not depend on the budget running out.
    pub quiescent: bool,
    pub horizon: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("unknown atomic proposition `{0}`")]
    UnknownAtom(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct NodeId(u32);

#[derive(Debug, Clone, Copy)]
enum PathNode {
    Next(NodeId),
    Until(NodeId, NodeId, Option<u32>),
}

#[derive(Debug, Clone)]
enum Node {
    True,
    Atom(String),
    Not(NodeId),
    And(NodeId, NodeId),
    Prob {
        cmp: Comparison,
        bound: Rational,
        path: PathNode,
    },
}

/// Hash-consed formula DAG with per-node required horizons.
#[derive(Debug, Default)]
struct Arena {
    nodes: Vec<Node>,
    required: Vec<Horizon>,
    index: HashMap<StateFormula, NodeId>,
}

impl Arena {
    fn compile(&mut self, f: &StateFormula) -> NodeId {
        if let Some(id) = self.index.get(f) {
            return *id;
        }
        let node = match f {
            StateFormula::True => Node::True,
            StateFormula::Atom(a) => Node::Atom(a.clone()),
            StateFormula::Not(g) => Node::Not(self.compile(g)),
            StateFormula::And(a, b) => Node::And(self.compile(a), self.compile(b)),
            StateFormula::Prob { cmp, bound, path } => Node::Prob {
                cmp: *cmp,
                bound: bound.clone(),
                path: match path.as_ref() {
                    PathFormula::Next(g) => PathNode::Next(self.compile(g)),
                    PathFormula::Until(a, b) => PathNode::Until(self.compile(a), self.compile(b), None),
                    PathFormula::BoundedUntil(a, b, k) => {
                        PathNode::Until(self.compile(a), self.compile(b), Some(*k))
                    }
                },
            },
        };
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node);
        self.required.push(required_horizon(f));
        self.index.insert(f.clone(), id);
        id
    }

    fn required(&self, n: NodeId) -> Horizon {
        self.required[n.0 as usize]
    }
}

/// Closed probability bounds used during evaluation.
#[derive(Debug, Clone, PartialEq)]
struct Bounds {
    lo: Rational,
    hi: Rational,
}

impl Bounds {
    fn point(p: Rational) -> Self {
        Bounds { lo: p.clone(), hi: p }
    }

    fn zero() -> Self {
        Bounds::point(Rational::zero())
    }

    fn one() -> Self {
        Bounds::point(Rational::one())
    }

    fn unknown() -> Self {
        Bounds {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    fn hull(&self, other: &Bounds) -> Bounds {
        Bounds {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    fn into_interval(self) -> ProbInterval {
        ProbInterval::from_bounds_unchecked(self.lo, self.hi)
    }
}

type StateIx = u32;

/// Successors with their probabilities, and whether the state is absorbing.
type SuccessorRow = (Vec<(StateIx, Rational)>, bool);

/// Memoizing evaluator bound to one model.
///
/// Results are cached per (state, subformula, remaining budget); budgets above
/// a node's required horizon are clamped so bounded subformulas share entries.
pub struct Checker<'m, M: Model> {
    model: &'m M,
    arena: Arena,
    states: Vec<M::State>,
    state_ix: HashMap<M::State, StateIx>,
    successors: Vec<Option<SuccessorRow>>,
    memo: HashMap<(StateIx, NodeId, Option<u32>, u64), Bounds>,
    memo_cap: Option<usize>,
}

impl<'m, M: Model> Checker<'m, M> {
    pub fn new(model: &'m M) -> Self {
        Self {
            model,
            arena: Arena::default(),
            states: Vec::new(),
            state_ix: HashMap::new(),
            successors: Vec::new(),
            memo: HashMap::new(),
            memo_cap: None,
        }
    }

    /// Stops caching once `cap` entries are stored.
    pub fn with_memo_cap(mut self, cap: usize) -> Self {
        self.memo_cap = Some(cap);
        self
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn explored_states(&self) -> usize {
        self.states.len()
    }

    fn validate(&self, f: &StateFormula) -> Result<(), CheckError> {
        match f.atoms().into_iter().find(|a| !self.model.knows(a)) {
            Some(a) => Err(CheckError::UnknownAtom(a.to_string())),
            None => Ok(()),
        }
    }

    pub fn check_state(
        &mut self,
        c: &M::State,
        f: &StateFormula,
        horizon: u64,
    ) -> Result<Verdict, CheckError> {
        self.validate(f)?;
        let n = self.arena.compile(f);
        let s = self.intern(c);
        let truth = self.truth(s, n, horizon);
        let interval = match self.arena.nodes[n.0 as usize] {
            Node::Prob { .. } => Some(self.prob_value(s, n, horizon).into_interval()),
            _ => None,
        };
        let quiescent = match &interval {
            Some(iv) => iv.is_point(),
            None => truth != Truth::Unknown,
        };
        Ok(Verdict {
            truth,
            interval,
            quiescent,
            horizon,
        })
    }

    /// Probability of `path` from `c`, plus whether it is exact.
    pub fn prob_path(
        &mut self,
        c: &M::State,
        path: &PathFormula,
        horizon: u64,
    ) -> Result<(ProbInterval, bool), CheckError> {
        let wrapper = StateFormula::prob(Comparison::Greater, Rational::zero(), path.clone());
        self.validate(&wrapper)?;
        let n = self.arena.compile(&wrapper);
        let s = self.intern(c);
        let iv = self.prob_value(s, n, horizon).into_interval();
        let quiescent = iv.is_point();
        Ok((iv, quiescent))
    }

    fn intern(&mut self, c: &M::State) -> StateIx {
        if let Some(ix) = self.state_ix.get(c) {
            return *ix;
        }
        let ix = self.states.len() as StateIx;
        self.states.push(c.clone());
        self.state_ix.insert(c.clone(), ix);
        self.successors.push(None);
        ix
    }

    fn expand(&mut self, s: StateIx) {
        if self.successors[s as usize].is_some() {
            return;
        }
        let state = self.states[s as usize].clone();
        let absorbing = self.model.is_absorbing(&state);
        let succ: Vec<(StateIx, Rational)> = self
            .model
            .successors(&state)
            .into_iter()
            .map(|(t, a)| (self.intern(&t), a.mod2().clone()))
            .collect();
        self.successors[s as usize] = Some((succ, absorbing));
    }

    fn clamp(&self, n: NodeId, h: u64) -> u64 {
        match self.arena.required(n) {
            Horizon::Bounded(r) => h.min(r),
            Horizon::Unbounded => h,
        }
    }

    fn truth(&mut self, s: StateIx, n: NodeId, h: u64) -> Truth {
        let h = self.clamp(n, h);
        match &self.arena.nodes[n.0 as usize] {
            Node::True => Truth::Holds,
            Node::Atom(a) => Truth::from_bool(self.model.holds(&self.states[s as usize], a)),
            Node::Not(g) => {
                let g = *g;
                self.truth(s, g, h).negate()
            }
            Node::And(a, b) => {
                let (a, b) = (*a, *b);
                let ta = self.truth(s, a, h);
                if ta == Truth::Fails {
                    return Truth::Fails;
                }
                ta.and(self.truth(s, b, h))
            }
            Node::Prob { cmp, bound, .. } => {
                let (cmp, bound) = (*cmp, bound.clone());
                let iv = self.prob_value(s, n, h).into_interval();
                compare(cmp, &bound, &iv)
            }
        }
    }

    fn remember(&mut self, key: (StateIx, NodeId, Option<u32>, u64), value: &Bounds) {
        if self.memo_cap.is_none_or(|cap| self.memo.len() < cap) {
            self.memo.insert(key, value.clone());
        }
    }

    fn prob_value(&mut self, s: StateIx, n: NodeId, h: u64) -> Bounds {
        let h = self.clamp(n, h);
        let Node::Prob { path, .. } = self.arena.nodes[n.0 as usize] else {
            unreachable!("probability of a non-probability node");
        };
        match path {
            PathNode::Next(g) => {
                let key = (s, n, None, h);
                if let Some(v) = self.memo.get(&key) {
                    return v.clone();
                }
                let v = if h == 0 {
                    Bounds::unknown()
                } else {
                    self.expand(s);
                    let succ = self.successors[s as usize].as_ref().unwrap().0.clone();
                    let mut acc = Bounds::zero();
                    for (t, p) in succ {
                        match self.truth(t, g, h - 1) {
                            Truth::Holds => {
                                acc.lo += &p;
                                acc.hi += &p;
                            }
                            Truth::Unknown => acc.hi += &p,
                            Truth::Fails => {}
                        }
                    }
                    acc
                };
                self.remember(key, &v);
                v
            }
            PathNode::Until(a, b, k) => self.until_value(s, n, a, b, k, h),
        }
    }

    fn until_value(&mut self, s: StateIx, n: NodeId, a: NodeId, b: NodeId, j: Option<u32>, h: u64) -> Bounds {
        let h = match (j, self.arena.required(a).max(self.arena.required(b))) {
            (Some(j), Horizon::Bounded(r)) => h.min(u64::from(j) + r),
            _ => h,
        };
        let key = (s, n, j, h);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let t2 = self.truth(s, b, h);
        let v = if t2 == Truth::Holds {
            Bounds::one()
        } else {
            let t1 = if j == Some(0) {
                Truth::Fails
            } else {
                self.truth(s, a, h)
            };
            let cont = if t1 == Truth::Fails {
                Bounds::zero()
            } else {
                self.expand(s);
                let (succ, absorbing) = self.successors[s as usize].clone().unwrap();
                let step = if t2 == Truth::Fails && absorbing {
                    // the run stays here forever and the target never holds
                    Bounds::zero()
                } else if h == 0 {
                    Bounds::unknown()
                } else {
                    let mut acc = Bounds::zero();
                    for (t, p) in succ {
                        let sub = self.until_value(t, n, a, b, j.map(|x| x - 1), h - 1);
                        acc.lo += &p * &sub.lo;
                        acc.hi += &p * &sub.hi;
                    }
                    acc
                };
                if t1 == Truth::Unknown {
                    step.hull(&Bounds::zero())
                } else {
                    step
                }
            };
            if t2 == Truth::Unknown {
                cont.hull(&Bounds::one())
            } else {
                cont
            }
        };
        self.remember(key, &v);
        v
    }
}

/// One-shot [`Checker::check_state`].
pub fn check_state<M: Model>(
    model: &M,
    c: &M::State,
    f: &StateFormula,
    horizon: u64,
) -> Result<Verdict, CheckError> {
    Checker::new(model).check_state(c, f, horizon)
}

/// One-shot [`Checker::prob_path`].
pub fn prob_path<M: Model>(
    model: &M,
    c: &M::State,
    path: &PathFormula,
    horizon: u64,
) -> Result<(ProbInterval, bool), CheckError> {
    Checker::new(model).prob_path(c, path, horizon)
}

/// Iterative deepening: bounded formulas are checked once at their required
/// horizon; otherwise the horizon doubles until the verdict is decided or
/// reaches `ceiling`.
pub fn check_quiescent<M: Model>(
    model: &M,
    c: &M::State,
    f: &StateFormula,
    ceiling: u64,
) -> Result<Verdict, CheckError> {
    let mut checker = Checker::new(model);
    if let Horizon::Bounded(h) = required_horizon(f) {
        return checker.check_state(c, f, h);
    }
    let mut h = 1u64;
    loop {
        let v = checker.check_state(c, f, h)?;
        if v.truth != Truth::Unknown || h >= ceiling {
            return Ok(v);
        }
        h = (h.saturating_mul(2)).min(ceiling);
    }
}

#[cfg(test)]
mod tests;
