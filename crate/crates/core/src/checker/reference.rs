//! Direct, unmemoized evaluation with the same semantics as [`super::Checker`].
//!
//! Exponential in the horizon; kept as a test oracle for the memoized engine.

use num::{One, Zero};

use super::{compare, Model, Truth};
use crate::chain::ProbInterval;
use crate::logic::{PathFormula, StateFormula};
use crate::rational::Rational;

pub fn check_state<M: Model>(model: &M, c: &M::State, f: &StateFormula, h: u64) -> Truth {
    match f {
        StateFormula::True => Truth::Holds,
        StateFormula::Atom(a) => Truth::from_bool(model.holds(c, a)),
        StateFormula::Not(g) => check_state(model, c, g, h).negate(),
        StateFormula::And(a, b) => check_state(model, c, a, h).and(check_state(model, c, b, h)),
        StateFormula::Prob { cmp, bound, path } => compare(*cmp, bound, &prob_path(model, c, path, h)),
    }
}

pub fn prob_path<M: Model>(model: &M, c: &M::State, path: &PathFormula, h: u64) -> ProbInterval {
    let (lo, hi) = match path {
        PathFormula::Next(g) => {
            if h == 0 {
                (Rational::zero(), Rational::one())
            } else {
                let mut lo = Rational::zero();
                let mut hi = Rational::zero();
                for (t, a) in model.successors(c) {
                    match check_state(model, &t, g, h - 1) {
                        Truth::Holds => {
                            lo += a.mod2();
                            hi += a.mod2();
                        }
                        Truth::Unknown => hi += a.mod2(),
                        Truth::Fails => {}
                    }
                }
                (lo, hi)
            }
        }
        PathFormula::Until(a, b) => until(model, c, a, b, None, h),
        PathFormula::BoundedUntil(a, b, k) => until(model, c, a, b, Some(*k), h),
    };
    ProbInterval::new(lo, hi).expect("evaluation keeps bounds ordered")
}

fn until<M: Model>(
    model: &M,
    c: &M::State,
    a: &StateFormula,
    b: &StateFormula,
    j: Option<u32>,
    h: u64,
) -> (Rational, Rational) {
    let one = || (Rational::one(), Rational::one());
    let zero = || (Rational::zero(), Rational::zero());
    let t2 = check_state(model, c, b, h);
    if t2 == Truth::Holds {
        return one();
    }
    let t1 = if j == Some(0) {
        Truth::Fails
    } else {
        check_state(model, c, a, h)
    };
    let cont = if t1 == Truth::Fails {
        zero()
    } else {
        let step = if t2 == Truth::Fails && model.is_absorbing(c) {
            zero()
        } else if h == 0 {
            (Rational::zero(), Rational::one())
        } else {
            let mut lo = Rational::zero();
            let mut hi = Rational::zero();
            for (t, amp) in model.successors(c) {
                let (l, u) = until(model, &t, a, b, j.map(|x| x - 1), h - 1);
                lo += amp.mod2() * l;
                hi += amp.mod2() * u;
            }
            (lo, hi)
        };
        if t1 == Truth::Unknown {
            (Rational::zero(), step.1)
        } else {
            step
        }
    };
    if t2 == Truth::Unknown {
        (cont.0, Rational::one())
    } else {
        cont
    }
}
