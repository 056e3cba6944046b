//! A single conjunctive clause and the Tsetlin automata that decide which
//! literals it includes.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{blocks_for, tail_mask, Bits, BLOCK};
use crate::error::{Error, Result};
use crate::rng::for_each_bernoulli;

/// Vote direction of a clause within its class pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i64 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Clause evaluation mode. An empty clause outputs 1 while learning and 0
/// at inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Learning,
    Inference,
}

/// State of one two-action Tsetlin automaton, in `1..=2N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaState(pub u16);

impl TaState {
    #[inline]
    pub fn value(self) -> u16 {
        self.0
    }

    /// Include iff the state lies in the upper half.
    #[inline]
    pub fn includes(self, states_per_action: u16) -> bool {
        self.0 > states_per_action
    }
}

/// A clause over `width` boolean features. Literal `i < width` is the plain
/// feature `x_i`; literal `width + i` is its negation.
///
/// The include masks mirror the automaton states and are only ever changed
/// by the same code path that moves a state across the action boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    polarity: Polarity,
    states_per_action: u16,
    width: usize,
    states: Vec<u16>,
    include_plain: Vec<u64>,
    include_negated: Vec<u64>,
    included: usize,
}

impl Clause {
    /// A clause with every automaton in `initial_state`.
    pub fn new(polarity: Polarity, width: usize, states_per_action: u16, initial_state: u16) -> Self {
        assert!(states_per_action >= 1);
        let init = initial_state.clamp(1, 2 * states_per_action);
        Self::from_states_unchecked(polarity, states_per_action, width, vec![init; 2 * width])
    }

    pub fn from_states(polarity: Polarity, states_per_action: u16, states: Vec<u16>) -> Result<Self> {
        if states_per_action == 0 || states_per_action > u16::MAX / 2 {
            return Err(Error::InvalidParameter(format!("states per action {states_per_action}")));
        }
        if states.len() % 2 != 0 {
            return Err(Error::malformed("clause", "odd number of automata"));
        }
        let max = 2 * states_per_action;
        if let Some(bad) = states.iter().find(|&&s| s == 0 || s > max) {
            return Err(Error::malformed("clause", format!("state {bad} outside 1..={max}")));
        }
        let width = states.len() / 2;
        Ok(Self::from_states_unchecked(polarity, states_per_action, width, states))
    }

    fn from_states_unchecked(polarity: Polarity, states_per_action: u16, width: usize, states: Vec<u16>) -> Self {
        let mut clause = Self {
            polarity,
            states_per_action,
            width,
            states,
            include_plain: vec![0; blocks_for(width)],
            include_negated: vec![0; blocks_for(width)],
            included: 0,
        };
        clause.rebuild_masks();
        clause
    }

    fn rebuild_masks(&mut self) {
        self.include_plain.iter_mut().for_each(|b| *b = 0);
        self.include_negated.iter_mut().for_each(|b| *b = 0);
        self.included = 0;
        for lit in 0..2 * self.width {
            if self.states[lit] > self.states_per_action {
                self.flip_mask(lit);
                self.included += 1;
            }
        }
    }

    #[inline]
    fn flip_mask(&mut self, lit: usize) {
        let (masks, i) = if lit < self.width {
            (&mut self.include_plain, lit)
        } else {
            (&mut self.include_negated, lit - self.width)
        };
        masks[i / BLOCK] ^= 1u64 << (i % BLOCK);
    }

    #[inline]
    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn states_per_action(&self) -> u16 {
        self.states_per_action
    }

    #[inline]
    pub fn states(&self) -> &[u16] {
        &self.states
    }

    #[inline]
    pub fn state(&self, literal: usize) -> TaState {
        TaState(self.states[literal])
    }

    /// Derived from the automaton state, never from the cached masks.
    #[inline]
    pub fn is_included(&self, literal: usize) -> bool {
        self.state(literal).includes(self.states_per_action)
    }

    pub fn included_literals(&self) -> impl Iterator<Item = usize> + '_ {
        (0..2 * self.width).filter(|&l| self.is_included(l))
    }

    pub fn included_count(&self) -> usize {
        self.included
    }

    pub fn is_empty(&self) -> bool {
        self.included == 0
    }

    /// Includes a literal by moving its automaton to `N + 1`, or excludes
    /// it by moving to `N`.
    pub fn set_included(&mut self, literal: usize, include: bool) {
        let n = self.states_per_action;
        self.set_state(literal, if include { n + 1 } else { n });
    }

    /// Sets an automaton state, saturating into `1..=2N`.
    pub fn set_state(&mut self, literal: usize, value: u16) {
        let value = value.clamp(1, 2 * self.states_per_action);
        let was = self.is_included(literal);
        self.states[literal] = value;
        let now = self.is_included(literal);
        if was != now {
            self.flip_mask(literal);
            if now {
                self.included += 1;
            } else {
                self.included -= 1;
            }
        }
    }

    /// One step toward Include, saturating at `2N`.
    #[inline]
    pub fn increment(&mut self, literal: usize) {
        let s = self.states[literal];
        if s < 2 * self.states_per_action {
            self.states[literal] = s + 1;
            if s == self.states_per_action {
                self.flip_mask(literal);
                self.included += 1;
            }
        }
    }

    /// One step toward Exclude, saturating at 1.
    #[inline]
    pub fn decrement(&mut self, literal: usize) {
        let s = self.states[literal];
        if s > 1 {
            self.states[literal] = s - 1;
            if s == self.states_per_action + 1 {
                self.flip_mask(literal);
                self.included -= 1;
            }
        }
    }

    #[inline]
    fn literal_value(&self, x: &Bits, literal: usize) -> bool {
        if literal < self.width {
            x.get(literal)
        } else {
            !x.get(literal - self.width)
        }
    }

    fn check_width(&self, x: &Bits) -> Result<()> {
        if x.len() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, actual: x.len() });
        }
        Ok(())
    }

    /// Conjunction of the included literals on `x`.
    pub fn eval(&self, x: &Bits, mode: EvalMode) -> Result<bool> {
        self.check_width(x)?;
        Ok(self.eval_unchecked(x, mode))
    }

    /// Block-wise evaluation: a plain literal blocks when its bit is 0, a
    /// negated literal when its bit is 1.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &Bits, mode: EvalMode) -> bool {
        if self.included == 0 {
            return mode == EvalMode::Learning;
        }
        self.include_plain
            .iter()
            .zip(&self.include_negated)
            .zip(x.blocks())
            .all(|((&p, &n), &xb)| p & !xb == 0 && n & xb == 0)
    }

    /// Literal-by-literal reference evaluation.
    pub fn eval_naive(&self, x: &Bits, mode: EvalMode) -> Result<bool> {
        self.check_width(x)?;
        let mut any = false;
        for lit in 0..2 * self.width {
            if self.is_included(lit) {
                any = true;
                if !self.literal_value(x, lit) {
                    return Ok(false);
                }
            }
        }
        Ok(any || mode == EvalMode::Learning)
    }

    /// Type I feedback, which reinforces frequent patterns.
    ///
    /// When the clause fires on `x` (learning mode), each literal that is
    /// true on `x` moves toward Include with probability `(s-1)/s` and each
    /// false literal moves toward Exclude with probability `1/s`. When it
    /// does not fire, every literal moves toward Exclude with probability
    /// `1/s`.
    pub fn type_i_feedback<R: Rng + ?Sized>(&mut self, x: &Bits, s: f64, rng: &mut R) -> Result<()> {
        self.check_width(x)?;
        let fired = self.eval_unchecked(x, EvalMode::Learning);
        self.apply_type_i(x, fired, s, rng);
        Ok(())
    }

    pub(crate) fn apply_type_i<R: Rng + ?Sized>(&mut self, x: &Bits, fired: bool, s: f64, rng: &mut R) {
        let p = 1.0 / s;
        let n_lits = 2 * self.width;
        if !fired {
            for_each_bernoulli(n_lits, p, rng, |lit| self.decrement(lit));
            return;
        }
        // One Bernoulli(1/s) draw per literal: a selected false literal is
        // decremented, an unselected true literal is incremented.
        let mut selected = Vec::new();
        for_each_bernoulli(n_lits, p, rng, |lit| selected.push(lit));
        let mut next = selected.iter().copied().peekable();
        for lit in 0..n_lits {
            let chosen = next.peek() == Some(&lit);
            if chosen {
                next.next();
            }
            match (self.literal_value(x, lit), chosen) {
                (true, false) => self.increment(lit),
                (false, true) => self.decrement(lit),
                _ => {}
            }
        }
    }

    /// Type II feedback, which adds discrimination: if the clause fires on
    /// `x`, every excluded literal that is false on `x` moves one step
    /// toward Include. A clause that does not fire is left unchanged.
    pub fn type_ii_feedback(&mut self, x: &Bits) -> Result<()> {
        self.check_width(x)?;
        let fired = self.eval_unchecked(x, EvalMode::Learning);
        self.apply_type_ii(x, fired);
        Ok(())
    }

    pub(crate) fn apply_type_ii(&mut self, x: &Bits, fired: bool) {
        if !fired {
            return;
        }
        let nblocks = self.include_plain.len();
        for b in 0..nblocks {
            let valid = if b + 1 == nblocks { tail_mask(self.width) } else { u64::MAX };
            let xb = x.blocks()[b];
            let plain = !xb & !self.include_plain[b] & valid;
            let negated = xb & !self.include_negated[b] & valid;
            for (mut cand, offset) in [(plain, 0), (negated, self.width)] {
                while cand != 0 {
                    let tz = cand.trailing_zeros() as usize;
                    cand &= cand - 1;
                    self.increment(offset + b * BLOCK + tz);
                }
            }
        }
    }
}
