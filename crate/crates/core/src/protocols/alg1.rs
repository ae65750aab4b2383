//! Unit-transfer Remainder protocol. The whole state `(v, f)` is visible.
//!
//! ```text
//! M1  (v1,1), (v2,1)   -> (v1+1,1), (v2-1,1)
//! M2  (*,1),  (*,*)    -> (*,0),    (*,*)
//! M3  (*,0),  (*,1)    -> (*,1),    (*,1)
//! M4  (v1,0), (v2,0)   -> (v1+v2,0), (0,0)
//! M5  (v1,0), (0,0)    -> (v1,0),   (⊥0,0)
//! M6  (⊥i,*), (*,1)    -> (0,0),    (*,1)
//! M7  (r,0),  (⊥i,0)   -> (r,0),    (⊥1,0)
//! M8  (v1,0), (⊥i,0)   -> (v1,0),   (⊥0,0)   if v1 != r
//! ```
//!
//! Rule choice: when M1 and M2 both match, M1 is taken with probability
//! `p_m1` using the shared interaction coin. M6 takes precedence over the
//! flag rules M2/M3 it overlaps with, and M4 with a zero responder (a null
//! move) yields to M5. Otherwise the rules do not overlap.

use serde::{Deserialize, Serialize};

use super::RemainderParams;
use crate::engine::{AgentRng, AgentState, Encounter, Protocol, Role, StateOf};
use crate::{Error, Result};

/// Agent value: a residue, or a decided marker `⊥0`/`⊥1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Value {
    Num(u8),
    Decided(bool),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alg1State {
    pub v: Value,
    pub flag: bool,
}

impl Alg1State {
    pub fn num(v: u8, flag: bool) -> Self {
        Self { v: Value::Num(v), flag }
    }

    pub fn decided(out: bool, flag: bool) -> Self {
        Self { v: Value::Decided(out), flag }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alg1Rule {
    M1,
    M2,
    M3,
    M4,
    M5,
    M6,
    M7,
    M8,
}

/// `true` with probability `p` for a uniform 64-bit coin.
pub fn coin_below(coin: u64, p: f64) -> bool {
    ((coin >> 11) as f64) * (1.0 / (1u64 << 53) as f64) < p
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Alg1 {
    pub params: RemainderParams,
    /// Probability of M1 when M1 and M2 both apply.
    pub p_m1: f64,
}

impl Alg1 {
    pub fn new(params: RemainderParams, p_m1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_m1) {
            return Err(Error::InvalidInput(format!("p_m1={p_m1} is not a probability")));
        }
        Ok(Self { params, p_m1 })
    }

    pub fn select_rule(&self, a: &Alg1State, b: &Alg1State, coin: u64) -> Option<Alg1Rule> {
        use Value::*;
        let r = self.params.r;
        match (a.v, a.flag, b.v, b.flag) {
            (Num(_), true, Num(_), true) => {
                Some(if coin_below(coin, self.p_m1) { Alg1Rule::M1 } else { Alg1Rule::M2 })
            }
            (Decided(_), _, _, true) => Some(Alg1Rule::M6),
            (_, true, _, _) => Some(Alg1Rule::M2),
            (_, false, _, true) => Some(Alg1Rule::M3),
            (Num(_), false, Num(0), false) => Some(Alg1Rule::M5),
            (Num(_), false, Num(_), false) => Some(Alg1Rule::M4),
            (Num(v1), false, Decided(d), false) => {
                if v1 == r {
                    (!d).then_some(Alg1Rule::M7)
                } else {
                    d.then_some(Alg1Rule::M8)
                }
            }
            (Decided(_), false, _, false) => None,
        }
    }

    /// Applies `rule` to the ordered pair. The caller guarantees the rule
    /// matches.
    pub fn apply(&self, rule: Alg1Rule, a: &Alg1State, b: &Alg1State) -> (Alg1State, Alg1State) {
        let k = self.params.k;
        let num = |v: Value| match v {
            Value::Num(x) => x,
            Value::Decided(_) => unreachable!("rule applied to a decided value"),
        };
        match rule {
            Alg1Rule::M1 => (
                Alg1State::num(k.add(num(a.v), 1), true),
                Alg1State::num(k.sub(num(b.v), 1), true),
            ),
            Alg1Rule::M2 => (Alg1State { flag: false, ..*a }, *b),
            Alg1Rule::M3 => (Alg1State { flag: true, ..*a }, *b),
            Alg1Rule::M4 => (
                Alg1State::num(k.add(num(a.v), num(b.v)), false),
                Alg1State::num(0, false),
            ),
            Alg1Rule::M5 => (*a, Alg1State::decided(false, false)),
            Alg1Rule::M6 => (Alg1State::num(0, false), *b),
            Alg1Rule::M7 => (*a, Alg1State::decided(true, false)),
            Alg1Rule::M8 => (*a, Alg1State::decided(false, false)),
        }
    }

    /// Full pairwise transition, as both participants compute it.
    pub fn interact(
        &self,
        a: &Alg1State,
        b: &Alg1State,
        coin: u64,
    ) -> (Option<Alg1Rule>, Alg1State, Alg1State) {
        match self.select_rule(a, b, coin) {
            Some(rule) => {
                let (a2, b2) = self.apply(rule, a, b);
                (Some(rule), a2, b2)
            }
            None => (None, *a, *b),
        }
    }

    /// Sum of residues with decided agents counting as 0.
    pub fn value_sum(&self, agents: &[StateOf<Self>]) -> u8 {
        self.params.k.sum(agents.iter().map(|a| match a.message.v {
            Value::Num(x) => x,
            Value::Decided(_) => 0,
        }))
    }

    /// Majority of decided outputs, if any agent is decided.
    pub fn population_output(&self, agents: &[StateOf<Self>]) -> Option<bool> {
        let (mut yes, mut no) = (0usize, 0usize);
        for a in agents {
            match a.message.v {
                Value::Decided(true) => yes += 1,
                Value::Decided(false) => no += 1,
                Value::Num(_) => {}
            }
        }
        (yes + no > 0).then_some(yes > no)
    }
}

impl Protocol for Alg1 {
    type Input = u8;
    type Hidden = ();
    type Message = Alg1State;
    type Output = bool;

    fn initial_state(&self, input: &u8, _rng: &mut AgentRng) -> StateOf<Self> {
        AgentState::new((), Alg1State::num(*input % self.params.k.get(), true))
    }

    fn transition(
        &self,
        encounter: Encounter<'_, Alg1State>,
        _hidden: &(),
        own: &Alg1State,
        _rng: &mut AgentRng,
    ) -> Result<StateOf<Self>> {
        let next = match encounter.role {
            Role::Initiator => self.interact(own, encounter.partner, encounter.coin).1,
            Role::Responder => self.interact(encounter.partner, own, encounter.coin).2,
        };
        Ok(AgentState::new((), next))
    }

    fn output(&self, state: &StateOf<Self>) -> Option<bool> {
        match state.message.v {
            Value::Decided(b) => Some(b),
            Value::Num(_) => None,
        }
    }

    /// Terminal configuration: one residue holder, no raised flags, and
    /// every decided agent showing the holder's verdict. No rule changes
    /// such a configuration.
    fn converged(&self, agents: &[StateOf<Self>]) -> bool {
        let mut holder = None;
        for a in agents {
            if a.message.flag {
                return false;
            }
            if let Value::Num(x) = a.message.v {
                if holder.replace(x).is_some() {
                    return false;
                }
            }
        }
        let Some(total) = holder else { return false };
        let verdict = total == self.params.r;
        agents.iter().all(|a| match a.message.v {
            Value::Decided(d) => d == verdict,
            Value::Num(_) => true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Execution, RunOptions, Streams};

    fn alg(k: u32, r: u32, p: f64) -> Alg1 {
        Alg1::new(RemainderParams::new(k, r).unwrap(), p).unwrap()
    }

    #[test]
    fn m4_accumulates() {
        let a = alg(4, 0, 0.5);
        let (rule, x, y) = a.interact(&Alg1State::num(2, false), &Alg1State::num(3, false), 0);
        assert_eq!(rule, Some(Alg1Rule::M4));
        assert_eq!((x, y), (Alg1State::num(1, false), Alg1State::num(0, false)));
    }

    #[test]
    fn m7_decides_true() {
        let a = alg(5, 2, 0.5);
        let (rule, x, y) =
            a.interact(&Alg1State::num(2, false), &Alg1State::decided(false, false), 0);
        assert_eq!(rule, Some(Alg1Rule::M7));
        assert_eq!((x, y), (Alg1State::num(2, false), Alg1State::decided(true, false)));
        let (rule, _, y) =
            a.interact(&Alg1State::num(3, false), &Alg1State::decided(true, false), 0);
        assert_eq!(rule, Some(Alg1Rule::M8));
        assert_eq!(y, Alg1State::decided(false, false));
    }

    #[test]
    fn forced_m1_preserves_total() {
        let a = alg(5, 0, 1.0);
        let (rule, x, y) =
            a.interact(&Alg1State::num(2, true), &Alg1State::num(3, true), u64::MAX);
        assert_eq!(rule, Some(Alg1Rule::M1));
        assert_eq!((x, y), (Alg1State::num(3, true), Alg1State::num(2, true)));
        let a = alg(5, 0, 0.0);
        let (rule, x, _) = a.interact(&Alg1State::num(2, true), &Alg1State::num(3, true), 0);
        assert_eq!(rule, Some(Alg1Rule::M2));
        assert_eq!(x, Alg1State::num(2, false));
    }

    #[test]
    fn precedence_between_overlapping_rules() {
        let a = alg(3, 1, 0.5);
        // M5 instead of a null M4.
        let (rule, _, y) = a.interact(&Alg1State::num(2, false), &Alg1State::num(0, false), 0);
        assert_eq!(rule, Some(Alg1Rule::M5));
        assert_eq!(y, Alg1State::decided(false, false));
        // M6 instead of M3.
        let (rule, x, _) =
            a.interact(&Alg1State::decided(true, false), &Alg1State::num(0, true), 0);
        assert_eq!(rule, Some(Alg1Rule::M6));
        assert_eq!(x, Alg1State::num(0, false));
        // M3 for a residue holder.
        let (rule, x, _) = a.interact(&Alg1State::num(1, false), &Alg1State::num(0, true), 0);
        assert_eq!(rule, Some(Alg1Rule::M3));
        assert_eq!(x, Alg1State::num(1, true));
        // Nothing between two decided agents.
        let (rule, ..) = a.interact(
            &Alg1State::decided(true, false),
            &Alg1State::decided(false, false),
            0,
        );
        assert_eq!(rule, None);
    }

    #[test]
    fn coin_threshold() {
        assert!(coin_below(0, 0.5));
        assert!(!coin_below(u64::MAX, 0.5));
        assert!(!coin_below(0, 0.0));
        assert!(coin_below(u64::MAX, 1.0));
    }

    #[test]
    fn small_runs_decide_correctly() {
        let a = alg(3, 2, 0.5);
        for t in 0..20u64 {
            let inputs = vec![1, 2, 2, 0, 1, (t % 3) as u8];
            let truth = (inputs.iter().map(|&x| x as u32).sum::<u32>() % 3) == 2;
            let exec = Execution::new(&a, inputs, &Streams::new(t)).unwrap();
            let report = exec.run(&RunOptions::until_converged(5_000_000)).unwrap();
            assert!(report.converged, "trial {t} did not converge");
            assert_eq!(a.population_output(report.final_config.agents()), Some(truth));
        }
    }
}
