use rand::Rng;

use super::view::ViewOf;
use super::{
    AgentRng, Capture, Configuration, Encounter, InteractionRecord, Observation, Protocol, Role,
    Scheduler, StateOf, Streams, View,
};
use crate::{Error, Result};

/// When a run may stop before its step budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    /// Run the full budget.
    Never,
    /// Stop once [`Protocol::converged`] holds; checked after every
    /// effective step.
    Protocol,
    /// Stop once all decided agents agree and no effective transition
    /// happened in the last `window` steps.
    Quiescent { window: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Maximum number of steps executed by one call.
    pub budget: u64,
    pub convergence: Convergence,
}

impl RunOptions {
    pub fn budget(budget: u64) -> Self {
        Self { budget, convergence: Convergence::Never }
    }

    pub fn until_converged(budget: u64) -> Self {
        Self { budget, convergence: Convergence::Protocol }
    }
}

/// Final configuration, trace and captured views of a run.
#[derive(Clone, Debug)]
pub struct RunReport<P: Protocol> {
    pub converged: bool,
    pub steps: u64,
    pub final_config: Configuration<P::Hidden, P::Message>,
    pub trace: Vec<InteractionRecord>,
    pub views: Vec<Option<ViewOf<P>>>,
}

/// A single sequential execution of a protocol.
pub struct Execution<'p, P: Protocol> {
    protocol: &'p P,
    inputs: Vec<P::Input>,
    config: Configuration<P::Hidden, P::Message>,
    scheduler: Scheduler,
    coins: AgentRng,
    agent_rngs: Vec<AgentRng>,
    steps: u64,
    last_effective: u64,
    trace: Option<Vec<InteractionRecord>>,
    views: Vec<Option<ViewOf<P>>>,
}

impl<'p, P: Protocol> Execution<'p, P> {
    /// Applies the input function to every agent (agent `j` draws from its
    /// own input stream) and prepares the scheduler.
    pub fn new(protocol: &'p P, inputs: Vec<P::Input>, streams: &Streams) -> Result<Self> {
        let states = inputs
            .iter()
            .enumerate()
            .map(|(j, input)| protocol.initial_state(input, &mut streams.input(j)))
            .collect();
        Self::from_states(protocol, inputs, states, streams)
    }

    /// Starts from explicit agent states instead of the input function.
    pub fn from_states(
        protocol: &'p P,
        inputs: Vec<P::Input>,
        states: Vec<StateOf<P>>,
        streams: &Streams,
    ) -> Result<Self> {
        if inputs.len() != states.len() {
            return Err(Error::InvalidInput(format!(
                "{} inputs for {} agents",
                inputs.len(),
                states.len()
            )));
        }
        let config = Configuration::new(states)?;
        let n = config.n();
        Ok(Self {
            protocol,
            views: (0..n).map(|_| None).collect(),
            inputs,
            config,
            scheduler: Scheduler::new(n, streams.scheduler())?,
            coins: streams.coins(),
            agent_rngs: (0..n).map(|j| streams.transition(j)).collect(),
            steps: 0,
            last_effective: 0,
            trace: None,
        })
    }

    /// Records views of the selected agents. Must be set before stepping.
    pub fn capture(mut self, capture: Capture) -> Self {
        assert_eq!(self.steps, 0, "capture must be configured before the first step");
        for (j, slot) in self.views.iter_mut().enumerate() {
            *slot = capture.includes(j).then(|| View {
                input: self.inputs[j].clone(),
                initial_state: self.config.get(j).clone(),
                observations: Vec::new(),
            });
        }
        self
    }

    /// Keeps every [`InteractionRecord`]. Must be set before stepping.
    pub fn record_trace(mut self, on: bool) -> Self {
        assert_eq!(self.steps, 0, "tracing must be configured before the first step");
        self.trace = on.then(Vec::new);
        self
    }

    pub fn protocol(&self) -> &P {
        self.protocol
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Step index of the last state-changing interaction (0 if none).
    pub fn last_effective_step(&self) -> u64 {
        self.last_effective
    }

    pub fn inputs(&self) -> &[P::Input] {
        &self.inputs
    }

    pub fn config(&self) -> &Configuration<P::Hidden, P::Message> {
        &self.config
    }

    pub fn agents(&self) -> &[StateOf<P>] {
        self.config.agents()
    }

    pub fn view(&self, agent: usize) -> Option<&ViewOf<P>> {
        self.views[agent].as_ref()
    }

    pub fn trace(&self) -> Option<&[InteractionRecord]> {
        self.trace.as_deref()
    }

    pub fn is_converged(&self) -> bool {
        self.protocol.converged(self.config.agents())
    }

    /// Schedules one pair and applies the transition at both agents. Only
    /// the two scheduled agents are written.
    pub fn step(&mut self) -> Result<InteractionRecord> {
        let (i, j) = self.scheduler.next_pair();
        self.interact(i, j)
    }

    /// Applies one interaction between a chosen pair, bypassing the
    /// scheduler. Used for scripted tests and replays.
    pub fn interact(&mut self, i: usize, j: usize) -> Result<InteractionRecord> {
        let n = self.n();
        if i == j || i >= n || j >= n {
            return Err(Error::InvalidInput(format!("bad pair ({i}, {j}) for n={n}")));
        }
        let coin: u64 = self.coins.gen();
        let (init, resp) = (self.config.get(i), self.config.get(j));
        let new_init = self.protocol.transition(
            Encounter { role: Role::Initiator, partner: &resp.message, coin },
            &init.hidden,
            &init.message,
            &mut self.agent_rngs[i],
        )?;
        let new_resp = self.protocol.transition(
            Encounter { role: Role::Responder, partner: &init.message, coin },
            &resp.hidden,
            &resp.message,
            &mut self.agent_rngs[j],
        )?;
        let effective = new_init != *init || new_resp != *resp;
        if let Some(view) = self.views[i].as_mut() {
            view.observations.push(Observation {
                role: Role::Initiator,
                partner: resp.message.clone(),
                coin,
            });
        }
        if let Some(view) = self.views[j].as_mut() {
            view.observations.push(Observation {
                role: Role::Responder,
                partner: init.message.clone(),
                coin,
            });
        }
        self.config.set(i, new_init);
        self.config.set(j, new_resp);
        self.steps += 1;
        if effective {
            self.last_effective = self.steps;
        }
        let record = InteractionRecord { step: self.steps, initiator: i, responder: j };
        if let Some(trace) = self.trace.as_mut() {
            trace.push(record);
        }
        Ok(record)
    }

    /// Steps until the budget is spent or the convergence rule fires.
    /// Returns whether the run converged.
    pub fn advance(&mut self, opts: &RunOptions) -> Result<bool> {
        self.advance_with(opts, |_, _| {})
    }

    /// Like [`advance`](Self::advance), calling `on_step` after every step.
    pub fn advance_with<F>(&mut self, opts: &RunOptions, mut on_step: F) -> Result<bool>
    where
        F: FnMut(&InteractionRecord, &Self),
    {
        if opts.convergence == Convergence::Protocol && self.is_converged() {
            return Ok(true);
        }
        for _ in 0..opts.budget {
            let before = self.last_effective;
            let record = self.step()?;
            on_step(&record, self);
            match opts.convergence {
                Convergence::Never => {}
                Convergence::Protocol => {
                    if self.last_effective != before && self.is_converged() {
                        return Ok(true);
                    }
                }
                Convergence::Quiescent { window } => {
                    if self.steps - self.last_effective >= window && self.decided_agree() {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// All decided agents hold the same output and at least one is decided.
    pub fn decided_agree(&self) -> bool {
        let mut decided = self.agents().iter().filter_map(|a| self.protocol.output(a));
        match decided.next() {
            Some(first) => decided.all(|o| o == first),
            None => false,
        }
    }

    pub fn into_report(self, converged: bool) -> RunReport<P> {
        RunReport {
            converged,
            steps: self.steps,
            final_config: self.config,
            trace: self.trace.unwrap_or_default(),
            views: self.views,
        }
    }

    /// Runs to completion and packages the result.
    pub fn run(mut self, opts: &RunOptions) -> Result<RunReport<P>> {
        let converged = self.advance(opts)?;
        Ok(self.into_report(converged))
    }
}
