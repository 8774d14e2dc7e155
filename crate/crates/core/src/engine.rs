//! Tick procedure, whole runs, and replication batches.
//!
//! A run owns one ChaCha8 generator seeded from the run seed. Draws happen in
//! this order and nowhere else:
//!
//! 1. population build: one shuffle of the type list;
//! 2. each tick, phase 1: one shuffle of the agent order, then for each agent
//!    in that order one need draw and, on a hit, one depletion draw;
//! 3. each tick, phase 2: in agent-id order, one exploration draw for each
//!    reciprocator that reaches the exploration branch.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::MetricsFrame;
use crate::model::{
    build_population, draw_need, willing_to_contribute, Agent, Commons, Consumption, ModelParams,
    PopulationMix,
};

#[derive(Debug, Clone)]
pub struct TickState {
    pub tick: u32,
    pub agents: Vec<Agent>,
    pub commons: Commons,
    /// Units produced, both for own use and for posting.
    pub units_produced: u64,
    pub units_contributed: u64,
    pub needs_met: u64,
    order: Vec<usize>,
}

impl TickState {
    pub fn new(agents: Vec<Agent>, n_good_types: u32) -> Self {
        let order = (0..agents.len()).collect();
        Self {
            tick: 0,
            agents,
            commons: Commons::new(n_good_types),
            units_produced: 0,
            units_contributed: 0,
            needs_met: 0,
            order,
        }
    }

    pub fn value_out(&self, params: &ModelParams) -> f64 {
        params.benefit * self.needs_met as f64
    }

    pub fn cost_in(&self, params: &ModelParams) -> f64 {
        params.production_cost * self.units_produced as f64
            + params.contribution_cost * self.units_contributed as f64
    }
}

/// Need counts for one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TickOutcome {
    pub needs: u64,
    pub met_commons: u64,
    pub met_self: u64,
    pub contributed: u64,
}

/// Advances `state` by one tick: everyone consumes, then willing agents post.
pub fn tick<R: Rng + ?Sized>(state: &mut TickState, params: &ModelParams, rng: &mut R) -> TickOutcome {
    state.tick += 1;
    let now = state.tick;
    let mut out = TickOutcome::default();

    for (slot, i) in state.order.iter_mut().enumerate() {
        *i = slot;
    }
    state.order.shuffle(rng);

    for &i in &state.order {
        let agent = &mut state.agents[i];
        let need = draw_need(params.heterogeneity, params.n_good_types, rng);
        agent.needs_total += 1;
        out.needs += 1;
        match state.commons.consume(need, params.rivalry, rng) {
            Consumption::Hit { .. } => {
                agent.needs_met_commons += 1;
                agent.receipts += 1;
                agent.last_receipt_tick = Some(now);
                out.met_commons += 1;
            }
            Consumption::Miss if need == agent.specialty => {
                agent.needs_met_self += 1;
                state.units_produced += 1;
                out.met_self += 1;
            }
            Consumption::Miss => {}
        }
    }

    // Units posted here are first visible to next tick's consumption phase.
    for agent in state.agents.iter_mut() {
        if willing_to_contribute(agent, now, params, rng) {
            state.commons.contribute(agent.specialty);
            agent.contributions += 1;
            out.contributed += 1;
        }
    }
    state.units_produced += out.contributed;
    state.units_contributed += out.contributed;
    state.needs_met += out.met_commons + out.met_self;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub params: ModelParams,
    pub mix: PopulationMix,
    pub seed: u64,
    pub window_needs_total: u64,
    pub window_needs_met_commons: u64,
    pub window_needs_met_self: u64,
    pub total_value_out: f64,
    pub total_cost_in: f64,
    pub contributions: Vec<u64>,
    pub commons_in: u64,
    pub commons_out: u64,
    pub metrics: MetricsFrame,
}

/// A run in progress, for callers that want to observe every tick.
pub struct Simulation {
    params: ModelParams,
    mix: PopulationMix,
    seed: u64,
    rng: ChaCha8Rng,
    state: TickState,
    window: TickOutcome,
}

impl Simulation {
    pub fn new(params: ModelParams, mix: PopulationMix, seed: u64) -> Result<Self> {
        params.validate()?;
        mix.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agents = build_population(&params, &mix, &mut rng)?;
        let state = TickState::new(agents, params.n_good_types);
        Ok(Self {
            params,
            mix,
            seed,
            rng,
            state,
            window: TickOutcome::default(),
        })
    }

    pub fn state(&self) -> &TickState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.tick >= self.params.horizon
    }

    /// Runs one tick; returns `None` once the horizon is reached.
    pub fn step(&mut self) -> Option<TickOutcome> {
        if self.is_done() {
            return None;
        }
        let out = tick(&mut self.state, &self.params, &mut self.rng);
        if self.state.tick > self.params.warmup {
            self.window.needs += out.needs;
            self.window.met_commons += out.met_commons;
            self.window.met_self += out.met_self;
        }
        Some(out)
    }

    pub fn finish(mut self) -> Result<RunResult> {
        while self.step().is_some() {}
        let s = &self.state;
        let mut result = RunResult {
            params: self.params,
            mix: self.mix,
            seed: self.seed,
            window_needs_total: self.window.needs,
            window_needs_met_commons: self.window.met_commons,
            window_needs_met_self: self.window.met_self,
            total_value_out: s.value_out(&self.params),
            total_cost_in: s.cost_in(&self.params),
            contributions: s.agents.iter().map(|a| a.contributions).collect(),
            commons_in: s.commons.cumulative_in(),
            commons_out: s.commons.cumulative_out(),
            metrics: MetricsFrame::default(),
        };
        result.metrics = MetricsFrame::compute(&result)?;
        Ok(result)
    }
}

/// One complete run. Pure in `(params, mix, seed)`.
pub fn run(params: &ModelParams, mix: &PopulationMix, seed: u64) -> Result<RunResult> {
    Simulation::new(*params, *mix, seed)?.finish()
}

/// Runs every seed and returns results in seed order. Uses the current rayon
/// pool; the output does not depend on how many threads it has.
pub fn run_replications(params: &ModelParams, mix: &PopulationMix, seeds: &[u64]) -> Result<Vec<RunResult>> {
    if seeds.is_empty() {
        return Err(Error::Domain("replication batch needs at least one seed".into()));
    }
    seeds
        .par_iter()
        .map(|&seed| {
            run(params, mix, seed).map_err(|e| Error::Run {
                cell_id: 0,
                seed,
                source: Box::new(e),
            })
        })
        .collect()
}
