//! Agents, needs, and the shared commons.
//!
//! Everything in here is a plain value type. The random generator is always
//! passed in by the caller so that a run's draw order is fixed by the engine.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Tolerance on `pC + pR + pF = 1`.
pub const MIX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CooperationType {
    Cooperator,
    Reciprocator,
    FreeRider,
}

impl CooperationType {
    pub const ALL: [CooperationType; 3] = [
        CooperationType::Cooperator,
        CooperationType::Reciprocator,
        CooperationType::FreeRider,
    ];
}

/// Fractions of the three cooperative types in a population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationMix {
    pub cooperators: f64,
    pub reciprocators: f64,
    pub free_riders: f64,
}

impl PopulationMix {
    /// Published type frequencies in the general population: cooperators,
    /// reciprocators, free riders, and the unclassified remainder.
    pub const GENERAL_RAW: [f64; 4] = [0.13, 0.63, 0.20, 0.04];

    pub fn new(cooperators: f64, reciprocators: f64, free_riders: f64) -> Result<Self> {
        let mix = Self {
            cooperators,
            reciprocators,
            free_riders,
        };
        mix.validate()?;
        Ok(mix)
    }

    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        for (key, value) in [
            ("pC", self.cooperators),
            ("pR", self.reciprocators),
            ("pF", self.free_riders),
        ] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                violations.push(Violation::new(key, format!("{value} is outside [0, 1]")));
            }
        }
        let sum = self.cooperators + self.reciprocators + self.free_riders;
        if (sum - 1.0).abs() > MIX_TOLERANCE {
            violations.push(Violation::new("mix", format!("fractions sum to {sum}, not 1")));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(violations))
        }
    }

    /// The general-population mix: 13/63/20 renormalized over the 96% that
    /// could be classified.
    pub fn general() -> Self {
        let [c, r, f, unclassified] = Self::GENERAL_RAW;
        let classified = 1.0 - unclassified;
        Self {
            cooperators: c / classified,
            reciprocators: r / classified,
            free_riders: f / classified,
        }
    }

    pub fn all(ctype: CooperationType) -> Self {
        let mut fractions = [0.0; 3];
        fractions[ctype as usize] = 1.0;
        Self {
            cooperators: fractions[0],
            reciprocators: fractions[1],
            free_riders: fractions[2],
        }
    }

    pub fn fractions(&self) -> [f64; 3] {
        [self.cooperators, self.reciprocators, self.free_riders]
    }

    /// Largest-remainder apportionment of `n` seats over the three types.
    /// Ties in the remainder go to the earlier type (C, then R, then F).
    pub fn apportion(&self, n: u32) -> [u32; 3] {
        let quotas = self.fractions().map(|p| {
            let q = p * f64::from(n);
            // 96 * (13/96) must count as exactly 13
            if (q - q.round()).abs() < 1e-9 {
                q.round()
            } else {
                q
            }
        });
        let mut counts = quotas.map(|q| q.floor() as u32);
        let assigned: u32 = counts.iter().sum();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().take(n.saturating_sub(assigned) as usize) {
            counts[i] += 1;
        }
        counts
    }
}

/// Index of a good type in `[0, G)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GoodType(pub u32);

impl GoodType {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agent {
    pub id: u32,
    pub ctype: CooperationType,
    pub specialty: GoodType,
    pub last_receipt_tick: Option<u32>,
    pub needs_total: u64,
    pub needs_met_commons: u64,
    pub needs_met_self: u64,
    pub contributions: u64,
    pub receipts: u64,
}

impl Agent {
    pub fn new(id: u32, ctype: CooperationType, specialty: GoodType) -> Self {
        Self {
            id,
            ctype,
            specialty,
            last_receipt_tick: None,
            needs_total: 0,
            needs_met_commons: 0,
            needs_met_self: 0,
            contributions: 0,
            receipts: 0,
        }
    }
}

/// Shared stock of goods, open to every agent regardless of type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commons {
    stock: Vec<u64>,
    cumulative_in: u64,
    cumulative_out: u64,
}

impl Commons {
    pub fn new(n_good_types: u32) -> Self {
        Self {
            stock: vec![0; n_good_types as usize],
            cumulative_in: 0,
            cumulative_out: 0,
        }
    }

    pub fn stock(&self, good: GoodType) -> u64 {
        self.stock[good.index()]
    }

    pub fn stocks(&self) -> &[u64] {
        &self.stock
    }

    pub fn cumulative_in(&self) -> u64 {
        self.cumulative_in
    }

    pub fn cumulative_out(&self) -> u64 {
        self.cumulative_out
    }

    pub fn total_stock(&self) -> u64 {
        self.stock.iter().sum()
    }

    /// `sum(stock) == cumulative_in - cumulative_out`.
    pub fn is_conserved(&self) -> bool {
        self.cumulative_out <= self.cumulative_in
            && self.total_stock() == self.cumulative_in - self.cumulative_out
    }

    /// Posts one unit of `good`.
    pub fn contribute(&mut self, good: GoodType) {
        self.stock[good.index()] += 1;
        self.cumulative_in += 1;
    }

    /// Attempts to take one unit of `good`. A hit always satisfies the need;
    /// the unit is removed with probability `rivalry`. One uniform draw is
    /// consumed on every hit and none on a miss.
    pub fn consume<R: Rng + ?Sized>(&mut self, good: GoodType, rivalry: f64, rng: &mut R) -> Consumption {
        let slot = &mut self.stock[good.index()];
        if *slot == 0 {
            return Consumption::Miss;
        }
        let depleted = rng.gen::<f64>() < rivalry;
        if depleted {
            *slot -= 1;
            self.cumulative_out += 1;
        }
        Consumption::Hit { depleted }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consumption {
    Hit { depleted: bool },
    Miss,
}

/// The full configuration of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub n_agents: u32,
    pub n_good_types: u32,
    /// Probability that a consumed unit is removed from the commons.
    pub rivalry: f64,
    /// Dispersion of needs over good types; 0 puts every need on type 0.
    pub heterogeneity: f64,
    pub horizon: u32,
    pub warmup: u32,
    pub benefit: f64,
    pub production_cost: f64,
    pub contribution_cost: f64,
    /// Ticks a reciprocator keeps contributing after its last receipt.
    pub memory: u32,
    /// Per-tick probability that an unprompted reciprocator contributes anyway.
    pub exploration: f64,
    /// Ticks during which reciprocators contribute unconditionally.
    pub priming: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            n_agents: 100,
            n_good_types: 20,
            rivalry: 0.0,
            heterogeneity: 1.0,
            horizon: 1000,
            warmup: 500,
            benefit: 1.0,
            production_cost: 0.2,
            contribution_cost: 0.1,
            memory: 10,
            exploration: 0.0,
            priming: 0,
        }
    }
}

impl ModelParams {
    /// Checks every bound and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let unit = |key: &str, x: f64, v: &mut Vec<Violation>| {
            if !x.is_finite() || !(0.0..=1.0).contains(&x) {
                v.push(Violation::new(key, format!("{x} is outside [0, 1]")));
            }
        };
        if self.n_agents < 1 {
            v.push(Violation::new("n_agents", "must be at least 1"));
        }
        if self.n_good_types < 1 {
            v.push(Violation::new("n_good_types", "must be at least 1"));
        }
        unit("rivalry", self.rivalry, &mut v);
        unit("heterogeneity", self.heterogeneity, &mut v);
        unit("exploration", self.exploration, &mut v);
        if self.warmup >= self.horizon {
            v.push(Violation::new(
                "warmup",
                format!("{} must be smaller than horizon {}", self.warmup, self.horizon),
            ));
        }
        if !(self.benefit.is_finite() && self.benefit > 0.0) {
            v.push(Violation::new("benefit", format!("{} must be positive", self.benefit)));
        }
        for (key, cost) in [
            ("production_cost", self.production_cost),
            ("contribution_cost", self.contribution_cost),
        ] {
            if !(cost.is_finite() && cost >= 0.0) {
                v.push(Violation::new(key, format!("{cost} must be non-negative")));
            }
        }
        if self.memory < 1 {
            v.push(Violation::new("memory", "must be at least 1"));
        }
        if v.is_empty() {
            if self.n_good_types > self.n_agents {
                log::warn!(
                    "n_good_types {} exceeds n_agents {}; some good types have no producer",
                    self.n_good_types,
                    self.n_agents
                );
            }
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    pub fn window_len(&self) -> u32 {
        self.horizon - self.warmup
    }
}

/// Builds `n_agents` agents with type counts apportioned from `mix`.
///
/// Types are placed in a random order (one shuffle from `rng`); specialties
/// are round-robin by id, so agent `i` produces good `i mod G`.
pub fn build_population<R: Rng + ?Sized>(
    params: &ModelParams,
    mix: &PopulationMix,
    rng: &mut R,
) -> Result<Vec<Agent>> {
    mix.validate()?;
    if params.n_agents < 1 || params.n_good_types < 1 {
        return Err(Error::config("n_agents", "population needs N >= 1 and G >= 1"));
    }
    let counts = mix.apportion(params.n_agents);
    let mut types: Vec<CooperationType> = CooperationType::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&t, c)| std::iter::repeat_n(t, c as usize))
        .collect();
    types.shuffle(rng);
    Ok(types
        .into_iter()
        .enumerate()
        .map(|(i, ctype)| {
            let id = i as u32;
            Agent::new(id, ctype, GoodType(id % params.n_good_types))
        })
        .collect())
}

/// Draws the good an agent needs this tick.
///
/// Type 0 has mass `(1 - H) + H/G`; every other type has mass `H/G`. Uses a
/// single uniform draw.
pub fn draw_need<R: Rng + ?Sized>(heterogeneity: f64, n_good_types: u32, rng: &mut R) -> GoodType {
    let u: f64 = rng.gen();
    let common = 1.0 - heterogeneity;
    if u < common {
        return GoodType(0);
    }
    let scaled = (u - common) / heterogeneity * f64::from(n_good_types);
    GoodType((scaled as u32).min(n_good_types - 1))
}

/// Whether `agent` contributes at `tick` (1-based).
///
/// Only reciprocators past the priming window with no recent receipt touch
/// the generator, and then exactly once.
pub fn willing_to_contribute<R: Rng + ?Sized>(
    agent: &Agent,
    tick: u32,
    params: &ModelParams,
    rng: &mut R,
) -> bool {
    match agent.ctype {
        CooperationType::Cooperator => true,
        CooperationType::FreeRider => false,
        CooperationType::Reciprocator => {
            if tick <= params.priming {
                return true;
            }
            if let Some(last) = agent.last_receipt_tick {
                if tick.saturating_sub(last) <= params.memory {
                    return true;
                }
            }
            rng.gen::<f64>() < params.exploration
        }
    }
}
