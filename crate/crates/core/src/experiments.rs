//! Sweep designs for the three figures and a deterministic sweep runner.
//!
//! Every run in a sweep gets its seed from [`derive_seed`] on
//! `(base_seed, cell_id, rep)`, so a row never depends on where its cell sits
//! in the spec, on how many replications were requested, or on scheduling.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::engine::run;
use crate::error::{Error, Result};
use crate::metrics::MetricsFrame;
use crate::model::{CooperationType, ModelParams, PopulationMix};
use crate::stats::mean_ci;

pub const CI_LEVEL: f64 = 0.95;

/// Cooperator fractions on the Figure 1 axis; 0.13 is the general population.
pub const FIG1_COOPERATOR_LEVELS: [f64; 12] = [0.0, 0.01, 0.02, 0.05, 0.10, 0.13, 0.15, 0.20, 0.30, 0.50, 0.75, 1.00];
pub const GENERAL_COOPERATOR_SHARE: f64 = 0.13;
pub const CALLOUT_COOPERATORS: f64 = 0.05;
pub const CALLOUT_RECIPROCATOR_SHARES: [f64; 5] = [0.0, 0.25, 0.50, 0.75, 1.0];
pub const FIG2_LEVELS: [f64; 3] = [0.0, 0.5, 1.0];
pub const FIG3_STEPS: u32 = 11;

/// splitmix64 step on `base ^ (cell_id << 32 | rep)`.
///
/// ```text
/// z = (base ^ (cell_id << 32 | rep)) + 0x9E3779B97F4A7C15   (mod 2^64)
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// z ^ (z >> 31)
/// ```
pub fn derive_seed(base: u64, cell_id: u32, rep: u32) -> u64 {
    let encoded = (u64::from(cell_id) << 32) | u64::from(rep);
    let mut z = (base ^ encoded).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub id: u32,
    pub label: String,
    pub mix: PopulationMix,
    /// Base parameters with this cell's overrides applied.
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub cells: Vec<Cell>,
    pub reps: u32,
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::config("reps", format!("{} must be at least 2", self.reps)));
        }
        if self.cells.is_empty() {
            return Err(Error::config("cells", "sweep has no cells"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for cell in &self.cells {
            if !seen.insert(cell.id) {
                return Err(Error::config("cell_id", format!("duplicate cell id {}", cell.id)));
            }
            cell.params.validate()?;
            cell.mix.validate()?;
        }
        Ok(())
    }

    pub fn cell_ids(&self) -> Vec<u32> {
        self.cells.iter().map(|c| c.id).collect()
    }

    pub fn with_reps(mut self, reps: u32) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_base_seed(mut self, seed: u64) -> Self {
        self.base_seed = seed;
        self
    }
}

/// The four populations of the Figure 2 design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Population {
    Cooperators,
    General,
    Reciprocators,
    FreeRiders,
}

impl Population {
    pub const ALL: [Population; 4] = [
        Population::Cooperators,
        Population::General,
        Population::Reciprocators,
        Population::FreeRiders,
    ];
    /// Populations drawn in the figure panels.
    pub const PLOTTED: [Population; 3] = [Population::Cooperators, Population::General, Population::Reciprocators];

    pub fn mix(self) -> PopulationMix {
        match self {
            Population::Cooperators => PopulationMix::all(CooperationType::Cooperator),
            Population::General => PopulationMix::general(),
            Population::Reciprocators => PopulationMix::all(CooperationType::Reciprocator),
            Population::FreeRiders => PopulationMix::all(CooperationType::FreeRider),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Population::Cooperators => "cooperators",
            Population::General => "general",
            Population::Reciprocators => "reciprocators",
            Population::FreeRiders => "free-riders",
        }
    }

    fn index(self) -> u32 {
        self as u32
    }
}

fn with_environment(base: &ModelParams, rivalry: f64, heterogeneity: f64) -> ModelParams {
    ModelParams {
        rivalry,
        heterogeneity,
        ..*base
    }
}

fn fig1_mix(cooperators: f64) -> PopulationMix {
    // remainder split at the general population's 63:20
    let rest = 1.0 - cooperators;
    PopulationMix {
        cooperators,
        reciprocators: rest * 63.0 / 83.0,
        free_riders: rest * 20.0 / 83.0,
    }
}

/// Mean performance against cooperator share, non-rival goods, maximal
/// need heterogeneity.
pub fn sweep_fig1(base: &ModelParams, reps: u32, base_seed: u64) -> SweepSpec {
    let params = with_environment(base, 0.0, 1.0);
    let cells = FIG1_COOPERATOR_LEVELS
        .iter()
        .enumerate()
        .map(|(i, &pc)| Cell {
            id: i as u32,
            label: format!("pC={pc}"),
            mix: fig1_mix(pc),
            params,
        })
        .collect();
    SweepSpec {
        name: "fig1".into(),
        cells,
        reps,
        base_seed,
    }
}

/// Cooperators fixed at 5%, varying how the rest splits into reciprocators
/// and free riders.
pub fn sweep_fig1_callout(base: &ModelParams, reps: u32, base_seed: u64) -> SweepSpec {
    let params = with_environment(base, 0.0, 1.0);
    let rest = 1.0 - CALLOUT_COOPERATORS;
    let cells = CALLOUT_RECIPROCATOR_SHARES
        .iter()
        .enumerate()
        .map(|(i, &share)| Cell {
            id: i as u32,
            label: format!("reciprocator share={share}"),
            mix: PopulationMix {
                cooperators: CALLOUT_COOPERATORS,
                reciprocators: rest * share,
                free_riders: rest * (1.0 - share),
            },
            params,
        })
        .collect();
    SweepSpec {
        name: "fig1_callout".into(),
        cells,
        reps,
        base_seed,
    }
}

pub fn fig2_cell_id(population: Population, rivalry_level: usize, heterogeneity_level: usize) -> u32 {
    population.index() * 9 + rivalry_level as u32 * 3 + heterogeneity_level as u32
}

/// Four populations crossed with three rivalry and three heterogeneity levels.
pub fn sweep_fig2(base: &ModelParams, reps: u32, base_seed: u64) -> SweepSpec {
    let mut cells = Vec::with_capacity(36);
    for pop in Population::ALL {
        for (ri, &r) in FIG2_LEVELS.iter().enumerate() {
            for (hi, &h) in FIG2_LEVELS.iter().enumerate() {
                cells.push(Cell {
                    id: fig2_cell_id(pop, ri, hi),
                    label: format!("{}/R={r}/H={h}", pop.label()),
                    mix: pop.mix(),
                    params: with_environment(base, r, h),
                });
            }
        }
    }
    SweepSpec {
        name: "fig2".into(),
        cells,
        reps,
        base_seed,
    }
}

pub fn fig3_level(step: u32) -> f64 {
    f64::from(step) / f64::from(FIG3_STEPS - 1)
}

pub fn fig3_cell_id(rivalry_step: u32, heterogeneity_step: u32) -> u32 {
    rivalry_step * FIG3_STEPS + heterogeneity_step
}

/// Corner cells as `(label, cell_id)`, tragedy corner (R=1, H=0) first.
pub fn fig3_corners() -> [(&'static str, u32); 4] {
    let top = FIG3_STEPS - 1;
    [
        ("R=1,H=0", fig3_cell_id(top, 0)),
        ("R=0,H=0", fig3_cell_id(0, 0)),
        ("R=0,H=1", fig3_cell_id(0, top)),
        ("R=1,H=1", fig3_cell_id(top, top)),
    ]
}

/// General population over an 11 x 11 grid of rivalry and heterogeneity.
pub fn sweep_fig3(base: &ModelParams, reps: u32, base_seed: u64) -> SweepSpec {
    let mut cells = Vec::with_capacity((FIG3_STEPS * FIG3_STEPS) as usize);
    for ri in 0..FIG3_STEPS {
        for hi in 0..FIG3_STEPS {
            let (r, h) = (fig3_level(ri), fig3_level(hi));
            cells.push(Cell {
                id: fig3_cell_id(ri, hi),
                label: format!("R={r}/H={h}"),
                mix: PopulationMix::general(),
                params: with_environment(base, r, h),
            });
        }
    }
    SweepSpec {
        name: "fig3".into(),
        cells,
        reps,
        base_seed,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub cell_id: u32,
    pub mix: PopulationMix,
    pub params: ModelParams,
    pub seed: u64,
    pub metrics: MetricsFrame,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell_id: u32,
    pub mix: PopulationMix,
    pub params: ModelParams,
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    /// Sorted by cell id, then replication.
    pub rows: Vec<RunRow>,
    pub summaries: Vec<CellSummary>,
}

impl ResultTable {
    /// Builds a table from rows, grouping by cell id and summarizing
    /// performance with a 95% t interval. Row order within a cell is kept.
    pub fn from_rows(name: impl Into<String>, rows: Vec<RunRow>) -> Result<Self> {
        let mut by_cell: BTreeMap<u32, Vec<RunRow>> = BTreeMap::new();
        for row in rows {
            by_cell.entry(row.cell_id).or_default().push(row);
        }
        let mut summaries = Vec::with_capacity(by_cell.len());
        for (&cell_id, cell_rows) in &by_cell {
            let values: Vec<f64> = cell_rows.iter().map(|r| r.metrics.performance).collect();
            let ci = mean_ci(&values, CI_LEVEL)?;
            summaries.push(CellSummary {
                cell_id,
                mix: cell_rows[0].mix,
                params: cell_rows[0].params,
                mean: ci.mean,
                ci_lo: ci.lower,
                ci_hi: ci.upper,
                n: values.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            rows: by_cell.into_values().flatten().collect(),
            summaries,
        })
    }

    pub fn summary(&self, cell_id: u32) -> Option<&CellSummary> {
        self.summaries
            .binary_search_by_key(&cell_id, |s| s.cell_id)
            .ok()
            .map(|i| &self.summaries[i])
    }

    pub fn cell_rows(&self, cell_id: u32) -> impl Iterator<Item = &RunRow> {
        self.rows.iter().filter(move |r| r.cell_id == cell_id)
    }

    pub fn performances(&self, cell_id: u32) -> Vec<f64> {
        self.cell_rows(cell_id).map(|r| r.metrics.performance).collect()
    }

    /// Cell ids from `expected` that have no summary.
    pub fn missing(&self, expected: &[u32]) -> Vec<u32> {
        expected
            .iter()
            .copied()
            .filter(|&id| self.summary(id).is_none())
            .collect()
    }

    pub fn require(&self, expected: &[u32]) -> Result<()> {
        let missing = self.missing(expected);
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingCells {
                table: self.name.clone(),
                ids: missing,
            })
        }
    }

    /// Copy whose metrics are replaced by their persisted CSV form.
    pub fn quantized(&self) -> Result<Self> {
        let rows = self
            .rows
            .iter()
            .map(|r| RunRow {
                metrics: crate::report::csv::quantize_metrics(&r.metrics),
                ..r.clone()
            })
            .collect();
        Self::from_rows(self.name.clone(), rows)
    }
}

/// Runs `reps` replications of every cell on a pool of `parallelism` threads.
pub fn run_sweep(spec: &SweepSpec, parallelism: usize) -> Result<ResultTable> {
    if parallelism < 1 {
        return Err(Error::config("parallelism", "must be at least 1"));
    }
    spec.validate()?;
    let units: Vec<(&Cell, u32)> = spec
        .cells
        .iter()
        .flat_map(|c| (0..spec.reps).map(move |rep| (c, rep)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    log::info!(
        "sweep {}: {} cells x {} reps on {} threads",
        spec.name,
        spec.cells.len(),
        spec.reps,
        parallelism
    );
    let rows: Vec<RunRow> = pool.install(|| {
        units
            .par_iter()
            .map(|&(cell, rep)| {
                let seed = derive_seed(spec.base_seed, cell.id, rep);
                run(&cell.params, &cell.mix, seed)
                    .map(|r| RunRow {
                        cell_id: cell.id,
                        mix: cell.mix,
                        params: cell.params,
                        seed,
                        metrics: r.metrics,
                    })
                    .map_err(|e| Error::Run {
                        cell_id: cell.id,
                        seed,
                        source: Box::new(e),
                    })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    ResultTable::from_rows(spec.name.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent splitmix64 implementation.
    const GOLDEN_BASE: u64 = 0x9E37_79B9_7F4A_7C15;
    const GOLDEN: [(u32, u32, u64); 4] = [
        (0, 0, 0x6E78_9E6A_A1B9_65F4),
        (0, 1, 0xE99F_F867_DBF6_82C9),
        (1, 0, 0x4B18_E50A_8382_0B3F),
        (120, 29, 0xDC15_67CD_6E27_A638),
    ];

    #[test]
    fn derive_seed_golden_vectors() {
        for (cell, rep, expected) in GOLDEN {
            assert_eq!(derive_seed(GOLDEN_BASE, cell, rep), expected, "({cell}, {rep})");
        }
        assert_ne!(derive_seed(GOLDEN_BASE, 0, 0), derive_seed(GOLDEN_BASE, 0, 1));
        for (cell, rep, expected) in GOLDEN {
            assert_ne!(derive_seed(GOLDEN_BASE ^ 1, cell, rep), expected);
        }
    }

    fn sums_to_one(spec: &SweepSpec) -> bool {
        spec.cells.iter().all(|c| c.mix.validate().is_ok())
    }

    #[test]
    fn fig1_design() {
        let spec = sweep_fig1(&ModelParams::default(), 30, 1);
        assert_eq!(spec.cells.len(), 12);
        assert!(spec.cells.iter().any(|c| c.mix.cooperators == GENERAL_COOPERATOR_SHARE));
        let last = spec.cells.last().unwrap();
        assert_eq!((last.mix.reciprocators, last.mix.free_riders), (0.0, 0.0));
        assert!(sums_to_one(&spec));
        assert!(spec.cells.iter().all(|c| c.params.rivalry == 0.0 && c.params.heterogeneity == 1.0));
        spec.validate().unwrap();
    }

    #[test]
    fn callout_design() {
        let spec = sweep_fig1_callout(&ModelParams::default(), 30, 1);
        assert_eq!(spec.cells.len(), 5);
        let first = spec.cells[0].mix;
        let last = spec.cells[4].mix;
        assert_eq!((first.cooperators, first.reciprocators, first.free_riders), (0.05, 0.0, 0.95));
        assert_eq!((last.cooperators, last.reciprocators, last.free_riders), (0.05, 0.95, 0.0));
        assert!(sums_to_one(&spec));
    }

    #[test]
    fn fig2_design() {
        let spec = sweep_fig2(&ModelParams::default(), 30, 1);
        assert_eq!(spec.cells.len(), 36);
        spec.validate().unwrap();
        let id = fig2_cell_id(Population::FreeRiders, 2, 0);
        let cell = spec.cells.iter().find(|c| c.id == id).unwrap();
        assert_eq!((cell.params.rivalry, cell.params.heterogeneity), (1.0, 0.0));
        assert_eq!(cell.mix, PopulationMix::all(CooperationType::FreeRider));
    }

    #[test]
    fn fig3_design() {
        let spec = sweep_fig3(&ModelParams::default(), 30, 1);
        assert_eq!(spec.cells.len(), 121);
        spec.validate().unwrap();
        assert!(spec.cells.iter().all(|c| c.mix == PopulationMix::general()));
        let corners: Vec<(f64, f64)> = fig3_corners()
            .iter()
            .map(|&(_, id)| {
                let c = spec.cells.iter().find(|c| c.id == id).unwrap();
                (c.params.rivalry, c.params.heterogeneity)
            })
            .collect();
        assert_eq!(corners, vec![(1.0, 0.0), (0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        let r3 = spec.cells.iter().find(|c| c.id == fig3_cell_id(3, 7)).unwrap();
        assert_eq!((r3.params.rivalry, r3.params.heterogeneity), (0.3, 0.7));
    }

    #[test]
    fn spec_validation() {
        let mut spec = sweep_fig1(&ModelParams::default(), 1, 1);
        assert_eq!(spec.validate().unwrap_err().violated_keys(), vec!["reps"]);
        spec.reps = 2;
        spec.cells[1].id = 0;
        assert_eq!(spec.validate().unwrap_err().violated_keys(), vec!["cell_id"]);
    }
}
