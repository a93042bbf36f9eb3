//! Reproducible Monte Carlo experiments.
//!
//! Every replica is a pure function of `(config, base seed, replica index)`.
//! Replicas run on a thread pool and are merged in index order, so the
//! outputs do not depend on the number of workers. Estimates that the
//! replicas need up front (the width `Delta_r` of the pair-sampling
//! cylinders) come from a pilot run over the first replicas.

mod analysis;
mod config;
mod cylinder;
mod replica;
mod table;
mod tail;
#[cfg(test)]
mod tests;

pub use analysis::{
    DensitySummary, FluctuationSummary, HmuSummary, MonotoneSummary, SlopeFit, StraightnessSummary,
    TailSummary, WanderingSummary, MAX_CENSORED_FRACTION,
};
pub use config::{
    step_grid, DensityConfig, ExperimentConfig, ExperimentKind, FluctuationConfig, HmuConfig, MonotoneConfig,
    StraightnessConfig, WanderingConfig, WindowPolicy, EXPERIMENT_SCHEMA,
};
pub use cylinder::{cylinder_pairs, in_g_rs, irs_interval, IrsBranch};
pub use table::{
    column_docs, csv_schema, num, Table, CHECK_COLUMNS, COLUMN_DOCS, CSV_FILES, CSV_SCHEMA, HMU_COLUMNS,
    TAIL_COLUMNS,
};
pub use tail::{TailReport, TailRow, TailShape, WILSON_Z};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fpp::CENSOR_DISTANCE;
use crate::point::Point;
use crate::scaling::{delta_of, SigmaCurve};
use crate::seed::{stream, SeedChain};
use crate::{Error, Result};
use replica::{run_replica, PairPlan, Plan, ReplicaData};

pub const SUMMARY_SCHEMA: &str = "fpplab.summary/1";

/// Machine-readable results. Contains no timings, so it is as reproducible
/// as the CSVs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: String,
    pub kind: ExperimentKind,
    pub name: String,
    pub seed: u64,
    pub replicas: usize,
    pub hmu: Option<HmuSummary>,
    pub monotone_h: Option<MonotoneSummary>,
    pub fluctuation: Option<FluctuationSummary>,
    pub wandering: Option<WanderingSummary>,
    pub straightness: Option<StraightnessSummary>,
    pub density: Option<DensitySummary>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub summary: Summary,
    /// The estimated `sigma` curve, when the experiment has one.
    pub sigma: Option<SigmaCurve>,
}

impl ExperimentOutput {
    /// Writes the CSVs, `summary.json` and (if present) `sigma.json` into
    /// `dir`, returning the paths in a fixed order.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for t in &self.tables {
            out.push(t.write(dir)?);
        }
        let p = dir.join("summary.json");
        std::fs::write(&p, serde_json::to_string_pretty(&self.summary)? + "\n")?;
        out.push(p);
        if let Some(s) = &self.sigma {
            let p = dir.join("sigma.json");
            std::fs::write(&p, serde_json::to_string_pretty(s)? + "\n")?;
            out.push(p);
        }
        Ok(out)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

fn run_replicas(
    pool: &rayon::ThreadPool,
    plan: &Plan,
    chain: SeedChain,
    n: usize,
) -> Result<Vec<ReplicaData>> {
    pool.install(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let d = run_replica(plan, chain, i);
                log::debug!("replica {i} done");
                d
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .collect()
}

/// Runs the experiment on `jobs` worker threads.
pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let kind = cfg.kind;
    let chain = SeedChain::new(cfg.seed);
    chain.replica_seeds(
        &[stream::POINTS, stream::SPEEDS, stream::PAIRS],
        cfg.replicas as u64,
    )?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let window = cfg.window.window()?;
    let source = format!(
        "{} (seed {})",
        if cfg.name.is_empty() {
            "experiment"
        } else {
            &cfg.name
        },
        cfg.seed
    );
    let mut plan = Plan {
        window,
        speed: cfg.speed,
        delta_g: cfg.delta_g,
        axis_r: if kind.hmu() { cfg.hmu.r.clone() } else { Vec::new() },
        fluctuation: Vec::new(),
        wandering: None,
        straightness_r: if kind.straightness() {
            cfg.straightness.r.clone()
        } else {
            Vec::new()
        },
        density_radii: Vec::new(),
        density_centers: Vec::new(),
    };
    if kind.density() {
        let c = cfg.density.centers;
        plan.density_radii = cfg.density.radii.clone();
        plan.density_centers = (0..c)
            .map(|j| Point::new(cfg.window.length * (j as f64 + 0.5) / c as f64, 0.0))
            .collect();
    }

    if kind.needs_pilot() {
        log::info!("pilot: {} replicas", cfg.pilot_replicas);
        // sigma is only needed up to the largest cylinder length
        let mut need = 0.0f64;
        if kind.fluctuation() {
            need = need.max(cfg.fluctuation.r);
        }
        if kind.wandering() {
            need = need.max(cfg.wandering.r);
        }
        let k = cfg.hmu.r.partition_point(|&r| r < need * (1.0 - 1e-12));
        let pilot_plan = Plan {
            axis_r: cfg.hmu.r[..=k.min(cfg.hmu.r.len() - 1)].to_vec(),
            fluctuation: Vec::new(),
            wandering: None,
            straightness_r: Vec::new(),
            density_radii: Vec::new(),
            density_centers: Vec::new(),
            ..plan.clone()
        };
        let pilot = run_replicas(&pool, &pilot_plan, chain, cfg.pilot_replicas)?;
        let pilot_curve = analysis::axis_sigma(&pilot_plan.axis_r, &pilot, &format!("{source} pilot"))
            .map_err(|e| match e {
                Error::Insufficient(m) => Error::Config(format!("pilot: {m}; increase pilot_replicas")),
                Error::ExcessiveCensoring { censored, total } => Error::Config(format!(
                    "pilot: {censored} of {total} axis geodesics censored; increase window.half_height"
                )),
                e => e,
            })?;
        let room = cfg.window.half_height - CENSOR_DISTANCE - 1.0;
        let width = |r: f64, k: f64| -> Result<f64> {
            let w = k * delta_of(r, &pilot_curve)?;
            if w > room {
                return Err(Error::Config(format!(
                    "cylinder half-width {w:.2} (K = {k}, r = {r}) does not fit; \
                     increase window.half_height to at least {:.1}",
                    w + CENSOR_DISTANCE + 1.0
                )));
            }
            Ok(w)
        };
        if kind.fluctuation() {
            let f = &cfg.fluctuation;
            for &k in &f.k {
                plan.fluctuation.push(PairPlan {
                    r: f.r,
                    epsilon: f.epsilon,
                    pairs: f.pairs,
                    half_width: width(f.r, k)?,
                    cone: false,
                });
            }
        }
        if kind.wandering() {
            let w = &cfg.wandering;
            plan.wandering = Some(PairPlan {
                r: w.r,
                epsilon: w.epsilon,
                pairs: w.pairs,
                half_width: width(w.r, w.k)?,
                cone: true,
            });
        }
    }

    log::info!("running {} replicas on {} workers", cfg.replicas, jobs.max(1));
    let data = run_replicas(&pool, &plan, chain, cfg.replicas)?;

    let mut summary = Summary {
        schema: SUMMARY_SCHEMA.into(),
        kind,
        name: cfg.name.clone(),
        seed: cfg.seed,
        replicas: cfg.replicas,
        hmu: None,
        monotone_h: None,
        fluctuation: None,
        wandering: None,
        straightness: None,
        density: None,
        warnings: Vec::new(),
    };
    let mut tables = Vec::new();
    let mut sigma = None;
    if kind.hmu() {
        let hmu = analysis::analyse_hmu(cfg, &data, &source)?;
        tables.push(hmu.table);
        tables.push(hmu.checks);
        let chi_hat = hmu.summary.chi.chi_hat;
        summary.hmu = Some(hmu.summary);
        summary.monotone_h = hmu.monotone;
        if kind.fluctuation() {
            let (t, s) = analysis::analyse_fluctuation(
                cfg,
                &plan.fluctuation,
                &data,
                &hmu.curve,
                &hmu.h,
                &mut summary.warnings,
            )?;
            tables.push(t);
            summary.fluctuation = Some(s);
        }
        if let Some(p) = &plan.wandering {
            let (t, s) = analysis::analyse_wandering(cfg, p, &data, &hmu.curve)?;
            if s.straddles_branch {
                summary.warnings.push(format!(
                    "wandering: s grid straddles the I_rs branch boundary {:.3}",
                    s.branch_boundary
                ));
            }
            tables.push(t);
            summary.wandering = Some(s);
        }
        if kind.straightness() {
            let (t, s) = analysis::analyse_straightness(cfg, &data, &hmu.curve, chi_hat)?;
            tables.push(t);
            summary.straightness = Some(s);
        }
        sigma = Some(hmu.curve);
    }
    if kind.density() {
        let (t, s) = analysis::analyse_density(cfg, &data);
        tables.push(t);
        summary.density = Some(s);
    }
    Ok(ExperimentOutput {
        tables,
        summary,
        sigma,
    })
}
