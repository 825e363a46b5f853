//! Pipeline stages, run directories, and the sweep/compare commands.
//!
//! Stages communicate through files in the run directory, so any stage can
//! be re-run later against artifacts produced by an earlier invocation:
//!
//! * simulate  -> trajectory.csv
//! * certify   -> certificate.json
//! * gen-data  -> testing.csv            (needs trajectory.csv)
//! * estimate  -> estimate.csv (+ estimate_clamped.csv, needs testing.csv)
//! * control   -> control.csv + control_report.json
//! * compare   -> control_compare.csv
//!
//! Every run also gets a manifest.json (config hash, seed, versions) and a
//! plots.py script that renders figures from the CSVs alone.

use std::path::{Path, PathBuf};

use serde::Serialize;

use netsir_core::control::{
    check_hypotheses, contraction_bound, run_closed_loop, ControlMode,
    ControlledRun, HypothesisReport,
};
use netsir_core::estimation::{error_sweep, estimate_states};
use netsir_core::model::{simulate, validate_network, ViolationKind};
use netsir_core::stability::certify_ges;
use netsir_core::testing::generate_dataset;

use crate::config::{load_scenario, Scenario};
use crate::csvio;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Simulate,
    Certify,
    GenData,
    Estimate,
    Control,
    Compare,
}

impl Stage {
    pub fn parse(name: &str) -> CliResult<Self> {
        match name {
            "simulate" => Ok(Self::Simulate),
            "certify" => Ok(Self::Certify),
            "gen-data" => Ok(Self::GenData),
            "estimate" => Ok(Self::Estimate),
            "control" => Ok(Self::Control),
            "compare" => Ok(Self::Compare),
            other => Err(CliError::Validation(format!(
                "unknown stage '{other}' (expected simulate, certify, gen-data, estimate, \
                 control, or compare)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Certify => "certify",
            Self::GenData => "gen-data",
            Self::Estimate => "estimate",
            Self::Control => "control",
            Self::Compare => "compare",
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct RunOptions {
    pub stages: Vec<String>,
    pub all: bool,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub horizon: Option<usize>,
}

fn resolve_out_dir(scenario: &Scenario, opts: &RunOptions) -> PathBuf {
    opts.out.clone().unwrap_or_else(|| {
        scenario
            .output_dir
            .as_ref()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs").join(&scenario.name))
    })
}

fn resolve_stages(scenario: &Scenario, opts: &RunOptions) -> CliResult<Vec<Stage>> {
    if !opts.stages.is_empty() {
        let mut stages = opts
            .stages
            .iter()
            .map(|s| Stage::parse(s))
            .collect::<CliResult<Vec<_>>>()?;
        stages.sort();
        stages.dedup();
        return Ok(stages);
    }
    // --all (also the default): every stage the scenario configures
    let mut stages = vec![Stage::Simulate, Stage::Certify];
    if scenario.testing.is_some() {
        stages.push(Stage::GenData);
    }
    if scenario.estimator.is_some() {
        stages.push(Stage::Estimate);
    }
    if scenario.control.is_some() {
        stages.push(Stage::Control);
        if scenario.estimator.is_some() {
            stages.push(Stage::Compare);
        }
    }
    Ok(stages)
}

#[derive(Serialize)]
struct Manifest {
    scenario: String,
    config_hash: String,
    network_fingerprint: String,
    seed: u64,
    horizon: usize,
    stages: Vec<String>,
    files: Vec<String>,
    tool_version: String,
}

#[derive(Serialize)]
struct ControlReport<'a> {
    mode: &'a str,
    active_window: (usize, usize),
    contraction_bound: f64,
    hypotheses: &'a HypothesisReport,
    eradication_step: Option<usize>,
    warnings: &'a [String],
}

fn require_assumptions(scenario: &Scenario) -> CliResult<()> {
    let report = validate_network(&scenario.network, scenario.horizon)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if !report.ok() {
        return Err(CliError::Validation(format!(
            "network assumptions violated:\n{report}"
        )));
    }
    Ok(())
}

fn json_to(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("serialising {}: {e}", path.display())))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))
}

/// Runs the three control variants (none, true-state, estimated-state)
/// with the scenario's margin and window.
fn run_three_variants(
    scenario: &Scenario,
) -> CliResult<(ControlledRun, ControlledRun, ControlledRun)> {
    let control = scenario.control.as_ref().ok_or_else(|| {
        CliError::Validation("stage 'compare' requires a [control] section".into())
    })?;
    let estimator = scenario.estimator.as_ref().ok_or_else(|| {
        CliError::Validation(
            "stage 'compare' requires an [estimator] section for the estimated-state variant"
                .into(),
        )
    })?;
    let testing = scenario.testing.as_ref().ok_or_else(|| {
        CliError::Validation("stage 'compare' requires a [testing] section".into())
    })?;

    let mut base = control.clone();
    base.estimator = Some(estimator.clone());
    let run_mode = |mode: ControlMode| -> CliResult<ControlledRun> {
        let mut cfg = base.clone();
        cfg.mode = mode;
        run_closed_loop(
            &scenario.network,
            &scenario.initial,
            &cfg,
            Some(testing),
            scenario.horizon,
        )
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("closed-loop run ({mode:?}): {e}")))
    };
    Ok((
        run_mode(ControlMode::None)?,
        run_mode(ControlMode::TrueState)?,
        run_mode(ControlMode::EstimatedState)?,
    ))
}

fn run_stage(scenario: &Scenario, stage: Stage, dir: &Path) -> CliResult<Vec<String>> {
    let missing = |artifact: &str, needed_stage: &str| {
        CliError::Validation(format!(
            "stage '{}' requires {artifact}; run the '{needed_stage}' stage first",
            stage.name()
        ))
    };
    match stage {
        Stage::Simulate => {
            let traj = simulate(&scenario.network, &scenario.initial, scenario.horizon)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            csvio::write_trajectory(&dir.join("trajectory.csv"), &traj, &scenario.nodes)?;
            Ok(vec!["trajectory.csv".into()])
        }
        Stage::Certify => {
            let cert = certify_ges(&scenario.network, scenario.horizon)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            json_to(&dir.join("certificate.json"), &cert)?;
            Ok(vec!["certificate.json".into()])
        }
        Stage::GenData => {
            let testing = scenario.testing.as_ref().ok_or_else(|| {
                CliError::Validation("stage 'gen-data' requires a [testing] section".into())
            })?;
            let traj_path = dir.join("trajectory.csv");
            if !traj_path.exists() {
                return Err(missing("trajectory.csv", "simulate"));
            }
            let traj = csvio::read_trajectory(
                &traj_path,
                &scenario.nodes,
                &scenario.network.fingerprint(),
            )?;
            let dataset = generate_dataset(
                &traj,
                scenario.network.populations(),
                scenario.network.gamma_schedule(),
                scenario.network.h(),
                testing,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?;
            csvio::write_testing(&dir.join("testing.csv"), &dataset, &scenario.nodes)?;
            Ok(vec!["testing.csv".into()])
        }
        Stage::Estimate => {
            let estimator = scenario.estimator.as_ref().ok_or_else(|| {
                CliError::Validation("stage 'estimate' requires an [estimator] section".into())
            })?;
            let testing = scenario.testing.as_ref().expect("estimator implies testing");
            let data_path = dir.join("testing.csv");
            if !data_path.exists() {
                return Err(missing("testing.csv", "gen-data"));
            }
            let dataset = csvio::read_testing(
                &data_path,
                &scenario.nodes,
                scenario.network.populations(),
                testing.t1,
                testing.t2,
            )?;
            let estimated = estimate_states(&dataset, estimator)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            csvio::write_estimate(&dir.join("estimate.csv"), &estimated, &scenario.nodes)?;
            csvio::write_estimate(
                &dir.join("estimate_clamped.csv"),
                &estimated.clamped(),
                &scenario.nodes,
            )?;
            Ok(vec!["estimate.csv".into(), "estimate_clamped.csv".into()])
        }
        Stage::Control => {
            let control = scenario.control.as_ref().ok_or_else(|| {
                CliError::Validation("stage 'control' requires a [control] section".into())
            })?;
            let run = run_closed_loop(
                &scenario.network,
                &scenario.initial,
                control,
                scenario.testing.as_ref(),
                scenario.horizon,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?;
            csvio::write_control(&dir.join("control.csv"), &run, &scenario.nodes)?;
            let hypotheses =
                check_hypotheses(&scenario.network, &control.epsilon, control.mode)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
            let report = ControlReport {
                mode: match control.mode {
                    ControlMode::None => "none",
                    ControlMode::TrueState => "true_state",
                    ControlMode::EstimatedState => "estimated_state",
                },
                active_window: control.active_window,
                contraction_bound: contraction_bound(&control.epsilon, scenario.network.h()),
                hypotheses: &hypotheses,
                eradication_step: run.eradication_step(1e-6),
                warnings: &run.warnings,
            };
            json_to(&dir.join("control_report.json"), &report)?;
            Ok(vec!["control.csv".into(), "control_report.json".into()])
        }
        Stage::Compare => {
            let (none, true_state, estimated) = run_three_variants(scenario)?;
            csvio::write_compare(
                &dir.join("control_compare.csv"),
                &none,
                &true_state,
                &estimated,
            )?;
            Ok(vec!["control_compare.csv".into()])
        }
    }
}

pub fn cmd_run(config: &Path, opts: &RunOptions) -> CliResult<PathBuf> {
    let mut scenario = load_scenario(config)?;
    scenario.apply_overrides(opts.seed, opts.horizon)?;
    require_assumptions(&scenario)?;
    let dir = resolve_out_dir(&scenario, opts);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("creating {}: {e}", dir.display())))?;

    let stages = resolve_stages(&scenario, opts)?;
    let mut files = Vec::new();
    for stage in &stages {
        let produced = run_stage(&scenario, *stage, &dir)?;
        println!("stage {:<9} -> {}", stage.name(), produced.join(", "));
        files.extend(produced);
    }

    write_plot_script(&dir)?;
    files.push("plots.py".into());
    let manifest = Manifest {
        scenario: scenario.name.clone(),
        config_hash: scenario.file_hash.clone(),
        network_fingerprint: scenario.network.fingerprint(),
        seed: scenario.seed,
        horizon: scenario.horizon,
        stages: stages.iter().map(|s| s.name().to_string()).collect(),
        files,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    json_to(&dir.join("manifest.json"), &manifest)?;
    Ok(dir)
}

pub fn cmd_compare(config: &Path, opts: &RunOptions) -> CliResult<PathBuf> {
    let mut scenario = load_scenario(config)?;
    scenario.apply_overrides(opts.seed, opts.horizon)?;
    require_assumptions(&scenario)?;
    let dir = resolve_out_dir(&scenario, opts);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("creating {}: {e}", dir.display())))?;
    let (none, true_state, estimated) = run_three_variants(&scenario)?;
    csvio::write_compare(
        &dir.join("control_compare.csv"),
        &none,
        &true_state,
        &estimated,
    )?;
    write_plot_script(&dir)?;
    println!(
        "eradication step (avg infected < 1e-6): none {:?}, true-state {:?}, estimated {:?}",
        none.eradication_step(1e-6),
        true_state.eradication_step(1e-6),
        estimated.eradication_step(1e-6)
    );
    Ok(dir)
}

#[derive(Debug, Clone, Default)]
pub struct SweepSpec {
    /// `start:end[:step]` over testing start times.
    pub t1: Option<String>,
    /// start:end:step over assumed initial susceptible levels.
    pub s0: Option<String>,
    /// start:end:step over uniform control margins.
    pub epsilon: Option<String>,
    pub k_eval: Option<usize>,
    pub node: Option<String>,
}

fn parse_usize_range(spec: &str) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Validation(format!("cannot parse integer range '{spec}' (start:end[:step])"));
    if parts.len() < 2 || parts.len() > 3 {
        return Err(bad());
    }
    let start: usize = parts[0].parse().map_err(|_| bad())?;
    let end: usize = parts[1].parse().map_err(|_| bad())?;
    let step: usize = if parts.len() == 3 {
        parts[2].parse().map_err(|_| bad())?
    } else {
        1
    };
    if step == 0 || end < start {
        return Err(bad());
    }
    Ok((start..=end).step_by(step).collect())
}

fn parse_f64_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad =
        || CliError::Validation(format!("cannot parse grid '{spec}' (start:end:step)"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].parse().map_err(|_| bad())?;
    let end: f64 = parts[1].parse().map_err(|_| bad())?;
    let step: f64 = parts[2].parse().map_err(|_| bad())?;
    if !(step > 0.0) || end < start {
        return Err(bad());
    }
    let count = ((end - start) / step).round() as usize + 1;
    Ok((0..count)
        .map(|i| start + i as f64 * step)
        .filter(|v| *v <= end + step * 1e-9)
        .collect())
}

pub fn cmd_sweep(config: &Path, spec: &SweepSpec, opts: &RunOptions) -> CliResult<PathBuf> {
    let mut scenario = load_scenario(config)?;
    scenario.apply_overrides(opts.seed, opts.horizon)?;
    require_assumptions(&scenario)?;
    let dir = resolve_out_dir(&scenario, opts);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("creating {}: {e}", dir.display())))?;

    if let Some(eps_spec) = &spec.epsilon {
        let grid = parse_f64_grid(eps_spec)?;
        if grid.iter().any(|&e| e <= 0.0) {
            return Err(CliError::Validation(
                "epsilon grid values must be positive".into(),
            ));
        }
        let rows = epsilon_sweep(&scenario, &grid)?;
        csvio::write_epsilon_sweep(&dir.join("epsilon_sweep.csv"), &rows)?;
        write_plot_script(&dir)?;
        return Ok(dir);
    }

    let t1_spec = spec.t1.as_ref().ok_or_else(|| {
        CliError::Validation("sweep needs --t1 (estimation sweep) or --epsilon (control sweep)".into())
    })?;
    let t1_values = parse_usize_range(t1_spec)?;
    if t1_values.iter().any(|&t| t < 1) {
        return Err(CliError::Validation(
            "estimation sweeps require t1 >= 1".into(),
        ));
    }
    let s0_grid = match &spec.s0 {
        Some(s) => parse_f64_grid(s)?,
        None => parse_f64_grid("0.90:1.00:0.005")?,
    };
    let k_eval = spec.k_eval.unwrap_or(100);
    let node = match &spec.node {
        Some(label) => scenario.node_index(label)?,
        None => 0,
    };
    let testing = scenario.testing.as_ref().ok_or_else(|| {
        CliError::Validation("estimation sweeps require a [testing] section (for p_test)".into())
    })?;
    let p_test = testing.p_test[node];

    let traj = simulate(&scenario.network, &scenario.initial, scenario.horizon)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let surface = error_sweep(
        &scenario.network,
        &traj,
        node,
        p_test,
        &t1_values,
        &s0_grid,
        k_eval,
    )
    .map_err(|e| CliError::Validation(e.to_string()))?;
    csvio::write_sweep(&dir.join("sweep.csv"), &surface)?;
    csvio::write_sweep_locus(&dir.join("sweep_locus.csv"), &surface)?;
    write_plot_script(&dir)?;
    Ok(dir)
}

fn epsilon_sweep(
    scenario: &Scenario,
    grid: &[f64],
) -> CliResult<Vec<csvio::EpsilonSweepRow>> {
    if scenario.control.is_none() {
        return Err(CliError::Validation(
            "epsilon sweeps require a [control] section".into(),
        ));
    }
    let n = scenario.network.node_count();
    let mut rows = Vec::with_capacity(grid.len());
    for &eps in grid {
        let mut patched = scenario.clone();
        patched.control.as_mut().unwrap().epsilon = vec![eps; n];
        let (none, true_state, estimated) = run_three_variants(&patched)?;
        let last = scenario.horizon;
        rows.push(csvio::EpsilonSweepRow {
            epsilon: eps,
            eradication_k_true: true_state.eradication_step(1e-6),
            eradication_k_estimated: estimated.eradication_step(1e-6),
            eradication_k_none: none.eradication_step(1e-6),
            final_s_true: true_state.trajectory.states[last].mean_susceptible(),
            final_s_estimated: estimated.trajectory.states[last].mean_susceptible(),
            final_s_none: none.trajectory.states[last].mean_susceptible(),
        });
    }
    Ok(rows)
}

pub fn cmd_validate(config: &Path) -> CliResult<()> {
    let scenario = load_scenario(config)?;
    println!(
        "scenario '{}': {} nodes, horizon {}, h = {}",
        scenario.name,
        scenario.network.node_count(),
        scenario.horizon,
        scenario.network.h()
    );
    println!("structure: ok");

    let report = validate_network(&scenario.network, scenario.horizon)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    if report.ok() {
        println!("assumptions: ok");
    } else {
        for v in &report.violations {
            let label = match v.kind {
                ViolationKind::HealingRateNonPositive | ViolationKind::InfectionRateNegative => {
                    "Assumption 1"
                }
                ViolationKind::HealingRateStepTooLarge
                | ViolationKind::InfectionRowSumTooLarge => "Assumption 2",
            };
            println!(
                "assumption violation ({label}): steps [{}, {}) node {}: {}",
                v.step_range.0, v.step_range.1, v.node, v.detail
            );
        }
    }

    if let (Some(control), Some(mode)) = (&scenario.control, scenario.control_mode) {
        let hyp = check_hypotheses(&scenario.network, &control.epsilon, mode)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if hyp.ok() {
            println!("control hypotheses: ok");
        } else {
            for v in &hyp.violations {
                println!(
                    "control hypothesis ({}) warning: piece at {}: {}",
                    v.condition, v.piece_start, v.detail
                );
            }
        }
    }

    if !report.ok() {
        return Err(CliError::Validation(
            "network assumptions violated (see report above)".into(),
        ));
    }
    Ok(())
}

fn write_plot_script(dir: &Path) -> CliResult<()> {
    std::fs::write(dir.join("plots.py"), PLOT_SCRIPT)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("writing plots.py: {e}")))
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Render figures from the CSV artifacts in this directory.

Consumes only the CSVs; needs matplotlib. Each section is skipped when its
input file is absent.
"""
import csv
import os
import sys
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def rows(name):
    path = os.path.join(HERE, name)
    if not os.path.exists(path):
        return None
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def save(fig, name):
    out = os.path.join(HERE, name)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    print("wrote", out)


def by_node(data, value_key):
    series = defaultdict(list)
    for row in data:
        series[row["node"]].append((int(row["k"]), float(row[value_key])))
    return {node: sorted(points) for node, points in series.items()}


traj = rows("trajectory.csv")
if traj:
    fig, ax = plt.subplots(figsize=(7, 4))
    for node, pts in by_node(traj, "x").items():
        ax.plot([k for k, _ in pts], [v for _, v in pts], label=node)
    ax.set_xlabel("k")
    ax.set_ylabel("infected proportion")
    ax.legend()
    save(fig, "fig_infected.png")

    fig, ax = plt.subplots(figsize=(7, 4))
    for node, pts in by_node(traj, "s").items():
        ax.plot([k for k, _ in pts], [v for _, v in pts], label=node)
    ax.set_xlabel("k")
    ax.set_ylabel("susceptible proportion")
    ax.legend()
    save(fig, "fig_susceptible.png")

testing = rows("testing.csv")
if testing:
    nodes = sorted({row["node"] for row in testing})
    node = nodes[0]
    daily_c = by_node(testing, "C")[node]
    daily_d = by_node(testing, "D")[node]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([k for k, _ in daily_c], [v for _, v in daily_c], label="daily confirmed")
    ax.plot([k for k, _ in daily_d], [v for _, v in daily_d], label="daily removed")
    ax.set_xlabel("k")
    ax.set_ylabel(f"cases at {node}")
    ax.legend()
    save(fig, "fig_daily_cases.png")

    fig, ax = plt.subplots(figsize=(7, 4))
    for key, label in [("cumC", "cumulative confirmed"), ("cumD", "cumulative removed"),
                       ("active", "active")]:
        pts = by_node(testing, key)[node]
        ax.plot([k for k, _ in pts], [v for _, v in pts], label=label)
    ax.set_xlabel("k")
    ax.set_ylabel(f"cases at {node}")
    ax.legend()
    save(fig, "fig_cumulative_cases.png")

est = rows("estimate.csv")
if est and traj:
    fig, ax = plt.subplots(figsize=(7, 4))
    for node, pts in by_node(est, "s").items():
        ax.plot([k for k, _ in pts], [v for _, v in pts], "--", label=f"{node} estimate")
    for node, pts in by_node(traj, "s").items():
        ax.plot([k for k, _ in pts], [v for _, v in pts], label=f"{node} true", alpha=0.6)
    ax.set_xlabel("k")
    ax.set_ylabel("susceptible proportion")
    ax.legend(fontsize=7)
    save(fig, "fig_estimate_vs_true.png")

sweep = rows("sweep.csv")
if sweep:
    t1s = sorted({int(r["T1"]) for r in sweep})
    s0s = sorted({float(r["s0_hat"]) for r in sweep})
    grid = {(int(r["T1"]), float(r["s0_hat"])): float(r["error_empirical"]) for r in sweep}
    img = [[grid.get((t1, s0), float("nan")) for t1 in t1s] for s0 in s0s]
    fig, ax = plt.subplots(figsize=(7, 4))
    mesh = ax.pcolormesh(t1s, s0s, img, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="|estimation error|")
    low = [(t1, s0) for (t1, s0), err in grid.items() if err < 0.01]
    if low:
        ax.scatter([t for t, _ in low], [s for _, s in low], s=4, c="red",
                   label="error < 0.01")
        ax.legend()
    ax.set_xlabel("testing start T1")
    ax.set_ylabel("assumed initial susceptible")
    save(fig, "fig_error_surface.png")

compare = rows("control_compare.csv")
if compare:
    ks = [int(r["k"]) for r in compare]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for key, label in [("avg_x_none", "no control"), ("avg_x_true", "true-state"),
                       ("avg_x_estimated", "estimated-state")]:
        axes[0].plot(ks, [float(r[key]) for r in compare], label=label)
    axes[0].set_xlabel("k")
    axes[0].set_ylabel("average infected")
    axes[0].legend()
    for key, label in [("avg_s_none", "no control"), ("avg_s_true", "true-state"),
                       ("avg_s_estimated", "estimated-state")]:
        axes[1].plot(ks, [float(r[key]) for r in compare], label=label)
    axes[1].set_xlabel("k")
    axes[1].set_ylabel("average susceptible")
    axes[1].legend()
    save(fig, "fig_control_compare.png")

control = rows("control.csv")
if control:
    avg = defaultdict(list)
    for row in control:
        avg[int(row["k"])].append(float(row["x"]))
    ks = sorted(avg)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ks, [sum(avg[k]) / len(avg[k]) for k in ks])
    active = {int(r["k"]) for r in control if r["control_active"] == "1"}
    if active:
        ax.axvspan(min(active), max(active), alpha=0.15, label="control active")
        ax.legend()
    ax.set_xlabel("k")
    ax.set_ylabel("average infected")
    save(fig, "fig_control_run.png")

eps = rows("epsilon_sweep.csv")
if eps:
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = [float(r["epsilon"]) for r in eps]
    for key, label in [("eradication_k_true", "true-state"),
                       ("eradication_k_estimated", "estimated-state")]:
        ys = [int(r[key]) if r[key] else None for r in eps]
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel("epsilon")
    ax.set_ylabel("steps to eradication")
    ax.legend()
    save(fig, "fig_epsilon_sweep.png")

if len(sys.argv) > 1 and sys.argv[1] == "--check":
    print("plot script ran")
"#;
