//! CSV writers and readers for every pipeline artifact. Schemas are fixed:
//!
//! * trajectory:  `k,node,s,x,r` (state values clamped into [0, 1])
//! * testing:     `k,node,C,D,cumC,cumD,active,c,d`
//! * estimate:    `k,node,s,x,r,estimated` (raw values; a clamped companion
//!   file uses the same schema)
//! * control:     `k,node,s,x,r,gamma_applied,contraction,control_active`
//! * compare:     `k,avg_x_none,avg_s_none,avg_x_true,avg_s_true,avg_x_estimated,avg_s_estimated`
//! * sweep:       `T1,s0_hat,error_empirical,error_analytic`
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! file parsed back yields bit-identical values and reruns with the same
//! seed produce byte-identical output.

use std::fmt::Write as _;
use std::path::Path;

use netsir_core::control::ControlledRun;
use netsir_core::estimation::{ErrorSurface, EstimatedTrajectory};
use netsir_core::model::{EpidemicState, Trajectory};
use netsir_core::testing::TestingDataset;

use crate::{CliError, CliResult};

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("reading {}: {e}", path.display())))
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, nodes: &[String]) -> CliResult<()> {
    let mut out = String::from("k,node,s,x,r\n");
    for (k, state) in traj.states.iter().enumerate() {
        for (i, label) in nodes.iter().enumerate() {
            writeln!(
                out,
                "{k},{label},{},{},{}",
                clamp01(state.s()[i]),
                clamp01(state.x()[i]),
                clamp01(state.r()[i])
            )
            .unwrap();
        }
    }
    write_file(path, &out)
}

pub fn read_trajectory(path: &Path, nodes: &[String], network_ref: &str) -> CliResult<Trajectory> {
    let contents = read_file(path)?;
    let mut lines = contents.lines();
    let header = lines.next().unwrap_or_default();
    if header != "k,node,s,x,r" {
        return Err(CliError::Validation(format!(
            "{} is not a trajectory file (header '{header}')",
            path.display()
        )));
    }
    let n = nodes.len();
    let mut rows: Vec<(usize, usize, f64, f64, f64)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CliError::Validation(format!(
                "{} line {}: expected 5 fields",
                path.display(),
                lineno + 2
            )));
        }
        let parse_err = |what: &str| {
            CliError::Validation(format!(
                "{} line {}: bad {what}",
                path.display(),
                lineno + 2
            ))
        };
        let k: usize = fields[0].parse().map_err(|_| parse_err("step"))?;
        let node = nodes
            .iter()
            .position(|l| l == fields[1])
            .ok_or_else(|| parse_err("node label"))?;
        let s: f64 = fields[2].parse().map_err(|_| parse_err("s"))?;
        let x: f64 = fields[3].parse().map_err(|_| parse_err("x"))?;
        let r: f64 = fields[4].parse().map_err(|_| parse_err("r"))?;
        rows.push((k, node, s, x, r));
    }
    if rows.len() % n != 0 || rows.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: row count {} is not a multiple of the node count {n}",
            path.display(),
            rows.len()
        )));
    }
    let steps = rows.len() / n;
    let mut s = vec![vec![0.0; n]; steps];
    let mut x = vec![vec![0.0; n]; steps];
    let mut r = vec![vec![0.0; n]; steps];
    for (k, node, sv, xv, rv) in rows {
        if k >= steps {
            return Err(CliError::Validation(format!(
                "{}: step {k} out of range",
                path.display()
            )));
        }
        s[k][node] = sv;
        x[k][node] = xv;
        r[k][node] = rv;
    }
    let mut states = Vec::with_capacity(steps);
    for k in 0..steps {
        states.push(
            EpidemicState::new(
                std::mem::take(&mut s[k]),
                std::mem::take(&mut x[k]),
                std::mem::take(&mut r[k]),
            )
            .map_err(|e| CliError::Validation(format!("{} step {k}: {e}", path.display())))?,
        );
    }
    Ok(Trajectory {
        states,
        network_ref: network_ref.to_string(),
    })
}

pub fn write_testing(path: &Path, ds: &TestingDataset, nodes: &[String]) -> CliResult<()> {
    let mut out = String::from("k,node,C,D,cumC,cumD,active,c,d\n");
    for k in 0..ds.step_count() {
        for (i, label) in nodes.iter().enumerate() {
            writeln!(
                out,
                "{k},{label},{},{},{},{},{},{},{}",
                ds.confirmed_counts[i][k],
                ds.removed_counts[i][k],
                ds.cum_confirmed[i][k],
                ds.cum_removed[i][k],
                ds.active[i][k],
                ds.confirmed[i][k],
                ds.removed[i][k]
            )
            .unwrap();
        }
    }
    write_file(path, &out)
}

pub fn read_testing(
    path: &Path,
    nodes: &[String],
    populations: &[u64],
    t1: usize,
    t2: usize,
) -> CliResult<TestingDataset> {
    let contents = read_file(path)?;
    let mut lines = contents.lines();
    let header = lines.next().unwrap_or_default();
    if header != "k,node,C,D,cumC,cumD,active,c,d" {
        return Err(CliError::Validation(format!(
            "{} is not a testing-data file (header '{header}')",
            path.display()
        )));
    }
    let n = nodes.len();
    let len = t2 + 2;
    let mut ds = TestingDataset {
        t1,
        t2,
        populations: populations.to_vec(),
        confirmed: vec![vec![0.0; len]; n],
        removed: vec![vec![0.0; len]; n],
        confirmed_counts: vec![vec![0; len]; n],
        removed_counts: vec![vec![0; len]; n],
        cum_confirmed: vec![vec![0.0; len]; n],
        cum_removed: vec![vec![0.0; len]; n],
        active: vec![vec![0.0; len]; n],
    };
    let mut seen = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CliError::Validation(format!(
                "{} line {}: expected 9 fields",
                path.display(),
                lineno + 2
            )));
        }
        let bad = |what: &str| {
            CliError::Validation(format!(
                "{} line {}: bad {what}",
                path.display(),
                lineno + 2
            ))
        };
        let k: usize = fields[0].parse().map_err(|_| bad("step"))?;
        if k >= len {
            return Err(bad("step outside the testing window"));
        }
        let i = nodes
            .iter()
            .position(|l| l == fields[1])
            .ok_or_else(|| bad("node label"))?;
        ds.confirmed_counts[i][k] = fields[2].parse().map_err(|_| bad("C"))?;
        ds.removed_counts[i][k] = fields[3].parse().map_err(|_| bad("D"))?;
        ds.cum_confirmed[i][k] = fields[4].parse().map_err(|_| bad("cumC"))?;
        ds.cum_removed[i][k] = fields[5].parse().map_err(|_| bad("cumD"))?;
        ds.active[i][k] = fields[6].parse().map_err(|_| bad("active"))?;
        ds.confirmed[i][k] = fields[7].parse().map_err(|_| bad("c"))?;
        ds.removed[i][k] = fields[8].parse().map_err(|_| bad("d"))?;
        seen += 1;
    }
    if seen != n * len {
        return Err(CliError::Validation(format!(
            "{}: expected {} rows for window [0, {}], found {seen}",
            path.display(),
            n * len,
            len - 1
        )));
    }
    Ok(ds)
}

pub fn write_estimate(
    path: &Path,
    est: &EstimatedTrajectory,
    nodes: &[String],
) -> CliResult<()> {
    let mut out = String::from("k,node,s,x,r,estimated\n");
    for k in 0..=est.t2 {
        for (i, label) in nodes.iter().enumerate() {
            writeln!(
                out,
                "{k},{label},{},{},{},1",
                est.s_hat[i][k], est.x_hat[i][k], est.r_hat[i][k]
            )
            .unwrap();
        }
    }
    write_file(path, &out)
}

pub fn write_control(path: &Path, run: &ControlledRun, nodes: &[String]) -> CliResult<()> {
    let mut out = String::from("k,node,s,x,r,gamma_applied,contraction,control_active\n");
    let horizon = run.trajectory.horizon();
    for (k, state) in run.trajectory.states.iter().enumerate() {
        let contraction = run
            .contraction_log
            .iter()
            .find(|c| c.k == k)
            .map(|c| c.ratio.to_string())
            .unwrap_or_default();
        for (i, label) in nodes.iter().enumerate() {
            let (gamma, active) = if k < horizon {
                (
                    run.applied_gamma[k][i].to_string(),
                    if run.control_active[k] { "1" } else { "0" },
                )
            } else {
                // the final state has no outgoing transition
                (String::new(), "0")
            };
            writeln!(
                out,
                "{k},{label},{},{},{},{gamma},{contraction},{active}",
                clamp01(state.s()[i]),
                clamp01(state.x()[i]),
                clamp01(state.r()[i])
            )
            .unwrap();
        }
    }
    write_file(path, &out)
}

pub fn write_compare(
    path: &Path,
    none: &ControlledRun,
    true_state: &ControlledRun,
    estimated: &ControlledRun,
) -> CliResult<()> {
    let mut out = String::from(
        "k,avg_x_none,avg_s_none,avg_x_true,avg_s_true,avg_x_estimated,avg_s_estimated\n",
    );
    let steps = none.trajectory.states.len();
    for k in 0..steps {
        let n = &none.trajectory.states[k];
        let t = &true_state.trajectory.states[k];
        let e = &estimated.trajectory.states[k];
        writeln!(
            out,
            "{k},{},{},{},{},{},{}",
            n.mean_infected(),
            n.mean_susceptible(),
            t.mean_infected(),
            t.mean_susceptible(),
            e.mean_infected(),
            e.mean_susceptible()
        )
        .unwrap();
    }
    write_file(path, &out)
}

pub fn write_sweep(path: &Path, surface: &ErrorSurface) -> CliResult<()> {
    let mut out = String::from("T1,s0_hat,error_empirical,error_analytic\n");
    for p in &surface.points {
        writeln!(
            out,
            "{},{},{},{}",
            p.t1, p.s0_hat, p.error_empirical, p.error_analytic
        )
        .unwrap();
    }
    write_file(path, &out)
}

/// Per testing start, the assumed initial level that zeroes the error.
pub fn write_sweep_locus(path: &Path, surface: &ErrorSurface) -> CliResult<()> {
    let mut out = String::from("T1,s0_zero_error\n");
    for (t1, s0) in &surface.zero_locus {
        writeln!(out, "{t1},{s0}").unwrap();
    }
    write_file(path, &out)
}

pub fn write_epsilon_sweep(path: &Path, rows: &[EpsilonSweepRow]) -> CliResult<()> {
    let mut out = String::from(
        "epsilon,eradication_k_true,eradication_k_estimated,eradication_k_none,\
         final_s_true,final_s_estimated,final_s_none\n",
    );
    for r in rows {
        let fmt = |v: Option<usize>| v.map(|k| k.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.epsilon,
            fmt(r.eradication_k_true),
            fmt(r.eradication_k_estimated),
            fmt(r.eradication_k_none),
            r.final_s_true,
            r.final_s_estimated,
            r.final_s_none
        )
        .unwrap();
    }
    write_file(path, &out)
}

pub struct EpsilonSweepRow {
    pub epsilon: f64,
    pub eradication_k_true: Option<usize>,
    pub eradication_k_estimated: Option<usize>,
    pub eradication_k_none: Option<usize>,
    pub final_s_true: f64,
    pub final_s_estimated: f64,
    pub final_s_none: f64,
}
