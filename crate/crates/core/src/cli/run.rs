//! The `simulate` and `compare` commands.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::output::{Artifacts, DirLock};
use super::{CliError, CliResult};
use crate::evolve::{
    apply_and_project, convergence_ladder, evolve_euler, norm_drift, step_network_for,
    whole_network_from_step, ConvergenceLadder, EvolutionConfig, EvolutionReport, StepPlan,
};
use crate::grid::Wavefunction;
use crate::numerics::{distance, exact_evolution, fidelity, norm_sqr, ComplexMatrix, Sign, C64};
use crate::qcpu::{project_aux, AuxBranch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub system: String,
    pub steps: u64,
    pub dt: f64,
    pub total_time: f64,
    pub sign: Sign,
    /// Fidelity of the final state to the exact propagator applied to the initial state.
    pub final_fidelity: f64,
    pub fidelity_to_initial: f64,
    /// Largest `| ||psi_k||^2 - ||psi_0||^2 |` over the run.
    pub max_norm_drift: f64,
    pub snapshots: Vec<String>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub steps: u64,
    pub dt: f64,
    pub total_time: f64,
    pub sign: Sign,
    pub fidelity_network_euler: f64,
    pub fidelity_network_exact: f64,
    pub fidelity_euler_exact: f64,
    pub max_abs_network_euler: f64,
    pub error_euler_exact: f64,
    pub ladder: ConvergenceLadder,
    pub convergence_order: f64,
}

fn failure(context: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Failure(format!("{context}: {e}"))
}

fn check_finite(state: &[C64], context: &str) -> CliResult<()> {
    match state
        .iter()
        .position(|z| !(z.re.is_finite() && z.im.is_finite()))
    {
        None => Ok(()),
        Some(i) => Err(CliError::Failure(format!(
            "numerical failure: non-finite amplitude at index {i} ({context})"
        ))),
    }
}

pub fn snapshot_name(step: u64) -> String {
    format!("snapshot_{step:06}.jsonl")
}

pub const DIAGNOSTICS_NAME: &str = "diagnostics.csv";
pub const SUMMARY_NAME: &str = "summary.json";
pub const COMPARE_NAME: &str = "compare.json";

pub fn cmd_simulate(config_path: &Path) -> CliResult<()> {
    let start = Instant::now();
    let cfg = RunConfig::load(config_path)?;
    let dir = cfg.output_directory(config_path);
    let _lock = DirLock::acquire(&dir)?;
    let (mut summary, mut artifacts) = simulate(&cfg)?;
    summary.wall_time_seconds = start.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    artifacts.push(SUMMARY_NAME, json + "\n");
    artifacts.publish(&dir)?;
    println!(
        "{} steps, dt = {:e}, final fidelity {:.15}, max norm drift {:e}; wrote {}",
        summary.steps,
        summary.dt,
        summary.final_fidelity,
        summary.max_norm_drift,
        dir.display()
    );
    Ok(())
}

/// Runs the configured evolution through its step network. Returns the
/// summary (with zero wall time) and the staged snapshot and diagnostics files.
pub fn simulate(cfg: &RunConfig) -> CliResult<(RunSummary, Artifacts)> {
    let h = cfg.hamiltonian()?;
    let plan = cfg.plan(&h)?;
    let net = cfg.step_network(&h, plan.dt)?;
    let initial = cfg.initial_wavefunction()?;
    let grid = *initial.grid();
    let psi0 = initial.amplitudes().to_vec();
    let sign = cfg.evolution.sign;
    let every = cfg.outputs.snapshot_every;

    let mut artifacts = Artifacts::default();
    let mut snapshots = Vec::new();
    let mut snapshot = |step: u64, state: &[C64], artifacts: &mut Artifacts| -> CliResult<()> {
        let wf = Wavefunction::new(grid, state.to_vec(), step as f64 * plan.dt)
            .map_err(|e| failure("snapshot", e))?;
        let name = snapshot_name(step);
        artifacts.push(name.clone(), wf.to_jsonl());
        snapshots.push(name);
        Ok(())
    };

    let initial_norm_sq = norm_sqr(&psi0);
    let mut norms = vec![initial_norm_sq];
    let mut state = psi0.clone();
    snapshot(0, &state, &mut artifacts)?;
    for step in 1..=plan.steps {
        let raised = net.apply(&state).map_err(|e| failure("step", e))?;
        state = project_aux(&raised, AuxBranch::Raised);
        check_finite(&state, &format!("step {step}"))?;
        if cfg.evolution.renormalize {
            let scale = (initial_norm_sq / norm_sqr(&state)).sqrt();
            state.iter_mut().for_each(|z| *z *= scale);
        }
        norms.push(norm_sqr(&state));
        if step % every == 0 || step == plan.steps {
            snapshot(step, &state, &mut artifacts)?;
        }
    }

    let exact = exact_evolution(&h, plan.total_time(), sign)
        .map_err(|e| failure("oracle", e))?
        .matvec(&psi0);
    let final_fidelity = fidelity(&state, &exact).map_err(|e| failure("final fidelity", e))?;
    let fidelity_to_initial = fidelity(&state, &psi0).map_err(|e| failure("final fidelity", e))?;
    let report = EvolutionReport {
        dt: plan.dt,
        sign,
        steps: plan.steps,
        norm_sq: norms,
        final_fidelity,
        convergence_order: None,
    };
    let max_norm_drift = norm_drift(&report)
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));
    artifacts.push(DIAGNOSTICS_NAME, report.to_csv());

    let summary = RunSummary {
        config: cfg.clone(),
        system: cfg.system.kind_name().to_string(),
        steps: plan.steps,
        dt: plan.dt,
        total_time: plan.total_time(),
        sign,
        final_fidelity,
        fidelity_to_initial,
        max_norm_drift,
        snapshots,
        wall_time_seconds: 0.0,
    };
    Ok((summary, artifacts))
}

pub fn cmd_compare(config_path: &Path, rungs: usize) -> CliResult<()> {
    let cfg = RunConfig::load(config_path)?;
    let dir = cfg.output_directory(config_path);
    let _lock = DirLock::acquire(&dir)?;
    let h = cfg.hamiltonian()?;
    let plan = cfg.plan(&h)?;
    let psi = cfg.initial_wavefunction()?.into_amplitudes();
    let report = compare(&h, &psi, plan, cfg.evolution.sign, rungs)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    let mut artifacts = Artifacts::default();
    artifacts.push(COMPARE_NAME, json.clone());
    artifacts.publish(&dir)?;
    print!("{json}");
    Ok(())
}

/// Evolves `psi` under `h` by (a) the whole network, (b) the Euler loop and
/// (c) the exact propagator, and estimates the Euler order from a dt ladder.
pub fn compare(
    h: &ComplexMatrix,
    psi: &[C64],
    plan: StepPlan,
    sign: Sign,
    rungs: usize,
) -> CliResult<CompareReport> {
    if plan.steps == 0 {
        return Err(CliError::Usage(
            "compare needs total_time > 0 (at least one step)".into(),
        ));
    }
    let total_time = plan.total_time();
    let step = step_network_for(h, plan.dt, sign).map_err(|e| failure("step network", e))?;
    let whole =
        whole_network_from_step(&step, plan.steps).map_err(|e| failure("whole network", e))?;
    let network = apply_and_project(&whole, psi);
    check_finite(&network, "whole network")?;

    let euler_cfg = EvolutionConfig::explicit(plan.dt, total_time).with_sign(sign);
    let (euler, _) = evolve_euler(h, psi, &euler_cfg).map_err(|e| failure("euler", e))?;
    check_finite(&euler, "euler")?;
    let exact = exact_evolution(h, total_time, sign)
        .map_err(|e| failure("oracle", e))?
        .matvec(psi);

    let fid = |a: &[C64], b: &[C64]| fidelity(a, b).map_err(|e| failure("fidelity", e));
    let ladder = convergence_ladder(h, psi, total_time, plan.dt, rungs, sign)
        .map_err(|e| failure("ladder", e))?;
    Ok(CompareReport {
        steps: plan.steps,
        dt: plan.dt,
        total_time,
        sign,
        fidelity_network_euler: fid(&network, &euler)?,
        fidelity_network_exact: fid(&network, &exact)?,
        fidelity_euler_exact: fid(&euler, &exact)?,
        max_abs_network_euler: network
            .iter()
            .zip(&euler)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm())),
        error_euler_exact: distance(&euler, &exact),
        convergence_order: ladder.order,
        ladder,
    })
}
