//! Run configuration: parsing with field diagnostics, validation and the
//! per-system propagators it selects.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{CliError, CliResult};
use crate::evolve::{step_network_for, EvolutionConfig, StepPlan};
use crate::grid::{kinetic_operator, GridSpec, Wavefunction};
use crate::numerics::{
    exact_evolution, normalized, spectral_norm_upper_bound, ComplexMatrix, Sign, C64,
};
use crate::qcpu::{build_network, QcpuNetwork};
use crate::systems::{
    diagonal_phase_network, free_particle_round_trip, gaussian_packet, harmonic_levels,
    spectral_kinetic, GaussianPacketSpec, SystemSpec,
};

/// Environment variable that overrides `outputs.directory`.
pub const OUT_DIR_ENV: &str = "QCPU_SIM_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub grid: GridSection,
    pub evolution: EvolutionSection,
    pub initial_state: InitialState,
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub length: f64,
    pub k: u32,
    #[serde(default)]
    pub centered: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auto_epsilon: Option<f64>,
    pub total_time: f64,
    #[serde(default)]
    pub sign: Sign,
    #[serde(default)]
    pub renormalize: bool,
}

/// Exactly one of the three fields must be present.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<GaussianPacketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_state: Option<usize>,
    /// `[re, im]` pairs, one per basis state; normalized on load.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    pub directory: PathBuf,
}

fn default_snapshot_every() -> u64 {
    1
}

fn usage(field: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config field `{field}`: {err}"))
}

impl RunConfig {
    /// Parses JSON, reporting the failing field path with line and column.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let inner = e.inner();
            CliError::Usage(format!(
                "config error at `{}` (line {}, column {}): {}",
                e.path(),
                inner.line(),
                inner.column(),
                inner
            ))
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.system.validate().map_err(|e| usage("system", e))?;
        let grid = self.grid_spec()?;
        self.evolution_config()?;
        if self.outputs.snapshot_every == 0 {
            return Err(usage("outputs.snapshot_every", "must be at least 1"));
        }
        self.initial_amplitudes(&grid)?;
        Ok(())
    }

    pub fn grid_spec(&self) -> CliResult<GridSpec> {
        let g = self.grid;
        GridSpec::new(g.length, g.k, g.centered).map_err(|e| usage("grid", e))
    }

    /// Grid used to label snapshots. The oscillator has no position grid, so
    /// its levels are written at `x = m`.
    pub fn snapshot_grid(&self) -> CliResult<GridSpec> {
        match self.system {
            SystemSpec::Harmonic { .. } => {
                let n = 1usize << self.grid.k;
                GridSpec::uncentered(n as f64, self.grid.k).map_err(|e| usage("grid", e))
            }
            _ => self.grid_spec(),
        }
    }

    pub fn evolution_config(&self) -> CliResult<EvolutionConfig> {
        let e = self.evolution;
        let cfg = match (e.dt, e.auto_epsilon) {
            (Some(dt), None) => EvolutionConfig::explicit(dt, e.total_time),
            (None, Some(eps)) => EvolutionConfig::auto(eps, e.total_time),
            _ => {
                return Err(usage(
                    "evolution",
                    "exactly one of `dt` and `auto_epsilon` must be given",
                ))
            }
        };
        let cfg = cfg.with_sign(e.sign).with_renormalize(e.renormalize);
        // Validate the time fields independently of the Hamiltonian bound.
        cfg.plan(1.0).map_err(|err| usage("evolution", err))?;
        Ok(cfg)
    }

    pub fn initial_amplitudes(&self, grid: &GridSpec) -> CliResult<Vec<C64>> {
        const FIELD: &str = "initial_state";
        let s = &self.initial_state;
        let present = [
            s.gaussian.is_some(),
            s.basis_state.is_some(),
            s.table.is_some(),
        ];
        if present.iter().filter(|&&p| p).count() != 1 {
            return Err(usage(
                FIELD,
                "exactly one of `gaussian`, `basis_state` and `table` must be given",
            ));
        }
        let n = grid.size();
        if let Some(spec) = &s.gaussian {
            if matches!(self.system, SystemSpec::Harmonic { .. }) {
                return Err(usage(
                    "initial_state.gaussian",
                    "the oscillator has no position grid",
                ));
            }
            if !spec.fits(grid) {
                eprintln!(
                    "warning: sigma = {} is not below L/6; the packet may wrap around the box",
                    spec.sigma
                );
            }
            let psi =
                gaussian_packet(grid, spec).map_err(|e| usage("initial_state.gaussian", e))?;
            return Ok(psi.into_amplitudes());
        }
        if let Some(m) = s.basis_state {
            if m >= n {
                return Err(usage(
                    "initial_state.basis_state",
                    format!("index {m} out of range for N = {n}"),
                ));
            }
            let mut psi = vec![C64::new(0.0, 0.0); n];
            psi[m] = C64::new(1.0, 0.0);
            return Ok(psi);
        }
        let table = s.table.as_ref().expect("one variant is present");
        if table.len() != n {
            return Err(usage(
                "initial_state.table",
                format!("expected {n} amplitudes, got {}", table.len()),
            ));
        }
        let psi: Vec<C64> = table.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        normalized(&psi).map_err(|e| usage("initial_state.table", e))
    }

    /// Output directory: the environment override, else the configured path
    /// resolved against the directory holding the config file.
    pub fn output_directory(&self, config_path: &Path) -> PathBuf {
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            return PathBuf::from(dir);
        }
        let dir = &self.outputs.directory;
        if dir.is_absolute() {
            dir.clone()
        } else {
            config_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(dir)
        }
    }

    pub fn initial_wavefunction(&self) -> CliResult<Wavefunction> {
        let grid = self.snapshot_grid()?;
        let psi = self.initial_amplitudes(&self.grid_spec()?)?;
        Wavefunction::new(grid, psi, 0.0).map_err(|e| usage("initial_state", e))
    }

    /// Hamiltonian of the configured system; every oracle runs through it.
    pub fn hamiltonian(&self) -> CliResult<ComplexMatrix> {
        let grid = self.grid_spec()?;
        let h = match &self.system {
            SystemSpec::FreeParticle { mu } => spectral_kinetic(&grid, *mu),
            SystemSpec::Harmonic { omega } => {
                harmonic_levels(*omega, grid.qubits()).map(|levels| {
                    let d: Vec<C64> = levels.into_iter().map(|e| C64::new(e, 0.0)).collect();
                    ComplexMatrix::diagonal(&d)
                })
            }
            SystemSpec::ConstantField { mu, u } => kinetic_operator(&grid, *mu).map(|t| {
                &t.densify() + &ComplexMatrix::identity(grid.size()).scale(C64::new(*u, 0.0))
            }),
            SystemSpec::GridSchrodinger { mu, potential } => {
                let t = kinetic_operator(&grid, *mu).map(|t| t.densify());
                let v = potential.operator(&grid).map(|v| v.densify());
                t.and_then(|t| v.map(|v| &t + &v))
            }
        };
        h.map_err(|e| usage("system", e))
    }

    pub fn plan(&self, h: &ComplexMatrix) -> CliResult<StepPlan> {
        self.evolution_config()?
            .plan(spectral_norm_upper_bound(h))
            .map_err(|e| usage("evolution", e))
    }

    /// Network whose raised branch advances the state by one step of `dt`.
    ///
    /// The grid Schrodinger system uses the Euler payload `I + sign i dt H`;
    /// the other systems use their exact single-step propagators.
    pub fn step_network(&self, h: &ComplexMatrix, dt: f64) -> CliResult<QcpuNetwork> {
        let grid = self.grid_spec()?;
        let sign = self.evolution.sign;
        let net = match &self.system {
            SystemSpec::GridSchrodinger { .. } => step_network_for(h, dt, sign),
            SystemSpec::FreeParticle { mu } => {
                free_particle_round_trip(&grid, *mu, dt, sign).and_then(|u| build_network(&u))
            }
            SystemSpec::Harmonic { omega } => harmonic_levels(*omega, grid.qubits())
                .and_then(|levels| diagonal_phase_network(&levels, dt, sign)),
            SystemSpec::ConstantField { mu, u } => kinetic_operator(&grid, *mu)
                .and_then(|t| exact_evolution(&t.densify(), dt, sign))
                .and_then(|free| {
                    build_network(&free.scale(C64::from_polar(1.0, sign.value() * u * dt)))
                }),
        };
        net.map_err(|e| usage("system", e))
    }
}
