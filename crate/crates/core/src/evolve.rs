//! First-order time stepping `(I + sign i H dt)^steps` and its QCPU networks.
//!
//! The Euler propagator is not unitary: on a state `psi` one step gives
//! `||psi'||^2 = ||psi||^2 + dt^2 ||H psi||^2`. States are evolved without
//! renormalization unless [`EvolutionConfig::renormalize`] is set, and the
//! drift is reported alongside the fidelity against [`exact_evolution`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{kinetic_operator, kinetic_prefactor, potential_operator, GridSpec};
use crate::numerics::{
    distance, exact_evolution, fidelity, norm_sqr, require_hermitian, spectral_norm_upper_bound,
    ComplexMatrix, Sign, StructuredOperator, C64,
};
use crate::qcpu::{
    build_network, compose_sum, connector_chain_power, embed_lower, project_aux, AuxBranch,
    QcpuNetwork,
};

/// Default bound on `dt * ||H||` for the automatic step policy.
pub const DEFAULT_AUTO_EPSILON: f64 = 0.01;

/// Relative tolerance of the residual-step rule.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    Explicit(f64),
    /// Pick `dt = T / steps` with the fewest steps such that `dt * bound(H) <= epsilon`.
    Auto {
        epsilon: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub dt_policy: DtPolicy,
    pub total_time: f64,
    pub mu: f64,
    pub sign: Sign,
    /// Rescale to the initial norm after every step. Off by default.
    pub renormalize: bool,
}

impl EvolutionConfig {
    pub fn explicit(dt: f64, total_time: f64) -> Self {
        Self {
            dt_policy: DtPolicy::Explicit(dt),
            total_time,
            mu: 1.0,
            sign: Sign::Minus,
            renormalize: false,
        }
    }

    pub fn auto(epsilon: f64, total_time: f64) -> Self {
        Self {
            dt_policy: DtPolicy::Auto { epsilon },
            ..Self::explicit(1.0, total_time)
        }
    }

    pub fn with_sign(mut self, sign: Sign) -> Self {
        self.sign = sign;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_renormalize(mut self, renormalize: bool) -> Self {
        self.renormalize = renormalize;
        self
    }

    /// Resolves the step size and count for a Hamiltonian with norm bound `h_bound`.
    pub fn plan(&self, h_bound: f64) -> Result<StepPlan> {
        let total_time = self.total_time;
        if !(total_time.is_finite() && total_time >= 0.0) {
            return Err(Error::InvalidTotalTime(total_time));
        }
        match self.dt_policy {
            DtPolicy::Explicit(dt) => plan_steps(dt, total_time),
            DtPolicy::Auto { epsilon } => {
                if !(epsilon.is_finite() && epsilon > 0.0) {
                    return Err(Error::InvalidTimeStep(epsilon));
                }
                if total_time == 0.0 {
                    let dt = if h_bound > 0.0 {
                        epsilon / h_bound
                    } else {
                        epsilon
                    };
                    return Ok(StepPlan { dt, steps: 0 });
                }
                let steps = (total_time * h_bound / epsilon).ceil().max(1.0);
                Ok(StepPlan {
                    dt: total_time / steps,
                    steps: steps as u64,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub dt: f64,
    pub steps: u64,
}

impl StepPlan {
    pub fn total_time(&self) -> f64 {
        self.steps as f64 * self.dt
    }
}

/// `steps = round(T / dt)`, rejecting a residual larger than `1e-9 * dt`.
pub fn plan_steps(dt: f64, total_time: f64) -> Result<StepPlan> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    if !(total_time.is_finite() && total_time >= 0.0) {
        return Err(Error::InvalidTotalTime(total_time));
    }
    let steps = (total_time / dt).round();
    let residual = total_time - steps * dt;
    if residual.abs() > dt * RESIDUAL_TOLERANCE {
        return Err(Error::ResidualStep {
            total_time,
            dt,
            residual,
        });
    }
    Ok(StepPlan {
        dt,
        steps: steps as u64,
    })
}

/// One Euler step `I + sign i h dt`.
pub fn euler_step(h: &ComplexMatrix, dt: f64, sign: Sign) -> Result<ComplexMatrix> {
    require_hermitian(h)?;
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    Ok(&ComplexMatrix::identity(h.rows()) + &h.scale(sign.imaginary_unit() * dt))
}

/// Diagnostics of an Euler run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionReport {
    pub dt: f64,
    pub sign: Sign,
    pub steps: u64,
    /// Squared norm before the first step and after each step; `steps + 1` entries.
    pub norm_sq: Vec<f64>,
    pub final_fidelity: f64,
    pub convergence_order: Option<f64>,
}

impl EvolutionReport {
    /// Per-step series as CSV with columns `step,time,norm_sq,drift`.
    pub fn to_csv(&self) -> String {
        let drift = norm_drift(self);
        let mut out = String::from("step,time,norm_sq,drift\n");
        for (step, (n, d)) in self.norm_sq.iter().zip(&drift).enumerate() {
            out.push_str(&format!(
                "{step},{:e},{:e},{:e}\n",
                step as f64 * self.dt,
                n,
                d
            ));
        }
        out
    }

    pub fn summary(&self) -> EvolutionSummary {
        EvolutionSummary {
            steps: self.steps,
            dt: self.dt,
            sign: self.sign,
            final_fidelity: self.final_fidelity,
            convergence_order: self.convergence_order,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSummary {
    pub steps: u64,
    pub dt: f64,
    pub sign: Sign,
    pub final_fidelity: f64,
    pub convergence_order: Option<f64>,
}

/// `||psi_k||^2 - ||psi_0||^2` for every recorded step.
pub fn norm_drift(report: &EvolutionReport) -> Vec<f64> {
    let initial = report.norm_sq.first().copied().unwrap_or(0.0);
    report.norm_sq.iter().map(|n| n - initial).collect()
}

/// Applies `steps` Euler steps to `psi` and compares with the exact propagator.
pub fn evolve_euler(
    h: &ComplexMatrix,
    psi: &[C64],
    cfg: &EvolutionConfig,
) -> Result<(Vec<C64>, EvolutionReport)> {
    require_hermitian(h)?;
    if psi.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            actual: psi.len(),
        });
    }
    let plan = cfg.plan(spectral_norm_upper_bound(h))?;
    let step = euler_step(h, plan.dt, cfg.sign)?;

    let initial_norm_sq = norm_sqr(psi);
    let mut state = psi.to_vec();
    let mut norms = Vec::with_capacity(plan.steps as usize + 1);
    norms.push(initial_norm_sq);
    for _ in 0..plan.steps {
        state = step.matvec(&state);
        if cfg.renormalize {
            let scale = (initial_norm_sq / norm_sqr(&state)).sqrt();
            state.iter_mut().for_each(|z| *z *= scale);
        }
        norms.push(norm_sqr(&state));
    }

    let exact = exact_evolution(h, plan.total_time(), cfg.sign)?.matvec(psi);
    let report = EvolutionReport {
        dt: plan.dt,
        sign: cfg.sign,
        steps: plan.steps,
        norm_sq: norms,
        final_fidelity: fidelity(&state, &exact)?,
        convergence_order: None,
    };
    Ok((state, report))
}

/// `||(I + sign i h dt)^steps psi - exp(sign i h T) psi||` for `T = steps * dt`.
pub fn euler_error(
    h: &ComplexMatrix,
    psi: &[C64],
    total_time: f64,
    dt: f64,
    sign: Sign,
) -> Result<f64> {
    let cfg = EvolutionConfig::explicit(dt, total_time).with_sign(sign);
    let (state, _) = evolve_euler(h, psi, &cfg)?;
    let exact = exact_evolution(h, total_time, sign)?.matvec(psi);
    Ok(distance(&state, &exact))
}

/// Errors along a `dt, dt/2, dt/4, ...` ladder and the observed order of convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLadder {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// `errors[k + 1] / errors[k]`.
    pub ratios: Vec<f64>,
    /// Mean of `log2(errors[k] / errors[k + 1])`.
    pub order: f64,
}

pub fn convergence_ladder(
    h: &ComplexMatrix,
    psi: &[C64],
    total_time: f64,
    base_dt: f64,
    rungs: usize,
    sign: Sign,
) -> Result<ConvergenceLadder> {
    let dts: Vec<f64> = (0..rungs).map(|k| base_dt / (1u64 << k) as f64).collect();
    let errors = dts
        .iter()
        .map(|&dt| euler_error(h, psi, total_time, dt, sign))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ladder_from_errors(dts, errors))
}

pub(crate) fn ladder_from_errors(dts: Vec<f64>, errors: Vec<f64>) -> ConvergenceLadder {
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[1] / w[0]).collect();
    let order = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios.iter().map(|r| -r.log2()).sum::<f64>() / ratios.len() as f64
    };
    ConvergenceLadder {
        dts,
        errors,
        ratios,
        order,
    }
}

/// Grid Hamiltonian `T + V` as a dense matrix.
pub fn hamiltonian(grid: &GridSpec, mu: f64, v: impl Fn(f64) -> f64) -> Result<ComplexMatrix> {
    let t = kinetic_operator(grid, mu)?.densify();
    let pot = potential_operator(grid, v)?.densify();
    Ok(&t + &pot)
}

/// `Q(T)` with the kinetic operator as payload.
pub fn kinetic_network(grid: &GridSpec, mu: f64) -> Result<QcpuNetwork> {
    build_network(&kinetic_operator(grid, mu)?.densify())
}

/// The factor structure of `Q(T)`: for every `m`, networks of
/// `-kappa |x_m><x_m| E(m, m+2)` and `-kappa |x_m><x_m| E(m, m-2)`, where `E` is
/// the basis transposition, followed by `Q(2 kappa I)`. Their sum-rule
/// composition is [`kinetic_network`].
pub fn kinetic_factor_networks(grid: &GridSpec, mu: f64) -> Result<Vec<QcpuNetwork>> {
    // Validates mass and grid size.
    kinetic_operator(grid, mu)?;
    let n = grid.size();
    let kappa = kinetic_prefactor(grid, mu);
    let mut nets = Vec::with_capacity(2 * n + 1);
    for m in 0..n {
        for offset in [2isize, -2] {
            let target = grid.wrap(m as isize + offset);
            let exchange = StructuredOperator::transposition(m, target, n)?.densify();
            let dyad = projector(n, m).matmul(&exchange);
            nets.push(build_network(&dyad.scale(-kappa))?);
        }
    }
    nets.push(build_network(
        &ComplexMatrix::identity(n).scale(kappa * 2.0),
    )?);
    Ok(nets)
}

fn projector(n: usize, m: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(n, n);
    p[(m, m)] = C64::new(1.0, 0.0);
    p
}

/// `Q(V)` for a local potential; only diagonal factors appear.
pub fn potential_network(grid: &GridSpec, v: impl Fn(f64) -> f64) -> Result<QcpuNetwork> {
    build_network(&potential_operator(grid, v)?.densify())
}

/// The three networks `Q(I)`, `Q(sign i dt T)`, `Q(sign i dt V)` of one step.
pub fn step_network_terms(
    kinetic: &ComplexMatrix,
    potential: &ComplexMatrix,
    dt: f64,
    sign: Sign,
) -> Result<[QcpuNetwork; 3]> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidTimeStep(dt));
    }
    let factor = sign.imaginary_unit() * dt;
    Ok([
        QcpuNetwork::identity(kinetic.rows()),
        build_network(&kinetic.scale(factor))?,
        build_network(&potential.scale(factor))?,
    ])
}

/// `Q(U(dt)) = Q(I) Q(sign i dt T) Q(sign i dt V)`, assembled by the sum rule.
pub fn step_network(
    grid: &GridSpec,
    mu: f64,
    v: impl Fn(f64) -> f64,
    dt: f64,
    sign: Sign,
) -> Result<QcpuNetwork> {
    let t = kinetic_operator(grid, mu)?.densify();
    let pot = potential_operator(grid, v)?.densify();
    compose_sum(&step_network_terms(&t, &pot, dt, sign)?)
}

/// Step network for an arbitrary Hermitian `h`: `Q(I + sign i dt h)`.
pub fn step_network_for(h: &ComplexMatrix, dt: f64, sign: Sign) -> Result<QcpuNetwork> {
    build_network(&euler_step(h, dt, sign)?)
}

/// Connector chain of `steps` copies of a step network.
pub fn whole_network_from_step(step: &QcpuNetwork, steps: u64) -> Result<ComplexMatrix> {
    if steps == 0 {
        return Err(Error::NoSteps);
    }
    Ok(connector_chain_power(step, steps))
}

/// The whole time-evolution network for `T + V` on a grid; mass and sign come from `cfg`.
pub fn whole_network(
    grid: &GridSpec,
    v: impl Fn(f64) -> f64,
    cfg: &EvolutionConfig,
) -> Result<ComplexMatrix> {
    let h = hamiltonian(grid, cfg.mu, &v)?;
    let plan = cfg.plan(spectral_norm_upper_bound(&h))?;
    let step = step_network(grid, cfg.mu, v, plan.dt, cfg.sign)?;
    whole_network_from_step(&step, plan.steps)
}

/// Feeds `psi (x) |0>` through a network-form matrix and reads the raised branch.
pub fn apply_and_project(network: &ComplexMatrix, psi: &[C64]) -> Vec<C64> {
    project_aux(&network.matvec(&embed_lower(psi)), AuxBranch::Raised)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{plane_wave, GridSpec};
    use crate::numerics::{max_abs_diff_vec, normalized};
    use crate::qcpu::extract_payload;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(values: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diagonal(&values.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>())
    }

    fn gaussian(grid: &GridSpec, x0: f64, sigma: f64, p0: f64) -> Vec<C64> {
        let raw: Vec<C64> = grid
            .points()
            .into_iter()
            .map(|x| C64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * x))
            .collect();
        normalized(&raw).unwrap()
    }

    #[test]
    fn euler_step_scalar() {
        let step = euler_step(&diag(&[1.0]), 0.1, Sign::Minus).unwrap();
        assert_eq!(step[(0, 0)], c(1.0, -0.1));
        assert!((step[(0, 0)].norm_sqr() - 1.01).abs() < 1e-15);
        let zero = euler_step(&ComplexMatrix::zeros(3, 3), 0.7, Sign::Plus).unwrap();
        assert_eq!(zero, ComplexMatrix::identity(3));
    }

    #[test]
    fn euler_step_on_eigenstate() {
        let h = diag(&[0.5, -2.0, 3.0]);
        let step = euler_step(&h, 0.01, Sign::Plus).unwrap();
        let out = step.matvec(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(out[1], c(1.0, -2.0 * 0.01));
    }

    #[test]
    fn euler_step_rejects_bad_input() {
        let nh = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[2.0, 0.0]]).unwrap();
        assert!(matches!(
            euler_step(&nh, 0.1, Sign::Minus),
            Err(Error::NonHermitian(_))
        ));
        assert!(matches!(
            euler_step(&diag(&[1.0]), -0.1, Sign::Minus),
            Err(Error::InvalidTimeStep(_))
        ));
    }

    #[test]
    fn plan_residual_rule() {
        assert_eq!(plan_steps(0.25, 1.0).unwrap().steps, 4);
        assert_eq!(plan_steps(0.1, 0.0).unwrap().steps, 0);
        assert_eq!(plan_steps(0.1, 1.0).unwrap().steps, 10);
        assert!(matches!(
            plan_steps(0.3, 1.0),
            Err(Error::ResidualStep { .. })
        ));
        assert!(matches!(
            plan_steps(0.0, 1.0),
            Err(Error::InvalidTimeStep(_))
        ));
        assert!(matches!(
            plan_steps(0.1, -1.0),
            Err(Error::InvalidTotalTime(_))
        ));
    }

    #[test]
    fn auto_policy_respects_epsilon() {
        let cfg = EvolutionConfig::auto(0.01, 2.0);
        let plan = cfg.plan(3.7).unwrap();
        assert!(plan.dt * 3.7 <= 0.01 + 1e-15);
        assert!((plan.total_time() - 2.0).abs() < 1e-12);
        // One step fewer would violate the bound.
        let fewer = 2.0 / (plan.steps - 1) as f64;
        assert!(fewer * 3.7 > 0.01);
        assert_eq!(EvolutionConfig::auto(0.01, 0.0).plan(1.0).unwrap().steps, 0);
        assert_eq!(EvolutionConfig::auto(0.01, 1.0).plan(0.0).unwrap().steps, 1);
    }

    #[test]
    fn zero_steps_leave_state_unchanged() {
        let h = diag(&[1.0, 2.0]);
        let psi = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let (out, report) = evolve_euler(&h, &psi, &EvolutionConfig::explicit(0.1, 0.0)).unwrap();
        assert_eq!(out, psi);
        assert_eq!(report.norm_sq.len(), 1);
        assert!((report.final_fidelity - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_diagonal_step() {
        let omega = 2.0;
        let dt = 0.05;
        let h = diag(&[0.0, omega]);
        let psi = vec![c(0.3, 0.1), c(-0.2, 0.5)];
        for sign in [Sign::Minus, Sign::Plus] {
            let cfg = EvolutionConfig::explicit(dt, dt).with_sign(sign);
            let (out, report) = evolve_euler(&h, &psi, &cfg).unwrap();
            assert_eq!(out[0], psi[0]);
            let expected = psi[1] * (c(1.0, 0.0) + sign.imaginary_unit() * omega * dt);
            assert!((out[1] - expected).norm() < 1e-16);
            assert_eq!(report.norm_sq.len(), 2);
        }
    }

    #[test]
    fn norm_drift_examples() {
        let h = ComplexMatrix::zeros(2, 2);
        let (_, r) = evolve_euler(
            &h,
            &[c(1.0, 0.0), c(0.0, 1.0)],
            &EvolutionConfig::explicit(0.1, 1.0),
        )
        .unwrap();
        assert!(norm_drift(&r).iter().all(|&d| d == 0.0));

        let (_, r) = evolve_euler(
            &diag(&[1.0]),
            &[c(1.0, 0.0)],
            &EvolutionConfig::explicit(0.1, 0.1),
        )
        .unwrap();
        assert!((r.norm_sq[1] / r.norm_sq[0] - 1.01).abs() < 1e-15);
    }

    #[test]
    fn eigenstate_drift_is_multiplicative() {
        let lambda = 1.7;
        let dt = 0.02;
        let (_, r) = evolve_euler(
            &diag(&[lambda, 0.3]),
            &[c(1.0, 0.0), c(0.0, 0.0)],
            &EvolutionConfig::explicit(dt, 0.2),
        )
        .unwrap();
        for w in r.norm_sq.windows(2) {
            assert!((w[1] / w[0] - (1.0 + lambda * lambda * dt * dt)).abs() < 1e-14);
        }
    }

    #[test]
    fn norm_growth_law_and_nonnegative_drift() {
        let g = GridSpec::centered(16.0, 4).unwrap();
        let h = hamiltonian(&g, 1.0, |x| 0.02 * x * x).unwrap();
        let psi = gaussian(&g, 1.0, 1.5, 0.4);
        let dt = 1.0 / 64.0;
        let cfg = EvolutionConfig::explicit(dt, 0.5);
        let (_, report) = evolve_euler(&h, &psi, &cfg).unwrap();
        let step = euler_step(&h, dt, Sign::Minus).unwrap();
        let mut state = psi.clone();
        for k in 0..report.steps as usize {
            let h_psi = h.matvec(&state);
            let predicted = report.norm_sq[k] + dt * dt * norm_sqr(&h_psi);
            assert!((report.norm_sq[k + 1] - predicted).abs() < 1e-12);
            state = step.matvec(&state);
        }
        assert!(norm_drift(&report).iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn renormalize_keeps_norm() {
        let h = diag(&[1.0, -3.0]);
        let psi = vec![c(0.6, 0.0), c(0.0, 0.8)];
        let cfg = EvolutionConfig::explicit(0.1, 1.0).with_renormalize(true);
        let (_, r) = evolve_euler(&h, &psi, &cfg).unwrap();
        assert!(r.norm_sq.iter().all(|n| (n - 1.0).abs() < 1e-14));
    }

    #[test]
    fn first_order_free_particle() {
        let g = GridSpec::centered(16.0, 4).unwrap();
        let h = kinetic_operator(&g, 1.0).unwrap().densify();
        let psi = gaussian(&g, 0.0, 2.0, 0.5);
        let e1 = euler_error(&h, &psi, 1.0, 1.0 / 16.0, Sign::Minus).unwrap();
        let e2 = euler_error(&h, &psi, 1.0, 1.0 / 32.0, Sign::Minus).unwrap();
        let ratio = e2 / e1;
        assert!((0.4..=0.6).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn kinetic_network_payload() {
        let g = GridSpec::uncentered(5.0, 3).unwrap();
        let net = kinetic_network(&g, 1.3).unwrap();
        assert_eq!(net.payload(), &kinetic_operator(&g, 1.3).unwrap().densify());
        let from_factors = compose_sum(&kinetic_factor_networks(&g, 1.3).unwrap()).unwrap();
        assert_eq!(from_factors.payload(), net.payload());
    }

    #[test]
    fn kinetic_factor_structure_at_n4() {
        let g = GridSpec::uncentered(4.0, 2).unwrap();
        let from_factors = compose_sum(&kinetic_factor_networks(&g, 1.0).unwrap()).unwrap();
        let direct = kinetic_network(&g, 1.0).unwrap();
        assert_eq!(from_factors.payload(), direct.payload());
        assert_eq!(direct.payload().hermiticity_error(), 0.0);
    }

    #[test]
    fn projector_times_exchange_is_a_dyad() {
        let n = 8;
        let e = StructuredOperator::transposition(1, 3, n)
            .unwrap()
            .densify();
        let dyad = projector(n, 1).matmul(&e);
        let mut expected = ComplexMatrix::zeros(n, n);
        expected[(1, 3)] = c(1.0, 0.0);
        assert_eq!(dyad, expected);
    }

    #[test]
    fn potential_network_examples() {
        let g = GridSpec::centered(4.0, 3).unwrap();
        assert_eq!(
            potential_network(&g, |_| 0.0).unwrap().dense(),
            ComplexMatrix::identity(16)
        );
        let net = potential_network(&g, |x| x * x).unwrap();
        // x = 0 at m = 4 contributes no factor.
        assert_eq!(net.factors().len(), 7);
        assert!(net.factors().iter().all(|f| f.m == f.n));
        let v = potential_operator(&g, |x| x * x).unwrap().densify();
        let expected = &ComplexMatrix::identity(16)
            + &crate::numerics::tensor(&v, &crate::qcpu::AuxLadder::new().c_dagger);
        assert_eq!(net.dense(), expected);
    }

    #[test]
    fn step_network_examples() {
        let g = GridSpec::centered(6.0, 3).unwrap();
        let zero_dt = step_network(&g, 1.0, |x| x * x, 0.0, Sign::Minus).unwrap();
        assert_eq!(zero_dt, QcpuNetwork::identity(8));

        let free = step_network(&g, 1.0, |_| 0.0, 0.01, Sign::Minus).unwrap();
        let t = kinetic_operator(&g, 1.0).unwrap().densify();
        let expected = &ComplexMatrix::identity(8) + &t.scale(c(0.0, -0.01));
        assert!(free.payload().max_abs_diff(&expected) < 1e-16);

        let h = hamiltonian(&g, 1.0, |x| 0.5 * x * x).unwrap();
        let net = step_network(&g, 1.0, |x| 0.5 * x * x, 0.01, Sign::Minus).unwrap();
        assert!(
            net.payload()
                .max_abs_diff(&euler_step(&h, 0.01, Sign::Minus).unwrap())
                < 1e-15
        );
        let t_mat = kinetic_operator(&g, 1.0).unwrap().densify();
        let v_mat = potential_operator(&g, |x| 0.5 * x * x).unwrap().densify();
        let [a, b, cc] = step_network_terms(&t_mat, &v_mat, 0.01, Sign::Minus).unwrap();
        let product = a.dense().matmul(&b.dense()).matmul(&cc.dense());
        assert!(product.max_abs_diff(&net.dense()) < 1e-12);
    }

    #[test]
    fn whole_network_examples() {
        let omega = 1.5;
        let dt = 0.1;
        let h = diag(&[0.0, omega]);
        let step = step_network_for(&h, dt, Sign::Minus).unwrap();
        let one = whole_network_from_step(&step, 1).unwrap();
        assert_eq!(
            extract_payload(&one, 2).unwrap(),
            euler_step(&h, dt, Sign::Minus).unwrap()
        );

        let two = whole_network_from_step(&step, 2).unwrap();
        let block = extract_payload(&two, 2).unwrap();
        let factor = c(1.0, -omega * dt);
        assert!((block[(1, 1)] - factor * factor).norm() < 1e-15);
        assert_eq!(block[(0, 0)], c(1.0, 0.0));

        assert_eq!(whole_network_from_step(&step, 0), Err(Error::NoSteps));
    }

    #[test]
    fn whole_network_matches_direct_evolution() {
        let g = GridSpec::centered(8.0, 3).unwrap();
        let v = |x: f64| 0.1 * x * x;
        let cfg = EvolutionConfig::explicit(1.0 / 16.0, 1.0);
        let network = whole_network(&g, v, &cfg).unwrap();
        let h = hamiltonian(&g, 1.0, v).unwrap();
        let psi = gaussian(&g, 0.5, 1.0, 0.0);
        let (direct, _) = evolve_euler(&h, &psi, &cfg).unwrap();
        let via_network = apply_and_project(&network, &psi);
        assert!(max_abs_diff_vec(&direct, &via_network) < 1e-12);
        assert!((fidelity(&direct, &via_network).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn time_reversal_symmetry() {
        let g = GridSpec::centered(10.0, 4).unwrap();
        let h = hamiltonian(&g, 1.0, |x| 0.05 * x * x + 0.1 * x).unwrap();
        let psi = gaussian(&g, -1.0, 1.2, 0.7);
        let conj: Vec<C64> = psi.iter().map(|z| z.conj()).collect();
        let cfg = EvolutionConfig::explicit(0.01, 0.5);
        let (minus, _) = evolve_euler(&h, &psi, &cfg).unwrap();
        let (plus, _) = evolve_euler(&h, &conj, &cfg.with_sign(Sign::Plus)).unwrap();
        let plus_conj: Vec<C64> = plus.iter().map(|z| z.conj()).collect();
        assert!(max_abs_diff_vec(&minus, &plus_conj) < 1e-12);
    }

    #[test]
    fn report_csv_and_summary() {
        let (_, r) = evolve_euler(
            &diag(&[1.0]),
            &[c(1.0, 0.0)],
            &EvolutionConfig::explicit(0.5, 1.0),
        )
        .unwrap();
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "step,time,norm_sq,drift");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0e0,1e0,0e0"));
        let s = serde_json::to_value(r.summary()).unwrap();
        assert_eq!(s["steps"], 2);
        assert_eq!(s["sign"], -1);
        assert!(s["convergence_order"].is_null());
    }

    #[test]
    fn plane_wave_norm_growth_uses_kinetic_eigenvalue() {
        let g = GridSpec::uncentered(8.0, 4).unwrap();
        let h = kinetic_operator(&g, 1.0).unwrap().densify();
        let mode = normalized(&plane_wave(&g, 3)).unwrap();
        let lambda = crate::grid::kinetic_eigenvalue(&g, 1.0, 3);
        let dt = 0.05;
        let (_, r) = evolve_euler(&h, &mode, &EvolutionConfig::explicit(dt, dt)).unwrap();
        assert!((r.norm_sq[1] - (1.0 + lambda * lambda * dt * dt)).abs() < 1e-13);
    }
}
