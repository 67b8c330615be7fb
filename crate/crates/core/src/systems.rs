//! Built-in systems: the free particle in the momentum representation, the
//! harmonic oscillator in its energy eigenbasis, a particle in a constant
//! field, and a two-body problem split into center-of-mass and relative parts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    check_mass, com_reduction, dft_operator, kinetic_operator, lift_one, potential_operator,
    two_body_potential, GridSpec, Slot, TwoParticleWavefunction, Wavefunction,
};
use crate::numerics::{exact_evolution, normalized, ComplexMatrix, Sign, StructuredOperator, C64};
use crate::qcpu::{build_network, compose_product, QcpuNetwork};

/// What to simulate. Serialized with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    FreeParticle { mu: f64 },
    Harmonic { omega: f64 },
    ConstantField { mu: f64, u: f64 },
    GridSchrodinger { mu: f64, potential: PotentialSpec },
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SystemSpec::FreeParticle { mu } => check_mass(*mu),
            SystemSpec::Harmonic { omega } => check_frequency(*omega),
            SystemSpec::ConstantField { mu, u } => {
                check_mass(*mu)?;
                finite(*u, 0)
            }
            SystemSpec::GridSchrodinger { mu, potential } => {
                check_mass(*mu)?;
                potential.validate()
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SystemSpec::FreeParticle { .. } => "free_particle",
            SystemSpec::Harmonic { .. } => "harmonic",
            SystemSpec::ConstantField { .. } => "constant_field",
            SystemSpec::GridSchrodinger { .. } => "grid_schrodinger",
        }
    }
}

/// Tabulated or polynomial local potentials. Serialized with a `form` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `strength * (x - center)^2`
    Quadratic {
        strength: f64,
        #[serde(default)]
        center: f64,
    },
    /// `slope * x + intercept`
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    Constant {
        value: f64,
    },
    /// One value per grid point.
    Table {
        values: Vec<f64>,
    },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialSpec::Quadratic { strength, center } => {
                finite(*strength, 0)?;
                finite(*center, 1)
            }
            PotentialSpec::Linear { slope, intercept } => {
                finite(*slope, 0)?;
                finite(*intercept, 1)
            }
            PotentialSpec::Constant { value } => finite(*value, 0),
            PotentialSpec::Table { values } => values
                .iter()
                .enumerate()
                .try_for_each(|(i, &v)| finite(v, i)),
        }
    }

    /// Potential values on every grid point.
    pub fn values(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        self.validate()?;
        let values = match self {
            PotentialSpec::Table { values } => {
                if values.len() != grid.size() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.size(),
                        actual: values.len(),
                    });
                }
                values.clone()
            }
            _ => grid.points().into_iter().map(|x| self.eval(x)).collect(),
        };
        Ok(values)
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            PotentialSpec::Quadratic { strength, center } => strength * (x - center).powi(2),
            PotentialSpec::Linear { slope, intercept } => slope * x + intercept,
            PotentialSpec::Constant { value } => *value,
            PotentialSpec::Table { .. } => unreachable!("tables are indexed, not evaluated"),
        }
    }

    pub fn operator(&self, grid: &GridSpec) -> Result<StructuredOperator> {
        let values = self.values(grid)?;
        Ok(StructuredOperator::Diagonal(
            values.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        ))
    }
}

fn finite(value: f64, index: usize) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { index, value })
    }
}

fn check_frequency(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveFrequency(omega))
    }
}

/// Gaussian wave packet centered at `x0` with mean momentum `p0` and width `sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianPacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl GaussianPacketSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !(self.x0.is_finite() && self.p0.is_finite()) {
            return Err(Error::InvalidSpec("x0 and p0 must be finite".into()));
        }
        Ok(())
    }

    /// Whether the packet is narrow enough (`sigma < L/6`) to sit inside the box.
    pub fn fits(&self, grid: &GridSpec) -> bool {
        self.sigma < grid.length() / 6.0
    }
}

/// `amplitudes ~ exp(-(x - x0)^2 / (4 sigma^2)) exp(i p0 x)`, unit norm.
pub fn gaussian_packet(grid: &GridSpec, spec: &GaussianPacketSpec) -> Result<Wavefunction> {
    spec.validate()?;
    let envelope: Vec<C64> = grid
        .points()
        .into_iter()
        .map(|x| {
            C64::new(
                (-(x - spec.x0).powi(2) / (4.0 * spec.sigma * spec.sigma)).exp(),
                0.0,
            )
        })
        .collect();
    let envelope = normalized(&envelope)
        .map_err(|_| Error::InvalidSpec("packet vanishes on every grid point".into()))?;
    let amplitudes = envelope
        .into_iter()
        .zip(grid.points())
        .map(|(a, x)| a * C64::from_polar(1.0, spec.p0 * x))
        .collect();
    Wavefunction::new(*grid, amplitudes, 0.0)
}

/// Freely spreading Gaussian for `exp(-iHt)`, `H = p^2 / 2 mu`, with continuum normalization.
pub fn analytic_free_gaussian(spec: &GaussianPacketSpec, mu: f64, t: f64) -> impl Fn(f64) -> C64 {
    let GaussianPacketSpec { x0, p0, sigma } = *spec;
    let alpha = C64::new(1.0, t / (2.0 * mu * sigma * sigma));
    let prefactor = (2.0 * PI * sigma * sigma).powf(-0.25) / alpha.sqrt();
    let center = x0 + p0 * t / mu;
    move |x: f64| {
        let gauss = -(x - center).powi(2) / (alpha * (4.0 * sigma * sigma));
        let phase = C64::new(0.0, p0 * x - p0 * p0 * t / (2.0 * mu));
        prefactor * (gauss + phase).exp()
    }
}

/// `sigma(t) = sigma sqrt(1 + (t / (2 mu sigma^2))^2)`.
pub fn analytic_free_width(spec: &GaussianPacketSpec, mu: f64, t: f64) -> f64 {
    spec.sigma * (1.0 + (t / (2.0 * mu * spec.sigma * spec.sigma)).powi(2)).sqrt()
}

/// `Q(diag(exp(sign i values_m t)))`.
pub fn diagonal_phase_network(values: &[f64], t: f64, sign: Sign) -> Result<QcpuNetwork> {
    values
        .iter()
        .enumerate()
        .try_for_each(|(i, &v)| finite(v, i))?;
    finite(t, 0)?;
    let s = sign.value();
    let phases: Vec<C64> = values
        .iter()
        .map(|&v| C64::from_polar(1.0, s * v * t))
        .collect();
    build_network(&ComplexMatrix::diagonal(&phases))
}

/// Momentum of DFT index `n`: `(2 pi / L) n_signed` with `n_signed` in `[-N/2, N/2)`.
pub fn momentum_values(grid: &GridSpec) -> Vec<f64> {
    let n = grid.size() as isize;
    (0..n)
        .map(|i| {
            let signed = if i < n / 2 { i } else { i - n };
            2.0 * PI * signed as f64 / grid.length()
        })
        .collect()
}

/// `p_n^2 / 2 mu` for every DFT index.
pub fn free_particle_energies(grid: &GridSpec, mu: f64) -> Result<Vec<f64>> {
    check_mass(mu)?;
    Ok(momentum_values(grid)
        .into_iter()
        .map(|p| p * p / (2.0 * mu))
        .collect())
}

/// Literal momentum-representation network `I + C^dagger C Q(e^{iHt}) C Q(F) C C^dagger`:
/// its raised block is `diag(exp(sign i p_n^2 t / 2 mu)) F`, with no inverse transform.
pub fn free_particle_network(
    grid: &GridSpec,
    mu: f64,
    t: f64,
    sign: Sign,
) -> Result<ComplexMatrix> {
    let phase = diagonal_phase_network(&free_particle_energies(grid, mu)?, t, sign)?;
    let fourier = build_network(&dft_operator(grid))?;
    compose_product(&[phase, fourier])
}

/// Position-space propagator `F^dagger diag(exp(sign i p_n^2 t / 2 mu)) F`.
pub fn free_particle_round_trip(
    grid: &GridSpec,
    mu: f64,
    t: f64,
    sign: Sign,
) -> Result<ComplexMatrix> {
    let energies = free_particle_energies(grid, mu)?;
    let s = sign.value();
    let phases: Vec<C64> = energies
        .iter()
        .map(|&e| C64::from_polar(1.0, s * e * t))
        .collect();
    Ok(conjugate_by_dft(grid, &phases))
}

/// Spectral kinetic operator `F^dagger diag(p_n^2 / 2 mu) F`.
pub fn spectral_kinetic(grid: &GridSpec, mu: f64) -> Result<ComplexMatrix> {
    let energies: Vec<C64> = free_particle_energies(grid, mu)?
        .into_iter()
        .map(|e| C64::new(e, 0.0))
        .collect();
    Ok(conjugate_by_dft(grid, &energies))
}

fn conjugate_by_dft(grid: &GridSpec, diagonal: &[C64]) -> ComplexMatrix {
    let f = dft_operator(grid);
    let n = grid.size();
    let scaled = ComplexMatrix::from_fn(n, n, |r, c| diagonal[r] * f[(r, c)]);
    f.adjoint().matmul(&scaled)
}

/// Oscillator energies `omega (m + 1/2)` for the lowest `2^k` levels.
pub fn harmonic_levels(omega: f64, qubits: u32) -> Result<Vec<f64>> {
    check_frequency(omega)?;
    Ok((0..1usize << qubits)
        .map(|m| omega * (m as f64 + 0.5))
        .collect())
}

/// Diagonal phase network of the oscillator in its energy eigenbasis.
pub fn harmonic_network(omega: f64, qubits: u32, t: f64, sign: Sign) -> Result<QcpuNetwork> {
    diagonal_phase_network(&harmonic_levels(omega, qubits)?, t, sign)
}

/// Constant field `u` via the interaction picture: `exp(sign i u t)` times free
/// evolution under the finite-difference kinetic operator.
pub fn constant_field_evolution(
    grid: &GridSpec,
    mu: f64,
    u: f64,
    t: f64,
    sign: Sign,
    psi: &[C64],
) -> Result<Vec<C64>> {
    finite(u, 0)?;
    let free = exact_evolution(&kinetic_operator(grid, mu)?.densify(), t, sign)?;
    if psi.len() != grid.size() {
        return Err(Error::DimensionMismatch {
            expected: grid.size(),
            actual: psi.len(),
        });
    }
    let phase = C64::from_polar(1.0, sign.value() * u * t);
    Ok(free.matvec(psi).into_iter().map(|z| z * phase).collect())
}

/// Two-particle Hamiltonian `T1 (x) I + I (x) T2 + U(x1, x2)` on `grid (x) grid`.
pub fn two_body_hamiltonian(
    grid: &GridSpec,
    mu1: f64,
    mu2: f64,
    interaction: impl Fn(f64, f64) -> f64,
) -> Result<ComplexMatrix> {
    let n = grid.size();
    let t1 = lift_one(&kinetic_operator(grid, mu1)?, Slot::First, (n, n))?;
    let t2 = lift_one(&kinetic_operator(grid, mu2)?, Slot::Second, (n, n))?;
    let u = two_body_potential(grid, grid, interaction)?.densify();
    Ok(&(&t1 + &t2) + &u)
}

/// Direct exact evolution of a two-particle state.
pub fn direct_pair_evolution(
    psi: &TwoParticleWavefunction,
    mu1: f64,
    mu2: f64,
    interaction: impl Fn(f64, f64) -> f64,
    t: f64,
    sign: Sign,
) -> Result<TwoParticleWavefunction> {
    let (g1, g2) = psi.grids();
    if g1 != g2 {
        return Err(Error::GridMismatch);
    }
    let h = two_body_hamiltonian(g1, mu1, mu2, interaction)?;
    let out = exact_evolution(&h, t, sign)?.matvec(psi.amplitudes());
    TwoParticleWavefunction::new(*g1, *g2, out, psi.time() + t)
}

/// Grids on which the coordinates `X = (x1 + x2)/2` and `r = x1 - x2` of an
/// equal-mass pair on `grid (x) grid` fall exactly on grid points.
///
/// The center-of-mass grid has half the spacing over the same box; the
/// relative grid keeps the spacing and doubles the box so that every
/// separation `|r| < L` is represented.
pub fn pair_coordinate_grids(grid: &GridSpec) -> Result<(GridSpec, GridSpec)> {
    let k = grid.qubits() + 1;
    Ok((
        GridSpec::new(grid.length(), k, grid.is_centered())?,
        GridSpec::centered(2.0 * grid.length(), k)?,
    ))
}

/// Evolves an equal-mass pair with interaction `V(x1 - x2)` as two decoupled
/// problems: a free center of mass of mass `2 mu` and a relative particle of
/// reduced mass `mu / 2` in `V`. The initial state is `com0(X) rel0(r)`; the
/// result is recombined on `grid (x) grid`.
pub fn equal_mass_pair_evolution<V, A, B>(
    grid: &GridSpec,
    mu: f64,
    interaction: V,
    com0: A,
    rel0: B,
    t: f64,
    sign: Sign,
) -> Result<TwoParticleWavefunction>
where
    V: Fn(f64) -> f64,
    A: Fn(f64) -> C64,
    B: Fn(f64) -> C64,
{
    let reduction = com_reduction(mu, mu, interaction)?;
    let (com_grid, rel_grid) = pair_coordinate_grids(grid)?;

    let com_h = kinetic_operator(&com_grid, reduction.com.mass)?.densify();
    let rel_h = &kinetic_operator(&rel_grid, reduction.rel.mass)?.densify()
        + &potential_operator(&rel_grid, &reduction.rel.potential)?.densify();

    let com_state: Vec<C64> = com_grid.points().into_iter().map(&com0).collect();
    let rel_state: Vec<C64> = rel_grid.points().into_iter().map(&rel0).collect();
    let com_t = exact_evolution(&com_h, t, sign)?.matvec(&com_state);
    let rel_t = exact_evolution(&rel_h, t, sign)?.matvec(&rel_state);

    let n = grid.size();
    let amplitudes = (0..n * n)
        .map(|i| {
            let (m1, m2) = (i / n, i % n);
            com_t[m1 + m2] * rel_t[m1 + n - m2]
        })
        .collect();
    TwoParticleWavefunction::new(*grid, *grid, amplitudes, t)
}
