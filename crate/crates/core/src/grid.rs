//! Periodic position grids and the operators built on them.
//!
//! A grid of `N = 2^k` points spans a box of length `L` with spacing
//! `L / N`. Shifts wrap around (periodic boundary), so the finite-difference
//! stencils are circulant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    check_finite, norm, tensor, ComplexMatrix, StructuredOperator, C64, I, ONE, ZERO,
};

/// Largest supported qubit count; dense operators are far out of reach well before this.
pub const MAX_QUBITS: u32 = 24;

/// Box length, qubit count and placement of the grid points.
///
/// Uncentered points are `x_m = m L / N` on `[0, L)`; centered points are
/// `x_m = (m - N/2) L / N` on `[-L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    length: f64,
    qubits: u32,
    centered: bool,
}

impl GridSpec {
    pub fn new(length: f64, qubits: u32, centered: bool) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive and finite, got {length}"
            )));
        }
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::InvalidGrid(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {qubits}"
            )));
        }
        Ok(Self {
            length,
            qubits,
            centered,
        })
    }

    pub fn uncentered(length: f64, qubits: u32) -> Result<Self> {
        Self::new(length, qubits, false)
    }

    pub fn centered(length: f64, qubits: u32) -> Result<Self> {
        Self::new(length, qubits, true)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn size(&self) -> usize {
        1usize << self.qubits
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.size() as f64
    }

    pub fn point(&self, m: usize) -> f64 {
        let n = self.size();
        let index = if self.centered {
            m as f64 - (n / 2) as f64
        } else {
            m as f64
        };
        index * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.size()).map(|m| self.point(m)).collect()
    }

    /// Periodic index reduction, `m + N == m`.
    pub fn wrap(&self, m: isize) -> usize {
        m.rem_euclid(self.size() as isize) as usize
    }
}

/// Amplitudes `psi(x_m, t)` on a grid. The norm is never adjusted implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: GridSpec,
    amplitudes: Vec<C64>,
    time: f64,
}

impl Wavefunction {
    pub fn new(grid: GridSpec, amplitudes: Vec<C64>, time: f64) -> Result<Self> {
        if amplitudes.len() != grid.size() {
            return Err(Error::DimensionMismatch {
                expected: grid.size(),
                actual: amplitudes.len(),
            });
        }
        check_finite(&amplitudes)?;
        Ok(Self {
            grid,
            amplitudes,
            time,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Component at a periodic index.
    pub fn at(&self, m: isize) -> C64 {
        self.amplitudes[self.grid.wrap(m)]
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::numerics::norm_sqr(&self.amplitudes)
    }

    /// `sum_m x_m |psi_m|^2 / sum_m |psi_m|^2`.
    pub fn mean_position(&self) -> f64 {
        let weight: f64 = self.norm_sqr();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(m, z)| self.grid.point(m) * z.norm_sqr())
            .sum::<f64>()
            / weight
    }

    /// Snapshot as JSON lines: one grid header, then one record per grid point.
    pub fn to_jsonl(&self) -> String {
        let header = GridHeader {
            length: self.grid.length,
            k: self.grid.qubits,
            n: self.grid.size(),
            centered: self.grid.centered,
            t: self.time,
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for (m, z) in self.amplitudes.iter().enumerate() {
            let record = PointRecord {
                m,
                x: self.grid.point(m),
                re: z.re,
                im: z.im,
                prob: z.norm_sqr(),
            };
            out.push_str(&serde_json::to_string(&record).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`Wavefunction::to_jsonl`].
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::InvalidGrid(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: GridHeader =
            serde_json::from_str(lines.next().ok_or_else(|| bad("empty snapshot".into()))?)
                .map_err(|e| bad(format!("bad header: {e}")))?;
        let grid = GridSpec::new(header.length, header.k, header.centered)?;
        if grid.size() != header.n {
            return Err(bad(format!(
                "header N = {} but 2^k = {}",
                header.n,
                grid.size()
            )));
        }
        let mut amplitudes = vec![ZERO; grid.size()];
        let mut seen = 0;
        for line in lines {
            let r: PointRecord =
                serde_json::from_str(line).map_err(|e| bad(format!("bad record: {e}")))?;
            if r.m >= grid.size() {
                return Err(bad(format!("record index {} out of range", r.m)));
            }
            amplitudes[r.m] = C64::new(r.re, r.im);
            seen += 1;
        }
        if seen != grid.size() {
            return Err(Error::DimensionMismatch {
                expected: grid.size(),
                actual: seen,
            });
        }
        Wavefunction::new(grid, amplitudes, header.t)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct GridHeader {
    #[serde(rename = "L")]
    length: f64,
    k: u32,
    #[serde(rename = "N")]
    n: usize,
    centered: bool,
    t: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRecord {
    m: usize,
    x: f64,
    re: f64,
    im: f64,
    prob: f64,
}

/// Two-particle amplitudes with index `m1 * N2 + m2`, matching [`tensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleWavefunction {
    grid1: GridSpec,
    grid2: GridSpec,
    amplitudes: Vec<C64>,
    time: f64,
}

impl TwoParticleWavefunction {
    pub fn new(grid1: GridSpec, grid2: GridSpec, amplitudes: Vec<C64>, time: f64) -> Result<Self> {
        let expected = grid1.size() * grid2.size();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        check_finite(&amplitudes)?;
        Ok(Self {
            grid1,
            grid2,
            amplitudes,
            time,
        })
    }

    /// `psi1 (x) psi2`, timestamped with the first factor's time.
    pub fn product(first: &Wavefunction, second: &Wavefunction) -> Self {
        Self {
            grid1: first.grid,
            grid2: second.grid,
            amplitudes: crate::numerics::tensor_vec(&first.amplitudes, &second.amplitudes),
            time: first.time,
        }
    }

    pub fn grids(&self) -> (&GridSpec, &GridSpec) {
        (&self.grid1, &self.grid2)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn at(&self, m1: usize, m2: usize) -> C64 {
        self.amplitudes[m1 * self.grid2.size() + m2]
    }

    /// Particle-exchange image `psi'(m1, m2) = psi(m2, m1)`.
    pub fn exchanged(&self) -> Result<Self> {
        if self.grid1 != self.grid2 {
            return Err(Error::GridMismatch);
        }
        let n = self.grid1.size();
        let amplitudes = (0..n * n).map(|i| self.at(i % n, i / n)).collect();
        Ok(Self {
            amplitudes,
            ..self.clone()
        })
    }
}

/// Samples `f(x_m, t)` on every grid point, without normalization.
pub fn sample(f: impl Fn(f64, f64) -> C64, grid: &GridSpec, t: f64) -> Result<Wavefunction> {
    let amplitudes: Vec<C64> = grid.points().into_iter().map(|x| f(x, t)).collect();
    Wavefunction::new(*grid, amplitudes, t)
}

/// Samples `f(x1, x2, t)` on the product grid.
pub fn sample_two(
    f: impl Fn(f64, f64, f64) -> C64,
    grid1: &GridSpec,
    grid2: &GridSpec,
    t: f64,
) -> Result<TwoParticleWavefunction> {
    let (p1, p2) = (grid1.points(), grid2.points());
    let amplitudes = p1
        .iter()
        .flat_map(|&x1| p2.iter().map(move |&x2| (x1, x2)))
        .map(|(x1, x2)| f(x1, x2, t))
        .collect();
    TwoParticleWavefunction::new(*grid1, *grid2, amplitudes, t)
}

/// Plane-wave mode `n`: components `exp(2 pi i n m / N)`, unnormalized.
pub fn plane_wave(grid: &GridSpec, mode: isize) -> Vec<C64> {
    let n = grid.size();
    let mode = grid.wrap(mode);
    (0..n)
        .map(|m| {
            // Phases past pi are conjugates of phases below it, so modes n and N - n
            // are exact complex conjugates.
            let j = (mode * m) % n;
            if 2 * j == n {
                C64::new(-1.0, 0.0)
            } else if 2 * j > n {
                C64::from_polar(1.0, 2.0 * PI * (n - j) as f64 / n as f64).conj()
            } else {
                C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)
            }
        })
        .collect()
}

/// Folds `mode` into `0..=N/2` and returns it with the sign of the reflection.
fn folded_mode(grid: &GridSpec, mode: isize) -> (f64, f64) {
    let n = grid.size();
    let m = grid.wrap(mode);
    if 2 * m > n {
        ((n - m) as f64, -1.0)
    } else {
        (m as f64, 1.0)
    }
}

/// Central-difference momentum `-(i/2)(N/L)(S+ - S-)`.
pub fn momentum_operator(grid: &GridSpec) -> Result<StructuredOperator> {
    let n = grid.size();
    if n < 3 {
        return Err(Error::DegenerateGrid {
            size: n,
            min: 3,
            operator: "momentum",
        });
    }
    let coupling = I * (0.5 / grid.spacing());
    let mut p = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        let m = m as isize;
        p[(m as usize, grid.wrap(m + 1))] = -coupling;
        p[(m as usize, grid.wrap(m - 1))] = coupling;
    }
    Ok(StructuredOperator::Dense(p))
}

/// `(N/L) sin(2 pi n / N)`, the momentum eigenvalue of plane-wave mode `n`.
pub fn momentum_eigenvalue(grid: &GridSpec, mode: isize) -> f64 {
    let n = grid.size() as f64;
    let (m, reflection) = folded_mode(grid, mode);
    if 2.0 * m == n {
        return 0.0;
    }
    reflection * (2.0 * PI * m / n).sin() / grid.spacing()
}

/// Kinetic energy `-(1/8 mu)(N/L)^2 [S+^2 + S-^2 - 2 I]` in natural units.
pub fn kinetic_operator(grid: &GridSpec, mu: f64) -> Result<StructuredOperator> {
    check_mass(mu)?;
    let n = grid.size();
    if n < 4 {
        return Err(Error::DegenerateGrid {
            size: n,
            min: 4,
            operator: "kinetic",
        });
    }
    let kappa = kinetic_prefactor(grid, mu);
    let mut t = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        let mi = m as isize;
        t[(m, grid.wrap(mi + 2))] -= kappa;
        t[(m, grid.wrap(mi - 2))] -= kappa;
        t[(m, m)] += 2.0 * kappa;
    }
    Ok(StructuredOperator::Dense(t))
}

/// `(1/8 mu)(N/L)^2`, the hopping strength of the shift-by-two kinetic stencil.
pub fn kinetic_prefactor(grid: &GridSpec, mu: f64) -> C64 {
    let inv = 1.0 / grid.spacing();
    C64::new(inv * inv / (8.0 * mu), 0.0)
}

/// `(1/4 mu)(N/L)^2 (1 - cos(4 pi n / N))`, the kinetic eigenvalue of mode `n`.
pub fn kinetic_eigenvalue(grid: &GridSpec, mu: f64, mode: isize) -> f64 {
    let n = grid.size() as f64;
    let inv = 1.0 / grid.spacing();
    let (m, _) = folded_mode(grid, mode);
    inv * inv / (4.0 * mu) * (1.0 - (4.0 * PI * m / n).cos())
}

pub(crate) fn check_mass(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveMass(mu))
    }
}

/// Local potential `diag(v(x_m))`.
pub fn potential_operator(grid: &GridSpec, v: impl Fn(f64) -> f64) -> Result<StructuredOperator> {
    let values = real_values(grid.points().into_iter().map(v))?;
    Ok(StructuredOperator::Diagonal(values))
}

/// Two-body local interaction `diag(u(x_m1, x_m2))` on the product grid.
pub fn two_body_potential(
    grid1: &GridSpec,
    grid2: &GridSpec,
    u: impl Fn(f64, f64) -> f64,
) -> Result<StructuredOperator> {
    let (p1, p2) = (grid1.points(), grid2.points());
    let values = real_values(
        p1.iter()
            .flat_map(|&x1| p2.iter().map(move |&x2| (x1, x2)))
            .map(|(x1, x2)| u(x1, x2)),
    )?;
    Ok(StructuredOperator::Diagonal(values))
}

fn real_values(values: impl Iterator<Item = f64>) -> Result<Vec<C64>> {
    values
        .enumerate()
        .map(|(index, value)| {
            if value.is_finite() {
                Ok(C64::new(value, 0.0))
            } else {
                Err(Error::NonFinite { index, value })
            }
        })
        .collect()
}

/// Which particle a one-body operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

/// `op (x) I_N2` for the first particle, `I_N1 (x) op` for the second.
pub fn lift_one(
    op: &StructuredOperator,
    slot: Slot,
    dims: (usize, usize),
) -> Result<ComplexMatrix> {
    let (n1, n2) = dims;
    let expected = match slot {
        Slot::First => n1,
        Slot::Second => n2,
    };
    if op.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: op.dim(),
        });
    }
    let dense = op.densify();
    Ok(match slot {
        Slot::First => tensor(&dense, &ComplexMatrix::identity(n2)),
        Slot::Second => tensor(&ComplexMatrix::identity(n1), &dense),
    })
}

/// Exchange symmetry for identical particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exchange {
    Symmetric,
    Antisymmetric,
}

/// `(psi(m1, m2) +- psi(m2, m1)) / 2`.
///
/// Returns [`Error::ZeroResult`] when antisymmetrization annihilates the state.
pub fn symmetrize(
    psi: &TwoParticleWavefunction,
    exchange: Exchange,
) -> Result<TwoParticleWavefunction> {
    let swapped = psi.exchanged()?;
    let sign = match exchange {
        Exchange::Symmetric => 1.0,
        Exchange::Antisymmetric => -1.0,
    };
    let amplitudes: Vec<C64> = psi
        .amplitudes
        .iter()
        .zip(&swapped.amplitudes)
        .map(|(a, b)| (a + b * sign) * 0.5)
        .collect();
    let before = norm(&psi.amplitudes);
    if norm(&amplitudes) <= 1e-14 * before || before == 0.0 {
        return Err(Error::ZeroResult);
    }
    Ok(TwoParticleWavefunction {
        amplitudes,
        ..psi.clone()
    })
}

/// Center-of-mass part of a two-body problem: a free particle of total mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterOfMassProblem {
    pub mass: f64,
}

/// Relative-coordinate part: reduced mass in the pair interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeProblem<F> {
    pub mass: f64,
    pub potential: F,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComReduction<F> {
    pub com: CenterOfMassProblem,
    pub rel: RelativeProblem<F>,
}

/// Splits a two-body problem with interaction `V(x1 - x2)` into decoupled
/// center-of-mass and relative problems.
pub fn com_reduction<F: Fn(f64) -> f64>(
    mu1: f64,
    mu2: f64,
    interaction: F,
) -> Result<ComReduction<F>> {
    check_mass(mu1)?;
    check_mass(mu2)?;
    let total = mu1 + mu2;
    Ok(ComReduction {
        com: CenterOfMassProblem { mass: total },
        rel: RelativeProblem {
            mass: mu1 * mu2 / total,
            potential: interaction,
        },
    })
}

/// Unitary DFT `F_mn = exp(2 pi i m n / N) / sqrt(N)`.
pub fn dft_operator(grid: &GridSpec) -> ComplexMatrix {
    dft_matrix(grid.size())
}

pub fn dft_matrix(n: usize) -> ComplexMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |r, c| {
        C64::from_polar(scale, 2.0 * PI * ((r * c) % n) as f64 / n as f64)
    })
}

/// Position operator `diag(x_m)`.
pub fn position_operator(grid: &GridSpec) -> StructuredOperator {
    StructuredOperator::Diagonal(grid.points().into_iter().map(|x| x * ONE).collect())
}
