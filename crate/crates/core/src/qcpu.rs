//! QCPU networks `Q(U) = I (x) I + U (x) c^dagger` and their composition laws.
//!
//! Basis ordering on register (x) auxiliary is `2 * register + aux`: the
//! auxiliary qubit is the fast index, so each register basis state owns a
//! contiguous pair `(aux 0, aux 1)`.
//!
//! A network is kept both as its payload `U` (closed form) and as the ordered
//! list of nilpotent factors `I + U_mn |m><n| (x) c^dagger`, one per nonzero
//! matrix element. Every factor exponent squares to zero, so its exponential
//! is assembled exactly as `I + X`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{tensor, tensor_vec, ComplexMatrix, C64, ONE, ZERO};

/// Human-readable statement of the composite basis ordering, written into dumps.
pub const BASIS_ORDERING: &str = "index = 2*register + aux";

/// Auxiliary-qubit branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuxBranch {
    Lower = 0,
    Raised = 1,
}

pub fn composite_index(register: usize, aux: AuxBranch) -> usize {
    2 * register + aux as usize
}

/// `c = |0><1|` and `c^dagger = |1><0|` on the auxiliary qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxLadder {
    pub c: ComplexMatrix,
    pub c_dagger: ComplexMatrix,
}

impl AuxLadder {
    pub fn new() -> Self {
        let mut c = ComplexMatrix::zeros(2, 2);
        c[(0, 1)] = ONE;
        Self {
            c_dagger: c.adjoint(),
            c,
        }
    }
}

impl Default for AuxLadder {
    fn default() -> Self {
        Self::new()
    }
}

/// One factor `exp{(U_mn |m><n| (x) I_A) C_A^dagger}` of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QcpuFactor {
    pub m: usize,
    pub n: usize,
    pub u: C64,
}

impl QcpuFactor {
    fn check(&self, register_dim: usize) -> Result<()> {
        if self.m >= register_dim || self.n >= register_dim {
            return Err(Error::IndexOutOfRange {
                m: self.m,
                n: self.n,
                dim: register_dim,
            });
        }
        Ok(())
    }

    /// `acc <- acc * (I + u E)` where `E` has its single 1 at (reg m / aux 1, reg n / aux 0).
    fn right_multiply(&self, acc: &mut ComplexMatrix) {
        let src = composite_index(self.m, AuxBranch::Raised);
        let dst = composite_index(self.n, AuxBranch::Lower);
        for r in 0..acc.rows() {
            let v = acc[(r, src)];
            if v != ZERO {
                acc[(r, dst)] += self.u * v;
            }
        }
    }
}

/// Dense `2N x 2N` matrix of one factor: `I + u (|m><n| (x) c^dagger)`.
pub fn factor_matrix(factor: &QcpuFactor, register_dim: usize) -> Result<ComplexMatrix> {
    factor.check(register_dim)?;
    let mut out = ComplexMatrix::identity(2 * register_dim);
    out[(
        composite_index(factor.m, AuxBranch::Raised),
        composite_index(factor.n, AuxBranch::Lower),
    )] += factor.u;
    Ok(out)
}

/// The network `Q(U)` for a square payload `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct QcpuNetwork {
    register_dim: usize,
    payload: ComplexMatrix,
    factors: Vec<QcpuFactor>,
}

impl QcpuNetwork {
    pub fn identity(register_dim: usize) -> Self {
        build_network(&ComplexMatrix::identity(register_dim)).expect("identity is square")
    }

    pub fn register_dim(&self) -> usize {
        self.register_dim
    }

    pub fn payload(&self) -> &ComplexMatrix {
        &self.payload
    }

    pub fn factors(&self) -> &[QcpuFactor] {
        &self.factors
    }

    /// Closed form `I_N (x) I_2 + U (x) c^dagger`.
    pub fn dense(&self) -> ComplexMatrix {
        let ladder = AuxLadder::new();
        let n = self.register_dim;
        &ComplexMatrix::identity(2 * n) + &tensor(&self.payload, &ladder.c_dagger)
    }

    /// Product of the factor matrices taken in `order` (indices into [`Self::factors`]).
    ///
    /// Each factor differs from the identity in one entry, so the product is
    /// accumulated by rank-one column updates instead of dense multiplication.
    pub fn factor_product(&self, order: &[usize]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::identity(2 * self.register_dim);
        for &i in order {
            self.factors[i].right_multiply(&mut acc);
        }
        acc
    }

    /// `psi (x) |0> + (U psi) (x) |1>`.
    pub fn apply(&self, register_state: &[C64]) -> Result<Vec<C64>> {
        apply_network(self, register_state)
    }

    pub fn to_dump(&self) -> NetworkDump {
        NetworkDump {
            basis_ordering: BASIS_ORDERING.to_string(),
            register_dim: self.register_dim,
            payload: self
                .payload
                .as_slice()
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
            factors: self
                .factors
                .iter()
                .map(|f| FactorDump {
                    m: f.m,
                    n: f.n,
                    u: [f.u.re, f.u.im],
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &NetworkDump) -> Result<Self> {
        let n = dump.register_dim;
        let entries: Vec<C64> = dump
            .payload
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        let payload = ComplexMatrix::from_row_major(n, n, entries)?;
        let net = build_network(&payload)?;
        let factors: Vec<QcpuFactor> = dump
            .factors
            .iter()
            .map(|f| QcpuFactor {
                m: f.m,
                n: f.n,
                u: C64::new(f.u[0], f.u[1]),
            })
            .collect();
        if factors != net.factors {
            return Err(Error::InvalidDump(
                "factor list does not match the nonzero payload entries".into(),
            ));
        }
        Ok(net)
    }
}

/// JSON form of a network; `payload` is row-major `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDump {
    pub basis_ordering: String,
    pub register_dim: usize,
    pub payload: Vec<[f64; 2]>,
    pub factors: Vec<FactorDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDump {
    pub m: usize,
    pub n: usize,
    pub u: [f64; 2],
}

/// Builds `Q(U)`; the factor list enumerates the nonzero entries of `U` row by row.
pub fn build_network(u: &ComplexMatrix) -> Result<QcpuNetwork> {
    if !u.is_square() {
        return Err(Error::NonSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    crate::numerics::check_finite(u.as_slice())?;
    let n = u.rows();
    let mut factors = Vec::new();
    for m in 0..n {
        for col in 0..n {
            let value = u[(m, col)];
            if value != ZERO {
                factors.push(QcpuFactor {
                    m,
                    n: col,
                    u: value,
                });
            }
        }
    }
    Ok(QcpuNetwork {
        register_dim: n,
        payload: u.clone(),
        factors,
    })
}

pub fn apply_network(net: &QcpuNetwork, register_state: &[C64]) -> Result<Vec<C64>> {
    let n = net.register_dim;
    if register_state.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: register_state.len(),
        });
    }
    let transformed = net.payload.matvec(register_state);
    let mut out = vec![ZERO; 2 * n];
    for m in 0..n {
        out[composite_index(m, AuxBranch::Lower)] = register_state[m];
        out[composite_index(m, AuxBranch::Raised)] = transformed[m];
    }
    Ok(out)
}

/// Amplitudes of `state` whose auxiliary index equals `branch`, unnormalized.
///
/// Panics if `state` has odd length.
pub fn project_aux(state: &[C64], branch: AuxBranch) -> Vec<C64> {
    assert!(
        state.len().is_multiple_of(2),
        "register (x) auxiliary state must have even length"
    );
    state
        .iter()
        .skip(branch as usize)
        .step_by(2)
        .copied()
        .collect()
}

/// Embeds a register state as `psi (x) |0>_A`.
pub fn embed_lower(register_state: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; 2 * register_state.len()];
    for (m, &z) in register_state.iter().enumerate() {
        out[composite_index(m, AuxBranch::Lower)] = z;
    }
    out
}

/// `C_A = I_R (x) c_A`, the connector feeding a raised branch into the next network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Connector {
    pub register_dim: usize,
}

impl Connector {
    pub fn new(register_dim: usize) -> Self {
        Self { register_dim }
    }

    pub fn dense(&self) -> ComplexMatrix {
        tensor(
            &ComplexMatrix::identity(self.register_dim),
            &AuxLadder::new().c,
        )
    }

    pub fn dagger_dense(&self) -> ComplexMatrix {
        tensor(
            &ComplexMatrix::identity(self.register_dim),
            &AuxLadder::new().c_dagger,
        )
    }
}

fn common_dim(nets: &[QcpuNetwork]) -> Result<usize> {
    let first = nets.first().ok_or(Error::EmptyComposition)?;
    let n = first.register_dim;
    check_dims(n, nets)?;
    Ok(n)
}

fn check_dims(n: usize, nets: &[QcpuNetwork]) -> Result<()> {
    match nets.iter().find(|net| net.register_dim != n) {
        Some(net) => Err(Error::DimensionMismatch {
            expected: n,
            actual: net.register_dim,
        }),
        None => Ok(()),
    }
}

/// Sum rule: `Q(U_1 + ... + U_r)`, whose dense form equals `Q(U_1) ... Q(U_r)`.
pub fn compose_sum(nets: &[QcpuNetwork]) -> Result<QcpuNetwork> {
    let n = common_dim(nets)?;
    let mut total = ComplexMatrix::zeros(n, n);
    for net in nets {
        total = &total + &net.payload;
    }
    build_network(&total)
}

/// `C_A^dagger (prod_j C_A Q(U_j)) C_A C_A^dagger`, product expanded left to right.
///
/// An empty list gives the empty product `I` inside the sandwich.
pub fn connector_sandwich(register_dim: usize, nets: &[QcpuNetwork]) -> Result<ComplexMatrix> {
    check_dims(register_dim, nets)?;
    let connector = Connector::new(register_dim);
    let c = connector.dense();
    let c_dag = connector.dagger_dense();
    let mut chain = ComplexMatrix::identity(2 * register_dim);
    for net in nets {
        chain = chain.matmul(&c).matmul(&net.dense());
    }
    Ok(c_dag.matmul(&chain).matmul(&c).matmul(&c_dag))
}

/// Product rule: `I_R (x) I_A + C_A^dagger (prod_j C_A Q(U_j)) C_A C_A^dagger`.
///
/// Equals `Q(U_1 U_2 ... U_r)` in matrix-product order, so the network that
/// applies `A` first and then `B` is `compose_product(&[Q(B), Q(A)])`.
pub fn compose_product(nets: &[QcpuNetwork]) -> Result<ComplexMatrix> {
    let n = common_dim(nets)?;
    let sandwich = connector_sandwich(n, nets)?;
    Ok(&ComplexMatrix::identity(2 * n) + &sandwich)
}

/// Connector chain of `steps` copies of the same network:
/// `I + C_A^dagger (C_A Q)^steps C_A C_A^dagger`, with the power taken by squaring.
pub fn connector_chain_power(net: &QcpuNetwork, steps: u64) -> ComplexMatrix {
    let connector = Connector::new(net.register_dim);
    let c = connector.dense();
    let c_dag = connector.dagger_dense();
    let link = c.matmul(&net.dense());
    let sandwich = c_dag.matmul(&link.pow(steps)).matmul(&c).matmul(&c_dag);
    &ComplexMatrix::identity(2 * net.register_dim) + &sandwich
}

/// Full-multiplication form `(I_N)_input (x) [C_A^dagger (prod_j C_A Q(U_j)) C_A C_A^dagger]_out`.
pub fn bar_form(register_dim: usize, nets: &[QcpuNetwork]) -> Result<ComplexMatrix> {
    let sandwich = connector_sandwich(register_dim, nets)?;
    Ok(tensor(&ComplexMatrix::identity(register_dim), &sandwich))
}

/// Initial state for [`bar_form`]: `psi_input (x) (psi (x) |0>_A)_out`.
pub fn bar_form_input(register_state: &[C64]) -> Vec<C64> {
    tensor_vec(register_state, &embed_lower(register_state))
}

/// The `(aux 1, aux 0)` block of a `2N x 2N` matrix, i.e. the payload of a network-form matrix.
pub fn extract_payload(matrix: &ComplexMatrix, register_dim: usize) -> Result<ComplexMatrix> {
    let dim = 2 * register_dim;
    if matrix.rows() != dim || matrix.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: matrix.rows(),
        });
    }
    Ok(matrix.strided_block(1, 2, 0, 2))
}
