//! The `verify-identities` command: the network identities on seeded random payloads.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::output::write_atomic;
use super::{CliError, CliResult};
use crate::numerics::{max_abs_diff_vec, tensor, tensor_vec, ComplexMatrix, C64};
use crate::qcpu::{
    bar_form, bar_form_input, build_network, compose_product, compose_sum, composite_index,
    connector_chain_power, extract_payload, project_aux, AuxBranch, AuxLadder, QcpuNetwork,
};

/// Absolute tolerance, scaled by the magnitude of the reference value.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Random factor orders tried against the closed form.
const FACTOR_ORDERS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub dim: usize,
    pub identities: Vec<IdentityCheck>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<&str> {
        self.identities
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

pub fn cmd_verify_identities(seed: u64, dim: usize, out: Option<PathBuf>) -> CliResult<()> {
    let report = verify_identities(seed, dim)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match out {
        Some(path) => {
            write_atomic(&path, json.as_bytes())?;
            for c in &report.identities {
                println!(
                    "{} {:<24} max error {:.3e} (tolerance {:.1e})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.max_error,
                    c.tolerance
                );
            }
        }
        None => print!("{json}"),
    }
    if report.all_pass {
        Ok(())
    } else {
        Err(CliError::Failure(format!(
            "identity check failed: {}",
            report.failures().join(", ")
        )))
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

struct Checks(Vec<IdentityCheck>);

impl Checks {
    /// Records `got` against `want` with tolerance scaled by `max(1, |want|_max)`.
    fn matrix(&mut self, name: &str, got: &ComplexMatrix, want: &ComplexMatrix) {
        self.record(name, got.max_abs_diff(want), want.max_abs());
    }

    fn vector(&mut self, name: &str, got: &[C64], want: &[C64]) {
        let scale = want.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        self.record(name, max_abs_diff_vec(got, want), scale);
    }

    fn record(&mut self, name: &str, error: f64, scale: f64) {
        let tolerance = IDENTITY_TOLERANCE * scale.max(1.0);
        self.0.push(IdentityCheck {
            name: name.to_string(),
            max_error: error,
            tolerance,
            pass: error <= tolerance,
        });
    }
}

/// Runs the identity suite. Identical `(seed, dim)` give identical reports.
pub fn verify_identities(seed: u64, dim: usize) -> CliResult<VerifyReport> {
    if dim == 0 || dim > 64 {
        return Err(CliError::Usage(format!(
            "dimension must be in 1..=64, got {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let us: Vec<ComplexMatrix> = (0..3).map(|_| random_matrix(&mut rng, dim)).collect();
    let nets: Vec<QcpuNetwork> = us
        .iter()
        .map(build_network)
        .collect::<crate::Result<_>>()
        .map_err(|e| CliError::Failure(e.to_string()))?;
    let fail = |e: crate::Error| CliError::Failure(e.to_string());
    let ladder = AuxLadder::new();
    let mut checks = Checks(Vec::new());

    let closed = &ComplexMatrix::identity(2 * dim) + &tensor(&us[0], &ladder.c_dagger);
    checks.matrix("closed_form", &nets[0].dense(), &closed);

    let mut worst = 0.0f64;
    let mut order: Vec<usize> = (0..nets[0].factors().len()).collect();
    for _ in 0..FACTOR_ORDERS {
        order.shuffle(&mut rng);
        worst = worst.max(nets[0].factor_product(&order).max_abs_diff(&closed));
    }
    checks.record("factor_orders", worst, closed.max_abs());

    let pair = &us[0] + &us[1];
    let dense_pair = nets[0].dense().matmul(&nets[1].dense());
    checks.matrix(
        "sum_rule_pair",
        &dense_pair,
        &build_network(&pair).map_err(fail)?.dense(),
    );
    let triple = &pair + &us[2];
    let dense_triple = dense_pair.matmul(&nets[2].dense());
    let want_triple = build_network(&triple).map_err(fail)?.dense();
    checks.matrix("sum_rule_triple", &dense_triple, &want_triple);
    checks.matrix(
        "compose_sum",
        &compose_sum(&nets).map_err(fail)?.dense(),
        &want_triple,
    );

    let mut product = ComplexMatrix::identity(dim);
    for r in 1..=3 {
        product = product.matmul(&us[r - 1]);
        let composed = compose_product(&nets[..r]).map_err(fail)?;
        let want = build_network(&product).map_err(fail)?.dense();
        checks.matrix(&format!("product_rule_r{r}"), &composed, &want);
        if r == 3 {
            let block = extract_payload(&composed, dim).map_err(fail)?;
            checks.matrix("block_extraction", &block, &product);
        }
    }

    let chained = connector_chain_power(&nets[0], 3);
    let explicit =
        compose_product(&[nets[0].clone(), nets[0].clone(), nets[0].clone()]).map_err(fail)?;
    checks.matrix("connector_chain", &chained, &explicit);

    let c = &ladder.c;
    let cd = &ladder.c_dagger;
    let nilpotent = c.matmul(c).max_abs().max(cd.matmul(cd).max_abs());
    checks.record("aux_nilpotent", nilpotent, 0.0);
    let anti = &c.matmul(cd) + &cd.matmul(c);
    checks.matrix("aux_anticommutator", &anti, &ComplexMatrix::identity(2));

    let psi = random_vector(&mut rng, dim);
    let applied = nets[0].apply(&psi).map_err(fail)?;
    checks.vector(
        "apply_raised",
        &project_aux(&applied, AuxBranch::Raised),
        &us[0].matvec(&psi),
    );
    checks.vector(
        "apply_lower",
        &project_aux(&applied, AuxBranch::Lower),
        &psi,
    );

    // The bar form leaves the input copy alone and raises `U1 U2 U3 psi` in the output register.
    let bar = bar_form(dim, &nets).map_err(fail)?;
    let mut raised = vec![C64::new(0.0, 0.0); 2 * dim];
    for (m, z) in product.matvec(&psi).into_iter().enumerate() {
        raised[composite_index(m, AuxBranch::Raised)] = z;
    }
    checks.vector(
        "bar_form",
        &bar.matvec(&bar_form_input(&psi)),
        &tensor_vec(&psi, &raised),
    );

    let all_pass = checks.0.iter().all(|c| c.pass);
    Ok(VerifyReport {
        seed,
        dim,
        identities: checks.0,
        all_pass,
    })
}
