//! End-to-end teleportation runs.
//!
//! Path layout for every protocol (Charlie `c = d - n` paths, Alice `n`, Bob `c`):
//!
//! ```text
//! [ Charlie 0..c | Alice c..c+n | Bob c+n..2c+n ]
//! ```
//!
//! Alice and Bob share `det(Λ)|0>/sqrt(d!)`. In physical-filter mode the
//! Charlie and Alice paths go through the Bell filter and a coincidence in all
//! `d` ports is post-selected; in ideal-projector mode `|Ψ><Ψ|` is applied to
//! those paths directly. Bob's conditional state is then compared to Charlie's
//! input mapped onto Bob's paths.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::antisym::{
    antisymmetric_state, determinant_state, laplace_partition, LambdaMatrix, PartitionSpec,
    MAX_ANTISYM_D,
};
use crate::combinatorics::{binomial, colex_subsets, complement};
use crate::error::{Error, Result};
use crate::filter::{bell_filter_unitary, coincidence_project};
use crate::fock::{
    fidelity, inner_product, partial_trace, tensor, DensityOperator, ModeId, PureState, Register,
};
use crate::optics::apply_unitary;

/// Largest `d` simulated through the physical filter.
pub const MAX_PHYSICAL_D: usize = 5;
/// Largest `d` for ideal-projector runs.
pub const MAX_IDEAL_D: usize = 6;

const NORMALIZATION_TOL: f64 = 1e-12;
const SUBSPACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PhysicalFilter,
    IdealProjector,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::PhysicalFilter => "physical-filter",
            Mode::IdealProjector => "ideal-projector",
        }
    }
}

/// Normalized coefficients of the state to teleport.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditInput {
    coefficients: Vec<Complex64>,
}

impl QuditInput {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        let n: f64 = coefficients.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(QuditInput { coefficients })
    }

    /// Basis state `k` of a `dim`-level system.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::Invalid(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Complex Gaussian vector, normalized.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut v {
            *a /= n;
        }
        QuditInput { coefficients: v }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportReport {
    pub d: usize,
    /// Photons held by (Alice, Bob).
    pub partition: (usize, usize),
    pub mode: Mode,
    pub success_probability: f64,
    pub fidelity: f64,
    pub photons_total: usize,
    pub qubits_sent: f64,
}

/// A report together with the post-selected state and Bob's normalized
/// conditional operator.
#[derive(Debug, Clone)]
pub struct TeleportRun {
    pub report: TeleportReport,
    pub final_state: PureState,
    pub bob: DensityOperator,
    /// Charlie's input as it should appear on Bob's paths.
    pub expected_bob: PureState,
}

fn check_d(d: usize, mode: Mode) -> Result<()> {
    let max = match mode {
        Mode::PhysicalFilter => MAX_PHYSICAL_D,
        Mode::IdealProjector => MAX_IDEAL_D,
    };
    if !(2..=max).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            reason: format!("{} mode supports 2 <= d <= {max}", mode.as_str()),
        });
    }
    Ok(())
}

/// Teleports one `d`-level photon.
pub fn teleport_single_qudit(d: usize, chi: &QuditInput, mode: Mode) -> Result<TeleportReport> {
    run_single_qudit(d, chi, mode).map(|r| r.report)
}

/// Single-qudit protocol: Bob's photon is the first row of Λ, so the shared
/// state is the first-row expansion `Σ_i |A_i>|i>/sqrt(d)`.
pub fn run_single_qudit(d: usize, chi: &QuditInput, mode: Mode) -> Result<TeleportRun> {
    check_d(d, mode)?;
    if chi.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "input has {} coefficients, expected {d}",
            chi.dim()
        )));
    }
    let charlie_reg = Register::new(1, d);
    let charlie = single_photon_state(charlie_reg, 0, chi.coefficients())?;

    // Alice on local paths 0..d-1, Bob on local path d-1 (first row of Λ)
    let ab_reg = Register::new(d, d);
    let mut ab_rows = vec![d - 1];
    ab_rows.extend(0..d - 1);
    let shared = antisymmetric_state(&LambdaMatrix::on_paths(ab_reg, ab_rows)?)?;

    let input = tensor(&charlie, &shared)?;
    let reg = input.register();
    let alice: Vec<usize> = (1..d).collect();
    let bob = d;

    let final_state = match mode {
        Mode::PhysicalFilter => {
            // Alice's photons on the first filter rows, Charlie's on the last
            let mut rows = alice.clone();
            rows.push(0);
            filter_and_post_select(&input, rows)?
        }
        Mode::IdealProjector => {
            let mut rows = vec![0];
            rows.extend(&alice);
            let target = antisymmetric_state(&LambdaMatrix::on_paths(reg, rows)?)?;
            let ca: Vec<usize> = (0..d).collect();
            input.project_onto(&target, &ca)?
        }
    };
    let expected_bob = single_photon_state(charlie_reg, 0, chi.coefficients())?;
    finish(
        d,
        (d - 1, 1),
        mode,
        final_state,
        &[bob],
        expected_bob,
        d + 1,
        d as f64,
    )
}

fn single_photon_state(
    register: Register,
    path: usize,
    coefficients: &[Complex64],
) -> Result<PureState> {
    let mut acc = PureState::zero(register);
    for (k, a) in coefficients.iter().enumerate() {
        acc = acc.add(&PureState::basis(register, &[ModeId::new(path, k)])?.scaled(*a))?;
    }
    Ok(acc)
}

/// Applies the Bell filter with `rows[i]` as its i-th input port, then keeps
/// coincidences on all of those paths.
fn filter_and_post_select(input: &PureState, rows: Vec<usize>) -> Result<PureState> {
    let filter = bell_filter_unitary(rows.len())?;
    let u = filter.unitary.relabel(rows.clone())?;
    let evolved = apply_unitary(&u, input)?;
    let (kept, _) = coincidence_project(&evolved, &rows)?;
    Ok(kept)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    d: usize,
    partition: (usize, usize),
    mode: Mode,
    final_state: PureState,
    bob_paths: &[usize],
    expected_bob: PureState,
    photons_total: usize,
    dimension: f64,
) -> Result<TeleportRun> {
    let success_probability = final_state.norm_sq();
    let bob = partial_trace(&final_state, bob_paths)?.normalized()?;
    let fid = fidelity(&bob, &expected_bob)?;
    Ok(TeleportRun {
        report: TeleportReport {
            d,
            partition,
            mode,
            success_probability,
            fidelity: fid,
            photons_total,
            qubits_sent: dimension.log2(),
        },
        final_state,
        bob,
        expected_bob,
    })
}

/// Label sets of Charlie's (and Bob's) `(d-n)`-photon basis states, in the
/// index order used for collective inputs.
pub fn collective_basis_labels(d: usize, n: usize) -> Vec<Vec<usize>> {
    colex_subsets(d, n)
        .iter()
        .map(|s| complement(d, s))
        .collect()
}

/// The `(d-n)`-photon basis states on a `(d-n, d)` register.
pub fn collective_basis(d: usize, n: usize) -> Result<Vec<PureState>> {
    let c = d - n;
    let reg = Register::new(c, d);
    let rows: Vec<usize> = (0..c).collect();
    collective_basis_labels(d, n)
        .iter()
        .map(|labels| determinant_state(reg, &rows, labels))
        .collect()
}

/// Coefficients of a `(d-n)`-photon state over [`collective_basis`]; fails if
/// the state has weight outside the antisymmetric subspace.
pub fn collective_input_from_state(d: usize, n: usize, chi: &PureState) -> Result<QuditInput> {
    check_partition(d, n)?;
    let basis = collective_basis(d, n)?;
    let coeffs = basis
        .iter()
        .map(|b| inner_product(b, chi))
        .collect::<Result<Vec<_>>>()?;
    let captured: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
    let deficit = chi.norm_sq() - captured;
    if deficit > SUBSPACE_TOL {
        return Err(Error::OutsideAntisymmetricSubspace(deficit));
    }
    QuditInput::new(coeffs)
}

fn check_partition(d: usize, n: usize) -> Result<()> {
    if n == 0 || n >= d {
        return Err(Error::InvalidPartition(format!(
            "need 0 < n < d, got n = {n}, d = {d}"
        )));
    }
    Ok(())
}

/// Teleports the collective antisymmetric state of `d - n` photons using a
/// `(n, d - n)` split of the shared state.
pub fn teleport_collective(
    d: usize,
    n: usize,
    chi: &QuditInput,
    mode: Mode,
) -> Result<TeleportReport> {
    run_collective(d, n, chi, mode).map(|r| r.report)
}

pub fn run_collective(d: usize, n: usize, chi: &QuditInput, mode: Mode) -> Result<TeleportRun> {
    check_d(d, mode)?;
    check_partition(d, n)?;
    if mode == Mode::PhysicalFilter && n != d - 1 && n != 1 {
        return Err(Error::UnsupportedMode(format!(
            "physical filter needs n = 1 or n = d - 1, got n = {n}, d = {d}"
        )));
    }
    let c = d - n;
    let dim = binomial(d as u64, n as u64).expect("small") as usize;
    if chi.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "input has {} coefficients, expected binomial({d}, {n}) = {dim}",
            chi.dim()
        )));
    }
    let reg = Register::new(2 * c + n, d);
    let charlie: Vec<usize> = (0..c).collect();
    let alice: Vec<usize> = (c..c + n).collect();
    let bob: Vec<usize> = (c + n..2 * c + n).collect();

    let ab_rows: Vec<usize> = alice.iter().chain(&bob).copied().collect();
    let ab_lambda = LambdaMatrix::on_paths(reg, ab_rows)?;
    let decomposition = laplace_partition(
        &ab_lambda,
        &PartitionSpec::new(&ab_lambda, alice.clone(), bob.clone())?,
    )?;
    let shared = decomposition.reconstruct()?;

    let labels = collective_basis_labels(d, n);
    let mut charlie_state = PureState::zero(reg);
    for (a, l) in chi.coefficients().iter().zip(&labels) {
        charlie_state = charlie_state.add(&determinant_state(reg, &charlie, l)?.scaled(*a))?;
    }
    let input = charlie_state.disjoint_product(&shared)?;

    let final_state = match mode {
        Mode::PhysicalFilter => {
            // the antisymmetric group goes on the first rows, the single photon last
            let rows: Vec<usize> = if n == d - 1 {
                alice.iter().chain(&charlie).copied().collect()
            } else {
                charlie.iter().chain(&alice).copied().collect()
            };
            filter_and_post_select(&input, rows)?
        }
        Mode::IdealProjector => {
            let ca_rows: Vec<usize> = alice.iter().chain(&charlie).copied().collect();
            let target = antisymmetric_state(&LambdaMatrix::on_paths(reg, ca_rows.clone())?)?;
            input.project_onto(&target, &ca_rows)?
        }
    };

    let bob_reg = Register::new(c, d);
    let bob_rows: Vec<usize> = (0..c).collect();
    let mut expected = PureState::zero(bob_reg);
    for (a, l) in chi.coefficients().iter().zip(&labels) {
        expected = expected.add(&determinant_state(bob_reg, &bob_rows, l)?.scaled(*a))?;
    }
    finish(
        d,
        (n, c),
        mode,
        final_state,
        &bob,
        expected,
        d + c,
        dim as f64,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyRow {
    pub d: usize,
    /// Qubits per additional photon when teleporting qubits one by one.
    pub individual_rate: f64,
    /// Same, per photon generated (pair plus carrier).
    pub individual_rate_per_generated: f64,
    /// `binomial(d, d/2)`.
    pub collective_dimension: u64,
    /// `log2(binomial(d, d/2))`, exact.
    pub collective_qubits: f64,
    /// `collective_qubits / d`.
    pub collective_rate: f64,
    /// `collective_qubits / (d + d/2)`.
    pub collective_rate_per_generated: f64,
    /// Large-d approximation of `collective_qubits`; display only.
    pub asymptotic_qubits: f64,
    /// Outcomes of a full Bell measurement on `d` qudit photons, `d^d`.
    pub bell_outcomes: f64,
    /// Linear-optics success bound `1/2^d` for `d` individually teleported qubits.
    pub individual_success_bound: f64,
}

pub fn efficiency_curve(d_list: &[usize]) -> Result<Vec<EfficiencyRow>> {
    d_list
        .iter()
        .map(|&d| {
            if d == 0 || d % 2 == 1 {
                return Err(Error::Invalid(format!(
                    "collective rows need even d >= 2, got {d}"
                )));
            }
            let dim = binomial(d as u64, (d / 2) as u64)
                .ok_or_else(|| Error::Invalid(format!("binomial({d}, {}) overflows", d / 2)))?;
            let qubits = (dim as f64).log2();
            Ok(EfficiencyRow {
                d,
                individual_rate: 0.5,
                individual_rate_per_generated: 1.0 / 3.0,
                collective_dimension: dim,
                collective_qubits: qubits,
                collective_rate: qubits / d as f64,
                collective_rate_per_generated: qubits / (1.5 * d as f64),
                asymptotic_qubits: d as f64,
                bell_outcomes: (d as f64).powi(d as i32),
                individual_success_bound: 0.5f64.powi(d as i32),
            })
        })
        .collect()
}

/// Coincidence probability of a generalized Bell state through the filter.
pub fn bell_filter_response(d: usize, idx: crate::filter::GeneralizedBellIndex) -> Result<f64> {
    if !(2..=MAX_PHYSICAL_D).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            reason: format!("Bell sweeps support 2 <= d <= {MAX_PHYSICAL_D}"),
        });
    }
    let lambda = LambdaMatrix::standard(d)?;
    let state = crate::filter::generalized_bell_state(&lambda, idx)?;
    let filter = bell_filter_unitary(d)?;
    let out = apply_unitary(&filter.unitary, &state)?;
    let watch: Vec<usize> = (0..d).collect();
    Ok(coincidence_project(&out, &watch)?.1)
}

// ideal runs stay within the antisymmetric state builder's range
const _: () = assert!(MAX_IDEAL_D <= MAX_ANTISYM_D);
