//! Totally antisymmetric multi-photon states built from determinants of the
//! creation-operator matrix Λ (rows: paths, columns: OAM labels), and their
//! bipartitions.
//!
//! Expanding `det(Λ)` along any set of `n` rows splits the state into
//! `binomial(d, n)` products of minor states, each with weight
//! `1/sqrt(binomial(d, n))`, so every photon partition is maximally entangled.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::combinatorics::{
    binomial, colex_subsets, complement, factorial, permutation_sign, signed_permutations,
};
use crate::error::{Error, Result};
use crate::fock::{Occupation, PureState, Register};

/// Largest `d` accepted by [`antisymmetric_state`]; the state has `d!` terms.
pub const MAX_ANTISYM_D: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaMatrix {
    register: Register,
    paths: Vec<usize>,
    oams: Vec<usize>,
}

impl LambdaMatrix {
    pub fn new(register: Register, paths: Vec<usize>, oams: Vec<usize>) -> Result<Self> {
        if paths.len() != oams.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} paths but {} OAM labels",
                paths.len(),
                oams.len()
            )));
        }
        if paths.len() < 2 {
            return Err(Error::UnsupportedDimension {
                d: paths.len(),
                reason: "need at least two rows".to_string(),
            });
        }
        if has_duplicates(&paths) {
            return Err(Error::Duplicate("Λ paths"));
        }
        if has_duplicates(&oams) {
            return Err(Error::Duplicate("Λ OAM labels"));
        }
        for &p in &paths {
            register.check_path(p)?;
        }
        if let Some(&l) = oams.iter().find(|&&l| l >= register.oams) {
            return Err(Error::OamOutOfRange {
                oam: l,
                oams: register.oams,
            });
        }
        Ok(LambdaMatrix {
            register,
            paths,
            oams,
        })
    }

    /// `d` paths `0..d`, labels `0..d`, on a `(d, d)` register.
    pub fn standard(d: usize) -> Result<Self> {
        Self::new(Register::new(d, d), (0..d).collect(), (0..d).collect())
    }

    /// Rows on the given paths, labels `0..d` of the register's alphabet.
    pub fn on_paths(register: Register, paths: Vec<usize>) -> Result<Self> {
        let d = paths.len();
        Self::new(register, paths, (0..d).collect())
    }

    pub fn d(&self) -> usize {
        self.paths.len()
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn paths(&self) -> &[usize] {
        &self.paths
    }

    pub fn oams(&self) -> &[usize] {
        &self.oams
    }

    pub fn swap_rows(&self, i: usize, j: usize) -> LambdaMatrix {
        let mut out = self.clone();
        out.paths.swap(i, j);
        out
    }
}

fn has_duplicates(v: &[usize]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.windows(2).any(|w| w[0] == w[1])
}

/// `det(Λ[rows, cols]) |0> / sqrt(k!)` with `k = rows.len() = cols.len()`.
///
/// Rows are paths and columns OAM labels, both distinct, so every monomial
/// puts at most one photon in each mode and amplitudes are `±1/sqrt(k!)`.
pub fn determinant_state(register: Register, rows: &[usize], cols: &[usize]) -> Result<PureState> {
    if rows.len() != cols.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} rows vs {} columns",
            rows.len(),
            cols.len()
        )));
    }
    if has_duplicates(rows) || has_duplicates(cols) {
        return Err(Error::Duplicate("minor indices"));
    }
    let k = rows.len();
    let amp = 1.0 / factorial(k).sqrt();
    let mut terms = BTreeMap::new();
    for (perm, sign) in signed_permutations(k) {
        let mut occ = Occupation::vacuum(register);
        for (r, &c) in perm.iter().enumerate() {
            register.check_path(rows[r])?;
            if cols[c] >= register.oams {
                return Err(Error::OamOutOfRange {
                    oam: cols[c],
                    oams: register.oams,
                });
            }
            occ.counts_mut()[rows[r] * register.oams + cols[c]] += 1;
        }
        terms.insert(occ, Complex64::new(sign as f64 * amp, 0.0));
    }
    Ok(PureState::from_map(register, terms))
}

/// `det(Λ)|0> / sqrt(d!)`.
pub fn antisymmetric_state(lambda: &LambdaMatrix) -> Result<PureState> {
    if lambda.d() > MAX_ANTISYM_D {
        return Err(Error::UnsupportedDimension {
            d: lambda.d(),
            reason: format!("antisymmetric states are limited to d <= {MAX_ANTISYM_D}"),
        });
    }
    determinant_state(lambda.register, &lambda.paths, &lambda.oams)
}

/// Dimension of the antisymmetric subspace of `n` systems with `d` levels.
pub fn antisym_dimension(d: usize, n: usize) -> Result<u64> {
    if n > d {
        return Err(Error::Invalid(format!("n = {n} exceeds d = {d}")));
    }
    binomial(d as u64, n as u64)
        .ok_or_else(|| Error::Invalid(format!("binomial({d}, {n}) overflows")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    n: usize,
    side_a_paths: Vec<usize>,
    side_b_paths: Vec<usize>,
}

impl PartitionSpec {
    pub fn new(
        lambda: &LambdaMatrix,
        side_a_paths: Vec<usize>,
        side_b_paths: Vec<usize>,
    ) -> Result<Self> {
        let n = side_a_paths.len();
        if n == 0 || n >= lambda.d() {
            return Err(Error::InvalidPartition(format!(
                "side A needs between 1 and {} photons, got {n}",
                lambda.d() - 1
            )));
        }
        let mut union: Vec<usize> = side_a_paths.iter().chain(&side_b_paths).copied().collect();
        if has_duplicates(&union) {
            return Err(Error::InvalidPartition("sides overlap".to_string()));
        }
        union.sort_unstable();
        let mut all = lambda.paths.clone();
        all.sort_unstable();
        if union != all {
            return Err(Error::InvalidPartition(
                "sides must cover exactly the Λ paths".to_string(),
            ));
        }
        Ok(PartitionSpec {
            n,
            side_a_paths,
            side_b_paths,
        })
    }

    /// First `n` rows of Λ on side A, the rest on side B.
    pub fn leading(lambda: &LambdaMatrix, n: usize) -> Result<Self> {
        if n > lambda.d() {
            return Err(Error::InvalidPartition(format!(
                "n = {n} exceeds d = {}",
                lambda.d()
            )));
        }
        Self::new(
            lambda,
            lambda.paths[..n].to_vec(),
            lambda.paths[n..].to_vec(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side_a_paths(&self) -> &[usize] {
        &self.side_a_paths
    }

    pub fn side_b_paths(&self) -> &[usize] {
        &self.side_b_paths
    }
}

/// Bipartite expansion `Σ_i sign_i · coeff_i · |A_i>|B_i>`.
///
/// Side states carry the raw minor-determinant sign; the Laplace sign lives in
/// `signs`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub side_a_states: Vec<PureState>,
    pub side_b_states: Vec<PureState>,
    pub signs: Vec<i8>,
    /// OAM labels carried by side A in each term.
    pub side_a_labels: Vec<Vec<usize>>,
}

impl SchmidtDecomposition {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Rebuilds the full state from the expansion.
    pub fn reconstruct(&self) -> Result<PureState> {
        let register = self
            .side_a_states
            .first()
            .map(PureState::register)
            .ok_or(Error::ZeroState)?;
        let mut acc = PureState::zero(register);
        for i in 0..self.len() {
            let term = self.side_a_states[i]
                .disjoint_product(&self.side_b_states[i])?
                .scaled(Complex64::new(
                    self.signs[i] as f64 * self.coefficients[i],
                    0.0,
                ));
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

/// Laplace expansion of `det(Λ)` along the side-A rows.
///
/// Terms are ordered by side A's label subset in colexicographic order.
pub fn laplace_partition(
    lambda: &LambdaMatrix,
    part: &PartitionSpec,
) -> Result<SchmidtDecomposition> {
    let part = PartitionSpec::new(lambda, part.side_a_paths.clone(), part.side_b_paths.clone())?;
    let d = lambda.d();
    let n = part.n;
    let position = |p: usize| {
        lambda
            .paths
            .iter()
            .position(|&q| q == p)
            .expect("validated")
    };
    let row_order: Vec<usize> = part
        .side_a_paths
        .iter()
        .chain(&part.side_b_paths)
        .map(|&p| position(p))
        .collect();
    let row_sign = permutation_sign(&row_order) as i32;
    let base = if (n * n.saturating_sub(1) / 2) % 2 == 0 {
        1
    } else {
        -1
    };

    let subsets = colex_subsets(d, n);
    let coeff = 1.0 / (subsets.len() as f64).sqrt();
    let mut out = SchmidtDecomposition {
        coefficients: Vec::with_capacity(subsets.len()),
        side_a_states: Vec::with_capacity(subsets.len()),
        side_b_states: Vec::with_capacity(subsets.len()),
        signs: Vec::with_capacity(subsets.len()),
        side_a_labels: Vec::with_capacity(subsets.len()),
    };
    for subset in subsets {
        let rest = complement(d, &subset);
        let col_parity: usize = subset.iter().sum();
        let col_sign = if col_parity.is_multiple_of(2) { 1 } else { -1 };
        let a_cols: Vec<usize> = subset.iter().map(|&c| lambda.oams[c]).collect();
        let b_cols: Vec<usize> = rest.iter().map(|&c| lambda.oams[c]).collect();
        out.side_a_states.push(determinant_state(
            lambda.register,
            &part.side_a_paths,
            &a_cols,
        )?);
        out.side_b_states.push(determinant_state(
            lambda.register,
            &part.side_b_paths,
            &b_cols,
        )?);
        out.signs.push((row_sign * base * col_sign) as i8);
        out.coefficients.push(coeff);
        out.side_a_labels.push(a_cols);
    }
    Ok(out)
}

/// Singular values of the coefficient matrix between the occupations of
/// `side_a_paths` and of the remaining paths, descending.
pub fn schmidt_spectrum(state: &PureState, side_a_paths: &[usize]) -> Result<Vec<f64>> {
    let reg = state.register();
    let mut side_a = side_a_paths.to_vec();
    side_a.sort_unstable();
    side_a.dedup();
    if side_a.len() != side_a_paths.len() {
        return Err(Error::Duplicate("side A paths"));
    }
    for &p in &side_a {
        reg.check_path(p)?;
    }
    if side_a.is_empty() || side_a.len() == reg.paths {
        return Err(Error::InvalidPathSet("trivial bipartition".to_string()));
    }
    let side_b: Vec<usize> = (0..reg.paths).filter(|p| !side_a.contains(p)).collect();

    let mut rows: BTreeMap<Occupation, usize> = BTreeMap::new();
    let mut cols: BTreeMap<Occupation, usize> = BTreeMap::new();
    let mut entries = Vec::with_capacity(state.len());
    for (occ, a) in state.terms() {
        let (ka, kb) = (occ.restrict(reg, &side_a), occ.restrict(reg, &side_b));
        let next_r = rows.len();
        let r = *rows.entry(ka).or_insert(next_r);
        let next_c = cols.len();
        let c = *cols.entry(kb).or_insert(next_c);
        entries.push((r, c, *a));
    }
    if entries.is_empty() {
        return Ok(Vec::new());
    }
    let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
    for (r, c, a) in entries {
        m[(r, c)] = a;
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}
