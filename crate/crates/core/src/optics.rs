//! Passive linear optics on path modes.
//!
//! A [`ModeUnitary`] acts on an ordered list of global paths and leaves OAM
//! labels untouched. Creation operators transform row-wise, matching
//! `Λ -> UΛ` for a matrix Λ whose rows are indexed by path:
//!
//! ```text
//! a†(j, l)  ->  Σ_k U[j][k] a†(k, l)
//! ```
//!
//! so row `j` of `U` is the output spread of a photon entering local path `j`.
//! OAM sign flips on reflection are not modelled; labels are invariant.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::{Occupation, PureState, Register};

pub const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeUnitary {
    matrix: DMatrix<Complex64>,
    acted_paths: Vec<usize>,
}

impl ModeUnitary {
    pub fn new(matrix: DMatrix<Complex64>, acted_paths: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        if matrix.nrows() != acted_paths.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix on {} paths",
                matrix.nrows(),
                matrix.ncols(),
                acted_paths.len()
            )));
        }
        let mut sorted = acted_paths.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != acted_paths.len() {
            return Err(Error::Duplicate("acted paths"));
        }
        let deviation = unitarity_error(&matrix);
        if deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(ModeUnitary {
            matrix,
            acted_paths,
        })
    }

    /// Acting on paths `0..matrix.nrows()`.
    pub fn on_leading_paths(matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, (0..n).collect())
    }

    pub fn identity(acted_paths: Vec<usize>) -> Result<Self> {
        let n = acted_paths.len();
        Self::new(DMatrix::identity(n, n), acted_paths)
    }

    pub fn dim(&self) -> usize {
        self.acted_paths.len()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn acted_paths(&self) -> &[usize] {
        &self.acted_paths
    }

    /// Same matrix, acting on a different ordered path list.
    pub fn relabel(&self, acted_paths: Vec<usize>) -> Result<Self> {
        Self::new(self.matrix.clone(), acted_paths)
    }

    /// Embeds into paths `0..total_paths`, identity on paths not acted on.
    pub fn embed(&self, total_paths: usize) -> Result<Self> {
        if let Some(&p) = self.acted_paths.iter().find(|&&p| p >= total_paths) {
            return Err(Error::PathOutOfRange {
                path: p,
                paths: total_paths,
            });
        }
        let mut m = DMatrix::identity(total_paths, total_paths);
        for (a, &pa) in self.acted_paths.iter().enumerate() {
            for (b, &pb) in self.acted_paths.iter().enumerate() {
                m[(pa, pb)] = self.matrix[(a, b)];
            }
        }
        Self::new(m, (0..total_paths).collect())
    }

    pub fn adjoint(&self) -> ModeUnitary {
        ModeUnitary {
            matrix: self.matrix.adjoint(),
            acted_paths: self.acted_paths.clone(),
        }
    }

    /// Matrix product `self · next`. Under the row convention this is the
    /// optical element `self` followed by `next`.
    pub fn compose(&self, next: &ModeUnitary) -> Result<ModeUnitary> {
        if self.acted_paths != next.acted_paths {
            return Err(Error::DimensionMismatch(format!(
                "acted paths {:?} vs {:?}",
                self.acted_paths, next.acted_paths
            )));
        }
        Self::new(&self.matrix * &next.matrix, self.acted_paths.clone())
    }

    pub fn unitarity_error(&self) -> f64 {
        unitarity_error(&self.matrix)
    }
}

/// Max-abs entry of `U†U - I`.
pub fn unitarity_error(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    (prod - DMatrix::<Complex64>::identity(n, n))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterSpec {
    pub path_a: usize,
    pub path_b: usize,
    pub transmissivity: f64,
}

impl BeamSplitterSpec {
    pub fn new(path_a: usize, path_b: usize, transmissivity: f64) -> Result<Self> {
        if path_a == path_b {
            return Err(Error::Duplicate("beam splitter ports"));
        }
        if !(transmissivity > 0.0 && transmissivity < 1.0) {
            return Err(Error::Transmissivity(transmissivity));
        }
        Ok(BeamSplitterSpec {
            path_a,
            path_b,
            transmissivity,
        })
    }
}

/// Real orthogonal splitter `[[√t, -√(1-t)], [√(1-t), √t]]` on
/// `(path_a, path_b)`, identity on the other paths of `0..total_paths`.
pub fn beam_splitter(spec: BeamSplitterSpec, total_paths: usize) -> Result<ModeUnitary> {
    let spec = BeamSplitterSpec::new(spec.path_a, spec.path_b, spec.transmissivity)?;
    let t = spec.transmissivity.sqrt();
    let r = (1.0 - spec.transmissivity).sqrt();
    let block = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(t, 0.0),
            Complex64::new(-r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(t, 0.0),
        ],
    );
    ModeUnitary::new(block, vec![spec.path_a, spec.path_b])?.embed(total_paths)
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    let z = DMatrix::<Complex64>::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn sqrt_factorial(n: u8) -> f64 {
    match n {
        0 | 1 => 1.0,
        _ => crate::combinatorics::factorial(n as usize).sqrt(),
    }
}

/// Evolves `state` through `u` by expanding each term's creation-operator
/// monomial over the acted paths.
pub fn apply_unitary(u: &ModeUnitary, state: &PureState) -> Result<PureState> {
    let reg = state.register();
    for &p in &u.acted_paths {
        reg.check_path(p)?;
    }
    let d = reg.oams;
    let dim = u.dim();
    // nonzero entries of each row
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dim)
        .map(|j| {
            (0..dim)
                .filter_map(|k| {
                    let z = u.matrix[(j, k)];
                    (z.norm_sqr() != 0.0).then_some((k, z))
                })
                .collect()
        })
        .collect();
    let acted_modes: Vec<usize> = u
        .acted_paths
        .iter()
        .flat_map(|&p| (0..d).map(move |l| p * d + l))
        .collect();

    let mut out: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    let mut photons: Vec<(usize, usize)> = Vec::new();
    for (occ, amp) in state.terms() {
        photons.clear();
        let mut scratch = occ.clone();
        let mut norm_in = 1.0;
        for (j, &p) in u.acted_paths.iter().enumerate() {
            for l in 0..d {
                let n = occ.counts()[p * d + l];
                norm_in *= sqrt_factorial(n);
                for _ in 0..n {
                    photons.push((j, l));
                }
                scratch.counts_mut()[p * d + l] = 0;
            }
        }
        let mut ctx = Expansion {
            rows: &rows,
            photons: &photons,
            acted_paths: &u.acted_paths,
            acted_modes: &acted_modes,
            oams: d,
            out: &mut out,
        };
        ctx.expand(0, *amp / norm_in, &mut scratch);
    }
    Ok(PureState::from_map(reg, out))
}

struct Expansion<'a> {
    rows: &'a [Vec<(usize, Complex64)>],
    photons: &'a [(usize, usize)],
    acted_paths: &'a [usize],
    acted_modes: &'a [usize],
    oams: usize,
    out: &'a mut BTreeMap<Occupation, Complex64>,
}

impl Expansion<'_> {
    fn expand(&mut self, idx: usize, coeff: Complex64, scratch: &mut Occupation) {
        if idx == self.photons.len() {
            let norm_out: f64 = self
                .acted_modes
                .iter()
                .map(|&m| sqrt_factorial(scratch.counts()[m]))
                .product();
            let value = coeff * norm_out;
            if let Some(slot) = self.out.get_mut(scratch.counts()) {
                *slot += value;
            } else {
                self.out.insert(scratch.clone(), value);
            }
            return;
        }
        let (j, l) = self.photons[idx];
        for &(k, z) in &self.rows[j] {
            let mode = self.acted_paths[k] * self.oams + l;
            scratch.counts_mut()[mode] += 1;
            self.expand(idx + 1, coeff * z, scratch);
            scratch.counts_mut()[mode] -= 1;
        }
    }
}

/// `<output| U |input>` from permanents, one per OAM label.
///
/// Returns zero when photon numbers (total or per label) differ, or when the
/// occupations differ on paths `u` does not touch.
pub fn transition_amplitude(
    u: &ModeUnitary,
    register: Register,
    input: &Occupation,
    output: &Occupation,
) -> Complex64 {
    let zero = Complex64::new(0.0, 0.0);
    let d = register.oams;
    if input.len() != register.modes() || output.len() != register.modes() {
        return zero;
    }
    if u.acted_paths.iter().any(|&p| p >= register.paths) {
        return zero;
    }
    for p in (0..register.paths).filter(|p| !u.acted_paths.contains(p)) {
        if input.counts()[p * d..(p + 1) * d] != output.counts()[p * d..(p + 1) * d] {
            return zero;
        }
    }
    let mut amp = Complex64::new(1.0, 0.0);
    for l in 0..d {
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        let mut norm = 1.0;
        for (j, &p) in u.acted_paths.iter().enumerate() {
            let s = input.counts()[p * d + l];
            let t = output.counts()[p * d + l];
            norm *= crate::combinatorics::factorial(s as usize)
                * crate::combinatorics::factorial(t as usize);
            rows.extend(std::iter::repeat_n(j, s as usize));
            cols.extend(std::iter::repeat_n(j, t as usize));
        }
        if rows.len() != cols.len() {
            return zero;
        }
        if rows.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(rows.len(), cols.len(), |a, b| u.matrix[(rows[a], cols[b])]);
        amp *= permanent(&sub).expect("square by construction") / norm.sqrt();
    }
    amp
}

/// Permanent by Ryser's formula with Gray-code updates, `O(2^n n)`.
pub fn permanent(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n > 30 {
        return Err(Error::Invalid(format!(
            "permanent of a {n}x{n} matrix is out of reach"
        )));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let next = step ^ (step >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += m[(i, col)];
            } else {
                *s -= m[(i, col)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

/// Permanent by direct summation over all `n!` permutations.
pub fn permanent_naive(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n > 10 {
        return Err(Error::Invalid(format!(
            "naive permanent limited to n <= 10, got {n}"
        )));
    }
    Ok(crate::combinatorics::signed_permutations(n)
        .into_iter()
        .map(|(p, _)| {
            p.iter()
                .enumerate()
                .map(|(i, &j)| m[(i, j)])
                .product::<Complex64>()
        })
        .sum())
}
