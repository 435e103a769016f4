//! The recursive d-port Bell filter.
//!
//! `U_d = S_d · diag(1, U_{d-1})`, `U_2 = S_2`, where `S_d` is a
//! `(d-1)/d : 1/d` splitter between the first and last port. A photon entering
//! the last port spreads evenly over all outputs, and the cofactor quantity
//! `η_k = U[d-1][k] · Co(U)[d-1][k]` equals `1/d` for every `k`. Constant η is
//! what makes a coincidence in all `d` detectors project onto the totally
//! antisymmetric state.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::antisym::{determinant_state, LambdaMatrix};
use crate::error::{Error, Result};
use crate::fock::{Occupation, PureState};
use crate::optics::{beam_splitter, BeamSplitterSpec, ModeUnitary};

pub const MAX_FILTER_D: usize = 7;

/// Tolerance on the spread of η values for `check_sufficiency`.
pub const ETA_CONSTANCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct BellFilterSpec {
    pub d: usize,
    /// Acts on paths `0..d`; relabel to place it elsewhere.
    pub unitary: ModeUnitary,
    /// `(d-1)/d, (d-2)/(d-1), ..., 1/2` in build order.
    pub transmissivities: Vec<f64>,
}

pub fn bell_filter_unitary(d: usize) -> Result<BellFilterSpec> {
    if !(2..=MAX_FILTER_D).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            reason: format!("Bell filter needs 2 <= d <= {MAX_FILTER_D}"),
        });
    }
    let mut u = splitter_stage(2)?;
    for k in 3..=d {
        let mut inner = DMatrix::<Complex64>::identity(k, k);
        inner.view_mut((1, 1), (k - 1, k - 1)).copy_from(u.matrix());
        let inner = ModeUnitary::on_leading_paths(inner)?;
        u = splitter_stage(k)?.compose(&inner)?;
    }
    let transmissivities = (2..=d).rev().map(|k| (k - 1) as f64 / k as f64).collect();
    Ok(BellFilterSpec {
        d,
        unitary: u,
        transmissivities,
    })
}

/// `S_k`: splitter of transmissivity `(k-1)/k` between ports 0 and k-1.
fn splitter_stage(k: usize) -> Result<ModeUnitary> {
    beam_splitter(
        BeamSplitterSpec::new(0, k - 1, (k - 1) as f64 / k as f64)?,
        k,
    )
}

/// `(-1)^(i+j)` times the determinant of `m` without row `i` and column `j`.
pub fn cofactor(m: &DMatrix<Complex64>, i: usize, j: usize) -> Result<Complex64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    if n < 2 {
        return Err(Error::DimensionMismatch(
            "cofactor needs a matrix of size >= 2".to_string(),
        ));
    }
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange {
            row: i,
            col: j,
            size: n,
        });
    }
    let minor = m.clone().remove_row(i).remove_column(j);
    let sign = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(minor.determinant() * sign)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtaCheck {
    /// All last-row η values agree within [`ETA_CONSTANCY_TOL`].
    pub constant: bool,
    pub eta: Vec<Complex64>,
}

impl EtaCheck {
    pub fn spread(&self) -> f64 {
        let first = self.eta.first().copied().unwrap_or_default();
        self.eta
            .iter()
            .map(|e| (e - first).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of any η from `target`.
    pub fn max_deviation(&self, target: f64) -> f64 {
        self.eta
            .iter()
            .map(|e| (e - Complex64::new(target, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// η values along the last row of `u` and whether they are constant.
pub fn check_sufficiency(u: &ModeUnitary) -> Result<EtaCheck> {
    let m = u.matrix();
    let n = m.nrows();
    let last = n - 1;
    let eta = (0..n)
        .map(|k| Ok(m[(last, k)] * cofactor(m, last, k)?))
        .collect::<Result<Vec<_>>>()?;
    let mut check = EtaCheck {
        constant: false,
        eta,
    };
    check.constant = check.spread() <= ETA_CONSTANCY_TOL;
    Ok(check)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GeneralizedBellIndex {
    pub m1: usize,
    pub m2: usize,
}

impl GeneralizedBellIndex {
    pub fn new(d: usize, m1: usize, m2: usize) -> Result<Self> {
        if m1 >= d || m2 >= d {
            return Err(Error::BellIndex { m1, m2, d });
        }
        Ok(GeneralizedBellIndex { m1, m2 })
    }

    pub fn all(d: usize) -> impl Iterator<Item = GeneralizedBellIndex> {
        (0..d).flat_map(move |m1| (0..d).map(move |m2| GeneralizedBellIndex { m1, m2 }))
    }
}

/// `Σ_j ω^(j m1) Co(Λ)[d-1][j] a†(last, (j + m2) mod d) |0> / sqrt(d!)`.
///
/// The first `d-1` rows of `lambda` carry the minor (side A) and the last row
/// the single photon. Index `(0, 0)` is the antisymmetric state itself.
pub fn generalized_bell_state(
    lambda: &LambdaMatrix,
    idx: GeneralizedBellIndex,
) -> Result<PureState> {
    let d = lambda.d();
    let idx = GeneralizedBellIndex::new(d, idx.m1, idx.m2)?;
    let reg = lambda.register();
    let side_a = &lambda.paths()[..d - 1];
    let last = lambda.paths()[d - 1];
    let mut acc = PureState::zero(reg);
    for j in 0..d {
        let cols: Vec<usize> = (0..d)
            .filter(|&c| c != j)
            .map(|c| lambda.oams()[c])
            .collect();
        let minor = determinant_state(reg, side_a, &cols)?;
        let single_label = lambda.oams()[(j + idx.m2) % d];
        let single = PureState::basis(reg, &[crate::fock::ModeId::new(last, single_label)])?;
        let phase = Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * (j * idx.m1) as f64 / d as f64,
        );
        let sign = if (d - 1 + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        // minor state is det/sqrt((d-1)!), so the overall weight is 1/sqrt(d)
        let weight = phase * sign / (d as f64).sqrt();
        acc = acc.add(&minor.disjoint_product(&single)?.scaled(weight))?;
    }
    Ok(acc)
}

/// Keeps the terms with exactly one photon (any OAM) in every watched path.
/// Returns the unnormalized kept state and its weight relative to the input.
pub fn coincidence_project(state: &PureState, watch_paths: &[usize]) -> Result<(PureState, f64)> {
    let reg = state.register();
    for &p in watch_paths {
        reg.check_path(p)?;
    }
    let kept: std::collections::BTreeMap<Occupation, Complex64> = state
        .terms()
        .filter(|(occ, _)| watch_paths.iter().all(|&p| occ.path_count(reg, p) == 1))
        .map(|(k, a)| (k.clone(), *a))
        .collect();
    let kept = PureState::from_map(reg, kept);
    let probability = if state.norm_sq() > 0.0 {
        kept.norm_sq() / state.norm_sq()
    } else {
        0.0
    };
    Ok((kept, probability))
}
