//! Recursive preparation of antisymmetric states.
//!
//! Stage `n` takes the `(n-1)`-photon antisymmetric state on paths `0..n-1`,
//! adds a photon with label `n-1` on path `n-1`, sends paths `0..n` through
//! the `n`-port Bell filter and keeps one photon per output path. The filter
//! multiplies the antisymmetric component by `det(U)` and removes every other
//! generalized Bell component, so each stage succeeds with probability `1/n`.

use serde::Serialize;

use crate::antisym::{antisymmetric_state, determinant_state, LambdaMatrix};
use crate::error::{Error, Result};
use crate::filter::{bell_filter_unitary, coincidence_project};
use crate::fock::{inner_product, ModeId, PureState, Register};
use crate::optics::apply_unitary;

pub const MAX_PREP_D: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrepReport {
    pub d: usize,
    /// One entry per stage `n = 2..=d`.
    pub stage_probabilities: Vec<f64>,
    pub total_probability: f64,
    pub output_fidelity: f64,
}

#[derive(Debug, Clone)]
pub struct PrepRun {
    pub report: PrepReport,
    /// Unnormalized; its squared norm is the total probability.
    pub state: PureState,
}

pub fn prepare_antisymmetric(d: usize) -> Result<PrepReport> {
    run_prepare_antisymmetric(d).map(|r| r.report)
}

pub fn run_prepare_antisymmetric(d: usize) -> Result<PrepRun> {
    if !(2..=MAX_PREP_D).contains(&d) {
        return Err(Error::UnsupportedDimension {
            d,
            reason: format!("preparation supports 2 <= d <= {MAX_PREP_D}"),
        });
    }
    let reg = Register::new(d, d);
    let mut state = PureState::basis(reg, &[ModeId::new(0, 0)])?;
    let mut stage_probabilities = Vec::with_capacity(d - 1);
    for n in 2..=d {
        let fresh = PureState::basis(reg, &[ModeId::new(n - 1, n - 1)])?;
        let (next, p) = filter_stage(&state.disjoint_product(&fresh)?, n)?;
        stage_probabilities.push(p);
        state = next;
    }
    let output_fidelity = antisymmetric_fidelity(&state, d)?;
    Ok(PrepRun {
        report: PrepReport {
            d,
            total_probability: state.norm_sq(),
            stage_probabilities,
            output_fidelity,
        },
        state,
    })
}

/// Filter on paths `0..n` followed by the one-photon-per-path projector.
fn filter_stage(input: &PureState, n: usize) -> Result<(PureState, f64)> {
    let paths: Vec<usize> = (0..n).collect();
    let u = bell_filter_unitary(n)?.unitary.relabel(paths.clone())?;
    let out = apply_unitary(&u, input)?;
    coincidence_project(&out, &paths)
}

/// `|<Ψ_d|s>|^2 / <s|s>` against the antisymmetric state on paths and labels `0..d`.
fn antisymmetric_fidelity(state: &PureState, d: usize) -> Result<f64> {
    if state.norm_sq() == 0.0 {
        return Ok(0.0);
    }
    let reg = state.register();
    let rows: Vec<usize> = (0..d).collect();
    let target = determinant_state(reg, &rows, &rows)?;
    Ok(inner_product(&target, state)?.norm_sqr() / state.norm_sq())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSymmetry {
    Antisymmetric,
    Symmetric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QutritPrepOutcome {
    pub input: PairSymmetry,
    pub report: PrepReport,
    /// Weight of kept terms with two or more photons in one output path.
    pub multi_photon_weight: f64,
}

/// Final qutrit stage without heralding: a two-photon state with labels 0, 1
/// on paths 0, 1 plus a photon with label 2 on path 2, three-fold coincidence.
pub fn qutrit_prep(input: PairSymmetry) -> Result<QutritPrepOutcome> {
    let reg = Register::new(3, 3);
    let ab = PureState::basis(reg, &[ModeId::new(0, 0), ModeId::new(1, 1)])?;
    let ba = PureState::basis(reg, &[ModeId::new(0, 1), ModeId::new(1, 0)])?;
    let sign = match input {
        PairSymmetry::Antisymmetric => -1.0,
        PairSymmetry::Symmetric => 1.0,
    };
    let pair = ab.add(&ba.scaled(sign.into()))?.normalized()?;
    let fresh = PureState::basis(reg, &[ModeId::new(2, 2)])?;
    let (kept, p) = filter_stage(&pair.disjoint_product(&fresh)?, 3)?;
    let multi_photon_weight = kept
        .terms()
        .filter(|(occ, _)| (0..3).any(|path| occ.path_count(reg, path) > 1))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    Ok(QutritPrepOutcome {
        input,
        report: PrepReport {
            d: 3,
            stage_probabilities: vec![p],
            total_probability: kept.norm_sq(),
            output_fidelity: antisymmetric_fidelity(&kept, 3)?,
        },
        multi_photon_weight,
    })
}

pub fn qutrit_prep_demo() -> Result<PrepReport> {
    qutrit_prep(PairSymmetry::Antisymmetric).map(|o| o.report)
}

/// Antisymmetric state on a `(d, d)` register, for comparison with prepared output.
pub fn reference_state(d: usize) -> Result<PureState> {
    antisymmetric_state(&LambdaMatrix::standard(d)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::Occupation;
    use num_complex::Complex64;

    fn swap_paths(state: &PureState, i: usize, j: usize) -> PureState {
        let reg = state.register();
        let mut out = PureState::zero(reg);
        for (occ, a) in state.terms() {
            let mut counts = occ.counts().to_vec();
            for l in 0..reg.oams {
                counts.swap(i * reg.oams + l, j * reg.oams + l);
            }
            let mut map = std::collections::BTreeMap::new();
            map.insert(Occupation::from_counts(counts), *a);
            out = out.add(&PureState::from_map(reg, map)).unwrap();
        }
        out
    }

    #[test]
    fn stage_probabilities() {
        let r = prepare_antisymmetric(3).unwrap();
        assert_eq!(r.stage_probabilities.len(), 2);
        assert!((r.stage_probabilities[0] - 0.5).abs() < 1e-12);
        assert!((r.stage_probabilities[1] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.total_probability - 1.0 / 6.0).abs() < 1e-12);
        assert!(r.output_fidelity > 1.0 - 1e-10);
    }

    #[test]
    fn two_photon_singlet() {
        let run = run_prepare_antisymmetric(2).unwrap();
        assert!((run.report.total_probability - 0.5).abs() < 1e-12);
        assert!((run.report.output_fidelity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_reference_up_to_phase() {
        for d in 2..=4 {
            let run = run_prepare_antisymmetric(d).unwrap();
            let product: f64 = run.report.stage_probabilities.iter().product();
            assert!((product - run.report.total_probability).abs() < 1e-12);
            let out = run.state.normalized().unwrap();
            let reference = reference_state(d).unwrap();
            let phase = inner_product(&reference, &out).unwrap();
            assert!((phase.norm() - 1.0).abs() < 1e-10);
            assert!(out.max_abs_diff(&reference.scaled(phase)) < 1e-10);
        }
    }

    #[test]
    fn transpositions_flip_sign() {
        for d in 2..=4 {
            let s = run_prepare_antisymmetric(d).unwrap().state;
            for i in 0..d {
                for j in i + 1..d {
                    let swapped = swap_paths(&s, i, j);
                    assert!(swapped.max_abs_diff(&s.scaled(Complex64::new(-1.0, 0.0))) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn heralding_is_idempotent() {
        let s = run_prepare_antisymmetric(3).unwrap().state;
        let paths = [0, 1, 2];
        let (once, _) = coincidence_project(&s, &paths).unwrap();
        let (twice, p) = coincidence_project(&once, &paths).unwrap();
        assert_eq!(once, twice);
        assert!((p - 1.0).abs() < 1e-15);
    }

    #[test]
    fn qutrit_demo() {
        let r = qutrit_prep_demo().unwrap();
        assert!((r.total_probability - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.output_fidelity - 1.0).abs() < 1e-10);
        let o = qutrit_prep(PairSymmetry::Antisymmetric).unwrap();
        assert_eq!(o.multi_photon_weight, 0.0);
    }

    #[test]
    fn symmetric_pair_gives_no_antisymmetric_output() {
        let o = qutrit_prep(PairSymmetry::Symmetric).unwrap();
        assert!(o.report.output_fidelity < 1e-12);
        assert_eq!(o.multi_photon_weight, 0.0);
    }

    #[test]
    fn range_checked() {
        assert!(prepare_antisymmetric(1).is_err());
        assert!(prepare_antisymmetric(6).is_err());
    }
}
