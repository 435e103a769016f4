//! Multimode bosonic Fock states.
//!
//! A [`Register`] declares `P` propagation paths and an alphabet of `d` OAM
//! labels, giving `M = P * d` modes laid out path-major, OAM-minor. States are
//! sparse maps from [`Occupation`] to amplitude kept in canonical (lexicographic)
//! order, so every reduction below runs in the same order on every call.
//!
//! Basis kets are unit-normalized: the amplitude stored for an occupation is
//! the coefficient of that normalized ket, not of the bare creation-operator
//! monomial.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Amplitudes at or below this modulus are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Register {
    pub paths: usize,
    pub oams: usize,
}

impl Register {
    pub fn new(paths: usize, oams: usize) -> Self {
        Register { paths, oams }
    }

    pub fn modes(&self) -> usize {
        self.paths * self.oams
    }

    pub fn mode_index(&self, mode: ModeId) -> usize {
        mode.path * self.oams + mode.oam
    }

    pub fn mode(&self, index: usize) -> ModeId {
        ModeId {
            path: index / self.oams,
            oam: index % self.oams,
        }
    }

    pub fn check_mode(&self, mode: ModeId) -> Result<()> {
        if mode.path >= self.paths {
            return Err(Error::PathOutOfRange {
                path: mode.path,
                paths: self.paths,
            });
        }
        if mode.oam >= self.oams {
            return Err(Error::OamOutOfRange {
                oam: mode.oam,
                oams: self.oams,
            });
        }
        Ok(())
    }

    pub fn check_path(&self, path: usize) -> Result<()> {
        if path >= self.paths {
            return Err(Error::PathOutOfRange {
                path,
                paths: self.paths,
            });
        }
        Ok(())
    }
}

/// A (path, OAM label) pair. The OAM index points into the register's
/// alphabet; physical OAM values are labels only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId {
    pub path: usize,
    pub oam: usize,
}

impl ModeId {
    pub fn new(path: usize, oam: usize) -> Self {
        ModeId { path, oam }
    }
}

/// Photon counts per mode in canonical mode order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(Vec<u8>);

impl Occupation {
    pub fn vacuum(register: Register) -> Self {
        Occupation(vec![0; register.modes()])
    }

    pub fn from_counts(counts: Vec<u8>) -> Self {
        Occupation(counts)
    }

    /// Builds an occupation with one photon in each listed mode (repeats add up).
    pub fn from_modes(register: Register, modes: &[ModeId]) -> Result<Self> {
        let mut occ = Self::vacuum(register);
        for &m in modes {
            register.check_mode(m)?;
            occ.0[register.mode_index(m)] += 1;
        }
        Ok(occ)
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    /// Photons in `path`, summed over OAM labels.
    pub fn path_count(&self, register: Register, path: usize) -> usize {
        let start = path * register.oams;
        self.0[start..start + register.oams]
            .iter()
            .map(|&c| c as usize)
            .sum()
    }

    /// Concatenated counts of the given paths, in the order given.
    pub fn restrict(&self, register: Register, paths: &[usize]) -> Occupation {
        let d = register.oams;
        let mut out = Vec::with_capacity(paths.len() * d);
        for &p in paths {
            out.extend_from_slice(&self.0[p * d..(p + 1) * d]);
        }
        Occupation(out)
    }

    pub(crate) fn counts_mut(&mut self) -> &mut Vec<u8> {
        &mut self.0
    }
}

impl Borrow<[u8]> for Occupation {
    fn borrow(&self) -> &[u8] {
        &self.0
    }
}

/// Sparse superposition of Fock basis states on one register.
///
/// Left unnormalized after projections; `norm_sq` is then the probability of
/// the projection event.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    register: Register,
    terms: BTreeMap<Occupation, Complex64>,
    norm_sq: f64,
    number_definite: bool,
}

impl PureState {
    pub(crate) fn from_map(register: Register, mut terms: BTreeMap<Occupation, Complex64>) -> Self {
        terms.retain(|_, a| a.norm() > PRUNE_THRESHOLD);
        let norm_sq = terms.values().map(|a| a.norm_sqr()).sum();
        let mut numbers = terms.keys().map(Occupation::total);
        let number_definite = match numbers.next() {
            Some(first) => numbers.all(|n| n == first),
            None => true,
        };
        PureState {
            register,
            terms,
            norm_sq,
            number_definite,
        }
    }

    /// The empty (zero) vector on `register`.
    pub fn zero(register: Register) -> Self {
        Self::from_map(register, BTreeMap::new())
    }

    pub fn vacuum(register: Register) -> Self {
        let mut m = BTreeMap::new();
        m.insert(Occupation::vacuum(register), Complex64::new(1.0, 0.0));
        Self::from_map(register, m)
    }

    /// One photon in each listed mode, amplitude 1.
    pub fn basis(register: Register, modes: &[ModeId]) -> Result<Self> {
        let occ = Occupation::from_modes(register, modes)?;
        make_state(register, vec![(occ, Complex64::new(1.0, 0.0))])
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Sum of |amplitude|^2 recomputed from the terms.
    pub fn recomputed_norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_number_definite(&self) -> bool {
        self.number_definite
    }

    pub fn photon_number(&self) -> Option<usize> {
        if !self.number_definite {
            return None;
        }
        self.terms.keys().next().map(Occupation::total)
    }

    pub fn amplitude(&self, occ: &Occupation) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn scaled(&self, factor: Complex64) -> PureState {
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.clone(), a * factor))
            .collect();
        Self::from_map(self.register, terms)
    }

    pub fn normalized(&self) -> Result<PureState> {
        if self.norm_sq == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / self.norm_sq.sqrt(), 0.0)))
    }

    /// `self + other` on a shared register.
    pub fn add(&self, other: &PureState) -> Result<PureState> {
        same_register(self, other)?;
        let mut terms = self.terms.clone();
        for (k, a) in &other.terms {
            *terms.entry(k.clone()).or_default() += a;
        }
        Ok(Self::from_map(self.register, terms))
    }

    /// Largest term-wise amplitude difference to `other`.
    pub fn max_abs_diff(&self, other: &PureState) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, a) in &self.terms {
            worst = worst.max((a - other.amplitude(k)).norm());
        }
        for (k, b) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }

    /// Product of two states on the same register whose occupied paths are
    /// disjoint: occupations add, amplitudes multiply.
    pub fn disjoint_product(&self, other: &PureState) -> Result<PureState> {
        same_register(self, other)?;
        let used = |s: &PureState| -> Vec<bool> {
            let mut used = vec![false; s.register.paths];
            for occ in s.terms.keys() {
                for (p, u) in used.iter_mut().enumerate() {
                    *u |= occ.path_count(s.register, p) > 0;
                }
            }
            used
        };
        let (ua, ub) = (used(self), used(other));
        if ua.iter().zip(&ub).any(|(a, b)| *a && *b) {
            return Err(Error::InvalidPathSet(
                "factors occupy a common path".to_string(),
            ));
        }
        let mut terms = BTreeMap::new();
        for (ka, a) in &self.terms {
            for (kb, b) in &other.terms {
                let counts = ka.0.iter().zip(&kb.0).map(|(x, y)| x + y).collect();
                *terms.entry(Occupation(counts)).or_default() += a * b;
            }
        }
        Ok(Self::from_map(self.register, terms))
    }

    /// Applies `|target><target| (x) 1` where `target` lives on `paths` (it
    /// must carry no photons elsewhere). The result stays unnormalized.
    pub fn project_onto(&self, target: &PureState, paths: &[usize]) -> Result<PureState> {
        same_register(self, target)?;
        let reg = self.register;
        let paths = sorted_paths(reg, paths)?;
        let rest = complement_paths(reg, &paths);
        for occ in target.terms.keys() {
            if rest.iter().any(|&p| occ.path_count(reg, p) > 0) {
                return Err(Error::InvalidPathSet(
                    "projector has photons outside its paths".to_string(),
                ));
            }
        }
        let bra: BTreeMap<Occupation, Complex64> = target
            .terms
            .iter()
            .map(|(k, a)| (k.restrict(reg, &paths), a.conj()))
            .collect();
        // <target|psi> as a vector over the remaining modes
        let mut contracted: BTreeMap<Occupation, Complex64> = BTreeMap::new();
        for (occ, a) in &self.terms {
            if let Some(b) = bra.get(&occ.restrict(reg, &paths)) {
                let mut env = occ.clone();
                for &p in &paths {
                    env.0[p * reg.oams..(p + 1) * reg.oams].fill(0);
                }
                *contracted.entry(env).or_default() += b * a;
            }
        }
        let mut terms = BTreeMap::new();
        for (ke, c) in &contracted {
            for (kt, t) in &target.terms {
                let counts = ke.0.iter().zip(&kt.0).map(|(x, y)| x + y).collect();
                *terms.entry(Occupation(counts)).or_default() += t * c;
            }
        }
        Ok(Self::from_map(reg, terms))
    }

    /// One line per term: `occupations... : re im`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (occ, a) in &self.terms {
            for c in &occ.0 {
                let _ = write!(out, "{c} ");
            }
            let _ = writeln!(out, ": {} {}", a.re, a.im);
        }
        out
    }
}

fn same_register(a: &PureState, b: &PureState) -> Result<()> {
    if a.register != b.register {
        return Err(Error::RegisterMismatch(format!(
            "{:?} vs {:?}",
            a.register, b.register
        )));
    }
    Ok(())
}

fn sorted_paths(register: Register, paths: &[usize]) -> Result<Vec<usize>> {
    let mut v = paths.to_vec();
    v.sort_unstable();
    v.dedup();
    if v.len() != paths.len() {
        return Err(Error::Duplicate("path list"));
    }
    for &p in &v {
        register.check_path(p)?;
    }
    Ok(v)
}

fn complement_paths(register: Register, paths: &[usize]) -> Vec<usize> {
    (0..register.paths).filter(|p| !paths.contains(p)).collect()
}

/// Builds a state from explicit terms. Duplicates are summed and
/// sub-threshold amplitudes pruned; the result is not normalized.
pub fn make_state(
    register: Register,
    terms: impl IntoIterator<Item = (Occupation, Complex64)>,
) -> Result<PureState> {
    let mut map: BTreeMap<Occupation, Complex64> = BTreeMap::new();
    for (occ, amp) in terms {
        if occ.len() != register.modes() {
            return Err(Error::OccupationLength {
                expected: register.modes(),
                got: occ.len(),
            });
        }
        *map.entry(occ).or_default() += amp;
    }
    let state = PureState::from_map(register, map);
    if state.is_empty() {
        return Err(Error::ZeroState);
    }
    Ok(state)
}

/// `<a|b>`, conjugate-linear in `a`.
pub fn inner_product(a: &PureState, b: &PureState) -> Result<Complex64> {
    same_register(a, b)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, x) in &a.terms {
        if let Some(y) = b.terms.get(k) {
            acc += x.conj() * y;
        }
    }
    Ok(acc)
}

/// Tensor product; `b`'s paths are appended after `a`'s.
pub fn tensor(a: &PureState, b: &PureState) -> Result<PureState> {
    if a.register.oams != b.register.oams {
        return Err(Error::RegisterMismatch(format!(
            "OAM alphabets differ ({} vs {})",
            a.register.oams, b.register.oams
        )));
    }
    let register = Register::new(a.register.paths + b.register.paths, a.register.oams);
    let mut terms = BTreeMap::new();
    for (ka, x) in &a.terms {
        for (kb, y) in &b.terms {
            let mut counts = Vec::with_capacity(register.modes());
            counts.extend_from_slice(&ka.0);
            counts.extend_from_slice(&kb.0);
            terms.insert(Occupation(counts), x * y);
        }
    }
    Ok(PureState::from_map(register, terms))
}

/// Reduced operator on a subset of paths, expressed on the occupations of
/// those paths (ascending path order).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    register: Register,
    kept_paths: Vec<usize>,
    basis: Vec<Occupation>,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Local register: one path per kept path, same OAM alphabet.
    pub fn register(&self) -> Register {
        self.register
    }

    pub fn kept_paths(&self) -> &[usize] {
        &self.kept_paths
    }

    pub fn basis(&self) -> &[Occupation] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn normalized(&self) -> Result<DensityOperator> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::ZeroState);
        }
        let mut out = self.clone();
        out.matrix /= Complex64::new(tr, 0.0);
        Ok(out)
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.basis.is_empty() {
            return Vec::new();
        }
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// `tr(rho^2) / tr(rho)^2`.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        let sq: f64 = self.matrix.iter().map(|z| z.norm_sqr()).sum();
        sq / (tr * tr)
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::RegisterMismatch(
                "density operators have different bases".to_string(),
            ));
        }
        Ok((&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }
}

/// Traces out every path not in `keep_paths`.
pub fn partial_trace(state: &PureState, keep_paths: &[usize]) -> Result<DensityOperator> {
    let reg = state.register;
    let keep = sorted_paths(reg, keep_paths)?;
    if keep.is_empty() || keep.len() == reg.paths {
        return Err(Error::InvalidPathSet(
            "keep set must be a nonempty proper subset of the paths".to_string(),
        ));
    }
    let env_paths = complement_paths(reg, &keep);

    let mut basis_set: BTreeMap<Occupation, usize> = BTreeMap::new();
    let mut by_env: BTreeMap<Occupation, Vec<(Occupation, Complex64)>> = BTreeMap::new();
    for (occ, a) in &state.terms {
        let k = occ.restrict(reg, &keep);
        basis_set.insert(k.clone(), 0);
        by_env
            .entry(occ.restrict(reg, &env_paths))
            .or_default()
            .push((k, *a));
    }
    for (i, v) in basis_set.values_mut().enumerate() {
        *v = i;
    }
    let n = basis_set.len();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for group in by_env.values() {
        for (ki, ai) in group {
            let i = basis_set[ki];
            for (kj, aj) in group {
                let j = basis_set[kj];
                matrix[(i, j)] += ai * aj.conj();
            }
        }
    }
    Ok(DensityOperator {
        register: Register::new(keep.len(), reg.oams),
        kept_paths: keep,
        basis: basis_set.into_keys().collect(),
        matrix,
    })
}

/// `<chi|rho|chi>`; `chi` lives on the operator's local register.
pub fn fidelity(rho: &DensityOperator, chi: &PureState) -> Result<f64> {
    if chi.register != rho.register {
        return Err(Error::RegisterMismatch(format!(
            "state register {:?} vs operator register {:?}",
            chi.register, rho.register
        )));
    }
    let idx: Vec<(usize, Complex64)> = chi
        .terms
        .iter()
        .filter_map(|(k, a)| rho.basis.binary_search(k).ok().map(|i| (i, *a)))
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for &(i, ai) in &idx {
        for &(j, aj) in &idx {
            acc += ai.conj() * rho.matrix[(i, j)] * aj;
        }
    }
    Ok(acc.re)
}
