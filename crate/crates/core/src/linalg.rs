//! Complex Hermitian linear algebra and the canonical state / observable /
//! ensemble types, plus constructors for the special observable families
//! (mutually unbiased bases, pairs commuting on a subspace).
//!
//! All types are immutable after construction and validate their invariants
//! in the constructor, so downstream code can rely on them without
//! re-checking. States are stored projectively: the first nonzero amplitude
//! is made real and positive, which makes state equality testable.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

const HERMITIAN_TOL: f64 = 1e-10;
const GAP_TOL: f64 = 1e-9;
const GRAM_TOL: f64 = 1e-10;
const BLOCH_TOL: f64 = 1e-9;

/// A normalized pure state with canonical global phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Normalizes `amplitudes` and fixes the global phase so that the first
    /// amplitude with modulus above 1e-9 is real and positive.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm < 1e-9 {
            return Err(Error::ZeroVector);
        }
        let mut amplitudes = amplitudes.map(|a| a / C64::from(norm));
        if let Some(first) = amplitudes.iter().find(|a| a.norm() > 1e-9) {
            let phase = first.conj() / C64::from(first.norm());
            amplitudes.iter_mut().for_each(|a| *a *= phase);
        }
        Ok(Self { amplitudes })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVector::from_row_slice(amplitudes))
    }

    /// Computational basis state |k⟩ in dimension `dim`.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[k] = C64::new(1.0, 0.0);
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// Inner product ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// Squared overlap |⟨self|other⟩|².
    pub fn overlap_sq(&self, other: &PureState) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Rank-one projector |ψ⟩⟨ψ|.
    pub fn projector(&self) -> CMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
        }
    }

    /// Embeds the state into dimension `dim`, placing the amplitudes at
    /// `offset`.
    pub fn embed(&self, dim: usize, offset: usize) -> PureState {
        let mut v = CVector::zeros(dim);
        for (k, a) in self.amplitudes.iter().enumerate() {
            v[offset + k] = *a;
        }
        PureState { amplitudes: v }
    }
}

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite up to 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dev = hermitian_deviation(&matrix);
        if dev > 1e-12 {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = hermitian_part(&matrix);
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "density matrix trace {trace} is not 1"
            )));
        }
        let eigs = matrix.clone().symmetric_eigen().eigenvalues;
        if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
            if min < -1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "density matrix has negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim, dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure state ψ.
    pub fn expectation(&self, state: &PureState) -> f64 {
        (state.amplitudes().dotc(&(&self.matrix * state.amplitudes()))).re
    }

    /// Number of eigenvalues above `threshold` times the largest eigenvalue.
    pub fn numerical_rank(&self, threshold: f64) -> usize {
        let eigs = self.matrix.clone().symmetric_eigen().eigenvalues;
        let max = eigs.iter().cloned().fold(0.0_f64, f64::max);
        eigs.iter().filter(|&&e| e > threshold * max.max(1e-300)).count()
    }
}

/// A non-degenerate observable: real eigenvalues plus an orthonormal
/// eigenbasis. All measures in this crate depend only on the eigenbasis;
/// the eigenvalues are carried for completeness.
#[derive(Debug, Clone)]
pub struct Observable {
    eigenvalues: Vec<f64>,
    eigenbasis: Vec<PureState>,
}

impl Observable {
    pub fn new(eigenvalues: Vec<f64>, eigenbasis: Vec<PureState>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptyInput("observable needs at least one eigenvalue"));
        }
        if eigenvalues.len() != eigenbasis.len() {
            return Err(Error::LengthMismatch(eigenvalues.len(), eigenbasis.len()));
        }
        let d = eigenbasis[0].dim();
        if eigenbasis.len() != d {
            return Err(Error::DimensionMismatch(eigenbasis.len(), d));
        }
        let mut min_gap = f64::INFINITY;
        for i in 0..eigenvalues.len() {
            for j in (i + 1)..eigenvalues.len() {
                min_gap = min_gap.min((eigenvalues[i] - eigenvalues[j]).abs());
            }
        }
        if eigenvalues.len() > 1 && min_gap < GAP_TOL {
            return Err(Error::DegenerateSpectrum(min_gap));
        }
        for i in 0..d {
            if eigenbasis[i].dim() != d {
                return Err(Error::DimensionMismatch(eigenbasis[i].dim(), d));
            }
            for j in 0..d {
                let g = eigenbasis[i].overlap(&eigenbasis[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - C64::from(target)).norm() > GRAM_TOL {
                    return Err(Error::InvalidDistribution(format!(
                        "eigenbasis is not orthonormal: |⟨a_{i}|a_{j}⟩ - δ| = {:.3e}",
                        (g - C64::from(target)).norm()
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenbasis,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenbasis.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenbasis(&self) -> &[PureState] {
        &self.eigenbasis
    }

    pub fn basis_state(&self, j: usize) -> &PureState {
        &self.eigenbasis[j]
    }

    /// Reconstructs the operator Σ_j λ_j |a_j⟩⟨a_j|.
    pub fn matrix(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (lambda, state) in self.eigenvalues.iter().zip(&self.eigenbasis) {
            m += state.projector().scale(*lambda);
        }
        m
    }

    /// Extracts the Bloch vector of the eigenstate with the largest
    /// eigenvalue; `None` unless the observable is two-dimensional.
    pub fn bloch_vector(&self) -> Option<BlochVector> {
        if self.dim() != 2 {
            return None;
        }
        let top = self
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let p = self.eigenbasis[top].projector();
        let x = 2.0 * p[(1, 0)].re;
        let y = 2.0 * p[(1, 0)].im;
        let z = p[(0, 0)].re - p[(1, 1)].re;
        BlochVector::new([x, y, z]).ok()
    }
}

/// JSON form of an observable; eigenvectors are [re, im] pairs stored
/// column-major (entry `j*dim + k` is component k of eigenvector j).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableJson {
    pub dim: usize,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<[f64; 2]>,
}

impl From<&Observable> for ObservableJson {
    fn from(obs: &Observable) -> Self {
        let d = obs.dim();
        let mut eigenvectors = Vec::with_capacity(d * d);
        for state in obs.eigenbasis() {
            for a in state.amplitudes().iter() {
                eigenvectors.push([a.re, a.im]);
            }
        }
        ObservableJson {
            dim: d,
            eigenvalues: obs.eigenvalues().to_vec(),
            eigenvectors,
        }
    }
}

impl TryFrom<&ObservableJson> for Observable {
    type Error = Error;

    fn try_from(json: &ObservableJson) -> Result<Observable> {
        let d = json.dim;
        if json.eigenvalues.len() != d {
            return Err(Error::LengthMismatch(json.eigenvalues.len(), d));
        }
        if json.eigenvectors.len() != d * d {
            return Err(Error::LengthMismatch(json.eigenvectors.len(), d * d));
        }
        let mut basis = Vec::with_capacity(d);
        for j in 0..d {
            let col: Vec<C64> = json.eigenvectors[j * d..(j + 1) * d]
                .iter()
                .map(|[re, im]| C64::new(*re, *im))
                .collect();
            basis.push(PureState::from_slice(&col)?);
        }
        Observable::new(json.eigenvalues.clone(), basis)
    }
}

/// A real unit 3-vector parametrizing a qubit observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    components: [f64; 3],
}

impl BlochVector {
    /// Rejects vectors whose norm deviates from 1 by more than 1e-9, then
    /// stores the exactly normalized components.
    pub fn new(components: [f64; 3]) -> Result<Self> {
        let norm = (components[0] * components[0]
            + components[1] * components[1]
            + components[2] * components[2])
            .sqrt();
        if (norm - 1.0).abs() > BLOCH_TOL {
            return Err(Error::NonUnitBloch(norm));
        }
        Ok(Self {
            components: [
                components[0] / norm,
                components[1] / norm,
                components[2] / norm,
            ],
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_unnormalized(components: [f64; 3]) -> Result<Self> {
        let norm = (components[0] * components[0]
            + components[1] * components[1]
            + components[2] * components[2])
            .sqrt();
        if norm < 1e-12 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            components: [
                components[0] / norm,
                components[1] / norm,
                components[2] / norm,
            ],
        })
    }

    pub fn components(&self) -> [f64; 3] {
        self.components
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn negated(&self) -> BlochVector {
        BlochVector {
            components: [
                -self.components[0],
                -self.components[1],
                -self.components[2],
            ],
        }
    }

    /// The ±1 eigenstate of 𝑛⃗·σ⃗ for this direction.
    pub fn spinor(&self, sign: f64) -> PureState {
        let [x, y, z] = if sign >= 0.0 {
            self.components
        } else {
            [-self.components[0], -self.components[1], -self.components[2]]
        };
        if 1.0 - z < 1e-14 {
            return PureState::basis_state(2, 0);
        }
        let v = CVector::from_row_slice(&[C64::new(x, -y), C64::new(1.0 - z, 0.0)]);
        PureState::new(v).expect("spinor norm is positive")
    }
}

/// A uniformly weighted list of pure states of equal dimension.
#[derive(Debug, Clone)]
pub struct Ensemble {
    states: Vec<PureState>,
}

impl Ensemble {
    pub fn new(states: Vec<PureState>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::EmptyInput("ensemble needs at least one state"));
        }
        let d = states[0].dim();
        for s in &states {
            if s.dim() != d {
                return Err(Error::DimensionMismatch(s.dim(), d));
            }
        }
        Ok(Self { states })
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Uniform weight 1/count.
    pub fn weight(&self) -> f64 {
        1.0 / self.states.len() as f64
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }
}

/// The doubly stochastic matrix of squared overlaps |⟨a_i|b_j⟩|².
#[derive(Debug, Clone)]
pub struct OverlapMatrix {
    entries: DMatrix<f64>,
}

impl OverlapMatrix {
    fn validate(entries: DMatrix<f64>) -> Result<Self> {
        let tol = 1e-10;
        for e in entries.iter() {
            if !(-tol..=1.0 + tol).contains(e) {
                return Err(Error::InvalidDistribution(format!(
                    "overlap entry {e} outside [0, 1]"
                )));
            }
        }
        for i in 0..entries.nrows() {
            let row: f64 = entries.row(i).iter().sum();
            let col: f64 = entries.column(i).iter().sum();
            if (row - 1.0).abs() > tol || (col - 1.0).abs() > tol {
                return Err(Error::InvalidDistribution(format!(
                    "overlap matrix is not doubly stochastic (row sum {row}, column sum {col})"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

/// Largest absolute deviation of `m` from its adjoint.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// (M + M†)/2.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending.
/// Returns (eigenvalues, eigenvectors as columns).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, Vec<CVector>) {
    let se = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| se.eigenvectors.column(k).into_owned())
        .collect();
    (values, vectors)
}

/// Largest eigenvalue and a matching unit eigenvector of a Hermitian matrix.
pub fn top_eigenpair(m: &CMatrix) -> (f64, CVector) {
    let (values, mut vectors) = hermitian_eigen(m);
    let v = vectors.pop().expect("nonempty spectrum");
    (*values.last().expect("nonempty spectrum"), v)
}

/// Frobenius norm of the commutator [A, B] of the reconstructed operators.
pub fn commutator_norm(a: &Observable, b: &Observable) -> f64 {
    let (ma, mb) = (a.matrix(), b.matrix());
    (&ma * &mb - &mb * &ma).norm()
}

/// Diagonalizes a Hermitian matrix into an [`Observable`] with ascending
/// eigenvalues.
pub fn eigensystem(h: &CMatrix) -> Result<Observable> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(h.nrows(), h.ncols()));
    }
    let dev = hermitian_deviation(h);
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let (values, vectors) = hermitian_eigen(h);
    for w in values.windows(2) {
        if w[1] - w[0] < GAP_TOL {
            return Err(Error::DegenerateSpectrum(w[1] - w[0]));
        }
    }
    let basis = vectors
        .into_iter()
        .map(PureState::new)
        .collect::<Result<Vec<_>>>()?;
    Observable::new(values, basis)
}

/// The observable 𝑎⃗·σ⃗ with eigenvalues (−1, +1) and projectors ½(𝕀 ± 𝑎⃗·σ⃗).
pub fn qubit_observable(a: &BlochVector) -> Observable {
    let basis = vec![a.spinor(-1.0), a.spinor(1.0)];
    Observable::new(vec![-1.0, 1.0], basis).expect("spinors are orthonormal")
}

/// Squared-overlap matrix between the eigenbases of two observables.
pub fn overlap_matrix(a: &Observable, b: &Observable) -> Result<OverlapMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let d = a.dim();
    let entries = DMatrix::from_fn(d, d, |i, j| a.basis_state(i).overlap_sq(b.basis_state(j)));
    OverlapMatrix::validate(entries)
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 1;
    }
    true
}

/// Discrete Fourier basis vector m in dimension `d`: components ω^{mn}/√d.
fn fourier_column(d: usize, m: usize) -> CVector {
    let scale = 1.0 / (d as f64).sqrt();
    CVector::from_fn(d, |n, _| {
        let phase = 2.0 * std::f64::consts::PI * (m * n % d) as f64 / d as f64;
        C64::new(phase.cos() * scale, phase.sin() * scale)
    })
}

fn observable_from_columns(columns: Vec<CVector>) -> Result<Observable> {
    let eigenvalues = (0..columns.len()).map(|k| k as f64).collect();
    let basis = columns
        .into_iter()
        .map(PureState::new)
        .collect::<Result<Vec<_>>>()?;
    Observable::new(eigenvalues, basis)
}

/// Mutually unbiased bases in prime dimension `d`: the computational basis
/// followed by the quadratic-phase family (the Fourier basis first). For
/// d = 2 these are the Z, X, Y eigenbases.
pub fn mub_bases(d: usize, n: usize) -> Result<Vec<Observable>> {
    if !is_prime(d) {
        return Err(Error::NonPrimeDimension(d));
    }
    if n == 0 || n > d + 1 {
        return Err(Error::TooManyBases {
            requested: n,
            dim: d,
            max: d + 1,
        });
    }
    let mut bases = Vec::with_capacity(n);
    let computational = (0..d)
        .map(|k| {
            let mut v = CVector::zeros(d);
            v[k] = C64::new(1.0, 0.0);
            v
        })
        .collect();
    bases.push(observable_from_columns(computational)?);
    if d == 2 {
        // Quadratic Gauss sums degenerate at d = 2; use the X and Y bases.
        let x = vec![
            CVector::from_row_slice(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]),
            CVector::from_row_slice(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]),
        ];
        let y = vec![
            CVector::from_row_slice(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)]),
            CVector::from_row_slice(&[C64::new(1.0, 0.0), C64::new(0.0, -1.0)]),
        ];
        for columns in [x, y].into_iter().take(n - 1) {
            bases.push(observable_from_columns(columns)?);
        }
        return Ok(bases);
    }
    for a in 0..n.saturating_sub(1) {
        let columns = (0..d)
            .map(|m| {
                let scale = 1.0 / (d as f64).sqrt();
                CVector::from_fn(d, |nn, _| {
                    let exponent = (a * nn * nn + m * nn) % d;
                    let phase = 2.0 * std::f64::consts::PI * exponent as f64 / d as f64;
                    C64::new(phase.cos() * scale, phase.sin() * scale)
                })
            })
            .collect();
        bases.push(observable_from_columns(columns)?);
    }
    Ok(bases)
}

/// A pair of observables that share `d_c` eigenvectors and are mutually
/// unbiased (computational vs Fourier) on the remaining (d − d_c)-dimensional
/// subspace. `d_c = 0` gives a full MUB pair, `d_c = d − 1` a commuting pair.
pub fn subspace_pair(d: usize, d_c: usize) -> Result<(Observable, Observable)> {
    if d < 2 || d_c >= d {
        return Err(Error::InvalidSubspaceDim { d, d_c });
    }
    let m = d - d_c;
    let mut a_columns = Vec::with_capacity(d);
    let mut b_columns = Vec::with_capacity(d);
    for k in 0..d {
        let mut v = CVector::zeros(d);
        v[k] = C64::new(1.0, 0.0);
        a_columns.push(v);
    }
    for k in 0..d_c {
        b_columns.push(a_columns[k].clone());
    }
    for k in 0..m {
        let f = fourier_column(m, k);
        let mut v = CVector::zeros(d);
        for n in 0..m {
            v[d_c + n] = f[n];
        }
        b_columns.push(v);
    }
    Ok((
        observable_from_columns(a_columns)?,
        observable_from_columns(b_columns)?,
    ))
}

/// The uniform ensemble of all eigenstates of the given observables.
pub fn eigenstate_ensemble(observables: &[Observable]) -> Result<Ensemble> {
    if observables.is_empty() {
        return Err(Error::EmptyInput("eigenstate ensemble needs observables"));
    }
    let d = observables[0].dim();
    let mut states = Vec::with_capacity(observables.len() * d);
    for obs in observables {
        if obs.dim() != d {
            return Err(Error::DimensionMismatch(obs.dim(), d));
        }
        states.extend(obs.eigenbasis().iter().cloned());
    }
    Ensemble::new(states)
}

/// Embeds two ensembles into orthogonal subspaces of dimension d₁ + d₂ and
/// re-uniformizes the weights over all states.
pub fn direct_sum_ensemble(s1: &Ensemble, s2: &Ensemble) -> Ensemble {
    let (d1, d2) = (s1.dim(), s2.dim());
    let d = d1 + d2;
    let mut states = Vec::with_capacity(s1.len() + s2.len());
    for s in s1.states() {
        states.push(s.embed(d, 0));
    }
    for s in s2.states() {
        states.push(s.embed(d, d1));
    }
    Ensemble { states }
}
