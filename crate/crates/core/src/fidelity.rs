//! The distinguishability-based incompatibility measure Q = 1 − F^max:
//! average-fidelity evaluation, a see-saw ascent producing a certified lower
//! bound on the accessible fidelity F^max, closed forms for the solvable
//! families, direct-sum composition, and the constant-POVM equality test.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eur::Method;
use crate::families::{detect_family, Family};
use crate::linalg::{
    eigenstate_ensemble, hermitian_eigen, qubit_observable, BlochVector, CMatrix, CVector,
    Ensemble, Observable, PureState, C64,
};
use crate::search::{restart_rng, SearchConfig};
use rand::Rng;
use rand_distr::StandardNormal;

const COMPLETENESS_TOL: f64 = 1e-8;

/// A POVM with rank-one elements m_k |χ_k⟩⟨χ_k| summing to the identity.
#[derive(Debug, Clone)]
pub struct RankOnePovm {
    weights: Vec<f64>,
    directions: Vec<PureState>,
}

impl RankOnePovm {
    pub fn new(weights: Vec<f64>, directions: Vec<PureState>) -> Result<Self> {
        if weights.len() != directions.len() {
            return Err(Error::LengthMismatch(weights.len(), directions.len()));
        }
        if directions.is_empty() {
            return Err(Error::InvalidPovm("no elements".into()));
        }
        let d = directions[0].dim();
        if directions.iter().any(|x| x.dim() != d) {
            return Err(Error::InvalidPovm("mixed element dimensions".into()));
        }
        if weights.len() > d * d {
            return Err(Error::InvalidPovm(format!(
                "{} elements exceed the d² = {} budget",
                weights.len(),
                d * d
            )));
        }
        if weights.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::InvalidPovm("weights must be positive".into()));
        }
        let povm = Self {
            weights,
            directions,
        };
        let residual = povm.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "completeness residual {residual:.3e}"
            )));
        }
        Ok(povm)
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn directions(&self) -> &[PureState] {
        &self.directions
    }

    /// Operator norm of Σ_k m_k |χ_k⟩⟨χ_k| − 𝕀.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for (m, x) in self.weights.iter().zip(&self.directions) {
            sum += x.projector().scale(*m);
        }
        sum -= CMatrix::identity(d, d);
        let (eigs, _) = hermitian_eigen(&sum);
        eigs.iter().fold(0.0_f64, |acc, e| acc.max(e.abs()))
    }
}

/// JSON form: directions are [re, im] pairs, each element's amplitudes
/// stored contiguously.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PovmJson {
    pub weights: Vec<f64>,
    pub directions: Vec<[f64; 2]>,
}

impl From<&RankOnePovm> for PovmJson {
    fn from(povm: &RankOnePovm) -> Self {
        let mut directions = Vec::new();
        for x in povm.directions() {
            for a in x.amplitudes().iter() {
                directions.push([a.re, a.im]);
            }
        }
        PovmJson {
            weights: povm.weights().to_vec(),
            directions,
        }
    }
}

impl TryFrom<&PovmJson> for RankOnePovm {
    type Error = Error;

    fn try_from(json: &PovmJson) -> Result<RankOnePovm> {
        let k = json.weights.len();
        if k == 0 || json.directions.len() % k != 0 {
            return Err(Error::InvalidPovm(
                "direction data does not divide into elements".into(),
            ));
        }
        let d = json.directions.len() / k;
        let mut dirs = Vec::with_capacity(k);
        for e in 0..k {
            let amps: Vec<C64> = json.directions[e * d..(e + 1) * d]
                .iter()
                .map(|[re, im]| C64::new(*re, *im))
                .collect();
            dirs.push(PureState::from_slice(&amps)?);
        }
        RankOnePovm::new(json.weights.clone(), dirs)
    }
}

/// Outcome of the accessible-fidelity computation. `fmax_lower` is a
/// certified lower bound on F^max (the POVM is completeness-feasible), so
/// `q_upper = 1 − fmax_lower` upper-bounds the measure Q.
#[derive(Debug, Clone)]
pub struct FidelityResult {
    pub fmax_lower: f64,
    pub povm: RankOnePovm,
    pub q_upper: f64,
    pub method: Method,
    /// Best value after each accepted ascent iteration (non-decreasing).
    pub ascent_trace: Vec<f64>,
}

/// The weighted ensemble operator G(χ) = Σ_s |⟨χ|ψ_s⟩|² |ψ_s⟩⟨ψ_s|.
fn ensemble_operator(states: &[PureState], chi: &CVector) -> CMatrix {
    let d = chi.len();
    let mut acc = CMatrix::zeros(d, d);
    for s in states {
        let w = s.amplitudes().dotc(chi).norm_sqr();
        if w > 1e-300 {
            acc += s.projector().scale(w);
        }
    }
    acc
}

fn top_eig(m: &CMatrix) -> (f64, CVector) {
    crate::linalg::top_eigenpair(m)
}

/// Average fidelity achieved by a single rank-one POVM element: the largest
/// eigenvalue of the (1/N)-normalized ensemble operator, N = count/dim.
pub fn avg_fidelity_element(s: &Ensemble, chi: &PureState) -> Result<f64> {
    if s.dim() != chi.dim() {
        return Err(Error::DimensionMismatch(s.dim(), chi.dim()));
    }
    let g = ensemble_operator(s.states(), chi.amplitudes());
    let (top, _) = top_eig(&g);
    Ok(top * s.dim() as f64 / s.len() as f64)
}

fn fhat(states: &[PureState], weights: &[f64], dirs: &[CVector]) -> f64 {
    let n = states.len() as f64;
    weights
        .iter()
        .zip(dirs)
        .filter(|(m, _)| **m > 1e-14)
        .map(|(m, chi)| {
            let g = ensemble_operator(states, chi);
            let (top, _) = top_eig(&g);
            m * top
        })
        .sum::<f64>()
        / n
}

struct AscentOutcome {
    value: f64,
    weights: Vec<f64>,
    dirs: Vec<CVector>,
    trace: Vec<f64>,
}

/// See-saw ascent from one starting POVM. Alternates the optimal
/// reconstruction for each element (top eigenvector of its ensemble
/// operator) with a completeness-preserving multiplicative POVM update:
/// χ_k ← L^{-1/2} R_k χ_k with L = Σ_k m_k R_k χ_k χ_k† R_k, which keeps
/// Σ m_k χ_k χ_k† = 𝕀 exactly. The best feasible snapshot is kept, so the
/// reported value never decreases across iterations.
fn seesaw(
    states: &[PureState],
    mut weights: Vec<f64>,
    mut dirs: Vec<CVector>,
    max_iters: usize,
) -> AscentOutcome {
    let d = states[0].dim();
    let mut best = fhat(states, &weights, &dirs);
    let mut best_weights = weights.clone();
    let mut best_dirs = dirs.clone();
    let mut trace = vec![best];
    let mut stagnant = 0usize;
    for _ in 0..max_iters {
        // reconstruction step: optimal resend state per element
        let r_ops: Vec<CMatrix> = dirs
            .iter()
            .map(|chi| {
                let g = ensemble_operator(states, chi);
                let (_, sigma) = top_eig(&g);
                ensemble_operator(states, &sigma)
            })
            .collect();
        // POVM step: conjugate by L^{-1/2}
        let mut l = CMatrix::zeros(d, d);
        let us: Vec<CVector> = weights
            .iter()
            .zip(&dirs)
            .zip(&r_ops)
            .map(|((m, chi), r)| (r * chi).map(|x| x * Complex::from(m.max(0.0).sqrt())))
            .collect();
        for u in &us {
            l += u * u.adjoint();
        }
        let (eigs, vecs) = hermitian_eigen(&l);
        let lmax = eigs.last().copied().unwrap_or(0.0);
        if eigs[0] < 1e-12 * lmax.max(1e-300) {
            break; // POVM mass collapsed onto a subspace; keep the snapshot
        }
        let mut lmh = CMatrix::zeros(d, d);
        for (e, v) in eigs.iter().zip(&vecs) {
            lmh += (v * v.adjoint()).scale(1.0 / e.sqrt());
        }
        let mut new_weights = Vec::with_capacity(us.len());
        let mut new_dirs = Vec::with_capacity(us.len());
        for (u, old) in us.iter().zip(&dirs) {
            let t = &lmh * u;
            let norm = t.norm();
            if norm < 1e-12 {
                new_weights.push(0.0);
                new_dirs.push(old.clone());
            } else {
                new_weights.push(norm * norm);
                new_dirs.push(t.map(|x| x / Complex::from(norm)));
            }
        }
        weights = new_weights;
        dirs = new_dirs;
        let value = fhat(states, &weights, &dirs);
        if value > best + 1e-13 {
            best = value;
            best_weights = weights.clone();
            best_dirs = dirs.clone();
            stagnant = 0;
        } else {
            stagnant += 1;
            if stagnant > 12 {
                break;
            }
        }
        trace.push(best);
    }
    AscentOutcome {
        value: best,
        weights: best_weights,
        dirs: best_dirs,
        trace,
    }
}

/// Orthonormal d-element slices of the ensemble (consecutive blocks whose
/// Gram matrix is the identity); these are exactly feasible basis POVMs.
fn basis_slices(s: &Ensemble) -> Vec<Vec<CVector>> {
    let d = s.dim();
    let mut out = Vec::new();
    if s.len() % d != 0 {
        return out;
    }
    'chunk: for chunk in s.states().chunks(d) {
        for i in 0..d {
            for j in 0..d {
                let g = chunk[i].overlap(&chunk[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                if (g - C64::from(target)).norm() > 1e-9 {
                    continue 'chunk;
                }
            }
        }
        out.push(chunk.iter().map(|x| x.amplitudes().clone()).collect());
    }
    out
}

fn random_orthobasis(rng: &mut impl Rng, d: usize) -> Vec<CVector> {
    let m = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let q = m.qr().q();
    (0..d).map(|j| q.column(j).into_owned()).collect()
}

fn finish_povm(outcome: AscentOutcome, method: Method) -> Result<FidelityResult> {
    let mut weights = Vec::new();
    let mut dirs = Vec::new();
    for (m, chi) in outcome.weights.iter().zip(&outcome.dirs) {
        if *m > 1e-12 {
            weights.push(*m);
            dirs.push(PureState::new(chi.clone())?);
        }
    }
    let povm = RankOnePovm::new(weights, dirs)
        .map_err(|_| Error::AscentDiverged(f64::NAN))
        .and_then(|p| {
            let r = p.completeness_residual();
            if r > COMPLETENESS_TOL {
                Err(Error::AscentDiverged(r))
            } else {
                Ok(p)
            }
        })?;
    Ok(FidelityResult {
        fmax_lower: outcome.value,
        q_upper: 1.0 - outcome.value,
        povm,
        method,
        ascent_trace: outcome.trace,
    })
}

/// See-saw lower bound on the accessible fidelity F^max of an ensemble.
/// Restarts cover each orthonormal basis slice of the ensemble plus random
/// stacked-orthonormal POVMs of d² elements; deterministic for a fixed seed.
pub fn fmax_ascent(s: &Ensemble, cfg: &SearchConfig) -> Result<FidelityResult> {
    let d = s.dim();
    let states = s.states();
    let slices = basis_slices(s);
    let random_starts = cfg.restarts.clamp(1, 64);
    let total = slices.len() + random_starts;
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let (weights, dirs) = if idx < slices.len() {
                (vec![1.0; d], slices[idx].clone())
            } else {
                let mut rng = restart_rng(cfg.seed, (idx - slices.len()) as u64);
                let mut dirs = Vec::with_capacity(d * d);
                for _ in 0..d {
                    dirs.extend(random_orthobasis(&mut rng, d));
                }
                (vec![1.0 / d as f64; d * d], dirs)
            };
            let outcome = seesaw(states, weights, dirs, cfg.max_iters);
            (idx, outcome)
        })
        .reduce_with(|x, y| {
            if y.1.value > x.1.value || (y.1.value == x.1.value && y.0 < x.0) {
                y
            } else {
                x
            }
        })
        .expect("at least one start");
    finish_povm(best.1, Method::RestartSearch)
}

/// Closed form for a pair of qubit observables: Q = ¼(1 − |𝑎⃗·𝑏⃗|), achieved
/// by the two-outcome von Neumann measurement along 𝑎⃗+𝑏⃗ (sum direction for
/// cos δ ≥ 0, difference direction otherwise).
pub fn q_qubit_closed(a: &BlochVector, b: &BlochVector) -> (f64, RankOnePovm) {
    let c = a.dot(b);
    let q = 0.25 * (1.0 - c.abs());
    let [ax, ay, az] = a.components();
    let [bx, by, bz] = b.components();
    let dir = if c >= 0.0 {
        BlochVector::from_unnormalized([ax + bx, ay + by, az + bz])
    } else {
        BlochVector::from_unnormalized([ax - bx, ay - by, az - bz])
    }
    .expect("qubit pair directions cannot cancel in the chosen branch");
    let povm = RankOnePovm::new(vec![1.0, 1.0], vec![dir.spinor(1.0), dir.spinor(-1.0)])
        .expect("antipodal spinors are complete");
    (q, povm)
}

/// Closed form Q = (1 − 1/N)(1 − 1/d) for N mutually unbiased bases in
/// dimension d.
pub fn q_mub_closed(n: usize, d: usize) -> f64 {
    (1.0 - 1.0 / n as f64) * (1.0 - 1.0 / d as f64)
}

/// Closed form Q = ½(1 − (d_c+1)/d) for a pair commuting on a subspace of
/// dimension d_c and unbiased on the complement.
pub fn q_subspace_closed(d: usize, d_c: usize) -> Result<f64> {
    if d < 2 || d_c >= d {
        return Err(Error::InvalidSubspaceDim { d, d_c });
    }
    Ok(0.5 * (1.0 - (d_c + 1) as f64 / d as f64))
}

/// Direct-sum composition of accessible fidelities: the state-count-weighted
/// average (n₁F₁ + n₂F₂)/(n₁ + n₂).
pub fn fmax_direct_sum(f1: f64, n1: usize, f2: f64, n2: usize) -> f64 {
    (n1 as f64 * f1 + n2 as f64 * f2) / (n1 + n2) as f64
}

/// Tests whether every POVM element attains the same average fidelity on the
/// ensemble; returns the pass verdict and the max−min spread.
pub fn constant_povm_check(s: &Ensemble, povm: &RankOnePovm, tol: f64) -> Result<(bool, f64)> {
    if s.dim() != povm.dim() {
        return Err(Error::DimensionMismatch(s.dim(), povm.dim()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for chi in povm.directions() {
        let f = avg_fidelity_element(s, chi)?;
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let spread = hi - lo;
    Ok((spread <= tol, spread))
}

/// Computes the measure Q for a set of observables: exact closed forms for
/// the solvable families, see-saw ascent on the eigenstate ensemble
/// otherwise (in which case `q_upper` is an upper estimate of Q).
pub fn q_measure(observables: &[Observable], cfg: &SearchConfig) -> Result<FidelityResult> {
    if observables.is_empty() {
        return Err(Error::EmptyInput("measure needs observables"));
    }
    let closed = |fmax: f64, povm: RankOnePovm| FidelityResult {
        fmax_lower: fmax,
        q_upper: 1.0 - fmax,
        povm,
        method: Method::ClosedForm,
        ascent_trace: vec![fmax],
    };
    if observables.len() == 1 {
        let basis_povm = RankOnePovm::new(
            vec![1.0; observables[0].dim()],
            observables[0].eigenbasis().to_vec(),
        )?;
        return Ok(closed(1.0, basis_povm));
    }
    if !cfg.force_search {
        if let Some(family) = detect_family(observables) {
            let first_basis = RankOnePovm::new(
                vec![1.0; observables[0].dim()],
                observables[0].eigenbasis().to_vec(),
            )?;
            return Ok(match family {
                Family::Commuting { .. } => closed(1.0, first_basis),
                Family::QubitPair { a, b } => {
                    let (q, povm) = q_qubit_closed(&a, &b);
                    closed(1.0 - q, povm)
                }
                Family::Mub { n, d } => closed(1.0 - q_mub_closed(n, d), first_basis),
                Family::Subspace { d, d_c, .. } => {
                    closed(1.0 - q_subspace_closed(d, d_c)?, first_basis)
                }
            });
        }
    }
    fmax_ascent(&eigenstate_ensemble(observables)?, cfg)
}

/// The optimal rank-one ascent evaluated on the ensemble of a qubit pair;
/// convenience wrapper used by the closed-form tests and the QKD module.
pub fn qubit_pair_ensemble(a: &BlochVector, b: &BlochVector) -> Ensemble {
    eigenstate_ensemble(&[qubit_observable(a), qubit_observable(b)])
        .expect("qubit observables share dimension 2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{mub_bases, subspace_pair};
    use approx::assert_abs_diff_eq;

    fn cfg() -> SearchConfig {
        SearchConfig {
            restarts: 8,
            max_iters: 400,
            ..Default::default()
        }
    }

    #[test]
    fn avg_fidelity_single_basis() {
        let bases = mub_bases(3, 2).unwrap();
        let s = eigenstate_ensemble(&bases[..1]).unwrap();
        let f = avg_fidelity_element(&s, bases[0].basis_state(1)).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn avg_fidelity_bb84_bisector() {
        let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b = BlochVector::new([1.0, 0.0, 0.0]).unwrap();
        let s = qubit_pair_ensemble(&a, &b);
        let bisector = BlochVector::from_unnormalized([1.0, 0.0, 1.0]).unwrap();
        let f = avg_fidelity_element(&s, &bisector.spinor(1.0)).unwrap();
        assert_abs_diff_eq!(f, 0.75, epsilon = 1e-12);

        // general angle: (3 + cos δ)/4 along the bisector
        let c: f64 = 0.6;
        let tilted = BlochVector::new([(1.0 - c * c).sqrt(), 0.0, c]).unwrap();
        let s = qubit_pair_ensemble(&a, &tilted);
        let mid = BlochVector::from_unnormalized([
            tilted.components()[0],
            0.0,
            1.0 + tilted.components()[2],
        ])
        .unwrap();
        let f = avg_fidelity_element(&s, &mid.spinor(1.0)).unwrap();
        assert_abs_diff_eq!(f, (3.0 + c) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn avg_fidelity_never_exceeds_one() {
        let bases = mub_bases(5, 3).unwrap();
        let s = eigenstate_ensemble(&bases).unwrap();
        let mut rng = restart_rng(7, 0);
        for _ in 0..20 {
            let chi = PureState::new(crate::search::random_unit_vector(&mut rng, 5)).unwrap();
            let f = avg_fidelity_element(&s, &chi).unwrap();
            assert!(f <= 1.0 + 1e-12 && f >= 0.0);
        }
    }

    #[test]
    fn ascent_reaches_bb84_value() {
        let bases = mub_bases(2, 2).unwrap();
        let s = eigenstate_ensemble(&bases).unwrap();
        let res = fmax_ascent(&s, &cfg()).unwrap();
        assert_abs_diff_eq!(res.fmax_lower, 0.75, epsilon = 1e-9);
        assert!(res.povm.completeness_residual() <= 1e-8);
        // trace is non-decreasing
        for w in res.ascent_trace.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn ascent_single_basis_is_exact() {
        let bases = mub_bases(3, 2).unwrap();
        let s = eigenstate_ensemble(&bases[..1]).unwrap();
        let res = fmax_ascent(&s, &cfg()).unwrap();
        assert_abs_diff_eq!(res.fmax_lower, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ascent_subspace_value() {
        let (a, b) = subspace_pair(3, 1).unwrap();
        let s = eigenstate_ensemble(&[a, b]).unwrap();
        let res = fmax_ascent(&s, &cfg()).unwrap();
        assert_abs_diff_eq!(res.fmax_lower, 5.0 / 6.0, epsilon = 1e-9);
    }

    #[test]
    fn qubit_closed_form_povm_achieves_value() {
        for c in [0.0_f64, 0.5, -0.5, 1.0, -1.0, 0.87] {
            let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
            let b = BlochVector::new([(1.0 - c * c).sqrt(), 0.0, c]).unwrap();
            let (q, povm) = q_qubit_closed(&a, &b);
            assert_abs_diff_eq!(q, 0.25 * (1.0 - c.abs()), epsilon = 1e-15);
            let s = qubit_pair_ensemble(&a, &b);
            let mut fhat = 0.0;
            for (m, chi) in povm.weights().iter().zip(povm.directions()) {
                fhat += m * avg_fidelity_element(&s, chi).unwrap();
            }
            fhat /= 2.0;
            assert_abs_diff_eq!(fhat, 1.0 - q, epsilon = 1e-12);
        }
    }

    #[test]
    fn mub_and_subspace_closed_values() {
        assert_abs_diff_eq!(q_mub_closed(2, 2), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(q_mub_closed(1, 7), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q_mub_closed(3, 3), 4.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q_subspace_closed(20, 0).unwrap(), 0.475, epsilon = 1e-15);
        assert_abs_diff_eq!(q_subspace_closed(20, 19).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            q_subspace_closed(3, 1).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert!(q_subspace_closed(3, 4).is_err());
    }

    #[test]
    fn direct_sum_composition() {
        assert_abs_diff_eq!(fmax_direct_sum(0.8, 3, 0.8, 5), 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(
            fmax_direct_sum(1.0, 2, 0.75, 4),
            5.0 / 6.0,
            epsilon = 1e-15
        );
        // subspace decomposition reproduces the closed form: d_c common
        // states at F = 1, the unbiased block at the MUB value
        let (d, d_c) = (5usize, 2usize);
        let m = d - d_c;
        let f_block = 1.0 - q_mub_closed(2, m);
        let f = fmax_direct_sum(1.0, 2 * d_c, f_block, 2 * m);
        assert_abs_diff_eq!(
            1.0 - f,
            q_subspace_closed(d, d_c).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn additivity_matches_ascent() {
        let a1 = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b1 = BlochVector::from_unnormalized([1.0, 0.0, 0.4]).unwrap();
        let a2 = BlochVector::from_unnormalized([0.0, 1.0, -0.2]).unwrap();
        let b2 = BlochVector::from_unnormalized([1.0, -1.0, 0.0]).unwrap();
        let s1 = qubit_pair_ensemble(&a1, &b1);
        let s2 = qubit_pair_ensemble(&a2, &b2);
        let f1 = 0.75 + 0.25 * a1.dot(&b1).abs();
        let f2 = 0.75 + 0.25 * a2.dot(&b2).abs();
        let sum = crate::linalg::direct_sum_ensemble(&s1, &s2);
        let res = fmax_ascent(&sum, &cfg()).unwrap();
        let expected = fmax_direct_sum(f1, s1.len(), f2, s2.len());
        assert_abs_diff_eq!(res.fmax_lower, expected, epsilon = 2e-3);
    }

    #[test]
    fn constant_povm_checks() {
        let bases = mub_bases(2, 2).unwrap();
        let s = eigenstate_ensemble(&bases).unwrap();
        let basis_povm =
            RankOnePovm::new(vec![1.0, 1.0], bases[0].eigenbasis().to_vec()).unwrap();
        let (ok, spread) = constant_povm_check(&s, &basis_povm, 1e-9).unwrap();
        assert!(ok);
        assert!(spread < 1e-12);

        let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b = BlochVector::new([1.0, 0.0, 0.0]).unwrap();
        let (_, optimal) = q_qubit_closed(&a, &b);
        let (ok, _) = constant_povm_check(&s, &optimal, 1e-9).unwrap();
        assert!(ok);

        // skewed four-element POVM mixing the Z and Y bases is not constant
        let y = BlochVector::new([0.0, 1.0, 0.0]).unwrap();
        let skew = RankOnePovm::new(
            vec![0.5, 0.5, 0.5, 0.5],
            vec![a.spinor(1.0), a.spinor(-1.0), y.spinor(1.0), y.spinor(-1.0)],
        )
        .unwrap();
        let (ok, spread) = constant_povm_check(&s, &skew, 1e-9).unwrap();
        assert!(!ok);
        assert_abs_diff_eq!(spread, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn q_measure_dispatch_and_sandwich() {
        let c = 0.3_f64;
        let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b = BlochVector::new([(1.0 - c * c).sqrt(), 0.0, c]).unwrap();
        let pair = [qubit_observable(&a), qubit_observable(&b)];
        let closed = q_measure(&pair, &cfg()).unwrap();
        assert_eq!(closed.method, Method::ClosedForm);
        assert_abs_diff_eq!(closed.q_upper, 0.25 * (1.0 - c), epsilon = 1e-12);

        // exact equality of Q and the average-entropy bound on closed families
        let t2 = crate::eur::t2_standard(&pair, &cfg()).unwrap();
        assert_abs_diff_eq!(closed.q_upper, t2.value, epsilon = 1e-15);

        // ascent value matches the closed form on the same pair
        let searched = q_measure(&pair, &cfg().forced()).unwrap();
        assert_abs_diff_eq!(searched.q_upper, closed.q_upper, epsilon = 2e-3);
        // the sandwich never inverts: search is a lower bound on F^max
        assert!(searched.fmax_lower <= 1.0 - t2.value + 1e-9);
    }

    #[test]
    fn ascent_povm_is_constant_on_mub_ensembles() {
        // equality of Q and the entropy bound holds exactly when the optimal
        // POVM is constant; the ascent's POVM must satisfy that here
        let bases = mub_bases(2, 2).unwrap();
        let s = eigenstate_ensemble(&bases).unwrap();
        let res = fmax_ascent(&s, &cfg()).unwrap();
        let (ok, spread) = constant_povm_check(&s, &res.povm, 1e-6).unwrap();
        assert!(ok, "spread {spread}");
    }

    #[test]
    fn povm_json_roundtrip() {
        let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b = BlochVector::from_unnormalized([1.0, 0.2, 0.3]).unwrap();
        let (_, povm) = q_qubit_closed(&a, &b);
        let json = PovmJson::from(&povm);
        let text = serde_json::to_string(&json).unwrap();
        let parsed: PovmJson = serde_json::from_str(&text).unwrap();
        let back = RankOnePovm::try_from(&parsed).unwrap();
        assert_eq!(back.len(), povm.len());
        assert!(back.completeness_residual() <= 1e-8);
        for (x, y) in back.directions().iter().zip(povm.directions()) {
            assert_abs_diff_eq!(x.overlap_sq(y), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_qubit_closed_is_symmetric_and_rotation_invariant() {
        let a = BlochVector::from_unnormalized([0.3, -0.2, 0.9]).unwrap();
        let b = BlochVector::from_unnormalized([-0.5, 0.1, 0.4]).unwrap();
        let (q_ab, _) = q_qubit_closed(&a, &b);
        let (q_ba, _) = q_qubit_closed(&b, &a);
        assert_abs_diff_eq!(q_ab, q_ba, epsilon = 0.0);
        // rotate both directions by the same orthogonal map (about z)
        let theta = 0.73_f64;
        let rot = |v: &BlochVector| {
            let [x, y, z] = v.components();
            BlochVector::from_unnormalized([
                theta.cos() * x - theta.sin() * y,
                theta.sin() * x + theta.cos() * y,
                z,
            ])
            .unwrap()
        };
        let (q_rot, _) = q_qubit_closed(&rot(&a), &rot(&b));
        assert_abs_diff_eq!(q_ab, q_rot, epsilon = 1e-12);
    }

    #[test]
    fn povm_validation() {
        let z = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            RankOnePovm::new(vec![1.0], vec![z.spinor(1.0)]),
            Err(Error::InvalidPovm(_))
        ));
        assert!(RankOnePovm::new(vec![1.0, 1.0], vec![z.spinor(1.0), z.spinor(-1.0)]).is_ok());
    }
}
