//! Entropic-uncertainty lower bounds for the order-2 Tsallis and Rényi
//! entropies: the standard minimum-average form over pure states, the
//! successive-measurement form (which has an exact expression in the squared
//! overlaps), and closed forms for qubit pairs, MUB families and
//! subspace-commuting pairs.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::families::{detect_family, Family};
use crate::linalg::{BlochVector, CVector, Observable, PureState};
use crate::prob::ProbDist;
use crate::search::{minimize_pure_state, SearchConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    RestartSearch,
}

/// Outcome of an entropic lower-bound computation.
#[derive(Debug, Clone)]
pub struct EurResult {
    pub value: f64,
    pub minimizer: PureState,
    pub method: Method,
    /// Max minus min of the per-observable entropies at the minimizer. The
    /// collision-entropy route to the fidelity bound assumes this vanishes;
    /// it is reported, not enforced.
    pub entropy_spread: f64,
}

#[derive(Clone, Copy)]
enum EntropyKind {
    T2,
    H2,
}

fn outcome_dist(obs: &Observable, psi: &CVector) -> Vec<f64> {
    obs.eigenbasis()
        .iter()
        .map(|a| a.amplitudes().dotc(psi).norm_sqr())
        .collect()
}

fn entropy_of(kind: EntropyKind, probs: &[f64]) -> f64 {
    let s: f64 = probs.iter().map(|p| p * p).sum();
    match kind {
        EntropyKind::T2 => 1.0 - s,
        EntropyKind::H2 => -s.log2(),
    }
}

fn avg_entropy(kind: EntropyKind, observables: &[Observable], psi: &CVector) -> f64 {
    observables
        .iter()
        .map(|obs| entropy_of(kind, &outcome_dist(obs, psi)))
        .sum::<f64>()
        / observables.len() as f64
}

fn spread_at(kind: EntropyKind, observables: &[Observable], psi: &PureState) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for obs in observables {
        let e = entropy_of(kind, &outcome_dist(obs, psi.amplitudes()));
        lo = lo.min(e);
        hi = hi.max(e);
    }
    hi - lo
}

fn avg_entropy_gradient(kind: EntropyKind, observables: &[Observable], psi: &CVector) -> CVector {
    let d = psi.len();
    let n = observables.len() as f64;
    let mut g = CVector::zeros(d);
    for obs in observables {
        let probs = outcome_dist(obs, psi);
        let scale = match kind {
            EntropyKind::T2 => -2.0 / n,
            EntropyKind::H2 => {
                let s: f64 = probs.iter().map(|p| p * p).sum();
                -2.0 / (n * s * std::f64::consts::LN_2)
            }
        };
        for (a, p) in obs.eigenbasis().iter().zip(&probs) {
            let amp = a.amplitudes().dotc(psi);
            g += a.amplitudes().map(|x| x * amp * Complex::from(scale * p));
        }
    }
    g
}

fn qubit_minimizer(a: &BlochVector, b: &BlochVector) -> PureState {
    let c = a.dot(b);
    let sign = if c < 0.0 { -1.0 } else { 1.0 };
    let [ax, ay, az] = a.components();
    let [bx, by, bz] = b.components();
    let dir =
        BlochVector::from_unnormalized([ax + sign * bx, ay + sign * by, az + sign * bz])
            .expect("non-antipodal directions");
    dir.spinor(1.0)
}

fn closed_form(
    kind: EntropyKind,
    observables: &[Observable],
    family: &Family,
) -> (f64, PureState) {
    match family {
        Family::Commuting { common } => (0.0, observables[0].basis_state(*common).clone()),
        Family::QubitPair { a, b } => {
            let c = a.dot(b).abs();
            let value = match kind {
                EntropyKind::T2 => 0.25 * (1.0 - c),
                EntropyKind::H2 => -(0.75 + 0.25 * c).log2(),
            };
            (value, qubit_minimizer(a, b))
        }
        Family::Mub { n, d } => {
            let (n, d) = (*n as f64, *d as f64);
            let value = match kind {
                EntropyKind::T2 => (1.0 - 1.0 / n) * (1.0 - 1.0 / d),
                EntropyKind::H2 => -((n + d - 1.0) / (n * d)).log2(),
            };
            (value, observables[0].basis_state(0).clone())
        }
        Family::Subspace { common, .. } => (0.0, observables[0].basis_state(*common).clone()),
    }
}

fn standard_eur(
    kind: EntropyKind,
    observables: &[Observable],
    cfg: &SearchConfig,
) -> Result<EurResult> {
    if observables.is_empty() {
        return Err(Error::EmptyInput("entropic bound needs observables"));
    }
    let d = observables[0].dim();
    for obs in observables {
        if obs.dim() != d {
            return Err(Error::DimensionMismatch(obs.dim(), d));
        }
    }
    if observables.len() == 1 {
        let minimizer = observables[0].basis_state(0).clone();
        return Ok(EurResult {
            value: 0.0,
            entropy_spread: 0.0,
            minimizer,
            method: Method::ClosedForm,
        });
    }
    if !cfg.force_search {
        if let Some(family) = detect_family(observables) {
            let (value, minimizer) = closed_form(kind, observables, &family);
            let entropy_spread = spread_at(kind, observables, &minimizer);
            return Ok(EurResult {
                value,
                minimizer,
                method: Method::ClosedForm,
                entropy_spread,
            });
        }
    }
    let warm: Vec<CVector> = observables
        .iter()
        .flat_map(|obs| obs.eigenbasis().iter().map(|s| s.amplitudes().clone()))
        .collect();
    let (value, psi) = minimize_pure_state(
        d,
        &warm,
        |psi| avg_entropy(kind, observables, psi),
        |psi| avg_entropy_gradient(kind, observables, psi),
        cfg,
    );
    let minimizer = PureState::new(psi)?;
    let entropy_spread = spread_at(kind, observables, &minimizer);
    Ok(EurResult {
        value,
        minimizer,
        method: Method::RestartSearch,
        entropy_spread,
    })
}

/// Minimum average Tsallis-2 entropy over pure states,
/// t₂ = min_φ (1/N) Σ_i T₂(A⁽ⁱ⁾; φ).
pub fn t2_standard(observables: &[Observable], cfg: &SearchConfig) -> Result<EurResult> {
    standard_eur(EntropyKind::T2, observables, cfg)
}

/// The collision-entropy analogue c₂. On MUB families this returns the
/// closed-form bound −log((N+d−1)/(Nd)); downstream chain identities need
/// that constant even where no state attains it.
pub fn h2_standard(observables: &[Observable], cfg: &SearchConfig) -> Result<EurResult> {
    standard_eur(EntropyKind::H2, observables, cfg)
}

/// Successive-measurement Tsallis-2 bound for measuring `a` then `b`:
/// t₂(A→B) = ½ min_i (1 − Σ_j |⟨a_i|b_j⟩|⁴).
pub fn t2_successive(a: &Observable, b: &Observable) -> Result<f64> {
    let m = crate::linalg::overlap_matrix(a, b)?;
    let d = m.dim();
    let min_row = (0..d)
        .map(|i| {
            let row: Vec<f64> = (0..d).map(|j| m.get(i, j)).collect();
            ProbDist::new(row)
                .map(|p| crate::prob::tsallis(&p, 2.0).expect("order 2 is valid"))
                .unwrap_or(0.0)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(0.5 * min_row)
}

/// Symmetrized successive bound t₂ˢᵘᶜᶜ(A,B) = ½ (t₂(A→B) + t₂(B→A)).
pub fn t2_succ_avg(a: &Observable, b: &Observable) -> Result<f64> {
    Ok(0.5 * (t2_successive(a, b)? + t2_successive(b, a)?))
}

/// The collision-entropy route to a fidelity-measure lower bound:
/// 1 − 2^(−c₂) with c₂ from [`h2_standard`]. Valid only when the
/// per-observable entropies agree at the minimizer (see
/// [`EurResult::entropy_spread`]).
pub fn h2_corollary_bound(observables: &[Observable], cfg: &SearchConfig) -> Result<f64> {
    let c2 = h2_standard(observables, cfg)?;
    Ok(1.0 - (-c2.value).exp2())
}
