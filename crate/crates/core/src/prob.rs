//! Measurement-outcome distributions, classical distances between them, and
//! the Rényi / Tsallis entropy families.
//!
//! Logarithms are base 2 throughout, so entropies are in bits.

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, Observable, OverlapMatrix};

/// A normalized probability vector. Entries in [−1e-12, 0) from eigensolver
/// round-off are clamped to zero before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbDist {
    probs: Vec<f64>,
}

impl ProbDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyInput("probability vector"));
        }
        let mut probs = probs;
        for p in &mut probs {
            if *p < -1e-12 {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {p:.3e}"
                )));
            }
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        probs.iter_mut().for_each(|p| *p /= sum);
        Ok(Self { probs })
    }

    pub fn uniform(d: usize) -> Self {
        Self {
            probs: vec![1.0 / d as f64; d],
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Outcome distribution of measuring `b` on `rho`: p(j) = ⟨b_j|ρ|b_j⟩.
pub fn measure_dist(b: &Observable, rho: &DensityMatrix) -> Result<ProbDist> {
    if b.dim() != rho.dim() {
        return Err(Error::DimensionMismatch(b.dim(), rho.dim()));
    }
    ProbDist::new(
        b.eigenbasis()
            .iter()
            .map(|state| rho.expectation(state))
            .collect(),
    )
}

/// Outcome distribution of a `b` measurement after a non-selective `a`
/// measurement: q(j) = Σ_i |⟨a_i|b_j⟩|² ⟨a_i|ρ|a_i⟩.
pub fn successive_dist(
    a: &Observable,
    b: &Observable,
    rho: &DensityMatrix,
) -> Result<ProbDist> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    let first = measure_dist(a, rho)?;
    let m = crate::linalg::overlap_matrix(a, b)?;
    Ok(successive_from_overlaps(&m, &first))
}

/// The factorized form q = Mᵀ w of the successive distribution, with M the
/// squared-overlap matrix and w the first-measurement distribution.
pub fn successive_from_overlaps(m: &OverlapMatrix, first: &ProbDist) -> ProbDist {
    let d = m.dim();
    let probs = (0..d)
        .map(|j| (0..d).map(|i| m.get(i, j) * first.probs()[i]).sum())
        .collect();
    ProbDist::new(probs).expect("doubly stochastic map preserves normalization")
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidOrder(alpha));
    }
    Ok(())
}

fn power_sum(p: &ProbDist, alpha: f64) -> f64 {
    p.probs()
        .iter()
        .map(|&x| if x > 0.0 { x.powf(alpha) } else { 0.0 })
        .sum()
}

/// Tsallis entropy T_α = (Σ p_iᵅ − 1)/(1 − α); α = 1 falls back to the
/// Shannon entropy in nats (its α → 1 limit).
pub fn tsallis(p: &ProbDist, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if alpha == 1.0 {
        return Ok(p
            .probs()
            .iter()
            .map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 })
            .sum());
    }
    Ok((power_sum(p, alpha) - 1.0) / (1.0 - alpha))
}

/// Rényi entropy H_α = log₂(Σ p_iᵅ)/(1 − α); α = 1 falls back to the Shannon
/// entropy in bits.
pub fn renyi(p: &ProbDist, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if alpha == 1.0 {
        return Ok(p
            .probs()
            .iter()
            .map(|&x| if x > 0.0 { -x * x.log2() } else { 0.0 })
            .sum());
    }
    Ok(power_sum(p, alpha).log2() / (1.0 - alpha))
}

fn check_lengths(p: &ProbDist, q: &ProbDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    Ok(())
}

/// Total-variation distance D₁ = ½ Σ |p_i − q_i|.
pub fn l1_distance(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(0.5
        * p.probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

/// Bhattacharyya fidelity F = Σ √(p_i q_i).
pub fn fidelity_classical(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a * b).sqrt())
        .sum())
}

/// Chebyshev distance D_∞ = max_i |p_i − q_i|.
pub fn linf_distance(p: &ProbDist, q: &ProbDist) -> Result<f64> {
    check_lengths(p, q)?;
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
