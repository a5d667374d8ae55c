//! Monte-Carlo validation of the intercept-resend error-rate bound: for a
//! prepare-and-measure protocol whose signal states are the eigenstate
//! ensemble of a set of observables, any eavesdropper measuring a POVM and
//! resending reconstruction states causes an error rate of at least Q, with
//! the optimal strategy attaining it.
//!
//! Basis agreement is assumed (sifting is not simulated): Bob always
//! measures in Alice's preparation basis.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fidelity::RankOnePovm;
use crate::linalg::{eigenstate_ensemble, top_eigenpair, DensityMatrix, Ensemble, Observable, PureState};
use crate::search::restart_rng;

/// An intercept-resend strategy: a rank-one POVM plus one reconstruction
/// state per outcome.
#[derive(Debug, Clone)]
pub struct EveStrategy {
    povm: RankOnePovm,
    reconstructions: Vec<DensityMatrix>,
}

impl EveStrategy {
    pub fn new(povm: RankOnePovm, reconstructions: Vec<DensityMatrix>) -> Result<Self> {
        if reconstructions.len() != povm.len() {
            return Err(Error::MissingReconstruction(
                reconstructions.len().min(povm.len()),
            ));
        }
        let d = povm.dim();
        for r in &reconstructions {
            if r.dim() != d {
                return Err(Error::DimensionMismatch(r.dim(), d));
            }
        }
        Ok(Self {
            povm,
            reconstructions,
        })
    }

    /// Resends the measured direction itself: σ_k = |χ_k⟩⟨χ_k|.
    pub fn resend_measured(povm: RankOnePovm) -> Self {
        let reconstructions = povm.directions().iter().map(|x| x.density()).collect();
        Self {
            povm,
            reconstructions,
        }
    }

    /// The optimal reconstruction for a given POVM on a given ensemble:
    /// σ_k is the top eigenvector of Σ_s |⟨χ_k|ψ_s⟩|² |ψ_s⟩⟨ψ_s|, which makes
    /// the analytic error rate equal 1 − F̂ for the POVM's ascent value.
    pub fn optimal_for(povm: RankOnePovm, ensemble: &Ensemble) -> Result<Self> {
        if povm.dim() != ensemble.dim() {
            return Err(Error::DimensionMismatch(povm.dim(), ensemble.dim()));
        }
        let mut reconstructions = Vec::with_capacity(povm.len());
        for chi in povm.directions() {
            let mut g = crate::linalg::CMatrix::zeros(ensemble.dim(), ensemble.dim());
            for s in ensemble.states() {
                g += s.projector().scale(s.overlap_sq(chi));
            }
            let (_, v) = top_eigenpair(&g);
            reconstructions.push(PureState::new(v)?.density());
        }
        Ok(Self {
            povm,
            reconstructions,
        })
    }

    pub fn povm(&self) -> &RankOnePovm {
        &self.povm
    }

    pub fn reconstructions(&self) -> &[DensityMatrix] {
        &self.reconstructions
    }
}

/// Result of a Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trials: u64,
    pub empirical_error: f64,
    pub std_error: f64,
    pub analytic_error: f64,
}

/// Exact error rate 1 − (1/n) Σ_{k,s} m_k |⟨χ_k|ψ_s⟩|² ⟨ψ_s|σ_k|ψ_s⟩.
pub fn analytic_error_rate(s: &Ensemble, eve: &EveStrategy) -> Result<f64> {
    if s.dim() != eve.povm.dim() {
        return Err(Error::DimensionMismatch(s.dim(), eve.povm.dim()));
    }
    let mut fidelity = 0.0;
    for (k, (m, chi)) in eve
        .povm
        .weights()
        .iter()
        .zip(eve.povm.directions())
        .enumerate()
    {
        let sigma = &eve.reconstructions[k];
        for psi in s.states() {
            fidelity += m * chi.overlap_sq(psi) * sigma.expectation(psi);
        }
    }
    Ok(1.0 - fidelity / s.len() as f64)
}

fn sample_index(rng: &mut impl Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u: f64 = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        u -= w;
        if u <= 0.0 {
            return k;
        }
    }
    weights.len() - 1
}

const BLOCK: u64 = 8192;

/// Simulates prepare → intercept → resend → measure-in-Alice's-basis.
/// `eve = None` models an untouched channel (Bob receives the transmitted
/// state). Trials are partitioned into seed-derived blocks so the result is
/// deterministic for a fixed seed.
pub fn simulate_error_rate(
    bases: &[Observable],
    eve: Option<&EveStrategy>,
    trials: u64,
    seed: u64,
) -> Result<SimResult> {
    if trials == 0 {
        return Err(Error::EmptyInput("simulation needs at least one trial"));
    }
    let ensemble = eigenstate_ensemble(bases)?;
    let analytic = match eve {
        Some(strategy) => analytic_error_rate(&ensemble, strategy)?,
        None => 0.0,
    };
    let d = bases[0].dim();
    let n_states = bases.len() * d;
    let mut errors: u64 = 0;
    let mut done: u64 = 0;
    let mut block_index: u64 = 0;
    while done < trials {
        let todo = (trials - done).min(BLOCK);
        let mut rng = restart_rng(seed, block_index);
        for _ in 0..todo {
            let pick = (rng.random::<f64>() * n_states as f64) as usize % n_states;
            let (basis_idx, outcome_idx) = (pick / d, pick % d);
            let psi = bases[basis_idx].basis_state(outcome_idx);
            let bob_state: DensityMatrix = match eve {
                Some(strategy) => {
                    let born: Vec<f64> = strategy
                        .povm
                        .weights()
                        .iter()
                        .zip(strategy.povm.directions())
                        .map(|(m, chi)| m * chi.overlap_sq(psi))
                        .collect();
                    let k = sample_index(&mut rng, &born);
                    strategy.reconstructions[k].clone()
                }
                None => psi.density(),
            };
            let bob_probs: Vec<f64> = bases[basis_idx]
                .eigenbasis()
                .iter()
                .map(|b| bob_state.expectation(b).max(0.0))
                .collect();
            let bob_outcome = sample_index(&mut rng, &bob_probs);
            if bob_outcome != outcome_idx {
                errors += 1;
            }
        }
        done += todo;
        block_index += 1;
    }
    let empirical = errors as f64 / trials as f64;
    let std_error = (empirical * (1.0 - empirical) / trials as f64).sqrt();
    Ok(SimResult {
        trials,
        empirical_error: empirical,
        std_error,
        analytic_error: analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::{fmax_ascent, q_qubit_closed};
    use crate::linalg::{mub_bases, BlochVector};
    use crate::search::SearchConfig;
    use approx::assert_abs_diff_eq;

    fn bb84() -> Vec<Observable> {
        mub_bases(2, 2).unwrap()
    }

    #[test]
    fn perfect_cloning_of_single_basis() {
        let bases = mub_bases(3, 2).unwrap();
        let single = &bases[..1];
        let ensemble = eigenstate_ensemble(single).unwrap();
        let povm = RankOnePovm::new(vec![1.0; 3], bases[0].eigenbasis().to_vec()).unwrap();
        let eve = EveStrategy::resend_measured(povm);
        assert_abs_diff_eq!(
            analytic_error_rate(&ensemble, &eve).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let sim = simulate_error_rate(single, Some(&eve), 2000, 5).unwrap();
        assert_eq!(sim.empirical_error, 0.0);
    }

    #[test]
    fn bb84_optimal_strategy_error() {
        let bases = bb84();
        let ensemble = eigenstate_ensemble(&bases).unwrap();
        let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b = BlochVector::new([1.0, 0.0, 0.0]).unwrap();
        let (_, povm) = q_qubit_closed(&a, &b);
        let eve = EveStrategy::resend_measured(povm);
        assert_abs_diff_eq!(
            analytic_error_rate(&ensemble, &eve).unwrap(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn bb84_z_only_eavesdropper() {
        let bases = bb84();
        let ensemble = eigenstate_ensemble(&bases).unwrap();
        let z = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let povm = RankOnePovm::new(vec![1.0, 1.0], vec![z.spinor(1.0), z.spinor(-1.0)]).unwrap();
        let eve = EveStrategy::resend_measured(povm);
        // half the signals are cloned perfectly, half suffer error 1/2
        assert_abs_diff_eq!(
            analytic_error_rate(&ensemble, &eve).unwrap(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn ascent_povm_matches_q_upper() {
        let bases = bb84();
        let ensemble = eigenstate_ensemble(&bases).unwrap();
        let res = fmax_ascent(&ensemble, &SearchConfig::default()).unwrap();
        let eve = EveStrategy::optimal_for(res.povm.clone(), &ensemble).unwrap();
        let err = analytic_error_rate(&ensemble, &eve).unwrap();
        assert_abs_diff_eq!(err, res.q_upper, epsilon = 1e-9);
    }

    #[test]
    fn every_strategy_sits_above_q() {
        let bases = bb84();
        let ensemble = eigenstate_ensemble(&bases).unwrap();
        let q = 0.25;
        let z = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let tilted = BlochVector::from_unnormalized([1.0, 2.0, 0.5]).unwrap();
        let strategies = vec![
            EveStrategy::resend_measured(
                RankOnePovm::new(vec![1.0, 1.0], vec![z.spinor(1.0), z.spinor(-1.0)]).unwrap(),
            ),
            EveStrategy::resend_measured(
                RankOnePovm::new(
                    vec![1.0, 1.0],
                    vec![tilted.spinor(1.0), tilted.spinor(-1.0)],
                )
                .unwrap(),
            ),
            EveStrategy::optimal_for(
                RankOnePovm::new(vec![1.0, 1.0], vec![z.spinor(1.0), z.spinor(-1.0)]).unwrap(),
                &ensemble,
            )
            .unwrap(),
        ];
        for eve in strategies {
            assert!(analytic_error_rate(&ensemble, &eve).unwrap() >= q - 1e-9);
        }
    }

    #[test]
    fn simulation_converges_and_is_deterministic() {
        let bases = bb84();
        let a = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let b = BlochVector::new([1.0, 0.0, 0.0]).unwrap();
        let (_, povm) = q_qubit_closed(&a, &b);
        let eve = EveStrategy::resend_measured(povm);
        let sim1 = simulate_error_rate(&bases, Some(&eve), 100_000, 42).unwrap();
        assert!((sim1.empirical_error - 0.25).abs() <= 4.0 * sim1.std_error);
        let sim2 = simulate_error_rate(&bases, Some(&eve), 100_000, 42).unwrap();
        assert_eq!(sim1, sim2);

        let untouched = simulate_error_rate(&bases, None, 10_000, 1).unwrap();
        assert_eq!(untouched.empirical_error, 0.0);
        assert_eq!(untouched.analytic_error, 0.0);
    }

    #[test]
    fn strategy_validation() {
        let z = BlochVector::new([0.0, 0.0, 1.0]).unwrap();
        let povm = RankOnePovm::new(vec![1.0, 1.0], vec![z.spinor(1.0), z.spinor(-1.0)]).unwrap();
        assert!(matches!(
            EveStrategy::new(povm, vec![DensityMatrix::maximally_mixed(2)]),
            Err(Error::MissingReconstruction(_))
        ));
    }
}
