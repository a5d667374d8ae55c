//! Shared optimization machinery: restart scheduling, seeded RNG derivation,
//! projected gradient descent over pure states, and simplex projection.
//!
//! Every restart derives its RNG solely from (master seed, restart index), and
//! restart results are reduced by (value, index), so results are identical
//! regardless of how the restarts are scheduled across threads.

use nalgebra::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::linalg::{CVector, C64};

/// Knobs for the restart searches. `tol` is the convergence tolerance for the
/// density-matrix and POVM searches; the pure-state entropy search uses a
/// fixed 1e-10 improvement threshold.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub tol: f64,
    /// Skip closed-form dispatch and always run the numerical search.
    pub force_search: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 600,
            seed: 42,
            tol: 1e-6,
            force_search: false,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn forced(&self) -> Self {
        Self {
            force_search: true,
            ..self.clone()
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Seed for restart `index` derived from a master seed.
pub fn restart_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(1)))
}

pub fn restart_rng(master: u64, index: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(restart_seed(master, index))
}

/// Haar-ish random unit vector from complex Gaussian entries.
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-6 {
            return v.map(|a| a / Complex::from(n));
        }
    }
}

/// Euclidean projection of `v` onto the probability simplex (Duchi et al.).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut rho = 0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let theta = (cumsum - 1.0) / (i + 1) as f64;
        if ui - theta > 0.0 {
            rho = i + 1;
        }
    }
    let top: f64 = u.iter().take(rho).sum();
    let theta = (top - 1.0) / rho as f64;
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// One projected-gradient descent run on the unit sphere of pure states.
/// `grad` is the Wirtinger gradient ∂f/∂ψ̄; backtracking line search with a
/// growing step; stops when the improvement falls below 1e-10.
fn descend_pure_state<F, G>(start: CVector, value: &F, grad: &G, max_iters: usize) -> (f64, CVector)
where
    F: Fn(&CVector) -> f64,
    G: Fn(&CVector) -> CVector,
{
    let mut psi = start.normalize();
    let mut f = value(&psi);
    let mut eta = 0.5_f64;
    let mut small_gains = 0u32;
    for _ in 0..max_iters {
        let g = grad(&psi);
        let overlap = psi.dotc(&g);
        let tangent = &g - &psi.map(|a| a * overlap);
        let gnorm2 = tangent.norm_squared();
        if gnorm2 < 1e-24 {
            break;
        }
        eta = (eta * 2.0).min(1.0);
        let mut improved = false;
        while eta > 1e-14 {
            let candidate = (&psi - &tangent.map(|a| a * Complex::from(eta))).normalize();
            let fc = value(&candidate);
            if fc < f - 0.25 * eta * gnorm2 {
                let gain = f - fc;
                psi = candidate;
                f = fc;
                improved = true;
                // the step size recovers between iterations, so only stop
                // once several consecutive gains stay below threshold
                if gain < 1e-10 {
                    small_gains += 1;
                } else {
                    small_gains = 0;
                }
                break;
            }
            eta *= 0.5;
        }
        if !improved || small_gains >= 4 {
            break;
        }
    }
    (f, psi)
}

/// Minimizes a smooth phase-invariant function over pure states with seeded
/// random restarts plus the supplied warm starts. Returns the best (value,
/// state) pair; ties go to the lowest start index.
pub fn minimize_pure_state<F, G>(
    dim: usize,
    warm_starts: &[CVector],
    value: F,
    grad: G,
    cfg: &SearchConfig,
) -> (f64, CVector)
where
    F: Fn(&CVector) -> f64 + Sync,
    G: Fn(&CVector) -> CVector + Sync,
{
    let total = warm_starts.len() + cfg.restarts.max(1);
    let best = (0..total)
        .into_par_iter()
        .map(|idx| {
            let start = if idx < warm_starts.len() {
                warm_starts[idx].clone()
            } else {
                let mut rng = restart_rng(cfg.seed, (idx - warm_starts.len()) as u64);
                random_unit_vector(&mut rng, dim)
            };
            let (f, psi) = descend_pure_state(start, &value, &grad, cfg.max_iters);
            (f, idx, psi)
        })
        .reduce_with(|a, b| {
            if (b.0, b.1) < (a.0, a.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    (best.0, best.2)
}
