use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Sampler;
use crate::dynamics::Loss;
use crate::{Error, Result};

/// Mean over independent repeats and its standard error. The standard error
/// is NaN for a single repeat.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub per_repeat: Vec<f64>,
}

impl MonteCarloEstimate {
    pub fn from_repeats(per_repeat: Vec<f64>) -> Self {
        let r = per_repeat.len() as f64;
        let mean = per_repeat.iter().sum::<f64>() / r;
        let stderr = if per_repeat.len() > 1 {
            let var = per_repeat.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        } else {
            f64::NAN
        };
        Self {
            mean,
            stderr,
            per_repeat,
        }
    }
}

/// Monte-Carlo estimate of `∫∫ ℓ(x − y) dν(y) dμ_T(x)`.
///
/// Repeat `r` draws `n_samples` points from `mu_t` and then `n_samples` from `nu`
/// with ChaCha8 seeded by `seed` on stream `r`, and averages `ℓ` over all
/// `n_samples²` pairs. Repeats run in parallel and are reduced in index order,
/// so the result depends only on the inputs and the seed.
pub fn loss_meanfield<M: Sampler + ?Sized, N: Sampler + ?Sized>(
    mu_t: &M,
    nu: &N,
    ell: Loss,
    n_samples: usize,
    repeats: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if n_samples == 0 || repeats == 0 {
        return Err(Error::config(
            "loss_meanfield needs at least one sample and one repeat",
        ));
    }
    let per_repeat = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let xs = mu_t.sample(n_samples, &mut rng)?;
            let ys = nu.sample(n_samples, &mut rng)?;
            let total: f64 = xs
                .iter()
                .map(|x| ys.iter().map(|y| ell.scalar(x - y)).sum::<f64>())
                .sum();
            Ok(total / (n_samples * n_samples) as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MonteCarloEstimate::from_repeats(per_repeat))
}
