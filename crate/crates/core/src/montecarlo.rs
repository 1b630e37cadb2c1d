//! Chunked, seed-split Monte Carlo averaging.
//!
//! Samples are drawn in fixed-size chunks, each from its own stream seeded by
//! the chunk index, and chunk sums are combined in index order. The result is
//! therefore identical for any number of worker threads.

use rayon::prelude::*;

use crate::rng::{child_seed, stream, StreamRng};

const CHUNK: usize = 2048;

/// Mean and standard error of one Monte Carlo component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Averages `m` statistics over `n` draws. The sampler fills `out` (length
/// `m`) for one draw.
pub fn mc_means<F>(n: usize, m: usize, seed: u64, sampler: F) -> Vec<McEstimate>
where
    F: Fn(&mut StreamRng, &mut [f64]) + Sync,
{
    let n = n.max(1);
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(child_seed(seed, c as u64));
            let count = CHUNK.min(n - c * CHUNK);
            let mut sum = vec![0.0; m];
            let mut sq = vec![0.0; m];
            let mut buf = vec![0.0; m];
            for _ in 0..count {
                sampler(&mut rng, &mut buf);
                for j in 0..m {
                    sum[j] += buf[j];
                    sq[j] += buf[j] * buf[j];
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; m];
    let mut sq = vec![0.0; m];
    for (s, q) in &partial {
        for j in 0..m {
            sum[j] += s[j];
            sq[j] += q[j];
        }
    }
    let nf = n as f64;
    (0..m)
        .map(|j| {
            let mean = sum[j] / nf;
            let var = if n > 1 {
                ((sq[j] - nf * mean * mean) / (nf - 1.0)).max(0.0)
            } else {
                0.0
            };
            McEstimate {
                mean,
                std_err: (var / nf).sqrt(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn uniform_mean() {
        let est = mc_means(100_000, 1, 7, |rng, out| out[0] = rng.random::<f64>());
        assert!((est[0].mean - 0.5).abs() < 4.0 * est[0].std_err);
        assert!(est[0].std_err > 0.0);
    }

    #[test]
    fn independent_of_thread_count() {
        let run = || mc_means(10_000, 2, 3, |rng, out| {
            let u: f64 = rng.random();
            out[0] = u;
            out[1] = u * u;
        });
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
    }
}
