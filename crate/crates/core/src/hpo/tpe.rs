//! Tree-structured Parzen estimator style sampler.
//!
//! After a random warm-up, past trials are split into the best quarter
//! ("good") and the rest. Each axis gets a Parzen density for both groups
//! (Gaussian kernels in log space for the log-integer axes, smoothed counts
//! for categorical ones); candidates drawn from the good density are ranked
//! by the good/bad likelihood ratio.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::space::{from_values, log_bounds, snap_log, to_values, Dim, SearchSpace};
use super::Trial;
use crate::model::Cnn1dConfig;

pub const STARTUP_TRIALS: usize = 5;
pub const GOOD_FRACTION: f64 = 0.25;
pub const CANDIDATES: usize = 24;
/// Draws spent looking for a config that passes the feasibility filter.
const FEASIBLE_ATTEMPTS: usize = 2000;

/// Per-axis density over the observed values of one group.
struct Parzen<'a> {
    dim: &'a Dim,
    points: Vec<f64>,
}

impl Parzen<'_> {
    fn bandwidth(&self, a: f64, b: f64) -> f64 {
        let n = self.points.len().max(1) as f64;
        ((b - a) * 0.25 * n.powf(-0.2)).max((b - a) * 0.05)
    }

    /// Log density; the uniform prior is one extra mixture component.
    fn log_pdf(&self, x: f64) -> f64 {
        let n = self.points.len() as f64;
        match self.dim {
            Dim::LogInt(lo, hi) => {
                let (a, b) = log_bounds(*lo, *hi);
                let sigma = self.bandwidth(a, b);
                let lx = (x + 0.5).ln();
                let mut total = 1.0 / (b - a);
                for &p in &self.points {
                    let z = (lx - (p + 0.5).ln()) / sigma;
                    total += (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
                }
                (total / (n + 1.0)).ln()
            }
            Dim::Choice(values) => {
                let count = self
                    .points
                    .iter()
                    .filter(|&&p| (p - x).abs() < 1e-12)
                    .count() as f64;
                ((count + 1.0) / (n + values.len() as f64)).ln()
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.dim {
            Dim::LogInt(lo, hi) => {
                let pick = rng.random_range(0..=self.points.len());
                if pick == self.points.len() {
                    return self.dim.sample_uniform(rng);
                }
                let (a, b) = log_bounds(*lo, *hi);
                let normal = Normal::new((self.points[pick] + 0.5).ln(), self.bandwidth(a, b))
                    .expect("positive bandwidth");
                let u = normal.sample(rng).clamp(a, b - 1e-9);
                snap_log(u, *lo, *hi)
            }
            Dim::Choice(values) => {
                let weights: Vec<f64> = values.iter().map(|&v| self.log_pdf(v).exp()).collect();
                let mut r = rng.random::<f64>() * weights.iter().sum::<f64>();
                for (v, w) in values.iter().zip(&weights) {
                    if r < *w {
                        return *v;
                    }
                    r -= w;
                }
                *values.last().expect("non-empty choice")
            }
        }
    }
}

fn random_feasible(
    space: &SearchSpace,
    rng: &mut ChaCha8Rng,
    feasible: &dyn Fn(&Cnn1dConfig) -> bool,
) -> Cnn1dConfig {
    let mut last = space.sample_random(rng);
    for _ in 0..FEASIBLE_ATTEMPTS {
        if feasible(&last) {
            return last;
        }
        last = space.sample_random(rng);
    }
    last
}

/// Next configuration to try. Deterministic in `(history, space, seed)`.
/// Configs rejected by `feasible` are never proposed unless nothing
/// feasible is found.
pub fn suggest(
    history: &[Trial],
    space: &SearchSpace,
    seed: u64,
    feasible: &dyn Fn(&Cnn1dConfig) -> bool,
) -> Cnn1dConfig {
    let mut rng = crate::seed::rng(seed);
    if history.len() < STARTUP_TRIALS {
        return random_feasible(space, &mut rng, feasible);
    }
    let mut ranked: Vec<&Trial> = history.iter().collect();
    ranked.sort_by(|a, b| {
        b.objective
            .total_cmp(&a.objective)
            .then(a.index.cmp(&b.index))
    });
    let n_good = ((ranked.len() as f64 * GOOD_FRACTION).ceil() as usize).max(1);
    let (good, bad) = ranked.split_at(n_good);

    let dims = space.dims();
    let axis = |group: &[&Trial], d: usize| -> Vec<f64> {
        group.iter().map(|t| to_values(&t.config)[d]).collect()
    };
    let l: Vec<Parzen> = dims
        .iter()
        .enumerate()
        .map(|(d, dim)| Parzen {
            dim,
            points: axis(good, d),
        })
        .collect();
    let g: Vec<Parzen> = dims
        .iter()
        .enumerate()
        .map(|(d, dim)| Parzen {
            dim,
            points: axis(bad, d),
        })
        .collect();

    let mut best: Option<(f64, Cnn1dConfig)> = None;
    let mut scored = 0;
    for _ in 0..FEASIBLE_ATTEMPTS {
        let values: Vec<f64> = l.iter().map(|p| p.sample(&mut rng)).collect();
        let config = from_values(&values);
        if !feasible(&config) {
            continue;
        }
        let score: f64 = values
            .iter()
            .enumerate()
            .map(|(d, &x)| l[d].log_pdf(x) - g[d].log_pdf(x))
            .sum();
        if best.as_ref().is_none_or(|b| score > b.0) {
            best = Some((score, config));
        }
        scored += 1;
        if scored == CANDIDATES {
            break;
        }
    }
    best.map_or_else(|| random_feasible(space, &mut rng, feasible), |b| b.1)
}
