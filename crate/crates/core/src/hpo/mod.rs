//! Hyperparameter search maximizing validation MCC.

mod space;
mod study;
mod tpe;

use serde::{Deserialize, Serialize};

pub use space::SearchSpace;
pub use study::{read_study_log, run_study, RetrainSummary, StudyOptions, StudyResult};
pub use tpe::{suggest, CANDIDATES, GOOD_FRACTION, STARTUP_TRIALS};

use crate::error::{Error, Result};
use crate::model::Cnn1dConfig;
use crate::seed::{derive_seed, stream};

/// Objective assigned to trials that could not be trained.
pub const FAILED_OBJECTIVE: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: usize,
    pub config: Cnn1dConfig,
    pub objective: f64,
    pub status: TrialStatus,
    pub duration_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    #[default]
    Tpe,
    Random,
}

impl Sampler {
    pub fn propose(
        self,
        history: &[Trial],
        space: &SearchSpace,
        seed: u64,
        feasible: &dyn Fn(&Cnn1dConfig) -> bool,
    ) -> Cnn1dConfig {
        match self {
            Sampler::Tpe => suggest(history, space, seed, feasible),
            // An empty history makes the TPE sampler draw uniformly.
            Sampler::Random => suggest(&[], space, seed, feasible),
        }
    }
}

/// Index of the best trial: highest objective, earliest on ties.
pub fn best_trial(trials: &[Trial]) -> Option<&Trial> {
    trials
        .iter()
        .fold(None, |best: Option<&Trial>, t| match best {
            Some(b) if b.objective >= t.objective => Some(b),
            _ => Some(t),
        })
}

/// Runs `n_trials` sequential proposals against an arbitrary objective,
/// continuing from `history`. `Err` from the objective marks the trial failed.
pub fn optimize<F>(
    mut history: Vec<Trial>,
    n_trials: usize,
    sampler: Sampler,
    space: &SearchSpace,
    seed: u64,
    feasible: &dyn Fn(&Cnn1dConfig) -> bool,
    mut objective: F,
) -> Vec<Trial>
where
    F: FnMut(usize, &Cnn1dConfig) -> (Result<f64>, f64),
{
    for index in history.len()..n_trials {
        let config = sampler.propose(
            &history,
            space,
            derive_seed(seed, stream::SAMPLER, index as u64),
            feasible,
        );
        let (result, duration_s) = objective(index, &config);
        let trial = match result {
            Ok(objective) => Trial {
                index,
                config,
                objective,
                status: TrialStatus::Complete,
                duration_s,
                error: None,
            },
            Err(e) => Trial {
                index,
                config,
                objective: FAILED_OBJECTIVE,
                status: TrialStatus::Failed,
                duration_s,
                error: Some(e.to_string()),
            },
        };
        history.push(trial);
    }
    history
}

pub(crate) fn all_failed(trials: &[Trial]) -> Result<()> {
    if trials.iter().all(|t| t.status == TrialStatus::Failed) {
        return Err(Error::AllTrialsFailed(trials.len()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn best_prefers_earliest_on_ties() {
        let c = Cnn1dConfig::default();
        let t = |index, objective| Trial {
            index,
            config: c,
            objective,
            status: TrialStatus::Complete,
            duration_s: 0.0,
            error: None,
        };
        let trials = vec![t(0, 0.5), t(1, 0.9), t(2, 0.9), t(3, 0.1)];
        assert_eq!(best_trial(&trials).unwrap().index, 1);
        assert!(best_trial(&[]).is_none());
    }

    #[test]
    fn optimize_records_failures() {
        let space = SearchSpace::default();
        let trials = optimize(Vec::new(), 6, Sampler::Tpe, &space, 1, &|_| true, |i, _| {
            if i == 2 {
                (
                    Err(Error::NonFiniteLoss {
                        epoch: 1,
                        last_finite_epoch: None,
                    }),
                    0.0,
                )
            } else {
                (Ok(i as f64 / 10.0), 0.0)
            }
        });
        assert_eq!(trials.len(), 6);
        assert_eq!(trials[2].status, TrialStatus::Failed);
        assert_eq!(trials[2].objective, FAILED_OBJECTIVE);
        assert_eq!(best_trial(&trials).unwrap().index, 5);
    }

    #[test]
    fn one_trial_study_picks_it() {
        let space = SearchSpace::default();
        let trials = optimize(Vec::new(), 1, Sampler::Tpe, &space, 1, &|_| true, |_, _| {
            (Ok(-0.3), 0.0)
        });
        assert_eq!(best_trial(&trials).unwrap().index, 0);
    }

    #[test]
    fn resumed_run_matches_uninterrupted_run() {
        let space = SearchSpace::default();
        let f = |_: usize, c: &Cnn1dConfig| (Ok(-((c.feature_maps as f64).ln() - 4.0).abs()), 0.0);
        let full = optimize(Vec::new(), 12, Sampler::Tpe, &space, 9, &|_| true, f);
        let half = optimize(Vec::new(), 7, Sampler::Tpe, &space, 9, &|_| true, f);
        let resumed = optimize(half, 12, Sampler::Tpe, &space, 9, &|_| true, f);
        assert_eq!(full, resumed);
    }

    #[test]
    fn all_failed_is_an_error() {
        let space = SearchSpace::default();
        let trials = optimize(
            Vec::new(),
            3,
            Sampler::Random,
            &space,
            1,
            &|_| true,
            |_, _| (Err(Error::Empty), 0.0),
        );
        assert!(matches!(
            all_failed(&trials),
            Err(Error::AllTrialsFailed(3))
        ));
    }
}
