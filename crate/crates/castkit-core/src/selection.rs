//! Per-view difficulty scoring and view selection.
//!
//! Each view is scored as a weighted sum of MSE, structural dissimilarity
//! (1 − SSIM), and a perceptual distance between the rendered and edited
//! frames; lower scores mean easier-to-fit views. Selection retains the
//! sub-threshold views and falls back to the K lowest scores when too few
//! survive.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::ImagePlane;
use crate::metrics::{self, MetricsError, PerceptualEvaluator, SsimParams};

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("score list is empty; nothing to select from")]
    EmptyScores,
    #[error("k = {k} is out of range for {n} scored views")]
    KOutOfRange { k: usize, n: usize },
    #[error("invalid score weights: {0}")]
    InvalidWeights(String),
    #[error("threshold {0} must be finite and >= 0")]
    InvalidTau(f64),
    #[error("score for frame {frame} is not finite")]
    NonFiniteScore { frame: usize },
}

/// Score weights plus the selection knobs: threshold and minimum count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub tau: f64,
    pub k_min: usize,
}

impl ScoreWeights {
    /// Validates against a dataset of `n` views: non-negative weights with
    /// a positive sum, a finite non-negative threshold, and 1 ≤ k_min ≤ n.
    pub fn validate(&self, n: usize) -> Result<(), SelectionError> {
        for (name, v) in [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("lambda3", self.lambda3),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(SelectionError::InvalidWeights(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.lambda1 + self.lambda2 + self.lambda3 <= 0.0 {
            return Err(SelectionError::InvalidWeights(
                "weights must not all be zero".into(),
            ));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(SelectionError::InvalidTau(self.tau));
        }
        if self.k_min == 0 || self.k_min > n {
            return Err(SelectionError::KOutOfRange {
                k: self.k_min,
                n,
            });
        }
        Ok(())
    }
}

/// Score record for one view. `score` is exactly
/// `λ1·mse_term + λ2·ssim_term + λ3·perceptual_term`, evaluated left to
/// right, so it is bit-recomputable from the stored components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewScore {
    pub frame_index: usize,
    pub mse_term: f64,
    pub ssim_term: f64,
    pub perceptual_term: f64,
    pub score: f64,
    /// Diagnostic only; infinite for identical frames.
    pub psnr_db: f64,
}

impl ViewScore {
    /// Combines stored components with the given weights, in the same
    /// evaluation order used by [`score_view`].
    pub fn combine(&self, w: &ScoreWeights) -> f64 {
        w.lambda1 * self.mse_term + w.lambda2 * self.ssim_term + w.lambda3 * self.perceptual_term
    }
}

/// Which branch produced the selected set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    Threshold,
    TopK,
}

/// Selected frames (ascending), the rule that fired, the resolved
/// threshold, and the full score table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected: Vec<usize>,
    pub rule_applied: SelectionRule,
    pub tau: f64,
    pub scores: Vec<ViewScore>,
}

/// Scores one rendered/edited pair. Identical inputs yield score 0 with
/// every component 0.
pub fn score_view(
    rendered: &ImagePlane,
    edited: &ImagePlane,
    w: &ScoreWeights,
    ssim_params: &SsimParams,
    perceptual: &PerceptualEvaluator,
    frame_index: usize,
) -> Result<ViewScore, SelectionError> {
    let mse_term = metrics::mse(rendered, edited)?;
    let ssim_term = 1.0 - metrics::ssim(rendered, edited, ssim_params)?;
    let perceptual_term = perceptual.distance(rendered, edited, frame_index)?;
    let score = w.lambda1 * mse_term + w.lambda2 * ssim_term + w.lambda3 * perceptual_term;
    Ok(ViewScore {
        frame_index,
        mse_term,
        ssim_term,
        perceptual_term,
        score,
        psnr_db: metrics::psnr_from_mse(mse_term, ssim_params.dynamic_range),
    })
}

fn ensure_finite(scores: &[ViewScore]) -> Result<(), SelectionError> {
    for s in scores {
        if !s.score.is_finite() {
            return Err(SelectionError::NonFiniteScore {
                frame: s.frame_index,
            });
        }
    }
    Ok(())
}

/// Frames with `score ≤ tau` (inclusive), ascending by frame index.
pub fn select_by_threshold(scores: &[ViewScore], tau: f64) -> Result<Vec<usize>, SelectionError> {
    if scores.is_empty() {
        return Err(SelectionError::EmptyScores);
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(SelectionError::InvalidTau(tau));
    }
    ensure_finite(scores)?;
    let mut selected: Vec<usize> = scores
        .iter()
        .filter(|s| s.score <= tau)
        .map(|s| s.frame_index)
        .collect();
    selected.sort_unstable();
    Ok(selected)
}

/// The `k` lowest-score frames, ties broken by lower frame index, output
/// ascending by frame index.
pub fn select_top_k(scores: &[ViewScore], k: usize) -> Result<Vec<usize>, SelectionError> {
    if scores.is_empty() {
        return Err(SelectionError::EmptyScores);
    }
    if k == 0 || k > scores.len() {
        return Err(SelectionError::KOutOfRange {
            k,
            n: scores.len(),
        });
    }
    ensure_finite(scores)?;
    let mut order: Vec<(f64, usize)> = scores.iter().map(|s| (s.score, s.frame_index)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut selected: Vec<usize> = order[..k].iter().map(|&(_, i)| i).collect();
    selected.sort_unstable();
    Ok(selected)
}

/// Threshold rule first; if fewer than `k_min` survive, the result is
/// replaced wholesale by the `k_min` lowest scores.
pub fn select_views(
    scores: Vec<ViewScore>,
    w: &ScoreWeights,
) -> Result<SelectionResult, SelectionError> {
    if scores.is_empty() {
        return Err(SelectionError::EmptyScores);
    }
    w.validate(scores.len())?;
    let by_threshold = select_by_threshold(&scores, w.tau)?;
    let (selected, rule_applied) = if by_threshold.len() >= w.k_min {
        (by_threshold, SelectionRule::Threshold)
    } else {
        (select_top_k(&scores, w.k_min)?, SelectionRule::TopK)
    };
    Ok(SelectionResult {
        selected,
        rule_applied,
        tau: w.tau,
        scores,
    })
}

/// Percentile used when the caller asks for an automatic threshold.
pub const AUTO_TAU_PERCENTILE: f64 = 60.0;

/// Nearest-rank percentile of the scores: the `ceil(p/100 · n)`-th
/// smallest value. Used to resolve `tau = auto`.
pub fn auto_tau(scores: &[ViewScore], percentile: f64) -> Result<f64, SelectionError> {
    if scores.is_empty() {
        return Err(SelectionError::EmptyScores);
    }
    ensure_finite(scores)?;
    let mut sorted: Vec<f64> = scores.iter().map(|s| s.score).collect();
    sorted.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{PerceptualConfig, PerceptualMode};
    use crate::synthetic;
    use rand::Rng;

    fn scores_from(values: &[f64]) -> Vec<ViewScore> {
        values
            .iter()
            .enumerate()
            .map(|(frame_index, &score)| ViewScore {
                frame_index,
                mse_term: score,
                ssim_term: 0.0,
                perceptual_term: 0.0,
                score,
                psnr_db: 0.0,
            })
            .collect()
    }

    fn default_weights() -> ScoreWeights {
        ScoreWeights {
            lambda1: 1.0,
            lambda2: 0.4,
            lambda3: 0.4,
            tau: 0.5,
            k_min: 1,
        }
    }

    fn proxy() -> PerceptualEvaluator {
        PerceptualEvaluator::new(&PerceptualConfig::default()).unwrap()
    }

    #[test]
    fn identical_views_score_zero() {
        let img = synthetic::uniform_noise_image(32, 32, 1, 4);
        let s = score_view(
            &img,
            &img,
            &default_weights(),
            &SsimParams::default(),
            &proxy(),
            7,
        )
        .unwrap();
        assert_eq!(s.frame_index, 7);
        assert_eq!(s.mse_term, 0.0);
        assert_eq!(s.ssim_term, 0.0);
        assert_eq!(s.perceptual_term, 0.0);
        assert_eq!(s.score, 0.0);
        assert!(s.psnr_db.is_infinite());
    }

    #[test]
    fn composed_constant_case_scores_five_fourths() {
        // Constant 0 vs constant 0.5: mse = 0.25 and the ssim index
        // collapses to C1/(0.25 + C1) ~= 0, so ssim_term ~= 1; the table
        // pins the perceptual term to 0. Score = 1.25 with unit weights.
        let dir = tempfile::tempdir().unwrap();
        let table = dir.path().join("t.json");
        std::fs::write(&table, "{\"0\": 0.0}").unwrap();
        let eval = PerceptualEvaluator::new(&PerceptualConfig {
            mode: PerceptualMode::ExternalTable,
            scales: 1,
            table_path: Some(table),
        })
        .unwrap();
        let a = ImagePlane::constant(16, 16, 1, 0.0);
        let b = ImagePlane::constant(16, 16, 1, 0.5);
        let w = ScoreWeights {
            lambda1: 1.0,
            lambda2: 1.0,
            lambda3: 1.0,
            tau: 1.0,
            k_min: 1,
        };
        let s = score_view(&a, &b, &w, &SsimParams::default(), &eval, 0).unwrap();
        assert!((s.mse_term - 0.25).abs() < 1e-12);
        assert!((s.ssim_term - 1.0).abs() < 1e-3);
        assert_eq!(s.perceptual_term, 0.0);
        assert!((s.score - 1.25).abs() < 1e-3);
        assert_eq!(s.combine(&w), s.score);
    }

    #[test]
    fn mse_only_weights_are_linear() {
        let a = synthetic::uniform_noise_image(24, 24, 1, 30);
        let b = synthetic::uniform_noise_image(24, 24, 1, 31);
        let m = crate::metrics::mse(&a, &b).unwrap();
        let w = ScoreWeights {
            lambda1: 2.0,
            lambda2: 0.0,
            lambda3: 0.0,
            tau: 1.0,
            k_min: 1,
        };
        let s = score_view(&a, &b, &w, &SsimParams::default(), &proxy(), 0).unwrap();
        assert_eq!(s.score, 2.0 * m);
    }

    #[test]
    fn threshold_examples() {
        let scores = scores_from(&[0.1, 0.5, 0.3]);
        assert_eq!(select_by_threshold(&scores, 0.35).unwrap(), vec![0, 2]);

        let equal = scores_from(&[0.4, 0.4, 0.4]);
        assert_eq!(select_by_threshold(&equal, 0.4).unwrap(), vec![0, 1, 2]);

        assert!(matches!(
            select_by_threshold(&[], 0.5),
            Err(SelectionError::EmptyScores)
        ));
    }

    #[test]
    fn threshold_matches_filter_oracle_on_seeded_scores() {
        let mut rng = synthetic::seeded_rng(123);
        let values: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let tau = sorted[50];
        let scores = scores_from(&values);
        let got = select_by_threshold(&scores, tau).unwrap();
        let oracle: Vec<usize> = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= tau)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(got, oracle);
    }

    #[test]
    fn top_k_examples() {
        let scores = scores_from(&[0.9, 0.1, 0.5]);
        assert_eq!(select_top_k(&scores, 2).unwrap(), vec![1, 2]);

        let equal = scores_from(&[0.3; 10]);
        assert_eq!(select_top_k(&equal, 3).unwrap(), vec![0, 1, 2]);

        assert!(matches!(
            select_top_k(&scores, 4),
            Err(SelectionError::KOutOfRange { k: 4, n: 3 })
        ));
    }

    #[test]
    fn top_k_matches_sort_oracle_on_seeded_scores() {
        let mut rng = synthetic::seeded_rng(321);
        let values: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
        let scores = scores_from(&values);
        let got = select_top_k(&scores, 25).unwrap();
        let mut order: Vec<usize> = (0..100).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        let mut oracle = order[..25].to_vec();
        oracle.sort_unstable();
        assert_eq!(got, oracle);
    }

    #[test]
    fn select_views_branches() {
        let w = ScoreWeights {
            lambda1: 1.0,
            lambda2: 0.4,
            lambda3: 0.4,
            tau: 0.5,
            k_min: 1,
        };
        let r = select_views(scores_from(&[0.1, 0.2, 0.9]), &w).unwrap();
        assert_eq!(r.selected, vec![0, 1]);
        assert_eq!(r.rule_applied, SelectionRule::Threshold);

        let w2 = ScoreWeights { k_min: 2, ..w };
        let r = select_views(scores_from(&[0.7, 0.8, 0.9]), &w2).unwrap();
        assert_eq!(r.selected, vec![0, 1]);
        assert_eq!(r.rule_applied, SelectionRule::TopK);
    }

    #[test]
    fn sweep_tau_is_monotone_and_floored_at_k_min() {
        let mut rng = synthetic::seeded_rng(555);
        let values: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..1.0)).collect();
        let max = values.iter().cloned().fold(0.0f64, f64::max);
        let mut prev = 0usize;
        for step in 0..=20 {
            let tau = max * step as f64 / 20.0;
            let w = ScoreWeights {
                lambda1: 1.0,
                lambda2: 0.0,
                lambda3: 0.0,
                tau,
                k_min: 5,
            };
            let r = select_views(scores_from(&values), &w).unwrap();
            assert!(r.selected.len() >= 5);
            assert!(r.selected.len() >= prev || r.selected.len() == 5);
            if r.rule_applied == SelectionRule::Threshold {
                prev = r.selected.len();
            }
        }
    }

    #[test]
    fn auto_tau_is_nearest_rank_percentile() {
        let scores = scores_from(&[0.5, 0.1, 0.4, 0.2, 0.3]);
        // ceil(0.6 * 5) = 3rd smallest = 0.3.
        assert_eq!(auto_tau(&scores, AUTO_TAU_PERCENTILE).unwrap(), 0.3);
        let zeros = scores_from(&[0.0; 4]);
        assert_eq!(auto_tau(&zeros, AUTO_TAU_PERCENTILE).unwrap(), 0.0);
    }

    #[test]
    fn invalid_weights_are_rejected() {
        let scores = scores_from(&[0.1, 0.2]);
        let zero = ScoreWeights {
            lambda1: 0.0,
            lambda2: 0.0,
            lambda3: 0.0,
            tau: 0.5,
            k_min: 1,
        };
        assert!(matches!(
            select_views(scores.clone(), &zero),
            Err(SelectionError::InvalidWeights(_))
        ));
        let big_k = ScoreWeights {
            lambda1: 1.0,
            lambda2: 0.0,
            lambda3: 0.0,
            tau: 0.5,
            k_min: 3,
        };
        assert!(matches!(
            select_views(scores, &big_k),
            Err(SelectionError::KOutOfRange { .. })
        ));
    }
}
