//! Item scoring: a built-in linear ranker trained with the pairwise logistic
//! loss, or scores ingested from an external file when the ranker is given.

use crate::data::{Dataset, PairInstance};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Linear scoring model `s(x) = w . x + b`.
///
/// The bias cancels in every score difference; it is kept so the scoring
/// contract is a full affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl ScoreModel {
    pub fn zeros(dim: usize) -> Self {
        ScoreModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }

    /// Score one item. Fails on a dimension mismatch.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "feature vector has dimension {}, model expects {}",
                x.len(),
                self.weights.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(x)
            .map(|(w, xi)| w * xi)
            .sum::<f64>()
            + self.bias)
    }

    /// Score every row of a dataset, aligned to row order.
    pub fn score_all(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.rows.iter().map(|r| self.score(&r.features)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

/// Hyperparameters for [`train_linear_ranker`].
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.5,
            epochs: 40,
            batch_size: 128,
            l2: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be positive"));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::invalid("l2 penalty must be >= 0"));
        }
        Ok(())
    }
}

/// Pairwise logistic loss and its analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGrad {
    pub loss: f64,
    pub grad_weights: Vec<f64>,
    /// Always zero: the bias cancels in the score difference.
    pub grad_bias: f64,
}

/// `loss = ln(1 + exp(-y (s(x) - s(x'))))` for an untied pair, with the
/// exact gradient with respect to the weights. Tied pairs (`y = 0`) are not
/// part of the surrogate and are rejected.
pub fn pairwise_logistic_loss(
    model: &ScoreModel,
    x: &[f64],
    x_prime: &[f64],
    label: i8,
) -> Result<LossGrad> {
    if label == 0 {
        return Err(Error::invalid("tied pairs carry no surrogate loss"));
    }
    if !matches!(label, -1 | 1) {
        return Err(Error::invalid(format!(
            "pair label must be -1 or +1, got {label}"
        )));
    }
    let s = model.score(x)?;
    let s_prime = model.score(x_prime)?;
    let y = label as f64;
    let margin = y * (s - s_prime);
    // softplus(-margin), computed without overflow on either tail
    let loss = (-margin).max(0.0) + (-margin.abs()).exp().ln_1p();
    // d loss / d margin = -sigma(-margin)
    let sigma_neg = if margin >= 0.0 {
        let e = (-margin).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + margin.exp())
    };
    let grad_weights = x
        .iter()
        .zip(x_prime)
        .map(|(xi, xpi)| -y * sigma_neg * (xi - xpi))
        .collect();
    Ok(LossGrad {
        loss,
        grad_weights,
        grad_bias: 0.0,
    })
}

/// A trained model plus its per-epoch mean training loss.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub model: ScoreModel,
    pub loss_trace: Vec<f64>,
}

/// Train a linear ranker by mini-batch gradient descent on the mean pairwise
/// logistic loss plus `l2 * ||w||^2`.
///
/// Tied pairs in the input are skipped; at least one untied pair is
/// required. The model starts at zero (the objective is convex) and the
/// epoch shuffle is seeded, so training is fully deterministic.
pub fn train_linear_ranker(
    d: &Dataset,
    pairs: &[PairInstance],
    cfg: &TrainConfig,
) -> Result<TrainOutput> {
    cfg.validate()?;
    let untied: Vec<&PairInstance> = pairs.iter().filter(|p| p.label != 0).collect();
    if untied.is_empty() {
        return Err(Error::invalid("no untied pairs to train on"));
    }
    let dim = d.feature_dim;
    let mut model = ScoreModel::zeros(dim);
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..untied.len()).collect();

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = vec![0.0; dim];
            let mut batch_loss = 0.0;
            for &idx in batch {
                let p = untied[idx];
                let lg = pairwise_logistic_loss(
                    &model,
                    &d.rows[p.i].features,
                    &d.rows[p.j].features,
                    p.label,
                )?;
                batch_loss += lg.loss;
                for (g, gi) in grad.iter_mut().zip(&lg.grad_weights) {
                    *g += gi;
                }
            }
            epoch_loss += batch_loss;
            let scale = cfg.learning_rate / batch.len() as f64;
            for (w, g) in model.weights.iter_mut().zip(&grad) {
                *w -= scale * g + cfg.learning_rate * 2.0 * cfg.l2 * *w;
            }
        }
        loss_trace.push(epoch_loss / untied.len() as f64);
    }

    Ok(TrainOutput { model, loss_trace })
}

/// Parse a score file: one finite decimal per non-empty line, aligned to the
/// dataset row order. Blank lines (including a trailing newline) are
/// ignored; the value count must match `n_rows` exactly.
pub fn load_external_scores(text: &str, n_rows: usize) -> Result<Vec<f64>> {
    let mut scores = Vec::with_capacity(n_rows);
    let mut last_line = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        last_line = lineno;
        if scores.len() == n_rows {
            return Err(Error::format(
                lineno,
                format!("expected {n_rows} scores but found more"),
            ));
        }
        let v = line
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::format(lineno, format!("'{line}' is not a finite number")))?;
        scores.push(v);
    }
    if scores.len() != n_rows {
        return Err(Error::format(
            last_line,
            format!("expected {n_rows} scores but found {}", scores.len()),
        ));
    }
    Ok(scores)
}

/// Affine standardisation of scores to zero mean and unit variance, fitted
/// on training items. Degenerate (constant) scores pass through unscaled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: f64,
    pub sd: f64,
}

impl Standardizer {
    pub fn identity() -> Self {
        Standardizer { mean: 0.0, sd: 1.0 }
    }

    pub fn fit(scores: &[f64]) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid("cannot fit a standardizer on no scores"));
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        Ok(Standardizer {
            mean,
            sd: if sd > 1e-12 { sd } else { 1.0 },
        })
    }

    pub fn apply(&self, score: f64) -> f64 {
        (score - self.mean) / self.sd
    }

    pub fn apply_all(&self, scores: &mut [f64]) {
        for s in scores.iter_mut() {
            *s = self.apply(*s);
        }
    }
}
