//! Risk-quantile abstention.
//!
//! The plug-in recipe: score every calibration pair with a confidence
//! statistic (conditional risk, or entropy for the baseline), take the c-th
//! empirical quantile of those values as a threshold, and at prediction time
//! abstain on pairs whose statistic exceeds it. Two selector variants:
//!
//! * deterministic: accept iff `value <= threshold`. Algorithm-wise the
//!   textbook rule is a strict `<`, but with ties at the quantile that can
//!   undershoot the coverage constraint on finite samples, so the boundary
//!   is included.
//! * randomized: accept strictly below the threshold, reject strictly
//!   above, and accept boundary values with probability `p_r`, the empirical
//!   analogue of the Bernoulli boundary rule that meets the target coverage
//!   exactly in expectation.
//!
//! Boundary randomness comes from a hash of `(seed, pair id)` rather than a
//! sequential RNG stream, so decisions do not depend on iteration order and
//! both orientations of a pair always agree.

use crate::error::{Error, Result};
use crate::probmodel::PairwiseProbs;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Conditional risk of the argmax prediction under 0-1 loss:
/// `1 - max(p_minus, p_zero, p_plus)`. Lies in `[0, 2/3]` on the simplex.
pub fn conditional_risk(p: PairwiseProbs) -> f64 {
    1.0 - p.p_minus.max(p.p_zero).max(p.p_plus)
}

/// Shannon entropy of the outcome distribution (nats), with `0 ln 0 = 0`.
pub fn entropy(p: PairwiseProbs) -> f64 {
    [p.p_minus, p.p_zero, p.p_plus]
        .iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum()
}

/// Result of quantile calibration: the threshold (an order statistic of the
/// calibration values) and the boundary acceptance probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub threshold: f64,
    pub boundary_prob: f64,
}

/// Calibrate a threshold at target coverage `c` on held-out statistic values.
///
/// With `n` values and `k = ceil(c * n)`, the threshold is the k-th smallest
/// value (the "higher" empirical quantile, no interpolation; an interpolated
/// threshold would be attained by no sample and make boundary randomisation
/// vacuous). The boundary probability is
///
/// ```text
/// p_r = (c * n - #{v < threshold}) / #{v = threshold}
/// ```
///
/// clamped to `[0, 1]`, so that `#{v < t} + p_r * #{v = t} = c * n`.
pub fn calibrate_threshold(values: &[f64], c: f64) -> Result<Calibration> {
    if values.is_empty() {
        return Err(Error::invalid(
            "cannot calibrate a threshold on an empty value list",
        ));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid(format!(
            "target coverage must be in (0, 1], got {c}"
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("calibration values must be finite"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let target = c * n as f64;
    // ceil with a one-sided guard against c*n landing an ulp above an integer
    let k = ((target - 1e-9).ceil() as usize).clamp(1, n);
    let threshold = sorted[k - 1];
    let below = sorted.partition_point(|&v| v < threshold);
    let at = sorted.partition_point(|&v| v <= threshold) - below;
    let boundary_prob = ((target - below as f64) / at as f64).clamp(0.0, 1.0);
    Ok(Calibration {
        threshold,
        boundary_prob,
    })
}

/// Which statistic a policy thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoreKind {
    Risk,
    Entropy,
}

impl ScoreKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScoreKind::Risk => "risk",
            ScoreKind::Entropy => "entropy",
        }
    }

    /// Evaluate this statistic on an outcome distribution.
    pub fn statistic(&self, p: PairwiseProbs) -> f64 {
        match self {
            ScoreKind::Risk => conditional_risk(p),
            ScoreKind::Entropy => entropy(p),
        }
    }
}

impl std::str::FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "risk" => Ok(ScoreKind::Risk),
            "entropy" => Ok(ScoreKind::Entropy),
            other => Err(Error::invalid(format!("unknown score kind '{other}'"))),
        }
    }
}

/// Deterministic or boundary-randomized selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMode {
    Deterministic,
    Randomized,
}

impl SelectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMode::Deterministic => "deterministic",
            SelectionMode::Randomized => "randomized",
        }
    }
}

impl std::str::FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "det" | "deterministic" => Ok(SelectionMode::Deterministic),
            "rand" | "randomized" => Ok(SelectionMode::Randomized),
            other => Err(Error::invalid(format!(
                "unknown selection mode '{other}' (expected det|rand)"
            ))),
        }
    }
}

/// Stable identifier of an unordered item pair; both orientations map to the
/// same key, so hashed boundary decisions agree for `(i, j)` and `(j, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairKey {
    a: u64,
    b: u64,
}

impl PairKey {
    pub fn new(i: u64, j: u64) -> Self {
        if i <= j {
            PairKey { a: i, b: j }
        } else {
            PairKey { a: j, b: i }
        }
    }
}

/// A calibrated selection function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectivePolicy {
    pub kind: ScoreKind,
    pub threshold: f64,
    pub target_coverage: f64,
    pub mode: SelectionMode,
    pub boundary_prob: f64,
    pub seed: u64,
}

impl SelectivePolicy {
    pub fn new(
        kind: ScoreKind,
        cal: Calibration,
        target_coverage: f64,
        mode: SelectionMode,
        seed: u64,
    ) -> Self {
        SelectivePolicy {
            kind,
            threshold: cal.threshold,
            target_coverage,
            mode,
            boundary_prob: cal.boundary_prob,
            seed,
        }
    }

    /// Decide whether to accept a pair whose statistic is `value`.
    ///
    /// `value` must be the same statistic kind the policy was calibrated on.
    pub fn select(&self, value: f64, key: PairKey) -> bool {
        match self.mode {
            SelectionMode::Deterministic => value <= self.threshold,
            SelectionMode::Randomized => {
                if value < self.threshold {
                    true
                } else if value > self.threshold {
                    false
                } else {
                    unit_hash(self.seed, key) < self.boundary_prob
                }
            }
        }
    }

    /// Serialize as a flat key-value record.
    pub fn to_kv(&self) -> String {
        format!(
            "kind = {}\nthreshold = {}\nc = {}\nmode = {}\np_r = {}\nseed = {}\n",
            self.kind.as_str(),
            self.threshold,
            self.target_coverage,
            self.mode.as_str(),
            self.boundary_prob,
            self.seed,
        )
    }

    /// Parse the record written by [`to_kv`](Self::to_kv). Blank lines and
    /// `#` comments are ignored; unknown keys are errors.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut threshold = None;
        let mut c = None;
        let mut mode = None;
        let mut p_r = None;
        let mut seed = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(lineno, "expected 'key = value'"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => kind = Some(value.parse::<ScoreKind>()?),
                "threshold" => threshold = Some(parse_f64(lineno, value)?),
                "c" => c = Some(parse_f64(lineno, value)?),
                "mode" => mode = Some(value.parse::<SelectionMode>()?),
                "p_r" => p_r = Some(parse_f64(lineno, value)?),
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|e| {
                        Error::parse(lineno, format!("invalid seed '{value}': {e}"))
                    })?)
                }
                other => {
                    return Err(Error::parse(
                        lineno,
                        format!("unknown policy key '{other}'"),
                    ))
                }
            }
        }
        let missing = |what: &str| Error::parse(0, format!("policy record is missing '{what}'"));
        Ok(SelectivePolicy {
            kind: kind.ok_or_else(|| missing("kind"))?,
            threshold: threshold.ok_or_else(|| missing("threshold"))?,
            target_coverage: c.ok_or_else(|| missing("c"))?,
            mode: mode.ok_or_else(|| missing("mode"))?,
            boundary_prob: p_r.ok_or_else(|| missing("p_r"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        })
    }
}

fn parse_f64(line: usize, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|e| Error::parse(line, format!("invalid number '{value}': {e}")))
}

/// Random-abstainer baseline: accept exactly `round(c * n)` pairs, chosen by
/// a seeded uniform shuffle. Returns the acceptance mask aligned to `keys`.
pub fn random_selector(c: f64, keys: &[PairKey], seed: u64) -> Result<Vec<bool>> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid(format!(
            "target coverage must be in (0, 1], got {c}"
        )));
    }
    let n = keys.len();
    let n_accept = ((c * n as f64).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
    let mut mask = vec![false; n];
    for &idx in order.iter().take(n_accept) {
        mask[idx] = true;
    }
    Ok(mask)
}

/// Deterministic hash of `(seed, key)` mapped to `[0, 1)`.
fn unit_hash(seed: u64, key: PairKey) -> f64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ key.a);
    h = splitmix64(h ^ key.b);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
