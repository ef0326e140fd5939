//! Tie-aware pairwise preference models.
//!
//! Given per-item scores `s` and `s'`, both models return a probability
//! distribution over the three pairwise outcomes `y ∈ {-1, 0, +1}` (second
//! item preferred, tie, first item preferred):
//!
//! * [`bt_probs`]: Bradley-Terry with the Rao-Kupper tie extension,
//!   parameterised by `theta >= 1`;
//! * [`tm_probs`]: Thurstone-Mosteller with a tie band of half-width
//!   `epsilon >= 0` around the score difference.
//!
//! The two parameters are linked by `theta = exp(epsilon)` and held in
//! [`TieParams`], estimated once from labelled pairs by [`estimate_theta`]
//! using the moment formula `theta = 2 * n_pairs / n_untied - 1`.
//!
//! Note on the Rao-Kupper tie term: the tie numerator uses the factor
//! `theta^2 - 1`. This is the unique choice under which the three
//! probabilities sum to one for every `theta >= 1` (the occasionally-seen
//! `(theta - 1)^2` variant does not normalise). A final renormalisation is
//! applied anyway and is asserted to be a no-op.

// published erf coefficients and reference tables stay verbatim
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Tie parameter shared by both preference models.
///
/// Holds `theta >= 1` and `epsilon = ln(theta) >= 0` together so that either
/// parameterisation is available without recomputation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieParams {
    theta: f64,
    epsilon: f64,
}

impl TieParams {
    /// Construct from `theta`; fails unless `theta >= 1` and finite.
    pub fn from_theta(theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta < 1.0 {
            return Err(Error::invalid(format!(
                "tie parameter theta must be finite and >= 1, got {theta}"
            )));
        }
        Ok(TieParams {
            theta,
            epsilon: theta.ln(),
        })
    }

    /// Construct from `epsilon`; fails unless `epsilon >= 0` and finite.
    pub fn from_epsilon(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::invalid(format!(
                "tie parameter epsilon must be finite and >= 0, got {epsilon}"
            )));
        }
        Ok(TieParams {
            theta: epsilon.exp(),
            epsilon,
        })
    }

    /// `theta = 1`, `epsilon = 0`: ties have probability zero.
    pub fn tieless() -> Self {
        TieParams {
            theta: 1.0,
            epsilon: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Estimate the tie parameter from pair labels: `theta = 2 n / n_untied - 1`.
///
/// Since `n_untied <= n`, the estimate is automatically `>= 1`. Fails with
/// [`Error::AllPairsTied`] when no untied pair exists (the ratio is
/// undefined), which also covers the empty list.
pub fn estimate_theta(labels: &[i8]) -> Result<TieParams> {
    let n_pairs = labels.len();
    let n_untied = labels.iter().filter(|&&y| y != 0).count();
    if n_untied == 0 {
        return Err(Error::AllPairsTied);
    }
    let theta = 2.0 * n_pairs as f64 / n_untied as f64 - 1.0;
    TieParams::from_theta(theta)
}

/// Conditional distribution of the pairwise outcome `y ∈ {-1, 0, +1}`.
///
/// Entries are non-negative and sum to one (within floating-point rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseProbs {
    /// Probability that the second item is preferred (`y = -1`).
    pub p_minus: f64,
    /// Probability of a tie (`y = 0`).
    pub p_zero: f64,
    /// Probability that the first item is preferred (`y = +1`).
    pub p_plus: f64,
}

impl PairwiseProbs {
    /// Probability of a specific outcome.
    ///
    /// # Panics
    /// Panics if `y` is not one of `-1, 0, +1`.
    pub fn prob(&self, y: i8) -> f64 {
        match y {
            -1 => self.p_minus,
            0 => self.p_zero,
            1 => self.p_plus,
            _ => panic!("pairwise outcome must be -1, 0 or +1, got {y}"),
        }
    }

    /// The distribution for the pair in the opposite orientation.
    pub fn swapped(&self) -> Self {
        PairwiseProbs {
            p_minus: self.p_plus,
            p_zero: self.p_zero,
            p_plus: self.p_minus,
        }
    }

    /// Check the simplex invariant within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let in_range = |p: f64| p >= -tol && p <= 1.0 + tol;
        in_range(self.p_minus)
            && in_range(self.p_zero)
            && in_range(self.p_plus)
            && ((self.p_minus + self.p_zero + self.p_plus) - 1.0).abs() <= tol
    }
}

/// Which preference model converts scores to probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    BradleyTerry,
    ThurstoneMosteller,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::BradleyTerry => "bt",
            ModelKind::ThurstoneMosteller => "tm",
        }
    }

    /// Convert a score pair under this model. `tie` is pre-validated, so the
    /// conversion cannot fail on parameter range; non-finite scores panic in
    /// debug builds.
    pub fn probs(&self, s: f64, s_prime: f64, tie: TieParams) -> PairwiseProbs {
        debug_assert!(
            s.is_finite() && s_prime.is_finite(),
            "scores must be finite"
        );
        match self {
            ModelKind::BradleyTerry => bt_probs_unchecked(s, s_prime, tie.theta()),
            ModelKind::ThurstoneMosteller => tm_probs_unchecked(s, s_prime, tie.epsilon()),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bt" => Ok(ModelKind::BradleyTerry),
            "tm" => Ok(ModelKind::ThurstoneMosteller),
            other => Err(Error::invalid(format!(
                "unknown model kind '{other}' (expected bt|tm)"
            ))),
        }
    }
}

/// Bradley-Terry with ties (Rao-Kupper form).
///
/// With `a = e^s`, `b = e^(s')`:
///
/// ```text
/// p_plus  = a / (a + theta*b)
/// p_minus = b / (b + theta*a)
/// p_zero  = (theta^2 - 1) * a * b / ((theta*a + b) * (a + theta*b))
/// ```
///
/// The exponentials are stabilised by subtracting `max(s, s')`, so score
/// differences up to several hundred neither overflow nor lose the simplex
/// property.
pub fn bt_probs(s: f64, s_prime: f64, theta: f64) -> Result<PairwiseProbs> {
    if !s.is_finite() || !s_prime.is_finite() {
        return Err(Error::invalid("scores must be finite"));
    }
    if !theta.is_finite() || theta < 1.0 {
        return Err(Error::invalid(format!(
            "theta must be finite and >= 1, got {theta}"
        )));
    }
    Ok(bt_probs_unchecked(s, s_prime, theta))
}

fn bt_probs_unchecked(s: f64, s_prime: f64, theta: f64) -> PairwiseProbs {
    let shift = s.max(s_prime);
    let a = (s - shift).exp();
    let b = (s_prime - shift).exp();
    let p_plus = a / (a + theta * b);
    let p_minus = b / (b + theta * a);
    let p_zero = ((theta * theta - 1.0) * a * b) / ((theta * a + b) * (a + theta * b));
    // the theta^2 - 1 tie factor makes the sum 1 up to rounding; the final
    // division must be a no-op beyond that
    let sum = p_minus + p_zero + p_plus;
    debug_assert!(
        (sum - 1.0).abs() <= 1e-12,
        "Rao-Kupper probabilities must already sum to 1, got {sum}"
    );
    PairwiseProbs {
        p_minus: p_minus / sum,
        p_zero: p_zero / sum,
        p_plus: p_plus / sum,
    }
}

/// Thurstone-Mosteller with ties.
///
/// With `d = s - s'`:
///
/// ```text
/// p_plus  = Phi(d - eps)
/// p_minus = Phi(-d - eps)
/// p_zero  = Phi(d + eps) - Phi(d - eps)
/// ```
///
/// The three terms sum to one by `Phi(-z) = 1 - Phi(z)`.
pub fn tm_probs(s: f64, s_prime: f64, epsilon: f64) -> Result<PairwiseProbs> {
    if !s.is_finite() || !s_prime.is_finite() {
        return Err(Error::invalid("scores must be finite"));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::invalid(format!(
            "epsilon must be finite and >= 0, got {epsilon}"
        )));
    }
    Ok(tm_probs_unchecked(s, s_prime, epsilon))
}

fn tm_probs_unchecked(s: f64, s_prime: f64, epsilon: f64) -> PairwiseProbs {
    let d = s - s_prime;
    let p_plus = std_normal_cdf(d - epsilon);
    let p_minus = std_normal_cdf(-d - epsilon);
    // Phi is monotone, so the raw difference is non-negative; the clamp only
    // swallows a stray negative ulp.
    let p_zero = (std_normal_cdf(d + epsilon) - p_plus).max(0.0);
    PairwiseProbs {
        p_minus,
        p_zero,
        p_plus,
    }
}

/// The label with the largest probability, with symmetric tie-breaking.
///
/// Any tie that involves the maximum resolves to `0`: this is the one
/// deterministic rule that preserves `predict(swapped) = -predict` exactly,
/// and all argmax ties are risk-equivalent under 0-1 loss.
pub fn predict_label(p: PairwiseProbs) -> i8 {
    if p.p_plus > p.p_minus && p.p_plus > p.p_zero {
        1
    } else if p.p_minus > p.p_plus && p.p_minus > p.p_zero {
        -1
    } else {
        0
    }
}

/// Standard normal CDF, `Phi(z) = erfc(-z / sqrt(2)) / 2`.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

// Rational minimax approximation of erf/erfc after W. J. Cody,
// "Rational Chebyshev approximation for the error function" (1969),
// as tabulated in the SPECFUN reference implementation. Relative error
// is a few ulps across the whole double range.

const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];
const ERF_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERF_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];
const ERF_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERF_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

const ERF_THRESH: f64 = 0.46875;
const FRAC_1_SQRT_PI: f64 = 5.641_895_835_477_562_9e-1;
// erfc underflows to zero beyond this argument.
const ERFC_XBIG: f64 = 26.543;

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() <= ERF_THRESH {
        erf_central(x)
    } else {
        let tail = 1.0 - erfc_tail(x.abs());
        if x < 0.0 {
            -tail
        } else {
            tail
        }
    }
}

/// Complementary error function, `erfc(x) = 1 - erf(x)`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() <= ERF_THRESH {
        1.0 - erf_central(x)
    } else if x < 0.0 {
        2.0 - erfc_tail(-x)
    } else {
        erfc_tail(x)
    }
}

/// erf on the central interval |x| <= 0.46875.
fn erf_central(x: f64) -> f64 {
    let z = if x.abs() > 1e-10 { x * x } else { 0.0 };
    let mut num = ERF_A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + ERF_A[i]) * z;
        den = (den + ERF_B[i]) * z;
    }
    x * (num + ERF_A[3]) / (den + ERF_B[3])
}

/// erfc for y > 0.46875.
fn erfc_tail(y: f64) -> f64 {
    if y > ERFC_XBIG {
        return 0.0;
    }
    let ratio = if y <= 4.0 {
        let mut num = ERF_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERF_C[i]) * y;
            den = (den + ERF_D[i]) * y;
        }
        (num + ERF_C[7]) / (den + ERF_D[7])
    } else {
        let z = 1.0 / (y * y);
        let mut num = ERF_P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + ERF_P[i]) * z;
            den = (den + ERF_Q[i]) * z;
        }
        let r = z * (num + ERF_P[4]) / (den + ERF_Q[4]);
        (FRAC_1_SQRT_PI - r) / y
    };
    // Split exp(-y^2) as exp(-t^2) * exp(-(y-t)(y+t)) with t a 1/16-grid
    // truncation of y; keeps the product accurate for large arguments.
    let t = (y * 16.0).trunc() / 16.0;
    let del = (y - t) * (y + t);
    (-t * t).exp() * (-del).exp() * ratio
}
