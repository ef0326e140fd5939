//! Bounded-abstention pairwise learning to rank.
//!
//! Given a ranking dataset and per-item scores, this crate turns score pairs
//! into tie-aware preference probabilities (Bradley-Terry or
//! Thurstone-Mosteller), calibrates a conditional-risk threshold at a target
//! coverage on a held-out split, abstains on low-confidence pairs, and
//! measures selective accuracy, coverage and per-class selection rates.
//! A finite-world oracle verifies that the threshold construction is optimal
//! by exhaustive search.
//!
//! Module map:
//!
//! * [`data`]: LETOR/SVMLight parsing, query grouping, pair enumeration,
//!   seeded synthetic data;
//! * [`scorer`]: a built-in linear pairwise-logistic ranker and external
//!   score ingestion;
//! * [`probmodel`]: tie-aware preference probabilities and the tie
//!   parameter estimate;
//! * [`abstain`]: conditional risk, quantile calibration, deterministic and
//!   boundary-randomized selectors, baselines;
//! * [`eval`]: selective metrics, coverage sweeps, fold aggregation;
//! * [`oracle`]: finite worlds, the optimal selector, and the exhaustive
//!   search that checks it.

pub mod abstain;
pub mod data;
pub mod error;
pub mod eval;
pub mod oracle;
pub mod probmodel;
pub mod scorer;

pub use abstain::{
    calibrate_threshold, conditional_risk, entropy, random_selector, Calibration, PairKey,
    ScoreKind, SelectionMode, SelectivePolicy,
};
pub use data::{
    enumerate_all_pairs, enumerate_pairs, format_letor, group_by_query, pair_label, parse_letor,
    split_dataset, synth_generate, Dataset, PairInstance, QueryGroup, Row, SynthConfig,
};
pub use error::{Error, Result};
pub use eval::{
    aggregate_folds, evaluate, sweep, Aggregate, EvalReport, Method, RandomBaseline, ReportRow,
    SweepCell,
};
pub use oracle::{
    brute_force_optimum, coverage, random_world, selective_risk, theorem_selector,
    verify_conditions, ConditionReport, FiniteWorld, LossKind, SelectionVector,
};
pub use probmodel::{
    bt_probs, erf, erfc, estimate_theta, predict_label, std_normal_cdf, tm_probs, ModelKind,
    PairwiseProbs, TieParams,
};
pub use scorer::{
    load_external_scores, pairwise_logistic_loss, train_linear_ranker, LossGrad, ScoreModel,
    Standardizer, TrainConfig, TrainOutput,
};
