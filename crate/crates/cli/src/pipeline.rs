//! Shared stage logic: loading splits, resolving scores, computing the
//! per-pair statistics that calibration and evaluation consume.

use std::path::Path;

use baltor_core::{
    data,
    eval::{self},
    probmodel::ModelKind,
    scorer::Standardizer,
    Dataset, PairInstance, PairwiseProbs, ScoreModel, TieParams,
};

use crate::args::ScorerSpec;
use crate::error::{CliError, CliResult};
use crate::files::read_to_string;

pub struct Split {
    pub dataset: Dataset,
    pub pairs: Vec<PairInstance>,
}

pub fn load_split(path: &Path) -> CliResult<Split> {
    let text = read_to_string(path)?;
    let dataset = data::parse_letor(&text).map_err(CliError::Core)?;
    let pairs = data::enumerate_all_pairs(&dataset);
    Ok(Split { dataset, pairs })
}

/// Produce row-aligned scores for a split: either from the trained builtin
/// model (validating the feature dimension) or from an external score file.
pub fn resolve_scores(
    dataset: &Dataset,
    builtin: Option<&ScoreModel>,
    external: Option<&Path>,
    standardizer: Option<&Standardizer>,
) -> CliResult<Vec<f64>> {
    let mut scores = match (builtin, external) {
        (_, Some(path)) => {
            let text = read_to_string(path)?;
            baltor_core::load_external_scores(&text, dataset.len()).map_err(CliError::Core)?
        }
        (Some(model), None) => {
            if dataset.feature_dim != model.weights.len() {
                return Err(CliError::schema(format!(
                    "dataset has {} features but the model expects {}",
                    dataset.feature_dim,
                    model.weights.len()
                )));
            }
            model.score_all(dataset).map_err(CliError::Core)?
        }
        (None, None) => {
            return Err(CliError::schema(
                "the model is external: supply --scorer external:PATH for this split",
            ))
        }
    };
    if let Some(st) = standardizer {
        st.apply_all(&mut scores);
    }
    Ok(scores)
}

/// The external score path for one stage, given the `--scorer` flag. In fold
/// mode the flag points at a directory mirroring the data layout.
pub fn external_for_stage(
    scorer: &Option<ScorerSpec>,
    fold_name: Option<&str>,
    stage: &str,
) -> Option<std::path::PathBuf> {
    match scorer {
        Some(ScorerSpec::External(base)) => Some(match fold_name {
            Some(fold) if fold != "-" => base.join(fold).join(format!("{stage}.txt")),
            _ => {
                if base.is_dir() {
                    base.join(format!("{stage}.txt"))
                } else {
                    base.clone()
                }
            }
        }),
        _ => None,
    }
}

/// Per-pair statistic columns used throughout calibration and evaluation.
pub struct PairStats {
    pub labels: Vec<i8>,
    pub keys: Vec<baltor_core::PairKey>,
    pub probs: Vec<PairwiseProbs>,
}

pub fn pair_stats(split: &Split, scores: &[f64], model: ModelKind, tie: TieParams) -> PairStats {
    PairStats {
        labels: eval::pair_labels(&split.pairs),
        keys: eval::pair_keys(&split.pairs),
        probs: eval::pair_probs(model, scores, &split.pairs, tie),
    }
}
