//! Selective-ranking metrics.
//!
//! `Acc` is the fraction of correctly ranked pairs among the selected ones,
//! `Cov` the selected fraction of all pairs, and `SelRate` the per-class
//! label distribution among selected pairs. Accuracy on an empty selection
//! is reported as undefined, never as 0 or 1, so fold aggregates cannot be
//! silently corrupted.

use crate::abstain::{random_selector, PairKey, ScoreKind, SelectivePolicy};
use crate::data::PairInstance;
use crate::error::{Error, Result};
use crate::probmodel::{predict_label, ModelKind, PairwiseProbs, TieParams};
use serde::Serialize;

/// Selection method being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Balto,
    Entropy,
    Random,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Balto => "balto",
            Method::Entropy => "entropy",
            Method::Random => "random",
        }
    }

    pub fn score_kind(&self) -> Option<ScoreKind> {
        match self {
            Method::Balto => Some(ScoreKind::Risk),
            Method::Entropy => Some(ScoreKind::Entropy),
            Method::Random => None,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balto" => Ok(Method::Balto),
            "entropy" => Ok(Method::Entropy),
            "random" => Ok(Method::Random),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected balto|entropy|random)"
            ))),
        }
    }
}

fn class_index(y: i8) -> usize {
    debug_assert!((-1..=1).contains(&y));
    (y + 1) as usize
}

/// Counts from evaluating one (method, coverage) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub target_coverage: f64,
    pub n_pairs: usize,
    pub n_selected: usize,
    pub n_correct: usize,
    /// Selected-pair label counts indexed `[y = -1, y = 0, y = +1]`.
    pub selected_per_class: [usize; 3],
}

impl EvalReport {
    pub fn coverage(&self) -> f64 {
        if self.n_pairs == 0 {
            0.0
        } else {
            self.n_selected as f64 / self.n_pairs as f64
        }
    }

    /// Accuracy among selected pairs; `None` when nothing was selected.
    pub fn accuracy(&self) -> Option<f64> {
        if self.n_selected == 0 {
            None
        } else {
            Some(self.n_correct as f64 / self.n_selected as f64)
        }
    }

    /// Selective 0-1 risk, `1 - Acc`.
    pub fn selective_risk(&self) -> Option<f64> {
        self.accuracy().map(|a| 1.0 - a)
    }

    /// Per-class fraction of labels among selected pairs, `[-1, 0, +1]`.
    pub fn sel_rate(&self) -> Option<[f64; 3]> {
        if self.n_selected == 0 {
            return None;
        }
        let n = self.n_selected as f64;
        Some(self.selected_per_class.map(|c| c as f64 / n))
    }
}

/// Count metrics over aligned labels, predictions and accept decisions.
pub fn evaluate(
    target_coverage: f64,
    labels: &[i8],
    predictions: &[i8],
    accepted: &[bool],
) -> Result<EvalReport> {
    if labels.len() != predictions.len() || labels.len() != accepted.len() {
        return Err(Error::invalid(format!(
            "misaligned inputs: {} labels, {} predictions, {} decisions",
            labels.len(),
            predictions.len(),
            accepted.len()
        )));
    }
    let mut report = EvalReport {
        target_coverage,
        n_pairs: labels.len(),
        n_selected: 0,
        n_correct: 0,
        selected_per_class: [0; 3],
    };
    for ((&y, &pred), &acc) in labels.iter().zip(predictions).zip(accepted) {
        if !acc {
            continue;
        }
        report.n_selected += 1;
        report.selected_per_class[class_index(y)] += 1;
        if pred == y {
            report.n_correct += 1;
        }
    }
    Ok(report)
}

/// One cell of a coverage sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub method: Method,
    pub c: f64,
    pub report: EvalReport,
}

/// Random-abstainer baseline settings for [`sweep`].
#[derive(Debug, Clone)]
pub struct RandomBaseline {
    pub grid: Vec<f64>,
    pub seed: u64,
}

/// Evaluate calibrated policies (and optionally the random baseline) on test
/// pairs. Policies must have been calibrated on a split disjoint from the
/// test pairs. One cell per policy, plus one per random-baseline coverage.
pub fn sweep(
    labels: &[i8],
    probs: &[PairwiseProbs],
    keys: &[PairKey],
    policies: &[SelectivePolicy],
    random: Option<&RandomBaseline>,
) -> Result<Vec<SweepCell>> {
    if labels.len() != probs.len() || labels.len() != keys.len() {
        return Err(Error::invalid(
            "labels, probabilities and keys must be aligned",
        ));
    }
    let predictions: Vec<i8> = probs.iter().map(|&p| predict_label(p)).collect();
    let mut cells = Vec::new();
    for policy in policies {
        let method = match policy.kind {
            ScoreKind::Risk => Method::Balto,
            ScoreKind::Entropy => Method::Entropy,
        };
        let accepted: Vec<bool> = probs
            .iter()
            .zip(keys)
            .map(|(&p, &key)| policy.select(policy.kind.statistic(p), key))
            .collect();
        let report = evaluate(policy.target_coverage, labels, &predictions, &accepted)?;
        cells.push(SweepCell {
            method,
            c: policy.target_coverage,
            report,
        });
    }
    if let Some(random) = random {
        for (grid_idx, &c) in random.grid.iter().enumerate() {
            // one independent seeded stream per coverage level
            let accepted = random_selector(c, keys, random.seed.wrapping_add(grid_idx as u64))?;
            let report = evaluate(c, labels, &predictions, &accepted)?;
            cells.push(SweepCell {
                method: Method::Random,
                c,
                report,
            });
        }
    }
    Ok(cells)
}

/// Convert score columns to pairwise outcome distributions for a pair list.
pub fn pair_probs(
    kind: ModelKind,
    scores: &[f64],
    pairs: &[PairInstance],
    tie: TieParams,
) -> Vec<PairwiseProbs> {
    pairs
        .iter()
        .map(|p| kind.probs(scores[p.i], scores[p.j], tie))
        .collect()
}

/// Canonical selection keys for a pair list.
pub fn pair_keys(pairs: &[PairInstance]) -> Vec<PairKey> {
    pairs
        .iter()
        .map(|p| PairKey::new(p.i as u64, p.j as u64))
        .collect()
}

/// Labels of a pair list.
pub fn pair_labels(pairs: &[PairInstance]) -> Vec<i8> {
    pairs.iter().map(|p| p.label).collect()
}

/// Mean and sample standard deviation of each metric over folds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub n_folds: usize,
    /// Number of folds where accuracy was defined (non-empty selection).
    pub n_acc_defined: usize,
    /// Set when only one fold contributed: the std is 0 by construction.
    pub single_fold: bool,
    pub mean_cov: f64,
    pub std_cov: f64,
    pub mean_acc: Option<f64>,
    pub std_acc: Option<f64>,
    pub mean_sel_rate: Option<[f64; 3]>,
    pub std_sel_rate: Option<[f64; 3]>,
    pub mean_n_pairs: f64,
    pub mean_n_selected: f64,
}

impl Aggregate {
    pub fn mean_sel_risk(&self) -> Option<f64> {
        self.mean_acc.map(|a| 1.0 - a)
    }

    /// Identical to the accuracy std: risk is an affine image of accuracy.
    pub fn std_sel_risk(&self) -> Option<f64> {
        self.std_acc
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregate reports of the same (method, coverage) cell across folds with
/// an unbiased (n-1) standard deviation. Folds with an undefined accuracy
/// are excluded from the accuracy and SelRate statistics but still counted
/// in coverage.
pub fn aggregate_folds(reports: &[&EvalReport]) -> Result<Aggregate> {
    if reports.is_empty() {
        return Err(Error::invalid("cannot aggregate an empty report group"));
    }
    let covs: Vec<f64> = reports.iter().map(|r| r.coverage()).collect();
    let (mean_cov, std_cov) = mean_std(&covs);
    let accs: Vec<f64> = reports.iter().filter_map(|r| r.accuracy()).collect();
    let (mean_acc, std_acc) = if accs.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_std(&accs);
        (Some(m), Some(s))
    };
    let rates: Vec<[f64; 3]> = reports.iter().filter_map(|r| r.sel_rate()).collect();
    let (mean_sel_rate, std_sel_rate) = if rates.is_empty() {
        (None, None)
    } else {
        let mut mean = [0.0; 3];
        let mut std = [0.0; 3];
        for k in 0..3 {
            let col: Vec<f64> = rates.iter().map(|r| r[k]).collect();
            let (m, s) = mean_std(&col);
            mean[k] = m;
            std[k] = s;
        }
        (Some(mean), Some(std))
    };
    let (mean_n_pairs, _) = mean_std(&reports.iter().map(|r| r.n_pairs as f64).collect::<Vec<_>>());
    let (mean_n_selected, _) = mean_std(
        &reports
            .iter()
            .map(|r| r.n_selected as f64)
            .collect::<Vec<_>>(),
    );
    Ok(Aggregate {
        n_folds: reports.len(),
        n_acc_defined: accs.len(),
        single_fold: reports.len() == 1,
        mean_cov,
        std_cov,
        mean_acc,
        std_acc,
        mean_sel_rate,
        std_sel_rate,
        mean_n_pairs,
        mean_n_selected,
    })
}

/// Header of the report CSV. The trailing `cov_gap` column is `|cov - c|`
/// for quick coverage audits.
pub const CSV_HEADER: &str =
    "method,fold,c,cov,acc,sel_risk,selrate_minus,selrate_zero,selrate_plus,n_pairs,n_selected,cov_gap";

/// One row of the report CSV / JSON mirror.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub method: String,
    pub fold: String,
    pub c: f64,
    pub cov: f64,
    pub acc: Option<f64>,
    pub sel_risk: Option<f64>,
    pub selrate_minus: Option<f64>,
    pub selrate_zero: Option<f64>,
    pub selrate_plus: Option<f64>,
    pub n_pairs: f64,
    pub n_selected: f64,
    pub cov_gap: f64,
}

impl ReportRow {
    pub fn from_report(method: Method, fold: &str, report: &EvalReport) -> Self {
        let rate = report.sel_rate();
        ReportRow {
            method: method.as_str().to_string(),
            fold: fold.to_string(),
            c: report.target_coverage,
            cov: report.coverage(),
            acc: report.accuracy(),
            sel_risk: report.selective_risk(),
            selrate_minus: rate.map(|r| r[0]),
            selrate_zero: rate.map(|r| r[1]),
            selrate_plus: rate.map(|r| r[2]),
            n_pairs: report.n_pairs as f64,
            n_selected: report.n_selected as f64,
            cov_gap: (report.coverage() - report.target_coverage).abs(),
        }
    }

    /// Mean and std rows (fold columns "mean" and "std") for a fold group.
    pub fn from_aggregate(method: Method, c: f64, agg: &Aggregate) -> (Self, Self) {
        let mean = ReportRow {
            method: method.as_str().to_string(),
            fold: "mean".to_string(),
            c,
            cov: agg.mean_cov,
            acc: agg.mean_acc,
            sel_risk: agg.mean_sel_risk(),
            selrate_minus: agg.mean_sel_rate.map(|r| r[0]),
            selrate_zero: agg.mean_sel_rate.map(|r| r[1]),
            selrate_plus: agg.mean_sel_rate.map(|r| r[2]),
            n_pairs: agg.mean_n_pairs,
            n_selected: agg.mean_n_selected,
            cov_gap: (agg.mean_cov - c).abs(),
        };
        let std = ReportRow {
            method: method.as_str().to_string(),
            fold: "std".to_string(),
            c,
            cov: agg.std_cov,
            acc: agg.std_acc,
            sel_risk: agg.std_sel_risk(),
            selrate_minus: agg.std_sel_rate.map(|r| r[0]),
            selrate_zero: agg.std_sel_rate.map(|r| r[1]),
            selrate_plus: agg.std_sel_rate.map(|r| r[2]),
            n_pairs: 0.0,
            n_selected: 0.0,
            cov_gap: agg.std_cov,
        };
        (mean, std)
    }

    pub fn to_csv_line(&self) -> String {
        fn num(v: f64) -> String {
            format!("{v:.6}")
        }
        fn opt(v: Option<f64>) -> String {
            v.map_or_else(|| "NA".to_string(), num)
        }
        fn count(v: f64) -> String {
            if v.fract() == 0.0 {
                format!("{}", v as i64)
            } else {
                format!("{v:.2}")
            }
        }
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.method,
            self.fold,
            num(self.c),
            num(self.cov),
            opt(self.acc),
            opt(self.sel_risk),
            opt(self.selrate_minus),
            opt(self.selrate_zero),
            opt(self.selrate_plus),
            count(self.n_pairs),
            count(self.n_selected),
            num(self.cov_gap),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstain::{calibrate_threshold, SelectionMode};
    use approx::assert_abs_diff_eq;

    #[test]
    fn evaluate_counts() {
        // 4 pairs, 2 accepted with labels {+1, 0} and predictions {+1, -1}
        let labels = [1i8, 0, -1, 1];
        let predictions = [1i8, -1, -1, -1];
        let accepted = [true, true, false, false];
        let r = evaluate(0.5, &labels, &predictions, &accepted).unwrap();
        assert_eq!(r.n_pairs, 4);
        assert_eq!(r.n_selected, 2);
        assert_abs_diff_eq!(r.coverage(), 0.5);
        assert_abs_diff_eq!(r.accuracy().unwrap(), 0.5);
        assert_eq!(r.sel_rate().unwrap(), [0.0, 0.5, 0.5]);
    }

    #[test]
    fn evaluate_all_and_none() {
        let labels = [1i8, -1];
        let all = evaluate(1.0, &labels, &labels, &[true, true]).unwrap();
        assert_eq!(all.accuracy(), Some(1.0));
        assert_eq!(all.coverage(), 1.0);
        let none = evaluate(0.5, &labels, &labels, &[false, false]).unwrap();
        assert_eq!(none.coverage(), 0.0);
        assert_eq!(none.accuracy(), None);
        assert_eq!(none.selective_risk(), None);
        assert_eq!(none.sel_rate(), None);
    }

    #[test]
    fn evaluate_rejects_misaligned() {
        assert!(evaluate(0.5, &[1], &[1, 0], &[true]).is_err());
    }

    #[test]
    fn sweep_produces_one_cell_per_method_and_coverage() {
        let probs: Vec<PairwiseProbs> = (0..40)
            .map(|i| {
                let p = 0.35 + 0.6 * (i as f64 / 40.0);
                let rest = (1.0 - p) / 2.0;
                PairwiseProbs {
                    p_minus: rest,
                    p_zero: rest,
                    p_plus: p,
                }
            })
            .collect();
        let labels = vec![1i8; 40];
        let keys: Vec<PairKey> = (0..40).map(|i| PairKey::new(i, i + 100)).collect();
        let grid = [0.9, 0.5];
        let mut policies = Vec::new();
        for kind in [ScoreKind::Risk, ScoreKind::Entropy] {
            let values: Vec<f64> = probs.iter().map(|&p| kind.statistic(p)).collect();
            for &c in &grid {
                let cal = calibrate_threshold(&values, c).unwrap();
                policies.push(SelectivePolicy::new(
                    kind,
                    cal,
                    c,
                    SelectionMode::Deterministic,
                    0,
                ));
            }
        }
        let random = RandomBaseline {
            grid: grid.to_vec(),
            seed: 4,
        };
        let cells = sweep(&labels, &probs, &keys, &policies, Some(&random)).unwrap();
        assert_eq!(cells.len(), 6);
        for cell in &cells {
            assert_eq!(cell.report.n_pairs, 40);
            assert!(cell.report.coverage() > 0.0);
        }
        let random_cells: Vec<_> = cells
            .iter()
            .filter(|c| c.method == Method::Random)
            .collect();
        assert_eq!(random_cells.len(), 2);
        // exact count contract for the random baseline
        assert_eq!(random_cells[0].report.n_selected, 36);
        assert_eq!(random_cells[1].report.n_selected, 20);
    }

    #[test]
    fn aggregate_mean_and_sample_std() {
        let rep = |correct: usize| EvalReport {
            target_coverage: 1.0,
            n_pairs: 10,
            n_selected: 10,
            n_correct: correct,
            selected_per_class: [2, 3, 5],
        };
        let a = rep(6);
        let b = rep(8);
        let agg = aggregate_folds(&[&a, &b]).unwrap();
        assert_abs_diff_eq!(agg.mean_acc.unwrap(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(agg.std_acc.unwrap(), 0.1414213562373095, epsilon = 1e-12);
        assert!(!agg.single_fold);

        let one = aggregate_folds(&[&a]).unwrap();
        assert!(one.single_fold);
        assert_eq!(one.std_acc, Some(0.0));
        assert_eq!(one.mean_acc, Some(0.6));

        let identical = aggregate_folds(&[&a, &a, &a]).unwrap();
        assert_eq!(identical.std_acc, Some(0.0));
        assert!(aggregate_folds(&[]).is_err());
    }

    #[test]
    fn aggregate_skips_undefined_accuracy() {
        let defined = EvalReport {
            target_coverage: 0.5,
            n_pairs: 4,
            n_selected: 2,
            n_correct: 1,
            selected_per_class: [1, 1, 0],
        };
        let empty = EvalReport {
            target_coverage: 0.5,
            n_pairs: 4,
            n_selected: 0,
            n_correct: 0,
            selected_per_class: [0, 0, 0],
        };
        let agg = aggregate_folds(&[&defined, &empty]).unwrap();
        assert_eq!(agg.n_acc_defined, 1);
        assert_eq!(agg.mean_acc, Some(0.5));
    }

    #[test]
    fn csv_row_formats_na() {
        let empty = EvalReport {
            target_coverage: 0.7,
            n_pairs: 4,
            n_selected: 0,
            n_correct: 0,
            selected_per_class: [0, 0, 0],
        };
        let row = ReportRow::from_report(Method::Balto, "Fold1", &empty);
        let line = row.to_csv_line();
        assert!(line.starts_with("balto,Fold1,0.700000,0.000000,NA,NA,"));
        assert_eq!(line.split(',').count(), CSV_HEADER.split(',').count());
    }
}
