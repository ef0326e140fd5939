//! On-disk artifact formats: the model file and the policies file are flat
//! key-value text (with `#` comment lines carrying the resolved config), and
//! data paths resolve to single files, single fold directories, or a
//! directory of Fold*/ subdirectories.

use std::path::{Path, PathBuf};

use baltor_core::{
    eval::Method, probmodel::ModelKind, scorer::Standardizer, ScoreModel, SelectivePolicy,
    TieParams,
};

use crate::error::{CliError, CliResult};

pub fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

// ---------------------------------------------------------------------------
// Data layout
// ---------------------------------------------------------------------------

/// One fold's split files.
#[derive(Debug, Clone)]
pub struct FoldPaths {
    pub name: String,
    pub train: PathBuf,
    pub vali: PathBuf,
    pub test: PathBuf,
}

#[derive(Debug, Clone)]
pub enum DataLayout {
    /// A single data file.
    File(PathBuf),
    /// A directory with train.txt / vali.txt / test.txt.
    Split(FoldPaths),
    /// A directory of Fold*/ subdirectories, sorted by name.
    Folds(Vec<FoldPaths>),
}

pub fn discover_layout(data: &Path) -> CliResult<DataLayout> {
    if data.is_file() {
        return Ok(DataLayout::File(data.to_path_buf()));
    }
    if !data.is_dir() {
        return Err(CliError::MissingInput(data.to_path_buf()));
    }
    let split = split_paths(data, "-");
    if split.train.is_file() || split.vali.is_file() || split.test.is_file() {
        return Ok(DataLayout::Split(split));
    }
    let mut folds: Vec<FoldPaths> = Vec::new();
    let entries = std::fs::read_dir(data).map_err(|e| CliError::io(data, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(data, e))?;
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().to_string();
        if path.is_dir() && name.to_ascii_lowercase().starts_with("fold") {
            folds.push(split_paths(&path, &name));
        }
    }
    if folds.is_empty() {
        return Err(CliError::MissingInput(data.join("train.txt")));
    }
    folds.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(DataLayout::Folds(folds))
}

fn split_paths(dir: &Path, name: &str) -> FoldPaths {
    FoldPaths {
        name: name.to_string(),
        train: dir.join("train.txt"),
        vali: dir.join("vali.txt"),
        test: dir.join("test.txt"),
    }
}

/// Resolve the file for one pipeline stage: a bare file is used as-is, a
/// split directory supplies the stage's conventional file. Fold directories
/// must be handled by the caller.
pub fn stage_file(data: &Path, stage: &str) -> CliResult<PathBuf> {
    match discover_layout(data)? {
        DataLayout::File(p) => Ok(p),
        DataLayout::Split(split) => Ok(match stage {
            "train" => split.train,
            "vali" => split.vali,
            "test" => split.test,
            other => unreachable!("unknown stage {other}"),
        }),
        DataLayout::Folds(_) => Err(CliError::usage(format!(
            "{} holds multiple folds; point --data at one fold (e.g. {}/Fold1)",
            data.display(),
            data.display()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

/// Trained-scorer artifact handed from `train` to `calibrate`/`sweep`.
#[derive(Debug, Clone)]
pub struct ModelFile {
    /// "builtin" or "external".
    pub scorer_kind: String,
    pub dim: usize,
    pub tie: TieParams,
    pub theta_source: String,
    pub standardizer: Option<Standardizer>,
    pub model: Option<ScoreModel>,
    pub loss_trace: Vec<f64>,
    /// `key = value` config echo, written as `config_<key>` entries.
    pub config: Vec<(String, String)>,
}

impl ModelFile {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# baltor score model\n");
        out.push_str(&format!("scorer = {}\n", self.scorer_kind));
        out.push_str(&format!("dim = {}\n", self.dim));
        out.push_str(&format!("theta = {}\n", self.tie.theta()));
        out.push_str(&format!("epsilon = {}\n", self.tie.epsilon()));
        out.push_str(&format!("theta_source = {}\n", self.theta_source));
        match &self.standardizer {
            Some(st) => {
                out.push_str("standardize = true\n");
                out.push_str(&format!("score_mean = {}\n", st.mean));
                out.push_str(&format!("score_sd = {}\n", st.sd));
            }
            None => out.push_str("standardize = false\n"),
        }
        if let Some(model) = &self.model {
            out.push_str(&format!("bias = {}\n", model.bias));
            out.push_str("weights =");
            for w in &model.weights {
                out.push_str(&format!(" {w}"));
            }
            out.push('\n');
        }
        if !self.loss_trace.is_empty() {
            out.push_str("loss_trace =");
            for l in &self.loss_trace {
                out.push_str(&format!(" {l}"));
            }
            out.push('\n');
        }
        for (key, value) in &self.config {
            out.push_str(&format!("config_{key} = {value}\n"));
        }
        out
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let mut scorer_kind = None;
        let mut dim = None;
        let mut theta = None;
        let mut theta_source = String::from("auto");
        let mut standardize = false;
        let mut score_mean = None;
        let mut score_sd = None;
        let mut bias = None;
        let mut weights: Option<Vec<f64>> = None;
        let mut loss_trace = Vec::new();
        let mut config = Vec::new();

        let bad = |msg: String| CliError::schema(format!("{}: {msg}", path.display()));
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let numbers = |v: &str| -> CliResult<Vec<f64>> {
                v.split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|e| bad(format!("bad number '{t}': {e}")))
                    })
                    .collect()
            };
            match key {
                "scorer" => scorer_kind = Some(value.to_string()),
                "dim" => {
                    dim = Some(
                        value
                            .parse::<usize>()
                            .map_err(|e| bad(format!("bad dim: {e}")))?,
                    )
                }
                "theta" => theta = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "epsilon" => {} // derived from theta
                "theta_source" => theta_source = value.to_string(),
                "standardize" => standardize = value == "true",
                "score_mean" => {
                    score_mean = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?)
                }
                "score_sd" => {
                    score_sd = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?)
                }
                "bias" => bias = Some(value.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                "weights" => weights = Some(numbers(value)?),
                "loss_trace" => loss_trace = numbers(value)?,
                other => {
                    if let Some(cfg_key) = other.strip_prefix("config_") {
                        config.push((cfg_key.to_string(), value.to_string()));
                    } else {
                        return Err(bad(format!("unknown model key '{other}'")));
                    }
                }
            }
        }

        let scorer_kind = scorer_kind.ok_or_else(|| bad("missing 'scorer'".into()))?;
        let dim = dim.ok_or_else(|| bad("missing 'dim'".into()))?;
        let theta = theta.ok_or_else(|| bad("missing 'theta'".into()))?;
        let tie = TieParams::from_theta(theta).map_err(CliError::Core)?;
        let standardizer = if standardize {
            Some(Standardizer {
                mean: score_mean.ok_or_else(|| bad("standardize without score_mean".into()))?,
                sd: score_sd.ok_or_else(|| bad("standardize without score_sd".into()))?,
            })
        } else {
            None
        };
        let model = match weights {
            Some(weights) => {
                if weights.len() != dim {
                    return Err(bad(format!("{} weights for dim {dim}", weights.len())));
                }
                Some(ScoreModel {
                    weights,
                    bias: bias.unwrap_or(0.0),
                })
            }
            None => None,
        };
        if scorer_kind == "builtin" && model.is_none() {
            return Err(bad("builtin scorer without weights".into()));
        }
        Ok(ModelFile {
            scorer_kind,
            dim,
            tie,
            theta_source,
            standardizer,
            model,
            loss_trace,
            config,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_to_string(path)?, path)
    }
}

// ---------------------------------------------------------------------------
// Policies file
// ---------------------------------------------------------------------------

/// One calibrated policy plus the method and probability model it belongs to.
#[derive(Debug, Clone)]
pub struct PolicyRecord {
    pub method: Method,
    pub model: ModelKind,
    pub policy: SelectivePolicy,
}

pub fn policies_to_text(records: &[PolicyRecord], config: &[(String, String)]) -> String {
    let mut out = String::from("# baltor selection policies\n");
    for (key, value) in config {
        out.push_str(&format!("# config {key} = {value}\n"));
    }
    for record in records {
        out.push('\n');
        out.push_str(&format!("method = {}\n", record.method.as_str()));
        out.push_str(&format!("model = {}\n", record.model.as_str()));
        out.push_str(&record.policy.to_kv());
    }
    out
}

pub fn parse_policies(text: &str, path: &Path) -> CliResult<Vec<PolicyRecord>> {
    let mut records = Vec::new();
    // records are blank-line separated blocks
    for block in text.split("\n\n") {
        let mut method = None;
        let mut model = None;
        let mut policy_lines = Vec::new();
        for line in block.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(v) = trimmed.strip_prefix("method") {
                method = Some(
                    v.trim_start_matches([' ', '='])
                        .trim()
                        .parse::<Method>()
                        .map_err(CliError::Core)?,
                );
            } else if let Some(v) = trimmed.strip_prefix("model") {
                model = Some(
                    v.trim_start_matches([' ', '='])
                        .trim()
                        .parse::<ModelKind>()
                        .map_err(CliError::Core)?,
                );
            } else {
                policy_lines.push(trimmed);
            }
        }
        if policy_lines.is_empty() && method.is_none() {
            continue; // header-only block
        }
        let method = method.ok_or_else(|| {
            CliError::schema(format!("{}: policy record without method", path.display()))
        })?;
        let model = model.ok_or_else(|| {
            CliError::schema(format!("{}: policy record without model", path.display()))
        })?;
        let policy = SelectivePolicy::from_kv(&policy_lines.join("\n")).map_err(CliError::Core)?;
        records.push(PolicyRecord {
            method,
            model,
            policy,
        });
    }
    if records.is_empty() {
        return Err(CliError::schema(format!(
            "{}: no policy records found",
            path.display()
        )));
    }
    Ok(records)
}

pub fn load_policies(path: &Path) -> CliResult<Vec<PolicyRecord>> {
    parse_policies(&read_to_string(path)?, path)
}
