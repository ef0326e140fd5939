use std::fmt::Write as _;
use std::path::Path;

use baltor_core::{
    abstain::calibrate_threshold,
    data::{format_letor, split_dataset, synth_generate, SynthConfig},
    eval::{self, aggregate_folds, Method, ReportRow, CSV_HEADER},
    oracle::{
        brute_force_optimum, coverage, random_world, selective_risk, theorem_selector,
        verify_conditions, LossKind, MAX_STATES,
    },
    probmodel::{estimate_theta, ModelKind},
    scorer::{train_linear_ranker, Standardizer, TrainConfig},
    Error as CoreError, EvalReport, SelectionMode, SelectivePolicy, TieParams,
};

use crate::args::{
    parse_baselines, parse_grid, CalibrateArgs, OracleArgs, ScorerSpec, SweepArgs, SynthArgs,
    ThetaSpec, TrainArgs,
};
use crate::error::{CliError, CliResult};
use crate::files::{
    discover_layout, load_policies, policies_to_text, stage_file, write_file, DataLayout,
    FoldPaths, ModelFile, PolicyRecord,
};
use crate::pipeline::{
    external_for_stage, load_split, pair_stats, resolve_scores, PairStats, Split,
};

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let cfg = SynthConfig {
        n_queries: args.train_queries + args.cal_queries + args.test_queries,
        items_per_query: args.items,
        feature_dim: args.dim,
        n_grades: args.grades,
        noise_sd: args.noise,
        seed: args.seed,
    };
    let (dataset, weights) = synth_generate(&cfg)?;
    let parts = split_dataset(
        &dataset,
        &[args.train_queries, args.cal_queries, args.test_queries],
    )?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    for (part, name) in parts.iter().zip(["train.txt", "vali.txt", "test.txt"]) {
        write_file(&args.out.join(name), &format_letor(part))?;
    }
    let mut truth = String::new();
    for w in &weights {
        let _ = writeln!(truth, "{w}");
    }
    write_file(&args.out.join("truth.txt"), &truth)?;
    println!(
        "wrote {} ({} queries x {} items, dim {}, seed {})",
        args.out.display(),
        cfg.n_queries,
        args.items,
        args.dim,
        args.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    let train_path = stage_file(&args.data, "train")?;
    let split = load_split(&train_path)?;
    let tie = resolve_theta(&args.theta, &split)?;

    let (scorer_kind, model, loss_trace, train_scores) = match &args.scorer {
        ScorerSpec::Builtin => {
            let out = train_linear_ranker(
                &split.dataset,
                &split.pairs,
                &TrainConfig {
                    learning_rate: args.lr,
                    epochs: args.epochs,
                    batch_size: args.batch,
                    l2: args.l2,
                    seed: args.seed,
                },
            )?;
            let scores = out.model.score_all(&split.dataset)?;
            ("builtin", Some(out.model), out.loss_trace, Some(scores))
        }
        ScorerSpec::External(path) => {
            // pass-through mode: the train-split scores are only needed to
            // fit the standardizer
            let scores = if args.standardize {
                Some(resolve_scores(&split.dataset, None, Some(path), None)?)
            } else {
                None
            };
            ("external", None, Vec::new(), scores)
        }
    };

    let standardizer = if args.standardize {
        let scores = train_scores
            .as_ref()
            .expect("standardize requires train-split scores for both scorer kinds");
        Some(Standardizer::fit(scores)?)
    } else {
        None
    };

    let file = ModelFile {
        scorer_kind: scorer_kind.to_string(),
        dim: split.dataset.feature_dim,
        tie,
        theta_source: match args.theta {
            ThetaSpec::Auto => "auto".to_string(),
            ThetaSpec::Fixed(_) => "fixed".to_string(),
        },
        standardizer,
        model,
        loss_trace,
        config: vec![
            ("data".into(), train_path.display().to_string()),
            ("scorer".into(), args.scorer.to_string()),
            ("theta".into(), args.theta.to_string()),
            ("standardize".into(), args.standardize.to_string()),
            ("epochs".into(), args.epochs.to_string()),
            ("lr".into(), args.lr.to_string()),
            ("batch".into(), args.batch.to_string()),
            ("l2".into(), args.l2.to_string()),
            ("seed".into(), args.seed.to_string()),
        ],
    };
    write_file(&args.out, &file.to_text())?;
    println!(
        "trained {} scorer on {} pairs; theta = {:.6}; wrote {}",
        scorer_kind,
        split.pairs.len(),
        tie.theta(),
        args.out.display()
    );
    Ok(())
}

fn resolve_theta(spec: &ThetaSpec, train: &Split) -> CliResult<TieParams> {
    match spec {
        ThetaSpec::Fixed(v) => Ok(TieParams::from_theta(*v)?),
        ThetaSpec::Auto => {
            let labels = eval::pair_labels(&train.pairs);
            Ok(estimate_theta(&labels)?)
        }
    }
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

pub fn cmd_calibrate(args: &CalibrateArgs) -> CliResult<()> {
    let grid = parse_grid(&args.grid)?;
    let methods: Vec<Method> = parse_baselines(&args.baselines)?
        .into_iter()
        .filter(|m| m.score_kind().is_some())
        .collect();
    if methods.is_empty() {
        return Err(CliError::usage(
            "no calibratable method requested (random needs none)",
        ));
    }

    let cal_path = stage_file(&args.data, "vali")?;
    let split = load_split(&cal_path)?;
    if split.pairs.is_empty() {
        return Err(CliError::EmptyCalibration(cal_path));
    }
    let model_file = ModelFile::load(&args.ranker)?;
    let external = external_for_stage(&args.scorer, None, "vali");
    let scores = resolve_scores(
        &split.dataset,
        model_file.model.as_ref(),
        external.as_deref(),
        model_file.standardizer.as_ref(),
    )?;
    let stats = pair_stats(&split, &scores, args.model, model_file.tie);

    let records = calibrate_records(&stats, &methods, &grid, args.model, args.mode, args.seed)?;
    let config = vec![
        ("data".into(), cal_path.display().to_string()),
        ("ranker".into(), args.ranker.display().to_string()),
        ("model".into(), args.model.as_str().to_string()),
        ("grid".into(), grid_string(&grid)),
        ("mode".into(), args.mode.as_str().to_string()),
        ("theta".into(), format!("{}", model_file.tie.theta())),
        ("seed".into(), args.seed.to_string()),
    ];
    write_file(&args.out, &policies_to_text(&records, &config))?;
    println!(
        "calibrated {} policies ({} methods x {} coverages) on {} pairs; wrote {}",
        records.len(),
        methods.len(),
        grid.len(),
        split.pairs.len(),
        args.out.display()
    );
    Ok(())
}

fn calibrate_records(
    stats: &PairStats,
    methods: &[Method],
    grid: &[f64],
    model: ModelKind,
    mode: SelectionMode,
    seed: u64,
) -> CliResult<Vec<PolicyRecord>> {
    let mut records = Vec::new();
    for method in methods {
        let kind = method.score_kind().expect("random is filtered out");
        let values: Vec<f64> = stats.probs.iter().map(|&p| kind.statistic(p)).collect();
        for &c in grid {
            let cal = calibrate_threshold(&values, c)?;
            records.push(PolicyRecord {
                method: *method,
                model,
                policy: SelectivePolicy::new(kind, cal, c, mode, seed),
            });
        }
    }
    Ok(records)
}

fn grid_string(grid: &[f64]) -> String {
    grid.iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct FoldOutcome {
    name: String,
    theta: f64,
    cells: Vec<(Method, f64, EvalReport)>,
}

struct SweepRun {
    folds: Vec<FoldOutcome>,
    model_kind: ModelKind,
    mode: SelectionMode,
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let methods = parse_baselines(&args.baselines)?;

    let (run, grid) = match (&args.ranker, &args.policies) {
        (Some(ranker), Some(policies)) => sweep_with_artifacts(args, ranker, policies, &methods)?,
        (None, None) => {
            let grid = parse_grid(args.grid.as_deref().unwrap_or(crate::args::DEFAULT_GRID))?;
            (sweep_pipeline(args, &grid, &methods)?, grid)
        }
        _ => {
            return Err(CliError::usage(
                "--ranker and --policies go together; omit both to run the per-fold pipeline",
            ))
        }
    };

    let report = render_report(args, &grid, &methods, &run)?;
    let csv_path = &args.out;
    write_file(csv_path, &report.0)?;
    let json_path = csv_path.with_extension("json");
    write_file(&json_path, &report.1)?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

/// Single-fold evaluation from a trained model file and a policies file.
fn sweep_with_artifacts(
    args: &SweepArgs,
    ranker: &Path,
    policies_path: &Path,
    methods: &[Method],
) -> CliResult<(SweepRun, Vec<f64>)> {
    let model_file = ModelFile::load(ranker)?;
    let records = load_policies(policies_path)?;
    // the random baseline follows the policies' grid unless one is given
    let grid = match &args.grid {
        Some(spec) => parse_grid(spec)?,
        None => {
            let mut grid: Vec<f64> = Vec::new();
            for r in &records {
                if !grid.contains(&r.policy.target_coverage) {
                    grid.push(r.policy.target_coverage);
                }
            }
            grid
        }
    };
    let recorded_kind = records[0].model;
    if records.iter().any(|r| r.model != recorded_kind) {
        return Err(CliError::schema(format!(
            "{}: policies mix probability models",
            policies_path.display()
        )));
    }
    if let Some(requested) = args.model {
        if requested != recorded_kind {
            return Err(CliError::schema(format!(
                "policies were calibrated for model '{}' but --model {} was requested",
                recorded_kind.as_str(),
                requested.as_str()
            )));
        }
    }

    let test_path = stage_file(&args.data, "test")?;
    let split = load_split(&test_path)?;
    let external = external_for_stage(&args.scorer, None, "test");
    let scores = resolve_scores(
        &split.dataset,
        model_file.model.as_ref(),
        external.as_deref(),
        model_file.standardizer.as_ref(),
    )?;
    let stats = pair_stats(&split, &scores, recorded_kind, model_file.tie);

    let policies: Vec<SelectivePolicy> = records
        .iter()
        .filter(|r| methods.contains(&r.method))
        .map(|r| r.policy)
        .collect();
    let mode = policies.first().map_or(args.mode, |p| p.mode);
    let cells = run_cells(&stats, &policies, methods, &grid, args.seed)?;
    let outcome = FoldOutcome {
        name: "-".to_string(),
        theta: model_file.tie.theta(),
        cells,
    };
    Ok((
        SweepRun {
            folds: vec![outcome],
            model_kind: recorded_kind,
            mode,
        },
        grid,
    ))
}

/// Train + calibrate + evaluate per fold, for a fold directory layout.
fn sweep_pipeline(args: &SweepArgs, grid: &[f64], methods: &[Method]) -> CliResult<SweepRun> {
    let model_kind = args.model.unwrap_or(ModelKind::BradleyTerry);
    let fold_paths: Vec<FoldPaths> = match discover_layout(&args.data)? {
        DataLayout::Folds(folds) => folds,
        DataLayout::Split(split) => vec![split],
        DataLayout::File(path) => {
            return Err(CliError::usage(format!(
                "{} is a single file; pipeline mode needs train/vali/test splits, \
                 or pass --ranker and --policies to evaluate it directly",
                path.display()
            )))
        }
    };

    let calibratable: Vec<Method> = methods
        .iter()
        .copied()
        .filter(|m| m.score_kind().is_some())
        .collect();
    let mut outcomes = Vec::new();
    for (fold_idx, fold) in fold_paths.iter().enumerate() {
        let train = load_split(&fold.train)?;
        let cal = load_split(&fold.vali)?;
        let test = load_split(&fold.test)?;
        if cal.pairs.is_empty() {
            return Err(CliError::EmptyCalibration(fold.vali.clone()));
        }

        let tie = resolve_theta(&args.theta, &train)?;
        let fold_name = Some(fold.name.as_str());
        let (builtin, train_scores) = match &args.scorer {
            Some(ScorerSpec::External(_)) => {
                let train_scores = if args.standardize {
                    let path = external_for_stage(&args.scorer, fold_name, "train").unwrap();
                    Some(resolve_scores(&train.dataset, None, Some(&path), None)?)
                } else {
                    None
                };
                (None, train_scores)
            }
            _ => {
                let out = train_linear_ranker(
                    &train.dataset,
                    &train.pairs,
                    &TrainConfig {
                        learning_rate: args.lr,
                        epochs: args.epochs,
                        batch_size: args.batch,
                        l2: args.l2,
                        seed: args.seed,
                    },
                )?;
                let scores = out.model.score_all(&train.dataset)?;
                (Some(out.model), Some(scores))
            }
        };
        let standardizer = if args.standardize {
            Some(Standardizer::fit(
                train_scores.as_ref().expect("scores fitted above"),
            )?)
        } else {
            None
        };

        let cal_scores = resolve_scores(
            &cal.dataset,
            builtin.as_ref(),
            external_for_stage(&args.scorer, fold_name, "vali").as_deref(),
            standardizer.as_ref(),
        )?;
        let test_scores = resolve_scores(
            &test.dataset,
            builtin.as_ref(),
            external_for_stage(&args.scorer, fold_name, "test").as_deref(),
            standardizer.as_ref(),
        )?;

        let cal_stats = pair_stats(&cal, &cal_scores, model_kind, tie);
        let test_stats = pair_stats(&test, &test_scores, model_kind, tie);
        let records = calibrate_records(
            &cal_stats,
            &calibratable,
            grid,
            model_kind,
            args.mode,
            args.seed,
        )?;
        let policies: Vec<SelectivePolicy> = records.iter().map(|r| r.policy).collect();
        let seed = args.seed.wrapping_add((fold_idx as u64) << 32);
        let cells = run_cells(&test_stats, &policies, methods, grid, seed)?;
        outcomes.push(FoldOutcome {
            name: fold.name.clone(),
            theta: tie.theta(),
            cells,
        });
    }
    Ok(SweepRun {
        folds: outcomes,
        model_kind,
        mode: args.mode,
    })
}

fn run_cells(
    stats: &PairStats,
    policies: &[SelectivePolicy],
    methods: &[Method],
    grid: &[f64],
    seed: u64,
) -> CliResult<Vec<(Method, f64, EvalReport)>> {
    let random = if methods.contains(&Method::Random) {
        Some(eval::RandomBaseline {
            grid: grid.to_vec(),
            seed,
        })
    } else {
        None
    };
    let cells = eval::sweep(
        &stats.labels,
        &stats.probs,
        &stats.keys,
        policies,
        random.as_ref(),
    )?;
    Ok(cells
        .into_iter()
        .map(|cell| (cell.method, cell.c, cell.report))
        .collect())
}

/// Assemble the CSV and the JSON mirror: per-fold rows for every
/// (method, coverage) cell in canonical order, followed by mean and std rows.
fn render_report(
    args: &SweepArgs,
    grid: &[f64],
    methods: &[Method],
    run: &SweepRun,
) -> CliResult<(String, String)> {
    let folds = &run.folds;
    let mut csv = String::from("# baltor sweep report\n");
    let config: Vec<(String, String)> = vec![
        ("data".into(), args.data.display().to_string()),
        ("model".into(), run.model_kind.as_str().to_string()),
        (
            "scorer".into(),
            args.scorer
                .as_ref()
                .map_or_else(|| "builtin".to_string(), |s| s.to_string()),
        ),
        ("grid".into(), grid_string(grid)),
        ("mode".into(), run.mode.as_str().to_string()),
        (
            "baselines".into(),
            methods
                .iter()
                .map(|m| m.as_str())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("seed".into(), args.seed.to_string()),
        ("std".into(), "sample (n-1)".into()),
    ];
    for (key, value) in &config {
        let _ = writeln!(csv, "# config {key} = {value}");
    }
    for fold in folds {
        let _ = writeln!(csv, "# fold {} theta = {}", fold.name, fold.theta);
    }
    csv.push_str(CSV_HEADER);
    csv.push('\n');

    // cell keys in canonical order: methods as requested, coverages as the
    // cells produced them (grid order)
    let mut keys: Vec<(Method, f64)> = Vec::new();
    for method in methods {
        for fold in folds {
            for (m, c, _) in &fold.cells {
                if m == method && !keys.iter().any(|(km, kc)| km == m && kc == c) {
                    keys.push((*m, *c));
                }
            }
        }
    }

    let mut rows: Vec<ReportRow> = Vec::new();
    let mut aggregates = Vec::new();
    for (method, c) in &keys {
        let mut group: Vec<(&str, &EvalReport)> = Vec::new();
        for fold in folds {
            for (m, cc, report) in &fold.cells {
                if m == method && cc == c {
                    group.push((&fold.name, report));
                }
            }
        }
        for (fold_name, report) in &group {
            rows.push(ReportRow::from_report(*method, fold_name, report));
        }
        let agg = aggregate_folds(&group.iter().map(|(_, r)| *r).collect::<Vec<_>>())?;
        let (mean, std) = ReportRow::from_aggregate(*method, *c, &agg);
        rows.push(mean);
        rows.push(std);
        aggregates.push(serde_json::json!({
            "method": method.as_str(),
            "c": c,
            "aggregate": serde_json::to_value(&agg).expect("aggregate serialises"),
        }));
    }
    for row in &rows {
        csv.push_str(&row.to_csv_line());
        csv.push('\n');
    }

    let config_json: serde_json::Value = config
        .iter()
        .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
        .collect::<serde_json::Map<_, _>>()
        .into();
    let json = serde_json::json!({
        "config": config_json,
        "folds": folds.iter().map(|f| serde_json::json!({
            "name": f.name,
            "theta": f.theta,
        })).collect::<Vec<_>>(),
        "rows": rows.iter().map(|r| serde_json::to_value(r).expect("row serialises")).collect::<Vec<_>>(),
        "aggregates": aggregates,
    });
    let json_text = serde_json::to_string_pretty(&json).expect("report serialises") + "\n";
    Ok((csv, json_text))
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

pub fn cmd_oracle(args: &OracleArgs) -> CliResult<()> {
    if args.states > MAX_STATES {
        return Err(CliError::Core(CoreError::WorldTooLarge {
            m: args.states,
            max: MAX_STATES,
        }));
    }
    if args.states == 0 {
        return Err(CliError::usage("worlds need at least one state"));
    }
    if args.grid_k == 0 {
        return Err(CliError::usage("the grid resolution must be positive"));
    }
    let coverages = parse_grid(&args.coverages)?;
    let loss_kinds: Vec<LossKind> = match args.loss.as_str() {
        "zero-one" => vec![LossKind::ZeroOne],
        "random-symmetric" => vec![LossKind::RandomSymmetric],
        "both" => vec![LossKind::ZeroOne, LossKind::RandomSymmetric],
        other => {
            return Err(CliError::usage(format!(
                "unknown loss family '{other}' (expected zero-one|random-symmetric|both)"
            )))
        }
    };

    let grid_slack = 2.0 / args.grid_k as f64;
    let mut rows = String::new();
    let mut max_gap = 0.0f64;
    let mut max_residual = 0.0f64;
    let mut violations = 0usize;
    for world_idx in 0..args.worlds {
        let loss = loss_kinds[world_idx % loss_kinds.len()];
        let world = random_world(args.states, args.seed.wrapping_add(world_idx as u64), loss);
        for &c in &coverages {
            let g = theorem_selector(&world, c);
            let theorem = selective_risk(&world, &g)?;
            let cov = coverage(&world, &g);
            let feasible = cov >= c - 1e-12;
            let conditions = verify_conditions(&world, &g, c);
            let (_, brute) = brute_force_optimum(&world, c, args.grid_k)?;
            let gap = brute - theorem;
            max_gap = max_gap.max(gap);
            max_residual = max_residual.max(conditions.max_residual());
            let ok = feasible
                && theorem <= brute + 1e-9
                && brute <= theorem + grid_slack
                && conditions.max_residual() <= 1e-9;
            if !ok {
                violations += 1;
            }
            let _ = writeln!(
                rows,
                "{},{},{},{:.6},{:.12},{:.12},{:.3e},{:.12},{:.3e},{:.3e},{:.3e},{}",
                world_idx,
                args.states,
                loss.as_str(),
                c,
                theorem,
                brute,
                gap,
                cov,
                conditions.p1_residual,
                conditions.p2_residual,
                conditions.p3_residual,
                feasible
            );
        }
    }

    let summary = format!(
        "oracle summary: worlds={} states={} K={} max_gap={:.3e} max_residual={:.3e} violations={}",
        args.worlds, args.states, args.grid_k, max_gap, max_residual, violations
    );
    let mut csv = String::from("# baltor oracle report\n");
    let _ = writeln!(
        csv,
        "# config worlds={} states={} grid_k={} seed={} coverages={} loss={}",
        args.worlds,
        args.states,
        args.grid_k,
        args.seed,
        grid_string(&coverages),
        args.loss
    );
    let _ = writeln!(csv, "# {summary}");
    csv.push_str("world,m,loss,c,theorem_risk,brute_risk,gap,coverage,p1_residual,p2_residual,p3_residual,feasible\n");
    csv.push_str(&rows);
    if let Some(out) = &args.out {
        write_file(out, &csv)?;
        println!("wrote {}", out.display());
    }
    println!("{summary}");
    if violations > 0 {
        return Err(CliError::OracleBound(format!(
            "{violations} world/coverage cells broke an optimality or residual bound"
        )));
    }
    Ok(())
}
