//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with
//!
//! ```text
//! cargo test -p baltor-core --test acceptance -- --nocapture
//! ```
//!
//! The last criterion needs the MQ2007 fold directories on disk; it is
//! ignored by default and runs with `--ignored` when `MQ2007_DIR` is set.

// reference tables carry full-precision values
#![allow(clippy::excessive_precision)]

use std::sync::OnceLock;
use std::time::Instant;

use baltor_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn criterion<F>(name: &str, f: F)
where
    F: FnOnce() + std::panic::UnwindSafe,
{
    match std::panic::catch_unwind(f) {
        Ok(()) => println!("acceptance: {name}: pass"),
        Err(cause) => {
            println!("acceptance: {name}: FAIL");
            std::panic::resume_unwind(cause);
        }
    }
}

const COVERAGE_GRID: [f64; 7] = [0.99, 0.95, 0.90, 0.85, 0.80, 0.75, 0.70];

// ---------------------------------------------------------------------------
// 1. Theorem optimality at desk scale
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_theorem_optimality() {
    criterion("1 theorem optimality on 200 random worlds", || {
        const K: usize = 40;
        let grid_slack = 2.0 / K as f64;
        let coverages = [0.3, 0.5, 0.7, 0.9, 1.0];
        let started = Instant::now();
        let mut max_gap = 0.0f64;
        let mut max_residual = 0.0f64;

        for world_idx in 0..200u64 {
            let m = 1 + (world_idx as usize) % 4;
            let loss = if world_idx % 2 == 0 {
                LossKind::ZeroOne
            } else {
                LossKind::RandomSymmetric
            };
            let world = random_world(m, 9_000 + world_idx, loss);
            for &c in &coverages {
                let g = theorem_selector(&world, c);
                let cov = coverage(&world, &g);
                assert!(cov >= c - 1e-12, "world {world_idx} c={c}: infeasible selector");
                // boundary states always exist on a finite world, so the
                // fractional boundary weight lands coverage exactly on c
                assert!(
                    (cov - c).abs() <= 1e-9,
                    "world {world_idx} c={c}: coverage {cov} not exact"
                );
                let theorem = selective_risk(&world, &g).unwrap();
                let report = verify_conditions(&world, &g, c);
                max_residual = max_residual.max(report.max_residual());
                assert!(
                    report.max_residual() <= 1e-9,
                    "world {world_idx} c={c}: residuals {report:?}"
                );
                let (_, brute) = brute_force_optimum(&world, c, K).unwrap();
                assert!(
                    theorem <= brute + 1e-9,
                    "world {world_idx} c={c}: theorem {theorem} beaten by grid {brute}"
                );
                assert!(
                    brute <= theorem + grid_slack,
                    "world {world_idx} c={c}: grid gap {} exceeds {grid_slack}",
                    brute - theorem
                );
                max_gap = max_gap.max(brute - theorem);
            }
        }

        let elapsed = started.elapsed();
        println!(
            "  200 worlds x 5 coverages: max grid gap {max_gap:.3e}, max residual {max_residual:.3e}, {elapsed:?}"
        );
        assert!(
            elapsed.as_secs_f64() < 60.0,
            "oracle run took {elapsed:?}, budget is 60 s"
        );
    });
}

// ---------------------------------------------------------------------------
// 2. Probability-model properties
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_probability_models() {
    criterion("2 probability-model properties (1e5 random draws)", || {
        let mut rng = ChaCha12Rng::seed_from_u64(24);
        for _ in 0..100_000 {
            let s = rng.random_range(-20.0..20.0);
            let sp = rng.random_range(-20.0..20.0);
            let theta = 1.0 + rng.random_range(0.0..50.0);
            let eps = rng.random_range(0.0..5.0);

            let bt = bt_probs(s, sp, theta).unwrap();
            let tm = tm_probs(s, sp, eps).unwrap();
            for p in [bt, tm] {
                assert!(
                    p.p_minus >= 0.0 && p.p_zero >= 0.0 && p.p_plus >= 0.0,
                    "{p:?}"
                );
                assert!(
                    (p.p_minus + p.p_zero + p.p_plus - 1.0).abs() <= 1e-9,
                    "{p:?}"
                );
            }
            let bts = bt_probs(sp, s, theta).unwrap();
            let tms = tm_probs(sp, s, eps).unwrap();
            for (p, q) in [(bt, bts), (tm, tms)] {
                assert!((p.p_plus - q.p_minus).abs() <= 1e-12);
                assert!((p.p_minus - q.p_plus).abs() <= 1e-12);
                assert!((p.p_zero - q.p_zero).abs() <= 1e-12);
            }
            assert_eq!(bt_probs(s, sp, 1.0).unwrap().p_zero, 0.0);
            assert_eq!(tm_probs(s, sp, 0.0).unwrap().p_zero, 0.0);
        }

        let phi_table = [
            (0.0, 0.5),
            (0.5, 0.69146246127401310),
            (-0.5, 0.30853753872598690),
            (1.0, 0.84134474606854295),
            (-1.0, 0.15865525393145705),
            (1.959964, 0.97500000090355760),
            (-1.959964, 0.02499999909644240),
            (3.0, 0.99865010196836991),
            (-3.0, 0.00134989803163009),
        ];
        for (z, want) in phi_table {
            let got = std_normal_cdf(z);
            assert!((got - want).abs() <= 1e-7, "Phi({z}) = {got}, want {want}");
        }
    });
}

// ---------------------------------------------------------------------------
// Shared synthetic fixture for the coverage and accuracy criteria
// ---------------------------------------------------------------------------

struct Fixture {
    tie: TieParams,
    cal_scores: Vec<f64>,
    test_scores: Vec<f64>,
    cal_pairs: Vec<PairInstance>,
    test_pairs: Vec<PairInstance>,
}

fn fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let (n_train, n_cal, n_test) = (100usize, 400usize, 600usize);
        let cfg = SynthConfig {
            n_queries: n_train + n_cal + n_test,
            items_per_query: 40,
            feature_dim: 8,
            n_grades: 3,
            // chosen so full-coverage accuracy lands inside (0.6, 0.9)
            noise_sd: 0.4,
            seed: 2024,
        };
        let (d, _) = synth_generate(&cfg).unwrap();
        let parts = split_dataset(&d, &[n_train, n_cal, n_test]).unwrap();
        let (train, cal, test) = (&parts[0], &parts[1], &parts[2]);

        let train_pairs = enumerate_all_pairs(train);
        let tie = estimate_theta(&eval::pair_labels(&train_pairs)).unwrap();
        let trained = train_linear_ranker(
            train,
            &train_pairs,
            &TrainConfig {
                epochs: 30,
                learning_rate: 0.5,
                batch_size: 256,
                l2: 0.0,
                seed: 17,
            },
        )
        .unwrap();

        Fixture {
            tie,
            cal_scores: trained.model.score_all(cal).unwrap(),
            test_scores: trained.model.score_all(test).unwrap(),
            cal_pairs: enumerate_all_pairs(cal),
            test_pairs: enumerate_all_pairs(test),
        }
    })
}

fn run_grid(fx: &Fixture, kind: ModelKind, mode: SelectionMode, grid: &[f64]) -> Vec<EvalReport> {
    let cal_probs = eval::pair_probs(kind, &fx.cal_scores, &fx.cal_pairs, fx.tie);
    let cal_risks: Vec<f64> = cal_probs.iter().map(|&p| conditional_risk(p)).collect();
    let test_probs = eval::pair_probs(kind, &fx.test_scores, &fx.test_pairs, fx.tie);
    let keys = eval::pair_keys(&fx.test_pairs);
    let labels = eval::pair_labels(&fx.test_pairs);
    let policies: Vec<SelectivePolicy> = grid
        .iter()
        .map(|&c| {
            let cal = calibrate_threshold(&cal_risks, c).unwrap();
            SelectivePolicy::new(ScoreKind::Risk, cal, c, mode, 5)
        })
        .collect();
    sweep(&labels, &test_probs, &keys, &policies, None)
        .unwrap()
        .into_iter()
        .map(|cell| cell.report)
        .collect()
}

// ---------------------------------------------------------------------------
// 3. Coverage tracking
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_coverage_tracking() {
    criterion("3 coverage tracking on >= 20k test pairs", || {
        let fx = fixture();
        assert!(
            fx.test_pairs.len() >= 20_000,
            "test pairs: {}",
            fx.test_pairs.len()
        );
        for kind in [ModelKind::BradleyTerry, ModelKind::ThurstoneMosteller] {
            for (mode, bound) in [
                (SelectionMode::Deterministic, 0.01),
                (SelectionMode::Randomized, 0.005),
            ] {
                let reports = run_grid(fx, kind, mode, &COVERAGE_GRID);
                for report in &reports {
                    let gap = (report.coverage() - report.target_coverage).abs();
                    assert!(
                        gap <= bound,
                        "{} {}: c={} cov={} gap {gap} > {bound}",
                        kind.as_str(),
                        mode.as_str(),
                        report.target_coverage,
                        report.coverage()
                    );
                }
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 4. Accuracy-vs-coverage trend
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_accuracy_trend() {
    criterion(
        "4 accuracy rises as coverage tightens; random stays flat",
        || {
            let fx = fixture();
            let mut grid = vec![1.0];
            grid.extend_from_slice(&COVERAGE_GRID);

            for kind in [ModelKind::BradleyTerry, ModelKind::ThurstoneMosteller] {
                let reports = run_grid(fx, kind, SelectionMode::Deterministic, &grid);
                let accs: Vec<f64> = reports.iter().map(|r| r.accuracy().unwrap()).collect();
                let full = accs[0];
                let at70 = *accs.last().unwrap();
                assert!(
                    full > 0.6 && full < 0.9,
                    "{}: full-coverage accuracy {full} outside (0.6, 0.9)",
                    kind.as_str()
                );
                assert!(
                    at70 >= full + 0.01,
                    "{}: Acc(0.70) = {at70} does not improve on Acc(1.0) = {full}",
                    kind.as_str()
                );
                // grid is sorted by decreasing c, so accuracy must be
                // non-decreasing along it, up to the slack
                for (a, b) in grid.iter().zip(accs.windows(2)) {
                    assert!(
                        b[1] >= b[0] - 0.005,
                        "{}: accuracy dropped from {} to {} after c={a}",
                        kind.as_str(),
                        b[0],
                        b[1]
                    );
                }
            }

            // the random abstainer's accuracy is flat across the grid
            let test_probs = eval::pair_probs(
                ModelKind::BradleyTerry,
                &fx.test_scores,
                &fx.test_pairs,
                fx.tie,
            );
            let keys = eval::pair_keys(&fx.test_pairs);
            let labels = eval::pair_labels(&fx.test_pairs);
            let random = RandomBaseline {
                grid: COVERAGE_GRID.to_vec(),
                seed: 40,
            };
            let cells = sweep(&labels, &test_probs, &keys, &[], Some(&random)).unwrap();
            let accs: Vec<f64> = cells.iter().map(|c| c.report.accuracy().unwrap()).collect();
            let spread = accs.iter().cloned().fold(f64::MIN, f64::max)
                - accs.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 0.01, "random baseline accuracy spread {spread}");
        },
    );
}

// ---------------------------------------------------------------------------
// 5. Gradient check
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_gradient_check() {
    criterion("5 analytic gradient vs central differences", || {
        let mut rng = ChaCha12Rng::seed_from_u64(501);
        let dim = 6;
        let h = 1e-5;
        for draw in 0..100 {
            let weights: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let x: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let xp: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let label: i8 = if draw % 2 == 0 { 1 } else { -1 };
            let model = ScoreModel {
                weights: weights.clone(),
                bias: 0.3,
            };
            let analytic = pairwise_logistic_loss(&model, &x, &xp, label).unwrap();

            let mut fd = vec![0.0; dim];
            for k in 0..dim {
                let mut plus = weights.clone();
                plus[k] += h;
                let mut minus = weights.clone();
                minus[k] -= h;
                let lp = pairwise_logistic_loss(
                    &ScoreModel {
                        weights: plus,
                        bias: 0.3,
                    },
                    &x,
                    &xp,
                    label,
                )
                .unwrap()
                .loss;
                let lm = pairwise_logistic_loss(
                    &ScoreModel {
                        weights: minus,
                        bias: 0.3,
                    },
                    &x,
                    &xp,
                    label,
                )
                .unwrap()
                .loss;
                fd[k] = (lp - lm) / (2.0 * h);
            }
            let norm = |v: &[f64]| v.iter().map(|g| g * g).sum::<f64>().sqrt();
            let diff: Vec<f64> = analytic
                .grad_weights
                .iter()
                .zip(&fd)
                .map(|(a, b)| a - b)
                .collect();
            let rel = norm(&diff) / norm(&fd).max(1e-12);
            assert!(rel <= 1e-5, "draw {draw}: relative gradient error {rel}");

            // the bias cancels in the score difference
            let shifted = ScoreModel {
                weights,
                bias: 0.3 + h,
            };
            let l_shift = pairwise_logistic_loss(&shifted, &x, &xp, label)
                .unwrap()
                .loss;
            assert_eq!(analytic.grad_bias, 0.0);
            assert!((l_shift - analytic.loss).abs() <= 1e-14);
        }
    });
}

// ---------------------------------------------------------------------------
// 6. Calibration exactness
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_calibration_exactness() {
    criterion("6 calibration meets the target coverage exactly", || {
        let mut rng = ChaCha12Rng::seed_from_u64(606);
        let mut coverages = COVERAGE_GRID.to_vec();
        coverages.extend([1.0, 1.0 / 3.0, 0.05]);

        let mut value_sets: Vec<Vec<f64>> = Vec::new();
        // continuous values, lattice values (heavy ties), constant values
        value_sets.push((0..997).map(|_| rng.random_range(0.0..1.0)).collect());
        value_sets.push(
            (0..1000)
                .map(|_| (rng.random_range(0u32..8) as f64) / 8.0)
                .collect(),
        );
        value_sets.push(vec![0.25; 64]);
        value_sets.push(vec![0.7]);

        for values in &value_sets {
            let n = values.len() as f64;
            for &c in &coverages {
                let cal = calibrate_threshold(values, c).unwrap();
                let below = values.iter().filter(|&&v| v < cal.threshold).count() as f64;
                let ties = values.iter().filter(|&&v| v == cal.threshold).count() as f64;

                // randomized mode: expected accepted mass is exactly c*n
                let expected = below + cal.boundary_prob * ties;
                assert!(
                    (expected - c * n).abs() <= 1e-9,
                    "n={n} c={c}: expected mass {expected} vs {}",
                    c * n
                );

                // deterministic mode: count within [ceil(c n), ceil(c n) + ties]
                let accepted = values.iter().filter(|&&v| v <= cal.threshold).count();
                let k = (c * n - 1e-9).ceil().max(1.0) as usize;
                assert!(
                    accepted >= k && accepted <= k + ties as usize,
                    "n={n} c={c}: accepted {accepted} outside [{k}, {}]",
                    k + ties as usize
                );
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 7. MQ2007 monotone improvement (data-dependent, not in CI)
// ---------------------------------------------------------------------------

#[test]
#[ignore = "needs the MQ2007 folds on disk; set MQ2007_DIR and run with --ignored"]
fn criterion_7_mq2007_improvement() {
    criterion("7 MQ2007: Acc at c=0.70 exceeds full-coverage Acc", || {
        let dir = std::env::var("MQ2007_DIR")
            .expect("set MQ2007_DIR to the directory containing Fold1..Fold5");
        let root = std::path::Path::new(&dir);
        let mut results: Vec<(ModelKind, f64, f64)> = Vec::new();
        for kind in [ModelKind::BradleyTerry, ModelKind::ThurstoneMosteller] {
            let mut full_accs = Vec::new();
            let mut low_accs = Vec::new();
            for fold in 1..=5 {
                let fold_dir = root.join(format!("Fold{fold}"));
                let read = |name: &str| {
                    std::fs::read_to_string(fold_dir.join(name))
                        .unwrap_or_else(|e| panic!("{}: {e}", fold_dir.join(name).display()))
                };
                let train = parse_letor(&read("train.txt")).unwrap();
                let cal = parse_letor(&read("vali.txt")).unwrap();
                let test = parse_letor(&read("test.txt")).unwrap();

                let train_pairs = enumerate_all_pairs(&train);
                let tie = estimate_theta(&eval::pair_labels(&train_pairs)).unwrap();
                let trained = train_linear_ranker(
                    &train,
                    &train_pairs,
                    &TrainConfig {
                        epochs: 30,
                        learning_rate: 0.5,
                        batch_size: 256,
                        l2: 1e-4,
                        seed: 17,
                    },
                )
                .unwrap();

                let cal_pairs = enumerate_all_pairs(&cal);
                let test_pairs = enumerate_all_pairs(&test);
                let cal_scores = trained.model.score_all(&cal).unwrap();
                let test_scores = trained.model.score_all(&test).unwrap();
                let cal_probs = eval::pair_probs(kind, &cal_scores, &cal_pairs, tie);
                let cal_risks: Vec<f64> = cal_probs.iter().map(|&p| conditional_risk(p)).collect();
                let test_probs = eval::pair_probs(kind, &test_scores, &test_pairs, tie);
                let keys = eval::pair_keys(&test_pairs);
                let labels = eval::pair_labels(&test_pairs);
                let policies: Vec<SelectivePolicy> = [1.0, 0.70]
                    .iter()
                    .map(|&c| {
                        let calb = calibrate_threshold(&cal_risks, c).unwrap();
                        SelectivePolicy::new(
                            ScoreKind::Risk,
                            calb,
                            c,
                            SelectionMode::Deterministic,
                            5,
                        )
                    })
                    .collect();
                let cells = sweep(&labels, &test_probs, &keys, &policies, None).unwrap();
                full_accs.push(cells[0].report.accuracy().unwrap());
                low_accs.push(cells[1].report.accuracy().unwrap());
            }
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            results.push((kind, mean(&full_accs), mean(&low_accs)));
        }
        for (kind, full, low) in results {
            println!(
                "  {}: Acc(1.0) = {full:.4}, Acc(0.70) = {low:.4}",
                kind.as_str()
            );
            assert!(
                low > full,
                "{}: abstention did not improve accuracy ({low} <= {full})",
                kind.as_str()
            );
        }
    });
}
