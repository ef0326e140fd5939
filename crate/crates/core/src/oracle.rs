//! Finite-world verification of the optimal-selection characterisation.
//!
//! A [`FiniteWorld`] is an explicit joint distribution over a handful of
//! pair-states: each state has a probability mass, a conditional outcome
//! pmf over `{-1, 0, +1}`, and a fixed ranker prediction; a symmetric loss
//! matrix completes the picture. On such a world every quantity of interest
//! (coverage, selective risk, the risk quantile `beta`) is a finite sum, so
//! the optimal selector can be built exactly and checked against an
//! exhaustive grid search that shares none of its logic.
//!
//! The optimal construction accepts states with conditional risk strictly
//! below the c-th risk quantile `beta`, rejects strictly above, and accepts
//! boundary states with a fractional weight `p_r` chosen so coverage lands
//! exactly on `c`. On a finite world the Bernoulli boundary rule and the
//! fractional weight are interchangeable: risk and coverage depend on the
//! selector only through expectations.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Enumeration bound for the exhaustive search: `(K+1)^m` grid points.
pub const MAX_STATES: usize = 4;

/// Slack for coverage feasibility comparisons on accumulated masses.
const COVERAGE_SLACK: f64 = 1e-12;

const LABELS: [i8; 3] = [-1, 0, 1];

fn idx(y: i8) -> usize {
    (y + 1) as usize
}

/// An explicit finite distribution over pair-states with a symmetric loss.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteWorld {
    masses: Vec<f64>,
    pmfs: Vec<[f64; 3]>,
    /// `loss[idx(predicted)][idx(actual)]`.
    loss: [[f64; 3]; 3],
    ranker: Vec<i8>,
}

impl FiniteWorld {
    /// Validates: positive masses summing to 1 (within 1e-12), simplex pmfs,
    /// a non-negative loss with `L[pred][y] = L[-pred][-y]`, and ranker
    /// predictions in `{-1, 0, +1}`.
    pub fn new(
        masses: Vec<f64>,
        pmfs: Vec<[f64; 3]>,
        loss: [[f64; 3]; 3],
        ranker: Vec<i8>,
    ) -> Result<Self> {
        let m = masses.len();
        if m == 0 {
            return Err(Error::invalid("a world needs at least one state"));
        }
        if pmfs.len() != m || ranker.len() != m {
            return Err(Error::invalid(
                "masses, pmfs and ranker must have equal length",
            ));
        }
        if masses.iter().any(|&w| !w.is_finite() || w <= 0.0) {
            return Err(Error::invalid("state masses must be positive and finite"));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "state masses must sum to 1, got {total}"
            )));
        }
        for pmf in &pmfs {
            if pmf.iter().any(|&p| !p.is_finite() || p < 0.0) {
                return Err(Error::invalid("conditional pmfs must be non-negative"));
            }
            let s: f64 = pmf.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::invalid(format!(
                    "conditional pmf must sum to 1, got {s}"
                )));
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                if !loss[i][j].is_finite() || loss[i][j] < 0.0 {
                    return Err(Error::invalid("loss entries must be non-negative"));
                }
                if (loss[i][j] - loss[2 - i][2 - j]).abs() > 1e-12 {
                    return Err(Error::invalid(
                        "loss must be symmetric: L[pred][y] = L[-pred][-y]",
                    ));
                }
            }
        }
        if ranker.iter().any(|y| !(-1..=1).contains(y)) {
            return Err(Error::invalid("ranker predictions must be in {-1, 0, +1}"));
        }
        Ok(FiniteWorld {
            masses,
            pmfs,
            loss,
            ranker,
        })
    }

    pub fn n_states(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, state: usize) -> f64 {
        self.masses[state]
    }

    pub fn pmf(&self, state: usize) -> [f64; 3] {
        self.pmfs[state]
    }

    pub fn loss(&self, predicted: i8, actual: i8) -> f64 {
        self.loss[idx(predicted)][idx(actual)]
    }

    pub fn ranker(&self, state: usize) -> i8 {
        self.ranker[state]
    }

    /// Conditional expected risk of the ranker's prediction on one state:
    /// `r_i = sum_y q_i(y) L[f_i][y]`.
    pub fn state_risk(&self, state: usize) -> f64 {
        let q = &self.pmfs[state];
        let f = self.ranker[state];
        LABELS.iter().map(|&y| q[idx(y)] * self.loss(f, y)).sum()
    }

    pub fn risks(&self) -> Vec<f64> {
        (0..self.n_states()).map(|i| self.state_risk(i)).collect()
    }

    /// Line-oriented text form, round-trippable through [`FiniteWorld::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("states {}\n", self.n_states());
        out.push_str("mass");
        for w in &self.masses {
            out.push_str(&format!(" {w}"));
        }
        out.push('\n');
        for pmf in &self.pmfs {
            out.push_str(&format!("pmf {} {} {}\n", pmf[0], pmf[1], pmf[2]));
        }
        for row in &self.loss {
            out.push_str(&format!("loss {} {} {}\n", row[0], row[1], row[2]));
        }
        out.push_str("ranker");
        for y in &self.ranker {
            out.push_str(&format!(" {y}"));
        }
        out.push('\n');
        out
    }

    /// Parse the text form written by [`to_text`](Self::to_text).
    pub fn parse(text: &str) -> Result<Self> {
        let mut m: Option<usize> = None;
        let mut masses: Vec<f64> = Vec::new();
        let mut pmfs: Vec<[f64; 3]> = Vec::new();
        let mut loss_rows: Vec<[f64; 3]> = Vec::new();
        let mut ranker: Vec<i8> = Vec::new();

        fn triple(lineno: usize, fields: &[&str]) -> Result<[f64; 3]> {
            if fields.len() != 3 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 3 values, got {}", fields.len()),
                ));
            }
            let mut out = [0.0; 3];
            for (k, f) in fields.iter().enumerate() {
                out[k] = f
                    .parse::<f64>()
                    .map_err(|e| Error::parse(lineno, format!("invalid number '{f}': {e}")))?;
            }
            Ok(out)
        }

        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap();
            let rest: Vec<&str> = fields.collect();
            match key {
                "states" => {
                    let n = rest
                        .first()
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(lineno, "expected 'states <n>'"))?;
                    m = Some(n);
                }
                "mass" => {
                    for f in &rest {
                        masses.push(f.parse::<f64>().map_err(|e| {
                            Error::parse(lineno, format!("invalid mass '{f}': {e}"))
                        })?);
                    }
                }
                "pmf" => pmfs.push(triple(lineno, &rest)?),
                "loss" => loss_rows.push(triple(lineno, &rest)?),
                "ranker" => {
                    for f in &rest {
                        ranker.push(f.parse::<i8>().map_err(|e| {
                            Error::parse(lineno, format!("invalid ranker label '{f}': {e}"))
                        })?);
                    }
                }
                other => return Err(Error::parse(lineno, format!("unknown record '{other}'"))),
            }
        }

        let m = m.ok_or_else(|| Error::parse(0, "missing 'states' record"))?;
        if masses.len() != m || pmfs.len() != m || ranker.len() != m {
            return Err(Error::parse(
                0,
                format!(
                    "inconsistent world: states {m}, {} masses, {} pmfs, {} ranker labels",
                    masses.len(),
                    pmfs.len(),
                    ranker.len()
                ),
            ));
        }
        if loss_rows.len() != 3 {
            return Err(Error::parse(
                0,
                format!("expected 3 loss rows, got {}", loss_rows.len()),
            ));
        }
        FiniteWorld::new(
            masses,
            pmfs,
            [loss_rows[0], loss_rows[1], loss_rows[2]],
            ranker,
        )
    }
}

/// Per-state acceptance weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionVector(Vec<f64>);

impl SelectionVector {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        if g.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("selection weights must lie in [0, 1]"));
        }
        Ok(SelectionVector(g))
    }

    pub fn ones(m: usize) -> Self {
        SelectionVector(vec![1.0; m])
    }

    pub fn zeros(m: usize) -> Self {
        SelectionVector(vec![0.0; m])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }
}

/// Coverage `phi(g) = sum_i w_i g_i`.
pub fn coverage(world: &FiniteWorld, g: &SelectionVector) -> f64 {
    world
        .masses
        .iter()
        .zip(g.weights())
        .map(|(w, gi)| w * gi)
        .sum()
}

/// Selective risk `sum_i w_i g_i r_i / sum_i w_i g_i`; undefined at zero
/// coverage.
pub fn selective_risk(world: &FiniteWorld, g: &SelectionVector) -> Result<f64> {
    let phi = coverage(world, g);
    if phi <= 0.0 {
        return Err(Error::ZeroCoverage);
    }
    let num: f64 = world
        .masses
        .iter()
        .zip(g.weights())
        .enumerate()
        .map(|(i, (w, gi))| w * gi * world.state_risk(i))
        .sum();
    Ok(num / phi)
}

/// The discrete c-th risk quantile: the smallest realised risk value `beta`
/// with `mass{r < beta} + mass{r = beta} >= c`, together with the strictly-
/// below mass and the boundary mass.
fn risk_quantile(world: &FiniteWorld, c: f64) -> (f64, f64, f64) {
    let risks = world.risks();
    let mut order: Vec<usize> = (0..risks.len()).collect();
    order.sort_by(|&a, &b| risks[a].total_cmp(&risks[b]));

    let mut below = 0.0;
    let mut i = 0;
    while i < order.len() {
        let value = risks[order[i]];
        let mut at = 0.0;
        let mut j = i;
        while j < order.len() && risks[order[j]] == value {
            at += world.masses[order[j]];
            j += 1;
        }
        if below + at >= c - COVERAGE_SLACK || j == order.len() {
            return (value, below, at);
        }
        below += at;
        i = j;
    }
    unreachable!("a non-empty world always yields a quantile");
}

/// The optimal selector at target coverage `c`: accept below the risk
/// quantile, reject above, and accept the boundary with fractional weight
/// `p_r = (c - mass{r < beta}) / mass{r = beta}` so coverage meets `c`.
pub fn theorem_selector(world: &FiniteWorld, c: f64) -> SelectionVector {
    assert!(
        c > 0.0 && c <= 1.0,
        "target coverage must be in (0, 1], got {c}"
    );
    let (beta, below, at) = risk_quantile(world, c);
    let p_r = ((c - below) / at).clamp(0.0, 1.0);
    let g = world
        .risks()
        .iter()
        .map(|&r| {
            if r < beta {
                1.0
            } else if r > beta {
                0.0
            } else {
                p_r
            }
        })
        .collect();
    SelectionVector(g)
}

/// Absolute residuals of the three optimality conditions, evaluated as
/// direct sums over the strata `{r < beta}`, `{r = beta}`, `{r > beta}`:
/// accepted mass below the quantile must equal the full below-mass (p1),
/// accepted boundary mass must top coverage up to exactly `c` (p2), and no
/// mass above the quantile may be accepted (p3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub beta: f64,
    pub p1_residual: f64,
    pub p2_residual: f64,
    pub p3_residual: f64,
}

impl ConditionReport {
    pub fn max_residual(&self) -> f64 {
        self.p1_residual.max(self.p2_residual).max(self.p3_residual)
    }
}

pub fn verify_conditions(world: &FiniteWorld, g: &SelectionVector, c: f64) -> ConditionReport {
    let (beta, below_mass, _) = risk_quantile(world, c);
    let risks = world.risks();
    let mut accepted_below = 0.0;
    let mut accepted_at = 0.0;
    let mut accepted_above = 0.0;
    for (i, (&r, &gi)) in risks.iter().zip(g.weights()).enumerate() {
        let w = world.masses[i] * gi;
        if r < beta {
            accepted_below += w;
        } else if r > beta {
            accepted_above += w;
        } else {
            accepted_at += w;
        }
    }
    ConditionReport {
        beta,
        p1_residual: (accepted_below - below_mass).abs(),
        p2_residual: (accepted_at - (c - below_mass)).abs(),
        p3_residual: accepted_above.abs(),
    }
}

/// Exhaustively search selection vectors on the grid `{0, 1/K, ..., 1}^m`
/// for the feasible minimiser of selective risk, then run one coordinate
/// refinement pass at step `1/K^2` around the best point to tighten the
/// grid gap. Deliberately shares no logic with [`theorem_selector`]: this
/// is the independent check, not the construction.
///
/// Worlds with more than [`MAX_STATES`] states are rejected; the grid has
/// `(K+1)^m` points.
pub fn brute_force_optimum(
    world: &FiniteWorld,
    c: f64,
    grid_k: usize,
) -> Result<(SelectionVector, f64)> {
    let m = world.n_states();
    if m > MAX_STATES {
        return Err(Error::WorldTooLarge { m, max: MAX_STATES });
    }
    if grid_k == 0 {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::invalid(format!(
            "target coverage must be in (0, 1], got {c}"
        )));
    }

    let masses = &world.masses;
    let weighted_risks: Vec<f64> = (0..m).map(|i| masses[i] * world.state_risk(i)).collect();
    let step = 1.0 / grid_k as f64;

    struct Search<'a> {
        masses: &'a [f64],
        weighted_risks: &'a [f64],
        c: f64,
        grid_k: usize,
        step: f64,
        current: Vec<f64>,
        best: Vec<f64>,
        best_risk: f64,
    }

    impl Search<'_> {
        fn walk(&mut self, level: usize, cov: f64, risk_mass: f64) {
            if level == self.current.len() {
                if cov >= self.c - COVERAGE_SLACK && cov > 0.0 {
                    let risk = risk_mass / cov;
                    if risk < self.best_risk {
                        self.best_risk = risk;
                        self.best.copy_from_slice(&self.current);
                    }
                }
                return;
            }
            for k in 0..=self.grid_k {
                let gi = k as f64 * self.step;
                self.current[level] = gi;
                self.walk(
                    level + 1,
                    cov + self.masses[level] * gi,
                    risk_mass + self.weighted_risks[level] * gi,
                );
            }
        }
    }

    let mut search = Search {
        masses,
        weighted_risks: &weighted_risks,
        c,
        grid_k,
        step,
        current: vec![0.0; m],
        best: vec![0.0; m],
        best_risk: f64::INFINITY,
    };
    search.walk(0, 0.0, 0.0);

    let mut best = search.best;
    let mut best_risk = search.best_risk;
    if !best_risk.is_finite() {
        // c <= 1 guarantees the all-ones vector is feasible
        best = vec![1.0; m];
        best_risk = weighted_risks.iter().sum::<f64>() / masses.iter().sum::<f64>();
    }

    // Coordinate refinement at 1/K^2 resolution around the incumbent.
    let fine = step * step;
    let evaluate = |g: &[f64]| -> Option<f64> {
        let cov: f64 = masses.iter().zip(g).map(|(w, gi)| w * gi).sum();
        if cov >= c - COVERAGE_SLACK && cov > 0.0 {
            let rm: f64 = weighted_risks.iter().zip(g).map(|(wr, gi)| wr * gi).sum();
            Some(rm / cov)
        } else {
            None
        }
    };
    let span = grid_k as i64;
    for state in 0..m {
        let base = best[state];
        let mut candidate = best.clone();
        for t in -span..=span {
            let v = (base + t as f64 * fine).clamp(0.0, 1.0);
            candidate[state] = v;
            if let Some(risk) = evaluate(&candidate) {
                if risk < best_risk {
                    best_risk = risk;
                    best[state] = v;
                }
            }
        }
    }

    Ok((SelectionVector(best), best_risk))
}

/// Loss matrix family for random worlds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    ZeroOne,
    RandomSymmetric,
}

impl LossKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::ZeroOne => "zero-one",
            LossKind::RandomSymmetric => "random-symmetric",
        }
    }
}

/// Seeded random world: normalised-uniform masses and pmfs, the requested
/// loss family, and the per-state Bayes prediction under that loss.
///
/// Random symmetric losses are drawn entrywise on `[0, 1)`, zeroed on the
/// diagonal, and symmetrised by averaging each entry with its mirror.
pub fn random_world(m: usize, seed: u64, kind: LossKind) -> FiniteWorld {
    assert!(m >= 1, "a world needs at least one state");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(1e-3..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let masses: Vec<f64> = raw.iter().map(|w| w / total).collect();

    let pmfs: Vec<[f64; 3]> = (0..m)
        .map(|_| {
            let q: [f64; 3] = std::array::from_fn(|_| rng.random_range(1e-3..1.0));
            let s: f64 = q.iter().sum();
            q.map(|v| v / s)
        })
        .collect();

    let loss = match kind {
        LossKind::ZeroOne => {
            let mut l = [[1.0; 3]; 3];
            for (i, row) in l.iter_mut().enumerate() {
                row[i] = 0.0;
            }
            l
        }
        LossKind::RandomSymmetric => {
            let raw: [[f64; 3]; 3] =
                std::array::from_fn(|_| std::array::from_fn(|_| rng.random_range(0.0..1.0)));
            let mut l = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    l[i][j] = if i == j {
                        0.0
                    } else {
                        (raw[i][j] + raw[2 - i][2 - j]) / 2.0
                    };
                }
            }
            l
        }
    };

    // Bayes prediction: minimise expected loss per state, first label wins ties.
    let ranker: Vec<i8> = pmfs
        .iter()
        .map(|q| {
            let mut best = LABELS[0];
            let mut best_loss = f64::INFINITY;
            for &pred in &LABELS {
                let expected: f64 = LABELS
                    .iter()
                    .map(|&y| q[idx(y)] * loss[idx(pred)][idx(y)])
                    .sum();
                if expected < best_loss {
                    best_loss = expected;
                    best = pred;
                }
            }
            best
        })
        .collect();

    FiniteWorld::new(masses, pmfs, loss, ranker).expect("random construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_state_world() -> FiniteWorld {
        // risks under 0-1 loss with the stated rankers: r = (0.1, 0.4)
        FiniteWorld::new(
            vec![0.5, 0.5],
            vec![[0.05, 0.05, 0.9], [0.3, 0.6, 0.1]],
            zero_one(),
            vec![1, 0],
        )
        .unwrap()
    }

    fn zero_one() -> [[f64; 3]; 3] {
        let mut l = [[1.0; 3]; 3];
        for (i, row) in l.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        l
    }

    #[test]
    fn state_risk_matches_closed_form() {
        let world =
            FiniteWorld::new(vec![1.0], vec![[0.2, 0.3, 0.5]], zero_one(), vec![1]).unwrap();
        assert_abs_diff_eq!(world.state_risk(0), 0.5, epsilon = 1e-15);

        // prediction deliberately set to the least likely label
        let bad = FiniteWorld::new(vec![1.0], vec![[0.2, 0.3, 0.5]], zero_one(), vec![-1]).unwrap();
        assert_abs_diff_eq!(bad.state_risk(0), 0.8, epsilon = 1e-15);

        let zero_loss =
            FiniteWorld::new(vec![1.0], vec![[0.2, 0.3, 0.5]], [[0.0; 3]; 3], vec![1]).unwrap();
        assert_eq!(zero_loss.state_risk(0), 0.0);
    }

    #[test]
    fn selective_risk_arithmetic() {
        let world = two_state_world();
        let full = SelectionVector::ones(2);
        assert_abs_diff_eq!(
            selective_risk(&world, &full).unwrap(),
            0.25,
            epsilon = 1e-12
        );
        let one_hot = SelectionVector::new(vec![0.0, 1.0]).unwrap();
        assert_abs_diff_eq!(
            selective_risk(&world, &one_hot).unwrap(),
            0.4,
            epsilon = 1e-12
        );
        let mixed = SelectionVector::new(vec![1.0, 0.5]).unwrap();
        assert_abs_diff_eq!(
            selective_risk(&world, &mixed).unwrap(),
            0.2,
            epsilon = 1e-12
        );
        assert!(matches!(
            selective_risk(&world, &SelectionVector::zeros(2)),
            Err(Error::ZeroCoverage)
        ));
    }

    #[test]
    fn theorem_selector_two_state_examples() {
        let world = two_state_world();

        let g = theorem_selector(&world, 0.5);
        assert_eq!(g.weights(), &[1.0, 0.0]);
        assert_abs_diff_eq!(selective_risk(&world, &g).unwrap(), 0.1, epsilon = 1e-12);

        let g = theorem_selector(&world, 0.75);
        assert_abs_diff_eq!(g.weights()[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.weights()[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(selective_risk(&world, &g).unwrap(), 0.2, epsilon = 1e-12);

        let g = theorem_selector(&world, 1.0);
        assert_eq!(g.weights(), &[1.0, 1.0]);
        assert_abs_diff_eq!(selective_risk(&world, &g).unwrap(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn conditions_hold_on_construction_and_flag_violations() {
        let world = two_state_world();
        for c in [0.3, 0.5, 0.75, 1.0] {
            let g = theorem_selector(&world, c);
            let rep = verify_conditions(&world, &g, c);
            assert!(rep.max_residual() <= 1e-9, "c={c}: {rep:?}");
        }
        // accepting everything at partial coverage violates p3
        let rep = verify_conditions(&world, &SelectionVector::ones(2), 0.5);
        assert!(rep.p3_residual > 0.0);
        // accepting nothing leaves the whole below-mass as the p1 residual
        let rep = verify_conditions(&world, &SelectionVector::zeros(2), 0.75);
        assert_abs_diff_eq!(rep.p1_residual, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_matches_hand_arithmetic() {
        let world = two_state_world();
        let (_, risk) = brute_force_optimum(&world, 0.75, 40).unwrap();
        assert!((risk - 0.2).abs() <= 1.0 / 40.0, "risk {risk}");
        let (g, risk) = brute_force_optimum(&world, 1.0, 40).unwrap();
        assert_eq!(g.weights(), &[1.0, 1.0]);
        assert_abs_diff_eq!(risk, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_constant_risks() {
        let world = FiniteWorld::new(
            vec![0.5, 0.5],
            vec![[0.2, 0.3, 0.5], [0.5, 0.3, 0.2]],
            zero_one(),
            vec![1, -1],
        )
        .unwrap();
        // both states have risk 0.5
        let (_, risk) = brute_force_optimum(&world, 0.6, 25).unwrap();
        assert_abs_diff_eq!(risk, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_respects_state_bound() {
        let world = random_world(5, 3, LossKind::ZeroOne);
        assert!(matches!(
            brute_force_optimum(&world, 0.5, 20),
            Err(Error::WorldTooLarge { m: 5, max: 4 })
        ));
    }

    #[test]
    fn random_world_construction() {
        for seed in 0..20 {
            let world = random_world(1 + (seed as usize % 4), seed, LossKind::ZeroOne);
            let total: f64 = (0..world.n_states()).map(|i| world.mass(i)).sum();
            assert!((total - 1.0).abs() <= 1e-12);
            // zero-one loss with the Bayes ranker: risk is 1 - max q
            for i in 0..world.n_states() {
                let q = world.pmf(i);
                let want = 1.0 - q.iter().cloned().fold(f64::MIN, f64::max);
                assert_abs_diff_eq!(world.state_risk(i), want, epsilon = 1e-12);
            }
            assert_eq!(
                world,
                random_world(world.n_states(), seed, LossKind::ZeroOne)
            );
        }
    }

    #[test]
    fn random_symmetric_loss_is_symmetric() {
        for seed in 0..10 {
            let world = random_world(3, seed, LossKind::RandomSymmetric);
            for &pred in &LABELS {
                assert_eq!(world.loss(pred, pred), 0.0);
                for &y in &LABELS {
                    assert_eq!(world.loss(pred, y), world.loss(-pred, -y));
                }
            }
        }
    }

    #[test]
    fn world_text_round_trip() {
        let world = random_world(4, 11, LossKind::RandomSymmetric);
        let text = world.to_text();
        let back = FiniteWorld::parse(&text).unwrap();
        assert_eq!(world, back);
        assert!(FiniteWorld::parse("mass 0.5 0.5\n").is_err());
        assert!(FiniteWorld::parse("states 2\nmass 0.5 0.6\n").is_err());
    }

    #[test]
    fn rejects_invalid_worlds() {
        assert!(FiniteWorld::new(vec![], vec![], zero_one(), vec![]).is_err());
        assert!(FiniteWorld::new(
            vec![0.5, 0.6],
            vec![[1.0, 0.0, 0.0]; 2],
            zero_one(),
            vec![0, 0]
        )
        .is_err());
        let mut asym = zero_one();
        asym[0][1] = 0.7;
        assert!(FiniteWorld::new(vec![1.0], vec![[1.0, 0.0, 0.0]], asym, vec![0]).is_err());
    }
}
