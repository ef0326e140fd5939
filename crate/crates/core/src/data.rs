//! LETOR/SVMLight ranking data.
//!
//! One row per line:
//!
//! ```text
//! <rel> qid:<id> <fid>:<val> ... [# comment]
//! 2 qid:10 1:0.5 3:1.0 # docid = GX001-demo
//! ```
//!
//! `rel` is a non-negative integer relevance grade, feature ids are positive
//! integers, and the optional comment carries the document id. Features are
//! densified to the largest feature id seen anywhere in the file; ids missing
//! from a line are zero (the common tooling convention for these files, which
//! are dense in practice).
//!
//! Pairwise preferences are formed only within a query. A pair is stored once
//! in canonical `i < j` orientation; the reverse orientation carries the
//! negated label and is derived on demand.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

/// One query-document row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub relevance: u32,
    pub query_id: String,
    pub features: Vec<f64>,
    pub doc_id: Option<String>,
}

/// A parsed ranking dataset with a uniform dense feature dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub rows: Vec<Row>,
    pub feature_dim: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Items of one query, as indices into the dataset rows in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryGroup {
    pub query_id: String,
    pub rows: Vec<usize>,
}

/// A labelled unordered pair of rows from the same query.
///
/// `i < j` are dataset row indices; `label = sign(rel_i - rel_j)`. The
/// reversed orientation is `(j, i)` with label `-label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairInstance {
    pub i: usize,
    pub j: usize,
    pub label: i8,
}

/// Parse LETOR text into a dataset. Lines are 1-indexed in errors; blank
/// lines are skipped; `\r\n` endings are accepted.
pub fn parse_letor(text: &str) -> Result<Dataset> {
    struct SparseRow {
        relevance: u32,
        query_id: String,
        features: Vec<(usize, f64)>,
        doc_id: Option<String>,
    }

    let mut sparse: Vec<SparseRow> = Vec::new();
    let mut max_fid = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let (body, comment) = match raw.find('#') {
            Some(pos) => (&raw[..pos], Some(raw[pos + 1..].trim())),
            None => (raw, None),
        };
        let mut tokens = body.split_whitespace();

        let rel_tok = tokens
            .next()
            .ok_or_else(|| Error::parse(lineno, "missing relevance grade"))?;
        let relevance = rel_tok.parse::<u32>().map_err(|_| {
            Error::parse(
                lineno,
                format!("relevance grade '{rel_tok}' is not a non-negative integer"),
            )
        })?;

        let qid_tok = tokens
            .next()
            .ok_or_else(|| Error::parse(lineno, "missing qid field"))?;
        let query_id = qid_tok
            .strip_prefix("qid:")
            .filter(|id| !id.is_empty())
            .ok_or_else(|| Error::parse(lineno, format!("expected 'qid:<id>', got '{qid_tok}'")))?
            .to_string();

        let mut features: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (fid_str, val_str) = tok.split_once(':').ok_or_else(|| {
                Error::parse(lineno, format!("expected '<fid>:<val>', got '{tok}'"))
            })?;
            let fid = fid_str
                .parse::<usize>()
                .ok()
                .filter(|&f| f >= 1)
                .ok_or_else(|| {
                    Error::parse(
                        lineno,
                        format!("feature id '{fid_str}' is not a positive integer"),
                    )
                })?;
            let val = val_str
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    Error::parse(
                        lineno,
                        format!("feature value '{val_str}' is not a finite number"),
                    )
                })?;
            features.push((fid, val));
            max_fid = max_fid.max(fid);
        }
        features.sort_unstable_by_key(|&(fid, _)| fid);
        if let Some(w) = features.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::parse(
                lineno,
                format!("duplicate feature id {}", w[0].0),
            ));
        }

        let doc_id = comment.and_then(parse_doc_id);
        sparse.push(SparseRow {
            relevance,
            query_id,
            features,
            doc_id,
        });
    }

    let rows = sparse
        .into_iter()
        .map(|r| {
            let mut dense = vec![0.0; max_fid];
            for (fid, val) in r.features {
                dense[fid - 1] = val;
            }
            Row {
                relevance: r.relevance,
                query_id: r.query_id,
                features: dense,
                doc_id: r.doc_id,
            }
        })
        .collect();

    Ok(Dataset {
        rows,
        feature_dim: max_fid,
    })
}

/// A comment of the form `docid = <token>` yields the token; any other
/// non-empty comment is kept whole.
fn parse_doc_id(comment: &str) -> Option<String> {
    if let Some(pos) = comment.find("docid") {
        let rest = comment[pos + "docid".len()..].trim_start();
        if let Some(rest) = rest.strip_prefix('=') {
            if let Some(tok) = rest.split_whitespace().next() {
                return Some(tok.to_string());
            }
        }
    }
    if comment.is_empty() {
        None
    } else {
        Some(comment.to_string())
    }
}

/// Render a dataset back to LETOR text. Every feature id up to
/// `feature_dim` is written explicitly, so a re-parse reconstructs the same
/// dimension; floats use the shortest round-trippable form.
pub fn format_letor(d: &Dataset) -> String {
    let mut out = String::new();
    for row in &d.rows {
        out.push_str(&format!("{} qid:{}", row.relevance, row.query_id));
        for (k, v) in row.features.iter().enumerate() {
            out.push_str(&format!(" {}:{}", k + 1, v));
        }
        if let Some(doc) = &row.doc_id {
            if doc.contains(char::is_whitespace) {
                out.push_str(&format!(" # {doc}"));
            } else {
                out.push_str(&format!(" # docid = {doc}"));
            }
        }
        out.push('\n');
    }
    out
}

/// Group rows by query id, preserving first-appearance order of queries and
/// file order within each group.
pub fn group_by_query(d: &Dataset) -> Vec<QueryGroup> {
    let mut groups: Vec<QueryGroup> = Vec::new();
    let mut index: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for (row_idx, row) in d.rows.iter().enumerate() {
        match index.get(row.query_id.as_str()) {
            Some(&g) => groups[g].rows.push(row_idx),
            None => {
                index.insert(row.query_id.as_str(), groups.len());
                groups.push(QueryGroup {
                    query_id: row.query_id.clone(),
                    rows: vec![row_idx],
                });
            }
        }
    }
    groups
}

/// `+1` if the first grade is larger, `-1` if smaller, `0` on a tie.
pub fn pair_label(rel_i: u32, rel_j: u32) -> i8 {
    match rel_i.cmp(&rel_j) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// All `m (m-1) / 2` unordered pairs of one query group, in canonical
/// orientation.
pub fn enumerate_pairs(d: &Dataset, group: &QueryGroup) -> Vec<PairInstance> {
    let m = group.rows.len();
    let mut pairs = Vec::with_capacity(m * m.saturating_sub(1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            let (i, j) = (group.rows[a], group.rows[b]);
            pairs.push(PairInstance {
                i,
                j,
                label: pair_label(d.rows[i].relevance, d.rows[j].relevance),
            });
        }
    }
    pairs
}

/// Concatenated pairs of every query group. Cross-query pairs are never
/// formed.
pub fn enumerate_all_pairs(d: &Dataset) -> Vec<PairInstance> {
    group_by_query(d)
        .iter()
        .flat_map(|g| enumerate_pairs(d, g))
        .collect()
}

/// Parameters for the seeded synthetic generator.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_queries: usize,
    pub items_per_query: usize,
    pub feature_dim: usize,
    pub n_grades: u32,
    pub noise_sd: f64,
    pub seed: u64,
}

/// Generate a synthetic dataset together with the true weight vector.
///
/// Features are i.i.d. standard normal. Each item's latent quality is
/// `w* . x + N(0, noise_sd^2)` with `w*` drawn once and normalised to unit
/// length (so `noise_sd` is measured against unit signal deviation). The
/// relevance grade is the equal-mass quantile bin of the latent score within
/// its query, which populates the tie class by construction. Deterministic
/// given the seed.
pub fn synth_generate(cfg: &SynthConfig) -> Result<(Dataset, Vec<f64>)> {
    if cfg.n_queries == 0 || cfg.items_per_query == 0 || cfg.feature_dim == 0 {
        return Err(Error::invalid("synthetic sizes must be positive"));
    }
    if cfg.n_grades < 2 {
        return Err(Error::invalid("need at least 2 relevance grades"));
    }
    if !cfg.noise_sd.is_finite() || cfg.noise_sd < 0.0 {
        return Err(Error::invalid("noise_sd must be finite and >= 0"));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut weights: Vec<f64> = (0..cfg.feature_dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    if norm > 1e-12 {
        for w in &mut weights {
            *w /= norm;
        }
    } else {
        weights[0] = 1.0;
    }

    let m = cfg.items_per_query;
    let mut rows = Vec::with_capacity(cfg.n_queries * m);
    for q in 0..cfg.n_queries {
        let query_id = (q + 1).to_string();
        let mut latents = Vec::with_capacity(m);
        let mut feats = Vec::with_capacity(m);
        for _ in 0..m {
            let x: Vec<f64> = (0..cfg.feature_dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            let noise: f64 = rng.sample::<f64, _>(StandardNormal);
            let latent =
                x.iter().zip(&weights).map(|(xi, wi)| xi * wi).sum::<f64>() + cfg.noise_sd * noise;
            latents.push(latent);
            feats.push(x);
        }
        // equal-mass bins of the within-query latent ranking
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| latents[a].total_cmp(&latents[b]).then(a.cmp(&b)));
        let mut grades = vec![0u32; m];
        for (rank, &item) in order.iter().enumerate() {
            grades[item] = (rank * cfg.n_grades as usize / m) as u32;
        }
        for (item, x) in feats.into_iter().enumerate() {
            rows.push(Row {
                relevance: grades[item],
                query_id: query_id.clone(),
                features: x,
                doc_id: None,
            });
        }
    }

    Ok((
        Dataset {
            rows,
            feature_dim: cfg.feature_dim,
        },
        weights,
    ))
}

/// Split a dataset by whole query groups, in order, into `counts.len()`
/// parts. The counts must use up every query; each part inherits the parent
/// feature dimension.
pub fn split_dataset(d: &Dataset, counts: &[usize]) -> Result<Vec<Dataset>> {
    let groups = group_by_query(d);
    let total: usize = counts.iter().sum();
    if total != groups.len() {
        return Err(Error::invalid(format!(
            "split counts sum to {total} but the dataset has {} queries",
            groups.len()
        )));
    }
    let mut parts = Vec::with_capacity(counts.len());
    let mut next = 0usize;
    for &count in counts {
        let mut rows = Vec::new();
        for g in &groups[next..next + count] {
            rows.extend(g.rows.iter().map(|&r| d.rows[r].clone()));
        }
        next += count;
        parts.push(Dataset {
            rows,
            feature_dim: d.feature_dim,
        });
    }
    Ok(parts)
}
