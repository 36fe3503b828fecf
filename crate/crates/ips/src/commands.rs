//! The `generate`, `compare`, `heatmap` and `record` commands.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use ips_core::backend::prefix_tree;
use ips_core::metrics::{diagnostics, distinct_n, sequence_states, similarity_heatmap};
use ips_core::{
    encode_context, generate, validate_config, Backend, DialogueContext, GenerationResult,
    ScriptedBackend, ScriptedTable, Strategy, StrategyConfig, TokenId, Tokenizer,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::heatmap;
use crate::output::{Fixed6, GenerationLine};
use crate::records::{read_records, NumberedRecord};

/// Reads a whitespace vocabulary: one word per line, the line index is its id.
pub fn load_tokenizer(path: Option<&Path>) -> Result<Tokenizer, CliError> {
    let Some(path) = path else {
        return Ok(Tokenizer::Passthrough);
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    let words = text.lines().map(|l| l.trim().to_string()).collect();
    Tokenizer::whitespace(words).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn checked_config(backend: &dyn Backend, cfg: &StrategyConfig) -> Result<StrategyConfig, CliError> {
    validate_config(cfg.clone(), backend.info().vocab_size).map_err(|e| CliError::Config(e.to_string()))
}

fn load_contexts(
    input: &Path,
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
) -> Result<Vec<(NumberedRecord, DialogueContext)>, CliError> {
    let info = backend.info();
    read_records(input)?
        .into_iter()
        .map(|r| {
            let ctx = r.context(input, tokenizer, &info)?;
            Ok((r, ctx))
        })
        .collect()
}

fn generate_all(
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    contexts: &[(NumberedRecord, DialogueContext)],
    cfg: &StrategyConfig,
) -> Result<Vec<GenerationResult>, CliError> {
    let eou = backend.info().eou_token_id;
    contexts
        .par_iter()
        .map(|(rec, ctx)| {
            let mut result = generate(backend, ctx, cfg)
                .map_err(|e| CliError::Backend(format!("record `{}`: {e}", rec.record.id)))?;
            result.text = tokenizer.decode(&result.tokens, eou);
            Ok(result)
        })
        .collect()
}

/// Writes one JSON line per input record, in input order.
pub fn cmd_generate(
    input: &Path,
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    cfg: &StrategyConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = checked_config(backend, cfg)?;
    let contexts = load_contexts(input, backend, tokenizer)?;
    let results = generate_all(backend, tokenizer, &contexts, &cfg)?;
    for ((rec, _), result) in contexts.iter().zip(&results) {
        let line = GenerationLine::new(&rec.record.id, cfg.strategy.name(), result);
        serde_json::to_writer(&mut *out, &line).map_err(anyhow::Error::from)?;
        writeln!(out).map_err(anyhow::Error::from)?;
    }
    out.flush().map_err(anyhow::Error::from)?;
    Ok(())
}

/// Corpus metrics of one strategy under one seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub distinct_2: f64,
    pub distinct_4: f64,
    pub mean_intra_response_cosine: f64,
    pub mean_context_cosine: f64,
    pub mean_elapsed_s: f64,
}

impl Metrics {
    fn mean(all: &[Metrics]) -> Metrics {
        let n = all.len() as f64;
        let avg = |f: fn(&Metrics) -> f64| all.iter().map(f).sum::<f64>() / n;
        Metrics {
            distinct_2: avg(|m| m.distinct_2),
            distinct_4: avg(|m| m.distinct_4),
            mean_intra_response_cosine: avg(|m| m.mean_intra_response_cosine),
            mean_context_cosine: avg(|m| m.mean_context_cosine),
            mean_elapsed_s: avg(|m| m.mean_elapsed_s),
        }
    }

    fn fixed(&self) -> [Fixed6; 5] {
        [
            Fixed6(self.distinct_2),
            Fixed6(self.distinct_4),
            Fixed6(self.mean_intra_response_cosine),
            Fixed6(self.mean_context_cosine),
            Fixed6(self.mean_elapsed_s),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub responses: Vec<Vec<TokenId>>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub strategy: Strategy,
    pub mean: Metrics,
    pub per_seed: Vec<SeedRun>,
}

fn mean_or_nan(values: &[f64]) -> f64 {
    if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn seed_metrics(
    backend: &dyn Backend,
    contexts: &[(NumberedRecord, DialogueContext)],
    results: &[GenerationResult],
) -> Result<(Vec<Vec<TokenId>>, Metrics), CliError> {
    let eou = backend.info().eou_token_id;
    let responses: Vec<Vec<TokenId>> = results
        .iter()
        .map(|r| r.tokens.iter().copied().filter(|&t| t != eou).collect())
        .collect();
    let diags = contexts
        .par_iter()
        .zip(results)
        .map(|((_, ctx), result)| {
            let enc = encode_context(ctx, eou).map_err(CliError::backend)?;
            let states = sequence_states(backend, &enc, &result.tokens).map_err(CliError::backend)?;
            let hiddens = states.response_hiddens();
            if hiddens.is_empty() {
                return Ok(None);
            }
            diagnostics(result, &hiddens, &states.utterance_reps())
                .map(Some)
                .map_err(CliError::backend)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let diags: Vec<_> = diags.into_iter().flatten().collect();
    let intra: Vec<f64> = diags.iter().map(|d| d.mean_intra_response_cosine).collect();
    let context: Vec<f64> = diags.iter().map(|d| d.mean_context_cosine).collect();
    let elapsed: Vec<f64> = results.iter().map(|r| r.elapsed).collect();
    let metrics = Metrics {
        distinct_2: distinct_n(&responses, 2),
        distinct_4: distinct_n(&responses, 4),
        mean_intra_response_cosine: mean_or_nan(&intra),
        mean_context_cosine: mean_or_nan(&context),
        mean_elapsed_s: mean_or_nan(&elapsed),
    };
    Ok((responses, metrics))
}

/// Runs every strategy under every seed and averages the corpus metrics over
/// seeds. Responses without content tokens are left out of the cosine means.
pub fn cmd_compare(
    input: &Path,
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    base: &StrategyConfig,
    strategies: &[Strategy],
    seeds: &[u64],
) -> Result<Vec<CompareRow>, CliError> {
    if strategies.is_empty() || seeds.is_empty() {
        return Err(CliError::Config("compare needs at least one strategy and one seed".into()));
    }
    let contexts = load_contexts(input, backend, tokenizer)?;
    let mut rows = Vec::new();
    for &strategy in strategies {
        let mut per_seed = Vec::new();
        for &seed in seeds {
            let cfg = checked_config(
                backend,
                &StrategyConfig {
                    strategy,
                    seed,
                    ..base.clone()
                },
            )?;
            let results = generate_all(backend, tokenizer, &contexts, &cfg)?;
            let (responses, metrics) = seed_metrics(backend, &contexts, &results)?;
            per_seed.push(SeedRun {
                seed,
                responses,
                metrics,
            });
        }
        let all: Vec<Metrics> = per_seed.iter().map(|s| s.metrics).collect();
        rows.push(CompareRow {
            strategy,
            mean: Metrics::mean(&all),
            per_seed,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
struct SeedJson {
    seed: u64,
    distinct_2: Fixed6,
    distinct_4: Fixed6,
    mean_intra_response_cosine: Fixed6,
    mean_context_cosine: Fixed6,
    mean_elapsed_s: Fixed6,
}

#[derive(Serialize)]
struct RowJson {
    strategy: &'static str,
    distinct_2: Fixed6,
    distinct_4: Fixed6,
    mean_intra_response_cosine: Fixed6,
    mean_context_cosine: Fixed6,
    mean_elapsed_s: Fixed6,
    per_seed: Vec<SeedJson>,
}

#[derive(Serialize)]
struct CompareJson {
    rows: Vec<RowJson>,
}

/// Pretty-printed JSON report: seed-averaged rows, each with its per-seed values.
pub fn compare_json(rows: &[CompareRow]) -> String {
    let rows: Vec<RowJson> = rows
        .iter()
        .map(|r| {
            let [distinct_2, distinct_4, intra, context, elapsed] = r.mean.fixed();
            RowJson {
                strategy: r.strategy.name(),
                distinct_2,
                distinct_4,
                mean_intra_response_cosine: intra,
                mean_context_cosine: context,
                mean_elapsed_s: elapsed,
                per_seed: r
                    .per_seed
                    .iter()
                    .map(|s| {
                        let [distinct_2, distinct_4, intra, context, elapsed] = s.metrics.fixed();
                        SeedJson {
                            seed: s.seed,
                            distinct_2,
                            distinct_4,
                            mean_intra_response_cosine: intra,
                            mean_context_cosine: context,
                            mean_elapsed_s: elapsed,
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    serde_json::to_string_pretty(&CompareJson { rows }).expect("report serializes")
}

const COLUMNS: [&str; 6] = ["strategy", "distinct_2", "distinct_4", "intra_cos", "context_cos", "elapsed_s"];

/// Aligned plain-text table of the seed-averaged metrics.
pub fn compare_table(rows: &[CompareRow]) -> String {
    let mut cells = vec![COLUMNS.iter().map(|c| c.to_string()).collect::<Vec<_>>()];
    for r in rows {
        let mut line = vec![r.strategy.name().to_string()];
        line.extend(r.mean.fixed().iter().map(|f| {
            if f.0.is_finite() {
                f.text()
            } else {
                "-".to_string()
            }
        }));
        cells.push(line);
    }
    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|c| cells.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for line in cells {
        let padded: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = widths[c])
                } else {
                    format!("{s:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Labelled similarity matrix over the content tokens of one record's
/// context and generated response.
#[derive(Debug, Clone)]
pub struct Heatmap {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub result: GenerationResult,
}

pub fn build_heatmap(
    input: &Path,
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    cfg: &StrategyConfig,
    record_id: &str,
) -> Result<Heatmap, CliError> {
    let cfg = checked_config(backend, cfg)?;
    let records = read_records(input)?;
    let rec = records
        .iter()
        .find(|r| r.record.id == record_id)
        .ok_or_else(|| CliError::MissingRecord(record_id.to_string()))?;
    let info = backend.info();
    let ctx = rec.context(input, tokenizer, &info)?;
    let result = generate(backend, &ctx, &cfg).map_err(CliError::backend)?;
    let enc = encode_context(&ctx, info.eou_token_id).map_err(CliError::backend)?;
    let states = sequence_states(backend, &enc, &result.tokens).map_err(CliError::backend)?;
    let positions = states.content_positions();
    let mut labels = Vec::with_capacity(positions.len());
    for &p in &positions {
        let word = tokenizer.label(states.tokens[p]);
        labels.push(if p < states.context_len {
            let utterance = states.eou_positions.iter().filter(|&&e| e < p).count() + 1;
            format!("u{utterance}:{word}")
        } else {
            format!("r:{word}")
        });
    }
    let hiddens: Vec<_> = positions.iter().map(|&p| states.hiddens[p].clone()).collect();
    let matrix = similarity_heatmap(&hiddens).map_err(CliError::backend)?;
    Ok(Heatmap {
        labels,
        matrix,
        result,
    })
}

pub fn cmd_heatmap(
    input: &Path,
    backend: &dyn Backend,
    tokenizer: &Tokenizer,
    cfg: &StrategyConfig,
    record_id: &str,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let map = build_heatmap(input, backend, tokenizer, cfg, record_id)?;
    heatmap::write_csv(out, &map.labels, &map.matrix)?;
    Ok(())
}

/// Upper bound on the number of prefixes `record` will capture.
pub const MAX_RECORDED_PREFIXES: usize = 200_000;

/// Captures `source` on every record's encoded context extended by all token
/// sequences of length up to `depth`, as a scripted-backend table.
pub fn cmd_record(
    input: &Path,
    source: &dyn Backend,
    tokenizer: &Tokenizer,
    depth: usize,
) -> Result<ScriptedTable, CliError> {
    let info = source.info();
    let contexts = load_contexts(input, source, tokenizer)?;
    let per_record = (0..=depth as u32)
        .try_fold(0usize, |acc, k| {
            info.vocab_size
                .checked_pow(k)
                .and_then(|n| acc.checked_add(n))
        })
        .unwrap_or(usize::MAX);
    if per_record.saturating_mul(contexts.len()) > MAX_RECORDED_PREFIXES {
        return Err(CliError::Config(format!(
            "recording {} records at depth {depth} over {} tokens exceeds {MAX_RECORDED_PREFIXES} prefixes",
            contexts.len(),
            info.vocab_size
        )));
    }
    let mut prefixes = BTreeSet::new();
    for (_, ctx) in &contexts {
        let enc = encode_context(ctx, info.eou_token_id).map_err(CliError::backend)?;
        prefixes.extend(prefix_tree(&enc.tokens, info.vocab_size, depth));
    }
    let prefixes: Vec<Vec<TokenId>> = prefixes.into_iter().collect();
    let tables = prefixes
        .par_chunks(256)
        .map(|chunk| ScriptedBackend::record(source, chunk.iter().cloned()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::backend)?;
    let mut table = ScriptedTable {
        info,
        entries: Vec::with_capacity(prefixes.len()),
    };
    for t in tables {
        table.entries.extend(t.to_table().entries);
    }
    Ok(table)
}
