//! Cosine-similarity heatmap CSV: a header row of token labels after a
//! corner cell, then one row per token holding its label and six-decimal
//! similarities.

use std::io::{Read, Write};

use anyhow::{bail, Context};

use crate::output::Fixed6;

pub const CORNER: &str = "token";

pub fn write_csv<W: Write>(out: W, labels: &[String], matrix: &[Vec<f64>]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(std::iter::once(CORNER).chain(labels.iter().map(String::as_str)))?;
    for (label, row) in labels.iter().zip(matrix) {
        let cells: Vec<String> = row.iter().map(|&v| Fixed6(v).text()).collect();
        w.write_record(std::iter::once(label.as_str()).chain(cells.iter().map(String::as_str)))?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a heatmap CSV back into labels and matrix.
pub fn read_csv<R: Read>(input: R) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(input);
    let mut rows = r.records();
    let header = rows.next().context("empty heatmap")??;
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut matrix = Vec::with_capacity(labels.len());
    for (i, row) in rows.enumerate() {
        let row = row?;
        if row.len() != labels.len() + 1 {
            bail!("row {} has {} cells, expected {}", i + 1, row.len(), labels.len() + 1);
        }
        if row[0] != labels[i] {
            bail!("row {} is labelled `{}`, expected `{}`", i + 1, &row[0], labels[i]);
        }
        matrix.push(
            row.iter()
                .skip(1)
                .map(|c| c.parse::<f64>().with_context(|| format!("bad cell `{c}`")))
                .collect::<anyhow::Result<Vec<_>>>()?,
        );
    }
    if matrix.len() != labels.len() {
        bail!("{} rows for {} labels", matrix.len(), labels.len());
    }
    Ok((labels, matrix))
}
