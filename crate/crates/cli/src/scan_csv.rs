//! Scan CSV: one row per point, both flipper channels.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use polariphase::ScanRecord;

pub const HEADER: [&str; 6] = [
    "index",
    "eta_rad",
    "position_mm",
    "counts_off",
    "counts_on",
    "live_time_s",
];

/// Writes records with the shortest round-trip representation of each float.
pub fn write_scan<W: Write>(out: W, records: &[ScanRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.index.to_string(),
            r.eta.to_string(),
            r.position_mm.to_string(),
            r.counts_off.to_string(),
            r.counts_on.to_string(),
            r.live_time_s.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scan<R: Read>(input: R) -> Result<Vec<ScanRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers().context("reading CSV header")?.clone();
    for name in HEADER {
        if !headers.iter().any(|h| h == name) {
            bail!("scan CSV is missing column `{name}`");
        }
    }
    if headers.len() != HEADER.len() || headers.iter().zip(HEADER).any(|(a, b)| a != b) {
        bail!(
            "scan CSV header must be `{}`, got `{}`",
            HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        );
    }
    let mut records = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading CSV row {}", row + 1))?;
        let field = |k: usize| -> Result<f64> {
            let v = &rec[k];
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .with_context(|| format!("row {}: `{v}` in column `{}` is not a number", row + 1, HEADER[k]))
        };
        let index: usize = rec[0]
            .parse()
            .with_context(|| format!("row {}: index `{}` is not an integer", row + 1, &rec[0]))?;
        if index != row {
            bail!("row {}: index {index} out of sequence", row + 1);
        }
        let (counts_off, counts_on) = (field(3)?, field(4)?);
        if counts_off < 0.0 || counts_on < 0.0 {
            bail!("row {}: negative counts", row + 1);
        }
        records.push(ScanRecord {
            index,
            eta: field(1)?,
            position_mm: field(2)?,
            counts_off,
            counts_on,
            live_time_s: field(5)?,
        });
    }
    if records.is_empty() {
        bail!("scan CSV has no rows");
    }
    Ok(records)
}

/// True when any count is fractional, i.e. the file holds expectations.
pub fn has_fractional_counts(records: &[ScanRecord]) -> bool {
    records
        .iter()
        .any(|r| r.counts_off.fract() != 0.0 || r.counts_on.fract() != 0.0)
}
