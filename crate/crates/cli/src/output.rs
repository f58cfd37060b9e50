//! Writes a report bundle to disk.
//!
//! `report.json`, `records.csv`, `model.json` and the plots depend only on
//! the config; the run time and file hashes go to `manifest.json` alone.

use crate::config::{Command, RunConfig, SCHEMA_VERSION};
use crate::run::{ReportBundle, Row, Section};
use crate::svg;
use anyhow::{Context, Result};
use modelcheck::Verdict;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: [&str; 8] = ["section", "label", "lhs", "rhs", "ratio", "bound", "margin", "log_scale"];

/// Shared number format of the CSV cells and the SVG data attributes.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    command: Command,
    verdict: Verdict,
    failures: Vec<String>,
    sections: &'a [Section],
}

pub fn report_json(bundle: &ReportBundle) -> Result<String> {
    let verdict = if bundle.passed() {
        if bundle.sections.iter().any(|s| s.verdict == Verdict::Holds) {
            Verdict::Holds
        } else {
            Verdict::ReportOnly
        }
    } else {
        Verdict::Violated
    };
    let r = Report {
        schema_version: SCHEMA_VERSION,
        command: bundle.config.command,
        verdict,
        failures: bundle.failures(),
        sections: &bundle.sections,
    };
    Ok(serde_json::to_string_pretty(&r)? + "\n")
}

pub fn records_csv<'a>(rows: impl Iterator<Item = &'a Row>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.section.clone(),
            r.label.clone(),
            cell(r.lhs),
            cell(r.rhs),
            cell(r.ratio),
            cell(r.bound),
            cell(r.margin),
            cell(r.log_scale),
        ])?;
    }
    Ok(w.into_inner()?)
}

/// `sha256` of the config as re-serialized to TOML.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    Ok(sha256_hex(cfg.to_toml()?.as_bytes()))
}

#[derive(Serialize)]
struct Manifest {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    model_format_version: u32,
    config_sha256: String,
    config: String,
    created: String,
    passed: bool,
    files: BTreeMap<String, String>,
}

fn plot_name(section: &str) -> String {
    section
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}

/// Writes every output file; returns the paths written.
pub fn write_bundle(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    files.insert("report.json".into(), report_json(bundle)?.into_bytes());
    files.insert("records.csv".into(), records_csv(bundle.rows())?);
    files.insert("model.json".into(), bundle.model_json.clone().into_bytes());
    if bundle.config.output.plot {
        for s in &bundle.sections {
            if let Some(chart) = svg::ratio_chart(&s.name, &s.rows) {
                files.insert(format!("plots/{}.svg", plot_name(&s.name)), chart.into_bytes());
            }
        }
        fs::create_dir_all(dir.join("plots"))?;
    }
    let mut written = Vec::new();
    for (name, bytes) in &files {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        written.push(path);
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "modelcheck",
        version: env!("CARGO_PKG_VERSION"),
        model_format_version: modelcheck::geometry::MODEL_FORMAT_VERSION,
        config_sha256: config_hash(&bundle.config)?,
        config: bundle.config.to_toml()?,
        created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        passed: bundle.passed(),
        files: files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    written.push(path);
    Ok(written)
}
