//! Artifact writers. CSV files always carry a header row; JSON files mirror
//! the same columns as arrays.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use abshift::wave::FourierCoeff;
use abshift::{Dist, SampleSet};
use serde::Serialize;
use serde_json::json;

use crate::config::Format;
use crate::error::RunError;

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn write_summary(dir: &Path, value: &impl Serialize) -> Result<(), RunError> {
    write_json(&dir.join("summary.json"), value)
}

/// Writes `name.csv` (`axis,density`) or `name.json`; returns the file name.
pub fn write_distribution(dir: &Path, name: &str, dist: &Dist, format: Format) -> Result<String, RunError> {
    match format {
        Format::Csv => {
            let file = format!("{name}.csv");
            let mut w = csv::Writer::from_path(dir.join(&file))?;
            w.write_record(["axis", "density"])?;
            for (x, p) in dist.axis().iter().zip(dist.density()) {
                w.write_record([x.to_string(), p.to_string()])?;
            }
            w.flush()?;
            Ok(file)
        }
        Format::Json => {
            let file = format!("{name}.json");
            write_json(
                &dir.join(&file),
                &json!({ "kind": dist.kind(), "axis": dist.axis(), "density": dist.density() }),
            )?;
            Ok(file)
        }
    }
}

/// Fourier coefficients of every set in one table: `set,l,re,im`.
pub fn write_fourier(
    dir: &Path,
    sets: &BTreeMap<String, Vec<FourierCoeff>>,
    format: Format,
) -> Result<String, RunError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(dir.join("fourier.csv"))?;
            w.write_record(["set", "l", "re", "im"])?;
            for (set, coeffs) in sets {
                for f in coeffs {
                    w.write_record([set.clone(), f.l.to_string(), f.value.re.to_string(), f.value.im.to_string()])?;
                }
            }
            w.flush()?;
            Ok("fourier.csv".into())
        }
        Format::Json => {
            let rows: Vec<_> = sets
                .iter()
                .flat_map(|(set, cs)| {
                    cs.iter()
                        .map(move |f| json!({ "set": set, "l": f.l, "re": f.value.re, "im": f.value.im }))
                })
                .collect();
            write_json(&dir.join("fourier.json"), &rows)?;
            Ok("fourier.json".into())
        }
    }
}

/// Samples as `index,value`.
pub fn write_samples(dir: &Path, samples: &SampleSet, format: Format) -> Result<String, RunError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(dir.join("samples.csv"))?;
            w.write_record(["index", "value"])?;
            for (i, v) in samples.values.iter().enumerate() {
                w.write_record([i.to_string(), v.to_string()])?;
            }
            w.flush()?;
            Ok("samples.csv".into())
        }
        Format::Json => {
            write_json(
                &dir.join("samples.json"),
                &json!({
                    "seed": samples.seed,
                    "algorithm": abshift::measure::SAMPLER_ALGORITHM,
                    "index": (0..samples.values.len()).collect::<Vec<_>>(),
                    "value": samples.values,
                }),
            )?;
            Ok("samples.json".into())
        }
    }
}

/// Scalars as `name,value`.
pub fn write_scalars(dir: &Path, scalars: &BTreeMap<String, f64>, format: Format) -> Result<String, RunError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(dir.join("scalars.csv"))?;
            w.write_record(["name", "value"])?;
            for (k, v) in scalars {
                w.write_record([k.clone(), v.to_string()])?;
            }
            w.flush()?;
            Ok("scalars.csv".into())
        }
        Format::Json => {
            write_json(&dir.join("scalars.json"), scalars)?;
            Ok("scalars.json".into())
        }
    }
}

pub fn write_report(dir: &Path, name: &str, value: &impl Serialize) -> Result<String, RunError> {
    let file = format!("{name}.json");
    write_json(&dir.join(&file), value)?;
    Ok(file)
}

/// Sweep table: one row per point, scalar columns in name order.
pub fn write_sweep_table(
    dir: &Path,
    parameter: &str,
    rows: &[crate::run::SweepRow],
) -> Result<(), RunError> {
    let names: std::collections::BTreeSet<&String> = rows.iter().flat_map(|r| r.scalars.keys()).collect();
    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    let mut header = vec!["point".to_string(), parameter.to_string(), "complete".into(), "passed".into(), "exit_code".into()];
    header.extend(names.iter().map(|n| n.to_string()));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.point.clone(),
            r.value.to_string(),
            r.complete.to_string(),
            r.passed.to_string(),
            r.exit_code.to_string(),
        ];
        rec.extend(names.iter().map(|n| r.scalars.get(*n).map_or(String::new(), |v| v.to_string())));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
