//! On-disk formats: action specs, bank files, coefficient datasets, CSV.
//!
//! Datasets are JSON lines. The first line is a header
//! `{"profile": [[k, p], ...], "seed": s, "decay": r, "m": m}`; each following
//! line is one point as an array of `[re, im]` pairs in profile order.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::annbench::{CoefficientDataset, DatasetProvenance};
use crate::bank::MaxFilterBank;
use crate::bispectrum::FrequencyProfile;
use crate::error::{Error, Result};
use crate::group::{ActionSpec, GroupAction};
use crate::point::OrbitPoint;

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Parses an action spec given either inline JSON or a path to a JSON file.
pub fn load_action(spec: &str) -> Result<GroupAction> {
    let trimmed = spec.trim_start();
    let parsed: ActionSpec = if trimmed.starts_with('{') {
        parse_json(trimmed, "action spec")?
    } else {
        let text =
            std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("reading action file {spec}: {e}")))?;
        parse_json(&text, "action spec")?
    };
    // Invalid groups or weights keep their own kind rather than becoming parse errors.
    GroupAction::try_from(parsed)
}

pub fn action_to_json(action: &GroupAction) -> String {
    serde_json::to_string(action).expect("action serializes")
}

pub fn read_bank(text: &str) -> Result<MaxFilterBank> {
    // Semantic failures inside the bank (dimension, config) keep their own kind.
    let value: serde_json::Value = parse_json(text, "bank file")?;
    let file: BankSpec = serde_json::from_value(value).map_err(|e| Error::Parse(format!("bank file: {e}")))?;
    let mut bank = MaxFilterBank::new(file.action, file.templates, file.config)?;
    if let Some(seed) = file.seed {
        bank = bank.with_seed(seed);
    }
    Ok(bank)
}

pub fn write_bank(bank: &MaxFilterBank) -> String {
    let mut s = serde_json::to_string_pretty(bank).expect("bank serializes");
    s.push('\n');
    s
}

#[derive(Deserialize)]
struct BankSpec {
    action: GroupAction,
    templates: Vec<OrbitPoint>,
    #[serde(default)]
    config: crate::maxfilter::CircleSolverConfig,
    #[serde(default)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DatasetHeader {
    profile: FrequencyProfile,
    seed: u64,
    decay: f64,
    m: usize,
}

pub fn write_dataset<W: Write>(out: &mut W, dataset: &CoefficientDataset) -> std::io::Result<()> {
    let header = DatasetHeader {
        profile: dataset.profile.clone(),
        seed: dataset.provenance.seed,
        decay: dataset.provenance.decay,
        m: dataset.points.len(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))?;
    for p in &dataset.points {
        let pairs: Vec<[f64; 2]> = p.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        writeln!(out, "{}", serde_json::to_string(&pairs).expect("point serializes"))?;
    }
    Ok(())
}

/// Reads a dataset; errors carry the 1-based line number.
pub fn read_dataset<R: BufRead>(input: R) -> Result<CoefficientDataset> {
    let mut lines = input.lines().enumerate();
    let header: DatasetHeader = loop {
        match lines.next() {
            None => return Err(Error::Parse("dataset file has no header line".into())),
            Some((i, line)) => {
                let line = line.map_err(|e| Error::Parse(e.to_string()).at_line(i + 1))?;
                if line.trim().is_empty() {
                    continue;
                }
                break parse_json(&line, "dataset header").map_err(|e| e.at_line(i + 1))?;
            }
        }
    };
    let dim = header.profile.dim();
    let mut points = Vec::with_capacity(header.m);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Parse(e.to_string()).at_line(lineno))?;
        if line.trim().is_empty() {
            continue;
        }
        let pairs: Vec<[f64; 2]> = parse_json(&line, "dataset point").map_err(|e| e.at_line(lineno))?;
        if pairs.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: pairs.len() }.at_line(lineno));
        }
        let coords: Vec<f64> = pairs.iter().flatten().copied().collect();
        if !coords.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dataset coordinates".into()).at_line(lineno));
        }
        points.push(OrbitPoint::new(coords));
    }
    if points.len() != header.m {
        return Err(Error::Parse(format!("header declares m = {} but {} points follow", header.m, points.len())));
    }
    Ok(CoefficientDataset {
        profile: header.profile,
        points,
        provenance: DatasetProvenance { seed: header.seed, decay: header.decay, m: header.m },
    })
}

/// Number formatting for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FloatFormat {
    /// 12 significant digits.
    #[default]
    Short,
    /// Shortest representation that round-trips exactly.
    Full,
}

impl FloatFormat {
    pub fn format(self, v: f64) -> String {
        match self {
            FloatFormat::Full => format!("{v:?}"),
            FloatFormat::Short => {
                if !v.is_finite() {
                    return format!("{v:?}");
                }
                let r: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
                format!("{r:?}")
            }
        }
    }
}

pub fn csv_row(values: &[f64], fmt: FloatFormat) -> String {
    values.iter().map(|&v| fmt.format(v)).collect::<Vec<_>>().join(",")
}

pub fn write_csv<W: Write>(out: &mut W, header: Option<&[&str]>, rows: &[Vec<f64>], fmt: FloatFormat) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(out, "{}", h.join(","))?;
    }
    for r in rows {
        writeln!(out, "{}", csv_row(r, fmt))?;
    }
    Ok(())
}

/// Parses comma-separated reals, e.g. `"1,0,0.5"`.
pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("'{t}': {e}"))))
        .collect::<Result<Vec<f64>>>()?;
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("input vector".into()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annbench::synth_dataset;

    #[test]
    fn dataset_round_trip() {
        let p = FrequencyProfile::new(vec![(0, 1), (1, 2), (3, 1)]).unwrap();
        let ds = synth_dataset(&p, 7, 1.5, 42).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &ds).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn dataset_errors_carry_line_numbers() {
        let text = "{\"profile\":[[1,2]],\"seed\":0,\"decay\":0,\"m\":2}\n[[1,0],[0,1]]\n[[1,0]]\n";
        let err = read_dataset(text.as_bytes()).unwrap_err();
        match err {
            Error::AtLine { line, inner } => {
                assert_eq!(line, 3);
                assert!(matches!(*inner, Error::DimensionMismatch { expected: 2, got: 1 }));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = "{\"profile\":[[1,1]],\"seed\":0,\"decay\":0,\"m\":1}\nnot json\n";
        assert!(matches!(read_dataset(text.as_bytes()), Err(Error::AtLine { line: 2, .. })));
    }

    #[test]
    fn empty_dataset_is_readable() {
        let text = "{\"profile\":[[1,1]],\"seed\":0,\"decay\":0,\"m\":0}\n";
        assert!(read_dataset(text.as_bytes()).unwrap().points.is_empty());
    }

    #[test]
    fn action_inline_and_file() {
        let a = load_action(r#"{"kind":"circle","weights":[1,2]}"#).unwrap();
        assert_eq!(a.dim_real(), 4);
        let dir = std::env::temp_dir().join(format!("mf-action-{}", std::process::id()));
        std::fs::write(&dir, action_to_json(&a)).unwrap();
        assert_eq!(load_action(dir.to_str().unwrap()).unwrap(), a);
        std::fs::remove_file(&dir).unwrap();
        assert!(matches!(load_action("{oops"), Err(Error::Parse(_))));
    }

    #[test]
    fn bank_round_trip_is_exact() {
        let a = GroupAction::circle(vec![1, 3]).unwrap();
        let bank = MaxFilterBank::generate(a, Some(4), 9, Default::default()).unwrap();
        let back = read_bank(&write_bank(&bank)).unwrap();
        assert_eq!(back, bank);
    }

    #[test]
    fn float_formats() {
        assert_eq!(FloatFormat::Short.format(3.0), "3.0");
        assert_eq!(FloatFormat::Short.format(1.0 / 3.0), "0.333333333333");
        assert_eq!(FloatFormat::Short.format(13f64.sqrt()), "3.60555127546");
        assert_eq!(FloatFormat::Full.format(0.1), "0.1");
        let v = 13f64.sqrt();
        assert_eq!(FloatFormat::Full.format(v).parse::<f64>().unwrap(), v);
        assert_eq!(parse_vector("1, 0,2.5").unwrap(), vec![1.0, 0.0, 2.5]);
        assert!(parse_vector("1,x").is_err());
    }
}
