use std::io::BufReader;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use maxfilter_core::annbench::{evaluate_lambda, synth_dataset, synth_points, AnnReport, CoefficientDataset};
use maxfilter_core::embedding::embed_batch;
use maxfilter_core::formats::{self, csv_row, FloatFormat};
use maxfilter_core::maxfilter::quotient_distance;
use maxfilter_core::stability::{
    estimate_bilipschitz, figure3_curve, figure3_repro, find_degenerate_direction, local_lower_probe, loglog_slope,
    DegenerateDirectionResult, SamplerConfig, ScalePoint, StabilityReport,
};
use maxfilter_core::{rng, CircleSolverConfig, Error as CoreError, FrequencyProfile};

use crate::args::*;
use crate::output::Outputs;

/// Staged files plus the name of the one printed when there is no --out.
pub struct CommandOutput {
    pub files: Outputs,
    pub primary: &'static str,
}

impl CommandOutput {
    fn single(name: &'static str, bytes: impl Into<Vec<u8>>) -> Self {
        let mut files = Outputs::default();
        files.add(name, bytes);
        CommandOutput { files, primary: name }
    }
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T> {
    match v {
        Some(v) => Ok(v.clone()),
        None => bail!("missing required {flag}"),
    }
}

fn read_dataset_file(path: &std::path::Path) -> Result<CoefficientDataset> {
    let f = std::fs::File::open(path).with_context(|| format!("opening dataset {}", path.display()))?;
    formats::read_dataset(BufReader::new(f)).with_context(|| format!("dataset {}", path.display()))
}

/// Errors if the dataset's points do not fit the embedding, naming the first point line.
fn check_dataset_dim(ds: &CoefficientDataset, dim: usize) -> Result<()> {
    if let Some(p) = ds.points.first() {
        if p.len() != dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: p.len() }.at_line(2).into());
        }
    }
    Ok(())
}

fn csv(header: Option<&str>, rows: &[Vec<f64>], fmt: FloatFormat) -> String {
    let mut s = String::new();
    if let Some(h) = header {
        s.push_str(h);
        s.push('\n');
    }
    for r in rows {
        s.push_str(&csv_row(r, fmt));
        s.push('\n');
    }
    s
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub fn bank(args: &mut BankArgs) -> Result<CommandOutput> {
    if args.backend.backend != Backend::Maxfilter {
        bail!("bank files only exist for the maxfilter backend");
    }
    let resolved = args.backend.resolve(None)?;
    let bank = resolved.bank.expect("maxfilter backend builds a bank");
    Ok(CommandOutput::single("bank.json", formats::write_bank(&bank)))
}

pub fn gen(args: &mut GenArgs) -> Result<CommandOutput> {
    let profile = FrequencyProfile::parse(&required(&args.profile, "--profile")?)?;
    let m = required(&args.m, "--m")?;
    let ds = synth_dataset(&profile, m, args.decay, args.seed)?;
    let mut buf = Vec::new();
    formats::write_dataset(&mut buf, &ds)?;
    Ok(CommandOutput::single("dataset.jsonl", buf))
}

pub fn embed(args: &mut EmbedArgs) -> Result<CommandOutput> {
    let exec = args.run.execution();
    let fmt = float_format(args.full_precision);
    match (&args.x, &args.dataset) {
        (Some(x), None) => {
            let x = formats::parse_vector(x)?;
            let resolved = args.backend.resolve(None)?;
            let row = resolved.embedding.embed(&x)?;
            Ok(CommandOutput::single("embedding.csv", csv(None, &[row], fmt)))
        }
        (None, Some(path)) => {
            let ds = read_dataset_file(path)?;
            let resolved = args.backend.resolve(Some(&ds.profile))?;
            check_dataset_dim(&ds, resolved.embedding.input_dim())?;
            let rows = embed_batch(&*resolved.embedding, &ds.points, exec)?;
            Ok(CommandOutput::single("embedding.csv", csv(None, &rows, fmt)))
        }
        _ => bail!("give exactly one of --x or --dataset"),
    }
}

pub fn dist(args: &mut DistArgs) -> Result<CommandOutput> {
    let action = args.target.resolve(None)?;
    let mut cfg = CircleSolverConfig::high_resolution();
    if let Some(o) = args.oversample {
        cfg.oversample = o;
    }
    if let Some(r) = args.refine {
        cfg.refine_iters = r;
    }
    cfg.validate()?;
    args.oversample = Some(cfg.oversample);
    args.refine = Some(cfg.refine_iters);
    let x = formats::parse_vector(&required(&args.x, "--x")?)?;
    let z = formats::parse_vector(&required(&args.z, "--z")?)?;
    let d = quotient_distance(&action, &x, &z, &cfg)?;
    let mut s = float_format(args.full_precision).format(d);
    s.push('\n');
    Ok(CommandOutput::single("distance.txt", s))
}

#[derive(Serialize)]
struct LocalProbe {
    base: Vec<f64>,
    trace: Vec<ScalePoint>,
    /// Log-log slope of the minimum ratio against the scale.
    min_ratio_slope: f64,
}

#[derive(Serialize)]
struct StabilityOutput {
    global: StabilityReport,
    local_probe: Option<LocalProbe>,
    degenerate_direction: Option<DegenerateDirectionResult>,
}

pub fn stability(args: &mut StabilityArgs) -> Result<CommandOutput> {
    let exec = args.run.execution();
    let fmt = float_format(args.full_precision);
    let resolved = args.backend.resolve(None)?;
    let emb = &*resolved.embedding;
    let cfg = SamplerConfig { scale: args.scale, histogram_bins: args.bins, ..SamplerConfig::default() };
    let global = estimate_bilipschitz(emb, &resolved.action, &cfg, args.pairs, args.backend.seed, exec)?;

    let mut local_probe = None;
    let mut degenerate_direction = None;
    if let Some(px) = &args.probe_x {
        let base = formats::parse_vector(px)?;
        let scales = formats::parse_vector(&args.probe_scales)?;
        let trace =
            local_lower_probe(emb, &resolved.action, &base, &scales, args.probe_pairs, args.backend.seed, &cfg, exec)?;
        let pts: Vec<(f64, f64)> = trace.iter().map(|p| (p.scale, p.min_ratio)).collect();
        local_probe = Some(LocalProbe { min_ratio_slope: loglog_slope(&pts), base: base.clone(), trace });
        if args.degenerate {
            degenerate_direction = Some(find_degenerate_direction(emb, &resolved.action, &base, None, &cfg)?);
        }
    } else if args.degenerate {
        bail!("--degenerate needs --probe-x");
    }

    let mut files = Outputs::default();
    let hist: Vec<Vec<f64>> = global.ratio_histogram.iter().map(|&(lo, c)| vec![lo, c as f64]).collect();
    let trace: Vec<Vec<f64>> =
        global.scale_trace.iter().map(|p| vec![p.scale, p.min_ratio, p.max_ratio, p.pairs as f64]).collect();
    files.add("report.json", json(&StabilityOutput { global, local_probe, degenerate_direction }));
    files.add("histogram.csv", csv(Some("ratio_lower_edge,count"), &hist, fmt));
    files.add("scale_trace.csv", csv(Some("distance_decade,min_ratio,max_ratio,pairs"), &trace, fmt));
    Ok(CommandOutput { files, primary: "report.json" })
}

pub fn ann(args: &mut AnnArgs) -> Result<CommandOutput> {
    let exec = args.run.execution();
    let fmt = float_format(args.full_precision);
    let seed = args.backend.seed;
    let ds = match &args.dataset {
        Some(path) => {
            if args.m.is_some() || args.decay.is_some() {
                bail!("--m and --decay only apply to synthesized datasets");
            }
            read_dataset_file(path)?
        }
        None => {
            let Some(profile) = args.backend.target.parsed_profile()? else {
                bail!("give --dataset or --profile to synthesize one");
            };
            let m = *args.m.get_or_insert(200);
            let decay = *args.decay.get_or_insert(1.0);
            synth_dataset(&profile, m, decay, seed)?
        }
    };
    if args.queries == 0 {
        return Err(CoreError::Empty("--queries must be positive".into()).into());
    }
    let queries = synth_points(&ds.profile, args.queries, ds.provenance.decay, seed, rng::QUERIES);
    let resolved = args.backend.resolve(Some(&ds.profile))?;
    check_dataset_dim(&ds, resolved.embedding.input_dim())?;
    let report: AnnReport =
        evaluate_lambda(&*resolved.embedding, &resolved.action, &ds.points, &queries, &SamplerConfig::default(), exec)?;

    let rows: Vec<Vec<f64>> = report
        .queries
        .iter()
        .enumerate()
        .map(|(i, q)| {
            vec![
                i as f64,
                q.true_index as f64,
                q.true_distance,
                q.returned_index as f64,
                q.returned_distance,
                q.achieved_lambda,
            ]
        })
        .collect();
    let mut files = Outputs::default();
    files.add("report.json", json(&report));
    files.add(
        "queries.csv",
        csv(Some("query,true_index,true_distance,returned_index,returned_distance,achieved_lambda"), &rows, fmt),
    );
    Ok(CommandOutput { files, primary: "report.json" })
}

pub fn figure3(args: &mut Figure3Args) -> Result<CommandOutput> {
    let fmt = float_format(args.full_precision);
    let ks = formats::parse_vector(&args.k)?;
    if ks.is_empty() || args.samples == 0 {
        return Err(CoreError::Empty("need at least one k and one sample".into()).into());
    }
    let mut cfg = CircleSolverConfig::default();
    if let Some(o) = args.oversample {
        cfg.oversample = o;
    }
    if let Some(r) = args.refine {
        cfg.refine_iters = r;
    }
    cfg.validate()?;
    args.oversample = Some(cfg.oversample);
    args.refine = Some(cfg.refine_iters);

    let curves: Vec<Vec<(f64, f64)>> = ks.iter().map(|&k| figure3_curve(k, args.samples)).collect();
    let rows: Vec<Vec<f64>> = (0..args.samples)
        .map(|j| std::iter::once(curves[0][j].0).chain(curves.iter().map(|c| c[j].1)).collect())
        .collect();
    let header = std::iter::once("theta".to_string())
        .chain(ks.iter().map(|&k| format!("k={}", FloatFormat::Full.format(k))))
        .collect::<Vec<_>>()
        .join(",");
    let maxima = figure3_repro(&ks, &cfg)?;

    let mut files = Outputs::default();
    files.add("figure3.csv", csv(Some(&header), &rows, fmt));
    files.add("maxima.json", json(&maxima));
    Ok(CommandOutput { files, primary: "figure3.csv" })
}
