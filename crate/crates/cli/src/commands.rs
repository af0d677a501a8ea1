use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use idscope_core::estimator::estimate_with_lids;
use idscope_core::ingest::{self, write_npy, NpyDtype};
use idscope_core::report::{
    lid_histogram, lid_kde, redundancy_table, series_report, table_csv, table_text, RedundancyEntry,
};
use idscope_core::{
    EmbeddingMatrix, Error, EstimatorOptions, Result, SeriesPoint, SyntheticKind, SyntheticSpec,
};
use regex::Regex;

use crate::report_json::{ReportJson, RunInfo};
use crate::{
    BaselineArgs, CompareArgs, DensityKind, EstimateArgs, EstimatorArgs, InputArgs, ReportFormat,
    SeriesArgs, SynthArgs, TableFormat,
};

fn options(a: &EstimatorArgs) -> Result<EstimatorOptions> {
    if a.k < 2 {
        return Err(Error::Precondition(format!("k={} is too small, need k >= 2", a.k)));
    }
    Ok(EstimatorOptions {
        k: a.k,
        zero_eps: a.zero_eps,
        normalization: a.normalization(),
    })
}

/// Loads `path` and applies the optional row sample.
fn load_input(path: &Path, input: &InputArgs, est: &EstimatorArgs) -> Result<EmbeddingMatrix> {
    if let Some(s) = input.sample {
        if s < est.k + 1 {
            return Err(Error::Precondition(format!(
                "--sample {s} is too small for k={}, need at least k+1 rows",
                est.k
            )));
        }
    }
    let m = ingest::load(path, input.format)?;
    match input.sample {
        Some(s) => ingest::sample_rows(&m, s, est.seed),
        None => Ok(m),
    }
}

fn write_or_print(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, content).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn emit_report(report: &ReportJson, format: ReportFormat, output: Option<&Path>) -> Result<()> {
    let body = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)
                .map_err(|e| Error::Invariant(format!("serialising report: {e}")))?;
            s.push('\n');
            s
        }
        ReportFormat::Csv => report.to_csv(),
    };
    write_or_print(output, &body)?;
    if output.is_some() {
        println!("{}", report.summary());
    } else {
        eprintln!("{}", report.summary());
    }
    Ok(())
}

pub fn estimate(a: EstimateArgs) -> Result<()> {
    let opts = options(&a.estimator)?;
    let m = load_input(&a.input, &a.input_args, &a.estimator)?;
    let (report, lids) = estimate_with_lids(&m, &opts)?;

    if let (Some(kind), Some(path)) = (a.density, &a.density_out) {
        let curve = match kind {
            DensityKind::Kde => lid_kde(&lids, a.grid_points, a.bandwidth)?,
            DensityKind::Histogram => lid_histogram(&lids, a.bins)?,
        };
        write_or_print(Some(path), &curve.to_csv())?;
    }

    let json = ReportJson::new(
        &report,
        RunInfo {
            source: m.source(),
            seed: a.estimator.seed,
            zero_eps: opts.zero_eps,
            sample: a.input_args.sample,
            synthetic: None,
        },
    )?;
    emit_report(&json, a.output_format, a.output.as_deref())
}

pub fn baseline(a: BaselineArgs) -> Result<()> {
    let opts = options(&a.estimator)?;
    if a.n < opts.k + 1 {
        return Err(Error::Precondition(format!(
            "n={} is too small for k={}, need n >= k+1",
            a.n, opts.k
        )));
    }
    let spec = SyntheticSpec::gaussian(a.n, a.dim, a.estimator.seed);
    let m = spec.generate()?;
    let (report, _) = estimate_with_lids(&m, &opts)?;
    let json = ReportJson::new(
        &report,
        RunInfo {
            source: m.source(),
            seed: a.estimator.seed,
            zero_eps: opts.zero_eps,
            sample: None,
            synthetic: Some(&spec),
        },
    )?;
    emit_report(&json, a.output_format, a.output.as_deref())
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let spec = match a.kind {
        SyntheticKind::Gaussian => {
            if a.intrinsic.is_some_and(|m| m != a.dim) {
                return Err(Error::Precondition(
                    "--intrinsic only applies to --kind hypercube".into(),
                ));
            }
            SyntheticSpec::gaussian(a.n, a.dim, a.seed)
        }
        SyntheticKind::Hypercube => {
            let m = a.intrinsic.ok_or_else(|| {
                Error::Precondition("--kind hypercube needs --intrinsic".into())
            })?;
            SyntheticSpec::hypercube(a.n, m, a.dim, a.seed)
        }
    };
    let m = spec.generate()?;
    write_npy(&a.output, &m, NpyDtype::F8)?;
    println!("{spec} -> {}", a.output.display());
    Ok(())
}

fn step_of(path: &Path, pattern: &Regex) -> Result<u64> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    pattern
        .captures(&name)
        .and_then(|c| c.get(1))
        .and_then(|m| m.as_str().parse().ok())
        .ok_or_else(|| {
            Error::Parse(format!(
                "{}: no step number matching /{}/ in the file name",
                path.display(),
                pattern.as_str()
            ))
        })
}

pub fn series(a: SeriesArgs) -> Result<()> {
    let opts = options(&a.estimator)?;
    let pattern = Regex::new(&a.step_pattern)
        .map_err(|e| Error::Precondition(format!("invalid --step-pattern: {e}")))?;
    if pattern.captures_len() < 2 {
        return Err(Error::Precondition(
            "--step-pattern needs a capture group for the step number".into(),
        ));
    }
    let paths: Vec<PathBuf> = glob::glob(&a.glob)
        .map_err(|e| Error::Precondition(format!("invalid glob: {e}")))?
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Io {
            path: e.path().to_path_buf(),
            source: e.into(),
        })?;
    if paths.is_empty() {
        return Err(Error::Parse(format!("no files match '{}'", a.glob)));
    }

    let mut by_step: BTreeMap<u64, PathBuf> = BTreeMap::new();
    for path in paths {
        let step = step_of(&path, &pattern)?;
        if let Some(prev) = by_step.insert(step, path.clone()) {
            return Err(Error::Precondition(format!(
                "step {step} appears in both {} and {}",
                prev.display(),
                path.display()
            )));
        }
    }

    let mut points = Vec::with_capacity(by_step.len());
    for (step, path) in by_step {
        let m = load_input(&path, &a.input_args, &a.estimator)?;
        let (report, _) = estimate_with_lids(&m, &opts)?;
        eprintln!("step {step}: ID={:.4} ({})", report.id, path.display());
        points.push(SeriesPoint { step, report });
    }
    write_or_print(a.output.as_deref(), &series_report(&points)?)
}

fn split_pair<'a>(s: &'a str, what: &str) -> Result<(&'a str, &'a str)> {
    s.split_once('=')
        .filter(|(name, value)| !name.is_empty() && !value.is_empty())
        .ok_or_else(|| Error::Precondition(format!("expected {what}, got '{s}'")))
}

pub fn compare(a: CompareArgs) -> Result<()> {
    if a.inputs.is_empty() && a.known.is_empty() {
        return Err(Error::Precondition(
            "compare needs at least one NAME=PATH input or --known NAME=ED:ID".into(),
        ));
    }
    let opts = options(&a.estimator)?;
    let mut params = HashMap::new();
    for p in &a.params {
        let (name, count) = split_pair(p, "NAME=COUNT")?;
        let count: f64 = count
            .parse()
            .map_err(|_| Error::Precondition(format!("invalid parameter count in '{p}'")))?;
        params.insert(name.to_string(), count);
    }

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for spec in &a.known {
        let (name, value) = split_pair(spec, "NAME=ED:ID")?;
        let parsed = value
            .split_once(':')
            .and_then(|(ed, id)| Some((ed.parse::<usize>().ok()?, id.parse::<f64>().ok()?)));
        let (ed, id) = parsed
            .ok_or_else(|| Error::Precondition(format!("expected NAME=ED:ID, got '{spec}'")))?;
        entries.push(RedundancyEntry::new(name, ed, id));
    }
    for spec in &a.inputs {
        let (name, path) = split_pair(spec, "NAME=PATH")?;
        let result = load_input(Path::new(path), &a.input_args, &a.estimator)
            .and_then(|m| estimate_with_lids(&m, &opts));
        match result {
            Ok((report, _)) => entries.push(RedundancyEntry::new(name, report.ed, report.id)),
            Err(e) => {
                eprintln!("{name}: {e}");
                failures.push((name.to_string(), e));
            }
        }
    }
    for e in &mut entries {
        e.params = params.get(&e.name).copied();
    }

    let rows = redundancy_table(&entries);
    let mut body = match a.output_format {
        TableFormat::Csv => table_csv(&rows),
        TableFormat::Text => table_text(&rows),
    };
    let blank = if entries.iter().any(|e| e.params.is_some()) { ",,,,,," } else { ",,,," };
    for (name, err) in &failures {
        body.push_str(&match a.output_format {
            TableFormat::Csv => format!("{name}{blank}{}\n", err.to_string().replace(',', ";")),
            TableFormat::Text => format!("{name}  error: {err}\n"),
        });
    }
    write_or_print(a.output.as_deref(), &body)?;

    let ok = rows.iter().filter(|r| r.percent.is_ok()).count();
    if ok == 0 {
        return Err(failures
            .into_iter()
            .next()
            .map(|(_, e)| e)
            .unwrap_or_else(|| Error::Precondition("no row could be computed".into())));
    }
    Ok(())
}
