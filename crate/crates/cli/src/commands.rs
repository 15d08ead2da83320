use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use uniqset_core::recovery::{mu_scan, recover_bruteforce, recover_sparse, Certificate, MuScanReport, PrecisionPolicy};
use uniqset_core::rounding::encode_signal;
use uniqset_core::spectral::{ObservationMap, Precision, SpectrumObservation};
use uniqset_core::uniqueness::{prime_minor_scan, verify_uniqueness, window_sweep, VerdictStatus};
use uniqset_core::Signal;

use crate::config::{read_json, EncodeConfig, Loaded, MuScanConfig, ObserveConfig, RecoverConfig, VerifyConfig};
use crate::report::{write_json, RunReport};
use crate::Options;

const DEFAULT_LIMIT: u64 = 10_000_000;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Undecided = 2,
    Witness = 3,
}

fn out_path<T>(opts: &Options, loaded: &Loaded<T>, configured: Option<&PathBuf>) -> Option<PathBuf> {
    opts.out.clone().or_else(|| configured.map(|p| loaded.resolve(p)))
}

fn policy(opts: &Options, configured: Option<u32>) -> PrecisionPolicy {
    opts.precision_cap.or(configured).map(PrecisionPolicy::with_cap).unwrap_or_default()
}

fn limit(opts: &Options, configured: Option<u64>) -> u64 {
    opts.limit.or(configured).unwrap_or(DEFAULT_LIMIT)
}

pub fn encode(opts: &Options) -> Result<Status> {
    let loaded: Loaded<EncodeConfig> = Loaded::read(&opts.config)?;
    let cfg = &loaded.config;
    let x: Signal = read_json(&loaded.resolve(&cfg.input))?;
    if x.len() != cfg.encoding.n {
        bail!("signal has length {}, encoding expects {}", x.len(), cfg.encoding.n);
    }
    let y = encode_signal(&cfg.encoding, &x)?;
    write_json(&y, out_path(opts, &loaded, cfg.output.as_ref()).as_deref())?;
    Ok(Status::Success)
}

pub fn observe(opts: &Options) -> Result<Status> {
    let loaded: Loaded<ObserveConfig> = Loaded::read(&opts.config)?;
    let cfg = &loaded.config;
    let v: Signal = read_json(&loaded.resolve(&cfg.input))?;
    let map = ObservationMap::new(v.len(), cfg.modulation, cfg.trace.domain, cfg.trace.points.clone())?;
    let precision = cfg.precision.map_or(Precision::Exact, Precision::Bits);
    write_json(&map.observe(&v, precision), out_path(opts, &loaded, cfg.output.as_ref()).as_deref())?;
    Ok(Status::Success)
}

pub fn recover(opts: &Options) -> Result<Status> {
    let start = Instant::now();
    let loaded: Loaded<RecoverConfig> = Loaded::read(&opts.config)?;
    let (result, output) = match &loaded.config {
        RecoverConfig::Sparse { observation, encoding, sparsity, output } => {
            let obs: SpectrumObservation = read_json(&loaded.resolve(observation))?;
            (recover_sparse(&obs, encoding, *sparsity)?, output)
        }
        RecoverConfig::Bruteforce { observation, class, modulation, precision_cap, limit: lim, output } => {
            let obs: SpectrumObservation = read_json(&loaded.resolve(observation))?;
            let r = recover_bruteforce(&obs, class, modulation.as_ref(), &policy(opts, *precision_cap), limit(opts, *lim))?;
            (r, output)
        }
    };
    let status = match result.certificate {
        Certificate::ExactMatch | Certificate::BallVerified { .. } => Status::Success,
        Certificate::Undecided => Status::Undecided,
        Certificate::Rejected => bail!("recovered candidate is rejected by the observation"),
    };
    let report = RunReport::new("recover", &loaded.raw, result, start.elapsed());
    write_json(&report, out_path(opts, &loaded, output.as_ref()).as_deref())?;
    Ok(status)
}

pub fn verify(opts: &Options) -> Result<Status> {
    let start = Instant::now();
    let loaded: Loaded<VerifyConfig> = Loaded::read(&opts.config)?;
    let (payload, status, output) = match &loaded.config {
        VerifyConfig::Uniqueness { class, modulation, trace, mode, precision_cap, limit: lim, output } => {
            let v = verify_uniqueness(class, modulation.as_ref(), trace, &policy(opts, *precision_cap), *mode, limit(opts, *lim))?;
            let status = match v.status {
                VerdictStatus::Unique => Status::Success,
                VerdictStatus::Undecided => Status::Undecided,
                VerdictStatus::Collision => Status::Witness,
            };
            (serde_json::to_value(v)?, status, output)
        }
        VerifyConfig::Windows { n, max_m, limit: lim, output } => {
            let r = window_sweep(*n, *max_m, limit(opts, *lim))?;
            let status = if r.all_nonzero { Status::Success } else { Status::Witness };
            (serde_json::to_value(r)?, status, output)
        }
        VerifyConfig::Minors { n, m, allow_composite, limit: lim, output } => {
            let r = prime_minor_scan(*n, *m, *allow_composite || opts.allow_composite, limit(opts, *lim))?;
            let status = if r.all_nonzero { Status::Success } else { Status::Witness };
            (serde_json::to_value(r)?, status, output)
        }
    };
    let report = RunReport::new("verify", &loaded.raw, payload, start.elapsed());
    write_json(&report, out_path(opts, &loaded, output.as_ref()).as_deref())?;
    Ok(status)
}

#[derive(Serialize)]
struct CsvRow {
    mu: u32,
    max_error_num: Option<String>,
    max_error_den: Option<String>,
    support_preserved: bool,
    recovered_exactly: bool,
}

fn write_csv(report: &MuScanReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    for r in &report.rows {
        w.serialize(CsvRow {
            mu: r.mu,
            max_error_num: r.max_error.as_ref().map(|q| q.numer().to_string()),
            max_error_den: r.max_error.as_ref().map(|q| q.denom().to_string()),
            support_preserved: r.support_preserved,
            recovered_exactly: r.recovered_exactly,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MuScanPayload {
    #[serde(flatten)]
    report: MuScanReport,
    stable_from: Option<u32>,
}

pub fn muscan(opts: &Options) -> Result<Status> {
    let start = Instant::now();
    let loaded: Loaded<MuScanConfig> = Loaded::read(&opts.config)?;
    let cfg = &loaded.config;
    let x: Signal = read_json(&loaded.resolve(&cfg.input))?;
    let report = mu_scan(&x, &cfg.encoding, cfg.sparsity, &cfg.delta, &cfg.mus)?;
    let out = out_path(opts, &loaded, cfg.output.as_ref());
    let csv_path = cfg.csv.as_ref().map(|p| loaded.resolve(p)).or_else(|| out.as_ref().map(|p| p.with_extension("csv")));
    match &csv_path {
        Some(p) => write_csv(&report, p)?,
        None => eprintln!("note: no csv path configured and no --out given; CSV not written"),
    }
    let stable_from = report.stable_from();
    let payload = MuScanPayload { report, stable_from };
    write_json(&RunReport::new("muscan", &loaded.raw, payload, start.elapsed()), out.as_deref())?;
    Ok(Status::Success)
}
