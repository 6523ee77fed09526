use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use driftbound::bounds::{
    certify, condition_report, default_sweep, example_family, BoundCertificate, ConditionOptions,
    FamilySpec,
};
use driftbound::solver::{check_envelope, simulate, TimeSeries};
use driftbound::{Error, RunConfig};

use crate::manifest::{Diagnostic, RunManifest};
use crate::{Cli, Command, Common};

/// Horizon of `certify` when neither the certify nor the simulation
/// section sets one.
const DEFAULT_T_END: f64 = 10.0;

pub fn run(cli: &Cli) -> anyhow::Result<RunManifest> {
    match &cli.command {
        Command::Simulate { config, common } => simulate_cmd(config, common),
        Command::Certify {
            config,
            common,
            envelope_dt,
        } => certify_cmd(config, common, *envelope_dt),
        Command::Compare {
            config,
            common,
            envelope_dt,
            slack,
        } => compare_cmd(config, common, *envelope_dt, *slack),
        Command::Families { params, common } => families_cmd(params.as_deref(), common),
    }
}

/// Best-effort manifest for a run that stopped on a certification error.
pub fn record_failure(cli: &Cli, diag: Diagnostic) {
    let (name, config, common) = match &cli.command {
        Command::Simulate { config, common } => ("simulate", Some(config.as_path()), common),
        Command::Certify { config, common, .. } => ("certify", Some(config.as_path()), common),
        Command::Compare { config, common, .. } => ("compare", Some(config.as_path()), common),
        Command::Families { params, common } => ("families", params.as_deref(), common),
    };
    let mut m = RunManifest::start(name, config);
    m.fail(diag.assumption.clone().unwrap_or_else(|| diag.kind.clone()));
    m.error = Some(diag);
    if std::fs::create_dir_all(&common.out).is_ok() {
        let _ = m.finish(&common.out);
    }
}

fn out_dir(common: &Common) -> anyhow::Result<&Path> {
    std::fs::create_dir_all(&common.out)
        .with_context(|| format!("creating {}", common.out.display()))?;
    Ok(&common.out)
}

fn run_simulation(cfg: &RunConfig) -> anyhow::Result<TimeSeries> {
    let scenario = cfg.scenario()?;
    let sim = cfg.simulation()?;
    Ok(simulate(&scenario, &sim.resolution, sim.t_end, sim.sample_dt)?)
}

fn simulate_cmd(config: &Path, common: &Common) -> anyhow::Result<RunManifest> {
    let mut m = RunManifest::start("simulate", Some(config));
    let cfg = RunConfig::load(config)?;
    let series = run_simulation(&cfg)?;
    let dir = out_dir(common)?;
    m.constants = serde_json::to_value(&cfg.scenario()?.constants)?;
    m.write(dir, "timeseries.csv", series.to_csv().as_bytes())?;
    m.finish(dir)?;
    Ok(m)
}

fn build_certificate(cfg: &RunConfig, envelope_dt: Option<f64>) -> anyhow::Result<BoundCertificate> {
    let scenario = cfg.scenario()?;
    let mut c = cfg.certify()?.clone();
    if envelope_dt.is_some() {
        c.envelope_dt = envelope_dt;
    }
    let t_end = c
        .t_end
        .or(cfg.simulation.as_ref().map(|s| s.t_end))
        .unwrap_or(DEFAULT_T_END);
    Ok(certify(&scenario, &c, t_end)?)
}

fn record_certificate(m: &mut RunManifest, dir: &Path, cert: &BoundCertificate) -> anyhow::Result<()> {
    m.constants = serde_json::to_value(&cert.constants)?;
    for c in cert.failed_checks() {
        m.fail(format!("check {} ({})", c.assumption, c.quote_key));
    }
    m.write(dir, "certificate.json", &serde_json::to_vec_pretty(cert)?)
}

fn certify_cmd(config: &Path, common: &Common, envelope_dt: Option<f64>) -> anyhow::Result<RunManifest> {
    let mut m = RunManifest::start("certify", Some(config));
    let cfg = RunConfig::load(config)?;
    let cert = build_certificate(&cfg, envelope_dt)?;
    let dir = out_dir(common)?;
    record_certificate(&mut m, dir, &cert)?;
    m.finish(dir)?;
    Ok(m)
}

fn compare_cmd(
    config: &Path,
    common: &Common,
    envelope_dt: Option<f64>,
    slack: f64,
) -> anyhow::Result<RunManifest> {
    let mut m = RunManifest::start("compare", Some(config));
    let cfg = RunConfig::load(config)?;
    let series = run_simulation(&cfg)?;
    let cert = build_certificate(&cfg, envelope_dt)?;
    let report = check_envelope(&series, &cert, slack);
    let dir = out_dir(common)?;
    m.write(dir, "timeseries.csv", series.to_csv().as_bytes())?;
    record_certificate(&mut m, dir, &cert)?;
    if !report.pass {
        m.fail(format!(
            "domination: measured exceeds bound by {:.3e} at t = {}",
            report.worst_margin, report.worst_t
        ));
    }
    m.write(dir, "domination.json", &serde_json::to_vec_pretty(&report)?)?;
    m.finish(dir)?;
    Ok(m)
}

fn one() -> f64 {
    1.0
}

/// Parameters of the `families` command.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamiliesParams {
    #[serde(default = "one")]
    c0: f64,
    #[serde(default = "one")]
    d: f64,
    /// `L` used by the default sweep.
    #[serde(rename = "L", default = "one")]
    l: f64,
    #[serde(default)]
    sweep: Option<Vec<FamilySpec>>,
    #[serde(default)]
    conditions: ConditionOptions,
}

#[derive(Debug, Serialize)]
struct FamilyRow {
    family: String,
    params: String,
    #[serde(rename = "L")]
    l: f64,
    delta: f64,
    ell: f64,
    ell_windowed: f64,
    divergence_integral: f64,
    divergence_pass: bool,
    monotone_sign: i8,
    expected_sign: i8,
    pass: bool,
}

fn families_cmd(params: Option<&Path>, common: &Common) -> anyhow::Result<RunManifest> {
    let mut m = RunManifest::start("families", params);
    let p: FamiliesParams = match params {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => serde_json::from_str("{}")?,
    };
    let sweep = match p.sweep {
        Some(s) => s,
        None => default_sweep(p.c0, p.d)
            .into_iter()
            .map(|(kind, delta)| FamilySpec { kind, l: p.l, delta })
            .collect(),
    };
    let mut reports = Vec::with_capacity(sweep.len());
    let mut rows = Vec::with_capacity(sweep.len());
    for spec in &sweep {
        let family = example_family(spec.kind, spec.l, spec.delta, p.c0, p.d)?;
        let r = condition_report(&family, p.c0, p.d, &p.conditions)?;
        let params = serde_json::to_value(spec.kind)?;
        let pass = r.pass && r.monotone.sign == r.expected_sign;
        if !pass {
            m.fail(format!("{} {params} delta = {}", r.family, r.delta));
        }
        rows.push(FamilyRow {
            family: r.family.clone(),
            params: params.to_string(),
            l: r.l,
            delta: r.delta,
            ell: r.ell,
            ell_windowed: r.ell_windowed,
            divergence_integral: r.divergence_integral,
            divergence_pass: r.divergence_pass,
            monotone_sign: r.monotone.sign,
            expected_sign: r.expected_sign,
            pass,
        });
        reports.push(r);
    }
    let dir = out_dir(common)?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        csv.serialize(row)?;
    }
    m.constants = serde_json::json!({ "c0": p.c0, "d": p.d });
    m.write(dir, "families.csv", &csv.into_inner()?)?;
    m.write(dir, "families.json", &serde_json::to_vec_pretty(&reports)?)?;
    m.finish(dir)?;
    Ok(m)
}
