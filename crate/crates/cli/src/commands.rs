use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use fj_core::fixtures::{self, RandomNetworkOptions};
use fj_core::io::{read_network, read_schedule, write_network, write_schedule, write_trajectory, NetworkFile};
use fj_core::{
    analyze as analyze_model, simulate as simulate_model, tv_consensus_criterion, tv_simulate_with,
    tv_stability_certificate_cfj, AnalyzeOptions, DVector, OpinionTrajectory, SimulationOptions,
    StabilityReport, TvCertificate, Verdict,
};
use rayon::prelude::*;
use serde_json::json;

use crate::{AnalyzeArgs, CertifyArgs, CertifyMode, Fixture, Format, GenerateArgs, SimulateArgs, TvSimulateArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    NotStable = 3,
}

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

/// Parse and validation errors.
fn input(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(runtime)
}

/// `file` takes the file's own x0 and falls back to u; `u` takes the
/// prejudice; anything else must be a number used for every agent.
fn initial_state(spec: &str, from_file: Option<&DVector<f64>>, u: &DVector<f64>) -> Result<DVector<f64>, Failure> {
    match spec {
        "file" => Ok(from_file.unwrap_or(u).clone()),
        "u" => Ok(u.clone()),
        value => {
            let v: f64 = value
                .parse()
                .map_err(|_| input(anyhow!("--x0 must be `file`, `u` or a number, got `{value}`")))?;
            if !v.is_finite() {
                return Err(input(anyhow!("--x0 must be finite")));
            }
            Ok(DVector::from_element(u.len(), v))
        }
    }
}

fn analyze_file(path: &Path, opts: &AnalyzeOptions) -> Result<StabilityReport, Failure> {
    let file = read_network(path).map_err(input)?;
    analyze_model(&file.model, opts)
        .with_context(|| path.display().to_string())
        .map_err(input)
}

pub fn analyze(args: &AnalyzeArgs, format: Format) -> Result<Status, Failure> {
    let opts = AnalyzeOptions {
        delta: args.delta,
        eps: args.eps,
        spectral_tol: args.tol,
        consensus_tol: args.tol,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(runtime)?;
    let results: Vec<(&PathBuf, Result<StabilityReport, Failure>)> =
        pool.install(|| args.files.par_iter().map(|p| (p, analyze_file(p, &opts))).collect());

    let batch = results.len() > 1;
    let mut failures = Vec::new();
    let mut unstable = false;
    let mut text = String::new();
    let mut entries = Vec::new();
    for (path, result) in results {
        match result {
            Ok(report) => {
                unstable |= !report.schur_stable;
                match format {
                    Format::Text if batch => text += &format!("== {} ==\n{report}\n", path.display()),
                    Format::Text => text += &report.to_string(),
                    Format::Json => entries.push(json!({ "file": path, "report": report })),
                }
            }
            Err(f) => {
                if batch {
                    eprintln!("error: {}: {:#}", path.display(), f.error);
                }
                if format == Format::Json {
                    entries.push(json!({ "file": path, "error": format!("{:#}", f.error) }));
                }
                failures.push(f);
            }
        }
    }
    if format == Format::Json {
        text = if batch {
            to_json(&entries)?
        } else {
            match entries.pop().and_then(|mut e| e.get_mut("report").map(|r| r.take())) {
                Some(report) => to_json(&report)?,
                None => String::new(),
            }
        };
    }
    emit(args.out.as_deref(), &text)?;
    if !batch {
        if let Some(f) = failures.pop() {
            return Err(f);
        }
    } else if let Some(code) = failures.iter().map(|f| f.code).max() {
        return Err(Failure {
            code,
            error: anyhow!("{} of {} files could not be analyzed", failures.len(), args.files.len()),
        });
    }
    Ok(if args.require_stable && unstable { Status::NotStable } else { Status::Ok })
}

fn summary(traj: &OpinionTrajectory, format: Format) -> Result<String, Failure> {
    let limit = traj.limit.as_ref().map(|v| v.iter().copied().collect::<Vec<_>>());
    Ok(match format {
        Format::Json => to_json(&json!({
            "steps": traj.total_steps,
            "converged": traj.converged,
            "period": traj.period,
            "limit": limit,
        }))?,
        Format::Text => {
            let mut s = format!("steps      {}\nconverged  {}\n", traj.total_steps, traj.converged);
            if let Some(p) = traj.period {
                s += &format!("period     {p}\n");
            }
            if let Some(limit) = limit {
                let items: Vec<String> = limit.iter().map(|v| format!("{v:.10}")).collect();
                s += &format!("limit      {}\n", items.join(" "));
            }
            s
        }
    })
}

/// Trajectory goes to `--out` (with a summary on stdout) or to stdout.
fn write_run(traj: &OpinionTrajectory, out: Option<&Path>, format: Format) -> Result<(), Failure> {
    emit(out, &write_trajectory(traj))?;
    if out.is_some() {
        print!("{}", summary(traj, format)?);
    }
    Ok(())
}

pub fn simulate(args: &SimulateArgs, format: Format) -> Result<Status, Failure> {
    let file = read_network(&args.file).map_err(input)?;
    let x0 = initial_state(&args.x0, file.x0.as_ref(), file.model.u())?;
    let opts = SimulationOptions {
        max_steps: args.steps,
        conv_tol: args.tol,
        ..SimulationOptions::default()
    };
    let traj = simulate_model(&file.model, &x0, &opts).map_err(input)?;
    log::info!("{} steps, converged: {}", traj.total_steps, traj.converged);
    write_run(&traj, args.out.as_deref(), format)?;
    Ok(Status::Ok)
}

pub fn tv_simulate(args: &TvSimulateArgs, format: Format) -> Result<Status, Failure> {
    let file = read_schedule(&args.file).map_err(input)?;
    let x0 = initial_state(&args.x0, file.x0.as_ref(), &file.u)?;
    let opts = SimulationOptions {
        conv_tol: args.tol,
        ..SimulationOptions::default()
    };
    let traj = tv_simulate_with(&file.schedule, &x0, &file.u, args.steps, &opts).map_err(input)?;
    write_run(&traj, args.out.as_deref(), format)?;
    Ok(Status::Ok)
}

pub fn certify(args: &CertifyArgs, format: Format) -> Result<Status, Failure> {
    let file = read_schedule(&args.file).map_err(input)?;
    let schedule = &file.schedule;
    let cert: TvCertificate = match args.mode {
        CertifyMode::Chain => {
            let delta = args.delta.ok_or_else(|| input(anyhow!("chain mode needs --delta")))?;
            match args.s {
                Some(s) => tv_stability_certificate_cfj(schedule, delta, args.eps, s).map_err(input)?,
                None => smallest_chain(&file.schedule, delta, args.eps)?,
            }
        }
        CertifyMode::Connectivity => {
            let window = args.window.ok_or_else(|| input(anyhow!("connectivity mode needs --window")))?;
            tv_consensus_criterion(schedule, args.eps, window).map_err(input)?
        }
    };
    let text = match format {
        Format::Text => cert.to_string(),
        Format::Json => to_json(&cert)?,
    };
    emit(args.out.as_deref(), &text)?;
    Ok(if args.require_stable && cert.verdict == Verdict::Unknown {
        Status::NotStable
    } else {
        Status::Ok
    })
}

/// Tries `s = 0, 1, …` up to `n·p - 1` (p the period length) and returns the
/// first STABLE certificate, or the UNKNOWN one for the largest `s` tried.
fn smallest_chain(schedule: &fj_core::TvSchedule, delta: f64, eps: f64) -> Result<TvCertificate, Failure> {
    let max_s = (schedule.n() * schedule.period().len()).max(1) - 1;
    let mut last = None;
    for s in 0..=max_s {
        let cert = tv_stability_certificate_cfj(schedule, delta, eps, s).map_err(input)?;
        if cert.verdict == Verdict::Stable {
            return Ok(cert);
        }
        last = Some(cert);
    }
    Ok(last.expect("at least one s is tried"))
}

pub fn generate(args: &GenerateArgs) -> Result<Status, Failure> {
    if args.n == 0 {
        return Err(input(anyhow!("--n must be at least 1")));
    }
    let text = match args.fixture {
        Fixture::Cycle => {
            let model = fixtures::cycle_model(args.n, args.delta).map_err(input)?;
            write_network(&NetworkFile::new(model))
        }
        Fixture::Example1 => write_schedule(&fixtures::example1_file()),
        Fixture::Example2 => write_schedule(&fixtures::example2_file()),
        Fixture::Random => {
            let opts = RandomNetworkOptions {
                density: args.density,
                prejudiced_fraction: args.prejudiced,
                ..RandomNetworkOptions::default()
            };
            let model = fixtures::random_strongly_connected(args.n, args.seed, &opts).map_err(input)?;
            write_network(&NetworkFile::new(model))
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(Status::Ok)
}
