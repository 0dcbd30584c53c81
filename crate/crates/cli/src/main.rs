use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use quasiconv::experiment::{
    diagnose, load_run, omega_report, preset, random_fronts, resolve_loaded, run_experiment,
    write_diagnostics, write_json, write_omega, CompanionSpec, ExperimentConfig, Outcome,
};
use quasiconv::phase_plane::{classify_orbit, hamiltonian, orbit_profile};
use quasiconv::verify::run_suite;
use quasiconv::{Error, NonlinearitySpec, OrbitClass, PhasePoint};

#[derive(Parser)]
#[command(name = "quasiconv", version, about = "Large-time behavior lab for u_t = u_xx + f(u)")]
struct Cli {
    /// Experiment configuration (JSON, or TOML by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; `out` by default, the run directory for diagnose and omega.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and parallel checks.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Named scenario used instead of --config.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver and every diagnostic, writing a run directory.
    Simulate,
    /// Classify phase-plane orbits and sample steady-state profiles.
    Phase(PhaseArgs),
    /// Recompute zero numbers, critical-point tracks and the case tag of a stored run.
    Diagnose(DiagnoseArgs),
    /// Recompute ω-limit profiles and verdicts of a stored run.
    Omega(OmegaArgs),
    /// Run many configurations in parallel, one directory each.
    Sweep(SweepArgs),
    /// Run acceptance criteria and print one line per criterion.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args)]
struct PhaseArgs {
    /// Nonlinearity file; defaults to the spec of --config / --preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Single start point `u,v`.
    #[arg(long, conflicts_with = "scan", allow_hyphen_values = true)]
    start: Option<String>,
    /// Start points `(u, 0)` for `n` values of `u` in `[lo, hi]`, as `lo:hi:n`.
    #[arg(long, allow_hyphen_values = true)]
    scan: Option<String>,
    /// Profile sampling range `a,b`.
    #[arg(long, default_value = "-20,20", allow_hyphen_values = true)]
    range: String,
    #[arg(long, default_value_t = 0.01)]
    dx: f64,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    run: PathBuf,
    /// Companion: `zero`, `ut`, `vlambda:x`, `orbit:u,v` or a CSV file (`x,u`).
    #[arg(long)]
    zeros: Vec<String>,
    /// Zero-count interval `a,b`; repeatable.
    #[arg(long, allow_hyphen_values = true)]
    interval: Vec<String>,
    /// Print a summary of the critical-point tracks.
    #[arg(long)]
    tracks: bool,
    /// Print the case tag.
    #[arg(long)]
    case: bool,
}

#[derive(Args)]
struct OmegaArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    late: Option<f64>,
    #[arg(long)]
    cluster_tol: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of randomized front-like runs (with --preset random_fronts).
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Explicit configuration files; overrides the preset.
    configs: Vec<PathBuf>,
}

fn arg_error(field: &str, message: impl Into<String>) -> anyhow::Error {
    Error::config(field, message).into()
}

fn parse_pair(field: &str, s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| arg_error(field, format!("expected `a,b`, got `{s}`")))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| arg_error(field, format!("`{t}`: {e}")))
    };
    Ok((num(a)?, num(b)?))
}

fn experiment_config(cli: &Cli) -> Result<ExperimentConfig> {
    match (&cli.config, &cli.preset) {
        (Some(path), _) => Ok(ExperimentConfig::load(path)?),
        (None, Some(name)) => Ok(preset(name)?),
        (None, None) => Err(arg_error("config", "pass --config <file> or --preset <name>")),
    }
}

fn load_spec(path: &Path) -> Result<NonlinearitySpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| arg_error("spec", format!("{}: {e}", path.display())))?;
    let spec: NonlinearitySpec = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| arg_error("spec", e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| arg_error("spec", e.to_string()))?
    };
    spec.validate()?;
    Ok(spec)
}

fn summary(o: &Outcome) -> String {
    let kinds: Vec<&str> = o.omega.profiles.iter().map(|p| p.classification.name()).collect();
    format!(
        "case {:?}, quasiconvergent {:?}, convergent {:?}, clusters [{}]",
        o.diagnostics.case.tag,
        o.omega.quasiconvergent,
        o.omega.convergent,
        kinds.join(", ")
    )
}

fn simulate(cli: &Cli) -> Result<()> {
    let cfg = experiment_config(cli)?;
    let out = run_experiment(&cfg, &cli.out_dir())?;
    println!("{}: {}", cfg.name, summary(&out));
    println!("wrote {}", cli.out_dir().display());
    Ok(())
}

fn phase(cli: &Cli, args: &PhaseArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(p) => load_spec(p)?,
        None => experiment_config(cli)?.spec,
    };
    let range = parse_pair("range", &args.range)?;
    let starts: Vec<PhasePoint> = match (&args.start, &args.scan) {
        (Some(s), _) => {
            let (u, v) = parse_pair("start", s)?;
            vec![PhasePoint::new(u, v)]
        }
        (None, Some(s)) => {
            let parts: Vec<&str> = s.split(':').collect();
            let [lo, hi, n] = parts[..] else {
                return Err(arg_error("scan", format!("expected `lo:hi:n`, got `{s}`")));
            };
            let lo: f64 = lo.parse().map_err(|e| arg_error("scan", format!("{e}")))?;
            let hi: f64 = hi.parse().map_err(|e| arg_error("scan", format!("{e}")))?;
            let n: usize = n.parse().map_err(|e| arg_error("scan", format!("{e}")))?;
            if n == 0 || !(lo <= hi) {
                return Err(arg_error("scan", "need lo <= hi and n >= 1"));
            }
            (0..n)
                .map(|k| {
                    let u = if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
                    PhasePoint::new(u, 0.0)
                })
                .collect()
        }
        (None, None) => return Err(arg_error("phase", "pass --start u,v or --scan lo:hi:n")),
    };
    fs::create_dir_all(cli.out_dir())?;
    let mut orbits = csv::Writer::from_path(cli.out_dir().join("phase.csv"))?;
    orbits.write_record(["u", "v", "H", "tag"])?;
    let mut profiles = csv::Writer::from_path(cli.out_dir().join("profiles.csv"))?;
    profiles.write_record(["orbit", "x", "u", "v"])?;
    let mut classes = Vec::new();
    for (k, pt) in starts.iter().enumerate() {
        let cls = classify_orbit(&spec, *pt);
        orbits.write_record([
            pt.u.to_string(),
            pt.v.to_string(),
            hamiltonian(&spec, *pt).to_string(),
            cls.tag().to_string(),
        ])?;
        if !matches!(cls, OrbitClass::Unresolved { .. }) {
            let op = orbit_profile(&spec, &cls, range, args.dx)?;
            for j in 0..op.profile.len() {
                profiles.write_record([
                    k.to_string(),
                    op.profile.x(j).to_string(),
                    op.profile.values()[j].to_string(),
                    op.slope[j].to_string(),
                ])?;
            }
        }
        classes.push(cls);
    }
    orbits.flush()?;
    profiles.flush()?;
    write_json(&cli.out_dir().join("orbits.json"), &classes)?;
    if let [cls] = &classes[..] {
        println!("{}", serde_json::to_string(cls)?);
    } else {
        println!("classified {} start points", classes.len());
    }
    Ok(())
}

impl Cli {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| "out".into())
    }
}

fn target_dir(cli: &Cli, run: &Path) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| run.to_path_buf())
}

fn diagnose_cmd(cli: &Cli, args: &DiagnoseArgs) -> Result<()> {
    let run = load_run(&args.run).with_context(|| format!("loading {}", args.run.display()))?;
    let mut run = run;
    {
        let d = &mut run.meta.config.diagnostics;
        if !args.zeros.is_empty() {
            d.companions = args
                .zeros
                .iter()
                .map(|s| CompanionSpec::parse(s))
                .collect::<quasiconv::Result<_>>()?;
        }
        if !args.interval.is_empty() {
            d.intervals = args
                .interval
                .iter()
                .map(|s| parse_pair("interval", s))
                .collect::<Result<_>>()?;
        }
    }
    let r = resolve_loaded(&run)?;
    let d = diagnose(&r, &run.snapshots)?;
    let out = target_dir(cli, &args.run);
    fs::create_dir_all(&out)?;
    write_diagnostics(&out, &d)?;
    for h in &d.zeros {
        let last = h.history.reports.last().map_or(0, |r| r.count);
        println!(
            "zeros vs {} on ({}, {}): final count {last}, increases {}, endpoint exclusions {}",
            h.companion,
            h.interval.0,
            h.interval.1,
            h.history.increases.len(),
            h.history.endpoint_violations.len() + h.history.near_endpoint.len()
        );
    }
    if args.tracks {
        for t in &d.tracks {
            let l = t.last();
            println!(
                "track {} {:?}: born {}, last t = {} x = {} u = {}{}",
                t.id,
                t.kind,
                t.born(),
                l.t,
                l.x,
                l.u,
                if t.terminated { " (terminated)" } else { "" }
            );
        }
    }
    if args.case {
        println!("{}", serde_json::to_string(&d.case)?);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn omega_cmd(cli: &Cli, args: &OmegaArgs) -> Result<()> {
    let mut run = load_run(&args.run).with_context(|| format!("loading {}", args.run.display()))?;
    {
        let o = &mut run.meta.config.omega;
        if let Some(w) = args.window {
            o.window = Some(w);
        }
        if let Some(l) = args.late {
            o.late_fraction = l;
        }
        if let Some(c) = args.cluster_tol {
            o.cluster_tol = c;
        }
    }
    let r = resolve_loaded(&run)?;
    let d = diagnose(&r, &run.snapshots)?;
    let report = omega_report(&r, &run.snapshots, d.case)?;
    let out = target_dir(cli, &args.run);
    fs::create_dir_all(&out)?;
    write_omega(&out, &report)?;
    for p in &report.profiles {
        println!(
            "cluster of {} (t = {}): {} residual {:e}",
            p.cluster_size,
            p.t_repr,
            serde_json::to_string(&p.classification)?,
            p.residual
        );
    }
    println!(
        "quasiconvergent {:?}, convergent {:?}",
        report.quasiconvergent, report.convergent
    );
    for e in &report.explanations {
        println!("note: {e}");
    }
    Ok(())
}

fn sweep(cli: &Cli, args: &SweepArgs) -> Result<bool> {
    let configs: Vec<ExperimentConfig> = if !args.configs.is_empty() {
        args.configs
            .iter()
            .map(|p| ExperimentConfig::load(p))
            .collect::<quasiconv::Result<_>>()?
    } else {
        match cli.preset.as_deref() {
            Some("random_fronts") | None => random_fronts(args.seed, args.count),
            Some(name) => vec![preset(name)?],
        }
    };
    let mut names: Vec<&str> = configs.iter().map(|c| c.name.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    if names.len() != configs.len() {
        return Err(arg_error("sweep", "configuration names must be unique"));
    }
    fs::create_dir_all(cli.out_dir())?;
    let results: Vec<(String, quasiconv::Result<Outcome>)> = configs
        .par_iter()
        .map(|c| (c.name.clone(), run_experiment(c, &cli.out_dir().join(&c.name))))
        .collect();
    let mut w = csv::Writer::from_path(cli.out_dir().join("sweep_summary.csv"))?;
    w.write_record(["name", "status", "case", "quasiconvergent", "convergent", "clusters"])?;
    let mut all_ok = true;
    for (name, res) in &results {
        match res {
            Ok(o) => {
                let kinds: Vec<&str> = o.omega.profiles.iter().map(|p| p.classification.name()).collect();
                w.write_record([
                    name.clone(),
                    "ok".into(),
                    format!("{:?}", o.diagnostics.case.tag),
                    format!("{:?}", o.omega.quasiconvergent),
                    format!("{:?}", o.omega.convergent),
                    kinds.join(";"),
                ])?;
                println!("{name}: {}", summary(o));
            }
            Err(e) => {
                all_ok = false;
                w.write_record([name.clone(), format!("error: {e}"), String::new(), String::new(), String::new(), String::new()])?;
                println!("{name}: error: {e}");
            }
        }
    }
    w.flush()?;
    Ok(all_ok)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let config = e
        .chain()
        .find_map(|c| c.downcast_ref::<Error>())
        .is_some_and(Error::is_config_error);
    if config {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate => simulate(&cli).map(|_| true),
        Command::Phase(a) => phase(&cli, a).map(|_| true),
        Command::Diagnose(a) => diagnose_cmd(&cli, a).map(|_| true),
        Command::Omega(a) => omega_cmd(&cli, a).map(|_| true),
        Command::Sweep(a) => sweep(&cli, a),
        Command::Verify { suite } => run_suite(suite).map_err(Into::into).map(|cs| {
            for c in &cs {
                println!("{c}");
            }
            let passed = cs.iter().filter(|c| c.passed()).count();
            println!("{passed}/{} criteria passed", cs.len());
            passed == cs.len()
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
