use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use kato_core::experiments::{self, ExperimentConfig, ExperimentKind, Report, SlopeCheck};
use kato_core::field::uniform_times;
use kato_core::kslf::{self, Kslf};
use kato_core::norms::{mixed_norm, Exponent, MixedNormSpec, Order};
use kato_core::propagator::propagate;
use kato_core::wavepackets::decompose;
use kato_core::{Field64, Symbol64};

#[derive(Parser)]
#[command(name = "kato", version, about = "Smoothing estimates for dispersive equations, measured")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a field file with e^{itΦ(D)} and write the spacetime field.
    Propagate(PropagateArgs),
    /// Mixed norm of a spacetime field file, to 12 significant digits.
    Norm(NormArgs),
    /// Wave-packet tools.
    Wavepacket {
        #[command(subcommand)]
        command: WavepacketCommand,
    },
    /// Operator norms of the frequency-localized solution operator across scales.
    Opnorm(OpnormArgs),
    /// Run an experiment from a key = value config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite; exits nonzero on any failure.
    Verify {
        /// Write report.json, measurements.csv and plot.dat here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PropagateArgs {
    /// Symbol, e.g. `kind=power, m=2, n=1`.
    #[arg(long)]
    symbol: Symbol64,
    #[arg(long, allow_hyphen_values = true)]
    t0: f64,
    #[arg(long, allow_hyphen_values = true)]
    t1: f64,
    /// Number of time steps; `steps + 1` slices from t0 to t1 inclusive.
    #[arg(long)]
    steps: usize,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "out")]
    output: PathBuf,
}

#[derive(Args)]
struct NormArgs {
    #[arg(long)]
    q: Exponent<f64>,
    #[arg(long)]
    r: Exponent<f64>,
    #[arg(long, default_value = "xt")]
    order: Order,
    /// Ball `c_1,…,c_n,ρ`; the whole torus when absent.
    #[arg(long, allow_hyphen_values = true)]
    ball: Option<String>,
    /// Time window `a,b`; all slices when absent.
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Subcommand)]
enum WavepacketCommand {
    /// Write one field file per packet and a manifest.csv with columns l, v, energy.
    Decompose {
        #[arg(long = "R")]
        r: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args)]
struct OpnormArgs {
    #[arg(long, default_value = "kind=power, m=2, n=1")]
    symbol: Symbol64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value = "2")]
    q: Exponent<f64>,
    #[arg(long, default_value = "2")]
    r: Exponent<f64>,
    #[arg(long, default_value = "xt")]
    order: Order,
    /// `local` or `global:T`.
    #[arg(long, default_value = "local")]
    window: String,
    #[arg(long = "R", value_delimiter = ',', default_value = "8,16,32,64")]
    scales: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write opnorm.csv and fit.json here instead of printing them.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when declared criteria failed.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Propagate(a) => propagate_cmd(&a).map(|_| true),
        Command::Norm(a) => norm_cmd(&a).map(|_| true),
        Command::Wavepacket { command: WavepacketCommand::Decompose { r, input, out_dir } } => {
            decompose_cmd(r, &input, &out_dir).map(|_| true)
        }
        Command::Opnorm(a) => opnorm_cmd(&a),
        Command::Run { config, out } => run_cmd(&config, out),
        Command::Verify { out } => verify_cmd(out.as_deref()),
    }
}

fn read_field(path: &Path) -> Result<Field64> {
    kslf::read_field(path).with_context(|| format!("reading {}", path.display()))
}

fn propagate_cmd(a: &PropagateArgs) -> Result<()> {
    if a.steps == 0 {
        bail!("--steps must be positive");
    }
    let f = read_field(&a.input)?;
    let u = propagate(&f, &a.symbol, &uniform_times(a.t0, a.t1, a.steps + 1))?;
    kslf::write_spacetime(&a.output, &u).with_context(|| format!("writing {}", a.output.display()))?;
    Ok(())
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("--{flag}: `{v}` is not a number")))
        .collect()
}

/// `x` with 12 significant digits in positional notation.
fn significant12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.11}");
    }
    let decimals = (11 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn norm_cmd(a: &NormArgs) -> Result<()> {
    let u = match kslf::read::<f64>(&a.input).with_context(|| format!("reading {}", a.input.display()))? {
        Kslf::Spacetime(u) => u,
        Kslf::Field(_) => bail!("{} holds a spatial field; norm needs a spacetime field", a.input.display()),
    };
    let mut spec = MixedNormSpec::new(a.q, a.r, a.order);
    if let Some(b) = &a.ball {
        let mut v = parse_list("ball", b)?;
        let radius = v.pop().context("--ball needs a centre and a radius")?;
        spec = spec.with_ball(v, radius);
    }
    if let Some(t) = &a.t {
        match parse_list("t", t)?[..] {
            [lo, hi] => spec = spec.with_window(lo, hi),
            _ => bail!("--t needs two values a,b"),
        }
    }
    println!("{}", significant12(mixed_norm(&u, &spec)?));
    Ok(())
}

fn decompose_cmd(r: f64, input: &Path, out_dir: &Path) -> Result<()> {
    let f = read_field(input)?;
    let d = decompose(&f, r)?;
    std::fs::create_dir_all(out_dir)?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    let mut manifest = String::from("l,v,energy\n");
    for (i, p) in d.packets.iter().enumerate() {
        kslf::write_field(&out_dir.join(format!("packet_{i:06}.kslf")), &p.field(*f.grid()))?;
        let _ = writeln!(manifest, "{},{},{}", join(&p.l), join(&p.v), p.energy);
    }
    std::fs::write(out_dir.join("manifest.csv"), manifest)?;
    eprintln!("{} packets, {} dropped below threshold", d.packets.len(), d.dropped);
    Ok(())
}

fn opnorm_cmd(a: &OpnormArgs) -> Result<bool> {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::Scaling);
    cfg.symbol = a.symbol.clone();
    cfg.alpha = a.alpha;
    cfg.q = a.q;
    cfg.r = a.r;
    cfg.order = a.order;
    cfg.window = a.window.clone();
    cfg.scales = a.scales.clone();
    cfg.seed = a.seed;
    cfg.check = SlopeCheck::Match;
    let report = experiments::run(&cfg)?;
    let mut csv = String::from("R,norm,iterations,restarts\n");
    for m in report.series("norm") {
        let iterations = m.details.get("iterations").or(m.details.get("accepted_steps")).copied().unwrap_or(0.0);
        let restarts = m.details.get("restarts").copied().unwrap_or(cfg.restarts as f64);
        let _ = writeln!(csv, "{},{},{},{}", m.scale, m.value, iterations, restarts);
    }
    let fit = serde_json::json!({
        "fit": report.fit("norm"),
        "criteria": report.criteria,
        "notes": report.notes,
    });
    let fit = serde_json::to_string_pretty(&fit)?;
    match &a.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("opnorm.csv"), csv)?;
            std::fs::write(dir.join("fit.json"), fit)?;
        }
        None => {
            print!("{csv}");
            println!("{fit}");
        }
    }
    Ok(true)
}

fn summarize(report: &Report) {
    for c in &report.criteria {
        println!("{:<22} {} measured {:.6} ({}) {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.measured, c.bound, c.detail);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
}

fn run_cmd(config: &Path, out: Option<PathBuf>) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(config).with_context(|| format!("loading {}", config.display()))?;
    if out.is_some() {
        cfg.output = out;
    }
    let report = experiments::run(&cfg)?;
    summarize(&report);
    if let Some(dir) = &cfg.output {
        println!("wrote {}", dir.display());
    }
    Ok(report.passed())
}

fn verify_cmd(out: Option<&Path>) -> Result<bool> {
    let report = experiments::verify_with(|ev| println!("{}", ev.line()));
    if let Some(dir) = out {
        report.write(dir)?;
        println!("wrote {}", dir.display());
    }
    let passed = report.passed();
    println!("{}", if passed { "all criteria passed" } else { "some criteria failed" });
    Ok(passed)
}
