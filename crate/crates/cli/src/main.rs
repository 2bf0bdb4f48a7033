use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use wavedecay::envelope::{integrate_envelope, predicted_rate};
use wavedecay::harness::config::{envelope_setup, experiment_config, sim_config};
use wavedecay::harness::{run_experiment, FlatConfig};
use wavedecay::sim::{energy_identity_residual, run};
use wavedecay::{DampingFamily, DampingLaw, Error, TimeWeight, WeightFamily};

#[derive(Parser)]
#[command(
    name = "wavedecay",
    version,
    about = "Local energy decay of nonlinearly damped exterior waves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the radial solver and write `t,E_total,E_R,D_cum`.
    Simulate {
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Integrate the envelope equation and write `t,S`.
    Envelope {
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Simulate, fit K, and check the envelope bound and the discrete inequality.
    Verify {
        config: PathBuf,
        /// Directory receiving series.csv, envelope.csv and report.csv.
        #[arg(short, long, default_value = "wavedecay-out")]
        out: PathBuf,
    },
    /// Print the predicted decay rates.
    Rates {
        /// Single law, e.g. `superlinear:r0=3`; all built-in laws when omitted.
        #[arg(long)]
        law: Option<DampingFamily>,
        /// Single weight, e.g. `power:tau=-0.5`; a default set when omitted.
        #[arg(long)]
        rho: Option<WeightFamily>,
        #[arg(short = 'T', long = "window", default_value_t = 1.0)]
        window: f64,
        #[arg(short = 'K', long, default_value_t = 2.0)]
        k: f64,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_config(path: &Path) -> Result<FlatConfig> {
    FlatConfig::read(path).with_context(|| format!("reading {}", path.display()))
}

fn simulate(config: &Path, out: Option<&Path>) -> Result<bool> {
    let cfg = sim_config(&read_config(config)?)?;
    let series = run(&cfg)?;
    let mut w = output(out)?;
    writeln!(w, "t,E_total,E_R,D_cum")?;
    for r in &series.rows {
        writeln!(w, "{},{},{},{}", r.t, r.e_total, r.e_r, r.d_cum)?;
    }
    w.flush()?;
    eprintln!(
        "identity residual {:.3e}",
        energy_identity_residual(&series)
    );
    if let Some(reason) = &series.failure {
        eprintln!("simulation stopped early: {reason}");
    }
    Ok(series.complete)
}

fn envelope(config: &Path, out: Option<&Path>) -> Result<bool> {
    let setup = envelope_setup(&read_config(config)?)?;
    let traj = integrate_envelope(&setup.problem, setup.t_end, setup.rel_tol)?;
    let mut w = output(out)?;
    writeln!(w, "t,S")?;
    for (t, s) in &traj.samples {
        writeln!(w, "{t},{s}")?;
    }
    w.flush()?;
    Ok(true)
}

fn verify(config: &Path, out: &Path) -> Result<bool> {
    let cfg = experiment_config(&read_config(config)?)?;
    let report = match run_experiment(&cfg, Some(out)) {
        Ok(r) => r,
        Err(e @ Error::Aborted(_)) => {
            eprintln!("{e}; partial artifacts in {}", out.display());
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let mut stdout = io::stdout().lock();
    for (name, ok) in &report.checks {
        writeln!(stdout, "{:<10} {}", name, if *ok { "pass" } else { "FAIL" })?;
    }
    writeln!(
        stdout,
        "K = {}  worst ratio = {:.3e}",
        report.k, report.worst_ratio
    )?;
    if !report.flags.is_empty() {
        writeln!(stdout, "flags: {}", report.flags.join(", "))?;
    }
    writeln!(stdout, "artifacts in {}", out.display())?;
    Ok(report.passed())
}

fn rates(
    law: Option<DampingFamily>,
    rho: Option<WeightFamily>,
    window: f64,
    k: f64,
) -> Result<bool> {
    let laws = match law {
        Some(f) => vec![DampingLaw::new(f)?],
        None => vec![
            DampingLaw::linear(),
            DampingLaw::superlinear(2.0)?,
            DampingLaw::superlinear(3.0)?,
            DampingLaw::sublinear(0.5)?,
            DampingLaw::exponential_origin(),
        ],
    };
    let weights = match rho {
        Some(f) => vec![TimeWeight::new(f)?],
        None => [0.0, -1.0, -0.5, 0.25, -2.0]
            .iter()
            .map(|&tau| {
                if tau == 0.0 {
                    Ok(TimeWeight::constant())
                } else {
                    TimeWeight::power(tau)
                }
            })
            .collect::<wavedecay::Result<_>>()?,
    };
    let mut out = io::stdout().lock();
    writeln!(out, "law,rho,form,exponent")?;
    for law in &laws {
        for weight in &weights {
            let (form, exponent) = match predicted_rate(law, weight, window, k) {
                Ok(p) => (
                    p.form.to_string(),
                    p.exponent().map(|e| e.to_string()).unwrap_or_default(),
                ),
                Err(Error::Unsupported { .. }) => ("unsupported".to_string(), String::new()),
                Err(e) => return Err(e.into()),
            };
            writeln!(
                out,
                "{},{},{form},{exponent}",
                law.family(),
                weight.family()
            )?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config, out } => simulate(&config, out.as_deref()),
        Command::Envelope { config, out } => envelope(&config, out.as_deref()),
        Command::Verify { config, out } => verify(&config, &out),
        Command::Rates {
            law,
            rho,
            window,
            k,
        } => rates(law, rho, window, k),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
