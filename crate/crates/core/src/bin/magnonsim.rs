//! Batch front end: structured JSON config in, deterministic CSV tables and
//! a JSON summary out. Exit codes: 0 success, 2 config error, 3 numerical
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;

use magnonsim::analysis::{
    envelope_moments, estimate_init_fidelity, estimate_nuclei, estimate_q, fit_least_squares,
    knight_factor, quadrupolar_t2, strain_noncollinear, tilt_from_g, FitData, FitModelId,
};
use magnonsim::config::{format_float, run_experiment, ExperimentKind};
use magnonsim::experiments::{scenario_config, TomographyScenario};
use magnonsim::sampling::{
    polarized_state, sample_thermal, thermal_j_pmf, NuclearStateSpec, PolarizationSign,
};
use magnonsim::SimError;

#[derive(Parser)]
#[command(name = "magnonsim", version, about = "Electro-nuclear register simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON config file merged over the built-in defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Monte Carlo base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Worker threads (any count reproduces the same output).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for the CSV table and JSON summary.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Dotted-path overrides, e.g. --set params.coupling.tilt_angle_rad=0.2
    #[arg(long = "set")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// NOVEL probe spectrum over locking Rabi frequency and probe time.
    Novel(RunArgs),
    /// Detuned-driving ESR spectrum over detuning and drive time.
    Esr(RunArgs),
    /// Magnon Ramsey contrast versus storage time.
    Ramsey(RunArgs),
    /// Quantum-register tomography (36 preparation/readout pairs).
    Tomography {
        #[command(flatten)]
        run: RunArgs,
        /// Named scenario preset.
        #[arg(long)]
        scenario: Option<String>,
        /// Shorthand for --scenario ideal.
        #[arg(long)]
        ideal: bool,
    },
    /// Closed-form estimators.
    Estimate {
        #[command(subcommand)]
        which: EstimateCommand,
    },
    /// Nonlinear least-squares fit of a CSV table (columns t, y[, sigma]).
    Fit {
        /// Model name (spin_pumping, ramsey_stretched, magnon_ramsey,
        /// undamped_sine, t1_saturation, two_exponential, single_stretched).
        #[arg(long)]
        model: String,
        /// CSV data file.
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated initial parameter guess.
        #[arg(long)]
        initial: Option<String>,
    },
    /// Draw initial nuclear states from the configured sampler.
    Sample {
        /// thermal | dark | deviated
        #[arg(long, default_value = "thermal")]
        kind: String,
        /// Number of nuclei.
        #[arg(long, default_value_t = 13464)]
        nuclei: u64,
        /// Nuclear spin magnitude.
        #[arg(long, default_value_t = 1.5)]
        spin: f64,
        /// Dark-state polarization fraction.
        #[arg(long, default_value_t = 0.6)]
        polarization: f64,
        /// plus | minus
        #[arg(long, default_value = "minus")]
        sign: String,
        /// Deviation scale for the deviated dark state.
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(short = 'n', long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum EstimateCommand {
    /// Effective nucleus numbers from the differential Knight shift.
    Nuclei {
        #[arg(long = "delta-nu")]
        delta_nu: f64,
        #[arg(long, default_value_t = 11100.0)]
        hyperfine: f64,
        #[arg(long, default_value_t = 0.396)]
        abundance: f64,
    },
    /// Geometric Knight-shift enhancement factor 8/sqrt(27).
    Knight,
    /// Gaussian-envelope coupling moments for a given width.
    Moments {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "a-total", default_value_t = 1.0)]
        a_total: f64,
    },
    /// Strain-induced non-collinear coupling in kHz.
    Strain {
        #[arg(long, default_value_t = 0.342)]
        a: f64,
        #[arg(long, default_value_t = 0.089)]
        bq: f64,
        #[arg(long, default_value_t = 58.41)]
        larmor: f64,
    },
    /// Quadrupolar-limited inhomogeneous dephasing time in us.
    T2 {
        #[arg(long = "fwhm-khz")]
        fwhm_khz: f64,
        #[arg(long = "moment-ratio", default_value_t = 1.0)]
        moment_ratio: f64,
    },
    /// Spin initialization fidelity bound from pumping fluorescence.
    InitFidelity {
        #[arg(long)]
        i0: f64,
        #[arg(long = "i-end")]
        i_end: f64,
    },
    /// Quality factor from a fitted relaxation time.
    Q {
        #[arg(long = "t1-us")]
        t1_us: f64,
        #[arg(long = "rabi-mhz")]
        rabi_mhz: f64,
        #[arg(long = "spin-locked")]
        spin_locked: bool,
    },
    /// Quantization-axis tilt from the in-plane g-factors.
    Tilt {
        #[arg(long)]
        g110: f64,
        #[arg(long)]
        gm110: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                SimError::Config(_) | SimError::Domain(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn dispatch(cli: Cli) -> magnonsim::Result<()> {
    match cli.command {
        Command::Novel(run) => run_batch(ExperimentKind::Novel, run, &[]),
        Command::Esr(run) => run_batch(ExperimentKind::Esr, run, &[]),
        Command::Ramsey(run) => run_batch(ExperimentKind::Ramsey, run, &[]),
        Command::Tomography { run, scenario, ideal } => {
            let mut extra = Vec::new();
            let name = if ideal { Some("ideal".to_string()) } else { scenario };
            if let Some(name) = name {
                let preset = scenario_config(
                    TomographyScenario::parse(&name)?,
                    run.seed.unwrap_or(1),
                )?;
                let tree = serde_json::to_value(&preset)
                    .map_err(|e| SimError::Config(e.to_string()))?;
                extra.push(("__preset__".to_string(), tree));
            }
            run_batch_with_preset(ExperimentKind::Tomography, run, extra)
        }
        Command::Estimate { which } => estimate(which),
        Command::Fit { model, data, initial } => fit(model, &data, initial),
        Command::Sample { kind, nuclei, spin, polarization, sign, lambda, count, seed, out } => {
            sample(&kind, nuclei, spin, polarization, &sign, lambda, count, seed, &out)
        }
    }
}

fn effective_workers(run: &RunArgs) -> Option<usize> {
    run.workers.or_else(|| {
        std::env::var("SIM_DEFAULT_WORKERS").ok().and_then(|v| v.parse().ok())
    })
}

fn flag_overrides(run: &RunArgs) -> Vec<String> {
    let mut sets = Vec::new();
    if let Some(seed) = run.seed {
        sets.push(format!("seed={seed}"));
    }
    if let Some(samples) = run.samples {
        sets.push(format!("n_samples={samples}"));
    }
    if let Some(workers) = effective_workers(run) {
        sets.push(format!("workers={workers}"));
    }
    sets.extend(run.set.iter().cloned());
    sets
}

fn run_batch(kind: ExperimentKind, run: RunArgs, _unused: &[()]) -> magnonsim::Result<()> {
    run_batch_with_preset(kind, run, Vec::new())
}

fn run_batch_with_preset(
    kind: ExperimentKind,
    run: RunArgs,
    preset: Vec<(String, serde_json::Value)>,
) -> magnonsim::Result<()> {
    let file_text = match &run.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            SimError::Config(format!("cannot read config {}: {e}", path.display()))
        })?),
        None => None,
    };
    // a scenario preset acts as the file layer under the user's config
    let merged_file = match (preset.into_iter().next(), &file_text) {
        (Some((_, tree)), Some(text)) => {
            let mut base = tree;
            let user: serde_json::Value = serde_json::from_str(text)
                .map_err(|e| SimError::Config(format!("config file: {e}")))?;
            magnonsim::config::merge_values(&mut base, user);
            Some(base.to_string())
        }
        (Some((_, tree)), None) => Some(tree.to_string()),
        (None, Some(text)) => Some(text.clone()),
        (None, None) => None,
    };
    let overrides = flag_overrides(&run);
    let (csv, summary) = run_experiment(kind, merged_file.as_deref(), &overrides)?;

    std::fs::create_dir_all(&run.out)?;
    let csv_path = run.out.join(format!("{}.csv", kind.name()));
    let summary_path = run.out.join(format!("{}_summary.json", kind.name()));
    std::fs::write(&csv_path, csv)?;
    std::fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap() + "\n")?;
    println!("wrote {}", csv_path.display());
    println!("wrote {}", summary_path.display());
    if let Some(f) = summary.get("fidelity") {
        println!("fidelity = {}", f);
    }
    Ok(())
}

fn estimate(which: EstimateCommand) -> magnonsim::Result<()> {
    match which {
        EstimateCommand::Nuclei { delta_nu, hyperfine, abundance } => {
            let (n_species, n_total) = estimate_nuclei(delta_nu, hyperfine, abundance)?;
            println!("N_species = {n_species:.1}");
            println!("N_total = {n_total:.1}");
        }
        EstimateCommand::Knight => {
            println!("knight_factor = {}", format_float(knight_factor()));
        }
        EstimateCommand::Moments { sigma, a_total } => {
            let m = envelope_moments(sigma, a_total)?;
            println!("M1 = {}", format_float(m.m1));
            println!("M2 = {}", format_float(m.m2));
            println!("M3 = {}", format_float(m.m3));
            println!("effective_N = {}", format_float(magnonsim::analysis::effective_n(sigma)?));
        }
        EstimateCommand::Strain { a, bq, larmor } => {
            println!("a_perp_khz = {}", format_float(strain_noncollinear(a, bq, larmor)?));
        }
        EstimateCommand::T2 { fwhm_khz, moment_ratio } => {
            println!("t2_star_us = {}", format_float(quadrupolar_t2(fwhm_khz, moment_ratio)?));
        }
        EstimateCommand::InitFidelity { i0, i_end } => {
            println!("f_init = {}", format_float(estimate_init_fidelity(i0, i_end)?));
        }
        EstimateCommand::Q { t1_us, rabi_mhz, spin_locked } => {
            println!("q_factor = {}", format_float(estimate_q(t1_us, rabi_mhz, spin_locked)?));
        }
        EstimateCommand::Tilt { g110, gm110 } => {
            println!("tilt_rad = {}", format_float(tilt_from_g(g110, gm110)?));
        }
    }
    Ok(())
}

fn fit(model: String, data_path: &Path, initial: Option<String>) -> magnonsim::Result<()> {
    let model = FitModelId::parse(&model)?;
    let text = std::fs::read_to_string(data_path)
        .map_err(|e| SimError::Config(format!("cannot read {}: {e}", data_path.display())))?;
    let mut t = Vec::new();
    let mut y = Vec::new();
    let mut sigma = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() < 2 {
            return Err(SimError::Config(format!(
                "line {}: need at least two columns",
                lineno + 1
            )));
        }
        let parse = |s: &str| s.parse::<f64>();
        match (parse(cols[0]), parse(cols[1])) {
            (Ok(a), Ok(b)) => {
                t.push(a);
                y.push(b);
                if cols.len() >= 3 {
                    if let Ok(s) = parse(cols[2]) {
                        sigma.push(s);
                    }
                }
            }
            _ if t.is_empty() => continue, // header row
            _ => {
                return Err(SimError::Config(format!(
                    "line {}: non-numeric data",
                    lineno + 1
                )))
            }
        }
    }
    let sigma = if sigma.len() == t.len() { Some(sigma) } else { None };
    let data = FitData::new(t, y, sigma)?;
    let guess: Vec<f64> = match initial {
        Some(text) => text
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| {
                    SimError::Config(format!("bad initial value '{v}': {e}"))
                })
            })
            .collect::<magnonsim::Result<_>>()?,
        None => vec![1.0; model.n_params()],
    };
    let result = fit_least_squares(model, &data, &guess)?;
    let errors = result.param_errors();
    for (i, name) in model.param_names().iter().enumerate() {
        println!("{name} = {} +- {}", format_float(result.params[i]), format_float(errors[i]));
    }
    println!("residual_norm = {}", format_float(result.residual_norm));
    println!("iterations = {}", result.iterations);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sample(
    kind: &str,
    nuclei: u64,
    spin: f64,
    polarization: f64,
    sign: &str,
    lambda: f64,
    count: usize,
    seed: u64,
    out: &Path,
) -> magnonsim::Result<()> {
    let sign = match sign {
        "plus" => PolarizationSign::Plus,
        "minus" => PolarizationSign::Minus,
        other => return Err(SimError::Config(format!("unknown sign '{other}'"))),
    };
    let mut rng = rand_pcg::Pcg64Mcg::seed_from_u64(seed);
    let mut csv = String::from("sample_index,j,m\n");
    match kind {
        "thermal" => {
            let dist = thermal_j_pmf(magnonsim::sampling::equivalent_spin_half_count(
                nuclei, spin,
            ))?;
            for i in 0..count {
                let (j, m) = sample_thermal(&dist, &mut rng);
                csv.push_str(&format!("{i},{},{}\n", format_float(j), format_float(m)));
            }
        }
        "dark" | "deviated" => {
            let spec = if kind == "dark" {
                NuclearStateSpec::Dark { polarization, sign }
            } else {
                NuclearStateSpec::DeviatedDark { polarization, sign, lambda }
            };
            let j0 = spin * nuclei as f64;
            for i in 0..count {
                let s = polarized_state(&spec, j0, &mut rng)?;
                csv.push_str(&format!("{i},{},{}\n", format_float(s.j), format_float(s.m)));
            }
        }
        other => return Err(SimError::Config(format!("unknown sample kind '{other}'"))),
    }
    std::fs::create_dir_all(out)?;
    let path = out.join("sample.csv");
    std::fs::write(&path, csv)?;
    println!("wrote {}", path.display());
    Ok(())
}
