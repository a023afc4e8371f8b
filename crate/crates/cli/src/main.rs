//! `vpsbeam` command-line runner.
//!
//! ```text
//! vpsbeam [--config FILE] [--out DIR] [--seed N] [--trials N] [--iterations N]
//!         [--threads N] <convergence|freq-aperture|bs-angle|irs-angle|freq-rayleigh|scale|all>
//! ```

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vpsbeam::channel::write_channel_csv;
use vpsbeam::harness::{self, Experiment, ExperimentConfig, Preset, Sweep};
use vpsbeam::vps::{vps_beamformer, write_phases_csv};
use vpsbeam::{CMatrix, Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "vpsbeam",
    version,
    about = "Run the VPS beamforming experiments and write CSV/JSON data"
)]
struct Cli {
    /// TOML configuration with [scenario], [experiment] and [rng] sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Starting configuration when no --config is given.
    #[arg(long, global = true, value_enum, default_value_t = PresetArg::Baseline)]
    preset: PresetArg,

    /// Output root; each experiment writes to <DIR>/<experiment>/.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    out: PathBuf,

    /// Master seed for every random stream.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Random-initialization AO trials per sweep point [config default: 100].
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,

    /// AO iterations per run [config default: 10].
    #[arg(long, global = true, value_name = "N")]
    iterations: Option<usize>,

    /// Worker threads for the trial pool.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Also write the VPS phases of the configured scenario to <DIR>/vps_state/.
    #[arg(long, global = true)]
    dump_state: bool,

    /// Also write the configured scenario's channels to <DIR>/channel/.
    #[arg(long, global = true)]
    dump_channel: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Baseline,
    Reduced,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// AO convergence under the five initializers.
    Convergence,
    /// Frequency sweep with fixed physical apertures.
    FreqAperture,
    /// BS rotation sweep.
    BsAngle,
    /// IRS rotation sweep.
    IrsAngle,
    /// Frequency sweep with fixed Rayleigh distance.
    FreqRayleigh,
    /// Distance scaling sweep.
    Scale,
    /// Every experiment in turn.
    All,
}

impl Command {
    fn experiments(self) -> Vec<Experiment> {
        match self {
            Command::Convergence => vec![Experiment::Convergence],
            Command::FreqAperture => vec![Experiment::Sweep(Sweep::FreqAperture)],
            Command::BsAngle => vec![Experiment::Sweep(Sweep::BsAngle)],
            Command::IrsAngle => vec![Experiment::Sweep(Sweep::IrsAngle)],
            Command::FreqRayleigh => vec![Experiment::Sweep(Sweep::FreqRayleigh)],
            Command::Scale => vec![Experiment::Sweep(Sweep::Scale)],
            Command::All => Experiment::ALL.to_vec(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(match cli.preset {
            PresetArg::Baseline => Preset::Baseline,
            PresetArg::Reduced => Preset::Reduced,
        }),
    };
    if let Some(seed) = cli.seed {
        cfg.rng.master_seed = seed;
    }
    if let Some(t) = cli.trials {
        cfg.experiment.trials = t;
    }
    if let Some(i) = cli.iterations {
        cfg.experiment.iterations = i;
    }
    if let Some(n) = cli.threads {
        cfg.experiment.threads = Some(n);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn dump_state(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let state = vps_beamformer(&cfg.scenario.build()?)?;
    let dir = out.join("vps_state");
    let mut f = create(&dir.join("bs_phases.csv"))?;
    write_phases_csv(&mut f, &state.bs_phases())?;
    f.flush()?;
    let mut f = create(&dir.join("irs_phases.csv"))?;
    write_phases_csv(&mut f, &state.theta)?;
    f.flush()?;
    Ok(())
}

fn dump_channel(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let ch = cfg.scenario.build()?.channels()?;
    let dir = out.join("channel");
    let mut f = create(&dir.join("h_t.csv"))?;
    write_channel_csv(&mut f, &ch.h_t)?;
    f.flush()?;
    let h_r = CMatrix::from_row_major(ch.h_r.len(), 1, ch.h_r.clone())?;
    let mut f = create(&dir.join("h_r.csv"))?;
    write_channel_csv(&mut f, &h_r)?;
    f.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    if cli.dump_state {
        dump_state(&cfg, &cli.out)?;
    }
    if cli.dump_channel {
        dump_channel(&cfg, &cli.out)?;
    }
    for exp in cli.command.experiments() {
        let dir = harness::run_experiment(exp, &cfg, &cli.out)?;
        println!("{exp}: wrote {}", dir.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
