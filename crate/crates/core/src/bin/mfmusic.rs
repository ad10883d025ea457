use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfmusic::pipeline::{
    self, ForwardModel, MTilde, OutFormat, ReconstructOptions, SimulateOptions,
};
use mfmusic::{DataVariant, Error, Functional, NoiseMode};

#[derive(Parser)]
#[command(
    name = "mfmusic",
    version,
    about = "Multifrequency MUSIC localization of small scatterers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a far-field tensor from a configuration.
    Simulate {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Image a far-field tensor.
    Reconstruct {
        tensor: PathBuf,
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        rec: RecArgs,
    },
    /// Simulate and reconstruct in one run.
    Pipeline {
        config: PathBuf,
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        rec: RecArgs,
    },
    /// Write the singular values of every direction's Hankel matrix.
    SvDump {
        tensor: PathBuf,
        config: PathBuf,
        #[arg(short, long, default_value = "singular_values.csv")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "extended")]
        variant: VariantArg,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum, default_value = "leading")]
    model: ModelArg,
    #[arg(long)]
    quad_order: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, value_enum)]
    noise_mode: Option<NoiseModeArg>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RecArgs {
    #[arg(long, value_enum, default_value = "i1")]
    functional: FunctionalArg,
    /// `auto` or a fixed projector rank.
    #[arg(long, default_value = "auto", value_parser = parse_mtilde)]
    mtilde: MTilde,
    #[arg(long = "M")]
    scatterers: Option<usize>,
    #[arg(long, value_enum, default_value = "extended")]
    variant: VariantArg,
    /// Nodes per axis: one value for all axes or one per axis.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long, value_enum, default_value = "both")]
    out_format: FormatArg,
    /// Peak threshold as a fraction of the field maximum.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    min_separation: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Leading,
    Born,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseModeArg {
    Global,
    Entrywise,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionalArg {
    I1,
    I2,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Extended,
    Realonly,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Vtk,
    Both,
}

fn parse_mtilde(s: &str) -> Result<MTilde, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(MTilde::Auto);
    }
    s.parse::<usize>()
        .ok()
        .filter(|&m| m > 0)
        .map(MTilde::Fixed)
        .ok_or_else(|| format!("expected `auto` or a positive integer, got `{s}`"))
}

fn variant(v: VariantArg) -> DataVariant {
    match v {
        VariantArg::Extended => DataVariant::Extended,
        VariantArg::Realonly => DataVariant::RealOnly,
    }
}

impl SimArgs {
    fn options(&self) -> SimulateOptions {
        SimulateOptions {
            model: match self.model {
                ModelArg::Leading => ForwardModel::Leading,
                ModelArg::Born => ForwardModel::Born,
            },
            quad_order: self.quad_order,
            noise: self.noise,
            seed: self.seed,
            noise_mode: self.noise_mode.map(|m| match m {
                NoiseModeArg::Global => NoiseMode::Global,
                NoiseModeArg::Entrywise => NoiseMode::Entrywise,
            }),
        }
    }
}

impl RecArgs {
    fn options(&self) -> ReconstructOptions {
        ReconstructOptions {
            functional: match self.functional {
                FunctionalArg::I1 => Functional::I1,
                FunctionalArg::I2 => Functional::I2,
            },
            mtilde: self.mtilde,
            scatterers: self.scatterers,
            variant: variant(self.variant),
            grid_points: self.grid.clone(),
            out_format: match self.out_format {
                FormatArg::Csv => OutFormat::Csv,
                FormatArg::Vtk => OutFormat::Vtk,
                FormatArg::Both => OutFormat::Both,
            },
            threshold_fraction: self.threshold,
            min_separation: self.min_separation,
            ..ReconstructOptions::default()
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("MFMUSIC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| format!("MFMUSIC_THREADS must be a non-negative integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn print_peaks(peaks: &mfmusic::PeakSet) {
    println!("{} peak(s)", peaks.len());
    for p in &peaks.peaks {
        println!("  {:?}  {:.6e}", p.position, p.value);
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config, out, sim } => {
            let s = pipeline::simulate(&config, &out, &sim.options())?;
            println!(
                "wrote {} ({}×{})",
                s.tensor_path.display(),
                s.tensor.directions(),
                s.tensor.frequencies()
            );
        }
        Command::Reconstruct {
            tensor,
            config,
            out,
            rec,
        } => {
            let r = pipeline::reconstruct(&tensor, &config, &out, &rec.options())?;
            if let Some(est) = &r.model_order {
                println!("M = {}, L̃ = {}", est.m_estimate, est.l_tilde);
            }
            print_peaks(&r.peaks);
        }
        Command::Pipeline {
            config,
            out,
            sim,
            rec,
        } => {
            let (_, r) = pipeline::run_pipeline(&config, &out, &sim.options(), &rec.options())?;
            if let Some(est) = &r.model_order {
                println!("M = {}, L̃ = {}", est.m_estimate, est.l_tilde);
            }
            print_peaks(&r.peaks);
        }
        Command::SvDump {
            tensor,
            config,
            out,
            variant: v,
        } => {
            pipeline::sv_dump(&tensor, &config, &out, variant(v))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
