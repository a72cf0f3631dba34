use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "pvsim", version, about = "Single-diode solar panel simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate n, R_s and I_0 from the datasheet values.
    Estimate {
        #[command(flatten)]
        panel: PanelSource,
        #[command(flatten)]
        output: Output,
    },
    /// Emit the I-V / P-V curve as CSV.
    Curve {
        #[command(flatten)]
        panel: PanelSource,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Report the maximum power point.
    Mpp {
        #[command(flatten)]
        panel: PanelSource,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// One curve per temperature or irradiance value.
    Sweep {
        #[command(flatten)]
        panel: PanelSource,
        #[command(flatten)]
        env: EnvArgs,
        #[command(flatten)]
        axis: SweepAxis,
        #[command(flatten)]
        sampling: Sampling,
        /// Base file name; each curve goes to <stem>_<value>.<ext>.
        /// Without it all curves are written to stdout, each after a `# ` header line.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample f(n), the function whose root is the ideality factor.
    FnPlot {
        #[command(flatten)]
        panel: PanelSource,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        n_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        n_max: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        /// Directory of static UI assets to serve alongside the API.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PanelSource {
    /// Datasheet file (flat TOML).
    #[arg(long)]
    pub datasheet: Option<PathBuf>,
    /// Bundled panel name, e.g. bp_sx_150.
    #[arg(long)]
    pub panel: Option<String>,
}

#[derive(Debug, Args)]
pub struct EnvArgs {
    /// Irradiance, W/m².
    #[arg(long, default_value_t = 1000.0, allow_negative_numbers = true)]
    pub irradiance: f64,
    /// Cell temperature, °C.
    #[arg(long, default_value_t = 25.0, allow_negative_numbers = true)]
    pub temperature: f64,
}

#[derive(Debug, Args)]
pub struct Sampling {
    /// Number of uniform current samples.
    #[arg(long, default_value_t = pvsim_core::DEFAULT_POINTS)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct SweepAxis {
    /// Comma-separated cell temperatures, °C (at --irradiance).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub temperatures: Option<Vec<f64>>,
    /// Comma-separated irradiances, W/m² (at --temperature).
    #[arg(long, value_delimiter = ',')]
    pub irradiances: Option<Vec<f64>>,
}
