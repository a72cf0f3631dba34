use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use pvsim_core::{
    bundled_panel, estimate_parameters, export_curve_csv, export_residual_csv, generate_iv_curve,
    parse_datasheet, sample_residual, track_mpp, EnvConditions, EstimatedParams, IvCurve,
    PanelDatasheet, SimError, StcContext,
};

use crate::args::{Command, EnvArgs, PanelSource};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{0}")]
    Input(String),

    #[error("{} [{}]: {}", .stage, .source.class(), .source)]
    Sim {
        stage: &'static str,
        source: SimError,
    },

    #[error("cannot write `{}`: {}", .path.display(), .source)]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("server error: {0}")]
    Serve(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn estimation_failed(source: SimError) -> CliError {
    CliError::Sim {
        stage: "estimation failed",
        source,
    }
}

fn simulation_failed(source: SimError) -> CliError {
    CliError::Sim {
        stage: "simulation failed",
        source,
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    let ctx = StcContext::default();
    match command {
        Command::Estimate { panel, output } => {
            let ds = load_panel(&panel)?;
            let params = estimate_parameters(&ds, &ctx).map_err(estimation_failed)?;
            emit(output.out.as_deref(), &estimate_report(&ds, &params))
        }
        Command::Curve {
            panel,
            env,
            sampling,
            output,
        } => {
            let ds = load_panel(&panel)?;
            let env = conditions(&env, &ctx)?;
            let curve = simulate(&ds, &env, &ctx, sampling.points)?;
            emit(output.out.as_deref(), &export_curve_csv(&curve))
        }
        Command::Mpp {
            panel,
            env,
            sampling,
            output,
        } => {
            let ds = load_panel(&panel)?;
            let env = conditions(&env, &ctx)?;
            let curve = simulate(&ds, &env, &ctx, sampling.points)?;
            let mpp = track_mpp(&curve);
            let report = format!(
                "v_mp={}\ni_mp={}\np_mp={}\nindex={}\n",
                mpp.v_mp, mpp.i_mp, mpp.p_mp, mpp.index
            );
            emit(output.out.as_deref(), &report)
        }
        Command::Sweep {
            panel,
            env,
            axis,
            sampling,
            out,
        } => {
            let ds = load_panel(&panel)?;
            let (label, values, make_env): (&str, Vec<f64>, Box<dyn Fn(f64) -> EnvArgs>) =
                match (axis.temperatures, axis.irradiances) {
                    (Some(ts), None) => (
                        "temperature_c",
                        ts,
                        Box::new(move |t| EnvArgs {
                            irradiance: env.irradiance,
                            temperature: t,
                        }),
                    ),
                    (None, Some(gs)) => (
                        "irradiance_w_m2",
                        gs,
                        Box::new(move |g| EnvArgs {
                            irradiance: g,
                            temperature: env.temperature,
                        }),
                    ),
                    _ => {
                        return Err(CliError::Usage(
                            "give exactly one of --temperatures or --irradiances".into(),
                        ))
                    }
                };
            if values.is_empty() {
                return Err(CliError::Usage("sweep list is empty".into()));
            }
            let mut curves = Vec::with_capacity(values.len());
            for value in &values {
                let env = conditions(&make_env(*value), &ctx)?;
                curves.push((*value, simulate(&ds, &env, &ctx, sampling.points)?));
            }
            write_sweep(out.as_deref(), label, &curves)
        }
        Command::FnPlot {
            panel,
            n_min,
            n_max,
            count,
            output,
        } => {
            if !(n_min > 0.0 && n_min < n_max) {
                return Err(CliError::Usage(format!(
                    "require 0 < --n-min < --n-max, got {n_min} and {n_max}"
                )));
            }
            if count < 2 {
                return Err(CliError::Usage(format!("--count must be at least 2, got {count}")));
            }
            let ds = load_panel(&panel)?;
            let samples = sample_residual(&ds, &ctx, n_min, n_max, count)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            emit(output.out.as_deref(), &export_residual_csv(&samples))
        }
        Command::Serve { port, bind, ui } => {
            let runtime = tokio::runtime::Runtime::new().map_err(CliError::Serve)?;
            runtime
                .block_on(pvsim_service::serve(bind, port, ui))
                .map_err(CliError::Serve)
        }
    }
}

fn load_panel(source: &PanelSource) -> Result<PanelDatasheet, CliError> {
    match (&source.datasheet, &source.panel) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| {
                CliError::Input(format!("cannot read datasheet `{}`: {e}", path.display()))
            })?;
            parse_datasheet(&text)
                .map_err(|e| CliError::Input(format!("datasheet `{}`: {e}", path.display())))
        }
        (None, Some(name)) => bundled_panel(name).map_err(|e| CliError::Input(e.to_string())),
        _ => Err(CliError::Usage(
            "give exactly one of --datasheet or --panel".into(),
        )),
    }
}

fn conditions(env: &EnvArgs, ctx: &StcContext) -> Result<EnvConditions, CliError> {
    EnvConditions::from_interface_units(env.irradiance, env.temperature, ctx).map_err(|e| match e
    {
        SimError::InvalidArgument(msg) => CliError::Usage(msg),
        other => simulation_failed(other),
    })
}

fn simulate(
    ds: &PanelDatasheet,
    env: &EnvConditions,
    ctx: &StcContext,
    points: usize,
) -> Result<IvCurve, CliError> {
    if points < 2 {
        return Err(CliError::Usage(format!("--points must be at least 2, got {points}")));
    }
    let params = estimate_parameters(ds, ctx).map_err(estimation_failed)?;
    generate_iv_curve(ds, &params, env, ctx, points).map_err(simulation_failed)
}

fn estimate_report(ds: &PanelDatasheet, params: &EstimatedParams) -> String {
    let mut out = String::new();
    if let Some(name) = &ds.name {
        let _ = writeln!(out, "panel={name}");
    }
    let _ = writeln!(out, "n={}", params.n);
    let _ = writeln!(out, "rs_ohm={}", params.rs);
    let _ = writeln!(out, "i0_a={:e}", params.i0_stc);
    let _ = writeln!(out, "iterations={}", params.iterations);
    let _ = writeln!(out, "residual={:e}", params.residual);
    out
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `curves.csv` + 25 -> `curves_25.csv`
pub fn suffixed_path(base: &Path, value: f64) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".into());
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{value}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{value}"),
    };
    base.with_file_name(name)
}

fn write_sweep(out: Option<&Path>, label: &str, curves: &[(f64, IvCurve)]) -> Result<(), CliError> {
    match out {
        Some(base) => {
            for (value, curve) in curves {
                let path = suffixed_path(base, *value);
                emit(Some(&path), &export_curve_csv(curve))?;
                println!("{}", path.display());
            }
            Ok(())
        }
        None => {
            let mut text = String::new();
            for (value, curve) in curves {
                let _ = writeln!(text, "# {label}={value}");
                text.push_str(&export_curve_csv(curve));
            }
            emit(None, &text)
        }
    }
}
