//! Single-diode solar panel simulation from seven datasheet values.
//!
//! The workflow is: read a [`PanelDatasheet`], extract the ideality factor,
//! series resistance and saturation current with [`estimate_parameters`],
//! then produce I-V / P-V curves at any irradiance and cell temperature with
//! [`generate_iv_curve`] and locate the maximum power point with [`track_mpp`].
//!
//! ```
//! use pvsim_core::{bundled_panel, estimate_parameters, generate_iv_curve, track_mpp,
//!                  EnvConditions, StcContext};
//!
//! let ctx = StcContext::default();
//! let panel = bundled_panel("bp_sx_150").unwrap();
//! let params = estimate_parameters(&panel, &ctx).unwrap();
//! let env = EnvConditions::from_interface_units(800.0, 40.0, &ctx).unwrap();
//! let curve = generate_iv_curve(&panel, &params, &env, &ctx, 2000).unwrap();
//! let mpp = track_mpp(&curve);
//! assert!(mpp.p_mp > 0.0);
//! ```

pub mod curve;
pub mod datasheet;
pub mod environment;
pub mod error;
pub mod estimation;
pub mod io;

pub use curve::{generate_iv_curve, track_mpp, IvCurve, MppPoint, DEFAULT_POINTS};
pub use datasheet::{PanelDatasheet, StcContext};
pub use environment::{
    open_circuit_voltage, saturation_current_env, short_circuit_current, ConditionedModel,
    EnvConditions,
};
pub use error::{DatasheetError, InvariantViolation, SimError};
pub use estimation::{
    estimate_ideality_factor, estimate_parameters, estimate_parameters_with,
    ideality_residual, ideality_residual_derivative, sample_residual,
    saturation_current_at_stc, series_resistance_at_stc, EstimatedParams, IdealityEstimate,
    NewtonOptions, ResidualSample,
};
pub use io::{
    bundled_names, bundled_panel, datasheet_from_fields, datasheet_to_toml, export_curve_csv,
    export_residual_csv, parse_datasheet, FieldValue,
};
