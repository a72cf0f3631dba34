//! Extraction of the single-diode parameters (n, R_s, I_0) from STC datasheet values.
//!
//! Only the open-circuit point, the maximum power point and the condition
//! dP/dV = 0 at that point are used. With I_0 and R_s written as functions of
//! the ideality factor n, the dP/dV condition collapses to a scalar equation
//! f(n) = 0, solved by Newton's method with an analytic derivative.

use crate::datasheet::{PanelDatasheet, StcContext};
use crate::error::SimError;

/// Iterates must stay strictly inside `(0, UPPER_N_BOUND)`.
pub const UPPER_N_BOUND: f64 = 10.0;

/// Result of [`estimate_parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedParams {
    /// Diode ideality factor.
    pub n: f64,
    /// Series resistance, Ω.
    pub rs: f64,
    /// Reverse saturation current at STC, A.
    pub i0_stc: f64,
    /// Newton updates applied after the initial guess.
    pub iterations: usize,
    /// |f(n)| at the returned n.
    pub residual: f64,
}

/// Result of [`estimate_ideality_factor`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealityEstimate {
    pub n: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub initial_n: f64,
    /// Convergence threshold on the step size |n_{i+1} - n_i|.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// The converged iterate must also satisfy |f(n)| <= residual_gate * |f(1)|.
    pub residual_gate: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            initial_n: 1.0,
            tolerance: 1e-4,
            max_iterations: 50,
            residual_gate: 1e-6,
        }
    }
}

/// Intermediate quantities shared by f(n) and f'(n).
struct Terms {
    i0: f64,
    /// I_sc - I_mp + I_0
    shifted: f64,
    /// ln((I_sc - I_mp + I_0) / I_0)
    log_ratio: f64,
    /// d(ln I_0)/dn
    dlog_i0: f64,
}

fn terms(n: f64, ds: &PanelDatasheet, ctx: &StcContext) -> Result<Terms, SimError> {
    let m = ctx.m(ds);
    let x = m * ds.voc_stc / n;
    let i0 = saturation_current_at_stc(n, ds, ctx)?;
    let gap = ds.isc_stc - ds.imp_stc;
    let log_ratio = (gap / i0).ln_1p();
    // dI0/dn = I0 * (x / n) * e^x / (e^x - 1)
    let dlog_i0 = (x / n) * (1.0 + 1.0 / x.exp_m1());
    if !log_ratio.is_finite() || !dlog_i0.is_finite() {
        return Err(SimError::NumericalRange(format!(
            "f(n) is not evaluable at n = {n}"
        )));
    }
    Ok(Terms {
        i0,
        shifted: gap + i0,
        log_ratio,
        dlog_i0,
    })
}

/// I_0 at STC from the open-circuit condition: `I_sc / (exp(m V_oc / n) - 1)`.
pub fn saturation_current_at_stc(
    n: f64,
    ds: &PanelDatasheet,
    ctx: &StcContext,
) -> Result<f64, SimError> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(SimError::Domain(format!("ideality factor must be positive, got {n}")));
    }
    let x = ctx.m(ds) * ds.voc_stc / n;
    let i0 = ds.isc_stc / x.exp_m1();
    if i0.is_finite() && i0 > 0.0 {
        Ok(i0)
    } else {
        Err(SimError::NumericalRange(format!(
            "saturation current not representable at n = {n} (exponent {x})"
        )))
    }
}

/// Series resistance that places the MPP of the model exactly at (V_mp, I_mp).
pub fn series_resistance_at_stc(
    n: f64,
    i0_stc: f64,
    ds: &PanelDatasheet,
    ctx: &StcContext,
) -> Result<f64, SimError> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(SimError::Domain(format!("ideality factor must be positive, got {n}")));
    }
    if !(i0_stc > 0.0 && i0_stc.is_finite()) {
        return Err(SimError::Domain(format!(
            "saturation current must be positive, got {i0_stc}"
        )));
    }
    let m = ctx.m(ds);
    let log_ratio = ((ds.isc_stc - ds.imp_stc) / i0_stc).ln_1p();
    let rs = n / (m * ds.imp_stc) * log_ratio - ds.vmp_stc / ds.imp_stc;
    if !rs.is_finite() {
        return Err(SimError::NumericalRange(format!(
            "series resistance not representable at n = {n}"
        )));
    }
    if rs < 0.0 {
        return Err(SimError::InconsistentDatasheet(format!(
            "computed series resistance is negative ({rs} ohm at n = {n})"
        )));
    }
    Ok(rs)
}

/// The MPP condition as a function of n alone:
///
/// `f(n) = n I_mp + (I_sc - I_mp + I_0) { n ln((I_sc - I_mp + I_0) / I_0) - 2 m V_mp }`
///
/// with I_0 = I_0(n) at STC.
pub fn ideality_residual(n: f64, ds: &PanelDatasheet, ctx: &StcContext) -> Result<f64, SimError> {
    let t = terms(n, ds, ctx)?;
    let m = ctx.m(ds);
    Ok(n * ds.imp_stc + t.shifted * (n * t.log_ratio - 2.0 * m * ds.vmp_stc))
}

/// Analytic df/dn.
pub fn ideality_residual_derivative(
    n: f64,
    ds: &PanelDatasheet,
    ctx: &StcContext,
) -> Result<f64, SimError> {
    let t = terms(n, ds, ctx)?;
    let m = ctx.m(ds);
    let gap = ds.isc_stc - ds.imp_stc;
    let di0 = t.i0 * t.dlog_i0;
    let bracket = n * t.log_ratio - 2.0 * m * ds.vmp_stc;
    // d/dn ln(shifted / I0) = -(gap / (shifted I0)) dI0/dn
    let dlog_ratio = -(gap / t.shifted) * t.dlog_i0;
    Ok(ds.imp_stc + di0 * bracket + t.shifted * (t.log_ratio + n * dlog_ratio))
}

/// Newton's method on f(n) = 0.
///
/// Converged when a step satisfies `|n_{i+1} - n_i| <= tolerance` and the new
/// iterate passes the residual gate. `iterations` counts applied updates.
pub fn estimate_ideality_factor(
    ds: &PanelDatasheet,
    ctx: &StcContext,
    opts: &NewtonOptions,
) -> Result<IdealityEstimate, SimError> {
    if !(opts.initial_n > 0.0 && opts.initial_n < UPPER_N_BOUND) {
        return Err(SimError::InvalidArgument(format!(
            "initial_n must lie in (0, {UPPER_N_BOUND}), got {}",
            opts.initial_n
        )));
    }
    if !(opts.tolerance > 0.0) {
        return Err(SimError::InvalidArgument(format!(
            "tolerance must be positive, got {}",
            opts.tolerance
        )));
    }
    ds.validate()?;
    ctx.validate()?;

    let gate = match ideality_residual(1.0, ds, ctx) {
        Ok(scale) if scale != 0.0 => opts.residual_gate * scale.abs(),
        _ => opts.residual_gate,
    };

    let mut n = opts.initial_n;
    let mut value = ideality_residual(n, ds, ctx)?;
    for iteration in 1..=opts.max_iterations {
        let slope = ideality_residual_derivative(n, ds, ctx)?;
        if slope == 0.0 || !slope.is_finite() {
            return Err(SimError::SingularStep { n, slope });
        }
        let next = n - value / slope;
        if !(next > 0.0 && next < UPPER_N_BOUND) {
            return Err(SimError::Divergence { iteration, n: next });
        }
        let step = (next - n).abs();
        n = next;
        value = ideality_residual(n, ds, ctx)?;
        if step <= opts.tolerance && value.abs() <= gate {
            return Ok(IdealityEstimate {
                n,
                iterations: iteration,
                residual: value.abs(),
            });
        }
    }
    Err(SimError::NonConvergence {
        iterations: opts.max_iterations,
        last_n: n,
    })
}

/// Full STC extraction with default Newton options.
pub fn estimate_parameters(
    ds: &PanelDatasheet,
    ctx: &StcContext,
) -> Result<EstimatedParams, SimError> {
    estimate_parameters_with(ds, ctx, &NewtonOptions::default())
}

pub fn estimate_parameters_with(
    ds: &PanelDatasheet,
    ctx: &StcContext,
    opts: &NewtonOptions,
) -> Result<EstimatedParams, SimError> {
    let ideality = estimate_ideality_factor(ds, ctx, opts)?;
    let i0_stc = saturation_current_at_stc(ideality.n, ds, ctx)?;
    let rs = series_resistance_at_stc(ideality.n, i0_stc, ds, ctx)?;
    Ok(EstimatedParams {
        n: ideality.n,
        rs,
        i0_stc,
        iterations: ideality.iterations,
        residual: ideality.residual,
    })
}

/// One point of an f(n) scan. `value` is `None` where f cannot be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub n: f64,
    pub value: Option<f64>,
}

/// Evaluates f on `count` uniformly spaced points of `[n_min, n_max]`.
pub fn sample_residual(
    ds: &PanelDatasheet,
    ctx: &StcContext,
    n_min: f64,
    n_max: f64,
    count: usize,
) -> Result<Vec<ResidualSample>, SimError> {
    if !(n_min > 0.0 && n_min < n_max && n_max.is_finite()) {
        return Err(SimError::InvalidArgument(format!(
            "sample range must satisfy 0 < n_min < n_max, got [{n_min}, {n_max}]"
        )));
    }
    if count < 2 {
        return Err(SimError::InvalidArgument(format!(
            "sample count must be at least 2, got {count}"
        )));
    }
    let span = n_max - n_min;
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|j| {
            let n = if j == count - 1 {
                n_max
            } else {
                n_min + span * (j as f64) / last
            };
            ResidualSample {
                n,
                value: ideality_residual(n, ds, ctx).ok(),
            }
        })
        .collect())
}
