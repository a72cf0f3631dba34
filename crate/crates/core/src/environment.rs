//! Irradiance and temperature adjustments of the STC model.

use crate::datasheet::{PanelDatasheet, StcContext};
use crate::error::SimError;
use crate::estimation::EstimatedParams;

/// Operating conditions in model units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConditions {
    /// Irradiance G, kW/m².
    pub irradiance: f64,
    /// Cell temperature T, K.
    pub cell_temp: f64,
}

impl EnvConditions {
    pub fn new(irradiance_kw_m2: f64, cell_temp_k: f64) -> Result<Self, SimError> {
        if !(irradiance_kw_m2 > 0.0 && irradiance_kw_m2.is_finite()) {
            return Err(SimError::InvalidArgument(format!(
                "irradiance must be positive, got {irradiance_kw_m2} kW/m2"
            )));
        }
        if !(cell_temp_k > 0.0 && cell_temp_k.is_finite()) {
            return Err(SimError::InvalidArgument(format!(
                "cell temperature must be positive in kelvin, got {cell_temp_k} K"
            )));
        }
        Ok(EnvConditions {
            irradiance: irradiance_kw_m2,
            cell_temp: cell_temp_k,
        })
    }

    /// Builds conditions from interface units (W/m² and °C).
    pub fn from_interface_units(
        irradiance_w_m2: f64,
        temperature_c: f64,
        ctx: &StcContext,
    ) -> Result<Self, SimError> {
        if !(irradiance_w_m2 > 0.0 && irradiance_w_m2.is_finite()) {
            return Err(SimError::InvalidArgument(format!(
                "irradiance must be positive, got {irradiance_w_m2} W/m2"
            )));
        }
        Self::new(irradiance_w_m2 / 1000.0, ctx.celsius_to_kelvin(temperature_c))
    }

    pub fn stc(ctx: &StcContext) -> Self {
        EnvConditions {
            irradiance: 1.0,
            cell_temp: ctx.t_stc,
        }
    }
}

/// `V_oc(G, T) = V_oc,stc + b (T - T_stc) + (n N k T / q) ln G`
pub fn open_circuit_voltage(
    ds: &PanelDatasheet,
    params: &EstimatedParams,
    env: &EnvConditions,
    ctx: &StcContext,
) -> Result<f64, SimError> {
    let thermal = params.n * f64::from(ds.cell_count) * ctx.boltzmann_k * env.cell_temp
        / ctx.electron_charge_q;
    let voc = ds.voc_stc
        + ds.beta_voc * (env.cell_temp - ctx.t_stc)
        + thermal * env.irradiance.ln();
    if voc > 0.0 && voc.is_finite() {
        Ok(voc)
    } else {
        Err(SimError::OutOfModelRange(format!(
            "open-circuit voltage {voc} V is not positive at G = {} kW/m2, T = {} K",
            env.irradiance, env.cell_temp
        )))
    }
}

/// `I_sc(G, T) = I_sc,stc G^(1 + a (T - T_stc))`
///
/// At G = 1 the temperature term has no effect.
pub fn short_circuit_current(ds: &PanelDatasheet, env: &EnvConditions, ctx: &StcContext) -> f64 {
    ds.isc_stc * env.irradiance.powf(1.0 + ds.alpha_isc * (env.cell_temp - ctx.t_stc))
}

/// I_0 at the given conditions, re-using the open-circuit relation with the
/// conditioned V_oc, I_sc and `m_T = q / (N k T)`.
pub fn saturation_current_env(
    ds: &PanelDatasheet,
    params: &EstimatedParams,
    env: &EnvConditions,
    ctx: &StcContext,
) -> Result<f64, SimError> {
    let voc = open_circuit_voltage(ds, params, env, ctx)?;
    let isc = short_circuit_current(ds, env, ctx);
    let m_t = ctx.volt_scale(ds.cell_count, env.cell_temp);
    saturation_current_from(isc, voc, m_t, params.n)
}

fn saturation_current_from(isc: f64, voc: f64, m_t: f64, n: f64) -> Result<f64, SimError> {
    let x = m_t * voc / n;
    let i0 = isc / x.exp_m1();
    if i0 > 0.0 && i0.is_finite() {
        Ok(i0)
    } else {
        Err(SimError::NumericalRange(format!(
            "saturation current not representable (exponent {x})"
        )))
    }
}

/// Environment-adjusted model, ready for curve evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedModel {
    pub voc_gt: f64,
    pub isc_gt: f64,
    pub i0_gt: f64,
    pub m_t: f64,
    pub n: f64,
    pub rs: f64,
}

impl ConditionedModel {
    pub fn new(
        ds: &PanelDatasheet,
        params: &EstimatedParams,
        env: &EnvConditions,
        ctx: &StcContext,
    ) -> Result<Self, SimError> {
        if !(params.n > 0.0 && params.rs >= 0.0 && params.rs.is_finite()) {
            return Err(SimError::InvalidArgument(format!(
                "estimated parameters out of range: n = {}, rs = {}",
                params.n, params.rs
            )));
        }
        let voc_gt = open_circuit_voltage(ds, params, env, ctx)?;
        let isc_gt = short_circuit_current(ds, env, ctx);
        if !(isc_gt > 0.0 && isc_gt.is_finite()) {
            return Err(SimError::OutOfModelRange(format!(
                "short-circuit current {isc_gt} A is not positive"
            )));
        }
        let m_t = ctx.volt_scale(ds.cell_count, env.cell_temp);
        let i0_gt = saturation_current_from(isc_gt, voc_gt, m_t, params.n)?;
        Ok(ConditionedModel {
            voc_gt,
            isc_gt,
            i0_gt,
            m_t,
            n: params.n,
            rs: params.rs,
        })
    }

    /// Terminal voltage at output current `i`:
    /// `V = (n / m_T) ln((I_sc - I + I_0) / I_0) - I R_s`.
    ///
    /// May be negative close to `isc_gt`.
    pub fn voltage_at_current(&self, i: f64) -> Result<f64, SimError> {
        if !(0.0..=self.isc_gt).contains(&i) {
            return Err(SimError::Domain(format!(
                "current {i} A outside [0, {}] A",
                self.isc_gt
            )));
        }
        // I_0 is defined so that the open-circuit point is exactly V_oc.
        if i == 0.0 {
            return Ok(self.voc_gt);
        }
        Ok(self.n / self.m_t * ((self.isc_gt - i) / self.i0_gt).ln_1p() - i * self.rs)
    }

    /// Inverse of [`voltage_at_current`](Self::voltage_at_current) by bisection,
    /// for `v` between `V(isc_gt)` and `voc_gt`.
    pub fn current_at_voltage(&self, v: f64, tolerance_v: f64) -> Result<f64, SimError> {
        let v_end = self.voltage_at_current(self.isc_gt)?;
        if !(v_end..=self.voc_gt).contains(&v) {
            return Err(SimError::Domain(format!(
                "voltage {v} V outside [{v_end}, {}] V",
                self.voc_gt
            )));
        }
        let (mut lo, mut hi) = (0.0_f64, self.isc_gt);
        let mut best = (lo, (self.voc_gt - v).abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let dv = self.voltage_at_current(mid)? - v;
            if dv.abs() < best.1 {
                best = (mid, dv.abs());
            }
            if dv.abs() <= tolerance_v {
                break;
            }
            // voltage decreases with current
            if dv > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(best.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::estimate_parameters;
    use approx::assert_relative_eq;

    fn setup() -> (PanelDatasheet, EstimatedParams, StcContext) {
        let ds = crate::io::bundled_panel("bp_sx_150").unwrap();
        let ctx = StcContext::default();
        let params = estimate_parameters(&ds, &ctx).unwrap();
        (ds, params, ctx)
    }

    // 50-digit evaluations of the closed forms with n = 1.6411770255553253.
    const VOC_G05_T298: f64 = 41.395_926_933_560_591_97;
    const ISC_G06_T323: f64 = 2.826_440_307_101_736_50;
    const I0_G1_T323: f64 = 2.902_893_726_433_397_88e-5;

    #[test]
    fn open_circuit_voltage_cases() {
        let (ds, p, ctx) = setup();
        let at = |g, t| open_circuit_voltage(&ds, &p, &EnvConditions::new(g, t).unwrap(), &ctx);
        assert_eq!(at(1.0, 298.0).unwrap(), 43.5);
        assert_relative_eq!(at(1.0, 323.0).unwrap(), 39.5, max_relative = 1e-14);
        assert_relative_eq!(at(0.5, 298.0).unwrap(), VOC_G05_T298, max_relative = 1e-10);
        assert_eq!(at(1e-9, 298.0).unwrap_err().class(), "out-of-model-range");
    }

    #[test]
    fn short_circuit_current_cases() {
        let (ds, _, ctx) = setup();
        let at = |g, t| short_circuit_current(&ds, &EnvConditions::new(g, t).unwrap(), &ctx);
        assert_eq!(at(1.0, 298.0), 4.75);
        assert_relative_eq!(at(0.6, 298.0), 2.85, max_relative = 1e-14);
        assert_relative_eq!(at(0.6, 323.0), ISC_G06_T323, max_relative = 1e-10);
        // temperature has no effect at 1 kW/m2
        assert_eq!(at(1.0, 348.0), 4.75);
    }

    #[test]
    fn saturation_current_env_cases() {
        let (ds, p, ctx) = setup();
        let at = |g, t| saturation_current_env(&ds, &p, &EnvConditions::new(g, t).unwrap(), &ctx);
        assert_eq!(at(1.0, 298.0).unwrap(), p.i0_stc);
        assert_relative_eq!(at(1.0, 323.0).unwrap(), I0_G1_T323, max_relative = 1e-9);
        assert!(at(1.0, 323.0).unwrap() > at(1.0, 298.0).unwrap());
    }

    #[test]
    fn env_validation() {
        let ctx = StcContext::default();
        let err = EnvConditions::from_interface_units(0.0, 25.0, &ctx).unwrap_err();
        assert!(err.to_string().contains("irradiance must be positive"));
        assert!(EnvConditions::new(1.0, 0.0).is_err());
        let env = EnvConditions::from_interface_units(1000.0, 25.0, &ctx).unwrap();
        assert_eq!(env, EnvConditions::stc(&ctx));
    }

    #[test]
    fn voltage_at_current_cases() {
        let (ds, p, ctx) = setup();
        let model = ConditionedModel::new(&ds, &p, &EnvConditions::stc(&ctx), &ctx).unwrap();
        assert_eq!(model.voltage_at_current(0.0).unwrap(), 43.5);
        assert_relative_eq!(model.voltage_at_current(4.35).unwrap(), 34.5, max_relative = 1e-6);
        let end = model.voltage_at_current(4.75).unwrap();
        assert_relative_eq!(end, -4.75 * p.rs, max_relative = 1e-12);
        assert!((end + 1.62).abs() < 0.01);
        assert_eq!(model.voltage_at_current(4.8).unwrap_err().class(), "domain");
        assert_eq!(model.voltage_at_current(-0.1).unwrap_err().class(), "domain");
    }

    #[test]
    fn current_at_voltage_inverts() {
        let (ds, p, ctx) = setup();
        let model = ConditionedModel::new(&ds, &p, &EnvConditions::stc(&ctx), &ctx).unwrap();
        let i = model.current_at_voltage(34.5, 1e-12).unwrap();
        assert_relative_eq!(i, 4.35, max_relative = 1e-9);
        let i0 = model.current_at_voltage(0.0, 1e-9).unwrap();
        assert!(i0 > 4.74 && i0 < 4.75);
    }

    #[test]
    fn stc_degeneracy() {
        let (ds, p, ctx) = setup();
        let model = ConditionedModel::new(&ds, &p, &EnvConditions::stc(&ctx), &ctx).unwrap();
        assert_eq!(model.voc_gt, ds.voc_stc);
        assert_eq!(model.isc_gt, ds.isc_stc);
        assert_eq!(model.i0_gt, p.i0_stc);
        assert_eq!(model.m_t, ctx.m(&ds));
    }
}
