//! I-V / P-V curve generation and maximum power point tracking.

use crate::datasheet::{PanelDatasheet, StcContext};
use crate::environment::{ConditionedModel, EnvConditions};
use crate::error::SimError;
use crate::estimation::EstimatedParams;

pub const DEFAULT_POINTS: usize = 2000;

/// Voltage tolerance used to locate the V = 0 end of a curve.
pub const ZERO_CROSSING_TOLERANCE_V: f64 = 1e-9;

/// A sampled output curve. Samples run from open circuit (I = 0) towards
/// short circuit, so current increases and voltage decreases with the index.
#[derive(Debug, Clone, PartialEq)]
pub struct IvCurve {
    pub voltage: Vec<f64>,
    pub current: Vec<f64>,
    pub power: Vec<f64>,
    pub env: EnvConditions,
}

impl IvCurve {
    pub fn len(&self) -> usize {
        self.voltage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voltage.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MppPoint {
    pub v_mp: f64,
    pub i_mp: f64,
    pub p_mp: f64,
    /// Index of the highest-power sample.
    pub index: usize,
}

/// Samples the conditioned model on `points` uniform currents in `[0, I_sc(G, T)]`.
///
/// Samples with negative voltage are dropped and the V = 0 point is appended
/// in their place, so the curve ends on the current axis.
pub fn generate_iv_curve(
    ds: &PanelDatasheet,
    params: &EstimatedParams,
    env: &EnvConditions,
    ctx: &StcContext,
    points: usize,
) -> Result<IvCurve, SimError> {
    let model = ConditionedModel::new(ds, params, env, ctx)?;
    curve_from_model(&model, env, points)
}

pub fn curve_from_model(
    model: &ConditionedModel,
    env: &EnvConditions,
    points: usize,
) -> Result<IvCurve, SimError> {
    if points < 2 {
        return Err(SimError::InvalidArgument(format!(
            "at least 2 points are required, got {points}"
        )));
    }
    let last = (points - 1) as f64;
    let mut voltage = Vec::with_capacity(points);
    let mut current = Vec::with_capacity(points);
    let mut clipped = false;
    for j in 0..points {
        let i = if j == points - 1 {
            model.isc_gt
        } else {
            model.isc_gt * (j as f64) / last
        };
        let v = model.voltage_at_current(i)?;
        if v < 0.0 {
            clipped = true;
            break;
        }
        voltage.push(v);
        current.push(i);
    }
    if clipped {
        let i_zero = model.current_at_voltage(0.0, ZERO_CROSSING_TOLERANCE_V)?;
        let i_zero = i_zero.max(*current.last().unwrap_or(&0.0));
        if current.last() != Some(&i_zero) {
            voltage.push(0.0);
            current.push(i_zero);
        }
    }
    let power = voltage.iter().zip(&current).map(|(v, i)| v * i).collect();
    Ok(IvCurve {
        voltage,
        current,
        power,
        env: *env,
    })
}

/// Highest-power sample of `curve`, refined by a parabola in (V, P) through
/// the argmax and its neighbours when the argmax is interior.
pub fn track_mpp(curve: &IvCurve) -> MppPoint {
    let mut index = 0;
    for (j, p) in curve.power.iter().enumerate() {
        if *p > curve.power[index] {
            index = j;
        }
    }
    let sample = MppPoint {
        v_mp: curve.voltage[index],
        i_mp: curve.current[index],
        p_mp: curve.power[index],
        index,
    };
    if index == 0 || index + 1 >= curve.len() {
        return sample;
    }
    match parabolic_vertex(
        (curve.voltage[index - 1], curve.power[index - 1]),
        (curve.voltage[index], curve.power[index]),
        (curve.voltage[index + 1], curve.power[index + 1]),
    ) {
        // The true curve between the neighbours stays inside their V and I
        // ranges; a vertex outside them is an artefact of coarse sampling.
        Some((v, p)) if p >= sample.p_mp && v > 0.0 && within_neighbours(curve, index, p / v) => {
            MppPoint {
                v_mp: v,
                i_mp: p / v,
                p_mp: p,
                index,
            }
        }
        _ => sample,
    }
}

fn within_neighbours(curve: &IvCurve, index: usize, i: f64) -> bool {
    let (a, b) = (curve.current[index - 1], curve.current[index + 1]);
    a.min(b) <= i && i <= a.max(b)
}

/// Vertex of the parabola through three points, if it is a maximum lying
/// between the outer points.
fn parabolic_vertex(left: (f64, f64), mid: (f64, f64), right: (f64, f64)) -> Option<(f64, f64)> {
    let (u0, d0) = (left.0 - mid.0, left.1 - mid.1);
    let (u2, d2) = (right.0 - mid.0, right.1 - mid.1);
    if u0 == 0.0 || u2 == 0.0 || u0 == u2 {
        return None;
    }
    // y - y1 = b u + a u^2
    let a = (d0 / u0 - d2 / u2) / (u0 - u2);
    let b = d0 / u0 - a * u0;
    if !(a < 0.0) {
        return None;
    }
    let u = -b / (2.0 * a);
    if u < u0.min(u2) || u > u0.max(u2) {
        return None;
    }
    Some((mid.0 + u, mid.1 - b * b / (4.0 * a)))
}
