//! Manufacturer datasheet values and the physical constants used with them.

use crate::error::InvariantViolation;

/// The seven values a manufacturer quotes for a panel.
///
/// The first four are specified at standard test conditions (1000 W/m²,
/// 25 °C); the last three are panel constants.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelDatasheet {
    /// Open-circuit voltage at STC, V.
    pub voc_stc: f64,
    /// Short-circuit current at STC, A.
    pub isc_stc: f64,
    /// Maximum power point voltage at STC, V.
    pub vmp_stc: f64,
    /// Maximum power point current at STC, A.
    pub imp_stc: f64,
    /// Number of series cells in the panel.
    pub cell_count: u32,
    /// Fractional temperature coefficient of short-circuit current, 1/°C.
    pub alpha_isc: f64,
    /// Temperature coefficient of open-circuit voltage, V/°C.
    pub beta_voc: f64,
    pub name: Option<String>,
}

impl PanelDatasheet {
    pub fn validate(&self) -> Result<(), InvariantViolation> {
        let numeric = [
            ("voc_stc", self.voc_stc),
            ("isc_stc", self.isc_stc),
            ("vmp_stc", self.vmp_stc),
            ("imp_stc", self.imp_stc),
            ("alpha_isc", self.alpha_isc),
            ("beta_voc", self.beta_voc),
        ];
        if let Some((key, value)) = numeric.iter().find(|(_, v)| !v.is_finite()) {
            return Err(InvariantViolation {
                invariant: "all numeric fields finite",
                detail: format!("{key} = {value}"),
            });
        }
        if !(0.0 < self.vmp_stc && self.vmp_stc < self.voc_stc) {
            return Err(InvariantViolation {
                invariant: "0 < vmp_stc < voc_stc",
                detail: format!("vmp_stc = {}, voc_stc = {}", self.vmp_stc, self.voc_stc),
            });
        }
        if !(0.0 < self.imp_stc && self.imp_stc < self.isc_stc) {
            return Err(InvariantViolation {
                invariant: "0 < imp_stc < isc_stc",
                detail: format!("imp_stc = {}, isc_stc = {}", self.imp_stc, self.isc_stc),
            });
        }
        if self.cell_count < 1 {
            return Err(InvariantViolation {
                invariant: "cell_count >= 1",
                detail: format!("cell_count = {}", self.cell_count),
            });
        }
        Ok(())
    }
}

/// Physical constants and temperature conventions shared by every calculation.
///
/// The defaults follow the model's published conventions: k = 1.381e-23 J/K,
/// q = 1.602e-19 C, STC temperature 298 K and a Celsius offset of 273.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StcContext {
    pub boltzmann_k: f64,
    pub electron_charge_q: f64,
    /// Cell temperature at STC, K.
    pub t_stc: f64,
    /// Offset added to °C to get K.
    pub celsius_offset: f64,
}

impl Default for StcContext {
    fn default() -> Self {
        StcContext {
            boltzmann_k: 1.381e-23,
            electron_charge_q: 1.602e-19,
            t_stc: 298.0,
            celsius_offset: 273.0,
        }
    }
}

impl StcContext {
    /// Per-volt exponent scale `q / (N k T)` for a panel of `cell_count` cells at `temp_k`.
    pub fn volt_scale(&self, cell_count: u32, temp_k: f64) -> f64 {
        self.electron_charge_q / (f64::from(cell_count) * self.boltzmann_k * temp_k)
    }

    /// The STC scale `m = q / (N k T_stc)`.
    pub fn m(&self, ds: &PanelDatasheet) -> f64 {
        self.volt_scale(ds.cell_count, self.t_stc)
    }

    pub fn celsius_to_kelvin(&self, celsius: f64) -> f64 {
        celsius + self.celsius_offset
    }

    pub(crate) fn validate(&self) -> Result<(), crate::SimError> {
        let ok = [self.boltzmann_k, self.electron_charge_q, self.t_stc]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok && self.celsius_offset.is_finite() {
            Ok(())
        } else {
            Err(crate::SimError::InvalidArgument(format!(
                "constants must be finite and positive: {self:?}"
            )))
        }
    }
}
