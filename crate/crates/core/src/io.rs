//! Datasheet documents, bundled reference panels and CSV export.
//!
//! A datasheet file is a flat TOML document, one panel per file:
//!
//! ```toml
//! name = "BP SX 150"
//! voc_stc = 43.5
//! isc_stc = 4.75
//! vmp_stc = 34.5
//! imp_stc = 4.35
//! cell_count = 72
//! alpha_isc = 0.00065
//! beta_voc = -0.16
//! ```

use std::fmt::Write as _;

use crate::curve::IvCurve;
use crate::datasheet::PanelDatasheet;
use crate::error::DatasheetError;
use crate::estimation::ResidualSample;

/// Required keys, in document order.
pub const REQUIRED_KEYS: [&str; 7] = [
    "voc_stc",
    "isc_stc",
    "vmp_stc",
    "imp_stc",
    "cell_count",
    "alpha_isc",
    "beta_voc",
];

pub const CURVE_CSV_HEADER: &str = "voltage_V,current_A,power_W";
pub const RESIDUAL_CSV_HEADER: &str = "n,f_n";

/// A scalar value from any flat key-value document.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldValue {
    Integer(i64),
    Float(f64),
    Text(String),
    /// Anything else (booleans, arrays, tables, null, ...), kept as its source text.
    Other(String),
}

impl FieldValue {
    fn describe(&self) -> String {
        match self {
            FieldValue::Integer(v) => v.to_string(),
            FieldValue::Float(v) => v.to_string(),
            FieldValue::Text(s) => format!("{s:?}"),
            FieldValue::Other(s) => s.clone(),
        }
    }
}

/// Builds and validates a datasheet from parsed key-value pairs.
///
/// Shared by the TOML reader and other front ends (e.g. JSON request bodies).
pub fn datasheet_from_fields<I>(fields: I) -> Result<PanelDatasheet, DatasheetError>
where
    I: IntoIterator<Item = (String, FieldValue)>,
{
    let fields: Vec<(String, FieldValue)> = fields.into_iter().collect();

    let unknown: Vec<String> = fields
        .iter()
        .map(|(k, _)| k)
        .filter(|k| k.as_str() != "name" && !REQUIRED_KEYS.contains(&k.as_str()))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        return Err(DatasheetError::UnknownKeys(unknown));
    }

    let lookup = |key: &'static str| -> Result<&FieldValue, DatasheetError> {
        fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
            .ok_or(DatasheetError::MissingKey(key))
    };
    let number = |key: &'static str| -> Result<f64, DatasheetError> {
        match lookup(key)? {
            FieldValue::Float(v) if v.is_finite() => Ok(*v),
            FieldValue::Integer(v) => Ok(*v as f64),
            other => Err(DatasheetError::NotNumeric {
                key: key.to_string(),
                value: other.describe(),
            }),
        }
    };

    // presence first, so a document missing several keys reports the first in order
    for key in REQUIRED_KEYS {
        lookup(key)?;
    }

    let cell_count = match lookup("cell_count")? {
        FieldValue::Integer(v) if *v >= 1 && *v <= i64::from(u32::MAX) => *v as u32,
        FieldValue::Float(v) if v.fract() == 0.0 && *v >= 1.0 && *v <= f64::from(u32::MAX) => {
            *v as u32
        }
        FieldValue::Integer(_) | FieldValue::Float(_) => {
            let value = lookup("cell_count")?.describe();
            return Err(DatasheetError::NotInteger {
                key: "cell_count".into(),
                value,
            });
        }
        other => {
            return Err(DatasheetError::NotNumeric {
                key: "cell_count".into(),
                value: other.describe(),
            })
        }
    };

    let name = match fields.iter().find(|(k, _)| k == "name").map(|(_, v)| v) {
        None => None,
        Some(FieldValue::Text(s)) => Some(s.clone()),
        Some(other) => return Err(DatasheetError::NameNotText(other.describe())),
    };

    let ds = PanelDatasheet {
        voc_stc: number("voc_stc")?,
        isc_stc: number("isc_stc")?,
        vmp_stc: number("vmp_stc")?,
        imp_stc: number("imp_stc")?,
        cell_count,
        alpha_isc: number("alpha_isc")?,
        beta_voc: number("beta_voc")?,
        name,
    };
    ds.validate()?;
    Ok(ds)
}

/// Parses a TOML datasheet document.
pub fn parse_datasheet(text: &str) -> Result<PanelDatasheet, DatasheetError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| DatasheetError::Syntax(e.message().to_string()))?;
    datasheet_from_fields(table.into_iter().map(|(k, v)| {
        let value = match v {
            toml::Value::Integer(i) => FieldValue::Integer(i),
            toml::Value::Float(f) => FieldValue::Float(f),
            toml::Value::String(s) => FieldValue::Text(s),
            other => FieldValue::Other(other.to_string()),
        };
        (k, value)
    }))
}

/// Serializes a datasheet as a TOML document accepted by [`parse_datasheet`].
pub fn datasheet_to_toml(ds: &PanelDatasheet) -> String {
    let mut out = String::new();
    if let Some(name) = &ds.name {
        let _ = writeln!(out, "name = {}", toml::Value::String(name.clone()));
    }
    let floats = [
        ("voc_stc", ds.voc_stc),
        ("isc_stc", ds.isc_stc),
        ("vmp_stc", ds.vmp_stc),
        ("imp_stc", ds.imp_stc),
    ];
    for (key, v) in floats {
        let _ = writeln!(out, "{key} = {}", toml::Value::Float(v));
    }
    let _ = writeln!(out, "cell_count = {}", ds.cell_count);
    let _ = writeln!(out, "alpha_isc = {}", toml::Value::Float(ds.alpha_isc));
    let _ = writeln!(out, "beta_voc = {}", toml::Value::Float(ds.beta_voc));
    out
}

const BUNDLED: [(&str, fn() -> PanelDatasheet); 1] = [("bp_sx_150", bp_sx_150)];

fn bp_sx_150() -> PanelDatasheet {
    PanelDatasheet {
        voc_stc: 43.5,
        isc_stc: 4.75,
        vmp_stc: 34.5,
        imp_stc: 4.35,
        cell_count: 72,
        alpha_isc: 0.00065,
        beta_voc: -0.16,
        name: Some("BP SX 150".to_string()),
    }
}

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(name, _)| *name).collect()
}

pub fn bundled_panel(name: &str) -> Result<PanelDatasheet, DatasheetError> {
    BUNDLED
        .iter()
        .find(|(id, _)| *id == name)
        .map(|(_, make)| make())
        .ok_or_else(|| DatasheetError::UnknownPanel {
            name: name.to_string(),
            available: bundled_names(),
        })
}

/// `voltage_V,current_A,power_W` CSV, one row per sample, shortest
/// round-trip decimal for every value.
pub fn export_curve_csv(curve: &IvCurve) -> String {
    let mut out = String::with_capacity(32 * (curve.len() + 1));
    out.push_str(CURVE_CSV_HEADER);
    out.push('\n');
    for ((v, i), p) in curve.voltage.iter().zip(&curve.current).zip(&curve.power) {
        let _ = writeln!(out, "{v},{i},{p}");
    }
    out
}

/// `n,f_n` CSV of an f(n) scan; unevaluable points are written as `NaN`.
pub fn export_residual_csv(samples: &[ResidualSample]) -> String {
    let mut out = String::from(RESIDUAL_CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(out, "{},{}", s.n, s.value.unwrap_or(f64::NAN));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BP_SX_150_TOML: &str = "\
name = \"BP SX 150\"
voc_stc = 43.5
isc_stc = 4.75
vmp_stc = 34.5
imp_stc = 4.35
cell_count = 72
alpha_isc = 0.00065
beta_voc = -0.16
";

    #[test]
    fn parses_bundled_values() {
        let ds = parse_datasheet(BP_SX_150_TOML).unwrap();
        assert_eq!(ds, bundled_panel("bp_sx_150").unwrap());
    }

    #[test]
    fn integer_values_are_numbers() {
        let text = BP_SX_150_TOML.replace("voc_stc = 43.5", "voc_stc = 43");
        assert_eq!(parse_datasheet(&text).unwrap().voc_stc, 43.0);
    }

    #[test]
    fn missing_key_is_named() {
        let text = BP_SX_150_TOML.replace("imp_stc = 4.35\n", "");
        let err = parse_datasheet(&text).unwrap_err();
        assert_eq!(err, DatasheetError::MissingKey("imp_stc"));
        assert!(err.to_string().contains("imp_stc"));
    }

    #[test]
    fn non_numeric_value_is_named() {
        let text = BP_SX_150_TOML.replace("isc_stc = 4.75", "isc_stc = \"lots\"");
        let err = parse_datasheet(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("isc_stc") && msg.contains("lots"), "{msg}");
    }

    #[test]
    fn fractional_cell_count_rejected() {
        let text = BP_SX_150_TOML.replace("cell_count = 72", "cell_count = 72.5");
        let err = parse_datasheet(&text).unwrap_err();
        assert!(matches!(err, DatasheetError::NotInteger { .. }));
        let text = BP_SX_150_TOML.replace("cell_count = 72", "cell_count = 0");
        assert!(parse_datasheet(&text).unwrap_err().to_string().contains("cell_count"));
    }

    #[test]
    fn unknown_keys_listed() {
        let text = format!("{BP_SX_150_TOML}rsh_ohm = 100\nfoo = 1\n");
        let err = parse_datasheet(&text).unwrap_err();
        assert_eq!(
            err,
            DatasheetError::UnknownKeys(vec!["foo".into(), "rsh_ohm".into()])
        );
    }

    #[test]
    fn ordering_invariant_violation() {
        let text = BP_SX_150_TOML.replace("vmp_stc = 34.5", "vmp_stc = 50");
        let err = parse_datasheet(&text).unwrap_err();
        assert_eq!(err.class(), "invariant-violation");
        assert!(err.to_string().contains("0 < vmp_stc < voc_stc"));
    }

    #[test]
    fn syntax_error() {
        assert!(matches!(
            parse_datasheet("voc_stc = = 3").unwrap_err(),
            DatasheetError::Syntax(_)
        ));
    }

    #[test]
    fn bundled_lookup() {
        let err = bundled_panel("no_such_panel").unwrap_err();
        assert!(err.to_string().contains("bp_sx_150"));
        let ds = bundled_panel("bp_sx_150").unwrap();
        assert_eq!(parse_datasheet(&datasheet_to_toml(&ds)).unwrap(), ds);
    }

    #[test]
    fn residual_csv_flags_unevaluable_points() {
        let samples = [
            ResidualSample { n: 0.01, value: None },
            ResidualSample { n: 1.5, value: Some(-0.25) },
        ];
        assert_eq!(export_residual_csv(&samples), "n,f_n\n0.01,NaN\n1.5,-0.25\n");
    }
}
