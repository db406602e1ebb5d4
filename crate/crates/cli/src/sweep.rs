//! Reruns one experiment over a list of values of a single parameter.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::run::{rows_to_csv, run, write_pair, Report};
use crate::spec::{ExperimentSpec, SchemaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parameter {
    #[serde(rename = "m")]
    M,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "P")]
    P,
    #[serde(rename = "n-truncation")]
    NTruncation,
    #[serde(rename = "q")]
    Q,
}

impl Parameter {
    pub fn parse(s: &str) -> Result<Self, SchemaError> {
        Ok(match s {
            "m" => Parameter::M,
            "K" => Parameter::K,
            "P" => Parameter::P,
            "n-truncation" => Parameter::NTruncation,
            "q" => Parameter::Q,
            other => return Err(SchemaError(format!("cannot sweep {other:?}; expected one of m, K, P, n-truncation, q"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Parameter::M => "m",
            Parameter::K => "K",
            Parameter::P => "P",
            Parameter::NTruncation => "n-truncation",
            Parameter::Q => "q",
        }
    }

    fn pointer(self) -> (&'static str, &'static str) {
        match self {
            Parameter::M => ("grid", "m"),
            Parameter::K => ("mc", "steps"),
            Parameter::P => ("mc", "paths"),
            Parameter::NTruncation => ("mc", "truncation"),
            Parameter::Q => ("inputs", "q"),
        }
    }

    fn value(self, text: &str) -> Result<Value, SchemaError> {
        let bad = || SchemaError(format!("bad value {text:?} for {}", self.name()));
        if self == Parameter::Q {
            let q: f64 = text.trim().parse().map_err(|_| bad())?;
            serde_json::Number::from_f64(q).map(Value::Number).ok_or_else(bad)
        } else {
            text.trim().parse::<u64>().map(Value::from).map_err(|_| bad())
        }
    }

    /// `spec` with this parameter set to `text`.
    pub fn apply(self, spec: &Value, text: &str) -> Result<Value, SchemaError> {
        let (section, key) = self.pointer();
        let mut out = spec.clone();
        let obj = out
            .get_mut(section)
            .and_then(Value::as_object_mut)
            .ok_or_else(|| SchemaError(format!("cannot sweep {}: spec has no {section}", self.name())))?;
        obj.insert(key.to_string(), self.value(text)?);
        Ok(out)
    }
}

/// Splits a comma-separated list; an empty list is a schema error.
pub fn parse_values(text: &str) -> Result<Vec<String>, SchemaError> {
    let values: Vec<String> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect();
    if values.is_empty() {
        return Err(SchemaError("sweep needs at least one value".into()));
    }
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub parameter: &'static str,
    pub value: String,
    pub rows: usize,
    /// First row's estimate.
    pub raw: Option<f64>,
    pub raw_se: Option<f64>,
    pub min_margin: Option<f64>,
    /// `max(0, -min_margin)`.
    pub negative_margin: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub parameter: Parameter,
    pub values: Vec<String>,
    pub reports: Vec<Report>,
    pub summary: Vec<SummaryRow>,
    pub holds: bool,
}

impl Sweep {
    /// Validates every variant first, so a bad value aborts before anything runs.
    pub fn run(base: &Value, base_dir: &Path, parameter: Parameter, values: &[String], workers: usize) -> Result<Self, SchemaError> {
        if values.is_empty() {
            return Err(SchemaError("sweep needs at least one value".into()));
        }
        let specs = values
            .iter()
            .map(|v| {
                let mut spec = ExperimentSpec::from_value(parameter.apply(base, v)?, base_dir)?;
                spec.output.stem = format!("{}-{}-{}", spec.output.stem, parameter.name(), v.trim());
                Ok(spec)
            })
            .collect::<Result<Vec<_>, SchemaError>>()?;
        let reports = specs.iter().map(|s| run(s, workers)).collect::<Result<Vec<_>, _>>()?;
        let summary = values
            .iter()
            .zip(&reports)
            .map(|(v, r)| {
                let min_margin = r.rows.iter().filter_map(|row| row.margin).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
                SummaryRow {
                    parameter: parameter.name(),
                    value: v.trim().to_string(),
                    rows: r.rows.len(),
                    raw: r.rows.first().map(|row| row.raw),
                    raw_se: r.rows.first().map(|row| row.raw_se),
                    min_margin,
                    negative_margin: min_margin.map(|m| (-m).max(0.0)),
                    holds: r.holds,
                }
            })
            .collect();
        let holds = reports.iter().all(|r| r.holds);
        Ok(Self { parameter, values: values.iter().map(|v| v.trim().to_string()).collect(), reports, summary, holds })
    }

    /// Writes every report plus `<stem>-sweep-<parameter>.{json,csv}`.
    pub fn write(&self, dir: &Path, stem: &str) -> std::io::Result<()> {
        for r in &self.reports {
            r.write(dir)?;
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            tool: &'static str,
            version: &'static str,
            parameter: Parameter,
            values: &'a [String],
            reports: Vec<&'a str>,
            summary: &'a [SummaryRow],
            holds: bool,
        }
        let s = Summary {
            tool: "levysym",
            version: env!("CARGO_PKG_VERSION"),
            parameter: self.parameter,
            values: &self.values,
            reports: self.reports.iter().map(|r| r.config.output.stem.as_str()).collect(),
            summary: &self.summary,
            holds: self.holds,
        };
        let mut json = serde_json::to_string_pretty(&s).expect("summary serializes");
        json.push('\n');
        write_pair(dir, &format!("{stem}-sweep-{}", self.parameter.name()), &json, &rows_to_csv(&self.summary))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_must_not_be_empty() {
        assert!(parse_values("").is_err());
        assert!(parse_values(" , ").is_err());
        assert_eq!(parse_values("64,128, 256").unwrap(), ["64", "128", "256"]);
    }

    #[test]
    fn parameters_patch_their_section() {
        let spec = serde_json::json!({"grid": {"m": 8}, "mc": {"paths": 2}, "inputs": {}});
        assert_eq!(Parameter::M.apply(&spec, "64").unwrap()["grid"]["m"], 64);
        assert_eq!(Parameter::NTruncation.apply(&spec, "16").unwrap()["mc"]["truncation"], 16);
        assert_eq!(Parameter::Q.apply(&spec, "0.5").unwrap()["inputs"]["q"], 0.5);
        assert!(Parameter::K.apply(&spec, "1.5").is_err());
        assert!(Parameter::M.apply(&serde_json::json!({}), "8").is_err());
        assert!(Parameter::parse("L").is_err());
    }
}
