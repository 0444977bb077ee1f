//! Batch-run configuration: JSON config files merged over defaults, dotted
//! key-path overrides, unknown-key rejection, and the deterministic CSV /
//! JSON-summary output format shared by the CLI and the C interface.
//!
//! Output CSV is locale independent: '.' decimal separator, '\n' line
//! endings, floats printed with 17 significant digits.

use serde_json::Value;

use crate::experiments::{
    esr_spectrum, magnon_ramsey, novel_spectrum, tomography, EsrConfig, NovelConfig,
    RamseyConfig, SpectrumResult, TomographyConfig, TOMOGRAPHY_STATES,
};
use crate::{Result, SimError};

/// The batch experiments the front end can dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Novel,
    Esr,
    Ramsey,
    Tomography,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Novel => "novel",
            ExperimentKind::Esr => "esr",
            ExperimentKind::Ramsey => "ramsey",
            ExperimentKind::Tomography => "tomography",
        }
    }
}

/// Float formatting contract: 17 significant digits, '.' separator.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Deep-merge `overlay` onto `base`: objects merge key-wise, everything else
/// replaces.
pub fn merge_values(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge_values(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Apply one `path.to.key=json_value` override.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| {
        SimError::Config(format!("override '{spec}' must have the form key.path=value"))
    })?;
    let value: Value =
        serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(index) = seg.parse::<usize>() {
            let arr = cursor.as_array_mut().ok_or_else(|| {
                SimError::Config(format!("'{}' is not an array", segments[..i].join(".")))
            })?;
            if index >= arr.len() {
                return Err(SimError::Config(format!(
                    "index {index} out of range at '{}'",
                    segments[..=i].join(".")
                )));
            }
            if last {
                arr[index] = value;
                return Ok(());
            }
            cursor = &mut arr[index];
        } else {
            let obj = cursor.as_object_mut().ok_or_else(|| {
                SimError::Config(format!("'{}' is not an object", segments[..i].join(".")))
            })?;
            if last {
                obj.insert(seg.to_string(), value);
                return Ok(());
            }
            cursor = obj
                .entry(seg.to_string())
                .or_insert_with(|| Value::Object(serde_json::Map::new()));
        }
    }
    Ok(())
}

/// Reject any key path present in `user` but absent from `canonical` (the
/// re-serialized resolved config). Reports the offending key path.
pub fn check_unknown_keys(user: &Value, canonical: &Value, path: &str) -> Result<()> {
    match (user, canonical) {
        (Value::Object(u), Value::Object(c)) => {
            for (k, v) in u {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match c.get(k) {
                    Some(cv) => check_unknown_keys(v, cv, &sub)?,
                    None => {
                        return Err(SimError::Config(format!("unknown config key '{sub}'")));
                    }
                }
            }
            Ok(())
        }
        (Value::Array(u), Value::Array(c)) => {
            for (i, v) in u.iter().enumerate() {
                if let Some(cv) = c.get(i) {
                    check_unknown_keys(v, cv, &format!("{path}.{i}"))?;
                }
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// Resolve a typed config: defaults <- optional file JSON <- overrides,
/// then verify the user supplied no unknown keys.
pub fn resolve_config<T: serde::Serialize + serde::de::DeserializeOwned>(
    default: &T,
    file_json: Option<&str>,
    overrides: &[String],
) -> Result<T> {
    let mut tree = serde_json::to_value(default)
        .map_err(|e| SimError::Config(format!("default serialization: {e}")))?;
    let mut user = Value::Object(serde_json::Map::new());
    if let Some(text) = file_json {
        let parsed: Value = serde_json::from_str(text)
            .map_err(|e| SimError::Config(format!("config file is not valid JSON: {e}")))?;
        merge_values(&mut user, parsed);
    }
    for spec in overrides {
        apply_override(&mut user, spec)?;
    }
    merge_values(&mut tree, user.clone());
    let resolved: T = serde_json::from_value(tree)
        .map_err(|e| SimError::Config(format!("config does not match schema: {e}")))?;
    let canonical = serde_json::to_value(&resolved)
        .map_err(|e| SimError::Config(format!("config reserialization: {e}")))?;
    check_unknown_keys(&user, &canonical, "")?;
    Ok(resolved)
}

fn spectrum_csv(header: &str, result: &SpectrumResult) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for p in &result.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_float(p.sweep_mhz),
            format_float(p.t_ns),
            format_float(p.p_down_mean),
            format_float(p.p_down_stderr),
            p.n_samples
        ));
    }
    out
}

fn base_summary(kind: ExperimentKind, config: &Value, seed: u64) -> serde_json::Map<String, Value> {
    let mut map = serde_json::Map::new();
    map.insert("experiment".into(), Value::String(kind.name().into()));
    map.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    map.insert("seed".into(), serde_json::json!(seed));
    map.insert("config".into(), config.clone());
    map
}

/// Run one experiment from a JSON config tree (defaults pre-merged);
/// returns the CSV table and the JSON summary.
pub fn run_experiment(
    kind: ExperimentKind,
    file_json: Option<&str>,
    overrides: &[String],
) -> Result<(String, Value)> {
    match kind {
        ExperimentKind::Novel => {
            let cfg: NovelConfig =
                resolve_config(&NovelConfig::default(), file_json, overrides)?;
            let config_echo = serde_json::to_value(&cfg).unwrap();
            let result = novel_spectrum(&cfg)?;
            let csv = spectrum_csv(
                "omega_y_mhz,t_ns,p_down_mean,p_down_stderr,n_samples",
                &result,
            );
            let mut summary = base_summary(kind, &config_echo, cfg.seed);
            summary.insert("clipped_windows".into(), serde_json::json!(result.clipped_windows));
            summary.insert("grid_points".into(), serde_json::json!(result.points.len()));
            Ok((csv, Value::Object(summary)))
        }
        ExperimentKind::Esr => {
            let cfg: EsrConfig = resolve_config(&EsrConfig::default(), file_json, overrides)?;
            let config_echo = serde_json::to_value(&cfg).unwrap();
            let result = esr_spectrum(&cfg)?;
            let csv =
                spectrum_csv("delta_mhz,t_ns,p_down_mean,p_down_stderr,n_samples", &result);
            let mut summary = base_summary(kind, &config_echo, cfg.seed);
            summary.insert("clipped_windows".into(), serde_json::json!(result.clipped_windows));
            summary.insert("grid_points".into(), serde_json::json!(result.points.len()));
            Ok((csv, Value::Object(summary)))
        }
        ExperimentKind::Ramsey => {
            let cfg: RamseyConfig =
                resolve_config(&RamseyConfig::default(), file_json, overrides)?;
            let config_echo = serde_json::to_value(&cfg).unwrap();
            let result = magnon_ramsey(&cfg)?;
            let mut csv = String::from("t_store_ns,c_x_mean,c_x_stderr,n_samples\n");
            for p in &result.points {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    format_float(p.t_store_ns),
                    format_float(p.c_x_mean),
                    format_float(p.c_x_stderr),
                    p.n_samples
                ));
            }
            let mut summary = base_summary(kind, &config_echo, cfg.seed);
            summary.insert("warnings".into(), serde_json::json!(result.warnings));
            Ok((csv, Value::Object(summary)))
        }
        ExperimentKind::Tomography => {
            let cfg: TomographyConfig = resolve_config(
                &crate::experiments::scenario_config(
                    crate::experiments::TomographyScenario::Realistic,
                    1,
                )?,
                file_json,
                overrides,
            )?;
            let config_echo = serde_json::to_value(&cfg).unwrap();
            let result = tomography(&cfg)?;
            let mut csv =
                String::from("input_state,readout_state,count_mean,count_stderr,probability\n");
            for a in 0..6 {
                for b in 0..6 {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        TOMOGRAPHY_STATES[a],
                        TOMOGRAPHY_STATES[b],
                        format_float(result.counts[a][b]),
                        format_float(result.counts_stderr[a][b]),
                        format_float(result.probabilities[a][b]),
                    ));
                }
            }
            let mut summary = base_summary(kind, &config_echo, cfg.seed);
            summary.insert(
                "contrasts".into(),
                serde_json::json!({
                    "c_x": result.summary.c[0],
                    "c_y": result.summary.c[1],
                    "c_z": result.summary.c[2],
                    "c_x_err": result.summary.c_err[0],
                    "c_y_err": result.summary.c_err[1],
                    "c_z_err": result.summary.c_err[2],
                }),
            );
            summary.insert("fidelity".into(), serde_json::json!(result.summary.fidelity));
            summary.insert(
                "fidelity_err".into(),
                serde_json::json!(result.summary.fidelity_err),
            );
            summary.insert(
                "fidelity_sample_stderr".into(),
                serde_json::json!(result.fidelity_sample_stderr),
            );
            summary.insert(
                "swap".into(),
                serde_json::json!({
                    "rabi_mhz": result.swap.rabi_mhz,
                    "duration_ns": result.swap.duration_ns,
                }),
            );
            summary.insert("t_store_ns".into(), serde_json::json!(result.t_store_ns));
            summary.insert("n_samples".into(), serde_json::json!(result.n_samples));
            summary.insert(
                "clipped_windows".into(),
                serde_json::json!(result.clipped_windows),
            );
            summary.insert("warnings".into(), serde_json::json!(result.warnings));
            Ok((csv, Value::Object(summary)))
        }
    }
}
