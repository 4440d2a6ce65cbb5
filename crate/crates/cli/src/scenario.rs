//! Scenario files: JSON description of a flow, a system and what to check.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geodyn_core::dynamics::SystemKind;
use geodyn_core::flows;
use geodyn_core::geometry::{FlowGeometry, MetricField, Signature, VectorField};
use geodyn_core::ode::Integrator;
use geodyn_core::vfexpr::Bindings;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub flow: FlowDef,
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub v0: Option<Vec<f64>>,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub integrator: Option<Integrator>,
    #[serde(default, rename = "H0")]
    pub h0: Option<f64>,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub equilibria: Option<SeedBox>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowDef {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub inline: Option<InlineFlow>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineFlow {
    pub dim: usize,
    /// Row-major entries; Euclidean when absent.
    #[serde(default)]
    pub metric: Option<Vec<String>>,
    pub field: Vec<String>,
    /// `[positive, negative]`; Riemannian when absent.
    #[serde(default)]
    pub signature: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub trajectory: Option<PathBuf>,
    #[serde(default)]
    pub report: Option<PathBuf>,
}

/// Seed grid for the equilibrium search.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedBox {
    pub lo: f64,
    pub hi: f64,
    pub per_axis: usize,
}

impl Default for SeedBox {
    fn default() -> Self {
        SeedBox {
            lo: -30.0,
            hi: 30.0,
            per_axis: 7,
        }
    }
}

pub const DEFAULT_INTEGRATOR: Integrator = Integrator::Dopri45 {
    rtol: 1e-10,
    atol: 1e-12,
    max_step: None,
};

/// Checks a scenario may request.
pub const CHECK_NAMES: [&str; 6] = [
    "conservation",
    "pregeodesic",
    "horizontal",
    "euler_lagrange",
    "grad_f",
    "three_energy_regimes",
];

/// The flow a scenario resolves to.
pub struct ResolvedFlow {
    pub name: String,
    pub geometry: FlowGeometry,
}

/// A validated run description.
pub struct Run {
    pub path: PathBuf,
    pub scenario: Scenario,
    pub flow: ResolvedFlow,
    pub system: SystemKind,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub t1: f64,
    pub integrator: Integrator,
    pub warnings: Vec<String>,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::validation(path, "scenario", e.to_string()))
}

pub fn resolve_flow(path: &Path, def: &FlowDef) -> Result<ResolvedFlow, CliError> {
    let params: Bindings = def.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    match (&def.name, &def.inline) {
        (Some(name), None) => {
            let spec = flows::builtin(name, &params)
                .map_err(|e| CliError::validation(path, "flow", e.to_string()))?;
            Ok(ResolvedFlow {
                name: name.clone(),
                geometry: spec.geometry,
            })
        }
        (None, Some(inline)) => {
            let n = inline.dim;
            if n == 0 {
                return Err(CliError::validation(path, "flow.inline.dim", "must be positive"));
            }
            if inline.field.len() != n {
                return Err(CliError::validation(
                    path,
                    "flow.inline.field",
                    format!("expected {n} components, found {}", inline.field.len()),
                ));
            }
            let names: Vec<&str> = def.params.keys().map(String::as_str).collect();
            let comps: Vec<&str> = inline.field.iter().map(String::as_str).collect();
            let field = VectorField::parse(&comps, &names)
                .map_err(|e| CliError::validation(path, "flow.inline.field", e.to_string()))?;
            let signature = match inline.signature {
                Some([positive, negative]) => Signature { positive, negative },
                None => Signature::riemannian(n),
            };
            if signature.positive + signature.negative != n {
                return Err(CliError::validation(
                    path,
                    "flow.inline.signature",
                    format!("entries must add up to dim = {n}"),
                ));
            }
            let metric = match &inline.metric {
                None if signature.is_riemannian() => MetricField::euclidean(n),
                None => {
                    return Err(CliError::validation(
                        path,
                        "flow.inline.metric",
                        "required for a non-Riemannian signature",
                    ))
                }
                Some(entries) => {
                    if entries.len() != n * n {
                        return Err(CliError::validation(
                            path,
                            "flow.inline.metric",
                            format!("expected {} entries, found {}", n * n, entries.len()),
                        ));
                    }
                    let refs: Vec<&str> = entries.iter().map(String::as_str).collect();
                    MetricField::parse(n, &refs, &names, signature)
                        .map_err(|e| CliError::validation(path, "flow.inline.metric", e.to_string()))?
                }
            };
            let geometry = FlowGeometry::new(metric, field, params)
                .map_err(|e| CliError::validation(path, "flow.inline", e.to_string()))?;
            Ok(ResolvedFlow {
                name: "inline".into(),
                geometry,
            })
        }
        _ => Err(CliError::validation(
            path,
            "flow",
            "give exactly one of `name` and `inline`",
        )),
    }
}

/// Validate everything needed to integrate a scenario.
pub fn prepare(path: &Path, scenario: Scenario) -> Result<Run, CliError> {
    let flow = resolve_flow(path, &scenario.flow)?;
    let n = flow.geometry.dim();
    let mut warnings = Vec::new();
    let system_name = scenario
        .system
        .as_deref()
        .ok_or_else(|| CliError::validation(path, "system", "missing"))?;
    let system: SystemKind = system_name
        .parse()
        .map_err(|e: geodyn_core::Error| CliError::validation(path, "system", e.to_string()))?;
    let x0 = scenario
        .x0
        .clone()
        .ok_or_else(|| CliError::validation(path, "x0", "missing"))?;
    if x0.len() != n {
        return Err(CliError::validation(
            path,
            "x0",
            format!("expected {n} components, found {}", x0.len()),
        ));
    }
    let v0 = if system.is_second_order() {
        let v0 = scenario
            .v0
            .clone()
            .ok_or_else(|| CliError::validation(path, "v0", format!("required for system {system}")))?;
        if v0.len() != n {
            return Err(CliError::validation(
                path,
                "v0",
                format!("expected {n} components, found {}", v0.len()),
            ));
        }
        v0
    } else {
        if scenario.v0.is_some() {
            warnings.push("v0 is ignored for the kinematic system".to_string());
        }
        Vec::new()
    };
    let t1 = scenario
        .t1
        .ok_or_else(|| CliError::validation(path, "t1", "missing"))?;
    if !(t1.is_finite() && scenario.t0.is_finite() && t1 > scenario.t0) {
        return Err(CliError::validation(path, "t1", "must be finite and greater than t0"));
    }
    let integrator = scenario.integrator.unwrap_or(DEFAULT_INTEGRATOR);
    integrator
        .validate()
        .map_err(|e| CliError::validation(path, "integrator", e.to_string()))?;
    if let Some(h0) = scenario.h0 {
        if !h0.is_finite() {
            return Err(CliError::validation(path, "H0", "must be finite"));
        }
    }
    for (i, c) in scenario.checks.iter().enumerate() {
        let field = format!("checks[{i}]");
        if !CHECK_NAMES.contains(&c.as_str()) {
            return Err(CliError::validation(
                path,
                &field,
                format!("unknown check `{c}`, expected one of {}", CHECK_NAMES.join(", ")),
            ));
        }
        let needs_second_order = matches!(c.as_str(), "pregeodesic" | "horizontal" | "euler_lagrange");
        if needs_second_order && !system.is_second_order() {
            return Err(CliError::validation(path, &field, format!("`{c}` needs a second-order system")));
        }
        if c == "euler_lagrange" && !matches!(system, SystemKind::Gd | SystemKind::Sys3 | SystemKind::Potential) {
            return Err(CliError::validation(
                path,
                &field,
                format!("system {system} has no Lagrangian"),
            ));
        }
        if c == "three_energy_regimes" && n != 2 {
            return Err(CliError::validation(path, &field, "defined for planar flows only"));
        }
    }
    Ok(Run {
        path: path.to_path_buf(),
        scenario,
        flow,
        system,
        x0,
        v0,
        t1,
        integrator,
        warnings,
    })
}
