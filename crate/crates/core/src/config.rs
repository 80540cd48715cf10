//! JSON model configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::expr::{parse_expression, BoundExpr, ExprAst};
use crate::geometry::{CovectorField, QContactStructure, VectorFieldSpec};
use crate::lagrangian::LagrangianSystem;
use crate::models::{builtin, Model, ModelKind, StructureModel};
use crate::point::Dims;
use crate::{Error, Params, Result};

const DEFAULT_SPAN: [f64; 2] = [0.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConfigKind {
    Lagrangian,
    HamiltonianStructure,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expressions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    /// One row of `2n + q` components per form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coframe: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reeb: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ConfigKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qcount: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expressions: Option<Expressions>,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_span: Option<[f64; 2]>,
    /// Absolute tolerance for the structural checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

/// A parsed configuration together with the text it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ModelConfig,
    pub origin: String,
    pub text: String,
}

impl LoadedConfig {
    pub fn digest(&self) -> String {
        crate::report::digest(&self.text)
    }

    pub fn build(&self) -> Result<Model> {
        self.config.build(&self.origin)
    }
}

fn config_error(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        location: location.into(),
        message: message.into(),
    }
}

impl ModelConfig {
    /// A configuration naming a built-in model.
    pub fn builtin(name: &str) -> Self {
        ModelConfig {
            builtin: Some(name.to_string()),
            ..Default::default()
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| config_error(format!("{origin}:{}:{}", e.line(), e.column()), e.to_string()))
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(origin.clone(), format!("cannot read config file: {e}")))?;
        let config = ModelConfig::from_json(&text, &origin)?;
        Ok(LoadedConfig { config, origin, text })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Validates the configuration and constructs the model. `origin` names
    /// the source in error messages.
    pub fn build(&self, origin: &str) -> Result<Model> {
        let at = |field: &str| format!("{origin}: {field}");
        let mut model = match (&self.builtin, &self.expressions) {
            (Some(_), Some(_)) => {
                return Err(config_error(
                    origin,
                    "'builtin' and 'expressions' are mutually exclusive",
                ))
            }
            (None, None) => return Err(config_error(origin, "one of 'builtin' or 'expressions' is required")),
            (Some(name), None) => {
                for (field, set) in [
                    ("kind", self.kind.is_some()),
                    ("n", self.n.is_some()),
                    ("qcount", self.qcount.is_some()),
                    ("params", !self.params.is_empty()),
                ] {
                    if set {
                        return Err(config_error(at(field), "not allowed together with 'builtin'"));
                    }
                }
                builtin(name).map_err(|e| config_error(at("builtin"), e.to_string()))?
            }
            (None, Some(ex)) => self.build_expressions(ex, origin)?,
        };
        if let Some(initial) = &self.initial {
            model
                .dims()
                .check_len(initial.len())
                .map_err(|e| config_error(at("initial"), e.to_string()))?;
            model.initial = initial.clone();
        }
        if let Some([t0, t1]) = self.t_span {
            if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
                return Err(config_error(at("t-span"), "need finite t0 < t1"));
            }
            model.t_span = (t0, t1);
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(config_error(at("tolerance"), "must be positive"));
            }
            if let ModelKind::Structure(s) = &mut model.kind {
                s.structure = s.structure.clone().with_tolerance(tol);
            }
        }
        Ok(model)
    }

    fn build_expressions(&self, ex: &Expressions, origin: &str) -> Result<Model> {
        let at = |field: &str| format!("{origin}: {field}");
        let kind = self
            .kind
            .ok_or_else(|| config_error(at("kind"), "required with 'expressions'"))?;
        let n = self
            .n
            .ok_or_else(|| config_error(at("n"), "required with 'expressions'"))?;
        let qcount = self
            .qcount
            .ok_or_else(|| config_error(at("qcount"), "required with 'expressions'"))?;
        let dims = Dims::new(n, qcount).map_err(|e| config_error(origin, e.to_string()))?;
        let name = self.name.clone().unwrap_or_else(|| "custom".into());
        let initial = vec![0.0; dims.dim()];
        let span = (DEFAULT_SPAN[0], DEFAULT_SPAN[1]);

        let parse = |field: String, src: &str| -> Result<ExprAst> {
            let ast = parse_expression(src).map_err(|e| config_error(field.clone(), e.to_string()))?;
            BoundExpr::bind(&ast, dims, &self.params).map_err(|e| config_error(field, e.to_string()))?;
            Ok(ast)
        };
        let forbid = |field: &str, set: bool| {
            if set {
                Err(config_error(
                    at(&format!("expressions.{field}")),
                    format!("not used by kind {kind:?}"),
                ))
            } else {
                Ok(())
            }
        };

        match kind {
            ConfigKind::Lagrangian => {
                forbid("hamiltonian", ex.hamiltonian.is_some())?;
                forbid("coframe", ex.coframe.is_some())?;
                forbid("reeb", ex.reeb.is_some())?;
                let src = ex
                    .lagrangian
                    .as_deref()
                    .ok_or_else(|| config_error(at("expressions.lagrangian"), "required for kind lagrangian"))?;
                let ast = parse(at("expressions.lagrangian"), src)?;
                let l = LagrangianSystem::new(name.clone(), dims, &ast, self.params.clone())?;
                Model::new(name, ModelKind::Lagrangian(l), initial, span)
            }
            ConfigKind::HamiltonianStructure => {
                forbid("lagrangian", ex.lagrangian.is_some())?;
                let h_src = ex.hamiltonian.as_deref().ok_or_else(|| {
                    config_error(at("expressions.hamiltonian"), "required for kind hamiltonian-structure")
                })?;
                let h = parse(at("expressions.hamiltonian"), h_src)?;
                let rows = |field: &str, rows: &Option<Vec<Vec<String>>>| -> Result<Vec<Vec<ExprAst>>> {
                    let rows = rows
                        .as_ref()
                        .ok_or_else(|| config_error(at(&format!("expressions.{field}")), "required"))?;
                    if rows.len() != qcount {
                        return Err(config_error(
                            at(&format!("expressions.{field}")),
                            format!("expected {qcount} rows, got {}", rows.len()),
                        ));
                    }
                    rows.iter()
                        .enumerate()
                        .map(|(i, row)| {
                            if row.len() != dims.dim() {
                                return Err(config_error(
                                    at(&format!("expressions.{field}[{i}]")),
                                    format!("expected {} components, got {}", dims.dim(), row.len()),
                                ));
                            }
                            row.iter()
                                .enumerate()
                                .map(|(k, src)| parse(at(&format!("expressions.{field}[{i}][{k}]")), src))
                                .collect()
                        })
                        .collect()
                };
                let forms: Vec<CovectorField> = rows("coframe", &ex.coframe)?
                    .into_iter()
                    .map(CovectorField::new)
                    .collect();
                let reeb: Vec<VectorFieldSpec> =
                    rows("reeb", &ex.reeb)?.into_iter().map(VectorFieldSpec::new).collect();
                let s = QContactStructure::from_expressions(name.clone(), dims, &forms, &reeb, self.params.clone())?;
                Model::new(
                    name,
                    ModelKind::Structure(StructureModel {
                        structure: s,
                        hamiltonian: h,
                    }),
                    initial,
                    span,
                )
            }
        }
    }
}
