//! Built-in model registry.
//!
//! Names may carry arguments: `e1(3; 0.1, 0.2, 0.05)`, `rocket(5000, 9.81;
//! 1e-2, 1e-3, 1e-4)`, `standard-qcontact(2, 3)`. Without arguments the
//! documented defaults apply.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::calculus::ScalarField;
use crate::expr::{parse_expression, ExprAst};
use crate::geometry::{CovectorField, HamiltonianField, QContactStructure, VectorField, VectorFieldSpec};
use crate::lagrangian::LagrangianSystem;
use crate::point::Dims;
use crate::{Error, Params, Result};

/// Names accepted by [`builtin`], with their argument syntax.
pub const BUILTIN_NAMES: &[&str] = &[
    "contact-r3",
    "two-contact-r4",
    "standard-qcontact(n, q)",
    "example-e1(m; gamma...)",
    "e1(m; gamma...)",
    "rocket(m, g; gamma_aero, gamma_struct, gamma_thermal)",
    "free2contact",
];

/// A q-contact structure with a Hamiltonian.
#[derive(Debug, Clone)]
pub struct StructureModel {
    pub structure: QContactStructure,
    pub hamiltonian: ExprAst,
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Structure(StructureModel),
    Lagrangian(LagrangianSystem),
}

/// A runnable model: dynamics plus a default initial state and time span.
#[derive(Debug, Clone)]
pub struct Model {
    pub name: String,
    pub kind: ModelKind,
    pub initial: Vec<f64>,
    pub t_span: (f64, f64),
}

impl Model {
    pub fn new(name: impl Into<String>, kind: ModelKind, initial: Vec<f64>, t_span: (f64, f64)) -> Result<Self> {
        let m = Model {
            name: name.into(),
            kind,
            initial,
            t_span,
        };
        m.dims().check_len(m.initial.len())?;
        Ok(m)
    }

    pub fn dims(&self) -> Dims {
        match &self.kind {
            ModelKind::Structure(s) => s.structure.dims(),
            ModelKind::Lagrangian(l) => l.dims(),
        }
    }

    pub fn lagrangian(&self) -> Option<&LagrangianSystem> {
        match &self.kind {
            ModelKind::Lagrangian(l) => Some(l),
            ModelKind::Structure(_) => None,
        }
    }

    /// The structure the dynamics live on; induced for Lagrangian models.
    pub fn structure(&self) -> QContactStructure {
        match &self.kind {
            ModelKind::Structure(s) => s.structure.clone(),
            ModelKind::Lagrangian(l) => l.to_general_structure(),
        }
    }

    /// `H`, or `E_L` for a Lagrangian model.
    pub fn hamiltonian(&self) -> Result<Arc<dyn ScalarField>> {
        Ok(match &self.kind {
            ModelKind::Structure(s) => Arc::new(s.structure.bind(&s.hamiltonian)?),
            ModelKind::Lagrangian(l) => Arc::new(l.energy_field()),
        })
    }

    /// The generating field: the solved `X_H`, or the closed-form `X_{E_L}`.
    pub fn vector_field(&self) -> Result<Arc<dyn VectorField>> {
        Ok(match &self.kind {
            ModelKind::Structure(s) => Arc::new(HamiltonianField::new(s.structure.clone(), self.hamiltonian()?)),
            ModelKind::Lagrangian(l) => Arc::new(l.vector_field()),
        })
    }

    /// Typical magnitude of each coordinate, used to scale random samples.
    pub fn sample_radius(&self) -> Vec<f64> {
        self.initial.iter().map(|x| 2.0 * x.abs().max(1.0)).collect()
    }
}

fn exprs(src: &[&str]) -> Result<Vec<ExprAst>> {
    src.iter().map(|s| parse_expression(s).map_err(Error::from)).collect()
}

fn coordinate_covector(dims: Dims, entries: &[(usize, String)]) -> Result<CovectorField> {
    let mut c = vec!["0".to_string(); dims.dim()];
    for (slot, e) in entries {
        c[*slot] = e.clone();
    }
    let refs: Vec<&str> = c.iter().map(String::as_str).collect();
    Ok(CovectorField::new(exprs(&refs)?))
}

fn unit_field(dims: Dims, slot: usize) -> Result<VectorFieldSpec> {
    let c: Vec<&str> = (0..dims.dim()).map(|k| if k == slot { "1" } else { "0" }).collect();
    Ok(VectorFieldSpec::new(exprs(&c)?))
}

/// `dz - v dq` with `R = d/dz` on R^3, `H = (q^2 + v^2)/2`.
pub fn contact_r3() -> Result<Model> {
    let d = Dims::new(1, 1)?;
    let s = QContactStructure::from_expressions(
        "contact-r3",
        d,
        &[CovectorField::new(exprs(&["-v1", "0", "1"])?)],
        &[unit_field(d, 2)?],
        Params::new(),
    )?;
    let h = parse_expression("(q1^2 + v1^2)/2")?;
    Model::new(
        "contact-r3",
        ModelKind::Structure(StructureModel {
            structure: s,
            hamiltonian: h,
        }),
        vec![0.0, 1.0, 0.0],
        (0.0, PI),
    )
}

/// `dz1 - p dq`, `dz2 + q dp` on R^4 with `H = (q^2 + p^2)/2`.
pub fn two_contact_r4() -> Result<Model> {
    let d = Dims::new(1, 2)?;
    let s = QContactStructure::from_expressions(
        "two-contact-r4",
        d,
        &[
            CovectorField::new(exprs(&["-v1", "0", "1", "0"])?),
            CovectorField::new(exprs(&["0", "q1", "0", "1"])?),
        ],
        &[unit_field(d, 2)?, unit_field(d, 3)?],
        Params::new(),
    )?;
    Model::new(
        "two-contact-r4",
        ModelKind::Structure(StructureModel {
            structure: s,
            hamiltonian: parse_expression("(q1^2 + v1^2)/2")?,
        }),
        vec![1.0, 2.0, 0.0, 0.0],
        (0.0, 10.0),
    )
}

/// `dz_i + sum_j q_j dv_j` with `R_i = d/dz_i`, `H = sum_j (q_j^2 + v_j^2)/2`.
pub fn standard_qcontact(n: usize, qcount: usize) -> Result<Model> {
    let d = Dims::new(n, qcount)?;
    let name = format!("standard-qcontact({n},{qcount})");
    let forms = (0..qcount)
        .map(|i| {
            let mut entries: Vec<(usize, String)> = (0..n).map(|j| (d.v_slot(j), format!("q{}", j + 1))).collect();
            entries.push((d.z_slot(i), "1".into()));
            coordinate_covector(d, &entries)
        })
        .collect::<Result<Vec<_>>>()?;
    let reeb = (0..qcount)
        .map(|i| unit_field(d, d.z_slot(i)))
        .collect::<Result<Vec<_>>>()?;
    let s = QContactStructure::from_expressions(name.clone(), d, &forms, &reeb, Params::new())?;
    let h = (1..=n)
        .map(|j| format!("(q{j}^2 + v{j}^2)/2"))
        .collect::<Vec<_>>()
        .join(" + ");
    let mut initial = vec![0.0; d.dim()];
    initial[d.q_slot(0)] = 1.0;
    Model::new(
        name,
        ModelKind::Structure(StructureModel {
            structure: s,
            hamiltonian: parse_expression(&h)?,
        }),
        initial,
        (0.0, 10.0),
    )
}

fn gamma_params(gammas: &[f64]) -> Params {
    gammas
        .iter()
        .enumerate()
        .map(|(i, g)| (format!("gamma{}", i + 1), *g))
        .collect()
}

fn damping_terms(qcount: usize) -> String {
    (1..=qcount).map(|i| format!(" - gamma{i}*z{i}")).collect()
}

/// `L = v^2/2 - q^2/2 - sum_i gamma_i z_i` with `m` action variables.
pub fn e1(gammas: &[f64]) -> Result<LagrangianSystem> {
    let m = gammas.len();
    let d = Dims::new(1, m)?;
    let src = format!("v1^2/2 - q1^2/2{}", damping_terms(m));
    LagrangianSystem::parse(format!("e1({m})"), d, &src, gamma_params(gammas))
}

/// `L = m v^2/2 - m g q - sum_i gamma_i z_i` with three action variables.
pub fn rocket(mass: f64, g: f64, gammas: [f64; 3]) -> Result<LagrangianSystem> {
    let d = Dims::new(1, 3)?;
    let mut params = gamma_params(&gammas);
    params.insert("m".into(), mass);
    params.insert("g".into(), g);
    let src = format!("m*v1^2/2 - m*g*q1{}", damping_terms(3));
    LagrangianSystem::parse("rocket", d, &src, params)
}

/// `L = v^2/2 - z1 - z2`.
pub fn free2contact() -> Result<LagrangianSystem> {
    LagrangianSystem::parse("free2contact", Dims::new(1, 2)?, "v1^2/2 - z1 - z2", Params::new())
}

pub const E1_GAMMAS: [f64; 2] = [0.1, 0.2];
pub const ROCKET_MASS: f64 = 5000.0;
pub const ROCKET_GRAVITY: f64 = 9.81;
pub const ROCKET_GAMMAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Splits `name(a, b; c, d)` into the name and the argument groups.
fn split_args(spec: &str) -> Result<(String, Vec<Vec<f64>>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec.to_string(), Vec::new()));
    };
    let bad = || Error::UnknownModel(spec.to_string());
    let inner = spec[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let groups = inner
        .split(';')
        .map(|g| {
            let g = g.trim();
            if g.is_empty() {
                return Ok(Vec::new());
            }
            g.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((spec[..open].trim().to_string(), groups))
}

fn as_count(x: f64, spec: &str) -> Result<usize> {
    if x >= 1.0 && x.fract() == 0.0 && x < 1e6 {
        Ok(x as usize)
    } else {
        Err(Error::UnknownModel(format!(
            "{spec}: expected a positive integer, got {x}"
        )))
    }
}

/// `m; gammas` for the E1 family. A bare `m` uses `gamma_i = 0.1 i`.
fn e1_gammas(groups: &[Vec<f64>], spec: &str) -> Result<Vec<f64>> {
    match groups {
        [] => Ok(E1_GAMMAS.to_vec()),
        [m] | [m, _] if m.len() == 1 => {
            let count = as_count(m[0], spec)?;
            let gammas = match groups.get(1) {
                Some(g) => g.clone(),
                None => (1..=count).map(|i| 0.1 * i as f64).collect(),
            };
            if gammas.len() != count {
                return Err(Error::UnknownModel(format!(
                    "{spec}: {count} action variables need {count} damping coefficients, got {}",
                    gammas.len()
                )));
            }
            Ok(gammas)
        }
        _ => Err(Error::UnknownModel(spec.to_string())),
    }
}

fn lagrangian_model(l: LagrangianSystem, initial: Vec<f64>, t_span: (f64, f64)) -> Result<Model> {
    Model::new(l.name().to_string(), ModelKind::Lagrangian(l), initial, t_span)
}

fn e1_initial(m: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 + m];
    x[0] = 1.0;
    x[1] = 1.0;
    x
}

/// Looks up a built-in model by name.
pub fn builtin(spec: &str) -> Result<Model> {
    let (name, groups) = split_args(spec)?;
    let no_args = |m: Result<Model>| {
        if groups.is_empty() {
            m
        } else {
            Err(Error::UnknownModel(format!("{spec}: takes no arguments")))
        }
    };
    match name.as_str() {
        "contact-r3" => no_args(contact_r3()),
        "two-contact-r4" => no_args(two_contact_r4()),
        "free2contact" => no_args(lagrangian_model(free2contact()?, vec![0.0, 1.0, 0.0, 0.0], (0.0, 10.0))),
        "standard-qcontact" => match groups.as_slice() {
            [] => standard_qcontact(1, 2),
            [a] if a.len() == 2 => standard_qcontact(as_count(a[0], spec)?, as_count(a[1], spec)?),
            _ => Err(Error::UnknownModel(spec.to_string())),
        },
        "e1" => {
            let gammas = e1_gammas(&groups, spec)?;
            lagrangian_model(e1(&gammas)?, e1_initial(gammas.len()), (0.0, 10.0))
        }
        "example-e1" => {
            let gammas = e1_gammas(&groups, spec)?;
            let l = e1(&gammas)?;
            let s = l.to_general_structure();
            Model::new(
                format!("example-e1({})", gammas.len()),
                ModelKind::Structure(StructureModel {
                    structure: s,
                    hamiltonian: energy_expression(&l),
                }),
                e1_initial(gammas.len()),
                (0.0, 10.0),
            )
        }
        "rocket" => {
            let (mass, g, gammas) = match groups.as_slice() {
                [] => (ROCKET_MASS, ROCKET_GRAVITY, ROCKET_GAMMAS),
                [a] if a.len() == 2 => (a[0], a[1], ROCKET_GAMMAS),
                [a, b] if a.len() == 2 && b.len() == 3 => (a[0], a[1], [b[0], b[1], b[2]]),
                _ => return Err(Error::UnknownModel(spec.to_string())),
            };
            lagrangian_model(
                rocket(mass, g, gammas)?,
                vec![1000.0, 100.0, 0.0, 0.0, 0.0],
                (0.0, 60.0),
            )
        }
        _ => Err(Error::UnknownModel(spec.to_string())),
    }
}

/// `E_L = v^2/2 + q^2/2 + sum gamma_i z_i` for the E1 family, written out so
/// the structure model carries an ordinary expression.
fn energy_expression(l: &LagrangianSystem) -> ExprAst {
    let m = l.dims().qcount;
    let src = format!(
        "v1^2/2 + q1^2/2{}",
        (1..=m).map(|i| format!(" + gamma{i}*z{i}")).collect::<String>()
    );
    parse_expression(&src).expect("energy expression is well formed")
}

/// Every Lagrangian model in the registry at its default arguments.
pub fn builtin_lagrangians() -> Result<Vec<Model>> {
    ["e1", "rocket", "free2contact"].iter().map(|n| builtin(n)).collect()
}

/// Every structure model in the registry at its default arguments.
pub fn builtin_structures() -> Result<Vec<Model>> {
    ["contact-r3", "two-contact-r4", "standard-qcontact", "example-e1"]
        .iter()
        .map(|n| builtin(n))
        .collect()
}
