//! Flat TOML manifests: `[model]`, `[params]`, `[frame]`, `[metric]`,
//! `[potential]`, `[bindings]`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use symlab_core::catalog::{Angle, BianchiModel, BianchiType, CatalogError, ModelParams};
use symlab_core::dynamics::Bindings;
use symlab_core::emfield::Potential;
use symlab_core::expr::{parse, Expr, Rational};
use symlab_core::geometry::{
    abstract_spatial_metric, invariant_coframe, metric_from_coframe, structure_constants_from_frame, GeometryError, Metric, VectorField,
};

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("{location}: {message}")]
    Field { location: String, message: String },
    #[error("frame does not close into a Lie algebra: {0}")]
    NonClosing(GeometryError),
    #[error("frame is degenerate (generic rank below 2)")]
    Degenerate,
    #[error("{0}")]
    Catalog(#[from] CatalogError),
}

fn field_err(location: impl Into<String>, message: impl std::fmt::Display) -> ManifestError {
    ManifestError::Field { location: location.into(), message: message.to_string() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    group: String,
    #[serde(default = "one")]
    e: i8,
}

fn one() -> i8 {
    1
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<String>,
    /// Exact `cos(alpha)` and `sin(alpha)`; both or neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cos: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sin: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    xi1: [String; 3],
    xi2: [String; 3],
    xi3: [String; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    /// `coframe`: built from invariant forms with abstract `a_{αβ}(u0)`;
    /// `components`: the 4×4 matrix `g` as given.
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    g: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    a: [String; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    model: RawModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<RawParams>,
    frame: RawFrame,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<RawMetric>,
    potential: RawPotential,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bindings: Option<BTreeMap<String, toml::Value>>,
}

/// Bindings-only file accepted by `simulate --bindings`.
#[derive(Deserialize)]
struct RawBindingsFile {
    bindings: BTreeMap<String, toml::Value>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub name: String,
    pub model: BianchiModel,
    pub bindings: Option<Bindings>,
}

fn expr_at(location: String, s: &str, params: &ModelParams) -> Result<Expr, ManifestError> {
    let e = parse(s).map_err(|e| field_err(location.clone(), e))?;
    params.specialize(&e).map_err(|e| field_err(location, e))
}

fn rational_at(location: &str, s: &str) -> Result<Rational, ManifestError> {
    s.trim().parse::<Rational>().map_err(|e| field_err(location, format!("not a rational number: {e}")))
}

fn parse_params(raw: &Option<RawParams>) -> Result<ModelParams, ManifestError> {
    let mut p = ModelParams::default();
    let Some(r) = raw else { return Ok(p) };
    if let Some(q) = &r.q {
        p.q = rational_at("[params] q", q)?;
    }
    match (&r.cos, &r.sin) {
        (None, None) => {}
        (Some(c), Some(s)) => p.angle = Angle::Exact { cos: rational_at("[params] cos", c)?, sin: rational_at("[params] sin", s)? },
        _ => return Err(field_err("[params]", "cos and sin must be given together")),
    }
    Ok(p)
}

fn parse_bindings(raw: &BTreeMap<String, toml::Value>) -> Result<Bindings, ManifestError> {
    let mut b = Bindings::standard();
    for (k, v) in raw {
        let loc = format!("[bindings] {k}");
        match (k.as_str(), v) {
            ("angle", toml::Value::Float(x)) => b.angle = *x,
            ("angle", toml::Value::Integer(x)) => b.angle = *x as f64,
            ("e", toml::Value::Integer(x)) if *x == 1 || *x == -1 => b.e = *x as i8,
            ("angle" | "e", _) => return Err(field_err(loc, "expected a number (e must be 1 or -1)")),
            (_, toml::Value::String(s)) => {
                let e = parse(s).map_err(|e| field_err(loc.clone(), e))?;
                if e.funcs().iter().next().is_some() {
                    return Err(field_err(loc, "a binding must be an explicit function of u0"));
                }
                b.funcs.insert(k.clone(), e);
            }
            (_, toml::Value::Float(x)) => {
                let r = Rational::approximate_float(*x).ok_or_else(|| field_err(loc.clone(), "not representable"))?;
                b.funcs.insert(k.clone(), Expr::rational(r));
            }
            (_, toml::Value::Integer(x)) => {
                b.funcs.insert(k.clone(), Expr::int(*x as i128));
            }
            _ => return Err(field_err(loc, "expected an expression string or a number")),
        }
    }
    Ok(b)
}

impl std::str::FromStr for Manifest {
    type Err = ManifestError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let raw: RawManifest = toml::from_str(text)?;
        let tag: BianchiType =
            raw.model.group.parse().map_err(|_| field_err("[model] group", format!("unknown group {:?}", raw.model.group)))?;
        if raw.model.e != 1 && raw.model.e != -1 {
            return Err(field_err("[model] e", "must be 1 or -1"));
        }
        let params = parse_params(&raw.params)?;
        params.validate(tag)?;
        let mut frame: [VectorField; 3] = Default::default();
        for (k, comps) in [&raw.frame.xi1, &raw.frame.xi2, &raw.frame.xi3].into_iter().enumerate() {
            for (i, s) in comps.iter().enumerate() {
                frame[k].c[i + 1] = expr_at(format!("[frame] xi{}[{}]", k + 1, i), s, &params)?;
            }
        }
        match structure_constants_from_frame(&frame) {
            Ok(_) => {}
            Err(GeometryError::Degenerate) => return Err(ManifestError::Degenerate),
            Err(e @ (GeometryError::NonClosure { .. } | GeometryError::NonConstant { .. })) => return Err(ManifestError::NonClosing(e)),
            Err(e) => return Err(field_err("[frame]", e)),
        }
        let mut a: [Expr; 4] = Default::default();
        for (i, s) in raw.potential.a.iter().enumerate() {
            a[i] = expr_at(format!("[potential] a[{i}]"), s, &params)?;
        }
        let potential = Potential::new(a);
        let source = raw.metric.as_ref().map_or("coframe", |m| m.source.as_str());
        let model = match source {
            "coframe" => {
                if raw.metric.as_ref().is_some_and(|m| m.g.is_some()) {
                    return Err(field_err("[metric] g", "components are only read with source = \"components\""));
                }
                BianchiModel::assemble(tag, params, frame, potential, raw.model.e)?
            }
            "components" => {
                let rows = raw.metric.as_ref().and_then(|m| m.g.as_ref()).ok_or_else(|| field_err("[metric] g", "missing field"))?;
                if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                    return Err(field_err("[metric] g", "expected a 4x4 array"));
                }
                let mut g: [[Expr; 4]; 4] = Default::default();
                for i in 0..4 {
                    for j in 0..4 {
                        g[i][j] = expr_at(format!("[metric] g[{i}][{j}]"), &rows[i][j], &params)?;
                    }
                }
                let metric = Metric { g, e: raw.model.e };
                if !metric.is_symmetric() {
                    return Err(field_err("[metric] g", "not symmetric"));
                }
                let cf = invariant_coframe(&frame).ok();
                BianchiModel::assemble_with_metric(tag, params, frame, cf, metric, potential)?
            }
            other => return Err(field_err("[metric] source", format!("expected \"coframe\" or \"components\", got {other:?}"))),
        };
        let bindings = raw.bindings.as_ref().map(parse_bindings).transpose()?;
        Ok(Manifest { name: raw.model.name.unwrap_or_else(|| model.name()), model, bindings })
    }
}

pub fn load(path: &Path) -> Result<Manifest, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.display().to_string(), source })?;
    text.parse()
}

pub fn load_manifest(path: &Path) -> Result<BianchiModel, ManifestError> {
    Ok(load(path)?.model)
}

/// Reads `[bindings]` from any TOML file that has that section.
pub fn load_bindings(path: &Path) -> Result<Bindings, ManifestError> {
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.display().to_string(), source })?;
    let raw: RawBindingsFile = toml::from_str(&text)?;
    parse_bindings(&raw.bindings)
}

fn coframe_built(m: &BianchiModel) -> bool {
    match &m.coframe {
        Some(cf) => metric_from_coframe(cf, &abstract_spatial_metric(), m.metric.e) == m.metric,
        None => false,
    }
}

/// Manifest text for a model; loading it gives back an equal model
/// (without errata, which belong to the built-in catalog).
pub fn export(m: &BianchiModel, bindings: Option<&Bindings>) -> String {
    let s = |e: &Expr| e.to_string();
    let spatial = |x: &VectorField| [s(&x.c[1]), s(&x.c[2]), s(&x.c[3])];
    let params = RawParams {
        q: Some(m.params.q.to_string()),
        cos: match &m.params.angle {
            Angle::Exact { cos, .. } => Some(cos.to_string()),
            Angle::Symbolic => None,
        },
        sin: match &m.params.angle {
            Angle::Exact { sin, .. } => Some(sin.to_string()),
            Angle::Symbolic => None,
        },
    };
    let metric = if coframe_built(m) {
        RawMetric { source: String::from("coframe"), g: None }
    } else {
        RawMetric { source: String::from("components"), g: Some(m.metric.g.iter().map(|r| r.iter().map(s).collect()).collect()) }
    };
    let bindings = bindings.map(|b| {
        let mut t = BTreeMap::new();
        t.insert(String::from("angle"), toml::Value::Float(b.angle));
        t.insert(String::from("e"), toml::Value::Integer(b.e as i64));
        for (k, v) in &b.funcs {
            t.insert(k.clone(), toml::Value::String(v.to_string()));
        }
        t
    });
    let raw = RawManifest {
        model: RawModel { name: Some(m.name()), group: m.tag.roman().to_string(), e: m.metric.e },
        params: Some(params),
        frame: RawFrame { xi1: spatial(&m.frame[0]), xi2: spatial(&m.frame[1]), xi3: spatial(&m.frame[2]) },
        metric: Some(metric),
        potential: RawPotential { a: m.potential.a.clone().map(|e| e.to_string()) },
        bindings,
    };
    toml::to_string(&raw).expect("manifest serialization")
}
