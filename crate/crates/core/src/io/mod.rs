//! The JSON instance format (`"evpkit/1"`), its validation into library
//! types, generators, built-in instances and reports.

pub mod builtin;
pub mod generate;
pub mod report;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, LinearFunctional, PolyhedralCone, Point, Polytope, DEFAULT_TOLERANCE};
use crate::model::{EvpParams, FiniteInstance, MetricSpace, ModelError, PerturbationFamily, QuasiMetric, SetValuedMap};
use crate::product::{FKind, FMap, ProductInstance};
use crate::scalarization::Scalarizer;

pub const SCHEMA_VERSION: &str = "evpkit/1";

/// Environment variable overriding the default tolerance. A tolerance in
/// the file takes precedence over it.
pub const TOLERANCE_ENV: &str = "EVPKIT_TOLERANCE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: String,
    pub dimension: usize,
    pub cone: ConeSpec,
    pub space: SpaceSpec,
    pub map: BTreeMap<String, Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default)]
    pub params: ParamsSpec,
    /// Weights of a linear potential for the general solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub product: Option<ProductSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub rows: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<f64>>>,
}

/// Either `distances` or `coordinates` with `metric = "euclidean"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Turns `polytope_direction` into the open family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quasimetric: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<String>>,
    /// Explicit sets; unlisted `(λ, from, to)` default to `{0}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<FamilyEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyEntry {
    pub lambda: String,
    pub from: String,
    pub to: String,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductSpec {
    /// Defaults to `gr f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Vec<GraphPair>>,
    /// Defaults to `params.x0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<String>,
    /// Defaults to the first value of the start point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<Vec<f64>>,
    /// Defaults to the map induced by the perturbation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<FMapSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphPair {
    pub x: String,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FMapSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<Vec<f64>>>,
    pub rate: f64,
}

/// Explicit chains for the lower-monotonicity and closedness probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slm: Option<SlmProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epi: Option<EpiProbeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlmProbeSpec {
    pub chain: Vec<Vec<Vec<f64>>>,
    pub limit: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpiProbeSpec {
    /// `(f(x_n), y_n)` pairs.
    pub chain: Vec<(Vec<Vec<f64>>, Vec<f64>)>,
    pub limit_values: Vec<Vec<f64>>,
    pub limit_y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<bool>,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid instance at {path}: {source}")]
    Invariant {
        path: String,
        #[source]
        source: Box<ModelError>,
    },
    #[error("missing field {0}")]
    Missing(String),
}

fn at<E: Into<ModelError>>(path: impl Into<String>) -> impl FnOnce(E) -> IoError {
    let path = path.into();
    move |e| IoError::Invariant { path, source: Box::new(e.into()) }
}

fn points(raw: &[Vec<f64>]) -> Vec<Point> {
    raw.iter().cloned().map(Point::new).collect()
}

fn dim_check(path: &str, v: &[f64], m: usize) -> Result<(), IoError> {
    if v.len() != m {
        return Err(at(path)(GeometryError::DimensionMismatch {
            expected: m,
            found: v.len(),
        }));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(at(path)(GeometryError::NonFinite("coordinates")));
    }
    Ok(())
}

fn polytope(path: &str, raw: &[Vec<f64>], m: usize) -> Result<Polytope, IoError> {
    for (i, v) in raw.iter().enumerate() {
        dim_check(&format!("{path}[{i}]"), v, m)?;
    }
    Polytope::new(points(raw)).map_err(at(path))
}

/// A validated instance with everything the solvers may need.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceBundle {
    pub instance: FiniteInstance,
    pub family: Option<PerturbationFamily>,
    pub params: EvpParams,
    pub xi: Option<Scalarizer>,
    pub product: Option<ProductInstance>,
    pub fmap: Option<FMap>,
    pub probes: Option<ProbeSpec>,
    /// `k0` named in the perturbation, when there is one.
    pub k0: Option<Point>,
}

impl InstanceBundle {
    /// The direction set of the perturbation.
    pub fn directions(&self) -> Option<Polytope> {
        if let Some(fam) = &self.family {
            if let Some(h) = fam.directions() {
                return Some(h.into_owned());
            }
        }
        self.k0.clone().map(Polytope::singleton)
    }

    /// `k0`: named explicitly, or the single vertex of `H`.
    pub fn ray(&self) -> Option<Point> {
        self.k0.clone().or_else(|| match self.directions() {
            Some(h) if h.vertices().len() == 1 => Some(h.vertices()[0].clone()),
            _ => None,
        })
    }

    /// `params.gamma`, else the rate of the family.
    pub fn gamma(&self) -> Option<f64> {
        self.params.gamma.or(match &self.family {
            Some(PerturbationFamily::SingletonDirection { gamma, .. })
            | Some(PerturbationFamily::PolytopeDirection { gamma, .. })
            | Some(PerturbationFamily::OpenPolytopeFamily { gamma, .. }) => Some(*gamma),
            _ => None,
        })
    }

    pub fn tol(&self) -> f64 {
        self.instance.tol
    }
}

/// `file > EVPKIT_TOLERANCE > default`.
pub fn resolve_tolerance(file: Option<f64>, env: Option<&str>) -> Result<f64, IoError> {
    let bad = |path: &str, v: f64| IoError::Invariant {
        path: path.into(),
        source: Box::new(ModelError::NonPositive {
            what: "tolerance",
            value: v,
        }),
    };
    if let Some(t) = file {
        return if t.is_finite() && t > 0.0 { Ok(t) } else { Err(bad("params.tolerance", t)) };
    }
    if let Some(s) = env {
        let t: f64 = s.trim().parse().map_err(|_| IoError::Schema {
            path: TOLERANCE_ENV.into(),
            message: format!("not a number: {s:?}"),
        })?;
        return if t.is_finite() && t > 0.0 { Ok(t) } else { Err(bad(TOLERANCE_ENV, t)) };
    }
    Ok(DEFAULT_TOLERANCE)
}

/// Parses JSON text, reporting schema errors with their field path.
pub fn parse(text: &str) -> Result<InstanceFile, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Reads and validates a file, honoring `EVPKIT_TOLERANCE`.
pub fn load_validate(path: &Path) -> Result<InstanceBundle, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let file = parse(&text)?;
    let env = std::env::var(TOLERANCE_ENV).ok();
    validate(&file, env.as_deref())
}

/// Checks every invariant of the file and builds the library types.
pub fn validate(file: &InstanceFile, env_tolerance: Option<&str>) -> Result<InstanceBundle, IoError> {
    if file.version != SCHEMA_VERSION {
        return Err(IoError::Schema {
            path: "version".into(),
            message: format!("expected {SCHEMA_VERSION:?}, found {:?}", file.version),
        });
    }
    let tol = resolve_tolerance(file.params.tolerance, env_tolerance)?;
    let m = file.dimension;
    if m == 0 {
        return Err(at("dimension")(ModelError::Empty("dimension")));
    }
    for (i, r) in file.cone.rows.iter().enumerate() {
        dim_check(&format!("cone.rows[{i}]"), r, m)?;
    }
    let generators = match &file.cone.generators {
        Some(g) => {
            for (i, v) in g.iter().enumerate() {
                dim_check(&format!("cone.generators[{i}]"), v, m)?;
            }
            Some(points(g))
        }
        None => None,
    };
    let cone = PolyhedralCone::with_generators(file.cone.rows.clone(), generators, tol).map_err(at("cone"))?;

    let s = &file.space;
    let space = match (&s.distances, &s.coordinates) {
        (Some(dist), None) => MetricSpace::new(s.labels.clone(), dist.clone(), tol).map_err(at("space.distances"))?,
        (None, Some(coords)) => {
            match s.metric.as_deref() {
                Some("euclidean") | None => {}
                Some(other) => {
                    return Err(IoError::Schema {
                        path: "space.metric".into(),
                        message: format!("unsupported metric {other:?}, expected \"euclidean\""),
                    })
                }
            }
            MetricSpace::from_coordinates(s.labels.clone(), coords, tol).map_err(at("space.coordinates"))?
        }
        (Some(_), Some(_)) => {
            return Err(IoError::Schema {
                path: "space".into(),
                message: "give either distances or coordinates, not both".into(),
            })
        }
        (None, None) => return Err(IoError::Missing("space.distances or space.coordinates".into())),
    };

    let mut values = Vec::with_capacity(space.len());
    for label in space.labels() {
        let raw = file.map.get(label).ok_or_else(|| IoError::Missing(format!("map.{label}")))?;
        for (i, v) in raw.iter().enumerate() {
            dim_check(&format!("map.{label}[{i}]"), v, m)?;
        }
        values.push(points(raw));
    }
    if let Some(extra) = file.map.keys().find(|k| space.index_of(k).is_err()) {
        return Err(at(format!("map.{extra}"))(ModelError::UnknownLabel(extra.clone())));
    }
    let instance = FiniteInstance::new(cone, space, SetValuedMap::new(values), tol).map_err(at("map"))?;

    let (family, k0) = match &file.perturbation {
        Some(p) => {
            let (fam, k0) = family_from_spec(p, &instance)?;
            fam.validate(&instance).map_err(at("perturbation"))?;
            (Some(fam), k0)
        }
        None => (None, None),
    };

    let x0 = match &file.params.x0 {
        Some(l) => instance.index_of(l).map_err(at("params.x0"))?,
        None => 0,
    };
    let params = EvpParams {
        x0,
        epsilon: file.params.epsilon,
        lambda: file.params.lambda,
        gamma: file.params.gamma,
        tol,
    };
    for (path, v) in [
        ("params.epsilon", params.epsilon),
        ("params.lambda", params.lambda),
        ("params.gamma", params.gamma),
    ] {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(at(path)(ModelError::NonPositive { what: "parameter", value: v }));
            }
        }
    }

    let xi = match &file.xi {
        Some(w) => {
            dim_check("xi", w, m)?;
            Some(Scalarizer::Linear(LinearFunctional::new(w.clone())))
        }
        None => None,
    };

    let mut bundle = InstanceBundle {
        instance,
        family,
        params,
        xi,
        product: None,
        fmap: None,
        probes: file.probes.clone(),
        k0,
    };
    if let Some(p) = &file.product {
        let (pi, fm) = product_from_spec(p, &bundle)?;
        bundle.product = Some(pi);
        bundle.fmap = fm;
    }
    if let Some(probes) = &bundle.probes {
        check_probe_dims(probes, m)?;
    }
    Ok(bundle)
}

fn check_probe_dims(p: &ProbeSpec, m: usize) -> Result<(), IoError> {
    if let Some(s) = &p.slm {
        for (i, vs) in s.chain.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                dim_check(&format!("probes.slm.chain[{i}][{j}]"), v, m)?;
            }
        }
        for (j, v) in s.limit.iter().enumerate() {
            dim_check(&format!("probes.slm.limit[{j}]"), v, m)?;
        }
    }
    if let Some(e) = &p.epi {
        for (i, (vs, y)) in e.chain.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                dim_check(&format!("probes.epi.chain[{i}].0[{j}]"), v, m)?;
            }
            dim_check(&format!("probes.epi.chain[{i}].1"), y, m)?;
        }
        for (j, v) in e.limit_values.iter().enumerate() {
            dim_check(&format!("probes.epi.limit_values[{j}]"), v, m)?;
        }
        dim_check("probes.epi.limit_y", &e.limit_y, m)?;
    }
    Ok(())
}

fn family_from_spec(p: &PerturbationSpec, inst: &FiniteInstance) -> Result<(PerturbationFamily, Option<Point>), IoError> {
    let m = inst.dim();
    let k0 = match &p.k0 {
        Some(v) => {
            dim_check("perturbation.k0", v, m)?;
            Some(Point::new(v.clone()))
        }
        None => None,
    };
    let need_gamma = || p.gamma.ok_or_else(|| IoError::Missing("perturbation.gamma".into()));
    let need_h = || match (&p.h, &k0) {
        (Some(h), _) => polytope("perturbation.h", h, m),
        (None, Some(k)) => Ok(Polytope::singleton(k.clone())),
        (None, None) => Err(IoError::Missing("perturbation.h".into())),
    };
    let fam = match p.variant.as_str() {
        "singleton_direction" => PerturbationFamily::SingletonDirection {
            k0: k0.clone().ok_or_else(|| IoError::Missing("perturbation.k0".into()))?,
            gamma: need_gamma()?,
        },
        "polytope_direction" if p.open == Some(true) => PerturbationFamily::OpenPolytopeFamily {
            h: need_h()?,
            gamma: need_gamma()?,
        },
        "polytope_direction" => PerturbationFamily::PolytopeDirection {
            h: need_h()?,
            gamma: need_gamma()?,
        },
        "open_polytope_family" => PerturbationFamily::OpenPolytopeFamily {
            h: need_h()?,
            gamma: need_gamma()?,
        },
        "quasi_metric_direction" => {
            let raw = p.quasimetric.clone().ok_or_else(|| IoError::Missing("perturbation.quasimetric".into()))?;
            let q = QuasiMetric::new(raw, inst.space.labels(), inst.tol).map_err(at("perturbation.quasimetric"))?;
            PerturbationFamily::QuasiMetricDirection { h: need_h()?, p: q }
        }
        "extensional_family" => {
            let lambdas = p.lambdas.clone().ok_or_else(|| IoError::Missing("perturbation.lambdas".into()))?;
            let n = inst.len();
            let zero = Polytope::singleton(Point::zeros(m));
            let mut sets = vec![vec![vec![zero; n]; n]; lambdas.len()];
            for (i, e) in p.entries.iter().flatten().enumerate() {
                let path = format!("perturbation.entries[{i}]");
                let l = lambdas
                    .iter()
                    .position(|x| *x == e.lambda)
                    .ok_or_else(|| at(format!("{path}.lambda"))(ModelError::UnknownLabel(e.lambda.clone())))?;
                let a = inst.index_of(&e.from).map_err(at(format!("{path}.from")))?;
                let b = inst.index_of(&e.to).map_err(at(format!("{path}.to")))?;
                sets[l][a][b] = polytope(&format!("{path}.vertices"), &e.vertices, m)?;
            }
            PerturbationFamily::ExtensionalFamily { lambdas, sets }
        }
        other => {
            return Err(IoError::Schema {
                path: "perturbation.variant".into(),
                message: format!("unknown variant {other:?}"),
            })
        }
    };
    Ok((fam, k0))
}

fn product_from_spec(p: &ProductSpec, b: &InstanceBundle) -> Result<(ProductInstance, Option<FMap>), IoError> {
    let inst = &b.instance;
    let m = inst.dim();
    let x0 = match &p.x0 {
        Some(l) => inst.index_of(l).map_err(at("product.x0"))?,
        None => b.params.x0,
    };
    let y0 = match &p.y0 {
        Some(v) => {
            dim_check("product.y0", v, m)?;
            Point::new(v.clone())
        }
        None => inst.f(x0)[0].clone(),
    };
    let graph: Vec<(usize, Point)> = match &p.graph {
        Some(pairs) => {
            let mut out = Vec::with_capacity(pairs.len());
            for (i, gp) in pairs.iter().enumerate() {
                let x = inst.index_of(&gp.x).map_err(at(format!("product.graph[{i}].x")))?;
                dim_check(&format!("product.graph[{i}].y"), &gp.y, m)?;
                out.push((x, Point::new(gp.y.clone())));
            }
            out
        }
        None => {
            let mut out: Vec<(usize, Point)> = Vec::new();
            for x in 0..inst.len() {
                for y in inst.f(x) {
                    if !out.iter().any(|(xp, yp)| *xp == x && yp.approx_eq(y, inst.tol)) {
                        out.push((x, y.clone()));
                    }
                }
            }
            out
        }
    };
    let start = graph
        .iter()
        .position(|(x, y)| *x == x0 && y.approx_eq(&y0, inst.tol))
        .ok_or_else(|| at("product.y0")(ModelError::BadStart(x0)))?;
    let pi = ProductInstance::new(inst.space.clone(), inst.cone.clone(), graph, start, inst.tol).map_err(at("product.graph"))?;
    let fm = match &p.f {
        Some(spec) => Some(fmap_from_spec(spec, &inst.cone, m, inst.tol)?),
        None => None,
    };
    Ok((pi, fm))
}

fn fmap_from_spec(spec: &FMapSpec, cone: &PolyhedralCone, m: usize, tol: f64) -> Result<FMap, IoError> {
    let invalid = |e: crate::evp::SolverError| IoError::Schema {
        path: "product.f".into(),
        message: e.to_string(),
    };
    match spec.kind.as_str() {
        "ray" => {
            let k0 = spec.k0.clone().ok_or_else(|| IoError::Missing("product.f.k0".into()))?;
            dim_check("product.f.k0", &k0, m)?;
            FMap::ray(cone, Point::new(k0), spec.rate, tol).map_err(invalid)
        }
        "scaled" => {
            let h = spec.h.as_ref().ok_or_else(|| IoError::Missing("product.f.h".into()))?;
            let h = polytope("product.f.h", h, m)?;
            FMap::scaled(cone, h, spec.rate, tol).map_err(invalid)
        }
        other => Err(IoError::Schema {
            path: "product.f.kind".into(),
            message: format!("unknown kind {other:?}"),
        }),
    }
}

fn raw(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

/// Writes a bundle back to the file format; `validate(emit(b))` rebuilds `b`.
pub fn emit(b: &InstanceBundle) -> InstanceFile {
    let inst = &b.instance;
    let labels = inst.space.labels().to_vec();
    let map = (0..inst.len())
        .map(|x| (inst.label(x).to_string(), raw(inst.f(x))))
        .collect();
    let perturbation = b.family.as_ref().map(|fam| spec_from_family(fam, inst, b.k0.as_ref()));
    let product = b.product.as_ref().map(|pi| ProductSpec {
        graph: Some(
            pi.graph
                .iter()
                .map(|(x, y)| GraphPair {
                    x: inst.label(*x).to_string(),
                    y: y.coords().to_vec(),
                })
                .collect(),
        ),
        x0: Some(inst.label(pi.x(pi.start)).to_string()),
        y0: Some(pi.y0().coords().to_vec()),
        f: b.fmap.as_ref().and_then(|fm| match &fm.kind {
            FKind::Ray { k0, rate } => Some(FMapSpec {
                kind: "ray".into(),
                k0: Some(k0.coords().to_vec()),
                h: None,
                rate: *rate,
            }),
            FKind::Scaled { h, rate } => Some(FMapSpec {
                kind: "scaled".into(),
                k0: None,
                h: Some(raw(h.vertices())),
                rate: *rate,
            }),
            FKind::Table { .. } => None,
        }),
    });
    InstanceFile {
        version: SCHEMA_VERSION.into(),
        dimension: inst.dim(),
        cone: ConeSpec {
            rows: inst.cone.rows().to_vec(),
            generators: inst.cone.generators().map(raw),
        },
        space: SpaceSpec {
            labels,
            distances: Some(inst.space.matrix().to_vec()),
            coordinates: None,
            metric: None,
        },
        map,
        perturbation,
        params: ParamsSpec {
            x0: Some(inst.label(b.params.x0).to_string()),
            epsilon: b.params.epsilon,
            lambda: b.params.lambda,
            gamma: b.params.gamma,
            tolerance: Some(b.params.tol),
        },
        xi: b.xi.as_ref().and_then(|xi| match xi {
            Scalarizer::Linear(l) => Some(l.weights.clone()),
            Scalarizer::Gerstewitz { .. } => None,
        }),
        product,
        probes: b.probes.clone(),
    }
}

fn spec_from_family(fam: &PerturbationFamily, inst: &FiniteInstance, k0: Option<&Point>) -> PerturbationSpec {
    let mut spec = PerturbationSpec {
        variant: String::new(),
        k0: k0.map(|k| k.coords().to_vec()),
        h: None,
        gamma: None,
        open: None,
        quasimetric: None,
        lambdas: None,
        entries: None,
    };
    match fam {
        PerturbationFamily::SingletonDirection { k0, gamma } => {
            spec.variant = "singleton_direction".into();
            spec.k0 = Some(k0.coords().to_vec());
            spec.gamma = Some(*gamma);
        }
        PerturbationFamily::PolytopeDirection { h, gamma } => {
            spec.variant = "polytope_direction".into();
            spec.h = Some(raw(h.vertices()));
            spec.gamma = Some(*gamma);
        }
        PerturbationFamily::OpenPolytopeFamily { h, gamma } => {
            spec.variant = "open_polytope_family".into();
            spec.h = Some(raw(h.vertices()));
            spec.gamma = Some(*gamma);
        }
        PerturbationFamily::QuasiMetricDirection { h, p } => {
            spec.variant = "quasi_metric_direction".into();
            spec.h = Some(raw(h.vertices()));
            spec.quasimetric = Some(p.matrix().to_vec());
        }
        PerturbationFamily::ExtensionalFamily { lambdas, sets } => {
            spec.variant = "extensional_family".into();
            spec.lambdas = Some(lambdas.clone());
            let mut entries = Vec::new();
            for (l, table) in sets.iter().enumerate() {
                for (a, row) in table.iter().enumerate() {
                    for (b, poly) in row.iter().enumerate() {
                        entries.push(FamilyEntry {
                            lambda: lambdas[l].clone(),
                            from: inst.label(a).to_string(),
                            to: inst.label(b).to_string(),
                            vertices: raw(poly.vertices()),
                        });
                    }
                }
            }
            spec.entries = Some(entries);
        }
    }
    spec
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_POINT: &str = r#"{
        "version": "evpkit/1",
        "dimension": 1,
        "cone": {"rows": [[1.0]]},
        "space": {"labels": ["a", "b"], "distances": [[0, 1], [1, 0]]},
        "map": {"a": [[1.0]], "b": [[0.0]]},
        "perturbation": {"variant": "singleton_direction", "k0": [1.0], "gamma": 1.0},
        "params": {"x0": "a", "epsilon": 0.5, "lambda": 2.0}
    }"#;

    #[test]
    fn loads_two_point() {
        let b = validate(&parse(TWO_POINT).unwrap(), None).unwrap();
        assert_eq!(b.instance.len(), 2);
        assert_eq!(b.params.x0, 0);
        assert_eq!(b.ray(), Some(Point::from([1.0])));
        assert_eq!(b.gamma(), Some(1.0));
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = TWO_POINT.replace("[[0, 1], [1, 0]]", "[[0, 1], [1, \"x\"]]");
        match parse(&text) {
            Err(IoError::Schema { path, .. }) => assert_eq!(path, "space.distances[1][1]"),
            other => panic!("unexpected {other:?}"),
        }
        let text = TWO_POINT.replace("\"dimension\": 1", "\"dimension\": 1, \"extra\": 2");
        assert!(matches!(parse(&text), Err(IoError::Schema { .. })));
    }

    #[test]
    fn invariant_errors_name_the_field() {
        let text = TWO_POINT.replace("\"k0\": [1.0]", "\"k0\": [-1.0]");
        match validate(&parse(&text).unwrap(), None) {
            Err(IoError::Invariant { path, .. }) => assert_eq!(path, "perturbation"),
            other => panic!("unexpected {other:?}"),
        }
        let text = TWO_POINT.replace("\"x0\": \"a\"", "\"x0\": \"z\"");
        match validate(&parse(&text).unwrap(), None) {
            Err(IoError::Invariant { path, .. }) => assert_eq!(path, "params.x0"),
            other => panic!("unexpected {other:?}"),
        }
        let text = TWO_POINT.replace("\"b\": [[0.0]]", "\"b\": [[0.0, 1.0]]");
        match validate(&parse(&text).unwrap(), None) {
            Err(IoError::Invariant { path, .. }) => assert_eq!(path, "map.b[0]"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn triangle_violation_names_the_triple() {
        let text = r#"{
            "version": "evpkit/1", "dimension": 1, "cone": {"rows": [[1.0]]},
            "space": {"labels": ["a", "b", "c"], "distances": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]},
            "map": {"a": [[0]], "b": [[0]], "c": [[0]]}
        }"#;
        match validate(&parse(text).unwrap(), None) {
            Err(IoError::Invariant { source, .. }) if matches!(*source, ModelError::Triangle { .. }) => {
                let ModelError::Triangle { a, b, c, .. } = *source else { unreachable!() };
                assert_eq!((a.as_str(), b.as_str(), c.as_str()), ("a", "b", "c"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tolerance_precedence() {
        assert_eq!(resolve_tolerance(Some(1e-6), Some("1e-3")).unwrap(), 1e-6);
        assert_eq!(resolve_tolerance(None, Some("1e-3")).unwrap(), 1e-3);
        assert_eq!(resolve_tolerance(None, None).unwrap(), DEFAULT_TOLERANCE);
        assert!(resolve_tolerance(None, Some("abc")).is_err());
        assert!(resolve_tolerance(Some(-1.0), None).is_err());
    }

    #[test]
    fn emit_round_trip() {
        let b = validate(&parse(TWO_POINT).unwrap(), None).unwrap();
        let back = validate(&emit(&b), None).unwrap();
        assert_eq!(b, back);
        let text = serde_json::to_string(&emit(&b)).unwrap();
        assert_eq!(validate(&parse(&text).unwrap(), None).unwrap(), b);
    }

    #[test]
    fn coordinates_and_product_section() {
        let text = r#"{
            "version": "evpkit/1", "dimension": 2, "cone": {"rows": [[1, 0], [0, 1]]},
            "space": {"labels": ["a", "b"], "coordinates": [[0, 0], [3, 4]], "metric": "euclidean"},
            "map": {"a": [[2, 2]], "b": [[0, 0], [1, 0]]},
            "perturbation": {"variant": "polytope_direction", "h": [[1, 0], [0, 1]], "gamma": 0.1, "open": true},
            "product": {"x0": "a", "f": {"kind": "ray", "k0": [1, 1], "rate": 0.1}}
        }"#;
        let b = validate(&parse(text).unwrap(), None).unwrap();
        assert_eq!(b.instance.space.d(0, 1), 5.0);
        assert!(matches!(b.family, Some(PerturbationFamily::OpenPolytopeFamily { .. })));
        let pi = b.product.as_ref().unwrap();
        assert_eq!(pi.len(), 3);
        assert_eq!(pi.start, 0);
        assert!(b.fmap.is_some());
        assert_eq!(validate(&emit(&b), None).unwrap(), b);
    }
}
