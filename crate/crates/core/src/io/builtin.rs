//! Named instances shipped with the library.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{
    ConeSpec, EpiProbeSpec, InstanceFile, ParamsSpec, PerturbationSpec, ProbeSpec, ProductSpec, SlmProbeSpec, SpaceSpec, FMapSpec,
    SCHEMA_VERSION,
};

pub const NAMES: [&str; 4] = ["example41", "chain", "antichain", "pareto-demo"];

pub const DEFAULT_SAMPLES: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuiltinError {
    #[error("unknown builtin {0:?}; known: example41, chain, antichain, pareto-demo")]
    Unknown(String),
    #[error("example41 needs at least 2 samples, found {0}")]
    TooFewSamples(usize),
}

fn base(dimension: usize, labels: &[&str]) -> InstanceFile {
    InstanceFile {
        version: SCHEMA_VERSION.into(),
        dimension,
        cone: ConeSpec {
            rows: (0..dimension)
                .map(|i| (0..dimension).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
            generators: None,
        },
        space: SpaceSpec {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            distances: None,
            coordinates: None,
            metric: None,
        },
        map: BTreeMap::new(),
        perturbation: None,
        params: ParamsSpec::default(),
        xi: None,
        product: None,
        probes: None,
    }
}

fn singleton(k0: Vec<f64>, gamma: f64) -> PerturbationSpec {
    PerturbationSpec {
        variant: "singleton_direction".into(),
        k0: Some(k0),
        h: None,
        gamma: Some(gamma),
        open: None,
        quasimetric: None,
        lambdas: None,
        entries: None,
    }
}

/// `X = {-1/k : k = 1..n} ∪ {0}` on the line, `D = R+`, `f(x) = {x}` for
/// `x < 0` and `f(0) = {1}`. The chain `x_k` increases to `0`, so it is not
/// `D`-decreasing and lower monotonicity holds vacuously, while the epigraph
/// pairs `(x_k, x_k)` converge to `(0, 0)` outside `epi f`.
pub fn example41(samples: usize) -> Result<InstanceFile, BuiltinError> {
    if samples < 2 {
        return Err(BuiltinError::TooFewSamples(samples));
    }
    let mut labels: Vec<String> = (1..=samples).map(|k| format!("x{k}")).collect();
    labels.push("zero".into());
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let mut file = base(1, &label_refs);
    let xs: Vec<f64> = (1..=samples).map(|k| -1.0 / k as f64).collect();
    let mut coords: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
    coords.push(vec![0.0]);
    file.space.coordinates = Some(coords);
    file.space.metric = Some("euclidean".into());
    for (label, &x) in labels.iter().zip(&xs) {
        file.map.insert(label.clone(), vec![vec![x]]);
    }
    file.map.insert("zero".into(), vec![vec![1.0]]);
    file.perturbation = Some(singleton(vec![1.0], 1.0));
    file.params.x0 = Some("x1".into());
    file.probes = Some(ProbeSpec {
        slm: Some(SlmProbeSpec {
            chain: xs.iter().map(|&x| vec![vec![x]]).collect(),
            limit: vec![vec![1.0]],
            expected: Some(true),
        }),
        epi: Some(EpiProbeSpec {
            chain: xs.iter().map(|&x| (vec![vec![x]], vec![x])).collect(),
            limit_values: vec![vec![1.0]],
            limit_y: vec![0.0],
            expected: Some(false),
        }),
    });
    Ok(file)
}

/// Values 2, 1, 0 at positions 0, 1, 2: each step down gains 1 and costs
/// `0.5` along `k0`, so the engine walks to `c`. With `ε = 3` the start is
/// `ε`-minimal, so the premised solvers run too.
pub fn chain() -> InstanceFile {
    let mut file = base(1, &["a", "b", "c"]);
    file.space.coordinates = Some(vec![vec![0.0], vec![1.0], vec![2.0]]);
    file.space.metric = Some("euclidean".into());
    for (l, v) in [("a", 2.0), ("b", 1.0), ("c", 0.0)] {
        file.map.insert(l.into(), vec![vec![v]]);
    }
    file.perturbation = Some(singleton(vec![1.0], 0.5));
    file.params = ParamsSpec {
        x0: Some("a".into()),
        epsilon: Some(3.0),
        lambda: Some(6.0),
        gamma: Some(0.5),
        tolerance: None,
    };
    file
}

/// Three mutually incomparable values at unit distances; nothing precedes
/// anything else, so every start is its own answer.
pub fn antichain() -> InstanceFile {
    let mut file = base(2, &["a", "b", "c"]);
    file.space.distances = Some(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
    for (l, v) in [("a", [0.0, 2.0]), ("b", [1.0, 1.0]), ("c", [2.0, 0.0])] {
        file.map.insert(l.into(), vec![v.to_vec()]);
    }
    file.perturbation = Some(PerturbationSpec {
        variant: "polytope_direction".into(),
        k0: None,
        h: Some(vec![vec![1.0, 1.0]]),
        gamma: Some(0.5),
        open: Some(false),
        quasimetric: None,
        lambdas: None,
        entries: None,
    });
    file.params = ParamsSpec {
        x0: Some("b".into()),
        epsilon: Some(0.5),
        lambda: Some(1.0),
        gamma: Some(0.5),
        tolerance: None,
    };
    file
}

/// Image `{(0,1), (1,1), (1,0), (2,2), (0.5,0.5)}` under `R²+`: the minimal
/// values are `(0,1)`, `(1,0)` and `(0.5,0.5)`. The product start is
/// `(a, (1,1))`, which `ε = 0.75` along `(1,1)` keeps outside `f(X) + εk0 + D`.
pub fn pareto_demo() -> InstanceFile {
    let mut file = base(2, &["a", "b", "c"]);
    file.space.distances = Some(vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]);
    file.map.insert("a".into(), vec![vec![0.0, 1.0], vec![1.0, 1.0]]);
    file.map.insert("b".into(), vec![vec![1.0, 0.0], vec![2.0, 2.0]]);
    file.map.insert("c".into(), vec![vec![0.5, 0.5]]);
    file.perturbation = Some(singleton(vec![1.0, 1.0], 0.25));
    file.params = ParamsSpec {
        x0: Some("a".into()),
        epsilon: Some(0.75),
        lambda: Some(3.0),
        gamma: Some(0.25),
        tolerance: None,
    };
    file.product = Some(ProductSpec {
        graph: None,
        x0: Some("a".into()),
        y0: Some(vec![1.0, 1.0]),
        f: Some(FMapSpec {
            kind: "ray".into(),
            k0: Some(vec![1.0, 1.0]),
            h: None,
            rate: 0.25,
        }),
    });
    file
}

pub fn builtin(name: &str, samples: Option<usize>) -> Result<InstanceFile, BuiltinError> {
    match name {
        "example41" => example41(samples.unwrap_or(DEFAULT_SAMPLES)),
        "chain" => Ok(chain()),
        "antichain" => Ok(antichain()),
        "pareto-demo" | "pareto_demo" => Ok(pareto_demo()),
        other => Err(BuiltinError::Unknown(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::io::validate;
    use crate::model::probes::{epi_closed_probe, slm_probe};

    fn pts(raw: &[Vec<f64>]) -> Vec<Point> {
        raw.iter().cloned().map(Point::new).collect()
    }

    #[test]
    fn all_builtins_validate() {
        for name in NAMES {
            validate(&builtin(name, None).unwrap(), None).unwrap();
        }
        assert!(matches!(builtin("nope", None), Err(BuiltinError::Unknown(_))));
        assert!(example41(1).is_err());
    }

    #[test]
    fn example41_probes_match_expectations() {
        let b = validate(&example41(6).unwrap(), None).unwrap();
        let probes = b.probes.unwrap();
        let slm = probes.slm.unwrap();
        let chain: Vec<Vec<Point>> = slm.chain.iter().map(|v| pts(v)).collect();
        assert!(slm_probe(&chain, &pts(&slm.limit), &b.instance.cone, b.instance.tol).unwrap());
        let epi = probes.epi.unwrap();
        let chain: Vec<(Vec<Point>, Point)> = epi.chain.iter().map(|(v, y)| (pts(v), Point::new(y.clone()))).collect();
        let closed = epi_closed_probe(
            &chain,
            &pts(&epi.limit_values),
            &Point::new(epi.limit_y.clone()),
            &b.instance.cone,
            b.instance.tol,
        )
        .unwrap();
        assert!(!closed);
    }
}
