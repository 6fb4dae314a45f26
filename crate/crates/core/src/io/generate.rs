//! Seeded random instances that always validate.
//!
//! Distances come from distinct integer coordinates in the plane, so the
//! metric axioms hold by construction. Values sit on a grid of step 0.25.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ConeSpec, FMapSpec, FamilyEntry, InstanceFile, ParamsSpec, PerturbationSpec, ProductSpec, SpaceSpec, SCHEMA_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Singleton,
    Polytope,
    OpenPolytope,
    Quasimetric,
    Extensional,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Singleton,
        Variant::Polytope,
        Variant::OpenPolytope,
        Variant::Quasimetric,
        Variant::Extensional,
    ];
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "singleton" => Ok(Variant::Singleton),
            "polytope" => Ok(Variant::Polytope),
            "open-polytope" | "open_polytope" => Ok(Variant::OpenPolytope),
            "quasimetric" => Ok(Variant::Quasimetric),
            "extensional" => Ok(Variant::Extensional),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub n: usize,
    pub m: usize,
    /// Upper bound; each point gets between 1 and this many values.
    pub values_per_point: usize,
    pub variant: Variant,
    /// Adds a product section with a ray map along the first direction.
    pub product: bool,
}

impl Profile {
    pub fn new(n: usize, m: usize, values_per_point: usize, variant: Variant) -> Self {
        Self {
            n: n.max(1),
            m: m.max(1),
            values_per_point: values_per_point.max(1),
            variant,
            product: false,
        }
    }
}

fn grid(rng: &mut ChaCha8Rng, steps: u32) -> f64 {
    f64::from(rng.gen_range(0..=steps)) * 0.25
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthant rows plus up to one extra row with positive sum, so `1` stays
/// interior and the cone stays pointed.
fn random_cone(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    if m >= 2 && rng.gen_bool(0.5) {
        loop {
            let r: Vec<f64> = (0..m).map(|_| f64::from(rng.gen_range(-2..=4)) * 0.25).collect();
            if r.iter().sum::<f64>() > 0.5 && r.iter().any(|&c| c < 0.0) {
                rows.push(r);
                break;
            }
        }
    }
    rows
}

/// Direction vectors with entries in `[1, 1.5]`, kept only if inside the cone.
fn random_directions(rng: &mut ChaCha8Rng, rows: &[Vec<f64>], m: usize, count: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let v: Vec<f64> = (0..m).map(|_| 1.0 + f64::from(rng.gen_range(0..=4)) * 0.125).collect();
        if rows.iter().all(|r| dot(r, &v) >= 0.0) {
            out.push(v);
        }
    }
    if out.is_empty() {
        out.push(vec![1.0; m]);
    }
    out
}

/// A reproducible instance for `(seed, profile)`.
pub fn generate(seed: u64, profile: &Profile) -> InstanceFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Profile { n, m, values_per_point, variant, .. } = *profile;
    let (n, m, vpp) = (n.max(1), m.max(1), values_per_point.max(1));

    let rows = random_cone(&mut rng, m);
    let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let span = (2 * n as i32).max(4);
    let mut taken = BTreeSet::new();
    let mut coords = Vec::with_capacity(n);
    while coords.len() < n {
        let c = (rng.gen_range(0..span), rng.gen_range(0..span));
        if taken.insert(c) {
            coords.push(vec![f64::from(c.0), f64::from(c.1)]);
        }
    }
    let dist = |i: usize, j: usize| ((coords[i][0] - coords[j][0]).powi(2) + (coords[i][1] - coords[j][1]).powi(2)).sqrt();

    let mut map = BTreeMap::new();
    for label in &labels {
        let k = rng.gen_range(1..=vpp);
        let mut vals: Vec<Vec<f64>> = Vec::with_capacity(k);
        while vals.len() < k {
            let v: Vec<f64> = (0..m).map(|_| grid(&mut rng, 16)).collect();
            if !vals.contains(&v) {
                vals.push(v);
            }
        }
        map.insert(label.clone(), vals);
    }

    let h_count = if variant == Variant::Singleton { 1 } else { rng.gen_range(1..=3) };
    let h = random_directions(&mut rng, &rows, m, h_count);
    let gamma = 0.05 * f64::from(rng.gen_range(1..=6));
    let mut pert = PerturbationSpec {
        variant: String::new(),
        k0: None,
        h: None,
        gamma: Some(gamma),
        open: None,
        quasimetric: None,
        lambdas: None,
        entries: None,
    };
    match variant {
        Variant::Singleton => {
            pert.variant = "singleton_direction".into();
            pert.k0 = Some(h[0].clone());
        }
        Variant::Polytope | Variant::OpenPolytope => {
            pert.variant = "polytope_direction".into();
            pert.h = Some(h.clone());
            pert.open = Some(variant == Variant::OpenPolytope);
        }
        Variant::Quasimetric => {
            // p(x, y) = d(x, y) + c + g(y) - g(x) with g L-Lipschitz, L < 1,
            // is positive off the diagonal and satisfies the triangle
            // inequality.
            let lip = 0.25 * f64::from(rng.gen_range(0..=3));
            let u = [0.6, 0.8];
            let c = 0.25 * f64::from(rng.gen_range(0..=2));
            let g: Vec<f64> = coords.iter().map(|p| lip * dot(p, &u)).collect();
            let p = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { 0.0 } else { gamma * (dist(i, j) + c + g[j] - g[i]) })
                        .collect()
                })
                .collect();
            pert.variant = "quasi_metric_direction".into();
            pert.h = Some(h.clone());
            pert.gamma = None;
            pert.quasimetric = Some(p);
        }
        Variant::Extensional => {
            let rates = [gamma, gamma * 0.5];
            let lambdas: Vec<String> = vec!["g".into(), "g/2".into()];
            let mut entries = Vec::new();
            for (l, rate) in rates.iter().enumerate() {
                for a in 0..n {
                    for b in 0..n {
                        if a == b {
                            continue;
                        }
                        let s = rate * dist(a, b);
                        entries.push(FamilyEntry {
                            lambda: lambdas[l].clone(),
                            from: labels[a].clone(),
                            to: labels[b].clone(),
                            vertices: h.iter().map(|v| v.iter().map(|c| c * s).collect()).collect(),
                        });
                    }
                }
            }
            pert.variant = "extensional_family".into();
            pert.gamma = None;
            pert.lambdas = Some(lambdas);
            pert.entries = Some(entries);
        }
    }

    let x0 = rng.gen_range(0..n);
    let product = profile.product.then(|| ProductSpec {
        graph: None,
        x0: None,
        y0: None,
        f: Some(FMapSpec {
            kind: "ray".into(),
            k0: Some(h[0].clone()),
            h: None,
            rate: gamma,
        }),
    });
    InstanceFile {
        version: SCHEMA_VERSION.into(),
        dimension: m,
        cone: ConeSpec { rows, generators: None },
        space: SpaceSpec {
            labels: labels.clone(),
            distances: None,
            coordinates: Some(coords),
            metric: Some("euclidean".into()),
        },
        map,
        perturbation: Some(pert),
        params: ParamsSpec {
            x0: Some(labels[x0].clone()),
            epsilon: Some(0.25 * f64::from(rng.gen_range(1..=4))),
            lambda: Some(f64::from(rng.gen_range(1..=8))),
            gamma: Some(gamma),
            tolerance: None,
        },
        xi: None,
        product,
        probes: None,
    }
}
