//! JSON file formats.
//!
//! Rationals are written as `"p/q"` strings (integers may be bare). Floats
//! are refused on input so nothing inexact slips into the exact pipeline.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ddg::{parse_simplex_key, simplex_key, Chain, Cochain, SimplicialComplex};
use crate::error::{Error, Result};
use crate::interference::{Event, EventMeasure};
use crate::model::{EmpiricalModel, GptFragment, OnticRepresentation};
use crate::rational::{rats, unrats, Rat, Q};
use crate::vorobyev::CompatibilityHypergraph;

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads and decodes a JSON file; decoding errors name the file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Parse(format!("malformed JSON in {}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn mat(m: Vec<Vec<Rat>>) -> Vec<Vec<Q>> {
    m.into_iter().map(unrats).collect()
}

fn to_mat(m: &[Vec<Q>]) -> Vec<Vec<Rat>> {
    m.iter().map(|r| rats(r)).collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentFile {
    dimension: usize,
    states: Vec<Vec<Rat>>,
    effects: Vec<Vec<Rat>>,
    unit_effect: Vec<Rat>,
    measurements: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    transformations: Vec<Vec<Vec<Rat>>>,
}

impl From<FragmentFile> for GptFragment {
    fn from(f: FragmentFile) -> Self {
        GptFragment {
            dimension: f.dimension,
            states: mat(f.states),
            effects: mat(f.effects),
            unit_effect: unrats(f.unit_effect),
            transformations: f.transformations.into_iter().map(mat).collect(),
            measurements: f.measurements,
        }
    }
}

impl From<GptFragment> for FragmentFile {
    fn from(f: GptFragment) -> Self {
        FragmentFile {
            dimension: f.dimension,
            states: to_mat(&f.states),
            effects: to_mat(&f.effects),
            unit_effect: rats(&f.unit_effect),
            measurements: f.measurements,
            transformations: f.transformations.iter().map(|t| to_mat(t)).collect(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepFile {
    #[serde(default)]
    lambda_count: Option<usize>,
    mu: Vec<Vec<Rat>>,
    xi: Vec<Vec<Rat>>,
    #[serde(default)]
    gamma: Option<Vec<Vec<Vec<Rat>>>>,
}

impl From<RepFile> for OnticRepresentation {
    fn from(r: RepFile) -> Self {
        OnticRepresentation {
            lambda_count: r.lambda_count.unwrap_or(r.mu.len()),
            mu: mat(r.mu),
            xi: mat(r.xi),
            gamma: r.gamma.map(|g| g.into_iter().map(mat).collect()),
        }
    }
}

/// Outcome counts: one number for all measurements, or per measurement name.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcomes {
    Uniform(usize),
    Named(BTreeMap<String, usize>),
}

/// Tables aligned with the context list, or keyed by comma-joined names.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tables {
    Aligned(Vec<Vec<Rat>>),
    Keyed(BTreeMap<String, Vec<Rat>>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    hypergraph: Vec<Vec<String>>,
    outcomes: Outcomes,
    tables: Tables,
}

impl TryFrom<ModelFile> for EmpiricalModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        let h = CompatibilityHypergraph::from_named(&f.hypergraph)?;
        let outcomes = match f.outcomes {
            Outcomes::Uniform(k) => vec![k; h.measurements.len()],
            Outcomes::Named(map) => h
                .measurements
                .iter()
                .map(|m| {
                    map.get(m)
                        .copied()
                        .ok_or_else(|| Error::Parse(format!("no outcome count for {m:?}")))
                })
                .collect::<Result<_>>()?,
        };
        let tables = match f.tables {
            Tables::Aligned(t) => mat(t),
            Tables::Keyed(mut map) => f
                .hypergraph
                .iter()
                .map(|ctx| {
                    let key = ctx.join(",");
                    map.remove(&key)
                        .map(unrats)
                        .ok_or_else(|| Error::Parse(format!("no table for context {key:?}")))
                })
                .collect::<Result<_>>()?,
        };
        EmpiricalModel::new(h, outcomes, tables)
    }
}

impl From<EmpiricalModel> for ModelFile {
    fn from(m: EmpiricalModel) -> Self {
        let h = &m.hypergraph;
        let outcomes = if m.outcomes.windows(2).all(|w| w[0] == w[1]) && !m.outcomes.is_empty() {
            Outcomes::Uniform(m.outcomes[0])
        } else {
            Outcomes::Named(h.measurements.iter().cloned().zip(m.outcomes.iter().copied()).collect())
        };
        ModelFile {
            hypergraph: h.contexts.iter().map(|c| h.names(c)).collect(),
            outcomes,
            tables: Tables::Aligned(to_mat(&m.tables)),
        }
    }
}

/// Hypergraph input: a bare list of contexts or `{"contexts": [...]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum HypergraphFile {
    Bare(Vec<Vec<String>>),
    Wrapped { contexts: Vec<Vec<String>> },
}

pub fn hypergraph_from_json(text: &str) -> Result<CompatibilityHypergraph> {
    let contexts = match serde_json::from_str(text)? {
        HypergraphFile::Bare(c) | HypergraphFile::Wrapped { contexts: c } => c,
    };
    CompatibilityHypergraph::from_named(&contexts)
}

/// Complex input: list of maximal simplices; faces are generated.
pub fn complex_from_json(text: &str) -> Result<SimplicialComplex> {
    let maximal: Vec<Vec<usize>> = serde_json::from_str(text)?;
    SimplicialComplex::from_maximal(&maximal)
}

pub fn complex_to_json(k: &SimplicialComplex) -> String {
    to_json(&k.maximal())
}

fn keyed(text: &str) -> Result<(usize, BTreeMap<Vec<usize>, Q>)> {
    let raw: BTreeMap<String, Rat> = serde_json::from_str(text)?;
    let mut degree = None;
    let mut out = BTreeMap::new();
    for (k, v) in raw {
        let s = parse_simplex_key(&k)?;
        let d = s.len() - 1;
        if *degree.get_or_insert(d) != d {
            return Err(Error::Parse("keys of mixed degree".into()));
        }
        out.insert(s, v.0);
    }
    Ok((degree.unwrap_or(0), out))
}

/// Cochain input: map from `"a.b.c"` keys to rationals. The degree is read
/// from the keys (0 for an empty map unless given).
pub fn cochain_from_json(text: &str, degree: Option<usize>) -> Result<Cochain> {
    let (d, values) = keyed(text)?;
    let mut w = Cochain::zero(if values.is_empty() { degree.unwrap_or(d) } else { d });
    for (s, v) in values {
        w.add(&s, v)?;
    }
    Ok(w)
}

pub fn chain_from_json(text: &str, degree: Option<usize>) -> Result<Chain> {
    let (d, coeffs) = keyed(text)?;
    let mut c = Chain::zero(if coeffs.is_empty() { degree.unwrap_or(d) } else { d });
    for (s, v) in coeffs {
        c.add(&s, v)?;
    }
    Ok(c)
}

pub fn cochain_map(w: &Cochain) -> BTreeMap<String, String> {
    w.values
        .iter()
        .map(|(s, v)| (simplex_key(s), crate::rational::format(v)))
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureFile {
    atoms: Vec<String>,
    p: BTreeMap<String, Rat>,
}

/// Event measure input: `{"atoms": [...], "p": {"A": "1/4", "A,B": "1/2"}}`.
pub fn measure_from_json(text: &str) -> Result<EventMeasure<Q>> {
    let f: MeasureFile = serde_json::from_str(text)?;
    let mut m = EventMeasure::new(f.atoms);
    for (key, v) in f.p {
        let e: Event = key
            .split(',')
            .map(|name| {
                let name = name.trim();
                m.atoms
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| Error::Parse(format!("unknown atom {name:?}")))
            })
            .collect::<Result<_>>()?;
        m.set(e, v.0)?;
    }
    Ok(m)
}

pub fn measure_to_json(m: &EventMeasure<Q>) -> String {
    let p: BTreeMap<String, String> = m
        .p
        .iter()
        .map(|(e, v)| {
            let names: Vec<&str> = e.iter().map(|&a| m.atoms[a].as_str()).collect();
            (names.join(","), crate::rational::format(v))
        })
        .collect();
    to_json(&serde_json::json!({ "atoms": m.atoms, "p": p }))
}
