//! GPT fragments, operational equivalences, ontic representations and
//! empirical models.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rational::{ser, Q};
use crate::vorobyev::CompatibilityHypergraph;

/// Which family of objects an equivalence or complex talks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    State,
    Effect,
    Transformation,
}

impl std::str::FromStr for ObjectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state" | "states" => Ok(ObjectKind::State),
            "effect" | "effects" => Ok(ObjectKind::Effect),
            "transformation" | "transformations" => Ok(ObjectKind::Transformation),
            other => Err(Error::Parse(format!("unknown object kind {other:?}"))),
        }
    }
}

/// A finite fragment of a generalized probability theory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "crate::io::FragmentFile", into = "crate::io::FragmentFile")]
pub struct GptFragment {
    pub dimension: usize,
    pub states: Vec<Vec<Q>>,
    pub effects: Vec<Vec<Q>>,
    pub unit_effect: Vec<Q>,
    /// Square matrices stored row-major, acting on states.
    pub transformations: Vec<Matrix>,
    /// Each entry lists the effect indices of one complete measurement.
    pub measurements: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Normalization {
        state: usize,
        #[serde(serialize_with = "ser::q")]
        value: Q,
    },
    Range {
        state: usize,
        transformation: Option<usize>,
        effect: usize,
        #[serde(serialize_with = "ser::q")]
        value: Q,
    },
    Completeness {
        measurement: usize,
        component: usize,
        #[serde(serialize_with = "ser::q")]
        sum: Q,
        #[serde(serialize_with = "ser::q")]
        expected: Q,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl GptFragment {
    fn check_structure(&self) -> Result<()> {
        let d = self.dimension;
        if d == 0 {
            return Err(Error::Structural("dimension must be positive".into()));
        }
        let check = |what: &str, i: usize, v: &[Q]| {
            if v.len() == d {
                Ok(())
            } else {
                Err(Error::Structural(format!(
                    "{what} {i} has length {} but dimension is {d}",
                    v.len()
                )))
            }
        };
        for (i, s) in self.states.iter().enumerate() {
            check("state", i, s)?;
        }
        for (i, e) in self.effects.iter().enumerate() {
            check("effect", i, e)?;
        }
        check("unit effect", 0, &self.unit_effect)?;
        for (t, m) in self.transformations.iter().enumerate() {
            if m.len() != d {
                return Err(Error::Structural(format!(
                    "transformation {t} has {} rows but dimension is {d}",
                    m.len()
                )));
            }
            for row in m {
                check("transformation row of", t, row)?;
            }
        }
        for (k, m) in self.measurements.iter().enumerate() {
            if m.is_empty() {
                return Err(Error::Structural(format!("measurement {k} is empty")));
            }
            for &r in m {
                if r >= self.effects.len() {
                    return Err(Error::Index {
                        what: "effect",
                        index: r,
                        len: self.effects.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Checks normalization, the probability range and measurement completeness.
    ///
    /// Structural problems (wrong lengths, dangling indices) are returned as
    /// errors; violated invariants are collected into the report.
    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_structure()?;
        let mut violations = Vec::new();
        for (s, state) in self.states.iter().enumerate() {
            let norm = linalg::dot(&self.unit_effect, state);
            if !norm.is_one() {
                violations.push(Violation::Normalization { state: s, value: norm });
            }
        }
        let zero = Q::zero();
        let one = Q::one();
        for s in 0..self.states.len() {
            for t in std::iter::once(None).chain((0..self.transformations.len()).map(Some)) {
                for r in 0..self.effects.len() {
                    let p = self.probability(s, t, r)?;
                    if p < zero || p > one {
                        violations.push(Violation::Range {
                            state: s,
                            transformation: t,
                            effect: r,
                            value: p,
                        });
                    }
                }
            }
        }
        for (k, m) in self.measurements.iter().enumerate() {
            for c in 0..self.dimension {
                let sum = m.iter().fold(Q::zero(), |acc, &r| acc + &self.effects[r][c]);
                if sum != self.unit_effect[c] {
                    violations.push(Violation::Completeness {
                        measurement: k,
                        component: c,
                        sum,
                        expected: self.unit_effect[c].clone(),
                    });
                }
            }
        }
        Ok(ValidationReport { violations })
    }

    /// `<E_r, T_t P_s>`, with `t = None` meaning the identity.
    pub fn probability(&self, s: usize, t: Option<usize>, r: usize) -> Result<Q> {
        let state = self.states.get(s).ok_or(Error::Index {
            what: "state",
            index: s,
            len: self.states.len(),
        })?;
        let effect = self.effects.get(r).ok_or(Error::Index {
            what: "effect",
            index: r,
            len: self.effects.len(),
        })?;
        match t {
            None => Ok(linalg::dot(effect, state)),
            Some(t) => {
                let m = self.transformations.get(t).ok_or(Error::Index {
                    what: "transformation",
                    index: t,
                    len: self.transformations.len(),
                })?;
                Ok(linalg::dot(effect, &linalg::mat_vec(m, state)))
            }
        }
    }

    pub fn objects(&self, kind: ObjectKind) -> Vec<Vec<Q>> {
        match kind {
            ObjectKind::State => self.states.clone(),
            ObjectKind::Effect => self.effects.clone(),
            ObjectKind::Transformation => self
                .transformations
                .iter()
                .map(|m| m.iter().flatten().cloned().collect())
                .collect(),
        }
    }

    pub fn object_count(&self, kind: ObjectKind) -> usize {
        match kind {
            ObjectKind::State => self.states.len(),
            ObjectKind::Effect => self.effects.len(),
            ObjectKind::Transformation => self.transformations.len(),
        }
    }

    pub fn equivalences(&self, kind: ObjectKind) -> Vec<OperationalEquivalence> {
        let objects = self.objects(kind);
        if objects.is_empty() {
            return Vec::new();
        }
        find_equivalences(kind, &objects)
    }
}

/// An exact linear dependency `sum_i k_i v_i = 0` among objects of one kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OperationalEquivalence {
    pub kind: ObjectKind,
    #[serde(serialize_with = "ser::map")]
    pub coefficients: BTreeMap<usize, Q>,
}

impl OperationalEquivalence {
    pub fn new(kind: ObjectKind, coefficients: impl IntoIterator<Item = (usize, Q)>) -> Self {
        let coefficients = coefficients
            .into_iter()
            .filter(|(_, k)| !k.is_zero())
            .collect();
        OperationalEquivalence { kind, coefficients }
    }

    /// `sum_i k_i v_i` over the given object vectors.
    pub fn residual(&self, vectors: &[Vec<Q>]) -> Result<Vec<Q>> {
        let dim = vectors.first().map_or(0, Vec::len);
        let mut acc = vec![Q::zero(); dim];
        for (&i, k) in &self.coefficients {
            let v = vectors.get(i).ok_or(Error::Index {
                what: "object",
                index: i,
                len: vectors.len(),
            })?;
            for (a, x) in acc.iter_mut().zip(v) {
                *a += k * x;
            }
        }
        Ok(acc)
    }

    /// `sum_i k_i f(i)` for a scalar valuation of the objects.
    pub fn pair_with(&self, valuation: impl Fn(usize) -> Q) -> Q {
        self.coefficients
            .iter()
            .fold(Q::zero(), |acc, (&i, k)| acc + k * valuation(i))
    }
}

/// Canonical rational basis of the linear dependencies among `vectors`.
///
/// Basis vectors come from the reduced row-echelon form of the matrix whose
/// columns are the vectors, one per free column, scaled so the first nonzero
/// coefficient is `+1`.
pub fn find_equivalences(kind: ObjectKind, vectors: &[Vec<Q>]) -> Vec<OperationalEquivalence> {
    let dim = vectors.first().map_or(0, Vec::len);
    let m = linalg::from_columns(vectors, dim);
    linalg::nullspace(&m, vectors.len())
        .into_iter()
        .map(|v| OperationalEquivalence::new(kind, v.into_iter().enumerate()))
        .collect()
}

/// A finite ontic model: `mu[l][s]`, `xi[r][l]` and optionally
/// `gamma[l2][t][l]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "crate::io::RepFile")]
pub struct OnticRepresentation {
    pub lambda_count: usize,
    #[serde(serialize_with = "ser::mat")]
    pub mu: Vec<Vec<Q>>,
    #[serde(serialize_with = "ser::mat")]
    pub xi: Vec<Vec<Q>>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_gamma")]
    pub gamma: Option<Vec<Vec<Vec<Q>>>>,
}

fn ser_gamma<S: serde::Serializer>(
    g: &Option<Vec<Vec<Vec<Q>>>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let g: Option<Vec<Vec<Vec<String>>>> = g.as_ref().map(|g| {
        g.iter()
            .map(|m| m.iter().map(|r| r.iter().map(crate::rational::format).collect()).collect())
            .collect()
    });
    serde::Serialize::serialize(&g, s)
}

impl OnticRepresentation {
    pub fn check_shape(&self, f: &GptFragment) -> Result<()> {
        let n = self.lambda_count;
        let bad = |msg: String| Err(Error::Shape(msg));
        if self.mu.len() != n || self.mu.iter().any(|r| r.len() != f.states.len()) {
            return bad(format!("mu must be {n} x {}", f.states.len()));
        }
        if self.xi.len() != f.effects.len() || self.xi.iter().any(|r| r.len() != n) {
            return bad(format!("xi must be {} x {n}", f.effects.len()));
        }
        if let Some(g) = &self.gamma {
            let t = f.transformations.len();
            if g.len() != n || g.iter().any(|m| m.len() != t || m.iter().any(|r| r.len() != n)) {
                return bad(format!("gamma must be {n} x {t} x {n}"));
            }
        }
        Ok(())
    }

    /// Predicted `p(E_r | T_t, P_s)` by the chain rule.
    pub fn predict(&self, s: usize, t: Option<usize>, r: usize) -> Q {
        let n = self.lambda_count;
        match (t, &self.gamma) {
            (Some(t), Some(g)) => {
                let mut acc = Q::zero();
                for l2 in 0..n {
                    for l in 0..n {
                        acc += &self.xi[r][l2] * &g[l2][t][l] * &self.mu[l][s];
                    }
                }
                acc
            }
            _ => (0..n).fold(Q::zero(), |acc, l| acc + &self.xi[r][l] * &self.mu[l][s]),
        }
    }

    /// Valuation of object `i` of `kind` at ontic index `lambda` (and `lambda2`
    /// for transformations).
    pub fn valuation(&self, kind: ObjectKind, i: usize, lambda: usize, lambda2: usize) -> Q {
        match kind {
            ObjectKind::State => self.mu[lambda][i].clone(),
            ObjectKind::Effect => self.xi[i][lambda].clone(),
            ObjectKind::Transformation => self
                .gamma
                .as_ref()
                .map_or_else(Q::zero, |g| g[lambda2][i][lambda].clone()),
        }
    }

    /// Sums of the stochasticity constraints that fail, as human-readable lines.
    pub fn normalization_defects(&self, f: &GptFragment) -> Vec<String> {
        let mut out = Vec::new();
        for s in 0..f.states.len() {
            let sum = (0..self.lambda_count).fold(Q::zero(), |a, l| a + &self.mu[l][s]);
            if !sum.is_one() {
                out.push(format!("sum_l mu(l|P{s}) = {sum}"));
            }
        }
        for (k, m) in f.measurements.iter().enumerate() {
            for l in 0..self.lambda_count {
                let sum = m.iter().fold(Q::zero(), |a, &r| a + &self.xi[r][l]);
                if !sum.is_one() {
                    out.push(format!("measurement {k}: sum xi(.|{l}) = {sum}"));
                }
            }
        }
        if let Some(g) = &self.gamma {
            for t in 0..f.transformations.len() {
                for l in 0..self.lambda_count {
                    let sum = (0..self.lambda_count).fold(Q::zero(), |a, l2| a + &g[l2][t][l]);
                    if !sum.is_one() {
                        out.push(format!("sum_l' gamma(l'|T{t},{l}) = {sum}"));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseResidual {
    pub equivalence: usize,
    pub kind: ObjectKind,
    pub lambda: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_out: Option<usize>,
    #[serde(serialize_with = "ser::q")]
    pub phase: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearityResidual {
    pub left: usize,
    pub right: usize,
    pub sum: usize,
    pub lambda: usize,
    #[serde(serialize_with = "ser::q")]
    pub residual: Q,
}

/// Outcome of checking a supplied ontic representation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NcReport {
    #[serde(serialize_with = "ser::q")]
    pub max_reproduction_error: Q,
    pub phases: Vec<PhaseResidual>,
    pub linearity: Vec<LinearityResidual>,
    pub normalization_defects: Vec<String>,
}

impl NcReport {
    /// Residual phases that are nonzero.
    pub fn flagged(&self) -> impl Iterator<Item = &PhaseResidual> {
        self.phases.iter().filter(|p| !p.phase.is_zero())
    }

    pub fn reproduces(&self) -> bool {
        self.max_reproduction_error.is_zero()
    }

    pub fn is_noncontextual(&self) -> bool {
        self.reproduces()
            && self.flagged().next().is_none()
            && self.linearity.iter().all(|l| l.residual.is_zero())
    }
}

/// Checks reproduction of the fragment's statistics, the residual phase of
/// every equivalence at every ontic index, and additivity of the effect
/// valuation on triples with `E_a + E_b = E_c`.
pub fn verify_ontic(
    f: &GptFragment,
    rep: &OnticRepresentation,
    eqs: &[OperationalEquivalence],
) -> Result<NcReport> {
    rep.check_shape(f)?;
    let n = rep.lambda_count;

    let mut max_err = Q::zero();
    let with_gamma = rep.gamma.is_some();
    for s in 0..f.states.len() {
        let ts = std::iter::once(None).chain(
            (0..if with_gamma { f.transformations.len() } else { 0 }).map(Some),
        );
        for t in ts {
            for r in 0..f.effects.len() {
                let err = (f.probability(s, t, r)? - rep.predict(s, t, r)).abs();
                if err > max_err {
                    max_err = err;
                }
            }
        }
    }

    let mut phases = Vec::new();
    for (id, eq) in eqs.iter().enumerate() {
        let count = f.object_count(eq.kind);
        if let Some((&i, _)) = eq.coefficients.iter().find(|(&i, _)| i >= count) {
            return Err(Error::Index {
                what: "object",
                index: i,
                len: count,
            });
        }
        match eq.kind {
            ObjectKind::Transformation => {
                if rep.gamma.is_none() {
                    continue;
                }
                for l2 in 0..n {
                    for l in 0..n {
                        phases.push(PhaseResidual {
                            equivalence: id,
                            kind: eq.kind,
                            lambda: l,
                            lambda_out: Some(l2),
                            phase: eq.pair_with(|t| rep.valuation(eq.kind, t, l, l2)),
                        });
                    }
                }
            }
            kind => {
                for l in 0..n {
                    phases.push(PhaseResidual {
                        equivalence: id,
                        kind,
                        lambda: l,
                        lambda_out: None,
                        phase: eq.pair_with(|i| rep.valuation(kind, i, l, 0)),
                    });
                }
            }
        }
    }

    let mut linearity = Vec::new();
    let e = &f.effects;
    for a in 0..e.len() {
        for b in a..e.len() {
            let sum: Vec<Q> = e[a].iter().zip(&e[b]).map(|(x, y)| x + y).collect();
            for (c, ec) in e.iter().enumerate() {
                if *ec == sum {
                    for l in 0..n {
                        linearity.push(LinearityResidual {
                            left: a,
                            right: b,
                            sum: c,
                            lambda: l,
                            residual: &rep.xi[c][l] - &rep.xi[a][l] - &rep.xi[b][l],
                        });
                    }
                }
            }
        }
    }

    Ok(NcReport {
        max_reproduction_error: max_err,
        phases,
        linearity,
        normalization_defects: rep.normalization_defects(f),
    })
}

/// Joint outcome tables over the contexts of a compatibility hypergraph.
///
/// Table entries are row-major over the context's measurement order, last
/// measurement fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::io::ModelFile", into = "crate::io::ModelFile")]
pub struct EmpiricalModel {
    pub hypergraph: CompatibilityHypergraph,
    pub outcomes: Vec<usize>,
    pub tables: Vec<Vec<Q>>,
}

impl EmpiricalModel {
    pub fn new(
        hypergraph: CompatibilityHypergraph,
        outcomes: Vec<usize>,
        tables: Vec<Vec<Q>>,
    ) -> Result<Self> {
        let m = EmpiricalModel {
            hypergraph,
            outcomes,
            tables,
        };
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        let h = &self.hypergraph;
        if self.outcomes.len() != h.measurements.len() {
            return Err(Error::Shape(format!(
                "{} outcome counts for {} measurements",
                self.outcomes.len(),
                h.measurements.len()
            )));
        }
        if self.outcomes.iter().any(|&k| k == 0) {
            return Err(Error::Shape("every measurement needs an outcome".into()));
        }
        if self.tables.len() != h.contexts.len() {
            return Err(Error::Shape(format!(
                "{} tables for {} contexts",
                self.tables.len(),
                h.contexts.len()
            )));
        }
        for (c, table) in self.tables.iter().enumerate() {
            let size = self.context_size(c);
            if table.len() != size {
                return Err(Error::Shape(format!(
                    "context {c} table has {} entries, expected {size}",
                    table.len()
                )));
            }
            if table.iter().any(Signed::is_negative) {
                return Err(Error::Shape(format!("context {c} has a negative entry")));
            }
            let total = table.iter().fold(Q::zero(), |a, x| a + x);
            if !total.is_one() {
                return Err(Error::Shape(format!("context {c} sums to {total}, not 1")));
            }
        }
        Ok(())
    }

    pub fn context(&self, c: usize) -> &[usize] {
        &self.hypergraph.contexts[c]
    }

    pub fn context_size(&self, c: usize) -> usize {
        self.context(c).iter().map(|&m| self.outcomes[m]).product()
    }

    /// Outcome tuple for a flat row-major index within context `c`.
    pub fn decode(&self, c: usize, mut index: usize) -> Vec<usize> {
        let ctx = self.context(c);
        let mut out = vec![0; ctx.len()];
        for (k, &m) in ctx.iter().enumerate().rev() {
            out[k] = index % self.outcomes[m];
            index /= self.outcomes[m];
        }
        out
    }

    pub fn encode(&self, c: usize, tuple: &[usize]) -> usize {
        self.context(c)
            .iter()
            .zip(tuple)
            .fold(0, |acc, (&m, &o)| acc * self.outcomes[m] + o)
    }

    /// Marginal of context `c` onto the measurements `sub` (all of which must
    /// belong to the context), row-major in the order of `sub`.
    pub fn marginal(&self, c: usize, sub: &[usize]) -> Vec<Q> {
        let ctx = self.context(c);
        let positions: Vec<usize> = sub
            .iter()
            .map(|m| ctx.iter().position(|x| x == m).expect("measurement not in context"))
            .collect();
        let size: usize = sub.iter().map(|&m| self.outcomes[m]).product();
        let mut out = vec![Q::zero(); size];
        for (i, p) in self.tables[c].iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let tuple = self.decode(c, i);
            let j = positions
                .iter()
                .zip(sub)
                .fold(0, |acc, (&pos, &m)| acc * self.outcomes[m] + tuple[pos]);
            out[j] += p;
        }
        out
    }

    pub fn measurement_name(&self, m: usize) -> &str {
        &self.hypergraph.measurements[m]
    }

    /// Pointwise convex combination `t * self + (1 - t) * other` of two models
    /// on the same scenario.
    pub fn mix(&self, t: &Q, other: &EmpiricalModel) -> Result<EmpiricalModel> {
        if self.hypergraph != other.hypergraph || self.outcomes != other.outcomes {
            return Err(Error::Shape("mixing models on different scenarios".into()));
        }
        let s = Q::one() - t;
        let tables = self
            .tables
            .iter()
            .zip(&other.tables)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| t * x + &s * y).collect())
            .collect();
        EmpiricalModel::new(self.hypergraph.clone(), self.outcomes.clone(), tables)
    }
}
