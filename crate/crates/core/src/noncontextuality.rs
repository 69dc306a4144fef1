//! Exact linear programs for noncontextuality: response polytope, simplex
//! embedding feasibility, contextual fraction and minimal negativity.
//!
//! The ontic space of the feasibility and negativity programs is the vertex
//! set of the response polytope. Any noncontextual valuation lies in that
//! polytope, so a mixture over arbitrary valuations can be rewritten as a
//! mixture over its vertices without changing what it predicts.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::connection::{self, ObjectComplex};
use crate::ddg;
use crate::disturbance;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpSolution, LpStatus, Relation, Sense};
use crate::model::{EmpiricalModel, GptFragment, OnticRepresentation, OperationalEquivalence};
use crate::polytope::{self, HPolytope};
use crate::rational::{ser, Q};

/// Desk-scale limits for vertex enumeration and global-assignment LPs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScaleCap {
    pub effects: usize,
    pub equivalences: usize,
    pub global_assignments: usize,
}

impl Default for ScaleCap {
    fn default() -> Self {
        ScaleCap {
            effects: 20,
            equivalences: 12,
            global_assignments: 4096,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResponsePolytope {
    #[serde(serialize_with = "ser::mat")]
    pub vertices: Vec<Vec<Q>>,
    #[serde(skip)]
    pub constraints: HPolytope,
}

impl ResponsePolytope {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Vertices of `{ξ : 0 <= ξ <= 1, Σ_{r∈M} ξ_r = 1, Σ_r b_r ξ_r = 0}`.
pub fn response_vertices(
    f: &GptFragment,
    effect_eqs: &[OperationalEquivalence],
    cap: ScaleCap,
) -> Result<ResponsePolytope> {
    let n = f.effects.len();
    if f.measurements.is_empty() {
        return Err(Error::Precondition("fragment has no measurements".into()));
    }
    if n > cap.effects {
        return Err(Error::ScaleCap {
            what: "effects",
            found: n,
            cap: cap.effects,
        });
    }
    if effect_eqs.len() > cap.equivalences {
        return Err(Error::ScaleCap {
            what: "effect equivalences",
            found: effect_eqs.len(),
            cap: cap.equivalences,
        });
    }
    let mut p = HPolytope::new(n);
    for r in 0..n {
        let mut e = vec![Q::zero(); n];
        e[r] = Q::one();
        p.inequalities.push((e.clone(), Q::one()));
        e[r] = -Q::one();
        p.inequalities.push((e, Q::zero()));
    }
    for m in &f.measurements {
        let mut row = vec![Q::zero(); n];
        for &r in m {
            let slot = row.get_mut(r).ok_or(Error::Index {
                what: "effect",
                index: r,
                len: n,
            })?;
            *slot += Q::one();
        }
        p.equalities.push((row, Q::one()));
    }
    for eq in effect_eqs {
        let mut row = vec![Q::zero(); n];
        for (&r, b) in &eq.coefficients {
            let slot = row.get_mut(r).ok_or(Error::Index {
                what: "effect",
                index: r,
                len: n,
            })?;
            *slot = b.clone();
        }
        p.equalities.push((row, Q::zero()));
    }
    Ok(ResponsePolytope {
        vertices: polytope::vertices(&p)?,
        constraints: p,
    })
}

fn prepare_measure_only(f: &GptFragment) -> Result<()> {
    if f.transformations.is_empty() {
        Ok(())
    } else {
        Err(Error::Unsupported(
            "fragments with transformations have no noncontextuality LP".into(),
        ))
    }
}

/// Rows shared by the feasibility and negativity programs. Variable
/// `l * S + s` (plus `offset`) stands for `μ(λ_l|P_s)`; with `signed` each
/// variable appears again at `+ half` with the opposite sign.
fn embedding_constraints(
    lp: &mut LinearProgram,
    f: &GptFragment,
    state_eqs: &[OperationalEquivalence],
    lambda: &[Vec<Q>],
    signed: Option<usize>,
) -> Result<()> {
    let s_count = f.states.len();
    let var = |l: usize, s: usize| l * s_count + s;
    let term = |j: usize, k: Q| -> Vec<(usize, Q)> {
        match signed {
            Some(half) => vec![(j, k.clone()), (j + half, -k)],
            None => vec![(j, k)],
        }
    };
    for s in 0..s_count {
        let row = (0..lambda.len()).flat_map(|l| term(var(l, s), Q::one()));
        lp.add(row.collect::<Vec<_>>(), Relation::Eq, Q::one());
    }
    for eq in state_eqs {
        if let Some(&bad) = eq.coefficients.keys().find(|&&s| s >= s_count) {
            return Err(Error::Index {
                what: "state",
                index: bad,
                len: s_count,
            });
        }
        for l in 0..lambda.len() {
            let row = eq.coefficients.iter().flat_map(|(&s, a)| term(var(l, s), a.clone()));
            lp.add(row.collect::<Vec<_>>(), Relation::Eq, Q::zero());
        }
    }
    for r in 0..f.effects.len() {
        for s in 0..s_count {
            let row = (0..lambda.len())
                .filter(|&l| !lambda[l][r].is_zero())
                .flat_map(|l| term(var(l, s), lambda[l][r].clone()));
            lp.add(row.collect::<Vec<_>>(), Relation::Eq, f.probability(s, None, r)?);
        }
    }
    Ok(())
}

/// Result of the simplex-embedding feasibility program.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NcLp {
    pub solution: LpSolution,
    #[serde(serialize_with = "ser::mat")]
    pub ontic_states: Vec<Vec<Q>>,
    /// The noncontextual model found, when feasible.
    pub witness: Option<OnticRepresentation>,
}

impl NcLp {
    pub fn is_noncontextual(&self) -> bool {
        self.solution.status == LpStatus::Optimal
    }
}

/// Looks for `μ(λ|P_s) >= 0` over the response-polytope vertices that
/// reproduces the statistics and respects every state equivalence.
pub fn noncontextual_lp(
    f: &GptFragment,
    state_eqs: &[OperationalEquivalence],
    effect_eqs: &[OperationalEquivalence],
    cap: ScaleCap,
) -> Result<NcLp> {
    prepare_measure_only(f)?;
    let poly = response_vertices(f, effect_eqs, cap)?;
    let lambda = poly.vertices;
    let s_count = f.states.len();
    let mut lp = LinearProgram::new(lambda.len() * s_count, Sense::Minimize);
    embedding_constraints(&mut lp, f, state_eqs, &lambda, None)?;
    let solution = lp.solve();
    let witness = solution.is_optimal().then(|| OnticRepresentation {
        lambda_count: lambda.len(),
        mu: (0..lambda.len())
            .map(|l| solution.assignment[l * s_count..(l + 1) * s_count].to_vec())
            .collect(),
        xi: (0..f.effects.len())
            .map(|r| lambda.iter().map(|v| v[r].clone()).collect())
            .collect(),
        gamma: None,
    });
    Ok(NcLp {
        solution,
        ontic_states: lambda,
        witness,
    })
}

/// Checks an infeasibility certificate against a rebuilt copy of the program.
pub fn verify_nc_certificate(
    f: &GptFragment,
    state_eqs: &[OperationalEquivalence],
    nc: &NcLp,
) -> Result<bool> {
    let Some(y) = &nc.solution.certificate else {
        return Ok(false);
    };
    let mut lp = LinearProgram::new(nc.ontic_states.len() * f.states.len(), Sense::Minimize);
    embedding_constraints(&mut lp, f, state_eqs, &nc.ontic_states, None)?;
    Ok(lp.verify_farkas(y))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Negativity {
    pub solution: LpSolution,
    #[serde(serialize_with = "ser::q")]
    pub negativity: Q,
}

/// Minimizes `Σ μ⁻` over quasi-probabilistic embeddings `μ = μ⁺ - μ⁻`
/// subject to the same reproduction and equivalence constraints.
pub fn minimal_negativity(
    f: &GptFragment,
    state_eqs: &[OperationalEquivalence],
    effect_eqs: &[OperationalEquivalence],
    cap: ScaleCap,
) -> Result<Negativity> {
    prepare_measure_only(f)?;
    let lambda = response_vertices(f, effect_eqs, cap)?.vertices;
    let half = lambda.len() * f.states.len();
    let mut lp = LinearProgram::new(2 * half, Sense::Minimize);
    for j in half..2 * half {
        lp.set_objective(j, Q::one());
    }
    embedding_constraints(&mut lp, f, state_eqs, &lambda, Some(half))?;
    let solution = lp.solve();
    let negativity = match (&solution.status, &solution.objective) {
        (LpStatus::Optimal, Some(v)) => v.clone(),
        _ => {
            return Err(Error::Precondition(
                "no quasi-probabilistic embedding reproduces the fragment".into(),
            ))
        }
    };
    Ok(Negativity {
        solution,
        negativity,
    })
}

/// Every joint outcome assignment to all measurements, last measurement
/// fastest.
pub fn global_assignments(m: &EmpiricalModel, cap: ScaleCap) -> Result<Vec<Vec<usize>>> {
    let total = m
        .outcomes
        .iter()
        .try_fold(1usize, |acc, &k| acc.checked_mul(k))
        .filter(|&t| t <= cap.global_assignments);
    let Some(total) = total else {
        return Err(Error::ScaleCap {
            what: "global assignments",
            found: m.outcomes.iter().fold(1usize, |a, &k| a.saturating_mul(k)),
            cap: cap.global_assignments,
        });
    };
    let mut out = Vec::with_capacity(total);
    for mut i in 0..total {
        let mut g = vec![0; m.outcomes.len()];
        for (slot, &k) in g.iter_mut().zip(&m.outcomes).rev() {
            *slot = i % k;
            i /= k;
        }
        out.push(g);
    }
    Ok(out)
}

/// Table index of the restriction of `g` to context `c`.
pub fn restrict(m: &EmpiricalModel, c: usize, g: &[usize]) -> usize {
    let tuple: Vec<usize> = m.context(c).iter().map(|&x| g[x]).collect();
    m.encode(c, &tuple)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FractionReport {
    #[serde(serialize_with = "ser::q")]
    pub ncf: Q,
    #[serde(serialize_with = "ser::q")]
    pub cf: Q,
    #[serde(serialize_with = "ser::q")]
    pub df: Q,
    pub p_nc: Option<EmpiricalModel>,
    pub p_sc: Option<EmpiricalModel>,
    pub p_d: Option<EmpiricalModel>,
    /// The remainder `p_sc` is not checked for strong contextuality.
    pub p_sc_unverified: bool,
    /// Optimal weights on global assignments (the noncontextual witness).
    #[serde(serialize_with = "ser::vec")]
    pub weights: Vec<Q>,
}

fn scaled_tables(tables: &[Vec<Q>], k: &Q) -> Vec<Vec<Q>> {
    tables
        .iter()
        .map(|t| t.iter().map(|x| x * k).collect())
        .collect()
}

/// Tables `Σ_g w(g) [g|C = o]` of a weighted family of global assignments.
pub fn assignment_tables(m: &EmpiricalModel, assignments: &[Vec<usize>], w: &[Q]) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = m.tables.iter().map(|t| vec![Q::zero(); t.len()]).collect();
    for (g, wg) in assignments.iter().zip(w) {
        if wg.is_zero() {
            continue;
        }
        for (c, table) in out.iter_mut().enumerate() {
            table[restrict(m, c, g)] += wg;
        }
    }
    out
}

/// Largest total weight of global assignments whose context marginals stay
/// below the tables of `tables` (defaults to the model's own tables).
pub(crate) fn max_noncontextual_weight(
    m: &EmpiricalModel,
    tables: &[Vec<Q>],
    cap: ScaleCap,
) -> Result<(Vec<Vec<usize>>, Vec<Q>, Q)> {
    let gs = global_assignments(m, cap)?;
    let mut lp = LinearProgram::new(gs.len(), Sense::Maximize);
    for j in 0..gs.len() {
        lp.set_objective(j, Q::one());
    }
    for (c, table) in tables.iter().enumerate() {
        let mut rows: Vec<Vec<(usize, Q)>> = vec![Vec::new(); table.len()];
        for (j, g) in gs.iter().enumerate() {
            rows[restrict(m, c, g)].push((j, Q::one()));
        }
        for (row, p) in rows.into_iter().zip(table) {
            lp.add(row, Relation::Le, p.clone());
        }
    }
    let sol = lp.solve();
    let value = sol
        .objective
        .clone()
        .expect("weight program is feasible (w = 0) and bounded");
    Ok((gs, sol.assignment, value))
}

/// Contextual fraction of a non-disturbing empirical model.
pub fn contextual_fraction(m: &EmpiricalModel) -> Result<FractionReport> {
    contextual_fraction_with(m, ScaleCap::default())
}

pub fn contextual_fraction_with(m: &EmpiricalModel, cap: ScaleCap) -> Result<FractionReport> {
    if let Some(d) = disturbance::detect_disturbance(m).into_iter().next() {
        return Err(Error::Disturbing {
            first: d.contexts.0,
            second: d.contexts.1,
            intersection: d.intersection,
        });
    }
    let (gs, w, ncf) = max_noncontextual_weight(m, &m.tables, cap)?;
    let cf = Q::one() - &ncf;
    let nc_tables = assignment_tables(m, &gs, &w);
    let p_nc = if ncf.is_positive() {
        Some(submodel(m, scaled_tables(&nc_tables, &(Q::one() / &ncf)))?)
    } else {
        None
    };
    let p_sc = if cf.is_positive() {
        let rest: Vec<Vec<Q>> = m
            .tables
            .iter()
            .zip(&nc_tables)
            .map(|(p, q)| p.iter().zip(q).map(|(a, b)| (a - b) / &cf).collect())
            .collect();
        Some(submodel(m, rest)?)
    } else {
        None
    };
    Ok(FractionReport {
        ncf,
        p_sc_unverified: p_sc.is_some(),
        cf,
        df: Q::zero(),
        p_nc,
        p_sc,
        p_d: None,
        weights: w,
    })
}

pub(crate) fn submodel(m: &EmpiricalModel, tables: Vec<Vec<Q>>) -> Result<EmpiricalModel> {
    EmpiricalModel::new(m.hypergraph.clone(), m.outcomes.clone(), tables)
}

/// `NCF·p_NC + CF·p_SC (+ DF·p_D)` table by table.
pub fn recompose(report: &FractionReport) -> Option<Vec<Vec<Q>>> {
    let parts = [
        (&report.ncf, &report.p_nc),
        (&report.cf, &report.p_sc),
        (&report.df, &report.p_d),
    ];
    let mut out: Option<Vec<Vec<Q>>> = None;
    for (k, part) in parts {
        if k.is_zero() {
            continue;
        }
        let tables = scaled_tables(&part.as_ref()?.tables, k);
        out = Some(match out {
            None => tables,
            Some(acc) => acc
                .iter()
                .zip(&tables)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
        });
    }
    out
}

/// `Σ_λ w(λ) Σ_{r∈M} <dc_λ|E_r>`: the weight carried by the exact parts of
/// the valuations `values[λ][r]` on the effects of measurement `M`.
///
/// Effects that lie on no loop have no connection part and contribute their
/// raw valuation.
pub fn ncf_from_connection(
    oc: &ObjectComplex,
    values: &[Vec<Q>],
    weights: &[Q],
    measurement: &[usize],
) -> Result<Q> {
    let mut total = Q::zero();
    for (vals, w) in values.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        let xi = oc.valuation_cochain(|r| vals[r].clone());
        let dec = connection::decompose(oc, &xi)?;
        let dc = ddg::coboundary(&oc.complex, &dec.potential);
        for &r in measurement {
            let v = oc
                .loop_with(r)
                .and_then(|l| oc.object_value(l, r, &dc))
                .unwrap_or_else(|| vals[r].clone());
            total += w * v;
        }
    }
    Ok(total)
}
