//! Disturbance: context marginals that disagree on shared measurements.
//!
//! Detects it, removes it by splitting the shared measurements into
//! per-context copies, carries it as a separate cochain `η` next to the
//! connection, and measures it as the smallest mass that has to move to make
//! the model non-disturbing.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::connection::{least_squares_potential, ConnectionDecomposition, ObjectComplex};
use crate::ddg::{self, Cochain};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation, Sense};
use crate::model::EmpiricalModel;
use crate::noncontextuality::{
    assignment_tables, global_assignments, restrict, submodel, FractionReport, ScaleCap,
};
use crate::rational::{ser, Q};
use crate::vorobyev::CompatibilityHypergraph;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisturbanceRecord {
    pub contexts: (usize, usize),
    pub intersection: Vec<String>,
    /// Largest absolute difference between the two marginals.
    #[serde(serialize_with = "ser::q")]
    pub gap: Q,
}

fn intersection(m: &EmpiricalModel, a: usize, b: usize) -> Vec<usize> {
    let other: BTreeSet<usize> = m.context(b).iter().copied().collect();
    let mut shared: Vec<usize> = m.context(a).iter().copied().filter(|x| other.contains(x)).collect();
    shared.sort_unstable();
    shared
}

/// Every pair of contexts whose marginals on the shared measurements differ.
pub fn detect_disturbance(m: &EmpiricalModel) -> Vec<DisturbanceRecord> {
    let n = m.hypergraph.contexts.len();
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let shared = intersection(m, a, b);
            if shared.is_empty() {
                continue;
            }
            let pa = m.marginal(a, &shared);
            let pb = m.marginal(b, &shared);
            let gap = pa
                .iter()
                .zip(&pb)
                .map(|(x, y)| (x - y).abs())
                .max()
                .unwrap_or_else(Q::zero);
            if gap.is_positive() {
                out.push(DisturbanceRecord {
                    contexts: (a, b),
                    intersection: m.hypergraph.names(&shared),
                    gap,
                });
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CopyEntry {
    pub copy: String,
    pub original: String,
    /// Context owning the copy; `None` when the measurement was not split.
    pub context: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extension {
    pub model: EmpiricalModel,
    pub mapping: Vec<CopyEntry>,
}

/// Name of the copy of `name` owned by context `c` (1-based in the label).
pub fn copy_name(name: &str, c: usize) -> String {
    format!("{name}@C{}", c + 1)
}

/// Splits every measurement in a disturbing intersection into one copy per
/// context that contains it. Tables are kept as they are, so each context
/// sees its own copy with its own statistics.
pub fn extend_scenario(m: &EmpiricalModel) -> Result<Extension> {
    let split: BTreeSet<usize> = detect_disturbance(m)
        .iter()
        .flat_map(|d| intersection(m, d.contexts.0, d.contexts.1))
        .collect();
    let h = &m.hypergraph;
    let named: Vec<Vec<String>> = h
        .contexts
        .iter()
        .enumerate()
        .map(|(c, ctx)| {
            ctx.iter()
                .map(|&x| {
                    if split.contains(&x) {
                        copy_name(&h.measurements[x], c)
                    } else {
                        h.measurements[x].clone()
                    }
                })
                .collect()
        })
        .collect();
    let hypergraph = CompatibilityHypergraph::from_named(&named)?;
    let mut mapping = Vec::new();
    let mut outcomes = vec![0; hypergraph.measurements.len()];
    for (c, ctx) in h.contexts.iter().enumerate() {
        for (k, &x) in ctx.iter().enumerate() {
            let new = hypergraph.contexts[c][k];
            outcomes[new] = m.outcomes[x];
            if split.contains(&x) {
                mapping.push(CopyEntry {
                    copy: named[c][k].clone(),
                    original: h.measurements[x].clone(),
                    context: Some(c),
                });
            }
        }
    }
    for (x, name) in h.measurements.iter().enumerate() {
        if !split.contains(&x) {
            mapping.push(CopyEntry {
                copy: name.clone(),
                original: name.clone(),
                context: None,
            });
        }
    }
    let model = EmpiricalModel::new(hypergraph, outcomes, m.tables.clone())?;
    Ok(Extension { model, mapping })
}

/// Chart assignment for the vertices of an object complex and the marginal
/// gap carried across each pair of charts. Vertices not listed sit in chart 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChartMap {
    pub chart: BTreeMap<usize, usize>,
    /// Keyed by `(lower chart, higher chart)`.
    pub gaps: BTreeMap<(usize, usize), Q>,
}

impl ChartMap {
    pub fn chart_of(&self, v: usize) -> usize {
        self.chart.get(&v).copied().unwrap_or(0)
    }

    /// `η`: the gap on every edge that crosses charts, positive when the edge
    /// runs from the lower chart to the higher one.
    pub fn eta(&self, oc: &ObjectComplex) -> Cochain {
        let mut eta = Cochain::zero(1);
        for e in oc.complex.simplices(1) {
            let (a, b) = (self.chart_of(e[0]), self.chart_of(e[1]));
            if a == b {
                continue;
            }
            let key = (a.min(b), a.max(b));
            let Some(gap) = self.gaps.get(&key).filter(|g| !g.is_zero()) else {
                continue;
            };
            let v = if a < b { gap.clone() } else { -gap.clone() };
            eta.values.insert(e.clone(), v);
        }
        eta
    }
}

/// `ξ = dc + ω + η` with `η` read off the chart map and `c` the least-squares
/// potential of `ξ - η`.
pub fn decompose_with_eta(
    oc: &ObjectComplex,
    xi: &Cochain,
    charts: &ChartMap,
) -> Result<ConnectionDecomposition> {
    if xi.degree != 1 {
        return Err(Error::Degree {
            expected: 1,
            found: xi.degree,
        });
    }
    xi.check_in(&oc.complex)?;
    let eta = charts.eta(oc);
    let rest = xi.minus(&eta)?;
    let potential = least_squares_potential(&oc.complex, &rest);
    let connection = rest.minus(&ddg::coboundary(&oc.complex, &potential))?;
    Ok(ConnectionDecomposition {
        potential,
        connection,
        disturbance: if eta.is_zero() { None } else { Some(eta) },
        view: oc.view,
    })
}

/// Variable layout of the disturbance programs.
struct Layout {
    offsets: Vec<usize>,
    cells: usize,
}

impl Layout {
    fn new(m: &EmpiricalModel) -> Self {
        let mut offsets = Vec::with_capacity(m.tables.len());
        let mut cells = 0;
        for t in &m.tables {
            offsets.push(cells);
            cells += t.len();
        }
        Layout { offsets, cells }
    }
    /// Non-disturbing part `Q_C(o)`.
    fn q(&self, c: usize, o: usize) -> usize {
        self.offsets[c] + o
    }
    /// Adjustment `R_C(o)`.
    fn r(&self, c: usize, o: usize) -> usize {
        self.cells + self.offsets[c] + o
    }
    fn after(&self) -> usize {
        2 * self.cells
    }
}

/// `p = Q + R`, `Q` non-disturbing, every `R_C` of total mass `mass`
/// (a variable index or a fixed value).
fn split_constraints(lp: &mut LinearProgram, m: &EmpiricalModel, lay: &Layout, mass: Result<usize, &Q>) {
    for (c, table) in m.tables.iter().enumerate() {
        for (o, p) in table.iter().enumerate() {
            lp.add([(lay.q(c, o), Q::one()), (lay.r(c, o), Q::one())], Relation::Eq, p.clone());
        }
        let mut row: Vec<(usize, Q)> = (0..table.len()).map(|o| (lay.r(c, o), Q::one())).collect();
        match mass {
            Ok(d) => {
                row.push((d, -Q::one()));
                lp.add(row, Relation::Eq, Q::zero());
            }
            Err(v) => {
                lp.add(row, Relation::Eq, v.clone());
            }
        }
    }
    let n = m.tables.len();
    for a in 0..n {
        for b in a + 1..n {
            let shared = intersection(m, a, b);
            if shared.is_empty() {
                continue;
            }
            let size: usize = shared.iter().map(|&x| m.outcomes[x]).product();
            let mut rows: Vec<Vec<(usize, Q)>> = vec![Vec::new(); size];
            for (c, sign) in [(a, Q::one()), (b, -Q::one())] {
                let pos: Vec<usize> = shared
                    .iter()
                    .map(|x| m.context(c).iter().position(|y| y == x).expect("shared"))
                    .collect();
                for o in 0..m.tables[c].len() {
                    let t = m.decode(c, o);
                    let j = pos
                        .iter()
                        .zip(&shared)
                        .fold(0, |acc, (&p, &x)| acc * m.outcomes[x] + t[p]);
                    rows[j].push((lay.q(c, o), sign.clone()));
                }
            }
            for row in rows {
                lp.add(row, Relation::Eq, Q::zero());
            }
        }
    }
}

/// Three-way split `p = NCF·p_NC + CF·p_SC + DF·p_D`.
///
/// DF is the least mass per context that must be moved out of the tables to
/// leave a non-disturbing remainder; NCF is then the largest noncontextual
/// weight inside such a remainder.
pub fn fractions_with_disturbance(m: &EmpiricalModel) -> Result<FractionReport> {
    fractions_with_disturbance_capped(m, ScaleCap::default())
}

pub fn fractions_with_disturbance_capped(m: &EmpiricalModel, cap: ScaleCap) -> Result<FractionReport> {
    let lay = Layout::new(m);
    let gs = global_assignments(m, cap)?;

    let d = lay.after();
    let mut first = LinearProgram::new(d + 1, Sense::Minimize);
    first.set_objective(d, Q::one());
    split_constraints(&mut first, m, &lay, Ok(d));
    let df = first
        .solve()
        .objective
        .expect("moving all mass is always feasible");

    let w0 = lay.after();
    let mut second = LinearProgram::new(w0 + gs.len(), Sense::Maximize);
    for j in 0..gs.len() {
        second.set_objective(w0 + j, Q::one());
    }
    split_constraints(&mut second, m, &lay, Err(&df));
    for (c, table) in m.tables.iter().enumerate() {
        let mut rows: Vec<Vec<(usize, Q)>> = (0..table.len())
            .map(|o| vec![(lay.q(c, o), -Q::one())])
            .collect();
        for (j, g) in gs.iter().enumerate() {
            rows[restrict(m, c, g)].push((w0 + j, Q::one()));
        }
        for row in rows {
            second.add(row, Relation::Le, Q::zero());
        }
    }
    let sol = second.solve();
    let ncf = sol.objective.clone().expect("optimal split exists");
    let x = sol.assignment;
    let weights = x[w0..].to_vec();
    let cf = Q::one() - &df - &ncf;

    let q_tables: Vec<Vec<Q>> = (0..m.tables.len())
        .map(|c| (0..m.tables[c].len()).map(|o| x[lay.q(c, o)].clone()).collect())
        .collect();
    let nc_tables = assignment_tables(m, &gs, &weights);
    let normalized = |tables: Vec<Vec<Q>>, k: &Q| -> Result<Option<EmpiricalModel>> {
        if !k.is_positive() {
            return Ok(None);
        }
        let t = tables
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / k).collect())
            .collect();
        submodel(m, t).map(Some)
    };
    let sc_tables: Vec<Vec<Q>> = q_tables
        .iter()
        .zip(&nc_tables)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
        .collect();
    let d_tables: Vec<Vec<Q>> = (0..m.tables.len())
        .map(|c| (0..m.tables[c].len()).map(|o| x[lay.r(c, o)].clone()).collect())
        .collect();
    let p_sc = normalized(sc_tables, &cf)?;
    Ok(FractionReport {
        p_nc: normalized(nc_tables, &ncf)?,
        p_sc_unverified: p_sc.is_some(),
        p_sc,
        p_d: normalized(d_tables, &df)?,
        ncf,
        cf,
        df,
        weights,
    })
}
