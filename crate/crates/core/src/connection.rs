//! Object complexes built from operational equivalences, and the split of a
//! valuation 1-cochain into an exact part and a connection.
//!
//! An equivalence `Σ k_i v_i = 0` is realized as a closed polygon in the
//! tangent space: starting at a shared base vertex, step `i` is the tangent
//! vector `k_i v_i`, and the last step returns to the base because the vectors
//! sum to zero. Every edge records which formal combination of objects it
//! stands for, so a valuation of the objects induces an edge cochain whose
//! pairing with the loop is `Σ k_i f(v_i)`.
//!
//! In the geometrical view each polygon is fan-triangulated from the base and
//! the fan diagonals carry the linear valuation of the partial sums. All the
//! curvature of a loop then sits on its last triangle. In the topological view
//! no 2-cells are attached and the loops generate `H_1`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::ddg::{self, Chain, Cochain, Exactness, Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{GptFragment, ObjectKind, OnticRepresentation, OperationalEquivalence};
use crate::rational::{self, ser, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Geometrical,
    Topological,
}

impl std::str::FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "geometrical" | "geometric" => Ok(View::Geometrical),
            "topological" => Ok(View::Topological),
            other => Err(Error::Parse(format!("unknown view {other:?}"))),
        }
    }
}

/// Formal combination of object indices.
pub type Form = BTreeMap<usize, Q>;

/// One step of a loop polygon, in traversal order.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopStep {
    pub from: usize,
    pub to: usize,
    /// `None` for padding steps that close short loops.
    pub object: Option<usize>,
    pub coefficient: Q,
}

impl LoopStep {
    pub fn simplex(&self) -> Simplex {
        vec![self.from.min(self.to), self.from.max(self.to)]
    }

    /// `+1` when traversal agrees with the vertex-order orientation.
    pub fn orientation(&self) -> Q {
        if self.from < self.to {
            Q::one()
        } else {
            -Q::one()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectLoop {
    pub equivalence: usize,
    pub steps: Vec<LoopStep>,
    pub chain: Chain,
    /// Fan triangulation bounding the loop (geometrical view only).
    pub disk: Option<Chain>,
}

impl ObjectLoop {
    pub fn objects(&self) -> impl Iterator<Item = (usize, &Q)> {
        self.steps
            .iter()
            .filter_map(|s| s.object.map(|o| (o, &s.coefficient)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectComplex {
    pub kind: ObjectKind,
    pub view: View,
    pub complex: SimplicialComplex,
    pub base: usize,
    pub object_count: usize,
    pub loops: Vec<ObjectLoop>,
    /// Formal object combination carried by each edge, in vertex-order
    /// orientation.
    pub edge_forms: BTreeMap<Simplex, Form>,
}

fn scaled(form: &Form, k: &Q) -> Form {
    form.iter()
        .map(|(&o, c)| (o, c * k))
        .filter(|(_, c)| !c.is_zero())
        .collect()
}

fn add_form(acc: &mut Form, other: &Form) {
    for (&o, c) in other {
        let e = acc.entry(o).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            acc.remove(&o);
        }
    }
}

/// Realizes each equivalence of `kind` as a loop polygon through a common base
/// vertex; the geometrical view also attaches a fan of 2-cells to each loop.
pub fn build_object_complex(
    kind: ObjectKind,
    object_count: usize,
    eqs: &[OperationalEquivalence],
    view: View,
) -> Result<ObjectComplex> {
    let base = 0;
    let mut next = 1;
    let mut maximal: Vec<Simplex> = vec![vec![base]];
    let mut edge_forms = BTreeMap::new();
    let mut loops = Vec::with_capacity(eqs.len());

    for (id, eq) in eqs.iter().enumerate() {
        if eq.kind != kind {
            return Err(Error::Precondition(format!(
                "equivalence {id} is of kind {:?}, expected {kind:?}",
                eq.kind
            )));
        }
        if let Some(&bad) = eq.coefficients.keys().find(|&&i| i >= object_count) {
            return Err(Error::Index {
                what: "object",
                index: bad,
                len: object_count,
            });
        }
        if eq.coefficients.is_empty() {
            continue;
        }
        let mut step_forms: Vec<(Option<usize>, Q)> = eq
            .coefficients
            .iter()
            .map(|(&o, k)| (Some(o), k.clone()))
            .collect();
        // polygons need at least three sides
        while step_forms.len() < 3 {
            step_forms.push((None, Q::zero()));
        }
        let m = step_forms.len();
        let mut vertices = vec![base];
        for _ in 1..m {
            vertices.push(next);
            next += 1;
        }
        vertices.push(base);

        let mut steps = Vec::with_capacity(m);
        let mut chain = Chain::zero(1);
        for (i, (object, k)) in step_forms.iter().enumerate() {
            let step = LoopStep {
                from: vertices[i],
                to: vertices[i + 1],
                object: *object,
                coefficient: k.clone(),
            };
            let form: Form = object.map(|o| (o, k.clone())).into_iter().collect();
            edge_forms.insert(step.simplex(), scaled(&form, &step.orientation()));
            chain.add(&[step.from, step.to], Q::one())?;
            maximal.push(step.simplex());
            steps.push(step);
        }

        let disk = match view {
            View::Topological => None,
            View::Geometrical => {
                let mut disk = Chain::zero(2);
                let mut partial = Form::new();
                for i in 1..m - 1 {
                    let (object, k) = &step_forms[i - 1];
                    if let Some(o) = object {
                        add_form(&mut partial, &[(*o, k.clone())].into_iter().collect());
                    }
                    if i >= 2 {
                        edge_forms.insert(vec![base, vertices[i]], partial.clone());
                    }
                    let tri = vec![base, vertices[i], vertices[i + 1]];
                    disk.add(&tri, Q::one())?;
                    maximal.push(tri);
                }
                Some(disk)
            }
        };
        loops.push(ObjectLoop {
            equivalence: id,
            steps,
            chain,
            disk,
        });
    }

    let complex = SimplicialComplex::from_maximal(&maximal)?;
    for e in complex.simplices(1) {
        edge_forms.entry(e.clone()).or_default();
    }
    Ok(ObjectComplex {
        kind,
        view,
        complex,
        base,
        object_count,
        loops,
        edge_forms,
    })
}

/// Object complex of one kind using the fragment's own equivalences.
pub fn fragment_complex(f: &GptFragment, kind: ObjectKind, view: View) -> Result<ObjectComplex> {
    build_object_complex(kind, f.object_count(kind), &f.equivalences(kind), view)
}

impl ObjectComplex {
    /// Edge cochain induced by a valuation of the objects.
    pub fn valuation_cochain(&self, valuation: impl Fn(usize) -> Q) -> Cochain {
        let mut w = Cochain::zero(1);
        for (e, form) in &self.edge_forms {
            let v = form.iter().fold(Q::zero(), |acc, (&o, k)| acc + k * valuation(o));
            if !v.is_zero() {
                w.values.insert(e.clone(), v);
            }
        }
        w
    }

    /// Valuation cochain of an ontic representation at `lambda` (and
    /// `lambda_out` for transformations).
    pub fn ontic_cochain(
        &self,
        rep: &OnticRepresentation,
        lambda: usize,
        lambda_out: usize,
    ) -> Result<Cochain> {
        let n = rep.lambda_count;
        if lambda >= n || lambda_out >= n {
            return Err(Error::Index {
                what: "ontic variable",
                index: lambda.max(lambda_out),
                len: n,
            });
        }
        let available = match self.kind {
            ObjectKind::State => rep.mu.first().map_or(0, Vec::len),
            ObjectKind::Effect => rep.xi.len(),
            ObjectKind::Transformation => match &rep.gamma {
                Some(g) => g.first().map_or(0, Vec::len),
                None => 0,
            },
        };
        if available < self.object_count {
            return Err(Error::Shape(format!(
                "representation covers {available} of {} {:?} objects",
                self.object_count, self.kind
            )));
        }
        Ok(self.valuation_cochain(|o| rep.valuation(self.kind, o, lambda, lambda_out)))
    }

    pub fn loop_for(&self, equivalence: usize) -> Option<&ObjectLoop> {
        self.loops.iter().find(|l| l.equivalence == equivalence)
    }

    /// Value of `w` on the step of loop `l` that carries `object`, per unit of
    /// the object (divided by its coefficient), oriented along the loop.
    pub fn object_value(&self, l: &ObjectLoop, object: usize, w: &Cochain) -> Option<Q> {
        let step = l.steps.iter().find(|s| s.object == Some(object))?;
        Some(w.get(&step.simplex()) * step.orientation() / &step.coefficient)
    }

    /// First loop mentioning `object`, if any.
    pub fn loop_with(&self, object: usize) -> Option<&ObjectLoop> {
        self.loops
            .iter()
            .find(|l| l.steps.iter().any(|s| s.object == Some(object)))
    }

    pub fn two_cells(&self) -> &[Simplex] {
        self.complex.simplices(2)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConnectionDecomposition {
    pub potential: Cochain,
    pub connection: Cochain,
    pub disturbance: Option<Cochain>,
    pub view: View,
}

impl ConnectionDecomposition {
    /// `dc + ω (+ η)`.
    pub fn recompose(&self, k: &SimplicialComplex) -> Result<Cochain> {
        let mut total = ddg::coboundary(k, &self.potential).plus(&self.connection)?;
        if let Some(eta) = &self.disturbance {
            total = total.plus(eta)?;
        }
        Ok(total)
    }
}

/// Least-squares potential: `c = argmin ||xi - dc||²` with unit edge weights,
/// pinned to zero at the first vertex of every component. Solved exactly via
/// the graph-Laplacian normal equations.
pub fn least_squares_potential(k: &SimplicialComplex, xi: &Cochain) -> Cochain {
    let mut potential = Cochain::zero(0);
    for comp in k.components() {
        let free = &comp[1..];
        if free.is_empty() {
            continue;
        }
        let local: BTreeMap<usize, usize> = free.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = free.len();
        let mut lap = linalg::zeros(n, n);
        let mut rhs = vec![Q::zero(); n];
        for e in k.simplices(1) {
            if comp.binary_search(&e[0]).is_err() {
                continue;
            }
            let (a, b) = (local.get(&e[0]), local.get(&e[1]));
            let val = xi.get(e);
            if let Some(&a) = a {
                lap[a][a] += Q::one();
                rhs[a] -= &val;
            }
            if let Some(&b) = b {
                lap[b][b] += Q::one();
                rhs[b] += &val;
            }
            if let (Some(&a), Some(&b)) = (a, b) {
                lap[a][b] -= Q::one();
                lap[b][a] -= Q::one();
            }
        }
        let c = linalg::solve_square(&lap, &rhs).expect("reduced Laplacian of a connected graph is nonsingular");
        for (v, x) in free.iter().zip(c) {
            if !x.is_zero() {
                potential.values.insert(vec![*v], x);
            }
        }
    }
    potential
}

/// `ξ = dc + ω` with `c` the least-squares potential.
pub fn decompose(oc: &ObjectComplex, xi: &Cochain) -> Result<ConnectionDecomposition> {
    if xi.degree != 1 {
        return Err(Error::Degree {
            expected: 1,
            found: xi.degree,
        });
    }
    xi.check_in(&oc.complex)?;
    let potential = least_squares_potential(&oc.complex, xi);
    let connection = xi.minus(&ddg::coboundary(&oc.complex, &potential))?;
    Ok(ConnectionDecomposition {
        potential,
        connection,
        disturbance: None,
        view: oc.view,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curvature {
    pub f: Cochain,
}

impl Curvature {
    pub fn is_flat(&self) -> bool {
        self.f.is_zero()
    }
}

/// `F = dω` on the attached 2-cells.
pub fn curvature(oc: &ObjectComplex, dec: &ConnectionDecomposition) -> Result<Curvature> {
    if oc.view == View::Topological || oc.complex.count(2) == 0 {
        return Err(Error::NoTwoCells);
    }
    Ok(Curvature {
        f: ddg::coboundary(&oc.complex, &dec.connection),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Holonomy {
    #[serde(serialize_with = "ser::q")]
    pub phase: Q,
    /// `exp(phase)`, for display only.
    pub holonomy: f64,
}

/// Phase `<ω|γ> (+ <η|γ>)` of a cycle and its holonomy `exp(phase)`.
pub fn phase(oc: &ObjectComplex, dec: &ConnectionDecomposition, cycle: &Chain) -> Result<Holonomy> {
    if cycle.degree != 1 {
        return Err(Error::Degree {
            expected: 1,
            found: cycle.degree,
        });
    }
    if !ddg::boundary(&oc.complex, cycle)?.is_zero() {
        return Err(Error::NotACycle);
    }
    let mut phase = ddg::pair(&dec.connection, cycle)?;
    if let Some(eta) = &dec.disturbance {
        phase += ddg::pair(eta, cycle)?;
    }
    let holonomy = rational::to_f64(&phase).exp();
    Ok(Holonomy { phase, holonomy })
}

/// Phase of every equivalence loop.
pub fn loop_phases(oc: &ObjectComplex, dec: &ConnectionDecomposition) -> Result<BTreeMap<usize, Q>> {
    oc.loops
        .iter()
        .map(|l| Ok((l.equivalence, phase(oc, dec, &l.chain)?.phase)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MonodromyClass {
    Trivial,
    Nontrivial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Monodromy {
    pub class: MonodromyClass,
    #[serde(serialize_with = "ser::map")]
    pub phases: BTreeMap<usize, Q>,
}

/// Decides whether a flat connection is exact. Nontrivial exactly when some
/// loop carries a nonzero phase.
pub fn monodromy_class(oc: &ObjectComplex, dec: &ConnectionDecomposition) -> Result<Monodromy> {
    let omega = match &dec.disturbance {
        Some(eta) => dec.connection.plus(eta)?,
        None => dec.connection.clone(),
    };
    if !ddg::coboundary(&oc.complex, &omega).is_zero() {
        return Err(Error::NonzeroCurvature);
    }
    let class = match ddg::is_exact(&oc.complex, &omega) {
        Exactness::Exact(_) => MonodromyClass::Trivial,
        Exactness::NoPotential => MonodromyClass::Nontrivial,
        Exactness::NotClosed => return Err(Error::NonzeroCurvature),
    };
    Ok(Monodromy {
        class,
        phases: loop_phases(oc, dec)?,
    })
}

/// A potential `c` on every vertex with `dc = ξ`, when the valuation extends
/// to a global section.
pub fn global_section(oc: &ObjectComplex, xi: &Cochain) -> Option<Cochain> {
    match ddg::is_exact(&oc.complex, xi) {
        Exactness::Exact(c) => Some(c),
        _ => None,
    }
}

/// Machine-readable decomposition report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub view: View,
    pub potential: Cochain,
    pub connection: Cochain,
    pub disturbance: Option<Cochain>,
    #[serde(serialize_with = "ser::map")]
    pub phases: BTreeMap<usize, Q>,
    #[serde(serialize_with = "ser::map")]
    pub curvature: BTreeMap<String, Q>,
}

pub fn report(oc: &ObjectComplex, dec: &ConnectionDecomposition) -> Result<DecompositionReport> {
    let curvature = match curvature(oc, dec) {
        Ok(c) => oc
            .two_cells()
            .iter()
            .map(|s| (ddg::simplex_key(s), c.f.get(s)))
            .collect(),
        Err(Error::NoTwoCells) => BTreeMap::new(),
        Err(e) => return Err(e),
    };
    Ok(DecompositionReport {
        view: dec.view,
        potential: dec.potential.clone(),
        connection: dec.connection.clone(),
        disturbance: dec.disturbance.clone(),
        phases: loop_phases(oc, dec)?,
        curvature,
    })
}
