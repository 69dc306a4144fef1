//! Compatibility hypergraphs, Graham reduction, and the cohomological
//! noncontextuality certificate for object complexes.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::connection::{ObjectComplex, View};
use crate::ddg;
use crate::error::{Error, Result};

/// Measurements as vertices, contexts (jointly measurable sets) as hyperedges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatibilityHypergraph {
    pub measurements: Vec<String>,
    pub contexts: Vec<Vec<usize>>,
}

impl CompatibilityHypergraph {
    pub fn new(measurements: Vec<String>, contexts: Vec<Vec<usize>>) -> Result<Self> {
        let h = CompatibilityHypergraph {
            measurements,
            contexts,
        };
        h.check()?;
        Ok(h)
    }

    /// Builds a hypergraph from contexts given by measurement name, numbering
    /// measurements in order of first appearance.
    pub fn from_named(contexts: &[Vec<String>]) -> Result<Self> {
        let mut measurements: Vec<String> = Vec::new();
        let mut out = Vec::with_capacity(contexts.len());
        for ctx in contexts {
            let mut ids = Vec::with_capacity(ctx.len());
            for name in ctx {
                let id = match measurements.iter().position(|m| m == name) {
                    Some(id) => id,
                    None => {
                        measurements.push(name.clone());
                        measurements.len() - 1
                    }
                };
                ids.push(id);
            }
            out.push(ids);
        }
        CompatibilityHypergraph::new(measurements, out)
    }

    fn check(&self) -> Result<()> {
        let n = self.measurements.len();
        let mut seen = vec![false; n];
        let mut sets = BTreeSet::new();
        for (c, ctx) in self.contexts.iter().enumerate() {
            let set: BTreeSet<usize> = ctx.iter().copied().collect();
            if set.len() != ctx.len() {
                return Err(Error::Shape(format!("context {c} repeats a measurement")));
            }
            for &m in ctx {
                if m >= n {
                    return Err(Error::Index {
                        what: "measurement",
                        index: m,
                        len: n,
                    });
                }
                seen[m] = true;
            }
            if !sets.insert(set) {
                return Err(Error::Shape(format!("context {c} is listed twice")));
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(Error::Shape(format!(
                "measurement {:?} belongs to no context",
                self.measurements[m]
            )));
        }
        Ok(())
    }

    pub fn names(&self, ctx: &[usize]) -> Vec<String> {
        ctx.iter().map(|&m| self.measurements[m].clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ReductionStep {
    /// Rule 1: a measurement lying in exactly one context is deleted.
    RemoveMeasurement {
        measurement: String,
        context: usize,
    },
    /// Rule 2: a context contained in another one is deleted. Equal contexts
    /// (possible after rule 1) count as contained in the lower-indexed copy.
    RemoveContext { context: usize, contained_in: usize },
    /// A context emptied by rule 1 is discarded.
    DropEmpty { context: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reduction {
    pub reduced: CompatibilityHypergraph,
    /// Original indices of the surviving contexts.
    pub surviving: Vec<usize>,
    pub trace: Vec<ReductionStep>,
}

impl Reduction {
    pub fn is_empty(&self) -> bool {
        self.reduced.contexts.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Move {
    Vertex { m: usize, ctx: usize },
    Context { ctx: usize, into: usize },
}

fn candidates(alive: &[Option<BTreeSet<usize>>], n: usize) -> Vec<Move> {
    let mut out = Vec::new();
    for m in 0..n {
        let holders: Vec<usize> = alive
            .iter()
            .enumerate()
            .filter(|(_, c)| c.as_ref().is_some_and(|c| c.contains(&m)))
            .map(|(i, _)| i)
            .collect();
        if let [only] = holders[..] {
            out.push(Move::Vertex { m, ctx: only });
        }
    }
    for (i, ci) in alive.iter().enumerate() {
        let Some(ci) = ci else { continue };
        let into = alive.iter().enumerate().find(|(j, cj)| {
            cj.as_ref().is_some_and(|cj| {
                *j != i && ci.is_subset(cj) && (ci.len() < cj.len() || *j < i)
            })
        });
        if let Some((j, _)) = into {
            out.push(Move::Context { ctx: i, into: j });
        }
    }
    out
}

/// Runs Graham reduction, letting `choose` pick among the applicable moves
/// (given in canonical priority order) at every step.
fn reduce_by(
    h: &CompatibilityHypergraph,
    mut choose: impl FnMut(usize) -> usize,
) -> Reduction {
    let n = h.measurements.len();
    let mut alive: Vec<Option<BTreeSet<usize>>> = h
        .contexts
        .iter()
        .map(|c| Some(c.iter().copied().collect::<BTreeSet<_>>()))
        .collect();
    let mut trace = Vec::new();
    for (i, c) in alive.iter_mut().enumerate() {
        if c.as_ref().is_some_and(BTreeSet::is_empty) {
            *c = None;
            trace.push(ReductionStep::DropEmpty { context: i });
        }
    }
    loop {
        let moves = candidates(&alive, n);
        if moves.is_empty() {
            break;
        }
        match moves[choose(moves.len()).min(moves.len() - 1)] {
            Move::Vertex { m, ctx } => {
                let set = alive[ctx].as_mut().expect("alive context");
                set.remove(&m);
                trace.push(ReductionStep::RemoveMeasurement {
                    measurement: h.measurements[m].clone(),
                    context: ctx,
                });
                if set.is_empty() {
                    alive[ctx] = None;
                    trace.push(ReductionStep::DropEmpty { context: ctx });
                }
            }
            Move::Context { ctx, into } => {
                alive[ctx] = None;
                trace.push(ReductionStep::RemoveContext {
                    context: ctx,
                    contained_in: into,
                });
            }
        }
    }

    let surviving: Vec<usize> = (0..alive.len()).filter(|&i| alive[i].is_some()).collect();
    let used: BTreeSet<usize> = alive.iter().flatten().flatten().copied().collect();
    let ids: Vec<usize> = used.into_iter().collect();
    let reduced = CompatibilityHypergraph {
        measurements: ids.iter().map(|&m| h.measurements[m].clone()).collect(),
        contexts: surviving
            .iter()
            .map(|&i| {
                alive[i]
                    .as_ref()
                    .expect("alive")
                    .iter()
                    .map(|m| ids.binary_search(m).expect("used measurement"))
                    .collect()
            })
            .collect(),
    };
    Reduction {
        reduced,
        surviving,
        trace,
    }
}

/// Graham reduction to a fixpoint, always taking the lowest measurement id for
/// rule 1 and otherwise the lowest context index for rule 2.
pub fn graham_reduce(h: &CompatibilityHypergraph) -> Reduction {
    reduce_by(h, |_| 0)
}

/// Graham reduction with an arbitrary move order; `pick(k)` chooses among `k`
/// applicable moves. Used to check that the verdict does not depend on order.
pub fn graham_reduce_with(h: &CompatibilityHypergraph, pick: impl FnMut(usize) -> usize) -> Reduction {
    reduce_by(h, pick)
}

/// Acyclic in the Graham sense: reduction reaches the empty hypergraph.
pub fn is_acyclic(h: &CompatibilityHypergraph) -> bool {
    graham_reduce(h).is_empty()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVerdict {
    NoncontextualCertified,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CohomologyCertificate {
    pub verdict: CertificateVerdict,
    pub first_betti: usize,
}

/// One-sided certificate: when the first cohomology of the (flat) object
/// complex vanishes, every closed connection is exact and no valuation can
/// carry a loop phase. A nontrivial group is never read as contextuality.
pub fn generalized_vorobyev(oc: &ObjectComplex) -> Result<CohomologyCertificate> {
    if oc.view != View::Topological {
        return Err(Error::Precondition(
            "the cohomological certificate needs the topological view".into(),
        ));
    }
    let first_betti = ddg::cohomology_basis(&oc.complex, 1).len();
    let verdict = if first_betti == 0 {
        CertificateVerdict::NoncontextualCertified
    } else {
        CertificateVerdict::Inconclusive
    };
    Ok(CohomologyCertificate {
        verdict,
        first_betti,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hg(contexts: &[&[&str]]) -> CompatibilityHypergraph {
        let named: Vec<Vec<String>> = contexts
            .iter()
            .map(|c| c.iter().map(|s| s.to_string()).collect())
            .collect();
        CompatibilityHypergraph::from_named(&named).unwrap()
    }

    #[test]
    fn single_context_reduces_in_four_steps() {
        let r = graham_reduce(&hg(&[&["a", "b", "c"]]));
        assert!(r.is_empty());
        assert_eq!(r.trace.len(), 4);
        assert_eq!(r.trace[3], ReductionStep::DropEmpty { context: 0 });
    }

    #[test]
    fn four_cycle_is_a_fixpoint() {
        let h = hg(&[&["a", "b"], &["b", "c"], &["c", "d"], &["d", "a"]]);
        let r = graham_reduce(&h);
        assert!(r.trace.is_empty());
        assert_eq!(r.reduced.contexts, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]);
        assert_eq!(r.reduced.measurements, h.measurements);
        assert!(!is_acyclic(&h));
    }

    #[test]
    fn path_reduces_to_empty() {
        let r = graham_reduce(&hg(&[&["a", "b"], &["b", "c"]]));
        assert!(r.is_empty());
        assert!(r
            .trace
            .iter()
            .any(|s| matches!(s, ReductionStep::RemoveContext { .. })));
    }

    #[test]
    fn triangle_of_pairs_is_cyclic_but_filled_triangle_is_not() {
        assert!(!is_acyclic(&hg(&[&["a", "b"], &["b", "c"], &["c", "a"]])));
        assert!(is_acyclic(&hg(&[
            &["a", "b"],
            &["b", "c"],
            &["c", "a"],
            &["a", "b", "c"]
        ])));
    }

    #[test]
    fn rejects_malformed_hypergraphs() {
        assert!(CompatibilityHypergraph::new(vec!["a".into(), "b".into()], vec![vec![0]]).is_err());
        assert!(CompatibilityHypergraph::new(vec!["a".into()], vec![vec![0], vec![0]]).is_err());
        assert!(CompatibilityHypergraph::new(vec!["a".into()], vec![vec![3]]).is_err());
    }
}
