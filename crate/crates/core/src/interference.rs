//! Sorkin interference terms and their reading off the contextual
//! connection.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Sub};

use num_complex::Complex64;
use num_traits::Zero;
use serde::Serialize;

use crate::connection::{ConnectionDecomposition, ObjectComplex};
use crate::error::{Error, Result};
use crate::rational::{ser, Q};

/// Events are sets of atoms; the join of disjoint events is their union.
pub type Event = BTreeSet<usize>;

/// A set function on listed events. `p(∅) = 0` always.
#[derive(Clone, Debug, PartialEq)]
pub struct EventMeasure<T> {
    pub atoms: Vec<String>,
    pub p: BTreeMap<Event, T>,
}

pub trait Scalar: Clone + Zero + Add<Output = Self> + Sub<Output = Self> {}
impl<T: Clone + Zero + Add<Output = T> + Sub<Output = T>> Scalar for T {}

pub fn event(atoms: &[usize]) -> Event {
    atoms.iter().copied().collect()
}

impl<T: Scalar> EventMeasure<T> {
    pub fn new(atoms: Vec<String>) -> Self {
        EventMeasure {
            atoms,
            p: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, e: Event, value: T) -> Result<()> {
        if let Some(&bad) = e.iter().find(|&&a| a >= self.atoms.len()) {
            return Err(Error::Index {
                what: "atom",
                index: bad,
                len: self.atoms.len(),
            });
        }
        if e.is_empty() && !value.is_zero() {
            return Err(Error::Precondition("the empty event must have measure 0".into()));
        }
        self.p.insert(e, value);
        Ok(())
    }

    pub fn get(&self, e: &Event) -> Result<T> {
        if e.is_empty() {
            return Ok(T::zero());
        }
        self.p.get(e).cloned().ok_or_else(|| {
            Error::Precondition(format!("event {} has no listed measure", self.label(e)))
        })
    }

    pub fn label(&self, e: &Event) -> String {
        let names: Vec<&str> = e.iter().map(|&a| self.atoms[a].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Measure on every subset of the atoms from a function of the subset.
    pub fn from_fn(atoms: Vec<String>, f: impl Fn(&Event) -> T) -> Self {
        let n = atoms.len();
        let mut m = EventMeasure::new(atoms);
        for mask in 1u64..(1u64 << n) {
            let e: Event = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let v = f(&e);
            m.p.insert(e, v);
        }
        m
    }
}

fn disjoint(events: &[&Event]) -> Result<()> {
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            if !events[i].is_disjoint(events[j]) {
                return Err(Error::Precondition("interference needs disjoint events".into()));
            }
        }
    }
    Ok(())
}

fn join(events: &[&Event]) -> Event {
    events.iter().flat_map(|e| e.iter().copied()).collect()
}

/// `I₂(A,B) = p(A⊔B) - p(A) - p(B)`.
pub fn i2<T: Scalar>(m: &EventMeasure<T>, a: &Event, b: &Event) -> Result<T> {
    disjoint(&[a, b])?;
    Ok(m.get(&join(&[a, b]))? - m.get(a)? - m.get(b)?)
}

/// `I₃(A,B,C) = p(ABC) - p(AB) - p(BC) - p(AC) + p(A) + p(B) + p(C)`,
/// the residual that makes
/// `p(ABC) = p(A)+p(B)+p(C) + I₂(A,B) + I₂(B,C) + I₂(A,C) + I₃`.
pub fn i3<T: Scalar>(m: &EventMeasure<T>, a: &Event, b: &Event, c: &Event) -> Result<T> {
    disjoint(&[a, b, c])?;
    Ok(m.get(&join(&[a, b, c]))? - m.get(&join(&[a, b]))? - m.get(&join(&[b, c]))?
        - m.get(&join(&[a, c]))?
        + m.get(a)?
        + m.get(b)?
        + m.get(c)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterferenceTerm {
    pub events: Vec<String>,
    #[serde(serialize_with = "ser::q")]
    pub value: Q,
}

/// All order-`k` terms (k = 2 or 3) over unordered tuples of pairwise
/// disjoint nonempty listed events whose joins are all listed.
pub fn all_terms(m: &EventMeasure<Q>, order: usize) -> Result<Vec<InterferenceTerm>> {
    let events: Vec<&Event> = m.p.keys().filter(|e| !e.is_empty()).collect();
    let listed = |e: &Event| e.is_empty() || m.p.contains_key(e);
    let mut out = Vec::new();
    match order {
        2 => {
            for (i, a) in events.iter().enumerate() {
                for b in &events[i + 1..] {
                    if a.is_disjoint(b) && listed(&join(&[a, b])) {
                        out.push(InterferenceTerm {
                            events: vec![m.label(a), m.label(b)],
                            value: i2(m, a, b)?,
                        });
                    }
                }
            }
        }
        3 => {
            for (i, a) in events.iter().enumerate() {
                for (j, b) in events.iter().enumerate().skip(i + 1) {
                    for c in &events[j + 1..] {
                        let ok = a.is_disjoint(b)
                            && b.is_disjoint(c)
                            && a.is_disjoint(c)
                            && [join(&[a, b]), join(&[b, c]), join(&[a, c]), join(&[a, b, c])]
                                .iter()
                                .all(listed);
                        if ok {
                            out.push(InterferenceTerm {
                                events: vec![m.label(a), m.label(b), m.label(c)],
                                value: i3(m, a, b, c)?,
                            });
                        }
                    }
                }
            }
        }
        k => return Err(Error::Unsupported(format!("interference of order {k}"))),
    }
    Ok(out)
}

pub type CMatrix = Vec<Vec<Complex64>>;

fn apply(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn product_is_zero(a: &CMatrix, b: &CMatrix) -> bool {
    let n = a.len();
    (0..n).all(|i| {
        (0..n).all(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum::<Complex64>().norm() < 1e-12)
    })
}

/// Projector onto the span of a single vector.
pub fn rank_one(v: &[Complex64]) -> CMatrix {
    let norm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    v.iter()
        .map(|a| v.iter().map(|b| a * b.conj() / norm2).collect())
        .collect()
}

/// `⟨e|ρ⟩⟨ρ|e'⟩ + ⟨e'|ρ⟩⟨ρ|e⟩` for the pure state `ρ = |ψ⟩⟨ψ|`, with the
/// effects acting on `ψ`: `2 Re ⟨eψ|e'ψ⟩`.
pub fn quantum_i2(psi: &[Complex64], e: &CMatrix, e2: &CMatrix) -> Result<f64> {
    if !product_is_zero(e, e2) {
        return Err(Error::Precondition("projectors are not orthogonal".into()));
    }
    let a = apply(e, psi);
    let b = apply(e2, psi);
    Ok(2.0 * inner(&a, &b).re)
}

/// Born measure `p(S) = ⟨ψ|Σ_{i∈S} P_i|ψ⟩` of orthogonal projectors.
pub fn born_measure(psi: &[Complex64], projectors: &[CMatrix]) -> EventMeasure<f64> {
    let amps: Vec<f64> = projectors
        .iter()
        .map(|p| inner(psi, &apply(p, psi)).re)
        .collect();
    EventMeasure::from_fn(names(projectors.len()), |e| e.iter().map(|&i| amps[i]).sum())
}

/// Path measure `p(S) = |⟨φ|Σ_{i∈S} P_i|ψ⟩|²`: the detection probability at
/// `φ` with only the paths in `S` open.
pub fn path_measure(psi: &[Complex64], phi: &[Complex64], projectors: &[CMatrix]) -> EventMeasure<f64> {
    let amps: Vec<Complex64> = projectors.iter().map(|p| inner(phi, &apply(p, psi))).collect();
    EventMeasure::from_fn(names(projectors.len()), |e| {
        e.iter().map(|&i| amps[i]).sum::<Complex64>().norm_sqr()
    })
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("e{i}")).collect()
}

/// `I₂(E,E') = Σ_λ μ(λ) (⟨ω_λ|E∨E'⟩ - ⟨ω_λ|E⟩ - ⟨ω_λ|E'⟩)`.
///
/// The three effects must be the whole support of one loop, with
/// coefficients proportional to `(1, -1, -1)` on `(E∨E', E, E')`; the value
/// of `ω` at an object is read per unit of its coefficient on that loop.
pub fn i2_from_connection(
    oc: &ObjectComplex,
    decs: &[ConnectionDecomposition],
    mu: &[Q],
    e: usize,
    e2: usize,
    joined: usize,
) -> Result<Q> {
    if decs.len() != mu.len() {
        return Err(Error::Shape(format!(
            "{} decompositions for {} weights",
            decs.len(),
            mu.len()
        )));
    }
    for v in [e, e2, joined] {
        if v >= oc.object_count {
            return Err(Error::Index {
                what: "effect",
                index: v,
                len: oc.object_count,
            });
        }
    }
    let wanted: BTreeSet<usize> = [e, e2, joined].into_iter().collect();
    let l = oc
        .loops
        .iter()
        .find(|l| {
            let objs: Vec<(usize, &Q)> = l.objects().collect();
            let support: BTreeSet<usize> = objs.iter().map(|(o, _)| *o).collect();
            if support != wanted {
                return false;
            }
            let k = |o: usize| objs.iter().find(|(x, _)| *x == o).map(|(_, c)| (*c).clone());
            let kj = k(joined).expect("in support");
            k(e) == Some(-kj.clone()) && k(e2) == Some(-kj)
        })
        .ok_or_else(|| {
            Error::Precondition(format!(
                "no loop E∨E' - E - E' = 0 through objects {joined}, {e}, {e2}"
            ))
        })?;
    let mut total = Q::zero();
    for (dec, w) in decs.iter().zip(mu) {
        let at = |o| oc.object_value(l, o, &dec.connection).expect("object on loop");
        total += w * (at(joined) - at(e) - at(e2));
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{build_object_complex, decompose, View};
    use crate::model::{find_equivalences, ObjectKind};
    use crate::rational::{frac, q};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn kolmogorov(weights: &[Q]) -> EventMeasure<Q> {
        EventMeasure::from_fn(names(weights.len()), |e| {
            e.iter().map(|&i| weights[i].clone()).sum()
        })
    }

    #[test]
    fn additive_measures_do_not_interfere() {
        let m = kolmogorov(&[frac(1, 2), frac(1, 3), frac(1, 6)]);
        let (a, b, cc) = (event(&[0]), event(&[1]), event(&[2]));
        assert_eq!(i2(&m, &a, &b).unwrap(), q(0));
        assert_eq!(i3(&m, &a, &b, &cc).unwrap(), q(0));
    }

    #[test]
    fn formula_arithmetic() {
        let mut m = EventMeasure::new(vec!["A".into(), "B".into()]);
        m.set(event(&[0]), frac(1, 4)).unwrap();
        m.set(event(&[1]), frac(1, 4)).unwrap();
        m.set(event(&[0, 1]), q(1)).unwrap();
        assert_eq!(i2(&m, &event(&[0]), &event(&[1])).unwrap(), frac(1, 2));
        assert!(i2(&m, &event(&[0]), &event(&[0, 1])).is_err());
    }

    #[test]
    fn planted_third_order_term() {
        // pairwise interference only, then shift the triple join by 1/8
        let base = kolmogorov(&[frac(1, 8), frac(1, 8), frac(1, 8)]);
        let mut m = base.clone();
        for (pair, bump) in [(&[0, 1], frac(1, 16)), (&[1, 2], frac(1, 32)), (&[0, 2], q(0))] {
            let e = event(pair);
            let v = m.get(&e).unwrap() + bump;
            m.set(e, v).unwrap();
        }
        let all = event(&[0, 1, 2]);
        let consistent = m.get(&all).unwrap() + frac(1, 16) + frac(1, 32);
        m.set(all, consistent + frac(1, 8)).unwrap();
        let (a, b, cc) = (event(&[0]), event(&[1]), event(&[2]));
        assert_eq!(i3(&m, &a, &b, &cc).unwrap(), frac(1, 8));
        // symmetric under permutations
        assert_eq!(i3(&m, &cc, &a, &b).unwrap(), frac(1, 8));
        assert_eq!(i3(&m, &b, &cc, &a).unwrap(), frac(1, 8));
    }

    #[test]
    fn quantum_i2_of_plus_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.0), c(s, 0.0)];
        let e0 = rank_one(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let e1 = rank_one(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let born = born_measure(&psi, &[e0.clone(), e1.clone()]);
        let direct = i2(&born, &event(&[0]), &event(&[1])).unwrap();
        assert!((quantum_i2(&psi, &e0, &e1).unwrap() - direct).abs() < 1e-12);
        assert!(quantum_i2(&psi, &e0, &e0).is_err());
    }

    #[test]
    fn two_slit_interference() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(s, 0.0), c(0.0, s)];
        let phi = [c(s, 0.0), c(s, 0.0)];
        let slits = [
            rank_one(&[c(1.0, 0.0), c(0.0, 0.0)]),
            rank_one(&[c(0.0, 0.0), c(1.0, 0.0)]),
        ];
        let m = path_measure(&psi, &phi, &slits);
        let a = inner(&phi, &apply(&slits[0], &psi));
        let b = inner(&phi, &apply(&slits[1], &psi));
        let expected = 2.0 * (a.conj() * b).re;
        assert!((i2(&m, &event(&[0]), &event(&[1])).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn connection_carries_second_order_interference() {
        // E = (1,0), E' = (0,1), E∨E' = (1,1)
        let effects = vec![vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]];
        let eqs = find_equivalences(ObjectKind::Effect, &effects);
        let oc = build_object_complex(ObjectKind::Effect, 3, &eqs, View::Topological).unwrap();
        let vals = [frac(1, 4), frac(1, 4), q(1)];
        let xi = oc.valuation_cochain(|o| vals[o].clone());
        let dec = decompose(&oc, &xi).unwrap();
        let got = i2_from_connection(&oc, &[dec.clone()], &[q(1)], 0, 1, 2).unwrap();
        assert_eq!(got, frac(1, 2));
        let zero = decompose(&oc, &oc.valuation_cochain(|o| [q(0), q(1), q(1)][o].clone())).unwrap();
        assert_eq!(i2_from_connection(&oc, &[zero], &[q(1)], 0, 1, 2).unwrap(), q(0));
        assert!(i2_from_connection(&oc, &[dec], &[q(1)], 0, 2, 1).is_err());
    }
}
