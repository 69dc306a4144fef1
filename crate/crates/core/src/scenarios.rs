//! Canonical fragments, empirical models and random corpora.
//!
//! This is the only module that touches floating point. Quantum values are
//! computed with complex amplitudes and rationalized under
//! [`DEFAULT_DENOMINATOR_BOUND`] before anything else sees them.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::ddg::SimplicialComplex;
use crate::error::{Error, Result};
use crate::interference::{Event, EventMeasure};
use crate::model::{EmpiricalModel, GptFragment, ObjectKind, OnticRepresentation};
use crate::noncontextuality::{response_vertices, ScaleCap};
use crate::rational::{frac, q, rationalize, Q, DEFAULT_DENOMINATOR_BOUND};
use crate::vorobyev::CompatibilityHypergraph;

/// Deterministic generator for every randomized corpus.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn rat(x: f64) -> Result<Q> {
    rationalize(x, DEFAULT_DENOMINATOR_BOUND)
}

fn unit(i: usize, n: usize) -> Vec<Q> {
    (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()
}

/// The `n`-outcome classical simplex theory.
pub fn classical_simplex(n: usize) -> Result<GptFragment> {
    if n < 2 {
        return Err(Error::Precondition(format!("simplex needs n >= 2, got {n}")));
    }
    Ok(GptFragment {
        dimension: n,
        states: (0..n).map(|i| unit(i, n)).collect(),
        effects: (0..n).map(|i| unit(i, n)).collect(),
        unit_effect: vec![Q::one(); n],
        transformations: vec![],
        measurements: vec![(0..n).collect()],
    })
}

/// The square-state bit: states `(±1, ±1, 1)` around the square, two binary
/// measurements along the axes.
pub fn gbit() -> GptFragment {
    let h = frac(1, 2);
    let v = |x: i64, y: i64| vec![q(x), q(y), q(1)];
    GptFragment {
        dimension: 3,
        states: vec![v(1, 1), v(-1, 1), v(-1, -1), v(1, -1)],
        effects: vec![
            vec![h.clone(), q(0), h.clone()],
            vec![-h.clone(), q(0), h.clone()],
            vec![q(0), h.clone(), h.clone()],
            vec![q(0), -h.clone(), h.clone()],
        ],
        unit_effect: vec![q(0), q(0), q(1)],
        transformations: vec![],
        measurements: vec![vec![0, 1], vec![2, 3]],
    }
}

/// A two-party box with binary inputs and outputs, `p[x][y][2a + b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryBox {
    pub p: Vec<Vec<Vec<Q>>>,
}

impl BinaryBox {
    pub fn from_fn(x_count: usize, y_count: usize, f: impl Fn(usize, usize, usize, usize) -> Q) -> Self {
        BinaryBox {
            p: (0..x_count)
                .map(|x| {
                    (0..y_count)
                        .map(|y| (0..4).map(|i| f(i / 2, i % 2, x, y)).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn inputs(&self) -> (usize, usize) {
        (self.p.len(), self.p.first().map_or(0, Vec::len))
    }

    /// Contexts `(A_x, B_y)` with `x` slowest.
    pub fn model(&self) -> Result<EmpiricalModel> {
        let (xs, ys) = self.inputs();
        let contexts: Vec<Vec<String>> = (0..xs)
            .flat_map(|x| (0..ys).map(move |y| vec![format!("A{x}"), format!("B{y}")]))
            .collect();
        let h = CompatibilityHypergraph::from_named(&contexts)?;
        let outcomes = vec![2; h.measurements.len()];
        EmpiricalModel::new(h, outcomes, self.p.iter().flatten().cloned().collect())
    }

    pub fn correlator(&self, x: usize, y: usize) -> Q {
        let t = &self.p[x][y];
        &t[0] - &t[1] - &t[2] + &t[3]
    }

    /// `E00 + E01 + E10 - E11`.
    pub fn chsh(&self) -> Q {
        self.correlator(0, 0) + self.correlator(0, 1) + self.correlator(1, 0) - self.correlator(1, 1)
    }

    /// `p(a|x)`, read off the `y = 0` column.
    pub fn alice_marginal(&self, a: usize, x: usize) -> Q {
        &self.p[x][0][2 * a] + &self.p[x][0][2 * a + 1]
    }

    /// Bob's side as a prepare-and-measure fragment steered by Alice.
    ///
    /// State `2x + a` is `(1, p(b=0|y,a,x))_y`; measurement `y` has effects
    /// `e_{y+1}` and `e_0 - e_{y+1}`. Requires every `p(a|x) > 0`.
    pub fn steering_fragment(&self) -> Result<GptFragment> {
        let (xs, ys) = self.inputs();
        let d = ys + 1;
        let mut states = Vec::with_capacity(2 * xs);
        for x in 0..xs {
            for a in 0..2 {
                let w = self.alice_marginal(a, x);
                if !w.is_positive() {
                    return Err(Error::Precondition(format!("p(a={a}|x={x}) = 0 leaves no steered state")));
                }
                let mut s = vec![Q::one()];
                s.extend((0..ys).map(|y| &self.p[x][y][2 * a] / &w));
                states.push(s);
            }
        }
        let mut effects = Vec::with_capacity(2 * ys);
        for y in 0..ys {
            let e = unit(y + 1, d);
            let mut rest = unit(0, d);
            rest[y + 1] = q(-1);
            effects.push(e);
            effects.push(rest);
        }
        Ok(GptFragment {
            dimension: d,
            states,
            effects,
            unit_effect: unit(0, d),
            transformations: vec![],
            measurements: (0..ys).map(|y| vec![2 * y, 2 * y + 1]).collect(),
        })
    }
}

/// `a ⊕ b = x·y` with probability one, uniformly.
pub fn pr_box_table() -> BinaryBox {
    BinaryBox::from_fn(2, 2, |a, b, x, y| if a ^ b == x & y { frac(1, 2) } else { q(0) })
}

pub fn pr_box() -> EmpiricalModel {
    pr_box_table().model().expect("PR box is well formed")
}

/// `v·PR + (1-v)·uniform`.
pub fn noisy_pr_box_table(v: &Q) -> BinaryBox {
    let pr = pr_box_table();
    let noise = (Q::one() - v) / q(4);
    BinaryBox::from_fn(2, 2, |a, b, x, y| v * &pr.p[x][y][2 * a + b] + &noise)
}

pub fn noisy_pr_box(v: &Q) -> Result<EmpiricalModel> {
    if v.is_negative() || *v > Q::one() {
        return Err(Error::Precondition(format!("visibility {v} outside [0, 1]")));
    }
    noisy_pr_box_table(v).model()
}

/// Measurement angles in the x-z plane of the Bloch sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChshAngles {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

/// Optimal settings on `|Φ+⟩`: `E = cos(a - b)` gives `±1/√2` on every pair.
pub const TSIRELSON_ANGLES: ChshAngles = ChshAngles {
    a: [0.0, FRAC_PI_2],
    b: [FRAC_PI_4, -FRAC_PI_4],
};

/// Eigenvector of `cos θ Z + sin θ X` for outcome `k`.
fn xz_vector(theta: f64, k: usize) -> [Complex64; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    if k == 0 {
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)]
    } else {
        [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)]
    }
}

fn phi_plus_born(theta: f64, phi: f64, a: usize, b: usize) -> f64 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let psi = [Complex64::new(r, 0.0), Complex64::zero(), Complex64::zero(), Complex64::new(r, 0.0)];
    let u = xz_vector(theta, a);
    let v = xz_vector(phi, b);
    let amp: Complex64 = (0..4).map(|i| (u[i / 2] * v[i % 2]).conj() * psi[i]).sum();
    amp.norm_sqr()
}

/// Born-rule box on `|Φ+⟩`.
///
/// Marginal biases and correlators are rationalized separately and the table
/// is rebuilt from them, so the result is exactly non-signalling.
pub fn chsh_quantum_table(angles: ChshAngles) -> Result<BinaryBox> {
    if angles.a.iter().chain(&angles.b).any(|t| !t.is_finite()) {
        return Err(Error::Precondition("angles must be finite".into()));
    }
    let born = |x: usize, y: usize, a: usize, b: usize| phi_plus_born(angles.a[x], angles.b[y], a, b);
    let bias_a: Vec<Q> = (0..2)
        .map(|x| rat(born(x, 0, 0, 0) + born(x, 0, 0, 1) - born(x, 0, 1, 0) - born(x, 0, 1, 1)))
        .collect::<Result<_>>()?;
    let bias_b: Vec<Q> = (0..2)
        .map(|y| rat(born(0, y, 0, 0) + born(0, y, 1, 0) - born(0, y, 0, 1) - born(0, y, 1, 1)))
        .collect::<Result<_>>()?;
    let mut corr = vec![vec![Q::zero(); 2]; 2];
    for (x, row) in corr.iter_mut().enumerate() {
        for (y, c) in row.iter_mut().enumerate() {
            *c = rat(born(x, y, 0, 0) - born(x, y, 0, 1) - born(x, y, 1, 0) + born(x, y, 1, 1))?;
        }
    }
    let sign = |k: usize| if k == 0 { q(1) } else { q(-1) };
    let table = BinaryBox::from_fn(2, 2, |a, b, x, y| {
        (Q::one() + sign(a) * &bias_a[x] + sign(b) * &bias_b[y] + sign(a ^ b) * &corr[x][y]) / q(4)
    });
    if table.p.iter().flatten().flatten().any(Signed::is_negative) {
        return Err(Error::Precondition("rationalized table went negative".into()));
    }
    Ok(table)
}

pub fn chsh_quantum(angles: ChshAngles) -> Result<EmpiricalModel> {
    chsh_quantum_table(angles)?.model()
}

/// Qutrit state and five projectors with `⟨ψ|v_k⟩² = 1/√5`, `v_k ⊥ v_{k+1}`.
fn kcbs_vectors() -> ([Complex64; 3], Vec<[Complex64; 3]>) {
    let cos2 = 1.0 / 5f64.sqrt();
    let (c, s) = (cos2.sqrt(), (1.0 - cos2).sqrt());
    let psi = [Complex64::one(), Complex64::zero(), Complex64::zero()];
    let vs = (0..5)
        .map(|k| {
            let t = 4.0 * PI * k as f64 / 5.0;
            [
                Complex64::new(c, 0.0),
                Complex64::new(s * t.cos(), 0.0),
                Complex64::new(s * t.sin(), 0.0),
            ]
        })
        .collect();
    (psi, vs)
}

fn overlap(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Five binary measurements on a cycle, contexts `{k, k+1}`. Adjacent
/// projectors are orthogonal, so `p(1, 1) = 0` in every context.
pub fn kcbs_quantum() -> Result<EmpiricalModel> {
    let (psi, vs) = kcbs_vectors();
    let mut tables = Vec::with_capacity(5);
    for k in 0..5 {
        let (u, v) = (&vs[k], &vs[(k + 1) % 5]);
        if overlap(u, v).norm() > 1e-12 {
            return Err(Error::Precondition("KCBS projectors are not orthogonal".into()));
        }
        let pu = rat(overlap(u, &psi).norm_sqr())?;
        let pv = rat(overlap(v, &psi).norm_sqr())?;
        tables.push(vec![Q::one() - &pu - &pv, pv, pu, Q::zero()]);
    }
    let contexts: Vec<Vec<String>> = (0..5)
        .map(|k| {
            let mut c = [k, (k + 1) % 5];
            c.sort();
            vec![format!("K{}", c[0]), format!("K{}", c[1])]
        })
        .collect();
    // contexts are written low-high, so the table of {0, 4} is transposed
    let mut fixed = tables.clone();
    fixed[4] = vec![tables[4][0].clone(), tables[4][2].clone(), tables[4][1].clone(), tables[4][3].clone()];
    let h = CompatibilityHypergraph::from_named(&contexts)?;
    EmpiricalModel::new(h, vec![2; 5], fixed)
}

/// `Σ_k p(K_k = 1)` for a five-cycle model.
pub fn kcbs_sum(m: &EmpiricalModel) -> Q {
    (0..m.hypergraph.measurements.len())
        .map(|k| {
            let c = m.hypergraph.contexts.iter().position(|c| c.contains(&k)).expect("measured");
            m.marginal(c, &[k])[1].clone()
        })
        .fold(Q::zero(), |a, b| a + b)
}

/// Rational point on the unit sphere close to `n`, via stereographic
/// coordinates so the norm is exactly one.
fn exact_direction(n: [f64; 3]) -> Result<[Q; 3]> {
    let len = n.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Precondition("direction must be nonzero and finite".into()));
    }
    let [x, y, z] = n.map(|c| c / len);
    if 1.0 + z < 1e-9 {
        return Ok([q(0), q(0), q(-1)]);
    }
    let u = rat(x / (1.0 + z))?;
    let v = rat(y / (1.0 + z))?;
    let r2 = &u * &u + &v * &v;
    let den = Q::one() + &r2;
    Ok([q(2) * &u / &den, q(2) * &v / &den, (Q::one() - &r2) / &den])
}

/// Qubit states `(1, r)` from Bloch points and a two-outcome measurement
/// `½(1, ±n)` per axis. Pairing is `tr(ρE)`.
pub fn qubit_fragment(points: &[[f64; 3]], axes: &[[f64; 3]]) -> Result<GptFragment> {
    if points.is_empty() || axes.is_empty() {
        return Err(Error::Precondition("need at least one state and one axis".into()));
    }
    let mut states = Vec::with_capacity(points.len());
    for p in points {
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > 1.0 + 1e-9 {
            return Err(Error::Precondition(format!("Bloch vector {p:?} has norm {norm} > 1")));
        }
        let mut s = vec![Q::one()];
        if norm > 0.0 {
            let len = rat(norm.min(1.0))?;
            s.extend(exact_direction(*p)?.iter().map(|c| c * &len));
        } else {
            s.extend([q(0), q(0), q(0)]);
        }
        states.push(s);
    }
    let half = frac(1, 2);
    let mut effects = Vec::with_capacity(2 * axes.len());
    for n in axes {
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::Precondition(format!("axis {n:?} is not a unit vector")));
        }
        let d = exact_direction(*n)?;
        for sign in [q(1), q(-1)] {
            let mut e = vec![half.clone()];
            e.extend(d.iter().map(|c| &half * &sign * c));
            effects.push(e);
        }
    }
    let f = GptFragment {
        dimension: 4,
        states,
        effects,
        unit_effect: unit(0, 4),
        transformations: vec![],
        measurements: (0..axes.len()).map(|k| vec![2 * k, 2 * k + 1]).collect(),
    };
    debug_assert!(f.validate().map(|r| r.is_valid()).unwrap_or(false));
    Ok(f)
}

/// Two-qubit Pauli string `σ_i ⊗ σ_j` as `4i + j`, with `0..4 = I, X, Y, Z`.
type Pauli = usize;

/// `σ_a σ_b = phase · σ_c` for single qubits, phase as a power of `i`.
fn pauli_mul1(a: usize, b: usize) -> (u8, usize) {
    match (a, b) {
        (0, x) | (x, 0) => (0, x),
        (x, y) if x == y => (0, 0),
        (x, y) => {
            let c = 6 - x - y;
            // cyclic XYZ picks up +i, anticyclic -i
            if (x % 3) + 1 == y {
                (1, c)
            } else {
                (3, c)
            }
        }
    }
}

fn pauli_mul(a: Pauli, b: Pauli) -> (u8, Pauli) {
    let (p1, c1) = pauli_mul1(a / 4, b / 4);
    let (p2, c2) = pauli_mul1(a % 4, b % 4);
    ((p1 + p2) % 4, 4 * c1 + c2)
}

/// Peres-Mermin square as 24 rank-one effects in two-qubit Pauli
/// coordinates, four per row or column. States are the maximally mixed
/// state and the eigenbasis of the first row.
///
/// No deterministic choice of one effect per context respects every effect
/// equivalence.
pub fn peres_mermin_fragment() -> GptFragment {
    const X: usize = 1;
    const Y: usize = 2;
    const Z: usize = 3;
    let p = |a: usize, b: usize| 4 * a + b;
    let square = [
        [p(X, 0), p(0, X), p(X, X)],
        [p(0, Y), p(Y, 0), p(Y, Y)],
        [p(X, Y), p(Y, X), p(Z, Z)],
    ];
    let mut contexts: Vec<[Pauli; 3]> = square.to_vec();
    contexts.extend((0..3).map(|c| [square[0][c], square[1][c], square[2][c]]));
    let mut effects = Vec::new();
    let mut measurements = Vec::new();
    for ctx in &contexts {
        let (phase, prod) = pauli_mul(ctx[0], ctx[1]);
        debug_assert!(phase % 2 == 0 && prod == ctx[2]);
        let prod_sign = if phase == 0 { 1 } else { -1 };
        let mut m = Vec::new();
        for s1 in [1i64, -1] {
            for s2 in [1i64, -1] {
                let mut e = vec![Q::zero(); 16];
                e[0] += frac(1, 4);
                e[ctx[0]] += frac(s1, 4);
                e[ctx[1]] += frac(s2, 4);
                e[prod] += frac(s1 * s2 * prod_sign, 4);
                m.push(effects.len());
                effects.push(e);
            }
        }
        measurements.push(m);
    }
    let mut states = vec![unit(0, 16)];
    for &r in &measurements[0] {
        // a rank-one projector ρ has coordinates tr(ρ σ) = 4·(its own coefficient)
        states.push(effects[r].iter().map(|c| c * q(4)).collect());
    }
    GptFragment {
        dimension: 16,
        states,
        effects,
        unit_effect: unit(0, 16),
        transformations: vec![],
        measurements,
    }
}

/// A hypergraph built by attaching each new context to a parent through a
/// shared separator, so it has a join tree by construction.
#[derive(Clone, Debug)]
pub struct JoinTree {
    pub hypergraph: CompatibilityHypergraph,
    pub parent: Vec<Option<usize>>,
}

pub fn random_acyclic_hypergraph<R: Rng + ?Sized>(rng: &mut R, max_contexts: usize) -> JoinTree {
    let n_ctx = rng.gen_range(2..=max_contexts.max(2));
    let mut next = 0usize;
    let mut fresh = |k: usize| -> Vec<usize> {
        let v = (next..next + k).collect();
        next += k;
        v
    };
    let mut contexts: Vec<Vec<usize>> = vec![fresh(rng.gen_range(1..=3))];
    let mut parent = vec![None];
    while contexts.len() < n_ctx {
        let p = rng.gen_range(0..contexts.len());
        let mut sep = contexts[p].clone();
        sep.shuffle(rng);
        sep.truncate(rng.gen_range(1..=sep.len()));
        let mut ctx = sep;
        ctx.extend(fresh(rng.gen_range(1..=2)));
        ctx.sort();
        contexts.push(ctx);
        parent.push(Some(p));
    }
    let names = (0..next).map(|m| format!("m{m}")).collect();
    JoinTree {
        hypergraph: CompatibilityHypergraph::new(names, contexts).expect("fresh measurements keep contexts distinct"),
        parent,
    }
}

fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Q> {
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=6)).collect();
    let total: i64 = w.iter().sum();
    if total == 0 {
        return vec![frac(1, n as i64); n];
    }
    w.into_iter().map(|x| frac(x, total)).collect()
}

/// Random non-disturbing binary model on a join tree: a random table at the
/// root, then each child agrees with its parent on the separator and picks
/// random conditionals for its fresh measurements.
pub fn random_nondisturbing_model<R: Rng + ?Sized>(rng: &mut R, tree: &JoinTree) -> Result<EmpiricalModel> {
    let h = &tree.hypergraph;
    let outcomes = vec![2; h.measurements.len()];
    let mut tables: Vec<Vec<Q>> = Vec::with_capacity(h.contexts.len());
    for (c, ctx) in h.contexts.iter().enumerate() {
        let size = 1usize << ctx.len();
        let Some(p) = tree.parent[c] else {
            tables.push(random_distribution(rng, size));
            continue;
        };
        let partial = EmpiricalModel {
            hypergraph: CompatibilityHypergraph {
                measurements: h.measurements.clone(),
                contexts: h.contexts[..c].to_vec(),
            },
            outcomes: outcomes.clone(),
            tables: tables.clone(),
        };
        let sep: Vec<usize> = ctx.iter().copied().filter(|m| h.contexts[p].contains(m)).collect();
        let sep_table = partial.marginal(p, &sep);
        let fresh_count = ctx.len() - sep.len();
        let cond: Vec<Vec<Q>> = (0..sep_table.len())
            .map(|_| random_distribution(rng, 1 << fresh_count))
            .collect();
        let mut table = vec![Q::zero(); size];
        for (i, cell) in table.iter_mut().enumerate() {
            let bits: Vec<usize> = (0..ctx.len()).map(|k| (i >> (ctx.len() - 1 - k)) & 1).collect();
            let (mut s, mut f) = (0usize, 0usize);
            for (k, m) in ctx.iter().enumerate() {
                if sep.contains(m) {
                    s = 2 * s + bits[k];
                } else {
                    f = 2 * f + bits[k];
                }
            }
            *cell = &sep_table[s] * &cond[s][f];
        }
        tables.push(table);
    }
    EmpiricalModel::new(h.clone(), outcomes, tables)
}

/// Random pure-ish complex: maximal simplices on at most `vertices` vertices,
/// regenerated until it has at most `max_simplices` simplices.
pub fn random_complex<R: Rng + ?Sized>(rng: &mut R, vertices: usize, max_simplices: usize) -> SimplicialComplex {
    loop {
        let count = rng.gen_range(1..=4);
        let maximal: Vec<Vec<usize>> = (0..count)
            .map(|_| {
                let mut vs: Vec<usize> = (0..vertices).collect();
                vs.shuffle(rng);
                vs.truncate(rng.gen_range(1..=4.min(vertices)));
                vs
            })
            .collect();
        let k = SimplicialComplex::from_maximal(&maximal).expect("nonempty simplices");
        if k.total_simplices() <= max_simplices {
            return k;
        }
    }
}

/// Local box from a random mixture of the 16 deterministic strategies, with a
/// little white noise so every steered state exists.
pub fn random_local_box<R: Rng + ?Sized>(rng: &mut R) -> BinaryBox {
    let w = random_distribution(rng, 16);
    let noise = frac(rng.gen_range(1..=4), 10);
    let keep = Q::one() - &noise;
    BinaryBox::from_fn(2, 2, |a, b, x, y| {
        let det: Q = (0..16)
            .filter(|s| (s >> x) & 1 == a && (s >> (2 + y)) & 1 == b)
            .map(|s| w[s].clone())
            .fold(Q::zero(), |acc, v| acc + v);
        &keep * det + &noise / q(4)
    })
}

fn random_bloch<R: Rng + ?Sized>(rng: &mut R, max_norm: f64) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0f64)];
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            let r = rng.gen_range(0.0..max_norm);
            return v.map(|c| c / n * r);
        }
    }
}

/// Qubit fragment with random states and 2 or 3 random axes.
pub fn random_qubit_fragment<R: Rng + ?Sized>(rng: &mut R) -> Result<GptFragment> {
    let states: Vec<[f64; 3]> = (0..rng.gen_range(3..=5)).map(|_| random_bloch(rng, 1.0)).collect();
    let axes: Vec<[f64; 3]> = (0..rng.gen_range(2..=3))
        .map(|_| {
            let v = random_bloch(rng, 1.0);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-3);
            v.map(|c| c / n)
        })
        .collect();
    qubit_fragment(&states, &axes)
}

/// Random ontic model for `f`.
///
/// With `contextual = false` the effect responses are response-polytope
/// vertices and `μ(λ|P) = <E_λ, P>` for the effects of one measurement, so
/// every equivalence is respected. Otherwise the tables are independent
/// random rationals.
pub fn random_ontic<R: Rng + ?Sized>(rng: &mut R, f: &GptFragment, contextual: bool) -> Result<OnticRepresentation> {
    let m = &f.measurements[rng.gen_range(0..f.measurements.len())];
    let lambda_count = m.len();
    if contextual {
        let mut col = |n: usize| -> Vec<Vec<Q>> {
            (0..n).map(|_| (0..lambda_count).map(|_| frac(rng.gen_range(0..=8), 8)).collect()).collect()
        };
        let by_state = col(f.states.len());
        let xi = col(f.effects.len());
        let mu = (0..lambda_count)
            .map(|l| by_state.iter().map(|row| row[l].clone()).collect())
            .collect();
        return Ok(OnticRepresentation {
            lambda_count,
            mu,
            xi,
            gamma: None,
        });
    }
    let eqs = f.equivalences(ObjectKind::Effect);
    let verts = response_vertices(f, &eqs, ScaleCap::default())?.vertices;
    if verts.is_empty() {
        return Err(Error::Precondition("fragment has no noncontextual responses".into()));
    }
    let chosen: Vec<&Vec<Q>> = (0..lambda_count).map(|_| &verts[rng.gen_range(0..verts.len())]).collect();
    Ok(OnticRepresentation {
        lambda_count,
        mu: m
            .iter()
            .map(|&r| f.states.iter().map(|s| crate::linalg::dot(&f.effects[r], s)).collect())
            .collect(),
        xi: (0..f.effects.len()).map(|r| chosen.iter().map(|v| v[r].clone()).collect()).collect(),
        gamma: None,
    })
}

/// Random additive measure on `n` atoms with rational weights.
pub fn random_kolmogorov_measure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> EventMeasure<Q> {
    let w = random_distribution(rng, n);
    EventMeasure::from_fn((0..n).map(|i| format!("x{i}")).collect(), |e: &Event| {
        e.iter().fold(Q::zero(), |acc, &i| acc + &w[i])
    })
}

/// A fragment together with the empirical model it induces, when there is
/// a natural one.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub fragment: GptFragment,
    pub model: Option<EmpiricalModel>,
}

/// Fixed scenarios plus `random` seeded local boxes and qubit fragments.
pub fn fragment_corpus(seed: u64, random: usize) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for n in 2..=4 {
        let f = classical_simplex(n)?;
        let p: Vec<Q> = (0..n).map(|i| frac(i as i64 + 1, (n * (n + 1) / 2) as i64)).collect();
        let h = CompatibilityHypergraph::new(vec!["M".into()], vec![vec![0]])?;
        out.push(CorpusEntry {
            name: format!("classical-simplex-{n}"),
            fragment: f,
            model: Some(EmpiricalModel::new(h, vec![n], vec![p])?),
        });
    }
    out.push(CorpusEntry {
        name: "gbit".into(),
        fragment: gbit(),
        model: None,
    });
    let mut boxes = vec![("pr-box".to_string(), pr_box_table())];
    for (n, d) in [(1, 4), (1, 2), (5, 8), (3, 4), (7, 8)] {
        boxes.push((format!("noisy-pr-box-{n}/{d}"), noisy_pr_box_table(&frac(n, d))));
    }
    boxes.push(("chsh-tsirelson".into(), chsh_quantum_table(TSIRELSON_ANGLES)?));
    let mut rng = seeded(seed);
    for i in 0..random {
        boxes.push((format!("local-box-{i}"), random_local_box(&mut rng)));
    }
    for (name, b) in boxes {
        out.push(CorpusEntry {
            name: format!("steering/{name}"),
            fragment: b.steering_fragment()?,
            model: Some(b.model()?),
        });
    }
    out.push(CorpusEntry {
        name: "qubit-stabilizer".into(),
        fragment: qubit_fragment(
            &[[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
            &[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
        )?,
        model: None,
    });
    for i in 0..random {
        out.push(CorpusEntry {
            name: format!("qubit-{i}"),
            fragment: random_qubit_fragment(&mut rng)?,
            model: None,
        });
    }
    Ok(out)
}

/// Model with a shared measurement `b` whose marginal differs by `gap`
/// between the contexts `{a, b}` and `{b, c}`.
pub fn planted_gap(gap: &Q) -> Result<EmpiricalModel> {
    let half = frac(1, 2);
    if gap.abs() > half {
        return Err(Error::Precondition(format!("gap {gap} outside [-1/2, 1/2]")));
    }
    let h = CompatibilityHypergraph::from_named(&[
        vec!["a".into(), "b".into()],
        vec!["b".into(), "c".into()],
    ])?;
    let b0 = &half + gap;
    let b1 = &half - gap;
    EmpiricalModel::new(
        h,
        vec![2; 3],
        vec![
            vec![frac(1, 4); 4],
            vec![&b0 / q(2), &b0 / q(2), &b1 / q(2), &b1 / q(2)],
        ],
    )
}

/// Noisy PR box with the `B0` marginal of the `(A1, B0)` context tilted:
/// up to `gap / 2` of mass moves from `b = 1` to `b = 0` in each `a` row.
pub fn disturbed_pr_box(v: &Q, gap: &Q) -> Result<EmpiricalModel> {
    let mut b = noisy_pr_box_table(v);
    let t = &mut b.p[1][0];
    for a in 0..2 {
        let shift = (gap / q(2)).min(t[2 * a + 1].clone());
        t[2 * a] += &shift;
        t[2 * a + 1] -= &shift;
    }
    b.model()
}

pub struct ScenarioInfo {
    pub name: &'static str,
    pub produces: &'static str,
    pub params: &'static str,
}

pub const CATALOG: &[ScenarioInfo] = &[
    ScenarioInfo { name: "classical-simplex", produces: "fragment", params: "n=2" },
    ScenarioInfo { name: "gbit", produces: "fragment", params: "" },
    ScenarioInfo { name: "pr-box", produces: "model", params: "" },
    ScenarioInfo { name: "noisy-pr-box", produces: "model", params: "v=1" },
    ScenarioInfo { name: "pr-box-fragment", produces: "fragment", params: "v=1" },
    ScenarioInfo { name: "chsh-quantum", produces: "model", params: "a0,a1,b0,b1 (radians, default Tsirelson)" },
    ScenarioInfo { name: "chsh-fragment", produces: "fragment", params: "a0,a1,b0,b1" },
    ScenarioInfo { name: "kcbs-quantum", produces: "model", params: "" },
    ScenarioInfo { name: "qubit", produces: "fragment", params: "states=x:y:z;..., axes=x:y:z;..." },
    ScenarioInfo { name: "peres-mermin", produces: "fragment", params: "" },
    ScenarioInfo { name: "planted-gap", produces: "model", params: "gap=1/4" },
    ScenarioInfo { name: "disturbed-pr-box", produces: "model", params: "v=1, gap=1/4" },
    ScenarioInfo { name: "random-acyclic", produces: "model", params: "seed=0" },
];

fn param<'a>(params: &'a BTreeMap<String, String>, key: &str) -> Option<&'a str> {
    params.get(key).map(String::as_str)
}

fn q_param(params: &BTreeMap<String, String>, key: &str, default: Q) -> Result<Q> {
    param(params, key).map_or(Ok(default), crate::rational::parse)
}

fn f64_param(params: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    param(params, key).map_or(Ok(default), |s| match s.parse() {
        Ok(x) => Ok(x),
        Err(_) => crate::rational::parse(s)
            .map(|x| crate::rational::to_f64(&x))
            .map_err(|_| Error::Parse(format!("{key}={s:?} is not a number"))),
    })
}

fn points(s: &str) -> Result<Vec<[f64; 3]>> {
    s.split(';')
        .map(|p| {
            let c: Vec<f64> = p
                .split(':')
                .map(|x| x.trim().parse().map_err(|_| Error::Parse(format!("bad coordinate in {p:?}"))))
                .collect::<Result<_>>()?;
            <[f64; 3]>::try_from(c).map_err(|_| Error::Parse(format!("{p:?} needs three coordinates")))
        })
        .collect()
}

fn angles(params: &BTreeMap<String, String>) -> Result<ChshAngles> {
    let d = TSIRELSON_ANGLES;
    Ok(ChshAngles {
        a: [f64_param(params, "a0", d.a[0])?, f64_param(params, "a1", d.a[1])?],
        b: [f64_param(params, "b0", d.b[0])?, f64_param(params, "b1", d.b[1])?],
    })
}

/// Builds a catalog scenario and returns its JSON file form.
pub fn emit(name: &str, params: &BTreeMap<String, String>) -> Result<Value> {
    let allowed: &[&str] = match name {
        "classical-simplex" => &["n"],
        "noisy-pr-box" | "pr-box-fragment" => &["v"],
        "chsh-quantum" | "chsh-fragment" => &["a0", "a1", "b0", "b1"],
        "qubit" => &["states", "axes"],
        "planted-gap" => &["gap"],
        "disturbed-pr-box" => &["v", "gap"],
        "random-acyclic" => &["seed"],
        _ => &[],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!("scenario {name:?} takes no parameter {k:?}")));
    }
    let model = |m: EmpiricalModel| Ok(serde_json::to_value(m)?);
    let fragment = |f: GptFragment| Ok(serde_json::to_value(f)?);
    match name {
        "classical-simplex" => {
            let n = param(params, "n").unwrap_or("2");
            fragment(classical_simplex(n.parse().map_err(|_| Error::Parse(format!("n={n:?}")))?)?)
        }
        "gbit" => fragment(gbit()),
        "pr-box" => model(pr_box()),
        "noisy-pr-box" => model(noisy_pr_box(&q_param(params, "v", q(1))?)?),
        "pr-box-fragment" => fragment(noisy_pr_box_table(&q_param(params, "v", q(1))?).steering_fragment()?),
        "chsh-quantum" => model(chsh_quantum(angles(params)?)?),
        "chsh-fragment" => fragment(chsh_quantum_table(angles(params)?)?.steering_fragment()?),
        "kcbs-quantum" => model(kcbs_quantum()?),
        "qubit" => {
            let states = points(param(params, "states").unwrap_or("0:0:1;0:0:-1;1:0:0;-1:0:0"))?;
            let axes = points(param(params, "axes").unwrap_or("0:0:1;1:0:0"))?;
            fragment(qubit_fragment(&states, &axes)?)
        }
        "peres-mermin" => fragment(peres_mermin_fragment()),
        "planted-gap" => model(planted_gap(&q_param(params, "gap", frac(1, 4))?)?),
        "disturbed-pr-box" => model(disturbed_pr_box(
            &q_param(params, "v", q(1))?,
            &q_param(params, "gap", frac(1, 4))?,
        )?),
        "random-acyclic" => {
            let seed = param(params, "seed").unwrap_or("0");
            let seed = seed.parse().map_err(|_| Error::Parse(format!("seed={seed:?}")))?;
            let mut rng = seeded(seed);
            let tree = random_acyclic_hypergraph(&mut rng, 4);
            model(random_nondisturbing_model(&mut rng, &tree)?)
        }
        _ => Err(Error::Unsupported(format!("unknown scenario {name:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disturbance::detect_disturbance;
    use crate::noncontextuality::{contextual_fraction, global_assignments};
    use crate::rational::to_f64;
    use crate::vorobyev::is_acyclic;

    fn valid(f: &GptFragment) -> bool {
        f.validate().unwrap().is_valid()
    }

    #[test]
    fn simplex_and_gbit_are_valid() {
        assert!(classical_simplex(1).is_err());
        for n in 2..6 {
            let f = classical_simplex(n).unwrap();
            assert!(valid(&f));
            assert!(f.equivalences(ObjectKind::State).is_empty());
        }
        let g = gbit();
        assert!(valid(&g));
        let eqs = g.equivalences(ObjectKind::State);
        assert_eq!(eqs.len(), 1);
        assert_eq!(eqs[0].coefficients.len(), 4);
    }

    #[test]
    fn pr_box_value_is_four() {
        assert_eq!(pr_box_table().chsh(), q(4));
        assert!(detect_disturbance(&pr_box()).is_empty());
        // the PR tables are the gbit pairings of a product of square states
        let g = gbit();
        let pr = pr_box_table();
        for x in 0..2 {
            for a in 0..2 {
                let s = pr.steering_fragment().unwrap().states[2 * x + a].clone();
                assert!(s[1..].iter().all(|v| v.is_zero() || v.is_one()));
            }
        }
        assert!(valid(&g));
    }

    #[test]
    fn tsirelson_value() {
        let b = chsh_quantum_table(TSIRELSON_ANGLES).unwrap();
        assert!((to_f64(&b.chsh()) - 2.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!(detect_disturbance(&b.model().unwrap()).is_empty());
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for i in 0..4 {
                let born = phi_plus_born(TSIRELSON_ANGLES.a[x], TSIRELSON_ANGLES.b[y], i / 2, i % 2);
                assert!((to_f64(&b.p[x][y][i]) - born).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn kcbs_beats_the_classical_bound() {
        let m = kcbs_quantum().unwrap();
        assert!(detect_disturbance(&m).is_empty());
        let s = to_f64(&kcbs_sum(&m));
        assert!((s - 5f64.sqrt()).abs() < 1e-5, "{s}");
        assert!(s > 2.0);
    }

    #[test]
    fn qubit_zero_state_on_x_axis_gives_half() {
        let f = qubit_fragment(&[[0.0, 0.0, 1.0]], &[[1.0, 0.0, 0.0]]).unwrap();
        assert!(valid(&f));
        assert_eq!(f.probability(0, None, 0).unwrap(), frac(1, 2));
        assert!(qubit_fragment(&[[1.0, 1.0, 0.0]], &[[1.0, 0.0, 0.0]]).is_err());
        assert!(qubit_fragment(&[[0.0, 0.0, 1.0]], &[[2.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn qubit_probabilities_match_density_matrices() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let r = random_bloch(&mut rng, 1.0);
            let n = {
                let v = random_bloch(&mut rng, 1.0);
                let l = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.map(|c| c / l)
            };
            let f = qubit_fragment(&[r], &[n]).unwrap();
            assert!(valid(&f));
            // tr(ρ P) with ρ = (1 + r·σ)/2 and P = (1 + n·σ)/2
            let i = Complex64::i();
            let one = Complex64::one();
            let rho = [
                [(one + r[2]) / 2.0, (r[0] - i * r[1]) / 2.0],
                [(r[0] + i * r[1]) / 2.0, (one - r[2]) / 2.0],
            ];
            let proj = [
                [(one + n[2]) / 2.0, (n[0] - i * n[1]) / 2.0],
                [(n[0] + i * n[1]) / 2.0, (one - n[2]) / 2.0],
            ];
            let tr: Complex64 = (0..2).flat_map(|a| (0..2).map(move |b| (a, b))).map(|(a, b)| rho[a][b] * proj[b][a]).sum();
            assert!((to_f64(&f.probability(0, None, 0).unwrap()) - tr.re).abs() < 1e-5);
        }
    }

    #[test]
    fn peres_mermin_is_valid_with_fourteen_effect_equivalences() {
        let f = peres_mermin_fragment();
        assert!(valid(&f));
        assert_eq!(f.equivalences(ObjectKind::Effect).len(), 14);
    }

    #[test]
    fn steering_fragment_reproduces_conditionals() {
        let b = noisy_pr_box_table(&frac(3, 4));
        let f = b.steering_fragment().unwrap();
        assert!(valid(&f));
        assert_eq!(f.equivalences(ObjectKind::State).len(), 1);
        for x in 0..2 {
            for a in 0..2 {
                for y in 0..2 {
                    let p = f.probability(2 * x + a, None, 2 * y).unwrap();
                    assert_eq!(p * b.alice_marginal(a, x), b.p[x][y][2 * a]);
                }
            }
        }
    }

    #[test]
    fn random_acyclic_models_are_consistent() {
        let mut rng = seeded(11);
        for _ in 0..30 {
            let tree = random_acyclic_hypergraph(&mut rng, 4);
            assert!(is_acyclic(&tree.hypergraph));
            let m = random_nondisturbing_model(&mut rng, &tree).unwrap();
            assert!(detect_disturbance(&m).is_empty());
            assert!(global_assignments(&m, ScaleCap::default()).is_ok());
        }
    }

    #[test]
    fn local_boxes_have_zero_fraction() {
        let mut rng = seeded(5);
        for _ in 0..5 {
            let b = random_local_box(&mut rng);
            assert!(b.chsh().abs() <= q(2));
            assert!(contextual_fraction(&b.model().unwrap()).unwrap().cf.is_zero());
        }
    }

    #[test]
    fn random_complexes_respect_the_size_bound() {
        let mut rng = seeded(1);
        for _ in 0..50 {
            assert!(random_complex(&mut rng, 6, 30).total_simplices() <= 30);
        }
    }

    #[test]
    fn noncontextual_ontic_models_reproduce_nothing_weird() {
        let mut rng = seeded(2);
        let f = noisy_pr_box_table(&frac(1, 2)).steering_fragment().unwrap();
        let rep = random_ontic(&mut rng, &f, false).unwrap();
        assert!(rep.check_shape(&f).is_ok());
        assert!(rep.normalization_defects(&f).is_empty());
    }

    #[test]
    fn catalog_entries_all_emit() {
        for s in CATALOG {
            emit(s.name, &BTreeMap::new()).unwrap();
        }
        let mut p = BTreeMap::new();
        p.insert("bogus".to_string(), "1".to_string());
        assert!(emit("gbit", &p).is_err());
        assert!(emit("nope", &BTreeMap::new()).is_err());
    }

    #[test]
    fn disturbed_pr_box_is_disturbing() {
        let m = disturbed_pr_box(&q(1), &frac(1, 4)).unwrap();
        assert!(!detect_disturbance(&m).is_empty());
    }
}
