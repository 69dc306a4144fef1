//! Oriented simplicial complexes with rational chains and cochains.
//!
//! Orientation is induced by the global vertex-id order: a simplex is stored
//! as its strictly increasing vertex tuple and `∂[v0..vn] = Σ (-1)^i [.. v̂i ..]`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rational::{ser, Q};

pub type Simplex = Vec<usize>;

/// Key used in JSON maps: vertex ids joined by dots.
pub fn simplex_key(s: &[usize]) -> String {
    s.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
}

pub fn parse_simplex_key(key: &str) -> Result<Simplex> {
    key.split('.')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad simplex key {key:?}")))
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
}

fn sign_of_sort(v: &mut [usize]) -> Option<i64> {
    // insertion sort counting transpositions; None on repeated vertices
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

fn faces(s: &[usize]) -> impl Iterator<Item = (usize, Simplex)> + '_ {
    (0..s.len()).map(move |i| {
        let mut f = s.to_vec();
        f.remove(i);
        (i, f)
    })
}

impl SimplicialComplex {
    /// Closure of the given simplices under taking faces.
    pub fn from_maximal<I, S>(maximal: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[usize]>,
    {
        let mut by_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        let mut stack: Vec<Simplex> = Vec::new();
        for s in maximal {
            let mut s = s.as_ref().to_vec();
            if s.is_empty() {
                return Err(Error::Structural("empty simplex".into()));
            }
            if sign_of_sort(&mut s).is_none() {
                return Err(Error::Structural(format!("simplex {s:?} repeats a vertex")));
            }
            stack.push(s);
        }
        while let Some(s) = stack.pop() {
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize_with(d + 1, BTreeSet::new);
            }
            if by_dim[d].insert(s.clone()) && d > 0 {
                stack.extend(faces(&s).map(|(_, f)| f));
            }
        }
        Ok(Self::from_sets(by_dim))
    }

    /// Builds a complex from an explicit simplex list, rejecting duplicates and
    /// lists that are not closed under faces.
    pub fn from_simplices(list: &[Simplex]) -> Result<Self> {
        let mut by_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        for s in list {
            let mut s = s.clone();
            if s.is_empty() || sign_of_sort(&mut s).is_none() {
                return Err(Error::Structural(format!("invalid simplex {s:?}")));
            }
            let d = s.len() - 1;
            if by_dim.len() <= d {
                by_dim.resize_with(d + 1, BTreeSet::new);
            }
            if !by_dim[d].insert(s.clone()) {
                return Err(Error::Structural(format!("duplicate simplex {s:?}")));
            }
        }
        for d in 1..by_dim.len() {
            for s in &by_dim[d] {
                if let Some((_, f)) = faces(s).find(|(_, f)| !by_dim[d - 1].contains(f)) {
                    return Err(Error::Structural(format!(
                        "face {f:?} of {s:?} is missing"
                    )));
                }
            }
        }
        Ok(Self::from_sets(by_dim))
    }

    fn from_sets(by_dim: Vec<BTreeSet<Simplex>>) -> Self {
        let simplices: Vec<Vec<Simplex>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let index = simplices
            .iter()
            .map(|list| list.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();
        SimplicialComplex { simplices, index }
    }

    /// Highest simplex dimension, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.simplices.len().checked_sub(1)
    }

    pub fn simplices(&self, n: usize) -> &[Simplex] {
        self.simplices.get(n).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, n: usize) -> usize {
        self.simplices(n).len()
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.simplices(0).iter().map(|s| s[0]).collect()
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.index_of(s).is_some()
    }

    pub fn total_simplices(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    /// Maximal simplices (those that are not a face of another), in
    /// dimension-then-lexicographic order.
    pub fn maximal(&self) -> Vec<Simplex> {
        let mut out = Vec::new();
        for d in 0..self.simplices.len() {
            for s in &self.simplices[d] {
                let covered = self.simplices(d + 1).iter().any(|t| {
                    s.iter().all(|v| t.binary_search(v).is_ok())
                });
                if !covered {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Matrix of `∂_n`: rows are (n-1)-simplices, columns n-simplices.
    pub fn boundary_matrix(&self, n: usize) -> Matrix {
        let rows = if n == 0 { 0 } else { self.count(n - 1) };
        let mut m = linalg::zeros(rows, self.count(n));
        if n == 0 {
            return m;
        }
        for (j, s) in self.simplices(n).iter().enumerate() {
            for (i, f) in faces(s) {
                let r = self.index[n - 1][&f];
                m[r][j] = if i % 2 == 0 { Q::one() } else { -Q::one() };
            }
        }
        m
    }

    fn integer_boundary(&self, n: usize) -> Vec<Vec<BigInt>> {
        self.boundary_matrix(n)
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.to_integer()).collect())
            .collect()
    }

    /// Connected components of the 1-skeleton, each as a sorted vertex list.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let verts = self.vertices();
        let mut adj: HashMap<usize, Vec<usize>> = verts.iter().map(|&v| (v, Vec::new())).collect();
        for e in self.simplices(1) {
            adj.get_mut(&e[0]).expect("vertex").push(e[1]);
            adj.get_mut(&e[1]).expect("vertex").push(e[0]);
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &v in &verts {
            if !seen.insert(v) {
                continue;
            }
            let mut comp = vec![v];
            let mut queue = VecDeque::from([v]);
            while let Some(u) = queue.pop_front() {
                for &w in &adj[&u] {
                    if seen.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(d, s)| if d % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }

    fn check_simplex(&self, s: &[usize], degree: usize) -> Result<()> {
        if s.len() != degree + 1 {
            return Err(Error::Degree {
                expected: degree,
                found: s.len().saturating_sub(1),
            });
        }
        if !self.contains(s) {
            return Err(Error::Structural(format!("simplex {s:?} not in complex")));
        }
        Ok(())
    }
}

/// Formal rational combination of oriented n-simplices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub degree: usize,
    #[serde(serialize_with = "ser_simplex_map")]
    pub coeffs: BTreeMap<Simplex, Q>,
}

/// Rational n-cochain stored sparsely; missing simplices read as zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cochain {
    pub degree: usize,
    #[serde(serialize_with = "ser_simplex_map")]
    pub values: BTreeMap<Simplex, Q>,
}

fn ser_simplex_map<S: serde::Serializer>(
    m: &BTreeMap<Simplex, Q>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let keyed: BTreeMap<String, Q> = m.iter().map(|(k, v)| (simplex_key(k), v.clone())).collect();
    ser::map(&keyed, s)
}

fn add_oriented(map: &mut BTreeMap<Simplex, Q>, simplex: &[usize], coeff: Q) -> Result<()> {
    let mut s = simplex.to_vec();
    let sign = sign_of_sort(&mut s)
        .ok_or_else(|| Error::Structural(format!("simplex {simplex:?} repeats a vertex")))?;
    let c = if sign < 0 { -coeff } else { coeff };
    let entry = map.entry(s.clone()).or_insert_with(Q::zero);
    *entry += c;
    if entry.is_zero() {
        map.remove(&s);
    }
    Ok(())
}

macro_rules! sparse_form {
    ($ty:ident, $field:ident) => {
        impl $ty {
            pub fn zero(degree: usize) -> Self {
                $ty {
                    degree,
                    $field: BTreeMap::new(),
                }
            }

            /// Adds `coeff` times the oriented simplex given by `vertices` in
            /// any order; odd permutations flip the sign.
            pub fn add(&mut self, vertices: &[usize], coeff: Q) -> Result<()> {
                if vertices.len() != self.degree + 1 {
                    return Err(Error::Degree {
                        expected: self.degree,
                        found: vertices.len().saturating_sub(1),
                    });
                }
                add_oriented(&mut self.$field, vertices, coeff)
            }

            pub fn with(mut self, vertices: &[usize], coeff: Q) -> Result<Self> {
                self.add(vertices, coeff)?;
                Ok(self)
            }

            pub fn get(&self, simplex: &[usize]) -> Q {
                self.$field.get(simplex).cloned().unwrap_or_else(Q::zero)
            }

            pub fn is_zero(&self) -> bool {
                self.$field.values().all(Zero::is_zero)
            }

            pub fn scale(&self, k: &Q) -> Self {
                let mut out = $ty::zero(self.degree);
                if !k.is_zero() {
                    for (s, v) in &self.$field {
                        out.$field.insert(s.clone(), v * k);
                    }
                }
                out
            }

            pub fn plus(&self, other: &Self) -> Result<Self> {
                if self.degree != other.degree {
                    return Err(Error::Degree {
                        expected: self.degree,
                        found: other.degree,
                    });
                }
                let mut out = self.clone();
                for (s, v) in &other.$field {
                    add_oriented(&mut out.$field, s, v.clone())?;
                }
                Ok(out)
            }

            pub fn minus(&self, other: &Self) -> Result<Self> {
                self.plus(&other.scale(&-Q::one()))
            }

            /// Dense coefficient vector in the complex's simplex order.
            pub fn to_dense(&self, k: &SimplicialComplex) -> Vec<Q> {
                k.simplices(self.degree)
                    .iter()
                    .map(|s| self.get(s))
                    .collect()
            }

            pub fn from_dense(k: &SimplicialComplex, degree: usize, values: &[Q]) -> Self {
                let mut out = $ty::zero(degree);
                for (s, v) in k.simplices(degree).iter().zip(values) {
                    if !v.is_zero() {
                        out.$field.insert(s.clone(), v.clone());
                    }
                }
                out
            }

            pub fn check_in(&self, k: &SimplicialComplex) -> Result<()> {
                for s in self.$field.keys() {
                    k.check_simplex(s, self.degree)?;
                }
                Ok(())
            }
        }
    };
}

sparse_form!(Chain, coeffs);
sparse_form!(Cochain, values);

/// Alternating-sign face expansion, extended linearly.
pub fn boundary(k: &SimplicialComplex, chain: &Chain) -> Result<Chain> {
    if chain.degree == 0 {
        return Err(Error::Precondition("boundary of a 0-chain".into()));
    }
    chain.check_in(k)?;
    let mut out = Chain::zero(chain.degree - 1);
    for (s, c) in &chain.coeffs {
        for (i, f) in faces(s) {
            let term = if i % 2 == 0 { c.clone() } else { -c.clone() };
            add_oriented(&mut out.coeffs, &f, term)?;
        }
    }
    Ok(out)
}

/// The transpose of `∂`: `(dω)(σ) = Σ (-1)^i ω(face_i σ)`.
pub fn coboundary(k: &SimplicialComplex, w: &Cochain) -> Cochain {
    let mut out = Cochain::zero(w.degree + 1);
    for s in k.simplices(w.degree + 1) {
        let mut acc = Q::zero();
        for (i, f) in faces(s) {
            let v = w.get(&f);
            if i % 2 == 0 {
                acc += v;
            } else {
                acc -= v;
            }
        }
        if !acc.is_zero() {
            out.values.insert(s.clone(), acc);
        }
    }
    out
}

/// `<ω|S>`.
pub fn pair(w: &Cochain, s: &Chain) -> Result<Q> {
    if w.degree != s.degree {
        return Err(Error::Degree {
            expected: w.degree,
            found: s.degree,
        });
    }
    Ok(s.coeffs
        .iter()
        .fold(Q::zero(), |acc, (simplex, c)| acc + c * w.get(simplex)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub betti: usize,
    #[serde(serialize_with = "ints")]
    pub torsion: Vec<BigInt>,
}

fn ints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// Nonzero diagonal entries (made positive) of the Smith normal form.
pub fn smith_diagonal(m: &[Vec<BigInt>]) -> Vec<BigInt> {
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let qt = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let sub = &qt * &a[t][j];
                    a[i][j] -= sub;
                }
                if !a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let qt = a[t][j].div_floor(&a[t][t]);
                for row in a.iter_mut().skip(t) {
                    let sub = &qt * &row[t];
                    row[j] -= sub;
                }
                if !a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if !dirty {
                // the pivot must divide the rest of the block
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| !(&a[i][j] % &a[t][t]).is_zero());
                match bad {
                    Some((i, _)) => {
                        for j in t..cols {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                        continue;
                    }
                    None => break,
                }
            }
            // move the smallest remaining entry of the pivot row/column up
            let mut best = (t, t);
            for i in t..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Betti number over ℚ and torsion over ℤ of `H_n`.
pub fn homology(k: &SimplicialComplex, n: usize) -> HomologyGroup {
    let cn = k.count(n);
    let rank_n = if n == 0 { 0 } else { linalg::rank(&k.boundary_matrix(n)) };
    let rank_next = linalg::rank(&k.boundary_matrix(n + 1));
    let betti = cn - rank_n - rank_next;
    let diag = smith_diagonal(&k.integer_boundary(n + 1));
    debug_assert_eq!(diag.len(), rank_next, "Smith rank disagrees with rational rank");
    let torsion = diag.into_iter().filter(|d| !d.is_one()).collect();
    HomologyGroup {
        degree: n,
        betti,
        torsion,
    }
}

/// Row-echelon basis that grows one vector at a time and reports whether the
/// new vector was independent.
#[derive(Default)]
struct EchelonBasis {
    rows: Vec<(usize, Vec<Q>)>,
}

impl EchelonBasis {
    fn insert(&mut self, mut v: Vec<Q>) -> bool {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (x, r) in v.iter_mut().zip(row) {
                    *x -= &f * r;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(p) => {
                let inv = Q::one() / &v[p];
                for x in v.iter_mut() {
                    *x *= &inv;
                }
                for (_, row) in self.rows.iter_mut() {
                    if !row[p].is_zero() {
                        let f = row[p].clone();
                        for (x, r) in row.iter_mut().zip(&v) {
                            *x -= &f * r;
                        }
                    }
                }
                self.rows.push((p, v));
                true
            }
        }
    }
}

/// Closed n-cochains spanning `ker d_n / im d_{n-1}`.
pub fn cohomology_basis(k: &SimplicialComplex, n: usize) -> Vec<Cochain> {
    let cn = k.count(n);
    if cn == 0 {
        return Vec::new();
    }
    // d_n is the transpose of ∂_{n+1}
    let dn = linalg::transpose(&k.boundary_matrix(n + 1), k.count(n + 1));
    let closed = linalg::nullspace(&dn, cn);
    let mut basis = EchelonBasis::default();
    if n > 0 {
        // im d_{n-1} is spanned by the rows of ∂_n
        for row in k.boundary_matrix(n) {
            basis.insert(row);
        }
    }
    closed
        .into_iter()
        .filter(|z| basis.insert(z.clone()))
        .map(|z| Cochain::from_dense(k, n, &z))
        .collect()
}

/// `H^n` reported like homology; integer torsion of `H^n` is that of `H_{n-1}`.
pub fn cohomology(k: &SimplicialComplex, n: usize) -> HomologyGroup {
    HomologyGroup {
        degree: n,
        betti: cohomology_basis(k, n).len(),
        torsion: if n == 0 { Vec::new() } else { homology(k, n - 1).torsion },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "potential", rename_all = "kebab-case")]
pub enum Exactness {
    NotClosed,
    NoPotential,
    Exact(Cochain),
}

impl Exactness {
    pub fn potential(&self) -> Option<&Cochain> {
        match self {
            Exactness::Exact(c) => Some(c),
            _ => None,
        }
    }
}

/// Solves `dc = w` exactly. For 1-cochains the potential is integrated along a
/// breadth-first spanning tree with `c = 0` at the first vertex of every
/// component; higher degrees use a rational linear solve.
pub fn is_exact(k: &SimplicialComplex, w: &Cochain) -> Exactness {
    if !coboundary(k, w).is_zero() {
        return Exactness::NotClosed;
    }
    if w.degree == 0 {
        return if w.is_zero() {
            Exactness::Exact(Cochain::zero(0))
        } else {
            Exactness::NoPotential
        };
    }
    if w.degree == 1 {
        let mut c: HashMap<usize, Q> = HashMap::new();
        let mut adj: HashMap<usize, Vec<(usize, Q)>> = HashMap::new();
        for e in k.simplices(1) {
            let v = w.get(e);
            adj.entry(e[0]).or_default().push((e[1], v.clone()));
            adj.entry(e[1]).or_default().push((e[0], -v));
        }
        for comp in k.components() {
            c.insert(comp[0], Q::zero());
            let mut queue = VecDeque::from([comp[0]]);
            while let Some(u) = queue.pop_front() {
                let cu = c[&u].clone();
                for (v, val) in adj.get(&u).map_or(&[][..], Vec::as_slice) {
                    if !c.contains_key(v) {
                        c.insert(*v, &cu + val);
                        queue.push_back(*v);
                    }
                }
            }
        }
        let mut potential = Cochain::zero(0);
        for (v, x) in c {
            if !x.is_zero() {
                potential.values.insert(vec![v], x);
            }
        }
        let ok = k
            .simplices(1)
            .iter()
            .all(|e| potential.get(&[e[1]]) - potential.get(&[e[0]]) == w.get(e));
        return if ok {
            Exactness::Exact(potential)
        } else {
            Exactness::NoPotential
        };
    }
    let prev = k.count(w.degree - 1);
    let d = linalg::transpose(&k.boundary_matrix(w.degree), prev);
    match linalg::solve(&d, &w.to_dense(k), prev) {
        Some(x) => Exactness::Exact(Cochain::from_dense(k, w.degree - 1, &x)),
        None => Exactness::NoPotential,
    }
}

/// Betti numbers `b_0..=b_dim` via rational ranks.
pub fn betti_numbers(k: &SimplicialComplex) -> Vec<usize> {
    (0..=k.dim().unwrap_or(0)).map(|n| homology(k, n).betti).collect()
}
