//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::rational::Q;

pub type Matrix = Vec<Vec<Q>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn transpose(m: &Matrix, cols: usize) -> Matrix {
    let mut t = zeros(cols, m.len());
    for (i, row) in m.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            t[j][i] = x.clone();
        }
    }
    t
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

pub fn mat_vec(m: &Matrix, v: &[Q]) -> Vec<Q> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Matrix whose columns are the given vectors.
pub fn from_columns(vectors: &[Vec<Q>], dim: usize) -> Matrix {
    let mut m = zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m[i][j] = x.clone();
        }
    }
    m
}

/// Reduces `m` to reduced row-echelon form in place. Pivots are chosen as the
/// first nonzero entry scanning rows top-down, so the result is canonical.
/// Returns the pivot columns in order.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut work = m.clone();
    rref(&mut work).len()
}

/// Rational basis of `{x : m x = 0}`, one vector per free column, each scaled
/// so its first nonzero coefficient is `+1`.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Q>> {
    let mut work = m.clone();
    let pivots = rref(&mut work);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (row, &p) in pivots.iter().enumerate() {
            v[p] = -work[row][free].clone();
        }
        normalize_leading(&mut v);
        basis.push(v);
    }
    basis
}

pub fn normalize_leading(v: &mut [Q]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).cloned() {
        for x in v.iter_mut() {
            *x /= &lead;
        }
    }
}

/// Some solution of `m x = b`, free variables set to zero; `None` when the
/// system is inconsistent.
pub fn solve(m: &Matrix, b: &[Q], cols: usize) -> Option<Vec<Q>> {
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = aug[row][cols].clone();
    }
    Some(x)
}

/// Solves a square nonsingular system; `None` if singular.
pub fn solve_square(m: &Matrix, b: &[Q]) -> Option<Vec<Q>> {
    let n = m.len();
    if rank(m) < n {
        return None;
    }
    solve(m, b, n)
}
