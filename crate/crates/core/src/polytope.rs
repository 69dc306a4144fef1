//! Vertex enumeration of bounded rational polytopes by the double
//! description method.
//!
//! The equality system is solved first, so the cone iteration runs in the
//! (usually much smaller) space of its free parameters.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rational::Q;

/// `{x : eq_i . x = b_i, ineq_j . x <= c_j}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HPolytope {
    pub dim: usize,
    pub equalities: Vec<(Vec<Q>, Q)>,
    pub inequalities: Vec<(Vec<Q>, Q)>,
}

impl HPolytope {
    pub fn new(dim: usize) -> Self {
        HPolytope {
            dim,
            ..Default::default()
        }
    }

    pub fn contains(&self, x: &[Q]) -> bool {
        self.equalities.iter().all(|(a, b)| linalg::dot(a, x) == *b)
            && self.inequalities.iter().all(|(a, c)| linalg::dot(a, x) <= *c)
    }

    /// Indices of inequalities holding with equality at `x`.
    pub fn tight(&self, x: &[Q]) -> Vec<usize> {
        (0..self.inequalities.len())
            .filter(|&j| linalg::dot(&self.inequalities[j].0, x) == self.inequalities[j].1)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn superset_of(&self, o: &Bits) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a & b == *b)
    }
}

struct Ray {
    z: Vec<Q>,
    zero: Bits,
}

fn normalize(z: &mut [Q]) {
    let lead = if z[0].is_positive() {
        z[0].clone()
    } else {
        match z.iter().find(|x| !x.is_zero()) {
            Some(x) => x.abs(),
            None => return,
        }
    };
    for x in z.iter_mut() {
        *x /= &lead;
    }
}

/// Extreme rays of the pointed cone `{z : rows_i . z >= 0}`.
fn cone_rays(rows: &Matrix, d: usize) -> Result<Vec<Vec<Q>>> {
    let m = rows.len();
    // greedy independent starting rows
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Matrix = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut trial = basis.clone();
        trial.push(r.clone());
        if linalg::rank(&trial) > basis.len() {
            basis = trial;
            chosen.push(i);
            if chosen.len() == d {
                break;
            }
        }
    }
    if chosen.len() < d {
        return Err(Error::Unsupported("polytope is unbounded".into()));
    }
    let tight_set = |z: &[Q], upto: &[bool]| {
        let mut b = Bits::new(m);
        for (i, r) in rows.iter().enumerate() {
            if upto[i] && linalg::dot(r, z).is_zero() {
                b.set(i);
            }
        }
        b
    };
    let mut done = vec![false; m];
    for &i in &chosen {
        done[i] = true;
    }
    let mut rays: Vec<Ray> = Vec::with_capacity(d);
    for k in 0..d {
        let mut e = vec![Q::zero(); d];
        e[k] = Q::one();
        let mut z = linalg::solve_square(&basis, &e).expect("independent rows");
        normalize(&mut z);
        let zero = tight_set(&z, &done);
        rays.push(Ray { z, zero });
    }

    for i in 0..m {
        if done[i] {
            continue;
        }
        let a = &rows[i];
        let vals: Vec<Q> = rays.iter().map(|r| linalg::dot(a, &r.z)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_negative()).collect();
        done[i] = true;
        if neg.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if vals[k].is_zero() {
                    r.zero.set(i);
                }
            }
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zero.and(&rays[n].zero);
                if common.count() + 2 < d {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|t| t == p || t == n || !rays[t].zero.superset_of(&common));
                if !adjacent {
                    continue;
                }
                let mut z: Vec<Q> = rays[n]
                    .z
                    .iter()
                    .zip(&rays[p].z)
                    .map(|(zn, zp)| &vals[p] * zn - &vals[n] * zp)
                    .collect();
                normalize(&mut z);
                let mut zero = common;
                zero.set(i);
                fresh.push(Ray { z, zero });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            if vals[k].is_negative() {
                continue;
            }
            if vals[k].is_zero() {
                r.zero.set(i);
            }
            kept.push(r);
        }
        kept.extend(fresh);
        rays = kept;
    }
    Ok(rays.into_iter().map(|r| r.z).collect())
}

/// Vertices of a bounded polytope in lexicographic order; empty when the
/// polytope is empty.
pub fn vertices(p: &HPolytope) -> Result<Vec<Vec<Q>>> {
    let dim = p.dim;
    for (a, _) in p.equalities.iter().chain(&p.inequalities) {
        if a.len() != dim {
            return Err(Error::Structural(format!(
                "constraint of length {} in dimension {dim}",
                a.len()
            )));
        }
    }
    let eq: Matrix = p.equalities.iter().map(|(a, _)| a.clone()).collect();
    let rhs: Vec<Q> = p.equalities.iter().map(|(_, b)| b.clone()).collect();
    let Some(x0) = linalg::solve(&eq, &rhs, dim) else {
        return Ok(Vec::new());
    };
    let null = linalg::nullspace(&eq, dim);
    let k = null.len();
    if k == 0 {
        return Ok(if p.contains(&x0) { vec![x0] } else { Vec::new() });
    }

    // h t0 - G t >= 0 with G = A N, h = c - A x0, plus t0 >= 0
    let mut rows: Matrix = Vec::with_capacity(p.inequalities.len() + 1);
    let mut t0 = vec![Q::zero(); k + 1];
    t0[0] = Q::one();
    rows.push(t0);
    for (a, c) in &p.inequalities {
        let mut r = Vec::with_capacity(k + 1);
        r.push(c - linalg::dot(a, &x0));
        for n in &null {
            r.push(-linalg::dot(a, n));
        }
        rows.push(r);
    }
    let rays = cone_rays(&rows, k + 1)?;
    let mut out: Vec<Vec<Q>> = Vec::new();
    for z in rays {
        if !z[0].is_positive() {
            return Err(Error::Unsupported("polytope is unbounded".into()));
        }
        let mut x = x0.clone();
        for (t, n) in z[1..].iter().zip(&null) {
            if t.is_zero() {
                continue;
            }
            for (xi, ni) in x.iter_mut().zip(n) {
                *xi += t * ni;
            }
        }
        out.push(x);
    }
    out.sort();
    out.dedup();
    Ok(out)
}
