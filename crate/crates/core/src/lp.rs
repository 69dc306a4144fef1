//! Exact two-phase simplex over the rationals.
//!
//! Variables are nonnegative. Pivoting follows Bland's rule, so the method
//! terminates on degenerate problems. An infeasible problem comes back with
//! a Farkas certificate read off the phase-one duals.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{ser, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Q)>,
    pub relation: Relation,
    pub rhs: Q,
}

impl Constraint {
    fn lhs(&self, x: &[Q]) -> Q {
        self.coeffs.iter().map(|(j, a)| a * &x[*j]).sum()
    }
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub sense: Sense,
    pub objective: Vec<Q>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    #[serde(serialize_with = "ser::opt")]
    pub objective: Option<Q>,
    /// Optimal point (empty unless optimal).
    #[serde(serialize_with = "ser::vec")]
    pub assignment: Vec<Q>,
    /// Farkas multipliers, one per constraint, when infeasible.
    #[serde(serialize_with = "ser::opt_vec")]
    pub certificate: Option<Vec<Q>>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LinearProgram {
            num_vars,
            sense,
            objective: vec![Q::zero(); num_vars],
            constraints: Vec::new(),
        }
    }

    pub fn set_objective(&mut self, var: usize, coeff: Q) {
        self.objective[var] = coeff;
    }

    /// Adds a constraint and returns its row index. Repeated variables are summed.
    pub fn add(
        &mut self,
        coeffs: impl IntoIterator<Item = (usize, Q)>,
        relation: Relation,
        rhs: Q,
    ) -> usize {
        let mut merged: std::collections::BTreeMap<usize, Q> = Default::default();
        for (j, a) in coeffs {
            assert!(j < self.num_vars, "variable {j} out of range");
            *merged.entry(j).or_insert_with(Q::zero) += a;
        }
        self.constraints.push(Constraint {
            coeffs: merged.into_iter().filter(|(_, a)| !a.is_zero()).collect(),
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn value(&self, x: &[Q]) -> Q {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Exact feasibility check of a point.
    pub fn is_feasible_point(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| {
                let lhs = c.lhs(x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    /// Checks a Farkas certificate: sign-feasible multipliers `y` with
    /// `yA >= 0` componentwise and `y.b < 0`, which rules out any `x >= 0`.
    pub fn verify_farkas(&self, y: &[Q]) -> bool {
        if y.len() != self.constraints.len() {
            return false;
        }
        let mut ya = vec![Q::zero(); self.num_vars];
        let mut yb = Q::zero();
        for (c, yi) in self.constraints.iter().zip(y) {
            let sign_ok = match c.relation {
                Relation::Le => !yi.is_negative(),
                Relation::Ge => !yi.is_positive(),
                Relation::Eq => true,
            };
            if !sign_ok {
                return false;
            }
            if yi.is_zero() {
                continue;
            }
            for (j, a) in &c.coeffs {
                ya[*j] += yi * a;
            }
            yb += yi * &c.rhs;
        }
        ya.iter().all(|v| !v.is_negative()) && yb.is_negative()
    }

    pub fn solve(&self) -> LpSolution {
        Simplex::build(self).run(self)
    }
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    cost: Vec<Q>,
    /// Negated objective value, carried along the eliminations.
    cost_rhs: Q,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for x in self.rows[r].iter_mut().filter(|x| !x.is_zero()) {
                *x /= &p;
            }
            self.rhs[r] /= &p;
        }
        let nz: Vec<(usize, Q)> = self.rows[r]
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(j, x)| (j, x.clone()))
            .collect();
        let prhs = self.rhs[r].clone();
        let eliminate = |row: &mut Vec<Q>, rhs: &mut Q| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for (j, x) in &nz {
                row[*j] -= &f * x;
            }
            *rhs -= &f * &prhs;
        };
        for i in 0..self.rows.len() {
            if i != r {
                let (row, rhs) = (&mut self.rows[i], &mut self.rhs[i]);
                eliminate(row, rhs);
            }
        }
        eliminate(&mut self.cost, &mut self.cost_rhs);
        self.basis[r] = c;
    }

    /// Sets reduced costs for the objective `c` given the current basis.
    fn price(&mut self, c: &[Q]) {
        self.cost = c.to_vec();
        self.cost_rhs = Q::zero();
        for i in 0..self.rows.len() {
            let cb = c[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    self.cost[j] -= &cb * a;
                }
            }
            self.cost_rhs -= &cb * &self.rhs[i];
        }
    }

    /// Minimizes the priced objective over columns `< allowed`. Returns false
    /// when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let Some(c) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => {
                        ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                    }
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

struct Simplex {
    tab: Tableau,
    /// Row sign applied to make the right-hand side nonnegative.
    flip: Vec<bool>,
    /// Column that started in the basis for each row.
    initial: Vec<usize>,
    n: usize,
    first_artificial: usize,
    total: usize,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let m = lp.constraints.len();
        let mut flip = Vec::with_capacity(m);
        let mut rel = Vec::with_capacity(m);
        for c in &lp.constraints {
            let f = c.rhs.is_negative();
            flip.push(f);
            rel.push(match (c.relation, f) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            });
        }
        let slacks = rel.iter().filter(|r| **r != Relation::Eq).count();
        let artificials = rel.iter().filter(|r| **r != Relation::Le).count();
        let first_artificial = n + slacks;
        let total = first_artificial + artificials;

        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (n, first_artificial);
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut row = vec![Q::zero(); total];
            for (j, v) in &c.coeffs {
                row[*j] = if flip[i] { -v.clone() } else { v.clone() };
            }
            rhs.push(if flip[i] { -c.rhs.clone() } else { c.rhs.clone() });
            match rel[i] {
                Relation::Le => {
                    row[s] = Q::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -Q::one();
                    s += 1;
                    row[a] = Q::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = Q::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        let initial = basis.clone();
        Simplex {
            tab: Tableau {
                rows,
                rhs,
                basis,
                cost: Vec::new(),
                cost_rhs: Q::zero(),
            },
            flip,
            initial,
            n,
            first_artificial,
            total,
        }
    }

    fn run(mut self, lp: &LinearProgram) -> LpSolution {
        let mut phase1 = vec![Q::zero(); self.total];
        for c in &mut phase1[self.first_artificial..] {
            *c = Q::one();
        }
        self.tab.price(&phase1);
        self.tab.optimize(self.total);
        if self.tab.cost_rhs.is_negative() {
            // duals y' = c_B B^-1 read from the initial basis columns
            let cert = (0..self.initial.len())
                .map(|i| {
                    let j = self.initial[i];
                    let y = &phase1[j] - &self.tab.cost[j];
                    if self.flip[i] {
                        y
                    } else {
                        -y
                    }
                })
                .collect();
            return LpSolution {
                status: LpStatus::Infeasible,
                objective: None,
                assignment: Vec::new(),
                certificate: Some(cert),
            };
        }

        // drive zero-level artificials out, dropping redundant rows
        let mut i = 0;
        while i < self.tab.rows.len() {
            if self.tab.basis[i] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.tab.rows[i][j].is_zero()) {
                    Some(j) => self.tab.pivot(i, j),
                    None => {
                        self.tab.rows.remove(i);
                        self.tab.rhs.remove(i);
                        self.tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }

        let mut cost = vec![Q::zero(); self.total];
        for (j, c) in lp.objective.iter().enumerate() {
            cost[j] = match lp.sense {
                Sense::Minimize => c.clone(),
                Sense::Maximize => -c.clone(),
            };
        }
        self.tab.price(&cost);
        if !self.tab.optimize(self.first_artificial) {
            return LpSolution {
                status: LpStatus::Unbounded,
                objective: None,
                assignment: Vec::new(),
                certificate: None,
            };
        }
        let mut x = vec![Q::zero(); self.n];
        for (i, &b) in self.tab.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.tab.rhs[i].clone();
            }
        }
        LpSolution {
            status: LpStatus::Optimal,
            objective: Some(lp.value(&x)),
            assignment: x,
            certificate: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, q};
    use proptest::prelude::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, q(3));
        lp.set_objective(1, q(5));
        lp.add([(0, q(1))], Relation::Le, q(4));
        lp.add([(1, q(2))], Relation::Le, q(12));
        lp.add([(0, q(3)), (1, q(2))], Relation::Le, q(18));
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, Some(q(36)));
        assert_eq!(s.assignment, vec![q(2), q(6)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y, x + y = 1, x - y >= 1/2
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        lp.set_objective(0, q(1));
        lp.set_objective(1, q(1));
        lp.add([(0, q(1)), (1, q(1))], Relation::Eq, q(1));
        lp.add([(0, q(1)), (1, q(-1))], Relation::Ge, frac(1, 2));
        let s = lp.solve();
        assert_eq!(s.objective, Some(q(1)));
        assert!(lp.is_feasible_point(&s.assignment));
    }

    #[test]
    fn infeasible_with_certificate() {
        let mut lp = LinearProgram::new(2, Sense::Minimize);
        lp.add([(0, q(1)), (1, q(1))], Relation::Le, q(1));
        lp.add([(0, q(1)), (1, q(1))], Relation::Ge, q(2));
        lp.add([(0, q(1))], Relation::Eq, q(-1));
        let s = lp.solve();
        assert_eq!(s.status, LpStatus::Infeasible);
        assert!(lp.verify_farkas(s.certificate.as_ref().unwrap()));
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(0, q(1));
        lp.add([(0, q(1)), (1, q(-1))], Relation::Le, q(1));
        assert_eq!(lp.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        let mut lp = LinearProgram::new(2, Sense::Maximize);
        lp.set_objective(1, q(1));
        lp.add([(0, q(1)), (1, q(1))], Relation::Eq, q(1));
        lp.add([(0, q(2)), (1, q(2))], Relation::Eq, q(2));
        let s = lp.solve();
        assert_eq!(s.objective, Some(q(1)));
    }

    fn small() -> impl Strategy<Value = i64> {
        -4i64..=4
    }

    proptest! {
        // strong duality on random bounded, feasible problems
        #[test]
        fn primal_and_dual_optima_agree(
            a in proptest::collection::vec(proptest::collection::vec(small(), 3), 3),
            b in proptest::collection::vec(0i64..6, 3),
            c in proptest::collection::vec(small(), 3),
        ) {
            let mut a = a;
            let mut b = b;
            a.push(vec![1, 1, 1]);
            b.push(10);
            let mut primal = LinearProgram::new(3, Sense::Maximize);
            for (j, cj) in c.iter().enumerate() {
                primal.set_objective(j, q(*cj));
            }
            for (row, bi) in a.iter().zip(&b) {
                primal.add(row.iter().enumerate().map(|(j, v)| (j, q(*v))), Relation::Le, q(*bi));
            }
            let mut dual = LinearProgram::new(a.len(), Sense::Minimize);
            for (i, bi) in b.iter().enumerate() {
                dual.set_objective(i, q(*bi));
            }
            for j in 0..3 {
                dual.add((0..a.len()).map(|i| (i, q(a[i][j]))), Relation::Ge, q(c[j]));
            }
            let p = primal.solve();
            let d = dual.solve();
            prop_assert_eq!(p.status, LpStatus::Optimal);
            prop_assert_eq!(d.status, LpStatus::Optimal);
            prop_assert!(primal.is_feasible_point(&p.assignment));
            prop_assert!(dual.is_feasible_point(&d.assignment));
            prop_assert_eq!(p.objective, d.objective);
        }

        #[test]
        fn infeasible_systems_carry_valid_certificates(
            a in proptest::collection::vec(proptest::collection::vec(small(), 3), 4),
            b in proptest::collection::vec(small(), 4),
            rels in proptest::collection::vec(0u8..3, 4),
        ) {
            let mut lp = LinearProgram::new(3, Sense::Minimize);
            for ((row, bi), r) in a.iter().zip(&b).zip(&rels) {
                let rel = [Relation::Le, Relation::Ge, Relation::Eq][*r as usize];
                lp.add(row.iter().enumerate().map(|(j, v)| (j, q(*v))), rel, q(*bi));
            }
            let s = lp.solve();
            match s.status {
                LpStatus::Infeasible => prop_assert!(lp.verify_farkas(s.certificate.as_ref().unwrap())),
                _ => prop_assert!(lp.is_feasible_point(&s.assignment)),
            }
        }
    }
}
