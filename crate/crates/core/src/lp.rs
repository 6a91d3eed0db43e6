//! Exact two-phase simplex over rationals.
//!
//! Dense tableau, Bland's least-index rule for both the entering and the
//! leaving variable, so the method terminates without cycling. All
//! variables are nonnegative.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<Rational>,
    pub sense: Sense,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    Infeasible,
    Optimal { value: Rational, x: Vec<Rational> },
    Unbounded,
}

impl LpResult {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, LpResult::Infeasible)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    RowLength {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveLength { found: usize, expected: usize },
}

impl LpProblem {
    /// A feasibility problem (zero objective) over `num_vars` variables.
    pub fn new(num_vars: usize) -> Self {
        LpProblem {
            num_vars,
            constraints: Vec::new(),
            objective: vec![Rational::zero(); num_vars],
            sense: Sense::Maximize,
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn with_objective(mut self, objective: Vec<Rational>, sense: Sense) -> Self {
        self.objective = objective;
        self.sense = sense;
        self
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.len() != self.num_vars {
            return Err(LpError::ObjectiveLength {
                found: self.objective.len(),
                expected: self.num_vars,
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != self.num_vars {
                return Err(LpError::RowLength {
                    row,
                    found: c.coeffs.len(),
                    expected: self.num_vars,
                });
            }
        }
        Ok(())
    }

    /// True when `x` is nonnegative and satisfies every constraint exactly.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars || x.iter().any(|v| v.is_negative()) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.relation {
                Relation::Eq => lhs == c.rhs,
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
            }
        })
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize, cost: &mut [Rational]) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        if !cost[col].is_zero() {
            let f = cost[col].clone();
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Reduced-cost row for maximizing `c`: entry j is `c_B B⁻¹ A_j - c_j`,
    /// the last entry is the current objective value.
    fn reduced_costs(&self, c: &[Rational]) -> Vec<Rational> {
        let mut cost: Vec<Rational> = (0..=self.width)
            .map(|j| if j < self.width { -c[j].clone() } else { Rational::zero() })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            for (j, v) in self.rows[i].iter().enumerate() {
                if !v.is_zero() {
                    cost[j] += &c[b] * v;
                }
            }
        }
        cost
    }

    /// Runs simplex iterations maximizing `c` over the allowed columns.
    /// Returns false when the objective is unbounded.
    fn optimize(&mut self, c: &[Rational], allowed: usize) -> (bool, Vec<Rational>) {
        let mut cost = self.reduced_costs(c);
        loop {
            let entering = (0..allowed).find(|&j| cost[j].is_negative());
            let Some(col) = entering else {
                return (true, cost);
            };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(i) / a;
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((r, _)) = best else {
                return (false, cost);
            };
            self.pivot(r, col, &mut cost);
        }
    }
}

/// Solves the problem exactly.
pub fn lp_solve(problem: &LpProblem) -> Result<LpResult, LpError> {
    problem.validate()?;
    let n = problem.num_vars;
    let m = problem.constraints.len();
    let slack_count = problem
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count();
    // columns: originals, slacks, artificials
    let art_start = n + slack_count;
    let width = art_start + m;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack = n;
    let mut needs_artificial = Vec::with_capacity(m);
    for c in &problem.constraints {
        let mut row = vec![Rational::zero(); width + 1];
        row[..n].clone_from_slice(&c.coeffs);
        row[width] = c.rhs.clone();
        let slack_col = match c.relation {
            Relation::Eq => None,
            Relation::Le => {
                row[slack] = Rational::from_integer(1.into());
                slack += 1;
                Some(slack - 1)
            }
            Relation::Ge => {
                row[slack] = Rational::from_integer((-1).into());
                slack += 1;
                Some(slack - 1)
            }
        };
        if row[width].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
        }
        let usable_slack = slack_col.filter(|&s| row[s].is_positive());
        needs_artificial.push(usable_slack.is_none());
        basis.push(usable_slack.unwrap_or(usize::MAX));
        rows.push(row);
    }
    for (i, need) in needs_artificial.iter().enumerate() {
        if *need {
            rows[i][art_start + i] = Rational::from_integer(1.into());
            basis[i] = art_start + i;
        }
    }
    let mut t = Tableau { rows, basis, width };

    if needs_artificial.iter().any(|&b| b) {
        let mut phase1 = vec![Rational::zero(); width];
        for (i, need) in needs_artificial.iter().enumerate() {
            if *need {
                phase1[art_start + i] = Rational::from_integer((-1).into());
            }
        }
        let (_, cost) = t.optimize(&phase1, width);
        if cost[width].is_negative() {
            return Ok(LpResult::Infeasible);
        }
        // drive zero-valued artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= art_start {
                match (0..art_start).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(col) => {
                        let mut scratch = vec![Rational::zero(); width + 1];
                        t.pivot(i, col, &mut scratch);
                    }
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut c = vec![Rational::zero(); width];
    for (j, v) in problem.objective.iter().enumerate() {
        c[j] = match problem.sense {
            Sense::Maximize => v.clone(),
            Sense::Minimize => -v.clone(),
        };
    }
    let (bounded, _) = t.optimize(&c, art_start);
    if !bounded {
        return Ok(LpResult::Unbounded);
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i).clone();
        }
    }
    let value = problem.objective_at(&x);
    debug_assert!(problem.is_satisfied_by(&x));
    Ok(LpResult::Optimal { value, x })
}
