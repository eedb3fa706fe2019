//! Small dense simplex solver for bounded-variable linear programs.
//!
//! Solves `min c·x` subject to row constraints and `0 ≤ x ≤ u`, with `u`
//! possibly infinite. Two phases, Bland's lowest-index rule for both the
//! entering and the leaving variable, and bound flips for variables whose
//! upper bound is reached before any basic variable blocks. Problems here
//! have at most a few hundred rows and columns, so everything is dense.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub cmp: Cmp,
    pub rhs: f64,
}

/// `min c·x` s.t. rows, `0 ≤ x ≤ upper`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub cost: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            cost,
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn set_upper(&mut self, j: usize, u: f64) {
        self.upper[j] = u;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        assert_eq!(coeffs.len(), self.cost.len(), "row width");
        self.rows.push(Constraint { coeffs, cmp, rhs });
    }

    /// Largest violation of a row or bound by `x`.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(-v).max(v - self.upper[j]);
        }
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match r.cmp {
                Cmp::Le => lhs - r.rhs,
                Cmp::Ge => r.rhs - lhs,
                Cmp::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self)?.run(self)
    }
}

struct Tableau {
    m: usize,
    // total columns: originals, slacks, artificials
    width: usize,
    n_orig: usize,
    first_art: usize,
    t: Vec<Vec<f64>>,
    xb: Vec<f64>,
    basis: Vec<usize>,
    at_upper: Vec<bool>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Result<Self> {
        let n = lp.num_vars();
        if lp.upper.iter().any(|&u| u < 0.0 || u.is_nan()) {
            return Err(Error::Infeasible);
        }
        let m = lp.rows.len();
        let n_slack = lp.rows.iter().filter(|r| r.cmp != Cmp::Eq).count();
        let first_art = n + n_slack;
        let width = first_art + m;
        let mut t = vec![vec![0.0; width]; m];
        let mut xb = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut slack = n;
        let mut needs_art = vec![true; m];
        for (i, r) in lp.rows.iter().enumerate() {
            let sign = if r.rhs < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i][j] = sign * r.coeffs[j];
            }
            xb[i] = sign * r.rhs;
            let s = match r.cmp {
                Cmp::Le => Some(1.0),
                Cmp::Ge => Some(-1.0),
                Cmp::Eq => None,
            };
            if let Some(s) = s {
                t[i][slack] = sign * s;
                if sign * s > 0.0 {
                    basis[i] = slack;
                    needs_art[i] = false;
                }
                slack += 1;
            }
            t[i][first_art + i] = 1.0;
            if needs_art[i] {
                basis[i] = first_art + i;
            }
        }
        let mut upper = lp.upper.clone();
        upper.resize(width, f64::INFINITY);
        // Artificials that never enter the basis are fixed at zero.
        for i in 0..m {
            if !needs_art[i] {
                upper[first_art + i] = 0.0;
            }
        }
        Ok(Self {
            m,
            width,
            n_orig: n,
            first_art,
            t,
            xb,
            basis,
            at_upper: vec![false; width],
            upper,
            cost: vec![0.0; width],
            d: vec![0.0; width],
            iterations: 0,
        })
    }

    fn set_cost(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.width {
                    self.d[j] -= cb * self.t[i][j];
                }
            }
        }
    }

    fn is_basic(&self) -> Vec<bool> {
        let mut b = vec![false; self.width];
        for &j in &self.basis {
            b[j] = true;
        }
        b
    }

    /// Runs simplex iterations on the current cost; columns `>= limit` never enter.
    fn iterate(&mut self, limit: usize) -> Result<()> {
        loop {
            self.iterations += 1;
            if self.iterations > MAX_ITERATIONS {
                return Err(Error::domain("simplex iteration limit reached"));
            }
            let basic = self.is_basic();
            let entering = (0..limit).find(|&j| {
                !basic[j]
                    && self.upper[j] > 0.0
                    && if self.at_upper[j] {
                        self.d[j] > COST_TOL
                    } else {
                        self.d[j] < -COST_TOL
                    }
            });
            let Some(j) = entering else {
                return Ok(());
            };
            let sigma = if self.at_upper[j] { -1.0 } else { 1.0 };

            let mut best: Option<(usize, bool, f64)> = None;
            for i in 0..self.m {
                let rate = -sigma * self.t[i][j];
                let bv = self.basis[i];
                let (step, to_upper) = if rate < -PIVOT_TOL {
                    (self.xb[i].max(0.0) / -rate, false)
                } else if rate > PIVOT_TOL && self.upper[bv].is_finite() {
                    ((self.upper[bv] - self.xb[i]).max(0.0) / rate, true)
                } else {
                    continue;
                };
                let replace = match best {
                    None => true,
                    Some((p, _, s)) => {
                        step < s - 1e-13 || (step <= s + 1e-13 && bv < self.basis[p])
                    }
                };
                if replace {
                    best = Some((i, to_upper, step));
                }
            }
            // A bound flip wins only when strictly shorter than every block.
            let (theta, leave) = match best {
                Some((_, _, s)) if self.upper[j] < s => (self.upper[j], None),
                Some((p, up, s)) => (s, Some((p, up))),
                None => (self.upper[j], None),
            };
            if !theta.is_finite() {
                return Err(Error::Unbounded);
            }
            for i in 0..self.m {
                self.xb[i] += -sigma * self.t[i][j] * theta;
            }
            let entering_value = if sigma > 0.0 { theta } else { self.upper[j] - theta };
            match leave {
                None => {
                    self.at_upper[j] = !self.at_upper[j];
                }
                Some((p, to_upper)) => {
                    let out = self.basis[p];
                    self.at_upper[out] = to_upper;
                    self.at_upper[j] = false;
                    self.pivot(p, j);
                    self.xb[p] = entering_value;
                }
            }
        }
    }

    fn pivot(&mut self, p: usize, j: usize) {
        let piv = self.t[p][j];
        for v in self.t[p].iter_mut() {
            *v /= piv;
        }
        let prow = self.t[p].clone();
        for i in 0..self.m {
            if i != p {
                let f = self.t[i][j];
                if f != 0.0 {
                    for (a, b) in self.t[i].iter_mut().zip(&prow) {
                        *a -= f * b;
                    }
                }
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (a, b) in self.d.iter_mut().zip(&prow) {
                *a -= f * b;
            }
        }
        self.basis[p] = j;
    }

    fn value_of(&self, j: usize) -> f64 {
        if let Some(i) = self.basis.iter().position(|&b| b == j) {
            self.xb[i]
        } else if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        // Phase 1: drive artificials to zero.
        let mut c1 = vec![0.0; self.width];
        for i in 0..self.m {
            c1[self.first_art + i] = 1.0;
        }
        self.set_cost(c1);
        self.iterate(self.width)?;
        let infeas: f64 = (self.first_art..self.width).map(|j| self.value_of(j)).sum();
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeas > FEAS_TOL * scale {
            return Err(Error::Infeasible);
        }
        // Pivot zero-level artificials out where possible; the rest mark
        // redundant rows and are pinned at zero.
        for p in 0..self.m {
            if self.basis[p] >= self.first_art {
                let basic = self.is_basic();
                if let Some(j) =
                    (0..self.first_art).find(|&j| !basic[j] && self.t[p][j].abs() > 1e-9)
                {
                    let val = self.value_of(j);
                    self.pivot(p, j);
                    self.xb[p] = val;
                    // Other basics are unchanged: the artificial sat at zero.
                }
            }
        }
        for j in self.first_art..self.width {
            self.upper[j] = 0.0;
            self.at_upper[j] = false;
        }
        self.zero_artificials();

        let mut c2 = lp.cost.clone();
        c2.resize(self.width, 0.0);
        self.set_cost(c2);
        self.iterate(self.first_art)?;

        let x: Vec<f64> = (0..self.n_orig)
            .map(|j| self.value_of(j).clamp(0.0, self.upper[j]))
            .collect();
        let objective = lp.cost.iter().zip(&x).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        })
    }

    fn zero_artificials(&mut self) {
        for i in 0..self.m {
            if self.basis[i] >= self.first_art {
                self.xb[i] = 0.0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-9
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  36 at (2, 6)
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.add_row(vec![1.0, 0.0], Cmp::Le, 4.0);
        lp.add_row(vec![0.0, 2.0], Cmp::Le, 12.0);
        lp.add_row(vec![3.0, 2.0], Cmp::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!(approx(s.objective, -36.0));
        assert!(approx(s.x[0], 2.0) && approx(s.x[1], 6.0));
    }

    #[test]
    fn bounded_variables_and_equalities() {
        // min -x - y s.t. x + y = 1.5, x, y ∈ [0, 1]
        let mut lp = LinearProgram::new(vec![-1.0, -2.0]);
        lp.set_upper(0, 1.0);
        lp.set_upper(1, 1.0);
        lp.add_row(vec![1.0, 1.0], Cmp::Eq, 1.5);
        let s = lp.solve().unwrap();
        assert!(approx(s.objective, -2.5));
        assert!(approx(s.x[0], 0.5) && approx(s.x[1], 1.0));
        assert!(lp.violation(&s.x) < 1e-9);
    }

    #[test]
    fn ge_rows_and_bound_flip() {
        // min x1 + 2 x2 s.t. x1 + x2 ≥ 1.5, x ≤ 1  →  x1 = 1, x2 = 0.5
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.set_upper(0, 1.0);
        lp.set_upper(1, 1.0);
        lp.add_row(vec![1.0, 1.0], Cmp::Ge, 1.5);
        let s = lp.solve().unwrap();
        assert!(approx(s.objective, 2.0));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.set_upper(0, 1.0);
        lp.add_row(vec![1.0], Cmp::Ge, 2.0);
        assert_eq!(lp.solve().unwrap_err(), Error::Infeasible);

        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], Cmp::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], Cmp::Eq, 1.0);
        lp.add_row(vec![2.0, 2.0], Cmp::Eq, 2.0);
        lp.add_row(vec![1.0, 0.0], Cmp::Ge, 0.25);
        let s = lp.solve().unwrap();
        assert!(approx(s.objective, 1.0));
        assert!(lp.violation(&s.x) < 1e-9);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example (Beale) needs an anti-cycling rule.
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_row(vec![0.25, -60.0, -0.04, 9.0], Cmp::Le, 0.0);
        lp.add_row(vec![0.5, -90.0, -0.02, 3.0], Cmp::Le, 0.0);
        lp.add_row(vec![0.0, 0.0, 1.0, 0.0], Cmp::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!(approx(s.objective, -0.05));
    }
}
