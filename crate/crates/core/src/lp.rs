//! Small dense linear programs over free variables.
//!
//! Every LP in this crate has the shape
//!
//! ```text
//! minimize  cᵀx   subject to  A x ≤ b,   x ∈ ℝⁿ free
//! ```
//!
//! with few variables (n ≤ 10) and a few hundred rows at most. The solver
//! works on the dual standard form `min bᵀy  s.t.  Aᵀy = −c, y ≥ 0`, whose
//! tableau has only `n` rows, and recovers `x` from the simplex multipliers.
//! Pivoting is Dantzig's rule with a permanent switch to Bland's rule after a
//! run of degenerate pivots, so results are deterministic and cycling cannot
//! occur.

use thiserror::Error;

/// Slack allowed on `A x ≤ b` when deciding feasibility or membership.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced-cost threshold for optimality.
pub const OPT_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("constraint matrix has {rows} entries but {expected} were expected")]
    Shape { rows: usize, expected: usize },
    #[error("non-finite coefficient in LP data")]
    NonFinite,
    #[error("simplex exceeded {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub objective: Option<f64>,
    /// Present iff `status == Optimal`.
    pub argument: Option<Vec<f64>>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        LpOutcome {
            status: LpStatus::Infeasible,
            objective: None,
            argument: None,
        }
    }

    fn unbounded() -> Self {
        LpOutcome {
            status: LpStatus::Unbounded,
            objective: None,
            argument: None,
        }
    }
}

/// Inequality system `A x ≤ b`, stored row-major with every row scaled to unit
/// Euclidean norm. Zero rows are dropped; a zero row with negative right-hand
/// side marks the system as trivially infeasible.
#[derive(Debug, Clone)]
pub struct Constraints {
    num_vars: usize,
    rows: Vec<f64>,
    rhs: Vec<f64>,
    trivially_infeasible: bool,
}

impl Constraints {
    pub fn new(num_vars: usize, rows: &[f64], rhs: &[f64]) -> Result<Self, LpError> {
        let expected = rhs.len() * num_vars;
        if rows.len() != expected {
            return Err(LpError::Shape {
                rows: rows.len(),
                expected,
            });
        }
        if rows.iter().chain(rhs).any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        let mut out = Constraints {
            num_vars,
            rows: Vec::with_capacity(rows.len()),
            rhs: Vec::with_capacity(rhs.len()),
            trivially_infeasible: false,
        };
        for (i, &bi) in rhs.iter().enumerate() {
            out.push_row(&rows[i * num_vars..(i + 1) * num_vars], bi);
        }
        Ok(out)
    }

    /// Appends one row, normalizing it in place.
    pub fn push_row(&mut self, row: &[f64], rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            if rhs < -FEAS_TOL {
                self.trivially_infeasible = true;
            }
            return;
        }
        self.rows.extend(row.iter().map(|v| v / norm));
        self.rhs.push(rhs / norm);
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.num_vars..(i + 1) * self.num_vars]
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.rhs[i]
    }

    /// Largest violation `max_i (A_i x − b_i)` (negative when strictly inside).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        (0..self.num_rows())
            .map(|i| dot(self.row(i), x) - self.rhs[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Pluggable LP backend. The geometry layer only talks to this trait.
pub trait LpSolver: Sync {
    fn minimize(&self, cons: &Constraints, objective: &[f64]) -> Result<LpOutcome, LpError>;

    /// Largest `t ≤ 1` such that `A x + t·1 ≤ b` has a solution. Since rows are
    /// unit-normalized, a nonnegative value is the inscribed-ball radius of the
    /// polyhedron (capped at 1) and a negative value is the smallest uniform
    /// relaxation that makes it nonempty.
    fn max_slack(&self, cons: &Constraints) -> Result<f64, LpError> {
        if cons.trivially_infeasible {
            return Ok(f64::NEG_INFINITY);
        }
        let n = cons.num_vars;
        let mut lifted = Constraints {
            num_vars: n + 1,
            rows: Vec::with_capacity((cons.num_rows() + 1) * (n + 1)),
            rhs: Vec::with_capacity(cons.num_rows() + 1),
            trivially_infeasible: false,
        };
        for i in 0..cons.num_rows() {
            // Rows are already unit length; the t column is appended unscaled.
            lifted.rows.extend_from_slice(cons.row(i));
            lifted.rows.push(1.0);
            lifted.rhs.push(cons.rhs(i));
        }
        lifted.rows.extend(std::iter::repeat_n(0.0, n));
        lifted.rows.push(1.0);
        lifted.rhs.push(1.0);

        let mut objective = vec![0.0; n + 1];
        objective[n] = -1.0;
        let out = self.minimize(&lifted, &objective)?;
        match out.status {
            LpStatus::Optimal => Ok(-out.objective.unwrap_or(0.0)),
            // The lifted problem is always feasible and bounded above by t ≤ 1.
            _ => Err(LpError::IterationLimit(0)),
        }
    }

    fn is_feasible(&self, cons: &Constraints) -> Result<bool, LpError> {
        Ok(self.max_slack(cons)? >= -FEAS_TOL)
    }
}

/// The default backend: a dense two-phase simplex on the dual.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSimplex;

impl LpSolver for DenseSimplex {
    fn minimize(&self, cons: &Constraints, objective: &[f64]) -> Result<LpOutcome, LpError> {
        let n = cons.num_vars;
        if objective.len() != n {
            return Err(LpError::Shape {
                rows: objective.len(),
                expected: n,
            });
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite);
        }
        if cons.trivially_infeasible {
            return Ok(LpOutcome::infeasible());
        }

        let k = cons.num_rows();
        let mut tab = Tableau::new(n, k + n);
        // Row j of the dual: Σ_i A_ij y_i = −c_j, sign-flipped so the rhs is ≥ 0.
        let mut signs = vec![1.0; n];
        for j in 0..n {
            let target = -objective[j];
            let s = if target < 0.0 { -1.0 } else { 1.0 };
            signs[j] = s;
            for i in 0..k {
                tab.set(j, i, s * cons.row(i)[j]);
            }
            tab.set(j, k + j, 1.0);
            tab.set_rhs(j, s * target);
            tab.basis[j] = k + j;
        }

        // Phase 1: minimize the sum of artificials.
        for col in 0..k {
            let s: f64 = (0..n).map(|r| tab.get(r, col)).sum();
            tab.set_cost(col, -s);
        }
        let total: f64 = (0..n).map(|r| tab.rhs(r)).sum();
        tab.set_value(-total);
        tab.optimize(k)?;

        let residual = -tab.value();
        let scale = 1.0 + objective.iter().map(|v| v.abs()).sum::<f64>();
        if residual > 1e-9 * scale {
            // Dual infeasible: the primal is unbounded or infeasible.
            return if self.is_feasible(cons)? {
                Ok(LpOutcome::unbounded())
            } else {
                Ok(LpOutcome::infeasible())
            };
        }
        tab.evict_artificials(k);

        // Phase 2: minimize bᵀy over the y columns only.
        for col in 0..k + n {
            let cost = if col < k { cons.rhs(col) } else { 0.0 };
            let mut reduced = cost;
            for r in 0..n {
                let b = tab.basis[r];
                if b < k {
                    reduced -= cons.rhs(b) * tab.get(r, col);
                }
            }
            tab.set_cost(col, reduced);
        }
        let value: f64 = (0..n)
            .filter(|&r| tab.basis[r] < k)
            .map(|r| cons.rhs(tab.basis[r]) * tab.rhs(r))
            .sum();
        tab.set_value(-value);

        if let Pivoting::Unbounded = tab.optimize(k)? {
            return Ok(LpOutcome::infeasible());
        }

        // Simplex multipliers π' = −(reduced costs of artificial columns).
        let x: Vec<f64> = (0..n).map(|j| -signs[j] * tab.cost(k + j)).collect();
        let objective_value = dot(objective, &x);
        Ok(LpOutcome {
            status: LpStatus::Optimal,
            objective: Some(objective_value),
            argument: Some(x),
        })
    }
}

enum Pivoting {
    Optimal,
    Unbounded,
}

/// Row-major simplex tableau: `rows` constraint rows followed by the cost row;
/// the last column holds right-hand sides (and `−z` in the cost row).
struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(rows: usize, cols: usize) -> Self {
        let width = cols + 1;
        Tableau {
            rows,
            cols,
            width,
            t: vec![0.0; (rows + 1) * width],
            basis: vec![0; rows],
        }
    }

    #[inline]
    fn get(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    #[inline]
    fn set(&mut self, r: usize, c: usize, v: f64) {
        self.t[r * self.width + c] = v;
    }

    fn rhs(&self, r: usize) -> f64 {
        self.get(r, self.cols)
    }

    fn set_rhs(&mut self, r: usize, v: f64) {
        let c = self.cols;
        self.set(r, c, v);
    }

    fn cost(&self, c: usize) -> f64 {
        self.get(self.rows, c)
    }

    fn set_cost(&mut self, c: usize, v: f64) {
        let r = self.rows;
        self.set(r, c, v);
    }

    fn value(&self) -> f64 {
        self.get(self.rows, self.cols)
    }

    fn set_value(&mut self, v: f64) {
        let (r, c) = (self.rows, self.cols);
        self.set(r, c, v);
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.get(pr, pc);
        for v in &mut self.t[pr * w..(pr + 1) * w] {
            *v *= inv;
        }
        let (before, rest) = self.t.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let mut eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
                row[pc] = 0.0;
            }
        };
        before.chunks_exact_mut(w).for_each(&mut eliminate);
        after.chunks_exact_mut(w).for_each(&mut eliminate);
        self.basis[pr] = pc;
    }

    /// Runs primal simplex iterations letting only columns `< enter_limit` enter.
    fn optimize(&mut self, enter_limit: usize) -> Result<Pivoting, LpError> {
        let mut bland = false;
        let mut degenerate_run = 0usize;
        for _ in 0..MAX_PIVOTS {
            let entering = if bland {
                (0..enter_limit).find(|&c| self.cost(c) < -OPT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for c in 0..enter_limit {
                    let d = self.cost(c);
                    if d < -OPT_TOL && best.is_none_or(|(_, bd)| d < bd) {
                        best = Some((c, d));
                    }
                }
                best.map(|(c, _)| c)
            };
            let Some(pc) = entering else {
                return Ok(Pivoting::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.get(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            if ratio < lratio && !tie || tie && self.basis[r] < self.basis[lr] {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else {
                return Ok(Pivoting::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(pr, pc);
        }
        Err(LpError::IterationLimit(MAX_PIVOTS))
    }

    /// After phase 1, pivots basic artificials (index ≥ `first_artificial`) out
    /// wherever a structural column has a usable entry in their row.
    fn evict_artificials(&mut self, first_artificial: usize) {
        for r in 0..self.rows {
            if self.basis[r] < first_artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for c in 0..first_artificial {
                let a = self.get(r, c).abs();
                if a > 1e-9 && best.is_none_or(|(_, ba)| a > ba) {
                    best = Some((c, a));
                }
            }
            if let Some((c, _)) = best {
                self.pivot(r, c);
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
