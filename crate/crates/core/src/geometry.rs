//! AH-polytopes: affine images of half-space polytopes, kept in factored form
//! `{ x | ∃α: x = Vα + c, Cα ≤ d }`.
//!
//! Affine maps and half-space intersections are exact and never touch an LP.
//! Emptiness is never checked eagerly; callers ask [`AhPolytope::is_feasible`]
//! when they need to know.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lp::{Constraints, DenseSimplex, LpError, LpOutcome, LpSolver, LpStatus, FEAS_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("set is empty")]
    Empty,
    #[error("set is unbounded along dimension {0}")]
    Unbounded(usize),
    #[error("reduced basis is singular or ill-conditioned (condition number {0:.3e}); use any interior LP point instead")]
    DegenerateBasis(f64),
    #[error("LP backend failure: {0}")]
    Lp(#[from] LpError),
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is inverted");
        Interval { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Axis-aligned box, one interval per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalBox(pub Vec<Interval>);

impl IntervalBox {
    pub fn dims(&self) -> usize {
        self.0.len()
    }
}

impl std::ops::Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AhPolytope {
    basis: DMatrix<f64>,
    center: DVector<f64>,
    cons_mat: DMatrix<f64>,
    cons_rhs: DVector<f64>,
}

impl AhPolytope {
    pub fn new(
        basis: DMatrix<f64>,
        center: DVector<f64>,
        cons_mat: DMatrix<f64>,
        cons_rhs: DVector<f64>,
    ) -> Result<Self, GeometryError> {
        if center.len() != basis.nrows() {
            return Err(GeometryError::Dimension {
                what: "center length vs basis rows",
                expected: basis.nrows(),
                got: center.len(),
            });
        }
        if cons_mat.ncols() != basis.ncols() {
            return Err(GeometryError::Dimension {
                what: "constraint columns vs basis columns",
                expected: basis.ncols(),
                got: cons_mat.ncols(),
            });
        }
        if cons_rhs.len() != cons_mat.nrows() {
            return Err(GeometryError::Dimension {
                what: "constraint rhs vs constraint rows",
                expected: cons_mat.nrows(),
                got: cons_rhs.len(),
            });
        }
        for (name, finite) in [
            ("basis", basis.iter().all(|v| v.is_finite())),
            ("center", center.iter().all(|v| v.is_finite())),
            ("constraint matrix", cons_mat.iter().all(|v| v.is_finite())),
            ("constraint rhs", cons_rhs.iter().all(|v| v.is_finite())),
        ] {
            if !finite {
                return Err(GeometryError::NonFinite(name));
            }
        }
        Ok(AhPolytope {
            basis,
            center,
            cons_mat,
            cons_rhs,
        })
    }

    /// The H-polytope `{x | Gx ≤ h}` with identity basis and zero center.
    pub fn from_halfspaces(g: DMatrix<f64>, h: DVector<f64>) -> Result<Self, GeometryError> {
        let n = g.ncols();
        Self::new(DMatrix::identity(n, n), DVector::zeros(n), g, h)
    }

    /// Axis-aligned box `lo ≤ x ≤ hi`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        let n = lo.len();
        if hi.len() != n {
            return Err(GeometryError::Dimension {
                what: "box bounds",
                expected: n,
                got: hi.len(),
            });
        }
        let mut g = DMatrix::zeros(2 * n, n);
        let mut h = DVector::zeros(2 * n);
        for i in 0..n {
            g[(2 * i, i)] = 1.0;
            h[2 * i] = hi[i];
            g[(2 * i + 1, i)] = -1.0;
            h[2 * i + 1] = -lo[i];
        }
        Self::from_halfspaces(g, h)
    }

    /// Ambient dimension `n`.
    pub fn dims(&self) -> usize {
        self.basis.nrows()
    }

    /// Number of generator variables `m`.
    pub fn num_generators(&self) -> usize {
        self.basis.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.cons_mat.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn cons_mat(&self) -> &DMatrix<f64> {
        &self.cons_mat
    }

    pub fn cons_rhs(&self) -> &DVector<f64> {
        &self.cons_rhs
    }

    /// `{ w x + b | x ∈ self }`: basis and center are mapped, constraints kept.
    pub fn affine_map(&self, w: &DMatrix<f64>, b: &DVector<f64>) -> Result<Self, GeometryError> {
        if w.ncols() != self.dims() {
            return Err(GeometryError::Dimension {
                what: "map columns vs ambient dimension",
                expected: self.dims(),
                got: w.ncols(),
            });
        }
        if b.len() != w.nrows() {
            return Err(GeometryError::Dimension {
                what: "offset length vs map rows",
                expected: w.nrows(),
                got: b.len(),
            });
        }
        Ok(AhPolytope {
            basis: w * &self.basis,
            center: w * &self.center + b,
            cons_mat: self.cons_mat.clone(),
            cons_rhs: self.cons_rhs.clone(),
        })
    }

    pub fn linear_transform(&self, w: &DMatrix<f64>) -> Result<Self, GeometryError> {
        self.affine_map(w, &DVector::zeros(w.nrows()))
    }

    /// `self ∩ {x | Gx ≤ h}`, appending `G V α ≤ h − G c` to the constraints.
    pub fn intersect_halfspaces(
        &self,
        g: &DMatrix<f64>,
        h: &DVector<f64>,
    ) -> Result<Self, GeometryError> {
        if g.ncols() != self.dims() {
            return Err(GeometryError::Dimension {
                what: "half-space columns vs ambient dimension",
                expected: self.dims(),
                got: g.ncols(),
            });
        }
        if h.len() != g.nrows() {
            return Err(GeometryError::Dimension {
                what: "half-space rhs vs rows",
                expected: g.nrows(),
                got: h.len(),
            });
        }
        let k = self.num_constraints();
        let r = g.nrows();
        let m = self.num_generators();
        let new_rows = g * &self.basis;
        let new_rhs = h - g * &self.center;
        let mut cons_mat = DMatrix::zeros(k + r, m);
        cons_mat.rows_mut(0, k).copy_from(&self.cons_mat);
        cons_mat.rows_mut(k, r).copy_from(&new_rows);
        let mut cons_rhs = DVector::zeros(k + r);
        cons_rhs.rows_mut(0, k).copy_from(&self.cons_rhs);
        cons_rhs.rows_mut(k, r).copy_from(&new_rhs);
        Ok(AhPolytope {
            basis: self.basis.clone(),
            center: self.center.clone(),
            cons_mat,
            cons_rhs,
        })
    }

    /// Like [`intersect_halfspaces`](Self::intersect_halfspaces) but skips
    /// incoming rows that are vacuous in generator space (zero after mapping,
    /// with nonnegative rhs) or exact duplicates of an existing row. The
    /// represented set is identical.
    pub fn intersect_halfspaces_pruned(
        &self,
        g: &DMatrix<f64>,
        h: &DVector<f64>,
    ) -> Result<Self, GeometryError> {
        let full = self.intersect_halfspaces(g, h)?;
        let k = self.num_constraints();
        let m = self.num_generators();
        let mut keep: Vec<usize> = (0..k).collect();
        'rows: for i in k..full.num_constraints() {
            let row = full.cons_mat.row(i);
            let norm = row.norm();
            let rhs = full.cons_rhs[i];
            if norm <= 1e-12 * (1.0 + rhs.abs()) && rhs >= 0.0 {
                continue;
            }
            for &j in &keep {
                let other = full.cons_mat.row(j);
                let same = (0..m).all(|c| row[c] == other[c]);
                if same && full.cons_rhs[j] <= rhs {
                    continue 'rows;
                }
            }
            keep.push(i);
        }
        if keep.len() == full.num_constraints() {
            return Ok(full);
        }
        let cons_mat = full.cons_mat.select_rows(keep.iter());
        let cons_rhs = full.cons_rhs.select_rows(keep.iter());
        Ok(AhPolytope {
            basis: full.basis,
            center: full.center,
            cons_mat,
            cons_rhs,
        })
    }

    pub(crate) fn lp_constraints(&self) -> Result<Constraints, GeometryError> {
        let m = self.num_generators();
        let k = self.num_constraints();
        let mut rows = Vec::with_capacity(k * m);
        for i in 0..k {
            rows.extend(self.cons_mat.row(i).iter());
        }
        Ok(Constraints::new(m, &rows, self.cons_rhs.as_slice())?)
    }

    /// `min wᵀx` over the set. The reported argument is in generator (α) space.
    pub fn minimize(&self, w: &DVector<f64>) -> Result<LpOutcome, GeometryError> {
        let cons = self.lp_constraints()?;
        self.minimize_with(&cons, w)
    }

    pub fn maximize(&self, w: &DVector<f64>) -> Result<LpOutcome, GeometryError> {
        let mut out = self.minimize(&-w)?;
        out.objective = out.objective.map(|v| -v);
        Ok(out)
    }

    fn minimize_with(
        &self,
        cons: &Constraints,
        w: &DVector<f64>,
    ) -> Result<LpOutcome, GeometryError> {
        if w.len() != self.dims() {
            return Err(GeometryError::Dimension {
                what: "direction length vs ambient dimension",
                expected: self.dims(),
                got: w.len(),
            });
        }
        let obj = self.basis.tr_mul(w);
        let mut out = DenseSimplex.minimize(cons, obj.as_slice())?;
        if let Some(v) = out.objective.as_mut() {
            *v += w.dot(&self.center);
        }
        Ok(out)
    }

    /// Point `Vα + c` for a generator vector α.
    pub fn point_at(&self, alpha: &[f64]) -> DVector<f64> {
        &self.basis * DVector::from_column_slice(alpha) + &self.center
    }

    pub fn is_feasible(&self) -> Result<bool, GeometryError> {
        Ok(DenseSimplex.is_feasible(&self.lp_constraints()?)?)
    }

    /// Any point of the set (the LP optimum for a zero objective).
    pub fn any_point(&self) -> Result<DVector<f64>, GeometryError> {
        let out = self.minimize(&DVector::zeros(self.dims()))?;
        match out.argument {
            Some(alpha) => Ok(self.point_at(&alpha)),
            None => Err(GeometryError::Empty),
        }
    }

    /// Tight box around the set via `2n` LPs.
    pub fn bounding_box(&self) -> Result<IntervalBox, GeometryError> {
        let n = self.dims();
        let dirs: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                e
            })
            .collect();
        self.support_box(&dirs)
    }

    /// Range of `dᵀx` over the set for each direction `d`, two LPs apiece.
    pub fn support_box(&self, dirs: &[DVector<f64>]) -> Result<IntervalBox, GeometryError> {
        let cons = self.lp_constraints()?;
        if !DenseSimplex.is_feasible(&cons)? {
            return Err(GeometryError::Empty);
        }
        let mut out = Vec::with_capacity(dirs.len());
        for (i, d) in dirs.iter().enumerate() {
            let lo = self.minimize_with(&cons, d)?;
            let hi = self.minimize_with(&cons, &-d)?;
            match (lo.status, hi.status) {
                (LpStatus::Optimal, LpStatus::Optimal) => {
                    let lo = lo.objective.unwrap_or_default();
                    let hi = -hi.objective.unwrap_or_default();
                    out.push(Interval {
                        lo: lo.min(hi),
                        hi: hi.max(lo),
                    });
                }
                (LpStatus::Infeasible, _) | (_, LpStatus::Infeasible) => {
                    return Err(GeometryError::Empty)
                }
                _ => return Err(GeometryError::Unbounded(i)),
            }
        }
        Ok(IntervalBox(out))
    }

    /// Membership test: is `{α | Vα = x − c, Cα ≤ d}` nonempty within tolerance.
    pub fn contains_point(&self, x: &DVector<f64>) -> Result<bool, GeometryError> {
        if x.len() != self.dims() {
            return Err(GeometryError::Dimension {
                what: "point length vs ambient dimension",
                expected: self.dims(),
                got: x.len(),
            });
        }
        let mut cons = self.lp_constraints()?;
        let target = x - &self.center;
        for i in 0..self.dims() {
            let row: Vec<f64> = self.basis.row(i).iter().copied().collect();
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            let scale = 1.0 + target[i].abs();
            // Equality rows get a tolerance relative to the coordinate magnitude.
            cons.push_row(&row, target[i] + FEAS_TOL * scale);
            cons.push_row(&neg, -target[i] + FEAS_TOL * scale);
        }
        Ok(DenseSimplex.is_feasible(&cons)?)
    }

    /// Chebyshev center of the set after removing `drop_dims` (coordinates that
    /// are constant on the set). The remaining basis rows must form a square,
    /// well-conditioned matrix; the set is converted to half-space form through
    /// its inverse and the largest inscribed ball is found by LP. Opposing row
    /// pairs that pin the set to a hyperplane are kept as equalities and the
    /// ball is measured inside that hyperplane. The dropped coordinates are
    /// re-inserted from the center vector.
    pub fn chebyshev_center(&self, drop_dims: &[usize]) -> Result<DVector<f64>, GeometryError> {
        let n = self.dims();
        let keep: Vec<usize> = (0..n).filter(|i| !drop_dims.contains(i)).collect();
        let m = self.num_generators();
        if keep.len() != m {
            return Err(GeometryError::Dimension {
                what: "reduced basis must be square",
                expected: m,
                got: keep.len(),
            });
        }
        let v_red = self.basis.select_rows(keep.iter());
        let c_red = self.center.select_rows(keep.iter());
        let svd = v_red.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let cond = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        if !cond.is_finite() || cond > 1e12 {
            return Err(GeometryError::DegenerateBasis(cond));
        }
        let v_inv = v_red
            .try_inverse()
            .ok_or(GeometryError::DegenerateBasis(cond))?;

        // α = V⁻¹ (y − c): C V⁻¹ y ≤ d + C V⁻¹ c.
        let a = &self.cons_mat * &v_inv;
        let b = &self.cons_rhs + &a * &c_red;
        let k = a.nrows();

        let mut rows: Vec<DVector<f64>> = Vec::with_capacity(k);
        let mut rhs = Vec::with_capacity(k);
        for i in 0..k {
            let r: DVector<f64> = a.row(i).transpose();
            let norm = r.norm();
            if norm <= 1e-300 {
                if b[i] < -FEAS_TOL {
                    return Err(GeometryError::Empty);
                }
                continue;
            }
            rows.push(r / norm);
            rhs.push(b[i] / norm);
        }

        // Opposing pairs with matching offsets are equalities.
        let mut is_eq = vec![false; rows.len()];
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                if (&rows[i] + &rows[j]).amax() < 1e-9 && (rhs[i] + rhs[j]).abs() <= FEAS_TOL {
                    is_eq[i] = true;
                    is_eq[j] = true;
                }
            }
        }
        let eq_rows: Vec<usize> = (0..rows.len()).filter(|&i| is_eq[i]).collect();
        let dim = keep.len();
        let projector = if eq_rows.is_empty() {
            DMatrix::identity(dim, dim)
        } else {
            let e = DMatrix::from_rows(
                &eq_rows
                    .iter()
                    .map(|&i| rows[i].transpose())
                    .collect::<Vec<_>>(),
            );
            let pinv = e
                .clone()
                .pseudo_inverse(1e-10)
                .map_err(|_| GeometryError::DegenerateBasis(f64::INFINITY))?;
            DMatrix::identity(dim, dim) - pinv * e
        };

        // Variables (y, r): maximize r.
        let mut lp_rows = Vec::with_capacity((rows.len() + 1) * (dim + 1));
        let mut lp_rhs = Vec::with_capacity(rows.len() + 1);
        for (i, row) in rows.iter().enumerate() {
            lp_rows.extend(row.iter());
            lp_rows.push(if is_eq[i] {
                0.0
            } else {
                (&projector * row).norm()
            });
            lp_rhs.push(rhs[i]);
        }
        lp_rows.extend(std::iter::repeat_n(0.0, dim));
        lp_rows.push(-1.0);
        lp_rhs.push(0.0);
        let cons = Constraints::new(dim + 1, &lp_rows, &lp_rhs)?;
        let mut obj = vec![0.0; dim + 1];
        obj[dim] = -1.0;
        let out = DenseSimplex.minimize(&cons, &obj)?;
        let sol = match out.status {
            LpStatus::Optimal => out.argument.unwrap_or_default(),
            LpStatus::Infeasible => return Err(GeometryError::Empty),
            LpStatus::Unbounded => return Err(GeometryError::Unbounded(0)),
        };

        let mut point = self.center.clone();
        for (slot, &dim_idx) in keep.iter().enumerate() {
            point[dim_idx] = sol[slot];
        }
        // Dropped coordinates are constant on the set: read them off any member.
        if !drop_dims.is_empty() {
            let alpha = &v_inv * (DVector::from_iterator(dim, sol[..dim].iter().copied()) - &c_red);
            let full = self.point_at(alpha.as_slice());
            for &d in drop_dims {
                point[d] = full[d];
            }
        }
        Ok(point)
    }

    /// Textual dump: one line per field, row-major, 17 significant digits.
    pub fn dump(&self) -> String {
        fn line(
            out: &mut String,
            name: &str,
            rows: usize,
            cols: usize,
            get: impl Fn(usize, usize) -> f64,
        ) {
            let _ = write!(out, "{name} {rows} {cols}");
            for r in 0..rows {
                for c in 0..cols {
                    let _ = write!(out, " {:.16e}", get(r, c));
                }
            }
            out.push('\n');
        }
        let mut out = String::new();
        line(
            &mut out,
            "basis",
            self.basis.nrows(),
            self.basis.ncols(),
            |r, c| self.basis[(r, c)],
        );
        line(&mut out, "center", self.center.len(), 1, |r, _| {
            self.center[r]
        });
        line(
            &mut out,
            "cons_mat",
            self.cons_mat.nrows(),
            self.cons_mat.ncols(),
            |r, c| self.cons_mat[(r, c)],
        );
        line(&mut out, "cons_rhs", self.cons_rhs.len(), 1, |r, _| {
            self.cons_rhs[r]
        });
        out
    }
}
