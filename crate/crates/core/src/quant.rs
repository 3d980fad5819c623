//! State quantization. Relative position, ownship heading and both speeds are
//! snapped to a uniform grid; the controller only ever sees cell centers.
//!
//! Everything here works in the canonical frame where the intruder flies due
//! east, so intruder heading is not part of a cell.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{
    wrap_pi, wrap_two_pi, NetworkInput, PlantState, VX_INT, VX_OWN, VY_INT, VY_OWN, X_INT, X_OWN,
    Y_INT, Y_OWN,
};
use crate::geometry::{AhPolytope, GeometryError, Interval};
use crate::partition::velocity_polygon;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("heading quantum {deg}° does not divide 360° into a whole number of sectors")]
    FractionalSectors { deg: f64 },
    #[error("heading sectors wider than 90° are not supported ({sectors} sectors)")]
    TooFewSectors { sectors: u32 },
    #[error("{name} range [{lo}, {hi}] is invalid")]
    BadRange {
        name: &'static str,
        lo: f64,
        hi: f64,
    },
}

/// Grid resolution plus the operating speed ranges the grid is clipped to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    /// Position quantum, ft.
    pub q_pos: f64,
    /// Speed quantum, ft/s.
    pub q_vel: f64,
    /// Number of heading sectors in a full turn.
    pub theta_sectors: u32,
    pub vown: Interval,
    pub vint: Interval,
}

impl Default for QuantParams {
    fn default() -> Self {
        QuantParams {
            q_pos: 500.0,
            q_vel: 100.0,
            theta_sectors: 240,
            vown: Interval {
                lo: 100.0,
                hi: 1200.0,
            },
            vint: Interval {
                lo: 0.0,
                hi: 1200.0,
            },
        }
    }
}

/// Which quantum to refine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantum {
    Position,
    Velocity,
    Heading,
}

impl QuantParams {
    pub fn new(
        q_pos: f64,
        q_vel: f64,
        q_theta_deg: f64,
        vown: (f64, f64),
        vint: (f64, f64),
    ) -> Result<Self, QuantError> {
        let sectors = sectors_for(q_theta_deg)?;
        let p = QuantParams {
            q_pos,
            q_vel,
            theta_sectors: sectors,
            vown: Interval {
                lo: vown.0,
                hi: vown.1,
            },
            vint: Interval {
                lo: vint.0,
                hi: vint.1,
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), QuantError> {
        for (name, value) in [("q_pos", self.q_pos), ("q_vel", self.q_vel)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(QuantError::NonPositive { name, value });
            }
        }
        if self.theta_sectors < 4 {
            return Err(QuantError::TooFewSectors {
                sectors: self.theta_sectors,
            });
        }
        for (name, r, min) in [
            ("ownship speed", self.vown, f64::MIN_POSITIVE),
            ("intruder speed", self.vint, 0.0),
        ] {
            if !(r.lo >= min && r.lo <= r.hi && r.hi.is_finite()) {
                return Err(QuantError::BadRange {
                    name,
                    lo: r.lo,
                    hi: r.hi,
                });
            }
        }
        Ok(())
    }

    /// Heading quantum, rad.
    pub fn q_theta(&self) -> f64 {
        2.0 * PI / self.theta_sectors as f64
    }

    pub fn q_theta_deg(&self) -> f64 {
        360.0 / self.theta_sectors as f64
    }

    pub fn vown_cells(&self) -> RangeInclusive<i64> {
        speed_cells(self.vown, self.q_vel)
    }

    pub fn vint_cells(&self) -> RangeInclusive<i64> {
        speed_cells(self.vint, self.q_vel)
    }

    /// Bounds of ownship speed cell `i`, clipped to the operating range.
    pub fn vown_interval(&self, i: i64) -> Interval {
        clipped_cell(self.vown, self.q_vel, i)
    }

    pub fn vint_interval(&self, i: i64) -> Interval {
        clipped_cell(self.vint, self.q_vel, i)
    }

    /// Heading bounds `[lb, ub]` of sector `k`, rad.
    pub fn sector_bounds(&self, k: i64) -> (f64, f64) {
        let q = self.q_theta();
        (k as f64 * q, (k + 1) as f64 * q)
    }

    pub fn halve(&self, which: Quantum) -> Self {
        let mut p = *self;
        match which {
            Quantum::Position => p.q_pos /= 2.0,
            Quantum::Velocity => p.q_vel /= 2.0,
            Quantum::Heading => p.theta_sectors *= 2,
        }
        p
    }
}

pub fn sectors_for(q_theta_deg: f64) -> Result<u32, QuantError> {
    if !(q_theta_deg > 0.0 && q_theta_deg.is_finite()) {
        return Err(QuantError::NonPositive {
            name: "q_theta",
            value: q_theta_deg,
        });
    }
    let n = 360.0 / q_theta_deg;
    let r = n.round();
    if (n - r).abs() > 1e-9 * n.max(1.0) || r < 1.0 || r > u32::MAX as f64 {
        return Err(QuantError::FractionalSectors { deg: q_theta_deg });
    }
    let sectors = r as u32;
    if sectors < 4 {
        return Err(QuantError::TooFewSectors { sectors });
    }
    Ok(sectors)
}

/// Grid-aligned cells covering `range`; a degenerate range has one cell.
pub fn speed_cells(range: Interval, q: f64) -> RangeInclusive<i64> {
    let first = (range.lo / q).floor() as i64;
    if range.hi <= range.lo {
        return first..=first;
    }
    let last = ((range.hi / q).ceil() as i64 - 1).max(first);
    first..=last
}

fn clipped_cell(range: Interval, q: f64, i: i64) -> Interval {
    let lo = (i as f64 * q).max(range.lo);
    let hi = ((i + 1) as f64 * q).min(range.hi);
    Interval { lo: lo.min(hi), hi }
}

fn speed_index(v: f64, range: Interval, q: f64) -> i64 {
    let cells = speed_cells(range, q);
    ((v / q).floor() as i64).clamp(*cells.start(), *cells.end())
}

/// A quantization cell: relative-position indices, ownship heading sector and
/// speed cells. Ordering is lexicographic over the fields in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuantizedState {
    pub dx: i64,
    pub dy: i64,
    pub theta_own: i64,
    pub v_own: i64,
    pub v_int: i64,
}

/// Rotates the whole picture about the origin so the intruder heads east.
pub fn canonicalize(s: &PlantState) -> PlantState {
    let heading = s.vy_int.atan2(s.vx_int);
    if heading == 0.0 {
        return *s;
    }
    let (sin, cos) = (-heading).sin_cos();
    let rot = |x: f64, y: f64| (cos * x - sin * y, sin * x + cos * y);
    let (x_own, y_own) = rot(s.x_own, s.y_own);
    let (vx_own, vy_own) = rot(s.vx_own, s.vy_own);
    let (x_int, y_int) = rot(s.x_int, s.y_int);
    PlantState {
        x_own,
        y_own,
        vx_own,
        vy_own,
        x_int,
        y_int,
        vx_int: s.int_speed(),
        vy_int: 0.0,
    }
}

pub fn quantize_state(s: &PlantState, p: &QuantParams) -> QuantizedState {
    let c = canonicalize(s);
    let sector = (wrap_two_pi(c.vy_own.atan2(c.vx_own)) / p.q_theta()).floor() as i64;
    QuantizedState {
        dx: ((c.x_int - c.x_own) / p.q_pos).floor() as i64,
        dy: ((c.y_int - c.y_own) / p.q_pos).floor() as i64,
        theta_own: sector.clamp(0, p.theta_sectors as i64 - 1),
        v_own: speed_index(c.own_speed(), p.vown, p.q_vel),
        v_int: speed_index(c.int_speed(), p.vint, p.q_vel),
    }
}

/// Controller inputs at the cell center.
pub fn dequantize_to_inputs(q: &QuantizedState, p: &QuantParams) -> NetworkInput {
    let dx = p.q_pos / 2.0 + q.dx as f64 * p.q_pos;
    let dy = p.q_pos / 2.0 + q.dy as f64 * p.q_pos;
    let heading = (q.theta_own as f64 + 0.5) * p.q_theta();
    let vo = p.vown_interval(q.v_own);
    let vi = p.vint_interval(q.v_int);
    NetworkInput {
        rho: dx.hypot(dy),
        theta: wrap_pi(dy.atan2(dx) - heading),
        psi: wrap_pi(-heading),
        v_own: 0.5 * (vo.lo + vo.hi),
        v_int: 0.5 * (vi.lo + vi.hi),
    }
}

/// Smallest separation over the cell's relative-position box.
pub fn rho_min(q: &QuantizedState, p: &QuantParams) -> f64 {
    let axis = |i: i64| {
        let lo = i as f64 * p.q_pos;
        let hi = lo + p.q_pos;
        if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        }
    };
    axis(q.dx).hypot(axis(q.dy))
}

/// Closed half-spaces `G s ≤ h` over the 8-d state describing the cell.
pub fn cell_halfspaces(q: &QuantizedState, p: &QuantParams) -> (DMatrix<f64>, DVector<f64>) {
    let mut rows: Vec<([f64; 8], f64)> = Vec::with_capacity(13);
    let mut push = |coefs: &[(usize, f64)], rhs: f64| {
        let mut r = [0.0; 8];
        for &(i, v) in coefs {
            r[i] = v;
        }
        rows.push((r, rhs));
    };
    let (x_lo, x_hi) = (q.dx as f64 * p.q_pos, (q.dx + 1) as f64 * p.q_pos);
    let (y_lo, y_hi) = (q.dy as f64 * p.q_pos, (q.dy + 1) as f64 * p.q_pos);
    push(&[(X_INT, 1.0), (X_OWN, -1.0)], x_hi);
    push(&[(X_INT, -1.0), (X_OWN, 1.0)], -x_lo);
    push(&[(Y_INT, 1.0), (Y_OWN, -1.0)], y_hi);
    push(&[(Y_INT, -1.0), (Y_OWN, 1.0)], -y_lo);
    push(&[(VY_INT, 1.0)], 0.0);
    push(&[(VY_INT, -1.0)], 0.0);
    let vi = p.vint_interval(q.v_int);
    push(&[(VX_INT, 1.0)], vi.hi);
    push(&[(VX_INT, -1.0)], -vi.lo);
    let (lb, ub) = p.sector_bounds(q.theta_own);
    let vo = p.vown_interval(q.v_own);
    let poly = velocity_polygon(lb, ub, vo.lo, vo.hi)
        .expect("validated parameters always give sectors of at most 90°");
    for (n, b) in poly {
        push(&[(VX_OWN, n[0]), (VY_OWN, n[1])], b);
    }
    let g = DMatrix::from_fn(rows.len(), 8, |r, c| rows[r].0[c]);
    let h = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    (g, h)
}

pub fn cell_polytope(q: &QuantizedState, p: &QuantParams) -> AhPolytope {
    let (g, h) = cell_halfspaces(q, p);
    AhPolytope::from_halfspaces(g, h).expect("cell constraints are finite")
}

fn index_span(iv: Interval, q: f64) -> RangeInclusive<i64> {
    let tol = |v: f64| 1e-9 * (1.0 + v.abs());
    let lo = ((iv.lo - tol(iv.lo)) / q).floor() as i64;
    let hi = ((iv.hi + tol(iv.hi)) / q).floor() as i64;
    lo..=hi
}

/// Heading sectors that can meet a velocity box not containing the origin.
fn sector_candidates(vx: Interval, vy: Interval, p: &QuantParams) -> Vec<i64> {
    let n = p.theta_sectors as i64;
    let all = || (0..n).collect::<Vec<_>>();
    if vx.lo <= 0.0 && vx.hi >= 0.0 && vy.lo <= 0.0 && vy.hi >= 0.0 {
        return all();
    }
    let reference = (0.5 * (vy.lo + vy.hi)).atan2(0.5 * (vx.lo + vx.hi));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in [vx.lo, vx.hi] {
        for y in [vy.lo, vy.hi] {
            let a = wrap_pi(y.atan2(x) - reference);
            lo = lo.min(a);
            hi = hi.max(a);
        }
    }
    let q = p.q_theta();
    let pad = 1e-9;
    let first = ((reference + lo - pad) / q).floor() as i64;
    let last = ((reference + hi + pad) / q).floor() as i64;
    if last - first + 1 >= n {
        return all();
    }
    let mut out: Vec<i64> = (first..=last).map(|k| k.rem_euclid(n)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Every cell whose closed region meets `set`, sorted.
pub fn possible_quantized_states(
    set: &AhPolytope,
    p: &QuantParams,
) -> Result<Vec<QuantizedState>, GeometryError> {
    let dir = |coefs: &[(usize, f64)]| {
        let mut d = DVector::zeros(8);
        for &(i, v) in coefs {
            d[i] = v;
        }
        d
    };
    let dirs = [
        dir(&[(X_INT, 1.0), (X_OWN, -1.0)]),
        dir(&[(Y_INT, 1.0), (Y_OWN, -1.0)]),
        dir(&[(VX_OWN, 1.0)]),
        dir(&[(VY_OWN, 1.0)]),
        dir(&[(VX_INT, 1.0)]),
    ];
    let bb = match set.support_box(&dirs) {
        Ok(b) => b,
        Err(GeometryError::Empty) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let (dx, dy, vx, vy, vi) = (bb[0], bb[1], bb[2], bb[3], bb[4]);

    let sectors = sector_candidates(vx, vy, p);

    let nearest = |iv: Interval| {
        if iv.lo > 0.0 {
            iv.lo
        } else if iv.hi < 0.0 {
            -iv.hi
        } else {
            0.0
        }
    };
    let speed_lo = nearest(vx).hypot(nearest(vy));
    let speed_hi = vx
        .lo
        .abs()
        .max(vx.hi.abs())
        .hypot(vy.lo.abs().max(vy.hi.abs()));
    let half = (0.5 * p.q_theta()).cos();
    let slack = 1e-9 * (1.0 + speed_hi);
    let own_cells: Vec<i64> = p
        .vown_cells()
        .filter(|&i| {
            let iv = p.vown_interval(i);
            iv.lo * half <= speed_hi + slack && iv.hi / half >= speed_lo - slack
        })
        .collect();
    let int_cells: Vec<i64> = p
        .vint_cells()
        .filter(|&j| {
            let iv = p.vint_interval(j);
            iv.lo <= vi.hi + slack && iv.hi >= vi.lo - slack
        })
        .collect();

    let mut out = Vec::new();
    for qx in index_span(dx, p.q_pos) {
        for qy in index_span(dy, p.q_pos) {
            for &k in &sectors {
                for &i in &own_cells {
                    for &j in &int_cells {
                        let q = QuantizedState {
                            dx: qx,
                            dy: qy,
                            theta_own: k,
                            v_own: i,
                            v_int: j,
                        };
                        let (g, h) = cell_halfspaces(&q, p);
                        if set.intersect_halfspaces_pruned(&g, &h)?.is_feasible()? {
                            out.push(q);
                        }
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fixed_state(dx: f64, dy: f64, heading: f64, v_own: f64, v_int: f64) -> PlantState {
        PlantState {
            x_own: 0.0,
            y_own: 0.0,
            vx_own: v_own * heading.cos(),
            vy_own: v_own * heading.sin(),
            x_int: dx,
            y_int: dy,
            vx_int: v_int,
            vy_int: 0.0,
        }
    }

    #[test]
    fn floor_semantics() {
        let p = QuantParams::default();
        let q = quantize_state(&fixed_state(250.0, 10.0, 0.1, 150.0, 50.0), &p);
        assert_eq!(q.dx, 0);
        let q = quantize_state(&fixed_state(-1.0, 10.0, 0.1, 150.0, 50.0), &p);
        assert_eq!(q.dx, -1);
        assert_eq!(q.v_own, 1);
        assert_eq!(q.v_int, 0);
    }

    #[test]
    fn parameters() {
        let p = QuantParams::default();
        assert_eq!(p.vown_cells().count(), 11);
        assert_eq!(p.vint_cells().count(), 12);
        assert_abs_diff_eq!(p.q_theta_deg(), 1.5, epsilon = 1e-12);
        assert!(QuantParams::new(500.0, 100.0, 7.0, (100.0, 1200.0), (0.0, 1200.0)).is_err());
        assert!(QuantParams::new(500.0, 100.0, 360.0, (100.0, 1200.0), (0.0, 1200.0)).is_err());
        assert!(QuantParams::new(-1.0, 100.0, 1.5, (100.0, 1200.0), (0.0, 1200.0)).is_err());
        assert!(QuantParams::new(500.0, 100.0, 1.5, (0.0, 1200.0), (0.0, 1200.0)).is_err());

        let fixed = QuantParams::new(250.0, 100.0, 1.5, (200.0, 200.0), (185.0, 185.0)).unwrap();
        assert_eq!(fixed.vown_cells(), 2..=2);
        assert_eq!(fixed.vint_cells(), 1..=1);
        let q = quantize_state(&fixed_state(1000.0, 0.0, 0.3, 200.0, 185.0), &fixed);
        let inp = dequantize_to_inputs(&q, &fixed);
        assert_eq!(inp.v_own, 200.0);
        assert_eq!(inp.v_int, 185.0);
    }

    #[test]
    fn dequantization() {
        let p = QuantParams::default();
        let origin = QuantizedState {
            dx: 0,
            dy: 0,
            theta_own: 0,
            v_own: 1,
            v_int: 0,
        };
        let inp = dequantize_to_inputs(&origin, &p);
        assert_abs_diff_eq!(inp.rho, 500.0 * 2f64.sqrt() / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(inp.psi, -0.75f64.to_radians(), epsilon = 1e-12);
        assert_eq!(inp.v_own, 150.0);
        let mirrored = QuantizedState {
            dx: -1,
            dy: -1,
            ..origin
        };
        assert_eq!(dequantize_to_inputs(&mirrored, &p).rho, inp.rho);
    }

    #[test]
    fn rho_min_examples() {
        let p = QuantParams::default();
        let q = |dx, dy| QuantizedState {
            dx,
            dy,
            theta_own: 0,
            v_own: 1,
            v_int: 0,
        };
        assert_eq!(rho_min(&q(0, 0), &p), 0.0);
        assert_eq!(rho_min(&q(-1, 0), &p), 0.0);
        assert_eq!(rho_min(&q(121, 0), &p), 60500.0);
        // Brute force over corners and axis projections.
        let cell = q(-122, -122);
        let (lo, hi) = (-122.0 * 500.0, -121.0 * 500.0);
        let mut best = f64::INFINITY;
        for x in [lo, hi, 0.0f64.clamp(lo, hi)] {
            for y in [lo, hi, 0.0f64.clamp(lo, hi)] {
                best = best.min(x.hypot(y));
            }
        }
        assert_abs_diff_eq!(rho_min(&cell, &p), best, epsilon = 1e-9);
        assert_abs_diff_eq!(best, 60500.0 * 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn canonical_frame() {
        let s = PlantState {
            x_own: 100.0,
            y_own: -50.0,
            vx_own: 120.0,
            vy_own: 80.0,
            x_int: 4000.0,
            y_int: 2500.0,
            vx_int: 0.0,
            vy_int: -700.0,
        };
        let c = canonicalize(&s);
        assert_abs_diff_eq!(c.vx_int, 700.0, epsilon = 1e-9);
        assert_eq!(c.vy_int, 0.0);
        assert_abs_diff_eq!(c.rho(), s.rho(), epsilon = 1e-9);
        let a = crate::dynamics::state_to_network_inputs(&s).unwrap();
        let b = crate::dynamics::state_to_network_inputs(&c).unwrap();
        assert_abs_diff_eq!(a.theta, b.theta, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_pi(a.psi - b.psi), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cell_box_round_trip() {
        let p = QuantParams::default();
        let q = QuantizedState {
            dx: 3,
            dy: -2,
            theta_own: 17,
            v_own: 4,
            v_int: 7,
        };
        let bb = cell_polytope(&q, &p);
        let dirs: Vec<DVector<f64>> = vec![
            DVector::from_row_slice(&[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
            DVector::from_row_slice(&[0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        ];
        // Absolute positions are free; only differences are bounded.
        assert!(bb.bounding_box().is_err());
        let b = bb.support_box(&dirs).unwrap();
        assert_abs_diff_eq!(b[0].lo, 1500.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[0].hi, 2000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[1].lo, -1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[1].hi, -500.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[2].lo, 700.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[2].hi, 800.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[3].lo, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(b[3].hi, 0.0, epsilon = 1e-9);
    }

    fn pinned(cell: &QuantizedState, p: &QuantParams, shrink: f64) -> AhPolytope {
        // The cell with the intruder pinned at the origin, shrunk in position.
        let (g, h) = cell_halfspaces(cell, p);
        let mut pin = DMatrix::zeros(4, 8);
        pin[(0, X_INT)] = 1.0;
        pin[(1, X_INT)] = -1.0;
        pin[(2, Y_INT)] = 1.0;
        pin[(3, Y_INT)] = -1.0;
        let lo = cell.dx as f64 * p.q_pos + shrink;
        let hi = (cell.dx + 1) as f64 * p.q_pos - shrink;
        let mut extra = DMatrix::zeros(2, 8);
        extra[(0, X_OWN)] = -1.0;
        extra[(1, X_OWN)] = 1.0;
        let base = AhPolytope::from_halfspaces(g, h).unwrap();
        base.intersect_halfspaces(&pin, &DVector::zeros(4))
            .unwrap()
            .intersect_halfspaces(&extra, &DVector::from_row_slice(&[hi, -lo]))
            .unwrap()
    }

    #[test]
    fn possible_states_of_a_cell_interior() {
        let p = QuantParams {
            theta_sectors: 36,
            ..QuantParams::default()
        };
        let cell = QuantizedState {
            dx: 2,
            dy: 1,
            theta_own: 5,
            v_own: 3,
            v_int: 6,
        };
        // Shrink everything slightly so neighbouring closed cells do not touch.
        let set = pinned(&cell, &p, 1.0);
        let mut shrink = DMatrix::zeros(2, 8);
        shrink[(0, Y_OWN)] = -1.0;
        shrink[(1, Y_OWN)] = 1.0;
        let y_lo = cell.dy as f64 * 500.0 + 1.0;
        let y_hi = (cell.dy + 1) as f64 * 500.0 - 1.0;
        let mut set = set
            .intersect_halfspaces(&shrink, &DVector::from_row_slice(&[y_hi, -y_lo]))
            .unwrap();
        // Keep the velocity strictly inside the sector and speed band.
        let (lb, ub) = p.sector_bounds(5);
        let inner = velocity_polygon(lb + 0.01, ub - 0.01, 320.0, 380.0).unwrap();
        for (n, b) in inner {
            let mut row = DMatrix::zeros(1, 8);
            row[(0, VX_OWN)] = n[0];
            row[(0, VY_OWN)] = n[1];
            set = set
                .intersect_halfspaces(&row, &DVector::from_row_slice(&[b]))
                .unwrap();
        }
        let mut vi = DMatrix::zeros(2, 8);
        vi[(0, VX_INT)] = 1.0;
        vi[(1, VX_INT)] = -1.0;
        set = set
            .intersect_halfspaces(&vi, &DVector::from_row_slice(&[640.0, -610.0]))
            .unwrap();
        assert_eq!(possible_quantized_states(&set, &p).unwrap(), vec![cell]);
    }

    #[test]
    fn possible_states_empty_for_infeasible_set() {
        let p = QuantParams::default();
        let cell = QuantizedState {
            dx: 2,
            dy: 1,
            theta_own: 5,
            v_own: 3,
            v_int: 6,
        };
        let set = pinned(&cell, &p, 0.0);
        let mut row = DMatrix::zeros(1, 8);
        row[(0, VX_INT)] = 1.0;
        let empty = set
            .intersect_halfspaces(&row, &DVector::from_row_slice(&[-5.0]))
            .unwrap();
        assert!(possible_quantized_states(&empty, &p).unwrap().is_empty());
    }

    #[test]
    fn sector_candidates_wrap_around_zero() {
        let p = QuantParams::default();
        let got = sector_candidates(Interval::new(500.0, 600.0), Interval::new(-1.0, 1.0), &p);
        assert_eq!(got, vec![0, 239]);
        let all = sector_candidates(Interval::new(-1.0, 1.0), Interval::new(-1.0, 1.0), &p);
        assert_eq!(all.len(), 240);
    }
}
