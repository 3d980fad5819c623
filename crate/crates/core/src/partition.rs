//! Cover of the unsafe set. The intruder sits at the origin flying east; the
//! ownship position cells cover the 500 ft disk around it, and each cell is
//! crossed with speed bands, a heading sector, the previous advisory and the
//! vertical-rate case.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{Advisory, VX_INT, VX_OWN, VY_OWN, X_INT, X_OWN, Y_OWN};
use crate::geometry::AhPolytope;
use crate::quant::QuantParams;

/// Horizontal separation below which two aircraft are in near collision, ft.
pub const NMAC_RADIUS: f64 = 500.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("heading sector [{lb}, {ub}] rad must have positive width of at most π/2")]
    SectorWidth { lb: f64, ub: f64 },
    #[error("speed band [{lo}, {hi}] is invalid")]
    SpeedBand { lo: f64, hi: f64 },
    #[error("malformed partition descriptor '{0}'")]
    Descriptor(String),
}

/// Half-spaces `n·v ≤ b` over `(vx, vy)` bounding every velocity whose heading
/// lies in `[theta_lb, theta_ub]` and whose speed lies in `[v_min, v_max]`.
///
/// The region is the pentagon through the four corners of the annular sector
/// plus the point where the tangents to the outer circle at the sector edges
/// meet. With `v_min = 0` the inner edge collapses and four rows remain.
pub fn velocity_polygon(
    theta_lb: f64,
    theta_ub: f64,
    v_min: f64,
    v_max: f64,
) -> Result<Vec<([f64; 2], f64)>, PartitionError> {
    let width = theta_ub - theta_lb;
    if !(width > 0.0 && width <= std::f64::consts::FRAC_PI_2 * (1.0 + 1e-12)) {
        return Err(PartitionError::SectorWidth {
            lb: theta_lb,
            ub: theta_ub,
        });
    }
    if !(v_min >= 0.0 && v_min <= v_max && v_max > 0.0 && v_max.is_finite()) {
        return Err(PartitionError::SpeedBand {
            lo: v_min,
            hi: v_max,
        });
    }
    let (slb, clb) = theta_lb.sin_cos();
    let (sub, cub) = theta_ub.sin_cos();
    let mid = 0.5 * (theta_lb + theta_ub);
    let (smid, cmid) = mid.sin_cos();
    let mut rows = vec![
        // Counter-clockwise of the lower edge ray.
        ([slb, -clb], 0.0),
        // Tangent at the outer lower corner.
        ([clb, slb], v_max),
        // Tangent at the outer upper corner.
        ([cub, sub], v_max),
        // Clockwise of the upper edge ray.
        ([-sub, cub], 0.0),
    ];
    if v_min > 0.0 {
        // Chord between the inner corners.
        rows.push(([-cmid, -smid], -v_min * (0.5 * width).cos()));
    }
    Ok(rows)
}

/// Grid cells whose closed square meets the open disk of `radius` about the origin.
pub fn disk_cover_cells(radius: f64, q_pos: f64) -> Vec<(i64, i64)> {
    let n = (radius / q_pos).ceil() as i64 + 1;
    let gap = |i: i64| {
        let lo = i as f64 * q_pos;
        let hi = lo + q_pos;
        if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            -hi
        } else {
            0.0
        }
    };
    let mut out = Vec::new();
    for ix in -n..n {
        for iy in -n..n {
            if gap(ix).hypot(gap(iy)) < radius {
                out.push((ix, iy));
            }
        }
    }
    out
}

/// Canonical identity of one partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartitionKey {
    pub ix: i64,
    pub iy: i64,
    pub vown: i64,
    pub vint: i64,
    pub theta: i64,
    pub prev: Advisory,
    pub tau_dot: i8,
}

impl PartitionKey {
    /// The key one refinement level up, after halving `which`.
    pub fn parent(&self, which: crate::quant::Quantum) -> PartitionKey {
        use crate::quant::Quantum::*;
        let mut k = *self;
        match which {
            Position => {
                k.ix = k.ix.div_euclid(2);
                k.iy = k.iy.div_euclid(2);
            }
            Velocity => {
                k.vown = k.vown.div_euclid(2);
                k.vint = k.vint.div_euclid(2);
            }
            Heading => k.theta = k.theta.div_euclid(2),
        }
        k
    }
}

impl fmt::Display for PartitionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pos({},{})|vown({})|vint({})|th({})|prev({})|taudot({})",
            self.ix, self.iy, self.vown, self.vint, self.theta, self.prev, self.tau_dot
        )
    }
}

impl FromStr for PartitionKey {
    type Err = PartitionError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PartitionError::Descriptor(s.to_string());
        let fields: Vec<&str> = s.trim().split('|').collect();
        if fields.len() != 6 {
            return Err(bad());
        }
        let inner = |f: &str, tag: &str| -> Result<String, PartitionError> {
            f.strip_prefix(tag)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .map(str::to_string)
                .ok_or_else(bad)
        };
        let int = |v: &str| v.trim().parse::<i64>().map_err(|_| bad());
        let pos = inner(fields[0], "pos")?;
        let (ix, iy) = pos.split_once(',').ok_or_else(bad)?;
        Ok(PartitionKey {
            ix: int(ix)?,
            iy: int(iy)?,
            vown: int(&inner(fields[1], "vown")?)?,
            vint: int(&inner(fields[2], "vint")?)?,
            theta: int(&inner(fields[3], "th")?)?,
            prev: inner(fields[4], "prev")?.parse().map_err(|_| bad())?,
            tau_dot: inner(fields[5], "taudot")?
                .trim()
                .parse()
                .map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct UnsafePartition {
    pub key: PartitionKey,
    pub region: AhPolytope,
}

impl UnsafePartition {
    pub fn alpha_prev(&self) -> Advisory {
        self.key.prev
    }

    pub fn tau_dot(&self) -> i8 {
        self.key.tau_dot
    }
}

/// Indices of the generator variables in partition regions: ownship position
/// and velocity, intruder x position and x velocity. The intruder's y position
/// and y velocity stay identically zero.
pub const GENERATORS: usize = 6;

/// 8×6 selection basis shared by every partition region.
pub fn region_basis() -> DMatrix<f64> {
    let mut v = DMatrix::zeros(8, GENERATORS);
    v[(X_OWN, 0)] = 1.0;
    v[(Y_OWN, 1)] = 1.0;
    v[(VX_OWN, 2)] = 1.0;
    v[(VY_OWN, 3)] = 1.0;
    v[(X_INT, 4)] = 1.0;
    v[(VX_INT, 5)] = 1.0;
    v
}

/// The lazily enumerated product of partition factors, in lexicographic order
/// (position cell, ownship speed, intruder speed, heading, advisory, vertical rate).
#[derive(Debug, Clone)]
pub struct PartitionSpace {
    pub params: QuantParams,
    pub cells: Vec<(i64, i64)>,
    pub vown: Vec<i64>,
    pub vint: Vec<i64>,
    pub tau_dots: Vec<i8>,
}

pub fn enumerate_unsafe_partitions(params: &QuantParams, tau_dots: &[i8]) -> PartitionSpace {
    PartitionSpace {
        params: *params,
        cells: disk_cover_cells(NMAC_RADIUS, params.q_pos),
        vown: params.vown_cells().collect(),
        vint: params.vint_cells().collect(),
        tau_dots: tau_dots.to_vec(),
    }
}

impl PartitionSpace {
    fn radices(&self) -> [usize; 6] {
        [
            self.cells.len(),
            self.vown.len(),
            self.vint.len(),
            self.params.theta_sectors as usize,
            5,
            self.tau_dots.len(),
        ]
    }

    pub fn len(&self) -> usize {
        self.radices().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn key(&self, index: usize) -> PartitionKey {
        let r = self.radices();
        let mut rest = index;
        let mut digit = [0usize; 6];
        for i in (0..6).rev() {
            digit[i] = rest % r[i];
            rest /= r[i];
        }
        let (ix, iy) = self.cells[digit[0]];
        PartitionKey {
            ix,
            iy,
            vown: self.vown[digit[1]],
            vint: self.vint[digit[2]],
            theta: digit[3] as i64,
            prev: Advisory::ALL[digit[4]],
            tau_dot: self.tau_dots[digit[5]],
        }
    }

    pub fn index_of(&self, key: &PartitionKey) -> Option<usize> {
        let digits = [
            self.cells.iter().position(|&c| c == (key.ix, key.iy))?,
            self.vown.iter().position(|&v| v == key.vown)?,
            self.vint.iter().position(|&v| v == key.vint)?,
            usize::try_from(key.theta)
                .ok()
                .filter(|&t| t < self.params.theta_sectors as usize)?,
            key.prev.index(),
            self.tau_dots.iter().position(|&t| t == key.tau_dot)?,
        ];
        let r = self.radices();
        Some(digits.iter().zip(r).fold(0, |acc, (d, r)| acc * r + d))
    }

    pub fn partition(&self, index: usize) -> UnsafePartition {
        let key = self.key(index);
        UnsafePartition {
            key,
            region: partition_region(&key, &self.params),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = UnsafePartition> + '_ {
        (0..self.len()).map(|i| self.partition(i))
    }
}

/// 8-d region of a partition key: ownship in its position cell with velocity
/// in the sector pentagon, intruder at the origin flying east.
pub fn partition_region(key: &PartitionKey, p: &QuantParams) -> AhPolytope {
    let mut rows: Vec<([f64; 8], f64)> = Vec::with_capacity(11);
    let mut push = |coefs: &[(usize, f64)], rhs: f64| {
        let mut r = [0.0; 8];
        for &(i, v) in coefs {
            r[i] = v;
        }
        rows.push((r, rhs));
    };
    let q = p.q_pos;
    push(&[(X_OWN, 1.0)], (key.ix + 1) as f64 * q);
    push(&[(X_OWN, -1.0)], -(key.ix as f64) * q);
    push(&[(Y_OWN, 1.0)], (key.iy + 1) as f64 * q);
    push(&[(Y_OWN, -1.0)], -(key.iy as f64) * q);
    push(&[(X_INT, 1.0)], 0.0);
    push(&[(X_INT, -1.0)], 0.0);
    let vi = p.vint_interval(key.vint);
    push(&[(VX_INT, 1.0)], vi.hi);
    push(&[(VX_INT, -1.0)], -vi.lo);
    let (lb, ub) = p.sector_bounds(key.theta);
    let vo = p.vown_interval(key.vown);
    for (n, b) in velocity_polygon(lb, ub, vo.lo, vo.hi).expect("validated parameters") {
        push(&[(VX_OWN, n[0]), (VY_OWN, n[1])], b);
    }
    let g = DMatrix::from_fn(rows.len(), 8, |r, c| rows[r].0[c]);
    let h = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.1));
    let basis = region_basis();
    let cons = &g * &basis;
    AhPolytope::new(basis, DVector::zeros(8), cons, h).expect("finite region")
}
