//! Planar two-aircraft kinematics. Both aircraft fly at constant speed; the
//! intruder goes straight and the ownship turns at a rate set by the active
//! advisory, which keeps each one-second step linear in the 8-d state.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Matrix8 = SMatrix<f64, 8, 8>;
pub type Vector8 = SVector<f64, 8>;

pub const X_OWN: usize = 0;
pub const Y_OWN: usize = 1;
pub const VX_OWN: usize = 2;
pub const VY_OWN: usize = 3;
pub const X_INT: usize = 4;
pub const Y_INT: usize = 5;
pub const VX_INT: usize = 6;
pub const VY_INT: usize = 7;

/// Below this turn rate (rad/s) the Taylor limits replace the closed form.
const SMALL_RATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Advisory {
    #[serde(rename = "COC")]
    Coc,
    #[serde(rename = "WL")]
    WeakLeft,
    #[serde(rename = "WR")]
    WeakRight,
    #[serde(rename = "SL")]
    StrongLeft,
    #[serde(rename = "SR")]
    StrongRight,
}

impl Advisory {
    /// Network output order.
    pub const ALL: [Advisory; 5] = [
        Advisory::Coc,
        Advisory::WeakLeft,
        Advisory::WeakRight,
        Advisory::StrongLeft,
        Advisory::StrongRight,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Advisory> {
        Self::ALL.get(i).copied()
    }

    /// Signed turn rate in deg/s; left (counter-clockwise) is positive.
    pub fn turn_rate_deg(self) -> f64 {
        match self {
            Advisory::Coc => 0.0,
            Advisory::WeakLeft => 1.5,
            Advisory::WeakRight => -1.5,
            Advisory::StrongLeft => 3.0,
            Advisory::StrongRight => -3.0,
        }
    }

    pub fn turn_rate(self) -> f64 {
        self.turn_rate_deg().to_radians()
    }

    pub fn label(self) -> &'static str {
        match self {
            Advisory::Coc => "COC",
            Advisory::WeakLeft => "WL",
            Advisory::WeakRight => "WR",
            Advisory::StrongLeft => "SL",
            Advisory::StrongRight => "SR",
        }
    }
}

impl fmt::Display for Advisory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown advisory '{0}' (expected one of COC, WL, WR, SL, SR)")]
pub struct ParseAdvisoryError(pub String);

impl FromStr for Advisory {
    type Err = ParseAdvisoryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "COC" => Ok(Advisory::Coc),
            "WL" => Ok(Advisory::WeakLeft),
            "WR" => Ok(Advisory::WeakRight),
            "SL" => Ok(Advisory::StrongLeft),
            "SR" => Ok(Advisory::StrongRight),
            _ => Err(ParseAdvisoryError(s.to_string())),
        }
    }
}

/// Cartesian state: positions in ft, velocities in ft/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub x_own: f64,
    pub y_own: f64,
    pub vx_own: f64,
    pub vy_own: f64,
    pub x_int: f64,
    pub y_int: f64,
    pub vx_int: f64,
    pub vy_int: f64,
}

impl PlantState {
    pub fn from_array(a: [f64; 8]) -> Self {
        PlantState {
            x_own: a[0],
            y_own: a[1],
            vx_own: a[2],
            vy_own: a[3],
            x_int: a[4],
            y_int: a[5],
            vx_int: a[6],
            vy_int: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.x_own,
            self.y_own,
            self.vx_own,
            self.vy_own,
            self.x_int,
            self.y_int,
            self.vx_int,
            self.vy_int,
        ]
    }

    pub fn from_vector(v: &Vector8) -> Self {
        let mut a = [0.0; 8];
        a.copy_from_slice(v.as_slice());
        Self::from_array(a)
    }

    pub fn to_vector(&self) -> Vector8 {
        Vector8::from_column_slice(&self.to_array())
    }

    pub fn own_speed(&self) -> f64 {
        self.vx_own.hypot(self.vy_own)
    }

    pub fn int_speed(&self) -> f64 {
        self.vx_int.hypot(self.vy_int)
    }

    /// Horizontal separation.
    pub fn rho(&self) -> f64 {
        (self.x_int - self.x_own).hypot(self.y_int - self.y_own)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Controller inputs: range (ft), bearing and relative heading (rad), speeds (ft/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkInput {
    pub rho: f64,
    pub theta: f64,
    pub psi: f64,
    pub v_own: f64,
    pub v_int: f64,
}

impl NetworkInput {
    pub fn to_array(&self) -> [f64; 5] {
        [self.rho, self.theta, self.psi, self.v_own, self.v_int]
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("ownship speed is zero; heading is undefined")]
    ZeroOwnSpeed,
    #[error("state contains a non-finite entry")]
    NonFinite,
}

/// Wrap an angle into (−π, π].
pub fn wrap_pi(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Wrap an angle into [0, 2π).
pub fn wrap_two_pi(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r >= 2.0 * PI {
        0.0
    } else {
        r
    }
}

/// sin(c t)/c and (1 − cos(c t))/c, with small-rate limits.
fn turn_integrals(c: f64, dt: f64) -> (f64, f64) {
    if c.abs() < SMALL_RATE {
        (dt - c * c * dt * dt * dt / 6.0, c * dt * dt / 2.0)
    } else {
        // 1 − cos(a) = 2 sin²(a/2) avoids cancellation for small angles.
        let a = c * dt;
        let h = (0.5 * a).sin();
        (a.sin() / c, 2.0 * h * h / c)
    }
}

/// Transition matrix of the continuous dynamics over `dt` seconds.
pub fn step_matrix(adv: Advisory, dt: f64) -> Matrix8 {
    let c = adv.turn_rate();
    let (s, k) = turn_integrals(c, dt);
    let (sin, cos) = (c * dt).sin_cos();
    let mut m = Matrix8::identity();

    m[(X_OWN, VX_OWN)] = s;
    m[(X_OWN, VY_OWN)] = -k;
    m[(Y_OWN, VX_OWN)] = k;
    m[(Y_OWN, VY_OWN)] = s;

    m[(VX_OWN, VX_OWN)] = cos;
    m[(VX_OWN, VY_OWN)] = -sin;
    m[(VY_OWN, VX_OWN)] = sin;
    m[(VY_OWN, VY_OWN)] = cos;

    m[(X_INT, VX_INT)] = dt;
    m[(Y_INT, VY_INT)] = dt;
    m
}

/// Inverse of the one-second step.
pub fn back_step_matrix(adv: Advisory) -> Matrix8 {
    step_matrix(adv, -1.0)
}

/// The generator of the continuous dynamics (`ẋ = A x`).
pub fn rate_matrix(adv: Advisory) -> Matrix8 {
    let c = adv.turn_rate();
    let mut a = Matrix8::zeros();
    a[(X_OWN, VX_OWN)] = 1.0;
    a[(Y_OWN, VY_OWN)] = 1.0;
    a[(VX_OWN, VY_OWN)] = -c;
    a[(VY_OWN, VX_OWN)] = c;
    a[(X_INT, VX_INT)] = 1.0;
    a[(Y_INT, VY_INT)] = 1.0;
    a
}

pub fn propagate(s: &PlantState, adv: Advisory, dt: f64) -> PlantState {
    PlantState::from_vector(&(step_matrix(adv, dt) * s.to_vector()))
}

pub fn state_to_network_inputs(s: &PlantState) -> Result<NetworkInput, DynamicsError> {
    if !s.is_finite() {
        return Err(DynamicsError::NonFinite);
    }
    let v_own = s.own_speed();
    if v_own == 0.0 {
        return Err(DynamicsError::ZeroOwnSpeed);
    }
    let heading_own = s.vy_own.atan2(s.vx_own);
    let heading_int = s.vy_int.atan2(s.vx_int);
    let dx = s.x_int - s.x_own;
    let dy = s.y_int - s.y_own;
    Ok(NetworkInput {
        rho: dx.hypot(dy),
        theta: wrap_pi(dy.atan2(dx) - heading_own),
        psi: wrap_pi(heading_int - heading_own),
        v_own,
        v_int: s.int_speed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_state() -> PlantState {
        PlantState::from_array([120.0, -340.0, 410.0, 230.0, 5000.0, 800.0, -600.0, 150.0])
    }

    #[test]
    fn coc_is_pure_translation() {
        let s = sample_state();
        let t = propagate(&s, Advisory::Coc, 1.0);
        assert_eq!(t.x_own, s.x_own + s.vx_own);
        assert_eq!(t.y_own, s.y_own + s.vy_own);
        assert_eq!(t.vx_own, s.vx_own);
        assert_eq!(t.vy_own, s.vy_own);
        assert_eq!(t.x_int, s.x_int + s.vx_int);
        assert_eq!(t.y_int, s.y_int + s.vy_int);
    }

    #[test]
    fn back_step_inverts_forward_step() {
        for adv in Advisory::ALL {
            let prod = back_step_matrix(adv) * step_matrix(adv, 1.0);
            assert!((prod - Matrix8::identity()).amax() < 1e-12, "{adv}");
        }
        let s = sample_state();
        let there = propagate(&s, Advisory::StrongLeft, 1.0);
        let back =
            PlantState::from_vector(&(back_step_matrix(Advisory::StrongLeft) * there.to_vector()));
        for (a, b) in back.to_array().iter().zip(s.to_array()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn turn_direction() {
        // Heading east, a left turn swings the velocity north.
        let s = PlantState::from_array([0.0, 0.0, 100.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(propagate(&s, Advisory::WeakLeft, 1.0).vy_own > 0.0);
        assert!(propagate(&s, Advisory::StrongRight, 1.0).vy_own < 0.0);
    }

    #[test]
    fn head_on_and_tail_chase_inputs() {
        let s = PlantState::from_array([0.0, 0.0, 500.0, 0.0, 1000.0, 0.0, -600.0, 0.0]);
        let i = state_to_network_inputs(&s).unwrap();
        assert_eq!(i.rho, 1000.0);
        assert_eq!(i.theta, 0.0);
        assert_eq!(i.psi, PI);

        let s = PlantState::from_array([0.0, 0.0, 500.0, 0.0, -1000.0, 0.0, 600.0, 0.0]);
        let i = state_to_network_inputs(&s).unwrap();
        assert_eq!(i.theta, PI);
        assert_eq!(i.psi, 0.0);
    }

    #[test]
    fn zero_speed_is_an_error() {
        let s = PlantState::from_array([0.0; 8]);
        assert_eq!(
            state_to_network_inputs(&s),
            Err(DynamicsError::ZeroOwnSpeed)
        );
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert_abs_diff_eq!(wrap_pi(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_eq!(wrap_two_pi(-0.0), 0.0);
        assert!(wrap_two_pi(-1e-18) < 2.0 * PI);
    }

    #[test]
    fn advisory_labels_round_trip() {
        for adv in Advisory::ALL {
            assert_eq!(adv.label().parse::<Advisory>().unwrap(), adv);
            assert_eq!(Advisory::from_index(adv.index()), Some(adv));
        }
        assert!("XX".parse::<Advisory>().is_err());
        assert_eq!(
            serde_json::to_string(&Advisory::WeakRight).unwrap(),
            "\"WR\""
        );
    }

    #[test]
    fn small_rate_branch_matches_closed_form() {
        let (s, k) = turn_integrals(1e-10, 1.0);
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k, 5e-11, epsilon = 1e-20);
        let (s, k) = turn_integrals(2e-9, 1.0);
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k, 1e-9, epsilon = 1e-12);
    }
}
