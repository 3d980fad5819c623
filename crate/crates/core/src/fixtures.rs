//! Recorded closed-loop traces of the original controller, used as replay
//! fixtures. Angles are in degrees, ranges in feet.

use crate::dynamics::Advisory::{self, *};
use crate::sim::EncounterSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureRow {
    pub step: usize,
    pub prev: Advisory,
    pub cmd: Advisory,
    pub rho: f64,
    pub theta_deg: f64,
    pub psi_deg: f64,
    /// (τ, previous-advisory index, τ index) when recorded.
    pub network: Option<(f64, usize, usize)>,
}

const fn row(
    step: usize,
    prev: Advisory,
    cmd: Advisory,
    rho: f64,
    theta_deg: f64,
    psi_deg: f64,
    network: Option<(f64, usize, usize)>,
) -> FixtureRow {
    FixtureRow {
        step,
        prev,
        cmd,
        rho,
        theta_deg,
        psi_deg,
        network,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    pub spec: EncounterSpec,
    pub rows: &'static [FixtureRow],
}

pub const SCENARIO_NAMES: [&str; 3] = ["immediate-turn", "turn-into-intruder", "fast-ownship"];

pub fn scenarios() -> [Scenario; 3] {
    [
        Scenario {
            name: "immediate-turn",
            summary: "weak right from the third step, held until collision",
            spec: EncounterSpec {
                rho: 62001.19897399513,
                theta: 1.105638365566048,
                psi: -1.9313853026445638,
                v_own: 140.4154485909307,
                v_int: 1113.19526,
                tau0: 0.0,
                tau_dot: 0,
                max_steps: 200,
            },
            rows: &IMMEDIATE_TURN,
        },
        Scenario {
            name: "turn-into-intruder",
            summary: "late weak right that swings the nose into the intruder",
            spec: EncounterSpec {
                rho: 61462.16874158125,
                theta: 2.8797448888478536,
                psi: -0.2973898012094359,
                v_own: 114.27575493691512,
                v_int: 1100.31313,
                tau0: 0.0,
                tau_dot: 0,
                max_steps: 200,
            },
            rows: &TURN_INTO_INTRUDER,
        },
        Scenario {
            name: "fast-ownship",
            summary: "fast ownship, vertical separation closing from 75 s",
            spec: EncounterSpec {
                rho: 61019.45806978694,
                theta: 0.8007909138337812,
                psi: -1.5953555128455696,
                v_own: 964.0586611224201,
                v_int: 1198.4375,
                tau0: 75.0,
                tau_dot: -1,
                max_steps: 200,
            },
            rows: &FAST_OWNSHIP,
        },
    ]
}

pub fn scenario(name: &str) -> Option<Scenario> {
    scenarios().into_iter().find(|s| s.name == name)
}

#[rustfmt::skip]
static IMMEDIATE_TURN: [FixtureRow; 59] = [
    row(1, Coc, Coc, 62001.2, 63.35, -110.66, None),
    row(2, Coc, Coc, 60831.1, 63.36, -110.66, None),
    row(3, Coc, WeakRight, 59661.0, 63.37, -110.66, None),
    row(4, WeakRight, WeakRight, 58492.6, 64.88, -109.16, None),
    row(5, WeakRight, WeakRight, 57327.4, 66.39, -107.66, None),
    row(6, WeakRight, WeakRight, 56165.7, 67.90, -106.16, None),
    row(7, WeakRight, WeakRight, 55007.4, 69.42, -104.66, None),
    row(8, WeakRight, WeakRight, 53852.5, 70.94, -103.16, None),
    row(9, WeakRight, WeakRight, 52701.1, 72.46, -101.66, None),
    row(10, WeakRight, WeakRight, 51553.2, 73.98, -100.16, None),
    row(11, WeakRight, WeakRight, 50408.8, 75.51, -98.66, None),
    row(12, WeakRight, WeakRight, 49268.0, 77.03, -97.16, None),
    row(13, WeakRight, WeakRight, 48130.8, 78.56, -95.66, None),
    row(14, WeakRight, WeakRight, 46997.3, 80.09, -94.16, None),
    row(15, WeakRight, WeakRight, 45867.3, 81.63, -92.66, None),
    row(16, WeakRight, WeakRight, 44741.0, 83.16, -91.16, None),
    row(17, WeakRight, WeakRight, 43618.4, 84.70, -89.66, None),
    row(18, WeakRight, WeakRight, 42499.5, 86.24, -88.16, None),
    row(19, WeakRight, WeakRight, 41384.3, 87.79, -86.66, None),
    row(20, WeakRight, WeakRight, 40272.7, 89.33, -85.16, None),
    row(21, WeakRight, WeakRight, 39164.9, 90.88, -83.66, None),
    row(22, WeakRight, WeakRight, 38060.7, 92.44, -82.16, None),
    row(23, WeakRight, WeakRight, 36960.3, 93.99, -80.66, None),
    row(24, WeakRight, WeakRight, 35863.6, 95.55, -79.16, None),
    row(25, WeakRight, WeakRight, 34770.6, 97.11, -77.66, None),
    row(26, WeakRight, WeakRight, 33681.2, 98.67, -76.16, None),
    row(27, WeakRight, WeakRight, 32595.6, 100.24, -74.66, None),
    row(28, WeakRight, WeakRight, 31513.6, 101.81, -73.16, None),
    row(29, WeakRight, WeakRight, 30435.2, 103.38, -71.66, None),
    row(30, WeakRight, WeakRight, 29360.5, 104.96, -70.16, None),
    row(31, WeakRight, WeakRight, 28289.4, 106.54, -68.66, None),
    row(32, WeakRight, WeakRight, 27221.9, 108.13, -67.16, None),
    row(33, WeakRight, WeakRight, 26157.9, 109.72, -65.66, None),
    row(34, WeakRight, WeakRight, 25097.5, 111.32, -64.16, None),
    row(35, WeakRight, WeakRight, 24040.5, 112.92, -62.66, None),
    row(36, WeakRight, WeakRight, 22987.0, 114.53, -61.16, None),
    row(37, WeakRight, WeakRight, 21937.0, 116.14, -59.66, None),
    row(38, WeakRight, WeakRight, 20890.3, 117.76, -58.16, None),
    row(39, WeakRight, StrongRight, 19847.0, 119.39, -56.66, None),
    row(40, StrongRight, WeakRight, 18808.6, 122.52, -53.66, None),
    row(41, WeakRight, StrongRight, 17775.0, 124.16, -52.16, None),
    row(42, StrongRight, WeakRight, 16746.0, 127.30, -49.16, None),
    row(43, WeakRight, WeakRight, 15721.5, 128.96, -47.66, None),
    row(44, WeakRight, WeakRight, 14700.0, 130.62, -46.16, None),
    row(45, WeakRight, WeakRight, 13681.4, 132.30, -44.66, None),
    row(46, WeakRight, WeakRight, 12665.7, 134.00, -43.16, None),
    row(47, WeakRight, WeakRight, 11652.8, 135.72, -41.66, None),
    row(48, WeakRight, WeakRight, 10642.7, 137.46, -40.16, None),
    row(49, WeakRight, StrongRight, 9635.3, 139.25, -38.66, None),
    row(50, StrongRight, StrongRight, 8631.7, 142.57, -35.66, None),
    row(51, StrongRight, StrongRight, 7632.8, 145.92, -32.66, None),
    row(52, StrongRight, StrongRight, 6638.5, 149.34, -29.66, None),
    row(53, StrongRight, StrongRight, 5648.3, 152.84, -26.66, None),
    row(54, StrongRight, StrongRight, 4661.9, 156.46, -23.66, None),
    row(55, StrongRight, StrongRight, 3679.3, 160.32, -20.66, None),
    row(56, StrongRight, StrongRight, 2700.4, 164.66, -17.66, None),
    row(57, StrongRight, StrongRight, 1726.2, 170.27, -14.66, None),
    row(58, StrongRight, StrongRight, 764.9, -178.03, -11.66, None),
    row(59, StrongRight, StrongRight, 309.3, -50.16, -8.66, None),
];

#[rustfmt::skip]
static TURN_INTO_INTRUDER: [FixtureRow; 62] = [
    row(1, Coc, Coc, 61462.2, 165.00, -17.04, None),
    row(2, Coc, Coc, 60473.0, 165.06, -17.04, None),
    row(3, Coc, Coc, 59483.9, 165.13, -17.04, None),
    row(4, Coc, Coc, 58494.8, 165.20, -17.04, None),
    row(5, Coc, Coc, 57505.9, 165.27, -17.04, None),
    row(6, Coc, Coc, 56517.0, 165.35, -17.04, None),
    row(7, Coc, Coc, 55528.3, 165.42, -17.04, None),
    row(8, Coc, WeakRight, 54539.6, 165.50, -17.04, None),
    row(9, WeakRight, WeakRight, 53551.4, 167.08, -15.54, None),
    row(10, WeakRight, WeakRight, 52564.0, 168.66, -14.04, None),
    row(11, WeakRight, WeakRight, 51577.3, 170.25, -12.54, None),
    row(12, WeakRight, WeakRight, 50591.2, 171.83, -11.04, None),
    row(13, WeakRight, WeakRight, 49605.7, 173.41, -9.54, None),
    row(14, WeakRight, WeakRight, 48620.5, 174.99, -8.04, None),
    row(15, WeakRight, WeakRight, 47635.8, 176.57, -6.54, None),
    row(16, WeakRight, WeakRight, 46651.3, 178.15, -5.04, None),
    row(17, WeakRight, WeakRight, 45666.9, 179.73, -3.54, None),
    row(18, WeakRight, WeakRight, 44682.7, -178.69, -2.04, None),
    row(19, WeakRight, WeakRight, 43698.5, -177.12, -0.54, None),
    row(20, WeakRight, WeakRight, 42714.3, -175.54, 0.96, None),
    row(21, WeakRight, WeakRight, 41729.8, -173.96, 2.46, None),
    row(22, WeakRight, WeakRight, 40745.2, -172.38, 3.96, None),
    row(23, WeakRight, WeakRight, 39760.2, -170.80, 5.46, None),
    row(24, WeakRight, WeakRight, 38774.8, -169.23, 6.96, None),
    row(25, WeakRight, WeakRight, 37788.9, -167.65, 8.46, None),
    row(26, WeakRight, WeakRight, 36802.5, -166.08, 9.96, None),
    row(27, WeakRight, WeakRight, 35815.4, -164.50, 11.46, None),
    row(28, WeakRight, WeakRight, 34827.5, -162.92, 12.96, None),
    row(29, WeakRight, WeakRight, 33838.9, -161.35, 14.46, None),
    row(30, WeakRight, WeakRight, 32849.3, -159.78, 15.96, None),
    row(31, WeakRight, WeakRight, 31858.8, -158.20, 17.46, None),
    row(32, WeakRight, WeakRight, 30867.2, -156.63, 18.96, None),
    row(33, WeakRight, WeakRight, 29874.4, -155.06, 20.46, None),
    row(34, WeakRight, WeakRight, 28880.5, -153.48, 21.96, None),
    row(35, WeakRight, WeakRight, 27885.2, -151.91, 23.46, None),
    row(36, WeakRight, WeakRight, 26888.6, -150.34, 24.96, None),
    row(37, WeakRight, WeakRight, 25890.6, -148.77, 26.46, None),
    row(38, WeakRight, WeakRight, 24891.0, -147.20, 27.96, None),
    row(39, WeakRight, WeakRight, 23889.9, -145.63, 29.46, None),
    row(40, WeakRight, WeakRight, 22887.1, -144.06, 30.96, None),
    row(41, WeakRight, WeakRight, 21882.6, -142.48, 32.46, None),
    row(42, WeakRight, WeakRight, 20876.3, -140.91, 33.96, None),
    row(43, WeakRight, WeakRight, 19868.2, -139.34, 35.46, None),
    row(44, WeakRight, WeakRight, 18858.1, -137.77, 36.96, None),
    row(45, WeakRight, WeakRight, 17846.0, -136.19, 38.46, None),
    row(46, WeakRight, WeakRight, 16832.0, -134.62, 39.96, None),
    row(47, WeakRight, WeakRight, 15815.8, -133.04, 41.46, None),
    row(48, WeakRight, WeakRight, 14797.4, -131.46, 42.96, None),
    row(49, WeakRight, WeakRight, 13776.9, -129.87, 44.46, None),
    row(50, WeakRight, WeakRight, 12754.1, -128.28, 45.96, None),
    row(51, WeakRight, WeakRight, 11728.9, -126.69, 47.46, None),
    row(52, WeakRight, WeakRight, 10701.4, -125.08, 48.96, None),
    row(53, WeakRight, WeakRight, 9671.5, -123.46, 50.46, None),
    row(54, WeakRight, WeakRight, 8639.2, -121.83, 51.96, None),
    row(55, WeakRight, StrongRight, 7604.4, -120.17, 53.46, None),
    row(56, StrongRight, StrongRight, 6565.7, -116.98, 56.46, None),
    row(57, StrongRight, StrongRight, 5521.8, -113.74, 59.46, None),
    row(58, StrongRight, StrongRight, 4472.5, -110.43, 62.46, None),
    row(59, StrongRight, WeakRight, 3417.8, -106.96, 65.46, None),
    row(60, WeakRight, WeakRight, 2359.3, -104.60, 66.96, None),
    row(61, WeakRight, StrongRight, 1299.3, -100.87, 68.46, None),
    row(62, StrongRight, StrongRight, 253.5, -76.83, 71.46, None),
];

#[rustfmt::skip]
static FAST_OWNSHIP: [FixtureRow; 76] = [
    row(1, Coc, Coc, 61019.5, 45.88, -91.41, Some((75.0, 1, 8))),
    row(2, Coc, Coc, 59467.9, 45.77, -91.41, Some((74.0, 1, 8))),
    row(3, Coc, Coc, 57916.5, 45.64, -91.41, Some((73.0, 1, 8))),
    row(4, Coc, Coc, 56365.5, 45.51, -91.41, Some((72.0, 1, 8))),
    row(5, Coc, Coc, 54814.7, 45.38, -91.41, Some((71.0, 1, 8))),
    row(6, Coc, WeakRight, 53264.3, 45.23, -91.41, Some((70.0, 1, 7))),
    row(7, WeakRight, WeakRight, 51723.3, 46.59, -89.91, Some((69.0, 3, 7))),
    row(8, WeakRight, WeakRight, 50200.9, 47.96, -88.41, Some((68.0, 3, 7))),
    row(9, WeakRight, WeakRight, 48697.4, 49.34, -86.91, Some((67.0, 3, 7))),
    row(10, WeakRight, WeakRight, 47213.4, 50.73, -85.41, Some((66.0, 3, 7))),
    row(11, WeakRight, WeakRight, 45749.0, 52.13, -83.91, Some((65.0, 3, 7))),
    row(12, WeakRight, WeakRight, 44304.6, 53.55, -82.41, Some((64.0, 3, 7))),
    row(13, WeakRight, WeakRight, 42880.6, 54.98, -80.91, Some((63.0, 3, 7))),
    row(14, WeakRight, WeakRight, 41477.4, 56.43, -79.41, Some((62.0, 3, 7))),
    row(15, WeakRight, WeakRight, 40095.1, 57.90, -77.91, Some((61.0, 3, 7))),
    row(16, WeakRight, WeakRight, 38734.3, 59.38, -76.41, Some((60.0, 3, 7))),
    row(17, WeakRight, WeakRight, 37395.2, 60.88, -74.91, Some((59.0, 3, 7))),
    row(18, WeakRight, WeakRight, 36078.2, 62.40, -73.41, Some((58.0, 3, 7))),
    row(19, WeakRight, WeakRight, 34783.5, 63.94, -71.91, Some((57.0, 3, 7))),
    row(20, WeakRight, WeakRight, 33511.5, 65.50, -70.41, Some((56.0, 3, 7))),
    row(21, WeakRight, WeakRight, 32262.5, 67.09, -68.91, Some((55.0, 3, 6))),
    row(22, WeakRight, WeakRight, 31036.9, 68.70, -67.41, Some((54.0, 3, 6))),
    row(23, WeakRight, WeakRight, 29835.0, 70.34, -65.91, Some((53.0, 3, 6))),
    row(24, WeakRight, WeakRight, 28657.0, 72.00, -64.41, Some((52.0, 3, 6))),
    row(25, WeakRight, WeakRight, 27503.3, 73.70, -62.91, Some((51.0, 3, 6))),
    row(26, WeakRight, WeakRight, 26374.2, 75.43, -61.41, Some((50.0, 3, 6))),
    row(27, WeakRight, WeakRight, 25270.0, 77.19, -59.91, Some((49.0, 3, 6))),
    row(28, WeakRight, WeakRight, 24191.1, 78.99, -58.41, Some((48.0, 3, 6))),
    row(29, WeakRight, WeakRight, 23137.7, 80.83, -56.91, Some((47.0, 3, 6))),
    row(30, WeakRight, WeakRight, 22110.1, 82.71, -55.41, Some((46.0, 3, 6))),
    row(31, WeakRight, WeakRight, 21108.6, 84.64, -53.91, Some((45.0, 3, 6))),
    row(32, WeakRight, WeakRight, 20133.6, 86.62, -52.41, Some((44.0, 3, 6))),
    row(33, WeakRight, WeakRight, 19185.4, 88.65, -50.91, Some((43.0, 3, 6))),
    row(34, WeakRight, WeakRight, 18264.1, 90.73, -49.41, Some((42.0, 3, 6))),
    row(35, WeakRight, WeakRight, 17370.3, 92.88, -47.91, Some((41.0, 3, 6))),
    row(36, WeakRight, WeakRight, 16504.0, 95.09, -46.41, Some((40.0, 3, 6))),
    row(37, WeakRight, WeakRight, 15665.7, 97.37, -44.91, Some((39.0, 3, 6))),
    row(38, WeakRight, WeakRight, 14855.5, 99.72, -43.41, Some((38.0, 3, 6))),
    row(39, WeakRight, WeakRight, 14073.9, 102.15, -41.91, Some((37.0, 3, 6))),
    row(40, WeakRight, WeakRight, 13320.9, 104.67, -40.41, Some((36.0, 3, 6))),
    row(41, WeakRight, WeakRight, 12597.0, 107.27, -38.91, Some((35.0, 3, 5))),
    row(42, WeakRight, WeakRight, 11902.2, 109.98, -37.41, Some((34.0, 3, 5))),
    row(43, WeakRight, WeakRight, 11236.9, 112.78, -35.91, Some((33.0, 3, 5))),
    row(44, WeakRight, WeakRight, 10601.1, 115.69, -34.41, Some((32.0, 3, 5))),
    row(45, WeakRight, WeakRight, 9995.0, 118.72, -32.91, Some((31.0, 3, 5))),
    row(46, WeakRight, WeakRight, 9418.6, 121.86, -31.41, Some((30.0, 3, 5))),
    row(47, WeakRight, WeakRight, 8872.0, 125.12, -29.91, Some((29.0, 3, 5))),
    row(48, WeakRight, WeakRight, 8355.0, 128.51, -28.41, Some((28.0, 3, 5))),
    row(49, WeakRight, WeakRight, 7867.4, 132.02, -26.91, Some((27.0, 3, 5))),
    row(50, WeakRight, WeakRight, 7409.0, 135.66, -25.41, Some((26.0, 3, 5))),
    row(51, WeakRight, WeakRight, 6979.1, 139.43, -23.91, Some((25.0, 3, 5))),
    row(52, WeakRight, WeakRight, 6577.1, 143.31, -22.41, Some((24.0, 3, 5))),
    row(53, WeakRight, WeakRight, 6202.1, 147.31, -20.91, Some((23.0, 3, 5))),
    row(54, WeakRight, WeakRight, 5853.0, 151.41, -19.41, Some((22.0, 3, 5))),
    row(55, WeakRight, WeakRight, 5528.4, 155.59, -17.91, Some((21.0, 3, 5))),
    row(56, WeakRight, WeakRight, 5226.7, 159.85, -16.41, Some((20.0, 3, 5))),
    row(57, WeakRight, WeakRight, 4946.0, 164.15, -14.91, Some((19.0, 3, 5))),
    row(58, WeakRight, WeakRight, 4684.2, 168.48, -13.41, Some((18.0, 3, 5))),
    row(59, WeakRight, WeakRight, 4438.9, 172.82, -11.91, Some((17.0, 3, 5))),
    row(60, WeakRight, WeakRight, 4207.6, 177.13, -10.41, Some((16.0, 3, 5))),
    row(61, WeakRight, WeakRight, 3987.6, -178.59, -8.91, Some((15.0, 3, 4))),
    row(62, WeakRight, WeakRight, 3776.1, -174.39, -7.41, Some((14.0, 3, 4))),
    row(63, WeakRight, WeakRight, 3570.3, -170.27, -5.91, Some((13.0, 3, 4))),
    row(64, WeakRight, WeakRight, 3367.4, -166.25, -4.41, Some((12.0, 3, 4))),
    row(65, WeakRight, WeakRight, 3164.7, -162.36, -2.91, Some((11.0, 3, 4))),
    row(66, WeakRight, WeakRight, 2959.6, -158.61, -1.41, Some((10.0, 3, 4))),
    row(67, WeakRight, WeakRight, 2749.6, -155.00, 0.09, Some((9.0, 3, 4))),
    row(68, WeakRight, WeakRight, 2532.4, -151.56, 1.59, Some((8.0, 3, 4))),
    row(69, WeakRight, StrongRight, 2305.8, -148.29, 3.09, Some((7.0, 3, 3))),
    row(70, StrongRight, StrongRight, 2060.8, -144.01, 6.09, Some((6.0, 5, 3))),
    row(71, StrongRight, StrongRight, 1786.7, -140.67, 9.09, Some((5.0, 5, 3))),
    row(72, StrongRight, StrongRight, 1480.9, -138.70, 12.09, Some((4.0, 5, 3))),
    row(73, StrongRight, StrongRight, 1144.3, -139.22, 15.09, Some((3.0, 5, 2))),
    row(74, StrongRight, StrongRight, 788.1, -145.64, 18.09, Some((2.0, 5, 2))),
    row(75, StrongRight, StrongRight, 477.4, -171.30, 21.09, Some((1.0, 5, 2))),
    row(76, StrongRight, StrongRight, 498.5, 132.55, 24.09, Some((0.0, 5, 1))),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_consistent() {
        let all = scenarios();
        assert_eq!(all.map(|s| s.rows.len()), [59, 62, 76]);
        for s in all {
            assert!((s.rows[0].rho - s.spec.rho).abs() < 0.1, "{}", s.name);
            for (i, r) in s.rows.iter().enumerate() {
                assert_eq!(r.step, i + 1);
                if i > 0 {
                    assert_eq!(r.prev, s.rows[i - 1].cmd);
                }
            }
            assert!(s.rows.last().unwrap().rho < 500.0);
        }
        assert!(scenario("fast-ownship")
            .unwrap()
            .rows
            .iter()
            .all(|r| r.network.is_some()));
        assert!(scenario("nope").is_none());
    }
}
