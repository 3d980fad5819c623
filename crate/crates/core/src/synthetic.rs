//! Hand-built networks for running the pipeline without the distributed
//! assets: constant policies, random ACAS-shaped networks, and a small
//! bearing-based avoidance policy.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::dynamics::Advisory;
use crate::nnet::{Layer, Network, NetworkSet};

fn plain_normalization(inputs: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    (
        vec![f64::MIN; inputs],
        vec![f64::MAX; inputs],
        vec![0.0; inputs + 1],
        vec![1.0; inputs + 1],
    )
}

/// A single affine layer that always prefers `adv` (argmin convention).
pub fn constant_network(adv: Advisory) -> Network {
    let (input_min, input_max, means, ranges) = plain_normalization(5);
    let bias = (0..5)
        .map(|i| if i == adv.index() { 0.0 } else { 1.0 })
        .collect();
    Network {
        layers: vec![Layer {
            rows: 5,
            cols: 5,
            weights: vec![0.0; 25],
            bias,
        }],
        input_min,
        input_max,
        means,
        ranges,
    }
}

/// Random 5-in/5-out ReLU network with the input bounds and normalization
/// constants of the real controllers.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, hidden: &[usize]) -> Network {
    let mut sizes = vec![5];
    sizes.extend_from_slice(hidden);
    sizes.push(5);
    let layers = sizes
        .windows(2)
        .map(|w| {
            let (cols, rows) = (w[0], w[1]);
            let scale = 1.0 / (cols as f64).sqrt();
            Layer {
                rows,
                cols,
                weights: (0..rows * cols)
                    .map(|_| rng.random_range(-scale..scale))
                    .collect(),
                bias: (0..rows).map(|_| rng.random_range(-0.1..0.1)).collect(),
            }
        })
        .collect();
    Network {
        layers,
        input_min: vec![0.0, -PI, -PI, 100.0, 0.0],
        input_max: vec![60760.0, PI, PI, 1200.0, 1200.0],
        means: vec![19791.091, 0.0, 0.0, 650.0, 600.0, 7.518884],
        ranges: vec![60261.0, TAU, TAU, 1100.0, 1200.0, 373.94992],
    }
}

/// Bearing-based avoidance policy, one network per previous advisory.
///
/// Inside `activation_range` the controller turns away from an intruder that
/// sits more than `turn_bearing` off the nose (right turn for an intruder on
/// the left and vice versa) and keeps turning while that holds; otherwise it
/// flies straight. Intruders close to the nose are not avoided, so head-on and
/// overtaking geometries still collide. Strong turns are never issued.
pub fn bearing_policy(activation_range: f64, turn_bearing: f64) -> NetworkSet {
    let nets = Advisory::ALL.map(|prev| bearing_network(prev, activation_range, turn_bearing));
    NetworkSet::per_advisory(nets)
}

fn bearing_network(prev: Advisory, activation_range: f64, turn_bearing: f64) -> Network {
    // Normalized inputs: ρ / R and θ / π; the others are ignored.
    let means = vec![0.0; 6];
    let mut ranges = vec![1.0; 6];
    ranges[0] = activation_range;
    ranges[1] = PI;
    // Hidden units: intruder on the left, intruder on the right, beyond range.
    let hidden = Layer {
        rows: 3,
        cols: 5,
        weights: vec![
            0.0, 1.0, 0.0, 0.0, 0.0, //
            0.0, -1.0, 0.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, 0.0,
        ],
        bias: vec![0.0, 0.0, -1.0],
    };
    let far = 100.0;
    let margin = turn_bearing / PI;
    // Straight flight scores `margin`; a turn scores 2·margin minus how far
    // the intruder sits on the side it turns away from.
    let (wl, wr) = match prev {
        Advisory::Coc => (true, true),
        Advisory::WeakLeft => (true, false),
        Advisory::WeakRight => (false, true),
        Advisory::StrongLeft | Advisory::StrongRight => (false, false),
    };
    let mut weights = vec![0.0; 15];
    let mut bias = vec![margin, 10.0, 10.0, 10.0, 10.0];
    if wl {
        // WL: intruder on the right (hidden unit 1).
        weights[3..6].copy_from_slice(&[0.0, -1.0, far]);
        bias[1] = 2.0 * margin;
    }
    if wr {
        weights[6..9].copy_from_slice(&[-1.0, 0.0, far]);
        bias[2] = 2.0 * margin;
    }
    Network {
        layers: vec![
            hidden,
            Layer {
                rows: 5,
                cols: 3,
                weights,
                bias,
            },
        ],
        input_min: vec![f64::MIN; 5],
        input_max: vec![f64::MAX; 5],
        means,
        ranges,
    }
}
