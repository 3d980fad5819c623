//! Feedforward ReLU networks in the NNet text format, plus the 5×9 grid of
//! networks indexed by previous advisory and time to vertical separation.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::dynamics::{Advisory, NetworkInput};

/// τ values (s) the networks were trained at, in grid-index order 1..=9.
pub const TAU_GRID: [f64; 9] = [0.0, 1.0, 5.0, 10.0, 20.0, 50.0, 60.0, 80.0, 100.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnetError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unexpected end of file: {0}")]
    Truncated(String),
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: Box<NnetError>,
    },
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("no network files found in {0}")]
    EmptyDir(PathBuf),
    #[error("input has {got} features, network expects {expected}")]
    InputCount { expected: usize, got: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SelectError {
    #[error("network N_{{{prev},{tau}}} is not loaded")]
    Missing { prev: usize, tau: usize },
    #[error("network N_{{{prev},{tau}}} has {outputs} outputs, expected 5")]
    OutputCount {
        prev: usize,
        tau: usize,
        outputs: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn apply(&self, x: &[f64], out: &mut Vec<f64>, relu: bool) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.bias[r];
            for (w, v) in row.iter().zip(x) {
                acc += w * v;
            }
            out.push(if relu { acc.max(0.0) } else { acc });
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub input_min: Vec<f64>,
    pub input_max: Vec<f64>,
    /// Input means followed by the output mean.
    pub means: Vec<f64>,
    /// Input ranges followed by the output range.
    pub ranges: Vec<f64>,
}

impl Network {
    pub fn input_count(&self) -> usize {
        self.layers.first().map_or(0, |l| l.cols)
    }

    pub fn output_count(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    /// Checks layer chaining and normalization constants.
    pub fn validate(&self) -> Result<(), String> {
        if self.layers.is_empty() {
            return Err("network has no layers".into());
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.weights.len() != l.rows * l.cols || l.bias.len() != l.rows {
                return Err(format!("layer {i} storage does not match its shape"));
            }
            if i > 0 && self.layers[i - 1].rows != l.cols {
                return Err(format!(
                    "layer {i} expects {} inputs but layer {} produces {}",
                    l.cols,
                    i - 1,
                    self.layers[i - 1].rows
                ));
            }
        }
        let n = self.input_count();
        if self.input_min.len() != n || self.input_max.len() != n {
            return Err("input bounds do not match the input size".into());
        }
        if self.means.len() != n + 1 || self.ranges.len() != n + 1 {
            return Err("normalization vectors must have input size + 1 entries".into());
        }
        if let Some(i) = self.ranges.iter().position(|r| r.is_nan() || *r <= 0.0) {
            return Err(format!(
                "range {i} is not strictly positive ({})",
                self.ranges[i]
            ));
        }
        Ok(())
    }

    /// Forward pass on raw features, returning denormalized scores.
    pub fn evaluate(&self, features: &[f64], clamp: bool) -> Result<Vec<f64>, NnetError> {
        let n = self.input_count();
        if features.len() != n {
            return Err(NnetError::InputCount {
                expected: n,
                got: features.len(),
            });
        }
        let mut x: Vec<f64> = features
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let v = if clamp {
                    v.clamp(self.input_min[i], self.input_max[i])
                } else {
                    v
                };
                (v - self.means[i]) / self.ranges[i]
            })
            .collect();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&x, &mut next, i < last);
            std::mem::swap(&mut x, &mut next);
        }
        let (mean, range) = (self.means[n], self.ranges[n]);
        for v in &mut x {
            *v = *v * range + mean;
        }
        Ok(x)
    }

    /// Scores for the standard five inputs; a sixth τ feature is appended
    /// when the network takes one.
    pub fn execute(
        &self,
        inp: &NetworkInput,
        tau_feature: Option<f64>,
        clamp: bool,
    ) -> Result<Vec<f64>, NnetError> {
        let base = inp.to_array();
        match (self.input_count(), tau_feature) {
            (6, Some(t)) => {
                let mut f = base.to_vec();
                f.push(t);
                self.evaluate(&f, clamp)
            }
            _ => self.evaluate(&base, clamp),
        }
    }

    /// NNet text. Numbers use shortest round-trip formatting, so parsing the
    /// output reproduces the network exactly.
    pub fn to_nnet_string(&self) -> String {
        fn join(v: &[f64]) -> String {
            let mut s = String::new();
            for x in v {
                let _ = write!(s, "{x},");
            }
            s
        }
        let mut out = String::from("// Feedforward ReLU network\n");
        let sizes: Vec<usize> = std::iter::once(self.input_count())
            .chain(self.layers.iter().map(|l| l.rows))
            .collect();
        let max = sizes.iter().copied().max().unwrap_or(0);
        let _ = writeln!(
            out,
            "{},{},{},{},",
            self.layers.len(),
            self.input_count(),
            self.output_count(),
            max
        );
        let _ = writeln!(
            out,
            "{}",
            sizes.iter().map(|s| format!("{s},")).collect::<String>()
        );
        out.push_str("0,\n");
        for v in [&self.input_min, &self.input_max, &self.means, &self.ranges] {
            let _ = writeln!(out, "{}", join(v));
        }
        for l in &self.layers {
            for r in 0..l.rows {
                let _ = writeln!(out, "{}", join(&l.weights[r * l.cols..(r + 1) * l.cols]));
            }
            for b in &l.bias {
                let _ = writeln!(out, "{b},");
            }
        }
        out
    }
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-comment, non-blank line as (1-based line number, values).
    fn next_values(&mut self, what: &str) -> Result<(usize, Vec<f64>), NnetError> {
        for (i, raw) in self.iter.by_ref() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let mut vals = Vec::new();
            for tok in line.split(',') {
                let tok = tok.trim();
                if tok.is_empty() {
                    continue;
                }
                let v: f64 = tok.parse().map_err(|_| NnetError::Parse {
                    line: i + 1,
                    msg: format!("non-numeric token '{tok}' in {what}"),
                })?;
                if !v.is_finite() {
                    return Err(NnetError::Parse {
                        line: i + 1,
                        msg: format!("non-finite value in {what}"),
                    });
                }
                vals.push(v);
            }
            return Ok((i + 1, vals));
        }
        Err(NnetError::Truncated(format!("expected {what}")))
    }

    fn expect(&mut self, what: &str, count: usize) -> Result<(usize, Vec<f64>), NnetError> {
        let (line, vals) = self.next_values(what)?;
        if vals.len() < count {
            return Err(NnetError::Parse {
                line,
                msg: format!("{what}: expected {count} values, found {}", vals.len()),
            });
        }
        Ok((line, vals))
    }
}

fn as_size(v: f64, line: usize, what: &str) -> Result<usize, NnetError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= 1e7 {
        Ok(v as usize)
    } else {
        Err(NnetError::Parse {
            line,
            msg: format!("{what} must be a non-negative integer, got {v}"),
        })
    }
}

pub fn parse_nnet(text: &str) -> Result<Network, NnetError> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
    };

    let (hline, header) = lines.expect("header", 4)?;
    let num_layers = as_size(header[0], hline, "layer count")?;
    let inputs = as_size(header[1], hline, "input size")?;
    let outputs = as_size(header[2], hline, "output size")?;
    if num_layers == 0 {
        return Err(NnetError::Parse {
            line: hline,
            msg: "layer count must be positive".into(),
        });
    }

    let (sline, raw_sizes) = lines.expect("layer sizes", num_layers + 1)?;
    let sizes = raw_sizes[..num_layers + 1]
        .iter()
        .map(|&v| as_size(v, sline, "layer size"))
        .collect::<Result<Vec<_>, _>>()?;
    if sizes[0] != inputs || sizes[num_layers] != outputs {
        return Err(NnetError::Parse {
            line: sline,
            msg: format!(
                "layer sizes {sizes:?} disagree with header input/output sizes {inputs}/{outputs}"
            ),
        });
    }

    lines.next_values("flag line")?;
    let (_, mut input_min) = lines.expect("input minimums", inputs)?;
    let (_, mut input_max) = lines.expect("input maximums", inputs)?;
    let (_, mut means) = lines.expect("means", inputs + 1)?;
    let (rline, mut ranges) = lines.expect("ranges", inputs + 1)?;
    input_min.truncate(inputs);
    input_max.truncate(inputs);
    means.truncate(inputs + 1);
    ranges.truncate(inputs + 1);
    if let Some(i) = ranges.iter().position(|r| r.is_nan() || *r <= 0.0) {
        return Err(NnetError::Parse {
            line: rline,
            msg: format!("range {i} must be strictly positive, got {}", ranges[i]),
        });
    }

    let mut layers = Vec::with_capacity(num_layers);
    for k in 0..num_layers {
        let (cols, rows) = (sizes[k], sizes[k + 1]);
        let mut weights = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (line, vals) = lines.next_values(&format!("layer {k} weight row {r}"))?;
            if vals.len() != cols {
                return Err(NnetError::Parse {
                    line,
                    msg: format!(
                        "layer {k} weight row {r}: expected {cols} values, found {}",
                        vals.len()
                    ),
                });
            }
            weights.extend(vals);
        }
        let mut bias = Vec::with_capacity(rows);
        for r in 0..rows {
            let (line, vals) = lines.next_values(&format!("layer {k} bias {r}"))?;
            if vals.len() != 1 {
                return Err(NnetError::Parse {
                    line,
                    msg: format!("layer {k} bias {r}: expected 1 value, found {}", vals.len()),
                });
            }
            bias.push(vals[0]);
        }
        layers.push(Layer {
            rows,
            cols,
            weights,
            bias,
        });
    }

    let net = Network {
        layers,
        input_min,
        input_max,
        means,
        ranges,
    };
    net.validate()
        .map_err(|msg| NnetError::Parse { line: hline, msg })?;
    Ok(net)
}

pub fn read_nnet(path: &Path) -> Result<Network, NnetError> {
    let text = std::fs::read_to_string(path).map_err(|e| NnetError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    parse_nnet(&text).map_err(|e| NnetError::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// How a score vector maps to an advisory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreRule {
    /// Scores are costs.
    #[default]
    Argmin,
    Argmax,
}

/// Lowest index wins ties.
pub fn select_advisory(scores: &[f64], rule: ScoreRule) -> Advisory {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().take(5).skip(1) {
        let better = match rule {
            ScoreRule::Argmin => s < scores[best],
            ScoreRule::Argmax => s > scores[best],
        };
        if better {
            best = i;
        }
    }
    Advisory::ALL[best]
}

/// 1-based grid index of the network trained nearest to `tau`; ties go to the
/// smaller grid value.
pub fn tau_index(tau: f64) -> usize {
    let mut best = 0;
    for (i, &g) in TAU_GRID.iter().enumerate().skip(1) {
        if (tau - g).abs() < (tau - TAU_GRID[best]).abs() {
            best = i;
        }
    }
    best + 1
}

pub fn nnet_file_name(prev: usize, tau: usize) -> String {
    format!("ACASXU_run2a_{prev}_{tau}_batch_2000.nnet")
}

/// A controller decision together with the network that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub advisory: Advisory,
    /// 1-based (previous advisory, τ) grid coordinates.
    pub network: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct NetworkSet {
    slots: Vec<Option<Arc<Network>>>,
    pub rule: ScoreRule,
    pub clamp_inputs: bool,
}

impl Default for NetworkSet {
    fn default() -> Self {
        NetworkSet {
            slots: vec![None; 45],
            rule: ScoreRule::Argmin,
            clamp_inputs: true,
        }
    }
}

impl NetworkSet {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(prev: Advisory, tau_idx: usize) -> usize {
        assert!(
            (1..=9).contains(&tau_idx),
            "τ index {tau_idx} outside 1..=9"
        );
        prev.index() * 9 + (tau_idx - 1)
    }

    pub fn insert(&mut self, prev: Advisory, tau_idx: usize, net: Network) {
        self.slots[Self::slot(prev, tau_idx)] = Some(Arc::new(net));
    }

    /// Same network in every slot.
    pub fn uniform(net: Network) -> Self {
        let net = Arc::new(net);
        NetworkSet {
            slots: vec![Some(net); 45],
            ..Self::default()
        }
    }

    /// One network per previous advisory, shared across all τ slots.
    pub fn per_advisory(nets: [Network; 5]) -> Self {
        let mut set = Self::default();
        for (a, net) in nets.into_iter().enumerate() {
            let net = Arc::new(net);
            for t in 0..9 {
                set.slots[a * 9 + t] = Some(net.clone());
            }
        }
        set
    }

    pub fn get(&self, prev: Advisory, tau_idx: usize) -> Option<&Network> {
        self.slots[Self::slot(prev, tau_idx)].as_deref()
    }

    pub fn loaded(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn select_network(
        &self,
        prev: Advisory,
        tau: f64,
    ) -> Result<(&Network, (usize, usize)), SelectError> {
        let t = tau_index(tau);
        let key = (prev.index() + 1, t);
        let net = self.get(prev, t).ok_or(SelectError::Missing {
            prev: key.0,
            tau: key.1,
        })?;
        if net.output_count() != 5 {
            return Err(SelectError::OutputCount {
                prev: key.0,
                tau: key.1,
                outputs: net.output_count(),
            });
        }
        Ok((net, key))
    }

    pub fn advise(
        &self,
        prev: Advisory,
        tau: f64,
        inp: &NetworkInput,
    ) -> Result<Decision, SelectError> {
        let (net, key) = self.select_network(prev, tau)?;
        let scores = net
            .execute(inp, Some(tau), self.clamp_inputs)
            .map_err(|_| SelectError::OutputCount {
                prev: key.0,
                tau: key.1,
                outputs: net.output_count(),
            })?;
        Ok(Decision {
            advisory: select_advisory(&scores, self.rule),
            network: key,
        })
    }

    /// Loads every `ACASXU_run2a_{prev}_{tau}_batch_2000.nnet` present in `dir`.
    /// Missing files leave their slot empty; a directory with none is an error.
    pub fn load_dir(dir: &Path) -> Result<Self, NnetError> {
        if !dir.is_dir() {
            return Err(NnetError::Io {
                path: dir.to_path_buf(),
                msg: "not a directory".into(),
            });
        }
        let mut set = Self::default();
        for prev in Advisory::ALL {
            for t in 1..=9 {
                let path = dir.join(nnet_file_name(prev.index() + 1, t));
                if path.is_file() {
                    set.insert(prev, t, read_nnet(&path)?);
                }
            }
        }
        if set.loaded() == 0 {
            return Err(NnetError::EmptyDir(dir.to_path_buf()));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY_NET: &str = "// toy
// second comment
1,2,2,2,
2,2,
0,
-100,-100,
100,100,
0,0,0,
1,1,1,
1,0,
0,1,
0,
0,
";

    #[test]
    fn identity_network_is_exact() {
        let net = parse_nnet(IDENTITY_NET).unwrap();
        assert_eq!(net.evaluate(&[3.5, -2.25], true).unwrap(), vec![3.5, -2.25]);
        // Clamping applies before normalization.
        assert_eq!(net.evaluate(&[300.0, 0.0], true).unwrap(), vec![100.0, 0.0]);
        assert_eq!(
            net.evaluate(&[300.0, 0.0], false).unwrap(),
            vec![300.0, 0.0]
        );
    }

    #[test]
    fn negative_range_is_rejected() {
        let bad = IDENTITY_NET.replace("1,1,1,", "1,-1,1,");
        match parse_nnet(&bad) {
            Err(NnetError::Parse { line, msg }) => {
                assert_eq!(line, 9);
                assert!(msg.contains("strictly positive"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs_report_lines() {
        let bad = IDENTITY_NET.replace("0,1,\n", "0,x,\n");
        assert!(matches!(
            parse_nnet(&bad),
            Err(NnetError::Parse { line: 11, .. })
        ));
        let short = IDENTITY_NET.replace("1,0,\n", "1,\n");
        assert!(matches!(
            parse_nnet(&short),
            Err(NnetError::Parse { line: 10, .. })
        ));
        let trunc: String = IDENTITY_NET
            .lines()
            .take(11)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(parse_nnet(&trunc), Err(NnetError::Truncated(_))));
        let sizes = IDENTITY_NET.replace("2,2,\n", "2,3,\n");
        assert!(matches!(
            parse_nnet(&sizes),
            Err(NnetError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn serialization_round_trips() {
        let net = parse_nnet(IDENTITY_NET).unwrap();
        assert_eq!(parse_nnet(&net.to_nnet_string()).unwrap(), net);
    }

    #[test]
    fn advisory_selection() {
        assert_eq!(
            select_advisory(&[0.0, 1.0, 2.0, 3.0, 4.0], ScoreRule::Argmin),
            Advisory::Coc
        );
        assert_eq!(
            select_advisory(&[1.0, 0.0, 2.0, 3.0, 4.0], ScoreRule::Argmin),
            Advisory::WeakLeft
        );
        assert_eq!(
            select_advisory(&[0.0, 0.0, 1.0, 1.0, 1.0], ScoreRule::Argmin),
            Advisory::Coc
        );
        assert_eq!(
            select_advisory(&[0.0, 1.0, 2.0, 3.0, 4.0], ScoreRule::Argmax),
            Advisory::StrongRight
        );
        assert_eq!(
            select_advisory(&[1.0, 1.0, 0.0, 0.0, 0.0], ScoreRule::Argmax),
            Advisory::Coc
        );
    }

    #[test]
    fn tau_selection() {
        assert_eq!(tau_index(75.0), 8);
        assert_eq!(tau_index(55.0), 6);
        assert_eq!(tau_index(0.0), 1);
        assert_eq!(tau_index(3.0), 2);
        assert_eq!(tau_index(7.0), 3);
        assert_eq!(tau_index(7.5), 3);
        assert_eq!(tau_index(15.0), 4);
        assert_eq!(tau_index(35.0), 5);
        assert_eq!(tau_index(70.0), 7);
        assert_eq!(tau_index(100.0), 9);
        assert_eq!(tau_index(160.0), 9);
        assert_eq!(tau_index(0.5), 1);
    }

    #[test]
    fn missing_slot_is_reported() {
        let set = NetworkSet::new();
        let inp = NetworkInput {
            rho: 1.0,
            theta: 0.0,
            psi: 0.0,
            v_own: 1.0,
            v_int: 1.0,
        };
        assert_eq!(
            set.advise(Advisory::WeakRight, 55.0, &inp),
            Err(SelectError::Missing { prev: 3, tau: 6 })
        );
    }

    #[test]
    fn load_dir_errors() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            NetworkSet::load_dir(dir.path()),
            Err(NnetError::EmptyDir(_))
        ));
        std::fs::write(dir.path().join(nnet_file_name(1, 1)), "garbage\n").unwrap();
        let err = NetworkSet::load_dir(dir.path()).unwrap_err();
        assert!(
            err.to_string().contains("ACASXU_run2a_1_1_batch_2000.nnet"),
            "{err}"
        );
        assert!(NetworkSet::load_dir(&dir.path().join("nope")).is_err());
    }
}
