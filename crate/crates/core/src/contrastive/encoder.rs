use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::embedding::squared_distance;
use crate::error::{Error, Result};

/// Mean losses recorded after one training epoch. Epoch 0 is the
/// initialization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

/// Weights of the sense encoder `x ↦ W2·relu(W1·x + b1) + b2`.
///
/// Matrices are row-major: `w1` is `hidden × dim`, `w2` is `dim × hidden`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub dim: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub train_log: Vec<EpochLog>,
    /// Epoch whose weights these are.
    pub selected_epoch: usize,
}

/// Gradient of a scalar loss with respect to every encoder weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradient {
    pub fn zeros(dim: usize, hidden: usize) -> Self {
        Gradient {
            w1: vec![0.0; hidden * dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; dim * hidden],
            b2: vec![0.0; dim],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.parts().iter().all(|p| p.iter().all(|&g| g == 0.0))
    }

    pub fn parts(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }
}

struct Forward {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    out: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(dim: usize, hidden: usize) -> Self {
        EncoderParams {
            dim,
            hidden,
            w1: vec![0.0; hidden * dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; dim * hidden],
            b2: vec![0.0; dim],
            train_log: Vec::new(),
            selected_epoch: 0,
        }
    }

    /// Uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init<R: Rng>(dim: usize, hidden: usize, rng: &mut R) -> Self {
        let mut p = EncoderParams::zeros(dim, hidden);
        let limit = (6.0 / (dim + hidden) as f64).sqrt();
        for w in p.w1.iter_mut().chain(p.w2.iter_mut()) {
            *w = rng.gen_range(-limit..limit);
        }
        p
    }

    pub fn parts_mut(&mut self) -> [&mut [f64]; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    pub fn parts(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    fn forward(&self, x: &[f64]) -> Forward {
        let mut pre = self.b1.clone();
        for (j, p) in pre.iter_mut().enumerate() {
            let row = &self.w1[j * self.dim..(j + 1) * self.dim];
            *p += row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
        let hidden: Vec<f64> = pre.iter().map(|&z| z.max(0.0)).collect();
        let mut out = self.b2.clone();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.w2[i * self.hidden..(i + 1) * self.hidden];
            *o += row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>();
        }
        Forward { pre, hidden, out }
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.forward(x).out)
    }

    /// Accumulates `∂L/∂params` given `∂L/∂out` for one input.
    fn backward(&self, x: &[f64], f: &Forward, d_out: &[f64], grad: &mut Gradient) {
        let mut d_hidden = vec![0.0; self.hidden];
        for (i, &g) in d_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.b2[i] += g;
            let base = i * self.hidden;
            for (j, &h) in f.hidden.iter().enumerate() {
                grad.w2[base + j] += g * h;
                d_hidden[j] += g * self.w2[base + j];
            }
        }
        for (j, &dh) in d_hidden.iter().enumerate() {
            // relu'(0) taken as 0
            if f.pre[j] <= 0.0 || dh == 0.0 {
                continue;
            }
            grad.b1[j] += dh;
            let base = j * self.dim;
            for (k, &xk) in x.iter().enumerate() {
                grad.w1[base + k] += dh * xk;
            }
        }
    }

    /// Triplet loss of the encoded inputs and its exact gradient.
    pub fn loss_gradient(
        &self,
        anchor: &[f64],
        positive: &[f64],
        negative: &[f64],
        margin: f64,
    ) -> Result<(f64, Gradient)> {
        for x in [anchor, positive, negative] {
            self.check_input(x)?;
        }
        let fs = self.forward(anchor);
        let fp = self.forward(positive);
        let fn_ = self.forward(negative);
        let loss = triplet_loss(&fs.out, &fp.out, &fn_.out, margin);
        let mut grad = Gradient::zeros(self.dim, self.hidden);
        if loss <= 0.0 {
            return Ok((loss, grad));
        }
        // L = m + |s-p|^2 - |s-n|^2
        let d_s: Vec<f64> = fn_.out.iter().zip(&fp.out).map(|(n, p)| 2.0 * (n - p)).collect();
        let d_p: Vec<f64> = fs.out.iter().zip(&fp.out).map(|(s, p)| -2.0 * (s - p)).collect();
        let d_n: Vec<f64> = fs.out.iter().zip(&fn_.out).map(|(s, n)| 2.0 * (s - n)).collect();
        self.backward(anchor, &fs, &d_s, &mut grad);
        self.backward(positive, &fp, &d_p, &mut grad);
        self.backward(negative, &fn_, &d_n, &mut grad);
        Ok((loss, grad))
    }

    pub fn is_finite(&self) -> bool {
        self.parts().iter().all(|p| p.iter().all(|x| x.is_finite()))
    }

    /// Writes the `dim hidden` header, then `w1` rows, `b1`, `w2` rows and
    /// `b2`, one row per line, followed by the training log as comments.
    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        let mut out = String::from(header);
        writeln!(out, "{} {}", self.dim, self.hidden).unwrap();
        let mut row = |values: &[f64]| {
            let line: Vec<String> = values.iter().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        };
        for r in self.w1.chunks(self.dim) {
            row(r);
        }
        row(&self.b1);
        for r in self.w2.chunks(self.hidden) {
            row(r);
        }
        row(&self.b2);
        for e in &self.train_log {
            writeln!(
                out,
                "# epoch {} train {} validation {}",
                e.epoch, e.train_loss, e.validation_loss
            )
            .unwrap();
        }
        writeln!(out, "# selected_epoch {}", self.selected_epoch).unwrap();
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let err = |line: usize, message: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut log = Vec::new();
        let mut selected_epoch = 0;
        let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("# epoch ") {
                let f: Vec<&str> = rest.split_whitespace().collect();
                match f.as_slice() {
                    [e, "train", t, "validation", v] => log.push(EpochLog {
                        epoch: e.parse().map_err(|_| err(n + 1, "bad epoch"))?,
                        train_loss: t.parse().map_err(|_| err(n + 1, "bad loss"))?,
                        validation_loss: v.parse().map_err(|_| err(n + 1, "bad loss"))?,
                    }),
                    _ => return Err(err(n + 1, "bad epoch line")),
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix("# selected_epoch ") {
                selected_epoch = rest.trim().parse().map_err(|_| err(n + 1, "bad epoch"))?;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let values = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| err(n + 1, "bad float"))?;
            rows.push((n + 1, values));
        }
        let mut rows = rows.into_iter();
        let (hn, header) = rows.next().ok_or_else(|| err(1, "missing header"))?;
        let (dim, hidden) = match header.as_slice() {
            [d, h] if *d >= 1.0 && *h >= 1.0 && d.fract() == 0.0 && h.fract() == 0.0 => {
                (*d as usize, *h as usize)
            }
            _ => return Err(err(hn, "expected `dim hidden`")),
        };
        let mut take = |count: usize, width: usize| -> Result<Vec<f64>> {
            let mut out = Vec::with_capacity(count * width);
            for _ in 0..count {
                let (n, r) = rows.next().ok_or_else(|| err(0, "truncated parameter file"))?;
                if r.len() != width {
                    return Err(err(n, "row has the wrong length"));
                }
                out.extend(r);
            }
            Ok(out)
        };
        let w1 = take(hidden, dim)?;
        let b1 = take(1, hidden)?;
        let w2 = take(dim, hidden)?;
        let b2 = take(1, dim)?;
        if rows.next().is_some() {
            return Err(err(0, "trailing rows in parameter file"));
        }
        let params = EncoderParams {
            dim,
            hidden,
            w1,
            b1,
            w2,
            b2,
            train_log: log,
            selected_epoch,
        };
        if !params.is_finite() {
            return Err(Error::Numerical("non-finite encoder weight".into()));
        }
        Ok(params)
    }
}

/// `max(0, m + |s − p|² − |s − n|²)`.
pub fn triplet_loss(anchor: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> f64 {
    (margin + (squared_distance(anchor, positive) - squared_distance(anchor, negative))).max(0.0)
}

/// Adam with bias correction over the four encoder parameter blocks.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(params: &EncoderParams, lr: f64, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        let shapes: Vec<usize> = params.parts().iter().map(|p| p.len()).collect();
        Adam {
            lr,
            beta1,
            beta2,
            epsilon,
            step: 0,
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn step(&mut self, params: &mut EncoderParams, grad: &Gradient) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for (k, (p, g)) in params.parts_mut().into_iter().zip(grad.parts()).enumerate() {
            let (m, v) = (&mut self.m[k], &mut self.v[k]);
            for i in 0..p.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= self.lr * m_hat / (v_hat.sqrt() + self.epsilon);
            }
        }
    }
}
