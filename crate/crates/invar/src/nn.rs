//! Minimal dense feedforward network with Adam, tuned for repeated
//! small-batch f64 training on one core. All loops are laid out so the
//! compiler vectorizes the inner dimension; iteration order is fixed, so
//! results are bitwise reproducible for a given seed.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Softplus,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            // ln(1 + e^z), stabilized for large |z|.
            Activation::Softplus => {
                if z > 30.0 {
                    z
                } else if z < -30.0 {
                    z.exp()
                } else {
                    z.exp().ln_1p()
                }
            }
        }
    }

    /// Derivative expressed through the activation output itself.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            // softplus' = sigmoid(z) = 1 - e^{ -softplus(z) }.
            Activation::Softplus => 1.0 - (-a).exp(),
        }
    }
}

/// Fully connected network; hidden layers share one activation, the output
/// layer is linear.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    pub widths: Vec<usize>,
    pub activation: Activation,
    /// Row-major `widths[l] x widths[l+1]` weight matrices.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// Symmetric uniform init scaled by fan-in; zero biases.
    pub fn init<R: Rng>(widths: &[usize], activation: Activation, rng: &mut R) -> Self {
        assert!(widths.len() >= 2, "need at least input and output widths");
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let w: Vec<f64> =
                (0..fan_in * fan_out).map(|_| rng.gen_range(-bound..bound)).collect();
            weights.push(w);
            biases.push(vec![0.0; fan_out]);
        }
        Mlp { widths: widths.to_vec(), activation, weights, biases }
    }

    pub fn zeroed(widths: &[usize], activation: Activation) -> Self {
        let weights =
            (0..widths.len() - 1).map(|l| vec![0.0; widths[l] * widths[l + 1]]).collect();
        let biases = (0..widths.len() - 1).map(|l| vec![0.0; widths[l + 1]]).collect();
        Mlp { widths: widths.to_vec(), activation, weights, biases }
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Forward pass for `rows` stacked inputs; activations of every layer
    /// are left in `bufs` for a subsequent backward pass.
    pub fn forward_batch(&self, input: &[f64], rows: usize, bufs: &mut BatchBuffers) {
        debug_assert_eq!(input.len(), rows * self.input_dim());
        bufs.ensure(self, rows);
        bufs.acts[0][..input.len()].copy_from_slice(input);
        for l in 0..self.layer_count() {
            let (in_dim, out_dim) = (self.widths[l], self.widths[l + 1]);
            let (before, after) = bufs.acts.split_at_mut(l + 1);
            let src = &before[l][..rows * in_dim];
            let dst = &mut after[0][..rows * out_dim];
            gemm_bias(src, rows, in_dim, &self.weights[l], &self.biases[l], out_dim, dst);
            if l + 1 < self.layer_count() {
                for a in dst.iter_mut() {
                    *a = self.activation.apply(*a);
                }
            }
        }
    }

    /// Output of the last forward pass.
    pub fn output<'a>(&self, bufs: &'a BatchBuffers, rows: usize) -> &'a [f64] {
        &bufs.acts[self.layer_count()][..rows * self.output_dim()]
    }

    /// Backward pass from d(loss)/d(output); accumulates into `grads`
    /// (call `grads.zero()` first for plain gradients).
    pub fn backward_batch(
        &self,
        rows: usize,
        dout: &[f64],
        bufs: &mut BatchBuffers,
        grads: &mut Gradients,
    ) {
        debug_assert_eq!(dout.len(), rows * self.output_dim());
        let layers = self.layer_count();
        bufs.delta[..dout.len()].copy_from_slice(dout);
        for l in (0..layers).rev() {
            let (in_dim, out_dim) = (self.widths[l], self.widths[l + 1]);
            let delta = &bufs.delta[..rows * out_dim];
            let acts_in = &bufs.acts[l][..rows * in_dim];

            accumulate_weight_grads(acts_in, delta, rows, in_dim, out_dim, &mut grads.weights[l]);
            for r in 0..rows {
                let drow = &delta[r * out_dim..(r + 1) * out_dim];
                for (g, &d) in grads.biases[l].iter_mut().zip(drow) {
                    *g += d;
                }
            }

            if l > 0 {
                let prev = &mut bufs.delta_prev[..rows * in_dim];
                backprop_through_weights(delta, rows, out_dim, &self.weights[l], in_dim, prev);
                // Through the activation of layer l-1 (outputs stored in acts[l]).
                for (p, &a) in prev.iter_mut().zip(acts_in) {
                    *p *= self.activation.derivative_from_output(a);
                }
                let n = rows * in_dim;
                bufs.delta[..n].copy_from_slice(&bufs.delta_prev[..n]);
            }
        }
    }

    /// Single-input forward pass into a reusable scratch buffer.
    pub fn forward_one(&self, x: &[f64], scratch: &mut InferBuffers, out: &mut Vec<f64>) {
        debug_assert_eq!(x.len(), self.input_dim());
        scratch.ensure(self);
        scratch.a[..x.len()].copy_from_slice(x);
        let mut cur = self.input_dim();
        for l in 0..self.layer_count() {
            let (in_dim, out_dim) = (self.widths[l], self.widths[l + 1]);
            debug_assert_eq!(cur, in_dim);
            let src = &scratch.a[..in_dim];
            let dst = &mut scratch.b[..out_dim];
            dst.copy_from_slice(&self.biases[l]);
            for (i, &xi) in src.iter().enumerate() {
                let wrow = &self.weights[l][i * out_dim..(i + 1) * out_dim];
                for (d, &w) in dst.iter_mut().zip(wrow) {
                    *d += xi * w;
                }
            }
            if l + 1 < self.layer_count() {
                for d in dst.iter_mut() {
                    *d = self.activation.apply(*d);
                }
            }
            scratch.a[..out_dim].copy_from_slice(&scratch.b[..out_dim]);
            cur = out_dim;
        }
        out.clear();
        out.extend_from_slice(&scratch.a[..cur]);
    }
}

/// out[r,:] = bias + src[r,:] * W
///
/// The contraction axis is blocked by four so each pass over the output row
/// carries four fused multiply-adds; this roughly triples throughput over
/// the naive axpy loop by cutting accumulator traffic.
fn gemm_bias(
    src: &[f64],
    rows: usize,
    in_dim: usize,
    w: &[f64],
    bias: &[f64],
    out_dim: usize,
    out: &mut [f64],
) {
    let i_blocks = in_dim / 4 * 4;
    let r_blocks = rows / 2 * 2;
    let mut r = 0;
    while r < r_blocks {
        let (s0, s1) = {
            let base = r * in_dim;
            (&src[base..base + in_dim], &src[base + in_dim..base + 2 * in_dim])
        };
        let (head, tail) = out[r * out_dim..].split_at_mut(out_dim);
        let o0 = head;
        let o1 = &mut tail[..out_dim];
        o0.copy_from_slice(bias);
        o1.copy_from_slice(bias);
        let mut i = 0;
        while i < i_blocks {
            let w0 = &w[i * out_dim..(i + 1) * out_dim];
            let w1 = &w[(i + 1) * out_dim..(i + 2) * out_dim];
            let w2 = &w[(i + 2) * out_dim..(i + 3) * out_dim];
            let w3 = &w[(i + 3) * out_dim..(i + 4) * out_dim];
            let (a0, a1, a2, a3) = (s0[i], s0[i + 1], s0[i + 2], s0[i + 3]);
            let (b0, b1, b2, b3) = (s1[i], s1[i + 1], s1[i + 2], s1[i + 3]);
            for j in 0..out_dim {
                let (v0, v1, v2, v3) = (w0[j], w1[j], w2[j], w3[j]);
                o0[j] += a0 * v0 + a1 * v1 + a2 * v2 + a3 * v3;
                o1[j] += b0 * v0 + b1 * v1 + b2 * v2 + b3 * v3;
            }
            i += 4;
        }
        for i in i_blocks..in_dim {
            let wrow = &w[i * out_dim..(i + 1) * out_dim];
            let (xa, xb) = (s0[i], s1[i]);
            for j in 0..out_dim {
                o0[j] += xa * wrow[j];
                o1[j] += xb * wrow[j];
            }
        }
        r += 2;
    }
    for r in r_blocks..rows {
        let srow = &src[r * in_dim..(r + 1) * in_dim];
        let orow = &mut out[r * out_dim..(r + 1) * out_dim];
        orow.copy_from_slice(bias);
        for (i, &x) in srow.iter().enumerate() {
            let wrow = &w[i * out_dim..(i + 1) * out_dim];
            for (o, &wv) in orow.iter_mut().zip(wrow) {
                *o += x * wv;
            }
        }
    }
}

/// prev[r,i] = dot(delta[r,:], w[i,:])
///
/// Rows are blocked by four so each weight row is loaded once per block.
fn backprop_through_weights(
    delta: &[f64],
    rows: usize,
    out_dim: usize,
    w: &[f64],
    in_dim: usize,
    prev: &mut [f64],
) {
    let row_blocks = rows / 4 * 4;
    let mut r = 0;
    while r < row_blocks {
        let d0 = &delta[r * out_dim..(r + 1) * out_dim];
        let d1 = &delta[(r + 1) * out_dim..(r + 2) * out_dim];
        let d2 = &delta[(r + 2) * out_dim..(r + 3) * out_dim];
        let d3 = &delta[(r + 3) * out_dim..(r + 4) * out_dim];
        for i in 0..in_dim {
            let wrow = &w[i * out_dim..(i + 1) * out_dim];
            let (mut a0, mut a1, mut a2, mut a3) = (0.0, 0.0, 0.0, 0.0);
            for j in 0..out_dim {
                let wv = wrow[j];
                a0 += d0[j] * wv;
                a1 += d1[j] * wv;
                a2 += d2[j] * wv;
                a3 += d3[j] * wv;
            }
            prev[r * in_dim + i] = a0;
            prev[(r + 1) * in_dim + i] = a1;
            prev[(r + 2) * in_dim + i] = a2;
            prev[(r + 3) * in_dim + i] = a3;
        }
        r += 4;
    }
    for r in row_blocks..rows {
        let drow = &delta[r * out_dim..(r + 1) * out_dim];
        let prow = &mut prev[r * in_dim..(r + 1) * in_dim];
        for (i, p) in prow.iter_mut().enumerate() {
            let wrow = &w[i * out_dim..(i + 1) * out_dim];
            let mut acc = 0.0;
            for (&d, &wv) in drow.iter().zip(wrow) {
                acc += d * wv;
            }
            *p = acc;
        }
    }
}

/// gw[i,j] += sum_r acts[r,i] * delta[r,j]
///
/// Rows are blocked by four to amortize gradient-matrix traffic.
fn accumulate_weight_grads(
    acts: &[f64],
    delta: &[f64],
    rows: usize,
    in_dim: usize,
    out_dim: usize,
    gw: &mut [f64],
) {
    let row_blocks = rows / 4 * 4;
    let mut r = 0;
    while r < row_blocks {
        let a0 = &acts[r * in_dim..(r + 1) * in_dim];
        let a1 = &acts[(r + 1) * in_dim..(r + 2) * in_dim];
        let a2 = &acts[(r + 2) * in_dim..(r + 3) * in_dim];
        let a3 = &acts[(r + 3) * in_dim..(r + 4) * in_dim];
        let d0 = &delta[r * out_dim..(r + 1) * out_dim];
        let d1 = &delta[(r + 1) * out_dim..(r + 2) * out_dim];
        let d2 = &delta[(r + 2) * out_dim..(r + 3) * out_dim];
        let d3 = &delta[(r + 3) * out_dim..(r + 4) * out_dim];
        for i in 0..in_dim {
            let (x0, x1, x2, x3) = (a0[i], a1[i], a2[i], a3[i]);
            let grow = &mut gw[i * out_dim..(i + 1) * out_dim];
            for j in 0..out_dim {
                grow[j] += x0 * d0[j] + x1 * d1[j] + x2 * d2[j] + x3 * d3[j];
            }
        }
        r += 4;
    }
    for r in row_blocks..rows {
        let arow = &acts[r * in_dim..(r + 1) * in_dim];
        let drow = &delta[r * out_dim..(r + 1) * out_dim];
        for (i, &a) in arow.iter().enumerate() {
            let grow = &mut gw[i * out_dim..(i + 1) * out_dim];
            for (g, &d) in grow.iter_mut().zip(drow) {
                *g += a * d;
            }
        }
    }
}

/// Reusable forward/backward activations for one batch size.
#[derive(Debug, Default)]
pub struct BatchBuffers {
    acts: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
    rows: usize,
}

impl BatchBuffers {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, net: &Mlp, rows: usize) {
        let layers = net.widths.len();
        if self.acts.len() != layers || self.rows < rows {
            self.acts = net.widths.iter().map(|&w| vec![0.0; w * rows]).collect();
            let widest = *net.widths.iter().max().unwrap();
            self.delta = vec![0.0; widest * rows];
            self.delta_prev = vec![0.0; widest * rows];
            self.rows = rows;
        }
    }
}

/// Scratch for single-input inference.
#[derive(Debug, Default)]
pub struct InferBuffers {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl InferBuffers {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, net: &Mlp) {
        let widest = *net.widths.iter().max().unwrap();
        if self.a.len() < widest {
            self.a = vec![0.0; widest];
            self.b = vec![0.0; widest];
        }
    }
}

/// Gradient storage matching an `Mlp`.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Gradients {
            weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn zero(&mut self) {
        for w in &mut self.weights {
            w.fill(0.0);
        }
        for b in &mut self.biases {
            b.fill(0.0);
        }
    }
}

/// Adam with the standard bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
    t: u64,
}

impl Adam {
    pub fn new(net: &Mlp, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            v_w: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            m_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            t: 0,
        }
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Gradients) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        let lr = self.learning_rate * c2.sqrt() / c1;
        for l in 0..net.weights.len() {
            update(
                &mut net.weights[l],
                &grads.weights[l],
                &mut self.m_w[l],
                &mut self.v_w[l],
                lr,
                self.beta1,
                self.beta2,
                self.epsilon,
            );
            update(
                &mut net.biases[l],
                &grads.biases[l],
                &mut self.m_b[l],
                &mut self.v_b[l],
                lr,
                self.beta1,
                self.beta2,
                self.epsilon,
            );
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn update(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) {
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        p[i] -= lr * m[i] / (v[i].sqrt() + eps);
    }
}

/// Mean over rows of the squared L2 distance between network output and
/// target; also writes d(loss)/d(output) when a gradient buffer is given.
pub fn squared_error_loss(
    output: &[f64],
    target: &[f64],
    rows: usize,
    dout: Option<&mut [f64]>,
) -> f64 {
    debug_assert_eq!(output.len(), target.len());
    let inv = 1.0 / rows as f64;
    let mut loss = 0.0;
    for (&o, &t) in output.iter().zip(target) {
        let d = o - t;
        loss += d * d;
    }
    if let Some(dout) = dout {
        for ((g, &o), &t) in dout.iter_mut().zip(output).zip(target) {
            *g = 2.0 * (o - t) * inv;
        }
    }
    loss * inv
}


#[cfg(test)]
mod bench {
    use super::*;
    use crate::rng;

    #[test]
    #[ignore]
    fn training_throughput() {
        let mut r = rng::stream(1, &[rng::tag::NET_INIT]);
        let mut net = Mlp::init(&[8, 256, 256, 8], Activation::Tanh, &mut r);
        let rows = 128;
        let x: Vec<f64> = (0..rows * 8).map(|i| (i as f64 * 0.1).sin()).collect();
        let y = x.clone();
        let mut adam = Adam::new(&net, 1e-3);
        let mut bufs = BatchBuffers::new();
        let mut grads = Gradients::zeros_like(&net);
        let mut dout = vec![0.0; rows * 8];
        let steps = 2000;
        let t0 = std::time::Instant::now();
        for _ in 0..steps {
            net.forward_batch(&x, rows, &mut bufs);
            squared_error_loss(net.output(&bufs, rows), &y, rows, Some(&mut dout));
            grads.zero();
            net.backward_batch(rows, &dout, &mut bufs, &mut grads);
            adam.step(&mut net, &grads);
        }
        let dt = t0.elapsed().as_secs_f64();
        let flops = steps as f64 * rows as f64 * 6.0 * (8.0*256.0 + 256.0*256.0 + 256.0*8.0);
        println!(
            "{} steps x {} rows in {:.2}s = {:.1} steps/s, ~{:.1} GFLOP/s",
            steps, rows, dt, steps as f64 / dt, flops / dt / 1e9
        );
        println!("5000-step training at batch 128 would take {:.1}s", 5000.0 / (steps as f64 / dt));
    }
}
