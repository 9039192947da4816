//! Noise-prediction network with hand-written backpropagation.
//!
//! Per-point MLP encoder, symmetric max-pool, an optional residual path from
//! pooled raw input statistics, an optional image path, and an MLP head over
//! `(a_k, z, k-embedding, proprio)`.

use super::schedule::{make_schedule, ScheduleKind};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Semantic feature channels carried per point.
pub const FEATURE_DIM: usize = 16;
/// Position (3), attention (1), then the semantic feature.
pub const POINT_DIM: usize = 4 + FEATURE_DIM;
/// Per-channel max and min of the raw point inputs.
pub const STAT_DIM: usize = 2 * POINT_DIM;
pub const PROPRIO_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetConfig {
    pub horizon: usize,
    pub action_dim: usize,
    pub enc_width: usize,
    pub latent_dim: usize,
    pub head_width: usize,
    pub head_layers: usize,
    pub kemb_dim: usize,
    /// Adds the pooled raw statistics to the pooled features.
    pub residual: bool,
    /// Length of the flattened image input; 0 disables the image path.
    pub image_dim: usize,
    /// Modulates each head layer with a scale and shift computed from
    /// `(z, k-embedding, proprio)`.
    pub film: bool,
    /// Length of the linear noise schedule the network is trained for.
    pub denoise_steps: usize,
    /// Output preconditioning: the layers produce `F` and the noise estimate
    /// is `c_skip(k) a_k - c_out(k) F`, with coefficients chosen so `F` is
    /// the clean chunk when the data has variance `data_var` around it.
    pub precondition: bool,
    pub data_var: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            horizon: 16,
            action_dim: 4,
            enc_width: 64,
            latent_dim: 128,
            head_width: 128,
            head_layers: 3,
            kemb_dim: 16,
            residual: true,
            image_dim: 0,
            film: false,
            denoise_steps: 1000,
            precondition: true,
            data_var: 0.05,
        }
    }
}

impl NetConfig {
    pub fn chunk_len(&self) -> usize {
        self.horizon * self.action_dim
    }

    fn cond_dim(&self) -> usize {
        self.latent_dim + self.kemb_dim + PROPRIO_DIM
    }

    fn head_input(&self) -> usize {
        self.chunk_len() + self.cond_dim()
    }
}

/// Dense layer, `y = W x + b` with `W` row-major `out × inp`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub inp: usize,
    pub out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
    let mut i = 0;
    while i + 4 <= n {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
        i += 4;
    }
    while i < n {
        s0 += a[i] * b[i];
        i += 1;
    }
    (s0 + s1) + (s2 + s3)
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl Linear {
    pub fn zeros(inp: usize, out: usize) -> Self {
        Self { inp, out, w: vec![0.0; inp * out], b: vec![0.0; out] }
    }

    /// Uniform init with bound `gain * sqrt(3 / inp)`; gain sqrt(2) suits ReLU layers.
    pub fn init(inp: usize, out: usize, gain: f64, rng: &mut impl Rng) -> Self {
        let bound = gain * (3.0 / inp as f64).sqrt();
        let w = (0..inp * out).map(|_| rng.random_range(-bound..bound)).collect();
        Self { inp, out, w, b: vec![0.0; out] }
    }

    pub fn param_count(&self) -> usize {
        self.w.len() + self.b.len()
    }

    /// Parameter `p` in weights-then-bias order.
    pub fn param_mut(&mut self, p: usize) -> &mut f64 {
        let wl = self.w.len();
        if p < wl {
            &mut self.w[p]
        } else {
            &mut self.b[p - wl]
        }
    }

    pub fn forward(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.inp);
        for (o, yo) in y.iter_mut().enumerate() {
            *yo = self.b[o] + dot(&self.w[o * self.inp..(o + 1) * self.inp], x);
        }
    }

    fn forward_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.out];
        self.forward(x, &mut y);
        y
    }

    /// Accumulates parameter gradients into `grad` and, when asked, writes
    /// the input gradient to `dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Linear, dx: Option<&mut [f64]>) {
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.b[o] += g;
            axpy(g, x, &mut grad.w[o * self.inp..(o + 1) * self.inp]);
        }
        if let Some(dx) = dx {
            dx.iter_mut().for_each(|v| *v = 0.0);
            for (o, &g) in dy.iter().enumerate() {
                if g != 0.0 {
                    axpy(g, &self.w[o * self.inp..(o + 1) * self.inp], dx);
                }
            }
        }
    }
}

fn relu(v: &mut [f64]) {
    v.iter_mut().for_each(|x| *x = x.max(0.0));
}

/// Sinusoidal embedding of the denoising step.
pub fn step_embedding(k: usize, dim: usize) -> Vec<f64> {
    let half = dim / 2;
    let mut e = vec![0.0; dim];
    for i in 0..half {
        let freq = (-(10_000f64.ln()) * i as f64 / half as f64).exp();
        let (s, c) = (k as f64 * freq).sin_cos();
        e[i] = s;
        e[half + i] = c;
    }
    e
}

/// One encoder input: points with `(x, y, z, attention)` channels, an
/// optional flattened image and the proprioceptive state.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub points: Vec<[f64; POINT_DIM]>,
    pub image: Vec<f64>,
    pub proprio: [f64; PROPRIO_DIM],
}

/// Layer order inside [`NoiseNet::layers`].
const ENC1: usize = 0;
const ENC2: usize = 1;
const RES: usize = 2;
const PROJ: usize = 3;
const HEAD: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseNet {
    pub config: NetConfig,
    pub layers: Vec<Linear>,
    /// `(c_skip, c_out)` per step, index `k` (entry 0 unused).
    coeffs: Vec<(f64, f64)>,
}

/// Intermediate values kept from [`NoiseNet::encode`] for the backward pass.
#[derive(Debug, Clone)]
pub struct EncodeCache {
    h1: Vec<f64>,
    h2: Vec<f64>,
    argmax: Vec<usize>,
    stats: Vec<f64>,
    img_h: Vec<f64>,
    pooled: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct HeadCache {
    /// Input to each head layer; the last entry is the input to the output layer.
    inputs: Vec<Vec<f64>>,
    /// Conditioning vector `(z, k-embedding, proprio)`.
    cond: Vec<f64>,
    /// Per hidden layer: pre-modulation activations and `(gamma, beta)`.
    film: Vec<(Vec<f64>, Vec<f64>)>,
    c_out: f64,
}

impl NoiseNet {
    pub fn new(config: NetConfig, rng: &mut impl Rng) -> Self {
        let g = std::f64::consts::SQRT_2;
        let (e, d, w) = (config.enc_width, config.latent_dim, config.head_width);
        let mut layers =
            vec![Linear::init(POINT_DIM, e, g, rng), Linear::init(e, e, g, rng), Linear::init(STAT_DIM, e, 1.0, rng), Linear::init(e, d, 1.0, rng)];
        let mut inp = config.head_input();
        for _ in 0..config.head_layers {
            layers.push(Linear::init(inp, w, g, rng));
            inp = w;
        }
        layers.push(Linear::init(inp, config.chunk_len(), 1.0, rng));
        if config.image_dim > 0 {
            layers.push(Linear::init(config.image_dim, e, g, rng));
        }
        if config.film {
            // zero init: modulation starts as the identity
            for _ in 0..config.head_layers {
                layers.push(Linear::zeros(config.cond_dim(), 2 * w));
            }
        }
        Self::from_layers(config, layers)
    }

    /// Wraps existing parameters; layer shapes are the caller's responsibility.
    pub fn from_layers(config: NetConfig, layers: Vec<Linear>) -> Self {
        let coeffs = make_schedule(config.denoise_steps.max(1), ScheduleKind::Linear)
            .alpha_bars
            .iter()
            .map(|&ab| {
                if !config.precondition {
                    return (0.0, 1.0);
                }
                let d = ab * config.data_var + 1.0 - ab;
                ((1.0 - ab).sqrt() / d, (ab * (1.0 - ab)).sqrt() / d)
            })
            .collect();
        Self { config, layers, coeffs }
    }

    /// Same architecture with every parameter zero; used for gradients.
    pub fn zeros_like(&self) -> Self {
        Self::from_layers(self.config.clone(), self.layers.iter().map(|l| Linear::zeros(l.inp, l.out)).collect())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Linear::param_count).sum()
    }

    fn out_layer(&self) -> usize {
        HEAD + self.config.head_layers
    }

    fn img_layer(&self) -> Option<usize> {
        (self.config.image_dim > 0).then(|| self.out_layer() + 1)
    }

    fn film_layer(&self, i: usize) -> Option<usize> {
        self.config.film.then(|| self.out_layer() + 1 + usize::from(self.config.image_dim > 0) + i)
    }

    pub fn encode(&self, obs: &Observation) -> (Vec<f64>, EncodeCache) {
        let e = self.config.enc_width;
        let n = obs.points.len();
        assert!(n > 0, "observation has no points");
        let mut h1 = vec![0.0; n * e];
        let mut h2 = vec![0.0; n * e];
        for (i, p) in obs.points.iter().enumerate() {
            let a = &mut h1[i * e..(i + 1) * e];
            self.layers[ENC1].forward(p, a);
            relu(a);
            let b = &mut h2[i * e..(i + 1) * e];
            self.layers[ENC2].forward(&h1[i * e..(i + 1) * e], b);
            relu(b);
        }
        let mut argmax = vec![0usize; e];
        let mut pooled = vec![0.0; e];
        for c in 0..e {
            let mut best = 0;
            for i in 1..n {
                if h2[i * e + c] > h2[best * e + c] {
                    best = i;
                }
            }
            argmax[c] = best;
            pooled[c] = h2[best * e + c];
        }
        let mut stats = vec![0.0; STAT_DIM];
        for ch in 0..POINT_DIM {
            let vals = obs.points.iter().map(|p| p[ch]);
            stats[ch] = vals.clone().fold(f64::NEG_INFINITY, f64::max);
            stats[POINT_DIM + ch] = vals.fold(f64::INFINITY, f64::min);
        }
        if self.config.residual {
            axpy(1.0, &self.layers[RES].forward_vec(&stats), &mut pooled);
        }
        let mut img_h = Vec::new();
        if let Some(li) = self.img_layer() {
            assert_eq!(obs.image.len(), self.config.image_dim, "image size does not match the network");
            img_h = self.layers[li].forward_vec(&obs.image);
            relu(&mut img_h);
            axpy(1.0, &img_h, &mut pooled);
        }
        let z = self.layers[PROJ].forward_vec(&pooled);
        (z, EncodeCache { h1, h2, argmax, stats, img_h, pooled })
    }

    pub fn head(&self, a_k: &[f64], z: &[f64], k: usize, proprio: &[f64; PROPRIO_DIM]) -> (Vec<f64>, HeadCache) {
        assert_eq!(a_k.len(), self.config.chunk_len());
        let mut cond = Vec::with_capacity(self.config.cond_dim());
        cond.extend_from_slice(z);
        cond.extend(step_embedding(k, self.config.kemb_dim));
        cond.extend_from_slice(proprio);
        let mut x = Vec::with_capacity(self.config.head_input());
        x.extend_from_slice(a_k);
        x.extend_from_slice(&cond);
        let mut inputs = Vec::with_capacity(self.config.head_layers + 1);
        let mut film = Vec::new();
        for i in 0..self.config.head_layers {
            let mut h = self.layers[HEAD + i].forward_vec(&x);
            if let Some(f) = self.film_layer(i) {
                let gb = self.layers[f].forward_vec(&cond);
                let u = h.clone();
                let w = h.len();
                for j in 0..w {
                    h[j] = (1.0 + gb[j]) * u[j] + gb[w + j];
                }
                film.push((u, gb));
            }
            relu(&mut h);
            inputs.push(std::mem::replace(&mut x, h));
        }
        let mut out = self.layers[self.out_layer()].forward_vec(&x);
        let (c_skip, c_out) = self.coeffs[k.min(self.coeffs.len() - 1)];
        for (o, a) in out.iter_mut().zip(a_k) {
            *o = c_skip * a - c_out * *o;
        }
        inputs.push(x);
        (out, HeadCache { inputs, cond, film, c_out })
    }

    /// Noise estimate for one `(a_k, k)` pair.
    pub fn forward(&self, obs: &Observation, a_k: &[f64], k: usize) -> Vec<f64> {
        let (z, _) = self.encode(obs);
        self.head(a_k, &z, k, &obs.proprio).0
    }

    /// Backpropagates `dout` through the head; returns the gradient w.r.t. `z`.
    pub fn head_backward(&self, cache: &HeadCache, dout: &[f64], grads: &mut NoiseNet) -> Vec<f64> {
        let nl = self.config.head_layers;
        let out = self.out_layer();
        let mut dh = vec![0.0; cache.inputs[nl].len()];
        let dmlp: Vec<f64> = dout.iter().map(|d| -cache.c_out * d).collect();
        self.layers[out].backward(&cache.inputs[nl], &dmlp, &mut grads.layers[out], Some(&mut dh));
        let mut dcond = vec![0.0; cache.cond.len()];
        let mut tmp = vec![0.0; cache.cond.len()];
        for i in (0..nl).rev() {
            // gradient w.r.t. the pre-ReLU value
            let mut dv = dh;
            for (d, &h) in dv.iter_mut().zip(&cache.inputs[i + 1]) {
                if h <= 0.0 {
                    *d = 0.0;
                }
            }
            let du = match self.film_layer(i) {
                Some(f) => {
                    let (u, gb) = &cache.film[i];
                    let w = u.len();
                    let mut dgb = vec![0.0; 2 * w];
                    for j in 0..w {
                        dgb[j] = dv[j] * u[j];
                        dgb[w + j] = dv[j];
                    }
                    self.layers[f].backward(&cache.cond, &dgb, &mut grads.layers[f], Some(&mut tmp));
                    axpy(1.0, &tmp, &mut dcond);
                    dv.iter().zip(&gb[..w]).map(|(d, g)| d * (1.0 + g)).collect()
                }
                None => dv,
            };
            let x = &cache.inputs[i];
            let mut dx = vec![0.0; x.len()];
            self.layers[HEAD + i].backward(x, &du, &mut grads.layers[HEAD + i], Some(&mut dx));
            dh = dx;
        }
        let c = self.config.chunk_len();
        let d = self.config.latent_dim;
        let mut dz = dh[c..c + d].to_vec();
        axpy(1.0, &dcond[..d], &mut dz);
        dz
    }

    pub fn encode_backward(&self, obs: &Observation, cache: &EncodeCache, dz: &[f64], grads: &mut NoiseNet) {
        let e = self.config.enc_width;
        let mut dpooled = vec![0.0; e];
        self.layers[PROJ].backward(&cache.pooled, dz, &mut grads.layers[PROJ], Some(&mut dpooled));
        if self.config.residual {
            self.layers[RES].backward(&cache.stats, &dpooled, &mut grads.layers[RES], None);
        }
        if let Some(li) = self.img_layer() {
            let dimg: Vec<f64> = dpooled.iter().zip(&cache.img_h).map(|(&d, &h)| if h > 0.0 { d } else { 0.0 }).collect();
            self.layers[li].backward(&obs.image, &dimg, &mut grads.layers[li], None);
        }
        // Only argmax points receive gradient through the pool.
        let mut touched: Vec<usize> = cache.argmax.clone();
        touched.sort_unstable();
        touched.dedup();
        let mut dh2 = vec![0.0; e];
        let mut dh1 = vec![0.0; e];
        for &i in &touched {
            dh2.iter_mut().for_each(|v| *v = 0.0);
            for c in 0..e {
                if cache.argmax[c] == i && cache.h2[i * e + c] > 0.0 {
                    dh2[c] = dpooled[c];
                }
            }
            let h1 = &cache.h1[i * e..(i + 1) * e];
            self.layers[ENC2].backward(h1, &dh2, &mut grads.layers[ENC2], Some(&mut dh1));
            for (d, &v) in dh1.iter_mut().zip(h1) {
                if v <= 0.0 {
                    *d = 0.0;
                }
            }
            self.layers[ENC1].backward(&obs.points[i], &dh1, &mut grads.layers[ENC1], None);
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.w.iter().chain(l.b.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(|l| l.w.iter_mut().chain(l.b.iter_mut()))
    }

    /// Names of the parameter blocks, in [`Self::layers`] order.
    pub fn layer_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["enc1", "enc2", "residual", "proj"].iter().map(|s| s.to_string()).collect();
        names.extend((0..self.config.head_layers).map(|i| format!("head{i}")));
        names.push("out".into());
        if self.config.image_dim > 0 {
            names.push("image".into());
        }
        if self.config.film {
            names.extend((0..self.config.head_layers).map(|i| format!("film{i}")));
        }
        names
    }
}

/// Mean squared error over one batch and its gradients. Each entry is
/// `(observation, [(k, a_k, eps)])`: several noise draws may share one
/// encoding.
pub fn batch_loss_and_grad(net: &NoiseNet, batch: &[(&Observation, Vec<(usize, Vec<f64>, Vec<f64>)>)], grads: &mut NoiseNet) -> f64 {
    let count: usize = batch.iter().map(|(_, d)| d.len()).sum();
    let denom = (count * net.config.chunk_len()) as f64;
    let mut loss = 0.0;
    for (obs, draws) in batch {
        let (z, enc) = net.encode(obs);
        let mut dz = vec![0.0; z.len()];
        for (k, a_k, eps) in draws {
            let (out, hc) = net.head(a_k, &z, *k, &obs.proprio);
            let dout: Vec<f64> = out
                .iter()
                .zip(eps)
                .map(|(o, e)| {
                    loss += (o - e) * (o - e);
                    2.0 * (o - e) / denom
                })
                .collect();
            axpy(1.0, &net.head_backward(&hc, &dout, grads), &mut dz);
        }
        net.encode_backward(obs, &enc, &dz, grads);
    }
    loss / denom
}
