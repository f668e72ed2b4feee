//! Minimal feed-forward network with sinusoidal time conditioning,
//! hand-written batched backpropagation and an adaptive-moment optimizer.
//!
//! The topology is fixed: the flattened state concatenated with a time
//! embedding, a stack of GELU hidden layers and a linear output head. The
//! head is zero-initialized so an untrained network predicts zero, which
//! keeps reverse processes well-behaved before the first update.

use crate::error::{Error, Result};
use crate::scalar::{cst, Scalar};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use std::io::{BufRead, Write};

/// Sinusoidal embedding of a scalar time in [0, 1]: `dim / 2` geometric
/// frequencies between 1 and 1000, sines then cosines.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeEmbedding<S> {
    freqs: Vec<S>,
}

pub const EMBED_FREQ_MIN: f64 = 1.0;
pub const EMBED_FREQ_MAX: f64 = 1000.0;

impl<S: Scalar> TimeEmbedding<S> {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2 && dim % 2 == 0, "embedding dim must be even");
        let half = dim / 2;
        let freqs = (0..half)
            .map(|k| {
                let exponent = if half == 1 {
                    0.0
                } else {
                    k as f64 / (half - 1) as f64
                };
                cst::<S>(EMBED_FREQ_MIN * (EMBED_FREQ_MAX / EMBED_FREQ_MIN).powf(exponent))
            })
            .collect();
        Self { freqs }
    }

    pub fn dim(&self) -> usize {
        2 * self.freqs.len()
    }

    pub fn write_into(&self, t: S, out: &mut [S]) {
        let half = self.freqs.len();
        for (k, &f) in self.freqs.iter().enumerate() {
            out[k] = (f * t).sin();
            out[half + k] = (f * t).cos();
        }
    }

    pub fn embed(&self, t: S) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim()];
        self.write_into(t, &mut out);
        out
    }
}

fn gelu<S: Scalar>(x: S) -> S {
    // tanh form: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
    let c = cst::<S>(0.7978845608028654);
    let a = cst::<S>(0.044715);
    let u = c * (x + a * x * x * x);
    cst::<S>(0.5) * x * (S::one() + u.tanh())
}

fn gelu_prime<S: Scalar>(x: S) -> S {
    let c = cst::<S>(0.7978845608028654);
    let a = cst::<S>(0.044715);
    let u = c * (x + a * x * x * x);
    let t = u.tanh();
    let sech2 = S::one() - t * t;
    let du = c * (S::one() + cst::<S>(3.0) * a * x * x);
    cst::<S>(0.5) * (S::one() + t) + cst::<S>(0.5) * x * sech2 * du
}

/// MLP with a time-conditioned input layer.
#[derive(Clone, Debug)]
pub struct Network<S: Scalar> {
    state_dim: usize,
    out_dim: usize,
    /// Per-layer input/output widths, `[state + embed, hidden.., out]`.
    dims: Vec<usize>,
    weights: Vec<Array2<S>>,
    biases: Vec<Array1<S>>,
    embed: TimeEmbedding<S>,
    /// Bumped on every parameter update; forward caches record it so a
    /// stale cache cannot silently back-propagate.
    revision: u64,
}

/// Intermediate activations retained for the backward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache<S> {
    activations: Vec<Array2<S>>,
    pre_activations: Vec<Array2<S>>,
    revision: u64,
}

/// Parameter gradients, shaped like the network's weights and biases.
#[derive(Clone, Debug)]
pub struct Gradients<S> {
    pub weights: Vec<Array2<S>>,
    pub biases: Vec<Array1<S>>,
}

impl<S: Scalar> Gradients<S> {
    pub fn scaled(&self, factor: S) -> Self {
        Self {
            weights: self.weights.iter().map(|w| w.mapv(|v| v * factor)).collect(),
            biases: self.biases.iter().map(|b| b.mapv(|v| v * factor)).collect(),
        }
    }
}

impl<S: Scalar> Network<S> {
    /// Uniform fan-in initialization for hidden layers; zero output head.
    pub fn new<R: Rng + ?Sized>(
        state_dim: usize,
        out_dim: usize,
        hidden_dim: usize,
        hidden_layers: usize,
        embed_dim: usize,
        rng: &mut R,
    ) -> Self {
        assert!(hidden_layers >= 1, "need at least one hidden layer");
        let embed = TimeEmbedding::new(embed_dim);
        let mut dims = vec![state_dim + embed.dim()];
        dims.extend(std::iter::repeat(hidden_dim).take(hidden_layers));
        dims.push(out_dim);

        let layers = dims.len() - 1;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let mut w = Array2::zeros((fan_in, fan_out));
            if l + 1 < layers {
                let bound = cst::<S>(1.0 / (fan_in as f64).sqrt());
                for v in w.iter_mut() {
                    let u: S = S::unit_uniform(rng);
                    *v = (u + u - S::one()) * bound;
                }
            }
            weights.push(w);
            biases.push(Array1::zeros(fan_out));
        }
        Self {
            state_dim,
            out_dim,
            dims,
            weights,
            biases,
            embed,
            revision: 0,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    pub fn params_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }

    /// Mutable access to one flat-indexed parameter (weights first, then
    /// biases); used by finite-difference checks.
    pub fn param_mut(&mut self, flat: usize) -> &mut S {
        let mut idx = flat;
        for w in &mut self.weights {
            if idx < w.len() {
                return w.as_slice_mut().expect("contiguous").get_mut(idx).unwrap();
            }
            idx -= w.len();
        }
        for b in &mut self.biases {
            if idx < b.len() {
                return b.as_slice_mut().expect("contiguous").get_mut(idx).unwrap();
            }
            idx -= b.len();
        }
        panic!("parameter index {flat} out of range");
    }

    /// Flat-indexed read access mirroring [`Self::param_mut`].
    pub fn param(&self, flat: usize) -> S {
        let mut idx = flat;
        for w in &self.weights {
            if idx < w.len() {
                return w.as_slice().expect("contiguous")[idx];
            }
            idx -= w.len();
        }
        for b in &self.biases {
            if idx < b.len() {
                return b.as_slice().expect("contiguous")[idx];
            }
            idx -= b.len();
        }
        panic!("parameter index {flat} out of range");
    }

    /// Gradient read by the same flat indexing.
    pub fn grad_at(grads: &Gradients<S>, flat: usize) -> S {
        let mut idx = flat;
        for w in &grads.weights {
            if idx < w.len() {
                return w.as_slice().expect("contiguous")[idx];
            }
            idx -= w.len();
        }
        for b in &grads.biases {
            if idx < b.len() {
                return b.as_slice().expect("contiguous")[idx];
            }
            idx -= b.len();
        }
        panic!("gradient index {flat} out of range");
    }

    fn assemble_input(&self, states: ArrayView2<S>, times: &[S]) -> Result<Array2<S>> {
        if states.ncols() != self.state_dim {
            return Err(Error::DimensionMismatch {
                expected: self.state_dim,
                got: states.ncols(),
            });
        }
        if states.nrows() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: states.nrows(),
                got: times.len(),
            });
        }
        let e = self.embed.dim();
        let mut input = Array2::zeros((states.nrows(), self.state_dim + e));
        for (i, t) in times.iter().enumerate() {
            for j in 0..self.state_dim {
                input[[i, j]] = states[[i, j]];
            }
            let mut row = vec![S::zero(); e];
            self.embed.write_into(*t, &mut row);
            for (j, v) in row.into_iter().enumerate() {
                input[[i, self.state_dim + j]] = v;
            }
        }
        Ok(input)
    }

    /// Batched forward pass retaining the cache for [`Self::backward`].
    pub fn forward_batch(
        &self,
        states: ArrayView2<S>,
        times: &[S],
    ) -> Result<(Array2<S>, ForwardCache<S>)> {
        let input = self.assemble_input(states, times)?;
        let layers = self.weights.len();
        let mut activations = Vec::with_capacity(layers);
        let mut pre_activations = Vec::with_capacity(layers);
        let mut a = input;
        for l in 0..layers {
            activations.push(a.clone());
            let mut z = a.dot(&self.weights[l]);
            for mut row in z.rows_mut() {
                row += &self.biases[l];
            }
            a = if l + 1 < layers {
                let post = z.mapv(gelu);
                pre_activations.push(z);
                post
            } else {
                pre_activations.push(z.clone());
                z
            };
        }
        Ok((
            a,
            ForwardCache {
                activations,
                pre_activations,
                revision: self.revision,
            },
        ))
    }

    /// Forward pass without retaining a cache.
    pub fn predict(&self, states: ArrayView2<S>, times: &[S]) -> Result<Array2<S>> {
        let layers = self.weights.len();
        let mut a = self.assemble_input(states, times)?;
        for l in 0..layers {
            let mut z = a.dot(&self.weights[l]);
            for mut row in z.rows_mut() {
                row += &self.biases[l];
            }
            a = if l + 1 < layers { z.mapv(gelu) } else { z };
        }
        Ok(a)
    }

    /// Single-sample forward pass.
    pub fn forward_one(&self, state: &[S], t: S) -> Result<Vec<S>> {
        let states = Array2::from_shape_vec((1, state.len()), state.to_vec())
            .expect("row shape matches data");
        let out = self.predict(states.view(), &[t])?;
        Ok(out.row(0).to_vec())
    }

    /// Back-propagate `out_grad` (gradient of the loss with respect to the
    /// network output) through a cache produced by the current revision.
    pub fn backward(&self, cache: &ForwardCache<S>, out_grad: ArrayView2<S>) -> Result<Gradients<S>> {
        if cache.revision != self.revision {
            return Err(Error::StaleCache {
                net: self.revision,
                cache: cache.revision,
            });
        }
        let layers = self.weights.len();
        if out_grad.ncols() != self.out_dim || out_grad.nrows() != cache.activations[0].nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim,
                got: out_grad.ncols(),
            });
        }
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        let mut dz = out_grad.to_owned();
        for l in (0..layers).rev() {
            weights.push(cache.activations[l].t().dot(&dz));
            biases.push(dz.sum_axis(Axis(0)));
            if l > 0 {
                let da = dz.dot(&self.weights[l].t());
                dz = da * &cache.pre_activations[l - 1].mapv(gelu_prime);
            }
        }
        weights.reverse();
        biases.reverse();
        Ok(Gradients { weights, biases })
    }

    /// Serialize as a documented plain-text checkpoint. Values use the
    /// shortest round-trip decimal form, so reloading is bit-exact.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "se3align-mlp v1")?;
        writeln!(w, "state_dim {}", self.state_dim)?;
        writeln!(w, "out_dim {}", self.out_dim)?;
        writeln!(w, "embed_dim {}", self.embed.dim())?;
        writeln!(
            w,
            "dims {}",
            self.dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )?;
        for (l, (wm, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            writeln!(w, "tensor w{l} {} {}", wm.nrows(), wm.ncols())?;
            for row in wm.rows() {
                let line = row
                    .iter()
                    .map(|v| format!("{v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                writeln!(w, "{line}")?;
            }
            writeln!(w, "tensor b{l} 1 {}", b.len())?;
            let line = b
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(" ");
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Load a checkpoint written by [`Self::write_checkpoint`].
    pub fn read_checkpoint<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    message: format!("unexpected end of checkpoint, wanted {expect}"),
                }),
            }
        };
        let (line_no, header) = next("header")?;
        if header != "se3align-mlp v1" {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unrecognized checkpoint header '{header}'"),
            });
        }
        let mut field = |name: &str| -> Result<usize> {
            let (line_no, line) = next(name)?;
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next()) {
                (Some(k), Some(v)) if k == name => v.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad {name} value '{v}'"),
                }),
                _ => Err(Error::Parse {
                    line: line_no,
                    message: format!("expected '{name} <value>', got '{line}'"),
                }),
            }
        };
        let state_dim = field("state_dim")?;
        let out_dim = field("out_dim")?;
        let embed_dim = field("embed_dim")?;
        let (dims_line_no, dims_line) = next("dims")?;
        let mut parts = dims_line.split_whitespace();
        if parts.next() != Some("dims") {
            return Err(Error::Parse {
                line: dims_line_no,
                message: "expected dims line".to_string(),
            });
        }
        let dims: Vec<usize> = parts
            .map(|p| {
                p.parse().map_err(|_| Error::Parse {
                    line: dims_line_no,
                    message: format!("bad dim '{p}'"),
                })
            })
            .collect::<Result<_>>()?;
        if dims.len() < 2 {
            return Err(Error::Parse {
                line: dims_line_no,
                message: "need at least two dims".to_string(),
            });
        }

        let parse_row = |line_no: usize, line: &str, want: usize| -> Result<Vec<S>> {
            let vals: Vec<S> = line
                .split_whitespace()
                .map(|p| {
                    p.parse::<S>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad value '{p}'"),
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != want {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {want} values, got {}", vals.len()),
                });
            }
            Ok(vals)
        };

        let layers = dims.len() - 1;
        let mut weights = Vec::with_capacity(layers);
        let mut biases = Vec::with_capacity(layers);
        for l in 0..layers {
            let (line_no, header) = next("tensor header")?;
            let expected = format!("tensor w{l} {} {}", dims[l], dims[l + 1]);
            if header != expected {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected '{expected}', got '{header}'"),
                });
            }
            let mut w = Array2::zeros((dims[l], dims[l + 1]));
            for r in 0..dims[l] {
                let (line_no, line) = next("weight row")?;
                for (c, v) in parse_row(line_no, &line, dims[l + 1])?.into_iter().enumerate() {
                    w[[r, c]] = v;
                }
            }
            weights.push(w);

            let (line_no, header) = next("bias header")?;
            let expected = format!("tensor b{l} 1 {}", dims[l + 1]);
            if header != expected {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected '{expected}', got '{header}'"),
                });
            }
            let (bl, bline) = next("bias row")?;
            biases.push(Array1::from_vec(parse_row(bl, &bline, dims[l + 1])?));
        }

        let embed = TimeEmbedding::new(embed_dim);
        if state_dim + embed.dim() != dims[0] || out_dim != dims[layers] {
            return Err(Error::Parse {
                line: dims_line_no,
                message: "dims do not match state/embed/out sizes".to_string(),
            });
        }
        Ok(Self {
            state_dim,
            out_dim,
            dims,
            weights,
            biases,
            embed,
            revision: 0,
        })
    }
}

/// Adaptive-moment optimizer state (bias-corrected).
#[derive(Clone, Debug)]
pub struct AdamState<S: Scalar> {
    pub learning_rate: S,
    pub beta1: S,
    pub beta2: S,
    pub epsilon: S,
    pub step: u64,
    m_weights: Vec<Array2<S>>,
    v_weights: Vec<Array2<S>>,
    m_biases: Vec<Array1<S>>,
    v_biases: Vec<Array1<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(net: &Network<S>, learning_rate: S) -> Self {
        Self {
            learning_rate,
            beta1: cst(0.9),
            beta2: cst(0.999),
            epsilon: cst(1e-8),
            step: 0,
            m_weights: net.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_weights: net.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_biases: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_biases: net.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }
}

/// One bias-corrected adaptive-moment update; bumps the network revision.
pub fn adam_step<S: Scalar>(net: &mut Network<S>, grads: &Gradients<S>, state: &mut AdamState<S>) {
    state.step += 1;
    let b1 = state.beta1;
    let b2 = state.beta2;
    let lr = state.learning_rate;
    let eps = state.epsilon;
    let bc1 = S::one() - b1.powi(state.step as i32);
    let bc2 = S::one() - b2.powi(state.step as i32);

    let update = |param: &mut S, g: S, m: &mut S, v: &mut S| {
        *m = b1 * *m + (S::one() - b1) * g;
        *v = b2 * *v + (S::one() - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *param -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for l in 0..net.weights.len() {
        for ((p, &g), (m, v)) in net.weights[l]
            .iter_mut()
            .zip(grads.weights[l].iter())
            .zip(state.m_weights[l].iter_mut().zip(state.v_weights[l].iter_mut()))
        {
            update(p, g, m, v);
        }
        for ((p, &g), (m, v)) in net.biases[l]
            .iter_mut()
            .zip(grads.biases[l].iter())
            .zip(state.m_biases[l].iter_mut().zip(state.v_biases[l].iter_mut()))
        {
            update(p, g, m, v);
        }
    }
    net.revision += 1;
}
