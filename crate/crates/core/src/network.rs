//! Fully connected tanh network mapping time to cases.
//!
//! Parameters live in one flat vector: every weight matrix first (row-major,
//! `out × in`, in layer order), then every bias vector. Hidden layers use
//! `tanh`, the output layer is linear.
//!
//! Besides the scalar [`NetParams::forward`] and [`NetParams::forward_jet`]
//! there is a batched pass ([`Batch`]) that pushes value and both time
//! derivatives for many time points through the layers with matrix products
//! and runs the matching reverse pass over the parameters.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{Jet2, JetVar, Tape};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetShape {
    widths: Vec<usize>,
}

impl Default for NetShape {
    fn default() -> Self {
        Self {
            widths: vec![1, 32, 32, 1],
        }
    }
}

/// Location of one layer inside the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub w_offset: usize,
    pub b_offset: usize,
}

impl NetShape {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::invalid("a network needs at least an input and an output width"));
        }
        if widths[0] != 1 || *widths.last().unwrap() != 1 {
            return Err(Error::invalid(format!("input and output widths must be 1, got {widths:?}")));
        }
        if widths.contains(&0) {
            return Err(Error::invalid(format!("zero-width layer in {widths:?}")));
        }
        Ok(Self { widths })
    }

    /// `hidden` tanh layers of `nodes` units each.
    pub fn uniform(hidden: usize, nodes: usize) -> Result<Self> {
        let mut w = vec![1];
        w.extend(std::iter::repeat(nodes).take(hidden));
        w.push(1);
        Self::new(w)
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn n_layers(&self) -> usize {
        self.widths.len() - 1
    }

    pub fn n_weights(&self) -> usize {
        self.widths.windows(2).map(|w| w[0] * w[1]).sum()
    }

    pub fn n_biases(&self) -> usize {
        self.widths[1..].iter().sum()
    }

    pub fn n_params(&self) -> usize {
        self.n_weights() + self.n_biases()
    }

    pub fn layers(&self) -> Vec<Layer> {
        let mut w_offset = 0;
        let mut b_offset = self.n_weights();
        self.widths
            .windows(2)
            .map(|w| {
                let l = Layer {
                    fan_in: w[0],
                    fan_out: w[1],
                    w_offset,
                    b_offset,
                };
                w_offset += w[0] * w[1];
                b_offset += w[1];
                l
            })
            .collect()
    }

    pub fn max_width(&self) -> usize {
        *self.widths.iter().max().unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub shape: NetShape,
    pub theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    shape: Vec<usize>,
    seed: Option<u64>,
    theta: Vec<f64>,
}

impl NetParams {
    pub fn new(shape: NetShape, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != shape.n_params() {
            return Err(Error::Dimension {
                expected: shape.n_params(),
                actual: theta.len(),
            });
        }
        Ok(Self { shape, theta })
    }

    pub fn zeros(shape: NetShape) -> Self {
        let theta = vec![0.0; shape.n_params()];
        Self { shape, theta }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(shape: NetShape, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = vec![0.0; shape.n_params()];
        for l in shape.layers() {
            let a = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
            for w in &mut theta[l.w_offset..l.w_offset + l.fan_in * l.fan_out] {
                *w = rng.random_range(-a..a);
            }
        }
        Self { shape, theta }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn forward(&self, t: f64) -> f64 {
        let layers = self.shape.layers();
        let mut a = vec![t];
        for (k, l) in layers.iter().enumerate() {
            let w = &self.theta[l.w_offset..l.w_offset + l.fan_in * l.fan_out];
            let b = &self.theta[l.b_offset..l.b_offset + l.fan_out];
            let hidden = k + 1 < layers.len();
            a = (0..l.fan_out)
                .map(|i| {
                    let row = &w[i * l.fan_in..(i + 1) * l.fan_in];
                    let z = row.iter().zip(&a).fold(0.0, |acc, (w, x)| acc + w * x) + b[i];
                    if hidden { z.tanh() } else { z }
                })
                .collect();
        }
        a[0]
    }

    /// `(x, ẋ, ẍ)` at `t`; the value component equals [`Self::forward`] bit for bit.
    pub fn forward_jet(&self, t: f64) -> Jet2 {
        let layers = self.shape.layers();
        let mut a = vec![Jet2::variable(t)];
        for (k, l) in layers.iter().enumerate() {
            let w = &self.theta[l.w_offset..l.w_offset + l.fan_in * l.fan_out];
            let b = &self.theta[l.b_offset..l.b_offset + l.fan_out];
            let hidden = k + 1 < layers.len();
            a = (0..l.fan_out)
                .map(|i| {
                    let row = &w[i * l.fan_in..(i + 1) * l.fan_in];
                    let z = row
                        .iter()
                        .zip(&a)
                        .fold(Jet2::constant(0.0), |acc, (w, x)| acc + x.scale(*w))
                        + b[i];
                    if hidden { z.tanh() } else { z }
                })
                .collect();
        }
        a[0]
    }

    /// The same jet recorded on `tape`, whose first slots hold `theta`.
    pub fn forward_jet_on_tape<'t>(&self, tape: &'t Tape, t: f64) -> Result<JetVar<'t>> {
        if tape.n_slots() < self.theta.len() {
            return Err(Error::Dimension {
                expected: self.theta.len(),
                actual: tape.n_slots(),
            });
        }
        let layers = self.shape.layers();
        let mut a = vec![JetVar::constant(tape, Jet2::variable(t))];
        for (k, l) in layers.iter().enumerate() {
            let hidden = k + 1 < layers.len();
            let mut next = Vec::with_capacity(l.fan_out);
            for i in 0..l.fan_out {
                let mut z = JetVar::constant(tape, Jet2::constant(0.0));
                for (j, x) in a.iter().enumerate() {
                    z = z.add(x.scale(tape.slot(l.w_offset + i * l.fan_in + j)?));
                }
                z = z.add_scalar(tape.slot(l.b_offset + i)?);
                next.push(if hidden { z.tanh() } else { z });
            }
            a = next;
        }
        Ok(a[0])
    }

    pub fn save(&self, path: &Path, seed: Option<u64>) -> Result<()> {
        let ck = Checkpoint {
            shape: self.shape.widths.clone(),
            seed,
            theta: self.theta.clone(),
        };
        fs::write(path, serde_json::to_string_pretty(&ck)?)?;
        Ok(())
    }

    /// Returns the parameters and the recorded seed, if any.
    pub fn load(path: &Path) -> Result<(Self, Option<u64>)> {
        let ck: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?)?;
        let p = Self::new(NetShape::new(ck.shape)?, ck.theta)?;
        Ok((p, ck.seed))
    }

    /// Reorders the units of hidden layer `hidden` (1-based) by `perm`,
    /// moving incoming rows, biases and outgoing columns together.
    pub fn permute_hidden(&self, hidden: usize, perm: &[usize]) -> Result<Self> {
        let layers = self.shape.layers();
        if hidden == 0 || hidden >= layers.len() {
            return Err(Error::invalid(format!("no hidden layer {hidden}")));
        }
        let (inc, out) = (layers[hidden - 1], layers[hidden]);
        if perm.len() != inc.fan_out {
            return Err(Error::Dimension {
                expected: inc.fan_out,
                actual: perm.len(),
            });
        }
        let mut theta = self.theta.clone();
        for (new, &old) in perm.iter().enumerate() {
            for j in 0..inc.fan_in {
                theta[inc.w_offset + new * inc.fan_in + j] = self.theta[inc.w_offset + old * inc.fan_in + j];
            }
            theta[inc.b_offset + new] = self.theta[inc.b_offset + old];
            for i in 0..out.fan_out {
                theta[out.w_offset + i * out.fan_in + new] = self.theta[out.w_offset + i * out.fan_in + old];
            }
        }
        Self::new(self.shape.clone(), theta)
    }
}

/// Number of Taylor components carried by a [`Batch`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// value only
    Value = 1,
    /// value, first and second time derivative
    Jet = 3,
}

/// Activations of a batched pass over fixed time points.
///
/// Every layer buffer is a row-major `(order·n) × width` matrix whose rows
/// are grouped by component: `n` value rows, then `n` first-derivative
/// rows, then `n` second-derivative rows.
#[derive(Debug, Clone)]
pub struct Batch {
    n: usize,
    order: Order,
    shape: NetShape,
    z: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
    g: Vec<f64>,
    g_prev: Vec<f64>,
}

impl Batch {
    pub fn new(shape: &NetShape, t: &[f64], order: Order) -> Self {
        let n = t.len();
        let nc = order as usize;
        let mut input = vec![0.0; nc * n];
        input[..n].copy_from_slice(t);
        if nc == 3 {
            input[n..2 * n].fill(1.0);
        }
        let mut a = vec![input];
        let mut z = Vec::new();
        for &w in &shape.widths()[1..] {
            z.push(vec![0.0; nc * n * w]);
            a.push(vec![0.0; nc * n * w]);
        }
        let big = nc * n * shape.max_width();
        Self {
            n,
            order,
            shape: shape.clone(),
            z,
            a,
            g: vec![0.0; big],
            g_prev: vec![0.0; big],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn value(&self, i: usize) -> f64 {
        self.a.last().unwrap()[i]
    }

    /// Output jet at point `i`; derivative parts are zero for [`Order::Value`].
    pub fn jet(&self, i: usize) -> Jet2 {
        let out = self.a.last().unwrap();
        match self.order {
            Order::Value => Jet2::constant(out[i]),
            Order::Jet => Jet2::new(out[i], out[self.n + i], out[2 * self.n + i]),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.a.last().unwrap()[..self.n]
    }

    /// Runs the forward pass for the network parameters at the head of `theta`.
    pub fn forward(&mut self, theta: &[f64]) {
        let n = self.n;
        let nc = self.order as usize;
        let rows = nc * n;
        let layers = self.shape.layers();
        assert!(theta.len() >= self.shape.n_params(), "parameter length");
        for (k, l) in layers.iter().enumerate() {
            let w = &theta[l.w_offset..];
            let b = &theta[l.b_offset..l.b_offset + l.fan_out];
            let (a_in, a_out) = self.a.split_at_mut(k + 1);
            let a_in = &a_in[k];
            let z = &mut self.z[k];
            // Z = A Wᵀ
            unsafe {
                matrixmultiply::dgemm(
                    rows,
                    l.fan_in,
                    l.fan_out,
                    1.0,
                    a_in.as_ptr(),
                    l.fan_in as isize,
                    1,
                    w.as_ptr(),
                    1,
                    l.fan_in as isize,
                    0.0,
                    z.as_mut_ptr(),
                    l.fan_out as isize,
                    1,
                );
            }
            for r in 0..n {
                for (zi, bi) in z[r * l.fan_out..(r + 1) * l.fan_out].iter_mut().zip(b) {
                    *zi += bi;
                }
            }
            let a = &mut a_out[0];
            if k + 1 == layers.len() {
                a.copy_from_slice(z);
                continue;
            }
            let m = n * l.fan_out;
            for e in 0..m {
                let u = z[e].tanh();
                a[e] = u;
                if nc == 3 {
                    let s = 1.0 - u * u;
                    let z1 = z[m + e];
                    let a1 = s * z1;
                    a[m + e] = a1;
                    a[2 * m + e] = s * z[2 * m + e] - 2.0 * u * a1 * z1;
                }
            }
        }
    }

    /// Accumulates into the head of `grad` the parameter gradient of
    /// `Σ seed · output`, where `seed` holds one adjoint per output component
    /// (component-major, `order·n` entries). Needs a preceding
    /// [`Self::forward`] with the same `theta`.
    pub fn backward(&mut self, theta: &[f64], seed: &[f64], grad: &mut [f64]) {
        let n = self.n;
        let nc = self.order as usize;
        let rows = nc * n;
        assert_eq!(seed.len(), rows, "seed length");
        assert!(grad.len() >= self.shape.n_params(), "gradient length");
        let layers = self.shape.layers();
        self.g[..rows].copy_from_slice(seed);
        for k in (0..layers.len()).rev() {
            let l = layers[k];
            let g = &mut self.g[..rows * l.fan_out];
            if k + 1 < layers.len() {
                // adjoint through tanh, in place
                let z = &self.z[k];
                let a = &self.a[k + 1];
                let m = n * l.fan_out;
                for e in 0..m {
                    let u = a[e];
                    let s = 1.0 - u * u;
                    if nc == 1 {
                        g[e] *= s;
                        continue;
                    }
                    let (g0, g1, g2) = (g[e], g[m + e], g[2 * m + e]);
                    let (z1, z2) = (z[m + e], z[2 * m + e]);
                    let us = u * s;
                    g[e] = g0 * s - 2.0 * us * (g1 * z1 + g2 * z2) - 2.0 * g2 * s * z1 * z1 * (s - 2.0 * u * u);
                    g[m + e] = g1 * s - 4.0 * us * g2 * z1;
                    g[2 * m + e] = g2 * s;
                }
            }
            let a_in = &self.a[k];
            // dW += Gᵀ A
            unsafe {
                matrixmultiply::dgemm(
                    l.fan_out,
                    rows,
                    l.fan_in,
                    1.0,
                    g.as_ptr(),
                    1,
                    l.fan_out as isize,
                    a_in.as_ptr(),
                    l.fan_in as isize,
                    1,
                    1.0,
                    grad[l.w_offset..].as_mut_ptr(),
                    l.fan_in as isize,
                    1,
                );
            }
            let gb = &mut grad[l.b_offset..l.b_offset + l.fan_out];
            for r in 0..n {
                for (acc, gi) in gb.iter_mut().zip(&g[r * l.fan_out..(r + 1) * l.fan_out]) {
                    *acc += gi;
                }
            }
            if k == 0 {
                break;
            }
            // G_prev = G W
            let w = &theta[l.w_offset..];
            unsafe {
                matrixmultiply::dgemm(
                    rows,
                    l.fan_out,
                    l.fan_in,
                    1.0,
                    g.as_ptr(),
                    l.fan_out as isize,
                    1,
                    w.as_ptr(),
                    l.fan_in as isize,
                    1,
                    0.0,
                    self.g_prev.as_mut_ptr(),
                    l.fan_in as isize,
                    1,
                );
            }
            std::mem::swap(&mut self.g, &mut self.g_prev);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{check_gradient, sum};
    use proptest::prelude::*;
    use rand::Rng;

    fn random_params(shape: NetShape, seed: u64) -> NetParams {
        // nonzero biases so every code path is exercised
        let mut p = NetParams::init(shape, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
        let nw = p.shape.n_weights();
        for b in &mut p.theta[nw..] {
            *b = rng.random_range(-0.5..0.5);
        }
        p
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(NetShape::default().n_params(), 1153);
        assert_eq!(NetShape::default().n_weights(), 1088);
        assert_eq!(NetShape::default().n_biases(), 65);
        assert_eq!(NetShape::new(vec![1, 2, 1]).unwrap().n_params(), 7);
        assert_eq!(NetShape::uniform(2, 8).unwrap().n_params(), 97);
        for hidden in 1..=2 {
            for nodes in [2, 4, 8, 16, 32] {
                let s = NetShape::uniform(hidden, nodes).unwrap();
                let closed = if hidden == 1 { 3 * nodes + 1 } else { nodes * nodes + 4 * nodes + 1 };
                assert_eq!(s.n_params(), closed);
                assert_eq!(NetParams::init(s, 0).len(), closed);
            }
        }
    }

    #[test]
    fn shape_validation() {
        assert!(NetShape::new(vec![2, 4, 1]).is_err());
        assert!(NetShape::new(vec![1, 0, 1]).is_err());
        assert!(NetShape::new(vec![1]).is_err());
        assert!(NetParams::new(NetShape::default(), vec![0.0; 3]).is_err());
    }

    #[test]
    fn init_is_deterministic_glorot() {
        let a = NetParams::init(NetShape::default(), 3);
        assert_eq!(a, NetParams::init(NetShape::default(), 3));
        assert_ne!(a, NetParams::init(NetShape::default(), 4));
        for l in a.shape.layers() {
            let lim = (6.0 / (l.fan_in + l.fan_out) as f64).sqrt();
            let w = &a.theta[l.w_offset..l.w_offset + l.fan_in * l.fan_out];
            assert!(w.iter().all(|x| x.abs() <= lim));
            assert!(a.theta[l.b_offset..l.b_offset + l.fan_out].iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn trivial_networks() {
        let z = NetParams::zeros(NetShape::default());
        assert_eq!(z.forward(0.7), 0.0);
        assert_eq!(z.forward_jet(0.7), Jet2::new(0.0, 0.0, 0.0));
        let mut b = z.clone();
        let last = b.theta.len() - 1;
        b.theta[last] = 0.5;
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(b.forward(t), 0.5);
        }
        let id = NetParams::new(NetShape::new(vec![1, 1]).unwrap(), vec![1.0, 0.0]).unwrap();
        assert_eq!(id.forward_jet(0.4), Jet2::new(0.4, 1.0, 0.0));
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        let h = 1e-4;
        for seed in 0..10 {
            let p = random_params(NetShape::default(), seed);
            for &t in &[0.05, 0.4, 0.93] {
                let j = p.forward_jet(t);
                assert_eq!(j.v.to_bits(), p.forward(t).to_bits());
                let (fp, f0, fm) = (p.forward(t + h), p.forward(t), p.forward(t - h));
                let d1 = (fp - fm) / (2.0 * h);
                let d2 = (fp - 2.0 * f0 + fm) / (h * h);
                assert!((j.d1 - d1).abs() / (j.d1.abs() + 1e-12) < 1e-5);
                // second differences lose digits; compare against differenced first derivatives
                let d2b = (p.forward_jet(t + h).d1 - p.forward_jet(t - h).d1) / (2.0 * h);
                assert!((j.d2 - d2b).abs() / (j.d2.abs() + 1e-12) < 1e-5);
                assert!((j.d2 - d2).abs() < 1e-3 * (1.0 + j.d2.abs()));
            }
        }
    }

    #[test]
    fn batch_forward_matches_scalar_jets() {
        let p = random_params(NetShape::default(), 5);
        let t: Vec<f64> = (0..37).map(|i| i as f64 / 36.0).collect();
        let mut b = Batch::new(&p.shape, &t, Order::Jet);
        b.forward(&p.theta);
        let mut v = Batch::new(&p.shape, &t, Order::Value);
        v.forward(&p.theta);
        for (i, &ti) in t.iter().enumerate() {
            let j = p.forward_jet(ti);
            let bj = b.jet(i);
            assert!((j.v - bj.v).abs() < 1e-13);
            assert!((j.d1 - bj.d1).abs() < 1e-11 * (1.0 + j.d1.abs()));
            assert!((j.d2 - bj.d2).abs() < 1e-11 * (1.0 + j.d2.abs()));
            assert!((v.value(i) - j.v).abs() < 1e-13);
        }
    }

    #[test]
    fn batch_backward_matches_tape() {
        for shape in [NetShape::default(), NetShape::uniform(1, 4).unwrap(), NetShape::uniform(3, 5).unwrap()] {
            let p = random_params(shape, 9);
            let t = [0.0, 0.21, 0.5, 0.77, 1.0];
            let n = t.len();
            let seed: Vec<f64> = (0..3 * n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();

            let mut b = Batch::new(&p.shape, &t, Order::Jet);
            b.forward(&p.theta);
            let mut g = vec![0.0; p.len()];
            b.backward(&p.theta, &seed, &mut g);

            let tape = Tape::with_params(&p.theta);
            let mut terms = Vec::new();
            for (i, &ti) in t.iter().enumerate() {
                let j = p.forward_jet_on_tape(&tape, ti).unwrap();
                terms.push(j.v * seed[i]);
                terms.push(j.d1 * seed[n + i]);
                terms.push(j.d2 * seed[2 * n + i]);
            }
            let out = sum(&tape, &terms);
            let g_tape = tape.gradient(out).unwrap();
            for (a, b) in g.iter().zip(&g_tape) {
                assert!((a - b).abs() <= 1e-11 * (1.0 + b.abs()), "{a} vs {b}");
            }

            // value-only order is the first block of the jet pass
            let mut bv = Batch::new(&p.shape, &t, Order::Value);
            bv.forward(&p.theta);
            let mut gv = vec![0.0; p.len()];
            bv.backward(&p.theta, &seed[..n], &mut gv);
            let mut gj = vec![0.0; p.len()];
            let mut s3 = seed[..n].to_vec();
            s3.extend(vec![0.0; 2 * n]);
            b.backward(&p.theta, &s3, &mut gj);
            for (a, b) in gv.iter().zip(&gj) {
                assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn batch_gradient_matches_finite_differences() {
        let p = random_params(NetShape::default(), 21);
        let t: Vec<f64> = (0..20).map(|i| i as f64 / 19.0).collect();
        let f = |theta: &[f64]| {
            let q = NetParams::new(p.shape.clone(), theta.to_vec()).unwrap();
            t.iter().map(|&ti| {
                let j = q.forward_jet(ti);
                j.v * j.v + 0.01 * j.d1 * j.d1 + 1e-4 * j.d2 * j.d2
            }).sum::<f64>()
        };
        let mut b = Batch::new(&p.shape, &t, Order::Jet);
        b.forward(&p.theta);
        let n = t.len();
        let mut seed = vec![0.0; 3 * n];
        for i in 0..n {
            let j = b.jet(i);
            seed[i] = 2.0 * j.v;
            seed[n + i] = 0.02 * j.d1;
            seed[2 * n + i] = 2e-4 * j.d2;
        }
        let mut g = vec![0.0; p.len()];
        b.backward(&p.theta, &seed, &mut g);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let coords: Vec<usize> = (0..20).map(|_| rng.random_range(0..p.len())).collect();
        let err = check_gradient(f, &p.theta, &g, 1e-5, &coords);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn hidden_permutation_leaves_output_unchanged() {
        let p = random_params(NetShape::default(), 2);
        let mut perm: Vec<usize> = (0..32).collect();
        perm.reverse();
        perm.swap(3, 17);
        let q = p.permute_hidden(1, &perm).unwrap().permute_hidden(2, &perm).unwrap();
        assert_ne!(p.theta, q.theta);
        for t in [0.0, 0.33, 0.8] {
            assert!((p.forward(t) - q.forward(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let p = random_params(NetShape::default(), 8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        p.save(&path, Some(8)).unwrap();
        let (q, seed) = NetParams::load(&path).unwrap();
        assert_eq!(seed, Some(8));
        assert_eq!(p, q);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn value_component_is_forward(seed in 0u64..1000, t in -1.0f64..2.0) {
            let p = random_params(NetShape::uniform(2, 6).unwrap(), seed);
            prop_assert_eq!(p.forward(t).to_bits(), p.forward_jet(t).v.to_bits());
        }
    }
}
