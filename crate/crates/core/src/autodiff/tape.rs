//! Scalar reverse-mode tape.
//!
//! Every elementary operation appends one node holding its value and the
//! local partials with respect to at most two parents. The backward sweep
//! walks the node list once, from the output down to the leaves.

use std::cell::RefCell;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::jet::Jet2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
struct Node {
    value: f64,
    parents: [(usize, f64); 2],
    arity: u8,
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    slots: usize,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// A tape whose first `theta.len()` nodes are the parameter slots.
    pub fn with_params(theta: &[f64]) -> Self {
        let nodes = theta
            .iter()
            .map(|&value| Node {
                value,
                parents: [(0, 0.0); 2],
                arity: 0,
            })
            .collect();
        Self {
            nodes: RefCell::new(nodes),
            slots: theta.len(),
        }
    }

    pub fn n_slots(&self) -> usize {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slot(&self, i: usize) -> Result<Var<'_>> {
        if i >= self.slots {
            return Err(Error::Autodiff(format!(
                "parameter slot {i} was never seeded (tape has {} slots)",
                self.slots
            )));
        }
        Ok(Var { tape: self, idx: i })
    }

    pub fn slots(&self) -> Vec<Var<'_>> {
        (0..self.slots).map(|idx| Var { tape: self, idx }).collect()
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(value, &[])
    }

    fn push(&self, value: f64, parents: &[(usize, f64)]) -> Var<'_> {
        let mut node = Node {
            value,
            parents: [(0, 0.0); 2],
            arity: parents.len() as u8,
        };
        node.parents[..parents.len()].copy_from_slice(parents);
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(node);
        Var {
            tape: self,
            idx: nodes.len() - 1,
        }
    }

    /// Adjoints of `output` with respect to the parameter slots.
    pub fn gradient(&self, output: Var<'_>) -> Result<Vec<f64>> {
        if !std::ptr::eq(output.tape, self) {
            return Err(Error::Autodiff("output variable belongs to another tape".into()));
        }
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; output.idx + 1];
        adj[output.idx] = 1.0;
        for i in (0..=output.idx).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            let node = &nodes[i];
            for &(p, w) in &node.parents[..node.arity as usize] {
                adj[p] += a * w;
            }
        }
        adj.resize(self.slots.max(adj.len()), 0.0);
        adj.truncate(self.slots);
        Ok(adj)
    }
}

/// A scalar recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    idx: usize,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var#{}({})", self.idx, self.value())
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.tape.nodes.borrow()[self.idx].value
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    fn unary(self, value: f64, d: f64) -> Var<'t> {
        self.tape.push(value, &[(self.idx, d)])
    }

    pub fn tanh(self) -> Var<'t> {
        let u = self.value().tanh();
        self.unary(u, 1.0 - u * u)
    }

    pub fn exp(self) -> Var<'t> {
        let e = self.value().exp();
        self.unary(e, e)
    }

    pub fn ln(self) -> Var<'t> {
        let x = self.value();
        self.unary(x.ln(), 1.0 / x)
    }

    pub fn sqrt(self) -> Var<'t> {
        let s = self.value().sqrt();
        self.unary(s, 0.5 / s)
    }

    pub fn cos(self) -> Var<'t> {
        let x = self.value();
        self.unary(x.cos(), -x.sin())
    }

    pub fn sin(self) -> Var<'t> {
        let x = self.value();
        self.unary(x.sin(), x.cos())
    }

    pub fn atan(self) -> Var<'t> {
        let x = self.value();
        self.unary(x.atan(), 1.0 / (1.0 + x * x))
    }

    pub fn square(self) -> Var<'t> {
        let x = self.value();
        self.unary(x * x, 2.0 * x)
    }

    pub fn powi(self, n: i32) -> Var<'t> {
        let x = self.value();
        self.unary(x.powi(n), n as f64 * x.powi(n - 1))
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.tape
            .push(self.value() + rhs.value(), &[(self.idx, 1.0), (rhs.idx, 1.0)])
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.tape
            .push(self.value() - rhs.value(), &[(self.idx, 1.0), (rhs.idx, -1.0)])
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        let (a, b) = (self.value(), rhs.value());
        self.tape.push(a * b, &[(self.idx, b), (rhs.idx, a)])
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let (a, b) = (self.value(), rhs.value());
        self.tape
            .push(a / b, &[(self.idx, 1.0 / b), (rhs.idx, -a / (b * b))])
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(-self.value(), -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() / rhs, 1.0 / rhs)
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        rhs * self
    }
}

/// Sum of a non-empty slice of recorded values.
pub fn sum<'t>(tape: &'t Tape, xs: &[Var<'t>]) -> Var<'t> {
    xs.iter()
        .copied()
        .reduce(|a, b| a + b)
        .unwrap_or_else(|| tape.constant(0.0))
}

/// A [`Jet2`] whose three components live on a tape, so that losses built
/// from time derivatives can be differentiated with respect to parameters.
#[derive(Debug, Clone, Copy)]
pub struct JetVar<'t> {
    pub v: Var<'t>,
    pub d1: Var<'t>,
    pub d2: Var<'t>,
}

impl<'t> JetVar<'t> {
    pub fn constant(tape: &'t Tape, j: Jet2) -> Self {
        Self {
            v: tape.constant(j.v),
            d1: tape.constant(j.d1),
            d2: tape.constant(j.d2),
        }
    }

    pub fn value(&self) -> Jet2 {
        Jet2::new(self.v.value(), self.d1.value(), self.d2.value())
    }

    pub fn add(self, rhs: JetVar<'t>) -> Self {
        Self {
            v: self.v + rhs.v,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
        }
    }

    pub fn sub(self, rhs: JetVar<'t>) -> Self {
        Self {
            v: self.v - rhs.v,
            d1: self.d1 - rhs.d1,
            d2: self.d2 - rhs.d2,
        }
    }

    pub fn add_scalar(self, c: Var<'t>) -> Self {
        Self { v: self.v + c, ..self }
    }

    /// Multiplication by a time-independent recorded scalar.
    pub fn scale(self, s: Var<'t>) -> Self {
        Self {
            v: self.v * s,
            d1: self.d1 * s,
            d2: self.d2 * s,
        }
    }

    pub fn mul(self, rhs: JetVar<'t>) -> Self {
        Self {
            v: self.v * rhs.v,
            d1: self.d1 * rhs.v + self.v * rhs.d1,
            d2: self.d2 * rhs.v + (self.d1 * rhs.d1) * 2.0 + self.v * rhs.d2,
        }
    }

    pub fn tanh(self) -> Self {
        let u = self.v.tanh();
        let s = (u * u) * -1.0 + 1.0;
        let d1 = s * self.d1;
        let d2 = s * self.d2 - (u * d1 * self.d1) * 2.0;
        Self { v: u, d1, d2 }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Self {
            v: e,
            d1: e * self.d1,
            d2: e * self.d2 + e * self.d1.square(),
        }
    }

    pub fn cos(self) -> Self {
        let c = self.v.cos();
        let s = self.v.sin();
        Self {
            v: c,
            d1: -(s * self.d1),
            d2: -(s * self.d2) - c * self.d1.square(),
        }
    }
}

/// Value and gradient of a scalar function recorded on a fresh tape seeded with `theta`.
pub fn grad<F>(f: F, theta: &[f64]) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> FnOnce(&'t Tape) -> Result<Var<'t>>,
{
    let tape = Tape::with_params(theta);
    let out = f(&tape)?;
    let value = out.value();
    let g = tape.gradient(out)?;
    Ok((value, g))
}

/// Largest relative deviation between `analytic` and central differences of `f`
/// over the sampled coordinates: `|a - fd| / (|a| + 1e-12)`.
pub fn check_gradient<F>(f: F, theta: &[f64], analytic: &[f64], h: f64, coords: &[usize]) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    assert!(h > 0.0, "finite-difference step must be positive");
    let mut x = theta.to_vec();
    coords
        .iter()
        .map(|&i| {
            let orig = x[i];
            x[i] = orig + h;
            let fp = f(&x);
            x[i] = orig - h;
            let fm = f(&x);
            x[i] = orig;
            let fd = (fp - fm) / (2.0 * h);
            (analytic[i] - fd).abs() / (analytic[i].abs() + 1e-12)
        })
        .fold(0.0, f64::max)
}
