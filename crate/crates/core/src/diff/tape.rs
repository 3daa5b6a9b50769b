//! Minimal reverse-mode tape over real scalars.
//!
//! Every node has at most two parents. Values built only from constants never
//! touch the tape.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::Real;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Node {
    parents: [u32; 2],
    partials: [f64; 2],
}

#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tape({} nodes)", self.len())
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// A new independent variable.
    pub fn var(&self, x: f64) -> Var<'_> {
        let idx = self.push([NONE, NONE], [0.0, 0.0]);
        Var {
            val: x,
            node: Some((self, idx)),
        }
    }

    fn push(&self, parents: [u32; 2], partials: [f64; 2]) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = u32::try_from(nodes.len()).expect("tape exceeds u32 nodes");
        nodes.push(Node { parents, partials });
        idx
    }

    /// Adjoints of every node with respect to `output`.
    pub fn adjoints(&self, output: Var<'_>) -> Adjoints {
        let nodes = self.nodes.borrow();
        let mut adj = vec![0.0; nodes.len()];
        if let Some((_, out)) = output.node {
            adj[out as usize] = 1.0;
            for k in (0..=out as usize).rev() {
                let a = adj[k];
                if a == 0.0 {
                    continue;
                }
                let node = nodes[k];
                for (p, d) in node.parents.iter().zip(node.partials) {
                    if *p != NONE {
                        adj[*p as usize] += a * d;
                    }
                }
            }
        }
        Adjoints(adj)
    }
}

pub struct Adjoints(Vec<f64>);

impl Adjoints {
    /// Derivative with respect to `v`; zero for constants.
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        v.node.map_or(0.0, |(_, i)| self.0[i as usize])
    }
}

#[derive(Clone, Copy)]
pub struct Var<'t> {
    val: f64,
    node: Option<(&'t Tape, u32)>,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some((_, i)) => write!(f, "Var({}, #{i})", self.val),
            None => write!(f, "Var({})", self.val),
        }
    }
}

impl<'t> Var<'t> {
    pub fn constant(x: f64) -> Self {
        Self { val: x, node: None }
    }

    pub fn is_constant(&self) -> bool {
        self.node.is_none()
    }

    fn unary(self, val: f64, d: f64) -> Self {
        match self.node {
            None => Self::constant(val),
            Some((t, i)) => Self {
                val,
                node: Some((t, t.push([i, NONE], [d, 0.0]))),
            },
        }
    }

    fn binary(self, other: Self, val: f64, da: f64, db: f64) -> Self {
        let node = match (self.node, other.node) {
            (None, None) => None,
            (Some((t, i)), None) => Some((t, t.push([i, NONE], [da, 0.0]))),
            (None, Some((t, j))) => Some((t, t.push([j, NONE], [db, 0.0]))),
            (Some((t, i)), Some((_, j))) => Some((t, t.push([i, j], [da, db]))),
        };
        Self { val, node }
    }
}

impl Add for Var<'_> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, self.val + rhs.val, 1.0, 1.0)
    }
}

impl Sub for Var<'_> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, self.val - rhs.val, 1.0, -1.0)
    }
}

impl Mul for Var<'_> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, self.val * rhs.val, rhs.val, self.val)
    }
}

impl Div for Var<'_> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q = self.val / rhs.val;
        self.binary(rhs, q, 1.0 / rhs.val, -q / rhs.val)
    }
}

impl Neg for Var<'_> {
    type Output = Self;
    fn neg(self) -> Self {
        self.unary(-self.val, -1.0)
    }
}

impl Add<f64> for Var<'_> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        self.unary(self.val + rhs, 1.0)
    }
}

impl Sub<f64> for Var<'_> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        self.unary(self.val - rhs, 1.0)
    }
}

impl Mul<f64> for Var<'_> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.unary(self.val * rhs, rhs)
    }
}

impl Div<f64> for Var<'_> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self.unary(self.val / rhs, 1.0 / rhs)
    }
}

impl Real for Var<'_> {
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    fn value(self) -> f64 {
        self.val
    }
    fn exp(self) -> Self {
        let e = self.val.exp();
        self.unary(e, e)
    }
    fn ln(self) -> Self {
        self.unary(self.val.ln(), 1.0 / self.val)
    }
    fn sqrt(self) -> Self {
        let r = self.val.sqrt();
        self.unary(r, if r > 0.0 { 0.5 / r } else { 0.0 })
    }
    fn tanh(self) -> Self {
        let t = self.val.tanh();
        self.unary(t, 1.0 - t * t)
    }
    fn powi(self, n: i32) -> Self {
        let d = if n == 0 { 0.0 } else { n as f64 * self.val.powi(n - 1) };
        self.unary(self.val.powi(n), d)
    }
}
