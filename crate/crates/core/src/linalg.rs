//! Constant-coefficient symmetric tridiagonal solves for the
//! Crank-Nicolson steps. The forward-elimination factors depend only on
//! the matrix, so they are computed once per solver and reused each step.

use std::ops::{Add, Div, Mul, Sub};

pub trait LinScalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Default
{
}

impl LinScalar for f64 {}
impl LinScalar for num_complex::Complex64 {}

/// Solver for (diag, off, off) tridiagonal systems A x = d with constant
/// diagonal `a` and constant sub/super diagonal `b`.
#[derive(Debug, Clone)]
pub struct ConstTridiag<T> {
    b: T,
    /// modified super-diagonal coefficients c'_i
    cp: Vec<T>,
    /// reciprocals of the pivot denominators
    denom: Vec<T>,
}

impl<T: LinScalar> ConstTridiag<T> {
    pub fn new(a: T, b: T, n: usize) -> Self {
        let mut cp = Vec::with_capacity(n);
        let mut denom = Vec::with_capacity(n);
        let mut prev_cp = T::default();
        for i in 0..n {
            let den = if i == 0 { a } else { a - b * prev_cp };
            let c = b / den;
            cp.push(c);
            denom.push(den);
            prev_cp = c;
        }
        ConstTridiag { b, cp, denom }
    }

    pub fn len(&self) -> usize {
        self.cp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cp.is_empty()
    }

    /// Solve in place: `d` holds the right-hand side on entry and the
    /// solution on return.
    pub fn solve_in_place(&self, d: &mut [T]) {
        let n = self.cp.len();
        assert_eq!(d.len(), n);
        for i in 1..n {
            d[i] = (d[i] - self.b * d[i - 1]) / self.denom[i];
        }
        d[0] = d[0] / self.denom[0];
        for i in (0..n - 1).rev() {
            d[i] = d[i] - self.cp[i] * d[i + 1];
        }
    }
}

/// y = (a I + b L) x for the second-difference stencil L x_i =
/// x_{i-1} - 2 x_i + x_{i+1} with homogeneous Dirichlet neighbours.
pub fn apply_tridiag<T: LinScalar>(a: T, b: T, x: &[T], y: &mut [T]) {
    let n = x.len();
    for i in 0..n {
        let left = if i > 0 { x[i - 1] } else { T::default() };
        let right = if i + 1 < n { x[i + 1] } else { T::default() };
        y[i] = a * x[i] + b * (left + right);
    }
}
