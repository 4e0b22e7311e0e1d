//! Small dense linear algebra: LU with partial pivoting and 2x2 helpers.

use ndarray::{Array1, Array2, ArrayView1};
use num_traits::{Float, Zero};

use crate::scalar::{Cx, Real};

/// LU factorization `P A = L U` of a square real matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Array2<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Returns `None` when a pivot vanishes.
    pub fn factor(mut a: Array2<T>) -> Option<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "LU needs a square matrix");
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (piv, pmax) = (col..n)
                .map(|r| (r, Float::abs(a[[r, col]])))
                .fold((col, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == T::zero() || !pmax.is_finite() {
                return None;
            }
            if piv != col {
                for c in 0..n {
                    a.swap([piv, c], [col, c]);
                }
                perm.swap(piv, col);
            }
            let d = a[[col, col]];
            for r in col + 1..n {
                let f = a[[r, col]] / d;
                a[[r, col]] = f;
                if f != T::zero() {
                    for c in col + 1..n {
                        let v = a[[col, c]];
                        a[[r, c]] = a[[r, c]] - f * v;
                    }
                }
            }
        }
        Some(Self { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    fn solve_generic<S>(&self, b: ArrayView1<S>) -> Array1<S>
    where
        S: Copy + Zero + std::ops::Sub<Output = S> + std::ops::Mul<T, Output = S> + std::ops::Div<T, Output = S>,
    {
        let n = self.dim();
        let mut x: Array1<S> = self.perm.iter().map(|&p| b[p]).collect();
        for r in 0..n {
            let mut s = x[r];
            for c in 0..r {
                s = s - x[c] * self.lu[[r, c]];
            }
            x[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s = s - x[c] * self.lu[[r, c]];
            }
            x[r] = s / self.lu[[r, r]];
        }
        x
    }

    pub fn solve(&self, b: ArrayView1<T>) -> Array1<T> {
        self.solve_generic(b)
    }

    pub fn solve_complex(&self, b: ArrayView1<Cx<T>>) -> Array1<Cx<T>> {
        self.solve_generic(b)
    }
}

/// Real matrix times complex vector.
pub fn matvec_c<T: Real>(a: &Array2<T>, x: ArrayView1<Cx<T>>) -> Array1<Cx<T>> {
    let (n, m) = a.dim();
    debug_assert_eq!(m, x.len());
    let mut y = Array1::from_elem(n, Cx::new(T::zero(), T::zero()));
    for r in 0..n {
        let mut s = Cx::new(T::zero(), T::zero());
        for c in 0..m {
            s = s + x[c] * a[[r, c]];
        }
        y[r] = s;
    }
    y
}

pub fn matmul<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Array2<T> {
    let (n, k) = a.dim();
    let (k2, m) = b.dim();
    assert_eq!(k, k2);
    let mut c = Array2::zeros((n, m));
    for i in 0..n {
        for l in 0..k {
            let ail = a[[i, l]];
            if ail == T::zero() {
                continue;
            }
            for j in 0..m {
                c[[i, j]] = c[[i, j]] + ail * b[[l, j]];
            }
        }
    }
    c
}

/// Complex 2x2 matrix in row-major order.
pub type Mat2<T> = [[Cx<T>; 2]; 2];

pub fn det2<T: Real>(m: &Mat2<T>) -> Cx<T> {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// Solves `m x = b` by Cramer's rule; `None` when the determinant vanishes.
pub fn solve2<T: Real>(m: &Mat2<T>, b: [Cx<T>; 2]) -> Option<[Cx<T>; 2]> {
    let d = det2(m);
    if d.norm() == T::zero() || !d.norm().is_finite() {
        return None;
    }
    Some([
        (b[0] * m[1][1] - m[0][1] * b[1]) / d,
        (m[0][0] * b[1] - m[1][0] * b[0]) / d,
    ])
}

/// Singular values of a complex 2x2 matrix, largest first.
pub fn singular_values2<T: Real>(m: &Mat2<T>) -> (T, T) {
    let fro2 = m.iter().flatten().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b);
    let det = det2(m).norm();
    let two = T::lit(2.0);
    let disc = (fro2 * fro2 - T::lit(4.0) * det * det).max(T::zero()).sqrt();
    let s1 = ((fro2 + disc) / two).sqrt();
    let s2 = if s1 > T::zero() { det / s1 } else { T::zero() };
    (s1, s2)
}

/// 2-norm condition number; infinite for singular matrices.
pub fn cond2<T: Real>(m: &Mat2<T>) -> T {
    let (s1, s2) = singular_values2(m);
    if s2 == T::zero() {
        T::infinity()
    } else {
        s1 / s2
    }
}

/// Eigenvalues of a complex 2x2 matrix.
pub fn eigenvalues2<T: Real>(m: &Mat2<T>) -> [Cx<T>; 2] {
    let half = T::lit(0.5);
    let tr = m[0][0] + m[1][1];
    let det = det2(m);
    let disc = (tr * tr * half * half - det).sqrt();
    [tr * half + disc, tr * half - disc]
}
