//! Collocation operators on the cosine-clustered nodes of `[0, 1]`.
//!
//! Nodes are `y_m = (1 - cos(pi m / n)) / 2`, `m = 0..=n`. Internally the
//! Chebyshev variable is `x = 1 - 2y = cos(pi m / n)`, so `d/dy = -2 d/dx`.

use ndarray::Array2;

use crate::linalg::matmul;
use crate::scalar::Real;

/// Dense operators acting on nodal values in `y`.
#[derive(Clone, Debug)]
pub struct YOperators<T> {
    pub nodes: Vec<T>,
    pub d1: Array2<T>,
    pub d2: Array2<T>,
    pub d3: Array2<T>,
    /// Fourth derivative as `d2 * d2`.
    pub d4: Array2<T>,
    /// Cumulative integral from `y = 0`.
    pub cumint: Array2<T>,
    /// Clenshaw-Curtis weights on `[0, 1]`.
    pub weights: Vec<T>,
}

pub fn nodes<T: Real>(ny: usize) -> Vec<T> {
    let n = ny - 1;
    (0..ny)
        .map(|m| {
            if m == 0 {
                T::zero()
            } else if m == n {
                T::one()
            } else {
                // (1 - cos t)/2 = sin^2(t/2), free of cancellation near y = 0
                let s = (T::PI() * T::from_index(m) / T::from_index(2 * n)).sin();
                s * s
            }
        })
        .collect()
}

/// First-derivative collocation matrix in `y`.
pub fn diff_matrix<T: Real>(ny: usize) -> Array2<T> {
    let n = ny - 1;
    let c = |j: usize| if j == 0 || j == n { T::lit(2.0) } else { T::one() };
    let mut d = Array2::zeros((ny, ny));
    for i in 0..ny {
        for j in 0..ny {
            if i != j {
                let sign = if (i + j) % 2 == 0 { T::one() } else { -T::one() };
                // x_i - x_j via the product formula keeps full relative accuracy
                let a = T::PI() * T::from_index(i + j) / T::from_index(2 * n);
                let b = T::PI() * (T::from_index(j) - T::from_index(i)) / T::from_index(2 * n);
                let dx = T::lit(2.0) * a.sin() * b.sin();
                d[[i, j]] = c(i) / c(j) * sign / dx;
            }
        }
    }
    for i in 0..ny {
        let s = (0..ny).filter(|&j| j != i).fold(T::zero(), |acc, j| acc + d[[i, j]]);
        d[[i, i]] = -s;
    }
    // map x -> y
    d.mapv_inplace(|v| v * T::lit(-2.0));
    d
}

/// Nodal values -> Chebyshev coefficients in `x = 1 - 2y`.
pub fn values_to_coeffs<T: Real>(f: &[T]) -> Vec<T> {
    let ny = f.len();
    let n = ny - 1;
    let nn = T::from_index(n);
    (0..ny)
        .map(|k| {
            let mut s = T::zero();
            for (m, &fm) in f.iter().enumerate() {
                let w = if m == 0 || m == n { T::lit(0.5) } else { T::one() };
                let arg = T::PI() * T::from_index((k * m) % (2 * n)) / nn;
                s = s + w * fm * arg.cos();
            }
            let ck = if k == 0 || k == n { T::lit(2.0) } else { T::one() };
            T::lit(2.0) * s / (nn * ck)
        })
        .collect()
}

/// Matrix mapping nodal values of `f` to nodal values of `int_0^y f`.
pub fn cumulative_integration_matrix<T: Real>(ny: usize) -> Array2<T> {
    let n = ny - 1;
    let nn = T::from_index(n);
    let mut q = Array2::zeros((ny, ny));
    let mut unit = vec![T::zero(); ny];
    for col in 0..ny {
        unit.iter_mut().for_each(|v| *v = T::zero());
        unit[col] = T::one();
        let a = values_to_coeffs(&unit);
        let at = |i: usize| if i <= n { a[i] } else { T::zero() };
        // antiderivative coefficients b_0..=b_{n+1} in x
        let mut b = vec![T::zero(); n + 2];
        b[1] = at(0) - at(2) / T::lit(2.0);
        for k in 2..=n + 1 {
            b[k] = (at(k - 1) - at(k + 1)) / (T::lit(2.0) * T::from_index(k));
        }
        let f_at_one: T = b.iter().copied().sum();
        for m in 0..ny {
            let mut fx = T::zero();
            for (k, &bk) in b.iter().enumerate() {
                let arg = T::PI() * T::from_index((k * m) % (2 * n)) / nn;
                fx = fx + bk * arg.cos();
            }
            q[[m, col]] = (f_at_one - fx) / T::lit(2.0);
        }
    }
    q
}

/// Clenshaw-Curtis weights for `int_0^1 f dy` on the nodes (closed form).
pub fn clenshaw_curtis_weights<T: Real>(ny: usize) -> Vec<T> {
    let n = ny - 1;
    let nn = T::from_index(n);
    (0..ny)
        .map(|m| {
            let theta = T::PI() * T::from_index(m) / nn;
            let mut s = T::one();
            for j in 1..=n / 2 {
                let bj = if 2 * j == n { T::one() } else { T::lit(2.0) };
                let denom = T::from_index(4 * j * j) - T::one();
                s = s - bj / denom * (T::from_index(2 * j) * theta).cos();
            }
            let cm = if m == 0 || m == n { T::one() } else { T::lit(2.0) };
            // weights on [-1, 1] halved for [0, 1]
            cm / nn * s / T::lit(2.0)
        })
        .collect()
}

impl<T: Real> YOperators<T> {
    pub fn new(ny: usize) -> Self {
        let d1 = diff_matrix::<T>(ny);
        let d2 = matmul(&d1, &d1);
        let d3 = matmul(&d1, &d2);
        let d4 = matmul(&d2, &d2);
        Self {
            nodes: nodes(ny),
            cumint: cumulative_integration_matrix(ny),
            weights: clenshaw_curtis_weights(ny),
            d1,
            d2,
            d3,
            d4,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn deriv(&self, order: usize) -> Option<&Array2<T>> {
        match order {
            1 => Some(&self.d1),
            2 => Some(&self.d2),
            3 => Some(&self.d3),
            4 => Some(&self.d4),
            _ => None,
        }
    }
}
