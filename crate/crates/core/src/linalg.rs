//! Small dense symmetric solves for the reduced normal equations (at most
//! 4x4), kept generic over the scalar type.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major square matrix of side `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }
}

/// Cholesky factorisation `A = L L^T`; `None` when `A` is not numerically
/// positive definite.
pub fn cholesky<T: Real>(a: &SquareMatrix<T>) -> Option<SquareMatrix<T>> {
    let n = a.size();
    let mut l = SquareMatrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d = d - l.get(j, k) * l.get(j, k);
        }
        if !(d > T::zero()) {
            return None;
        }
        let djj = d.sqrt();
        l.set(j, j, djj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s = s - l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / djj);
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
#[allow(clippy::needless_range_loop)] // triangular index ranges read clearer as loops
pub fn cholesky_solve<T: Real>(l: &SquareMatrix<T>, b: &[T]) -> Vec<T> {
    let n = l.size();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - l.get(i, k) * y[k];
        }
        y[i] = s / l.get(i, i);
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s = s - l.get(k, i) * x[k];
        }
        x[i] = s / l.get(i, i);
    }
    x
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Real>(a: &SquareMatrix<T>) -> Vec<T> {
    let n = a.size();
    let mut m = a.clone();
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m.get(i, j) * m.get(i, j);
            }
        }
        let diag: T = (0..n).map(|i| m.get(i, i) * m.get(i, i)).sum();
        if off <= T::epsilon() * T::epsilon() * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let theta = (m.get(q, q) - m.get(p, p)) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = (t * t + T::one()).sqrt().recip();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m.get(k, p), m.get(k, q));
                    m.set(k, p, c * mkp - s * mkq);
                    m.set(k, q, s * mkp + c * mkq);
                }
                for k in 0..n {
                    let (mpk, mqk) = (m.get(p, k), m.get(q, k));
                    m.set(p, k, c * mpk - s * mqk);
                    m.set(q, k, s * mpk + c * mqk);
                }
            }
        }
    }
    (0..n).map(|i| m.get(i, i)).collect()
}

/// 2-norm condition number of a symmetric positive semi-definite matrix;
/// infinite when the smallest eigenvalue is not positive.
pub fn spd_condition<T: Real>(a: &SquareMatrix<T>) -> T {
    let eig = symmetric_eigenvalues(a);
    let max = eig.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let min = eig.iter().fold(T::infinity(), |m, &v| m.min(v));
    if min > T::zero() {
        max / min
    } else {
        T::infinity()
    }
}

/// Least-squares solve of `A x ~ b` for a tall `rows x cols` matrix given
/// column-wise, through the normal equations with unit-norm column
/// equilibration. Errors when the equilibrated normal matrix has a
/// condition estimate above `max_condition`.
pub fn normal_equations_solve<T: Real>(columns: &[Vec<T>], b: &[T], max_condition: T) -> Result<Vec<T>> {
    let n = columns.len();
    let rows = b.len();
    if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
        return Err(Error::Dimension {
            expected: rows,
            got: bad.len(),
        });
    }
    let norms: Vec<T> = columns
        .iter()
        .map(|c| c.iter().map(|&v| v * v).sum::<T>().sqrt())
        .collect();
    if norms.iter().any(|&v| !(v > T::zero()) || !v.is_finite()) {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let unit: Vec<Vec<T>> = columns
        .iter()
        .zip(&norms)
        .map(|(c, &s)| c.iter().map(|&v| v / s).collect())
        .collect();
    let mut normal = SquareMatrix::zeros(n);
    let mut rhs = vec![T::zero(); n];
    for i in 0..n {
        for j in 0..=i {
            let v: T = unit[i].iter().zip(&unit[j]).map(|(&a, &b)| a * b).sum();
            normal.set(i, j, v);
            normal.set(j, i, v);
        }
        rhs[i] = unit[i].iter().zip(b).map(|(&a, &b)| a * b).sum();
    }
    let condition = spd_condition(&normal);
    if !(condition <= max_condition) {
        return Err(Error::Singular {
            condition: condition.to_f64_lossy(),
        });
    }
    let l = cholesky(&normal).ok_or(Error::Singular {
        condition: condition.to_f64_lossy(),
    })?;
    let y = cholesky_solve(&l, &rhs);
    Ok(y.iter().zip(&norms).map(|(&v, &s)| v / s).collect())
}
