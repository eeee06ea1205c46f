//! Small dense linear algebra: symmetric eigen-decompositions and LU solves
//! for the handful-of-unknowns systems that show up pointwise.
//!
//! Matrices are row-major `&[f64]` slices of length `n * n`.

use alloc::vec;
use alloc::vec::Vec;
use libm::{atan2, cos, hypot, sin, sqrt};

use crate::error::{Error, Result};

/// Eigen-decomposition of a symmetric matrix.
///
/// `values` are ascending; `vectors` is row-major with eigenvector `k` stored
/// in column `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

/// Closed-form eigen-decomposition of `[[a, b], [b, c]]`.
///
/// Returns ascending eigenvalues and the matching unit eigenvectors as
/// columns `[[v0x, v1x], [v0y, v1y]]`.
pub fn sym_eigen2(a: f64, b: f64, c: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mean = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    let r = hypot(half_diff, b);
    let theta = 0.5 * atan2(2.0 * b, a - c);
    let (ct, st) = (cos(theta), sin(theta));
    // (ct, st) spans the eigenspace of the larger eigenvalue.
    ([mean - r, mean + r], [[-st, ct], [ct, st]])
}

/// Symmetric eigen-decomposition; closed form for `n <= 2`, cyclic Jacobi
/// otherwise.
pub fn sym_eigen(a: &[f64], n: usize) -> SymEigen {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => SymEigen {
            values: Vec::new(),
            vectors: Vec::new(),
        },
        1 => SymEigen {
            values: vec![a[0]],
            vectors: vec![1.0],
        },
        2 => {
            let (vals, v) = sym_eigen2(a[0], 0.5 * (a[1] + a[2]), a[3]);
            SymEigen {
                values: vals.to_vec(),
                vectors: vec![v[0][0], v[0][1], v[1][0], v[1][1]],
            }
        }
        _ => jacobi(a, n),
    }
}

fn jacobi(a_in: &[f64], n: usize) -> SymEigen {
    let mut a = a_in.to_vec();
    // Force exact symmetry so the rotations never see a skew part.
    for i in 0..n {
        for j in (i + 1)..n {
            let s = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + col] = v[row * n + src];
        }
    }
    SymEigen { values, vectors }
}

pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn trace_product(a: &[f64], b: &[f64], n: usize) -> f64 {
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += a[i * n + j] * b[j * n + i];
        }
    }
    t
}

pub fn frobenius(a: &[f64]) -> f64 {
    sqrt(a.iter().map(|x| x * x).sum())
}

/// Symmetric matrix from an eigenbasis: `V diag(d) Vᵀ`.
pub fn from_eigen(vectors: &[f64], diag: &[f64], n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        for i in 0..n {
            let vik = vectors[i * n + k] * diag[k];
            for j in 0..n {
                m[i * n + j] += vik * vectors[j * n + k];
            }
        }
    }
    m
}

/// Solves `A x = b` in place by LU with partial pivoting; `a` is destroyed.
pub fn lu_solve(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return Err(Error::SingularPivot(k));
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            b.swap(k, piv);
        }
        let d = a[k * n + k];
        for i in (k + 1)..n {
            let m = a[i * n + k] / d;
            if m == 0.0 {
                continue;
            }
            a[i * n + k] = m;
            for j in (k + 1)..n {
                a[i * n + j] -= m * a[k * n + j];
            }
            b[i] -= m * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in (k + 1)..n {
            s -= a[k * n + j] * b[j];
        }
        b[k] = s / a[k * n + k];
    }
    Ok(())
}
