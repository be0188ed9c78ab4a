//! Dense helpers for the small square matrices that appear in generators and
//! oracles. Matrices are row-major `n × n` slices.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

/// Determinant by LU decomposition with partial pivoting.
pub fn det(a: &[f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    match n {
        0 => return 1.0,
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        _ => {}
    }
    let mut lu = a.to_vec();
    let mut sign = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = lu[col * n + col].abs();
        for row in col + 1..n {
            let v = lu[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                lu.swap(col * n + k, pivot * n + k);
            }
            sign = -sign;
        }
        let diag = lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] / diag;
            if factor != 0.0 {
                for k in col + 1..n {
                    lu[row * n + k] -= factor * lu[col * n + k];
                }
            }
        }
    }
    let mut d = sign;
    for i in 0..n {
        d *= lu[i * n + i];
    }
    d
}

/// Cofactor matrix, `out[i][j] = (-1)^(i+j) det(minor(i, j))`. This is the
/// gradient of `det` with respect to the entries of `a` and stays well defined
/// for singular matrices.
pub fn cofactor(a: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(out.len(), n * n);
    if n == 1 {
        out[0] = 1.0;
        return;
    }
    let m = n - 1;
    let mut minor = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let mut idx = 0;
            for r in (0..n).filter(|&r| r != i) {
                for c in (0..n).filter(|&c| c != j) {
                    minor[idx] = a[r * n + c];
                    idx += 1;
                }
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            out[i * n + j] = sign * det(&minor, m);
        }
    }
}

/// Replaces `a` by `(a + aᵀ) / 2`.
pub fn symmetrize(a: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
}

/// `tr(a b)` for square `a`, `b`.
pub fn trace_product(a: &[f64], b: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            acc += a[j * n + k] * b[k * n + j];
        }
    }
    acc
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out = a x` for an `rows × cols` matrix.
pub fn matvec(a: &[f64], x: &[f64], rows: usize, cols: usize, out: &mut [f64]) {
    for r in 0..rows {
        out[r] = dot(&a[r * cols..(r + 1) * cols], x);
    }
}

/// `a b` for square matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

pub fn transpose(a: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[i * n + i] = 1.0;
    }
    out
}

pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_matches_closed_forms() {
        assert_eq!(det(&[2.0], 1), 2.0);
        assert_eq!(det(&[1.0, 2.0, 3.0, 4.0], 2), -2.0);
        let a = [2.0, -3.0, 1.0, 2.0, 0.0, -1.0, 1.0, 4.0, 5.0];
        assert!((det(&a, 3) - 49.0).abs() < 1e-12);
        // needs a row swap
        let b = [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 3.0];
        assert!((det(&b, 3) + 3.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_determinant_vanishes() {
        let n = 5;
        let mut a = vec![0.0; n * n];
        for v in a.iter_mut() {
            *v = -0.3;
        }
        assert!(det(&a, n).abs() < 1e-15);
    }

    #[test]
    fn cofactor_is_det_gradient() {
        let a = [1.5, 0.2, -0.4, 0.1, 2.0, 0.3, -0.7, 0.5, 1.1];
        let mut cof = [0.0; 9];
        cofactor(&a, 3, &mut cof);
        let h = 1e-6;
        for k in 0..9 {
            let mut p = a;
            let mut m = a;
            p[k] += h;
            m[k] -= h;
            let fd = (det(&p, 3) - det(&m, 3)) / (2.0 * h);
            assert!((fd - cof[k]).abs() < 1e-8, "entry {k}");
        }
    }
}
