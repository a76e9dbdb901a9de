//! Small dense linear algebra: symmetric eigendecomposition and least squares.
//!
//! Everything here operates on matrices of the phase-space dimension
//! (N <= 12), so a cyclic Jacobi sweep is both simpler and more robust than
//! pulling in a general-purpose solver.

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues, sorted descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors; `vectors[k]` pairs with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi rotations on a symmetric `n x n` matrix (row-major).
///
/// Converges quadratically; 30 sweeps is far beyond what n <= 12 needs.
pub fn eigh(matrix: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    // v holds eigenvectors as columns: v[i*n + k] = component i of eigenvector k.
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-15 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..30 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= tol {
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
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = c * apj - s * aqj;
                    a[q * n + j] = s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j].partial_cmp(&a[i * n + i]).expect("eigenvalues are finite")
    });

    let values: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| (0..n).map(|i| v[i * n + k]).collect())
        .collect();
    SymmetricEigen { values, vectors }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Solve the normal equations for a small dense least-squares problem:
/// columns of `basis` (each of length m) fit `target`. Gaussian elimination
/// with partial pivoting; fine for a handful of coefficients.
pub fn least_squares(basis: &[Vec<f64>], target: &[f64]) -> Vec<f64> {
    let k = basis.len();
    let mut ata = vec![0.0; k * k];
    let mut atb = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            ata[i * k + j] = dot(&basis[i], &basis[j]);
        }
        atb[i] = dot(&basis[i], target);
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&a, &b| {
                ata[a * k + col].abs().partial_cmp(&ata[b * k + col].abs()).unwrap()
            })
            .unwrap();
        if pivot != col {
            for j in 0..k {
                ata.swap(col * k + j, pivot * k + j);
            }
            atb.swap(col, pivot);
        }
        let d = ata[col * k + col];
        for r in (col + 1)..k {
            let f = ata[r * k + col] / d;
            for j in col..k {
                ata[r * k + j] -= f * ata[col * k + j];
            }
            atb[r] -= f * atb[col];
        }
    }
    let mut x = vec![0.0; k];
    for col in (0..k).rev() {
        let mut s = atb[col];
        for j in (col + 1)..k {
            s -= ata[col * k + j] * x[j];
        }
        x[col] = s / ata[col * k + col];
    }
    x
}
