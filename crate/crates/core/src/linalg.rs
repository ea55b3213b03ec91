//! One-sided Jacobi singular values for the small dense matrices that arise
//! from joint distributions.

const MAX_SWEEPS: usize = 100;
const TOL: f64 = 1e-12;

/// Singular values of a row-major `rows × cols` matrix, largest first.
pub fn singular_values(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(a.len(), rows * cols);
    // Column-major working copy with at most as many columns as rows.
    let (m, k, mut w) = if cols <= rows {
        let w: Vec<f64> = (0..cols).flat_map(|j| (0..rows).map(move |i| (i, j))).map(|(i, j)| a[i * cols + j]).collect();
        (rows, cols, w)
    } else {
        (cols, rows, a.to_vec())
    };

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (w[p * m + i], w[q * m + i]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == 0.0 || gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[p * m + i], w[q * m + i]);
                    w[p * m + i] = c * x - s * y;
                    w[q * m + i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = w.chunks(m).map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}
