//! Dense linear algebra for very small systems.

/// Eigen-decomposition of a symmetric matrix of size at most 3 by cyclic Jacobi
/// rotations. Returns eigenvalues in decreasing order with matching unit eigenvectors
/// (as columns).
pub fn symmetric_eigen(m: &[[f64; 3]; 3], dim: usize) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v = [[0.0; 3]; 3];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..30 {
        let off: f64 = (0..dim).flat_map(|p| (p + 1..dim).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        let scale: f64 = (0..dim).map(|p| a[p][p] * a[p][p]).sum::<f64>() + off;
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut().take(dim) {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let mut vals = [0.0; 3];
    let mut vecs = [[0.0; 3]; 3];
    for (col, &src) in order.iter().enumerate() {
        vals[col] = a[src][src];
        for r in 0..dim {
            vecs[r][col] = v[r][src];
        }
    }
    (vals, vecs)
}

/// Solves the linear least-squares problem `min |A x - b|` through the normal equations
/// with partial-pivoting elimination. `rows` holds the rows of `A` with `b` appended.
pub fn least_squares(rows: &[Vec<f64>], ncols: usize) -> Option<Vec<f64>> {
    let mut ata = vec![vec![0.0; ncols + 1]; ncols];
    for row in rows {
        for i in 0..ncols {
            for j in 0..=ncols {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    solve_augmented(ata)
}

/// Solves a square system given as rows of `A` with `b` appended.
pub fn solve_augmented(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn jacobi_two_by_two() {
        let m = [[2.0 / 3.0, -1.0 / 3.0, 0.0], [-1.0 / 3.0, 2.0 / 3.0, 0.0], [0.0, 0.0, 0.0]];
        let (vals, vecs) = symmetric_eigen(&m, 3);
        assert_relative_eq!(vals[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(vals[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(vals[2], 0.0);
        assert_relative_eq!(vecs[0][0].abs(), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn jacobi_reconstructs_matrix() {
        let m = [[4.0, 1.0, -2.0], [1.0, 2.0, 0.5], [-2.0, 0.5, 3.0]];
        let (vals, v) = symmetric_eigen(&m, 3);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| v[i][k] * vals[k] * v[j][k]).sum();
                assert_relative_eq!(r, m[i][j], epsilon = 1e-13);
            }
        }
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
    }

    #[test]
    fn least_squares_line() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, i as f64, 2.0 + 3.0 * i as f64]).collect();
        let x = least_squares(&rows, 2).unwrap();
        assert_relative_eq!(x[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 3.0, epsilon = 1e-12);
    }
}
