//! Small dense helpers: symmetric eigen-decomposition and linear solves for
//! the (n+1)×(n+1) matrices that show up in moment computations.

/// Eigen-decomposition of a symmetric `d×d` row-major matrix by cyclic Jacobi.
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// (as rows).
pub fn sym_eigen(matrix: &[f64], d: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), d * d);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..d {
            diag += a[i * d + i] * a[i * d + i];
            for j in (i + 1)..d {
                off += a[i * d + j] * a[i * d + j];
            }
        }
        if off <= 1e-32 * diag.max(1e-300) {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]));
    let values = order.iter().map(|&i| a[i * d + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..d).map(|k| v[k * d + i]).collect())
        .collect();
    (values, vectors)
}

/// Solves `A x = b` for a small dense row-major `A` with partial pivoting.
/// Returns `None` for a (numerically) singular matrix.
pub fn solve_dense(matrix: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let d = rhs.len();
    let mut a = matrix.to_vec();
    let mut b = rhs.to_vec();
    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
            .unwrap();
        if a[piv * d + col].abs() < 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..d {
                a.swap(col * d + k, piv * d + k);
            }
            b.swap(col, piv);
        }
        for row in (col + 1)..d {
            let f = a[row * d + col] / a[col * d + col];
            for k in col..d {
                a[row * d + k] -= f * a[col * d + k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let mut s = b[row];
        for k in (row + 1)..d {
            s -= a[row * d + k] * x[k];
        }
        x[row] = s / a[row * d + row];
    }
    Some(x)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the tangent space `x^⊥` of the unit sphere at `x`,
/// positively oriented in the sense that `det[x, v_1, …, v_n] > 0`.
pub fn tangent_frame(x: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    let mut candidates: Vec<usize> = (0..d).collect();
    candidates.sort_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()));
    for &c in &candidates {
        if basis.len() == d - 1 {
            break;
        }
        let mut v = vec![0.0; d];
        v[c] = 1.0;
        let px = dot(&v, x);
        for k in 0..d {
            v[k] -= px * x[k];
        }
        for b in &basis {
            let pb = dot(&v, b);
            for k in 0..d {
                v[k] -= pb * b[k];
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|t| *t /= nv);
            basis.push(v);
        }
    }
    let mut m = Vec::with_capacity(d * d);
    m.extend_from_slice(x);
    for b in &basis {
        m.extend_from_slice(b);
    }
    if determinant(&m, d) < 0.0 {
        basis[0].iter_mut().for_each(|t| *t = -*t);
    }
    basis
}

pub fn determinant(matrix: &[f64], d: usize) -> f64 {
    let mut a = matrix.to_vec();
    let mut det = 1.0;
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| a[i * d + col].abs().total_cmp(&a[j * d + col].abs()))
            .unwrap();
        if a[piv * d + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..d {
                a.swap(col * d + k, piv * d + k);
            }
            det = -det;
        }
        det *= a[col * d + col];
        for row in (col + 1)..d {
            let f = a[row * d + col] / a[col * d + col];
            for k in col..d {
                a[row * d + k] -= f * a[col * d + k];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs_matrix() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 1.0];
        let (vals, vecs) = sym_eigen(&m, 3);
        assert!(vals[0] >= vals[1] && vals[1] >= vals[2]);
        for i in 0..3 {
            for j in 0..3 {
                let r: f64 = (0..3).map(|k| vals[k] * vecs[k][i] * vecs[k][j]).sum();
                assert!((r - m[i * 3 + j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_solve_and_singular() {
        let a = [2.0, 1.0, 1.0, 3.0];
        let x = solve_dense(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve_dense(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn tangent_frames_are_oriented() {
        let x = [0.0, 0.6, 0.0, 0.8];
        let f = tangent_frame(&x);
        let mut m = x.to_vec();
        for v in &f {
            assert!(dot(v, &x).abs() < 1e-14);
            m.extend_from_slice(v);
        }
        assert!((determinant(&m, 4) - 1.0).abs() < 1e-12);
    }
}
