//! Shift-invert Lanczos for the generalized problem `K v = μ M v`.

use super::mesh::Mesh;
use super::sparse::{CsrMatrix, SkylineCholesky};
use super::assemble;
use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigen};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// `μ₀ ≤ μ₁ ≤ … ≤ μ_k`, `μ₀` the numerical kernel.
    pub eigenvalues: Vec<f64>,
    pub area: f64,
    /// Largest edge length of the mesh.
    pub h: f64,
    /// `μ_i · area`.
    pub products: Vec<f64>,
    /// `‖K v − μ M v‖ / ‖M v‖` per eigenpair.
    pub residuals: Vec<f64>,
    pub lanczos_steps: usize,
}

impl SpectralResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,mu,mu_area,residual\n");
        for i in 0..self.eigenvalues.len() {
            out.push_str(&format!(
                "{i},{:.12e},{:.12e},{:.3e}\n",
                self.eigenvalues[i], self.products[i], self.residuals[i]
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_steps: usize,
    /// `σ = −shift_factor · tr(K)/tr(M)`.
    pub shift_factor: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-9,
            max_steps: 400,
            shift_factor: 1e-8,
        }
    }
}

pub fn neumann_eigs(mesh: &Mesh, k: usize) -> Result<SpectralResult> {
    neumann_eigs_with(mesh, k, EigenOptions::default())
}

/// Smallest `k + 1` Neumann eigenvalues of the P1 discretization of `mesh`.
pub fn neumann_eigs_with(mesh: &Mesh, k: usize, opts: EigenOptions) -> Result<SpectralResult> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("need k ≥ 2, got {k}")));
    }
    let a = assemble(mesh)?;
    let (values, residuals, steps) = lanczos_shift_invert(&a.stiffness, &a.mass, k + 1, opts)?;
    let area = mesh.area();
    Ok(SpectralResult {
        products: values.iter().map(|m| m * area).collect(),
        eigenvalues: values,
        area,
        h: mesh.max_edge(),
        residuals,
        lanczos_steps: steps,
    })
}

/// Lanczos on `(K − σM)^{-1} M` in the `M` inner product with full
/// reorthogonalization, extended until the `count` smallest Ritz pairs meet
/// the residual tolerance. Returns eigenvalues, residuals and the number of
/// steps taken.
pub fn lanczos_shift_invert(
    k: &CsrMatrix,
    m: &CsrMatrix,
    count: usize,
    opts: EigenOptions,
) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    let n = k.n;
    if count > n {
        return Err(Error::InvalidInput(format!("{count} eigenvalues requested of a size-{n} problem")));
    }
    let sigma = -opts.shift_factor * k.trace() / m.trace();
    let chol = SkylineCholesky::factor(&k.add_scaled(m, -sigma))?;
    let op = |v: &[f64]| chol.solve(&m.mul(v));
    let m_norm = |v: &[f64]| dot(v, &m.mul(v)).sqrt();

    // constants span the kernel of K on a connected mesh; lock them out
    let ones = vec![1.0; n];
    let c_norm = m_norm(&ones);
    let kernel: Vec<f64> = ones.iter().map(|x| x / c_norm).collect();
    let m_kernel = m.mul(&kernel);
    let project = |w: &mut Vec<f64>| {
        let c = dot(w, &m_kernel);
        w.iter_mut().zip(&kernel).for_each(|(x, q)| *x -= c * q);
    };

    let mut q0: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (0.37 * i as f64 + 0.1).sin()).collect();
    project(&mut q0);
    let s = m_norm(&q0);
    q0.iter_mut().for_each(|x| *x /= s);
    let mut basis: Vec<Vec<f64>> = vec![q0];
    let mut m_basis: Vec<Vec<f64>> = vec![m.mul(&basis[0])];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let wanted = count - 1;
    let max_steps = opts.max_steps.min(n - 1);
    let mut check_at = (3 * wanted + 20).min(max_steps);
    loop {
        let mut exhausted = false;
        while alpha.len() < check_at {
            let j = alpha.len();
            let mut w = op(&basis[j]);
            project(&mut w);
            let a = dot(&w, &m_basis[j]);
            alpha.push(a);
            for _ in 0..2 {
                project(&mut w);
                for (qi, mqi) in basis.iter().zip(&m_basis) {
                    let c = dot(&w, mqi);
                    w.iter_mut().zip(qi).for_each(|(x, q)| *x -= c * q);
                }
            }
            let b = m_norm(&w);
            if b < 1e-14 * a.abs().max(1e-300) || alpha.len() == n - 1 {
                exhausted = true;
                break;
            }
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            m_basis.push(m.mul(&w));
            basis.push(w);
        }
        let steps = alpha.len();
        let mut t = vec![0.0; steps * steps];
        for i in 0..steps {
            t[i * steps + i] = alpha[i];
            if i + 1 < steps {
                t[i * steps + i + 1] = beta[i];
                t[(i + 1) * steps + i] = beta[i];
            }
        }
        let (theta, vecs) = sym_eigen(&t, steps);
        let residual = |x: &[f64], mu: f64| {
            let kx = k.mul(x);
            let mx = m.mul(x);
            let r: f64 = kx.iter().zip(&mx).map(|(a, b)| (a - mu * b).powi(2)).sum::<f64>().sqrt();
            r / dot(&mx, &mx).sqrt()
        };
        let mu0 = dot(&kernel, &k.mul(&kernel));
        let mut values = vec![mu0];
        let mut residuals = vec![residual(&kernel, mu0)];
        for idx in 0..wanted.min(steps) {
            let y = &vecs[idx];
            let mut x = vec![0.0; n];
            for (c, q) in y.iter().zip(&basis) {
                x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += c * qi);
            }
            let mu = sigma + 1.0 / theta[idx];
            values.push(mu);
            residuals.push(residual(&x, mu));
        }
        let converged = values.len() == count
            && residuals
                .iter()
                .zip(&values)
                .skip(1)
                .all(|(r, mu)| *r < opts.tol * mu.abs().max(1.0));
        if converged {
            return Ok((values, residuals, steps));
        }
        if exhausted || check_at >= max_steps {
            return Err(Error::NoConvergence(format!(
                "{steps} Lanczos steps, residuals {residuals:?} for eigenvalues {values:?}"
            )));
        }
        check_at = (check_at + 20).min(max_steps);
    }
}
