//! Conformal automorphisms of the disk and the ball, reflections, and the
//! renormalization solver.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, solve_dense};
use crate::measures::{disk_features, pairwise_sum, DiscreteMeasure, DiskPoint, Space};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// `d_ξ(z) = (z + ξ)/(ξ̄ z + 1)`.
#[inline]
pub fn disk_moebius(xi: DiskPoint, z: DiskPoint) -> DiskPoint {
    (z + xi) / (xi.conj() * z + 1.0)
}

/// Derivative of [`disk_moebius`] in `z`.
#[inline]
pub fn disk_moebius_prime(xi: DiskPoint, z: DiskPoint) -> DiskPoint {
    let den = xi.conj() * z + 1.0;
    (1.0 - xi.norm_sqr()) / (den * den)
}

/// Ball automorphism
/// `d_ξ(x) = ((1−|ξ|²)x + (1 + 2(ξ,x) + |x|²)ξ) / (1 + 2(ξ,x) + |ξ|²|x|²)`.
pub fn ball_moebius(xi: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    ball_moebius_into(xi, x, &mut out);
    out
}

#[inline]
pub fn ball_moebius_into(xi: &[f64], x: &[f64], out: &mut [f64]) {
    let xx = dot(xi, xi);
    let px = dot(xi, x);
    let rr = dot(x, x);
    let a = 1.0 - xx;
    let b = 1.0 + 2.0 * px + rr;
    let den = 1.0 + 2.0 * px + xx * rr;
    for i in 0..x.len() {
        out[i] = (a * x[i] + b * xi[i]) / den;
    }
}

/// Conformal factor of [`ball_moebius`] on the unit sphere: `|d_ξ'(x)|` for
/// `|x| = 1`, i.e. `(1−|ξ|²)/(1 + 2(ξ,x) + |ξ|²)`.
pub fn ball_moebius_factor(xi: &[f64], x: &[f64]) -> f64 {
    let xx = dot(xi, xi);
    (1.0 - xx) / (1.0 + 2.0 * dot(xi, x) + xx)
}

/// `R_p(x) = x − 2(p,x)p`.
pub fn reflection(p: &[f64], x: &[f64]) -> Vec<f64> {
    let t = 2.0 * dot(p, x);
    x.iter().zip(p).map(|(xi, pi)| xi - t * pi).collect()
}

/// `R_p(z) = −p² z̄`, the disk form of [`reflection`].
#[inline]
pub fn disk_reflection(p: DiskPoint, z: DiskPoint) -> DiskPoint {
    -(p * p) * z.conj()
}

/// Unimodular factor in `d_η ∘ d_{−ξ} = q · d_{d_{−ξ}(η)}`.
pub fn composition_factor(eta: DiskPoint, xi: DiskPoint) -> DiskPoint {
    (1.0 - eta * xi.conj()) / (1.0 - eta.conj() * xi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoebiusParam {
    pub space: Space,
    pub xi: Vec<f64>,
}

impl MoebiusParam {
    pub fn identity(space: Space) -> Self {
        MoebiusParam {
            space,
            xi: vec![0.0; space.dim()],
        }
    }

    pub fn disk(xi: DiskPoint) -> Self {
        MoebiusParam {
            space: Space::Disk,
            xi: vec![xi.re, xi.im],
        }
    }

    pub fn as_complex(&self) -> DiskPoint {
        Complex64::new(self.xi[0], self.xi[1])
    }

    pub fn norm(&self) -> f64 {
        norm(&self.xi)
    }

    /// Applies `d_ξ` to a point of the space.
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        match self.space {
            Space::Disk => {
                let w = disk_moebius(self.as_complex(), Complex64::new(x[0], x[1]));
                out[0] = w.re;
                out[1] = w.im;
            }
            Space::Sphere { .. } => ball_moebius_into(&self.xi, x, out),
        }
    }

    /// `d_ξ(δ)`: parameter of the composite `d_δ ∘ d_ξ` up to a rotation.
    pub fn compose(&self, delta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; delta.len()];
        self.apply(delta, &mut out);
        out
    }
}

/// Pushforward of `m` by `d_ξ`.
pub fn push_moebius(m: &DiscreteMeasure, xi: &MoebiusParam) -> DiscreteMeasure {
    m.pushforward(|x, out| xi.apply(x, out))
}

/// Moment vector of `(d_ξ)_* m` without materializing the pushforward.
pub fn pushed_moment(m: &DiscreteMeasure, xi: &[f64]) -> Vec<f64> {
    match m.space {
        Space::Disk => {
            let c = Complex64::new(xi[0], xi[1]);
            let mut a = Vec::with_capacity(m.len());
            let mut b = Vec::with_capacity(m.len());
            for (p, w) in m.atoms() {
                let (x, y) = disk_features(disk_moebius(c, Complex64::new(p[0], p[1])));
                a.push(w * x);
                b.push(w * y);
            }
            vec![pairwise_sum(&a), pairwise_sum(&b)]
        }
        Space::Sphere { .. } => {
            let d = m.dim();
            let mut cols = vec![Vec::with_capacity(m.len()); d];
            let mut y = vec![0.0; d];
            for (p, w) in m.atoms() {
                ball_moebius_into(xi, p, &mut y);
                for k in 0..d {
                    cols[k].push(w * y[k]);
                }
            }
            cols.iter().map(|c| pairwise_sum(c)).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormResult {
    pub xi: MoebiusParam,
    /// Sup-norm of the moment vector of `(d_ξ)_* m`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub newton_switch: f64,
    pub fd_step: f64,
    pub boundary_guard: f64,
}

impl Default for RenormOptions {
    fn default() -> Self {
        RenormOptions {
            tol: 1e-10,
            max_iterations: 500,
            damping: 0.5,
            newton_switch: 1e-3,
            fd_step: 1e-6,
            boundary_guard: 1e-9,
        }
    }
}

/// Finds `ξ` such that `(d_ξ)_* m` has vanishing moment vector.
///
/// Seed 0 starts from the origin; other seeds start from a random point of
/// norm at most 1/2. The fixed point is unique, so the answer does not depend
/// on the seed.
pub fn renormalize(m: &DiscreteMeasure, tol: f64, seed: u64) -> Result<RenormResult> {
    renormalize_with(
        m,
        RenormOptions {
            tol,
            ..RenormOptions::default()
        },
        seed,
    )
}

pub fn renormalize_with(m: &DiscreteMeasure, opts: RenormOptions, seed: u64) -> Result<RenormResult> {
    let mass = m.total_mass();
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let d = m.dim();
    let mut xi = vec![0.0; d];
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
        let radius = 0.5 * rng.random::<f64>();
        let n = norm(&g).max(1e-300);
        xi = g.iter().map(|x| radius * x / n).collect();
    }
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let mut moment = pushed_moment(m, &xi);
    let mut residual = sup(&moment);
    for iter in 0..opts.max_iterations {
        if residual < opts.tol {
            return Ok(RenormResult {
                xi: MoebiusParam { space: m.space, xi },
                residual,
                iterations: iter,
            });
        }
        let param = MoebiusParam {
            space: m.space,
            xi: xi.clone(),
        };
        let center: Vec<f64> = moment.iter().map(|x| x / mass).collect();
        let mut next: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        if sup(&center) < opts.newton_switch {
            if let Some(step) = newton_step(m, &param, &moment, opts.fd_step) {
                let mut alpha = 1.0;
                for _ in 0..8 {
                    let delta: Vec<f64> = step.iter().map(|s| alpha * s).collect();
                    if norm(&delta) < 1.0 {
                        let cand = param.compose(&delta);
                        let mom = pushed_moment(m, &cand);
                        let r = sup(&mom);
                        if r < residual {
                            next = Some((cand, mom, r));
                            break;
                        }
                    }
                    alpha *= 0.5;
                }
            }
        }
        let (cand, mom, r) = match next {
            Some(n) => n,
            None => {
                let delta: Vec<f64> = center.iter().map(|c| -opts.damping * c).collect();
                let cand = param.compose(&delta);
                let mom = pushed_moment(m, &cand);
                let r = sup(&mom);
                (cand, mom, r)
            }
        };
        xi = cand;
        moment = mom;
        residual = r;
        let xn = norm(&xi);
        if !(xn <= 1.0 - opts.boundary_guard) {
            return Err(Error::NonConvergence {
                iterations: iter + 1,
                residual,
                xi_norm: xn,
            });
        }
    }
    if residual < opts.tol {
        return Ok(RenormResult {
            xi: MoebiusParam { space: m.space, xi },
            residual,
            iterations: opts.max_iterations,
        });
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual,
        xi_norm: norm(&xi),
    })
}

/// Newton step in composed coordinates: `δ` solving `J δ = −F` where
/// `F(δ)` is the moment of `(d_{d_ξ(δ)})_* m`, `J` by central differences.
fn newton_step(m: &DiscreteMeasure, xi: &MoebiusParam, f0: &[f64], h: f64) -> Option<Vec<f64>> {
    let d = f0.len();
    let mut jac = vec![0.0; d * d];
    for j in 0..d {
        let mut e = vec![0.0; d];
        e[j] = h;
        let plus = pushed_moment(m, &xi.compose(&e));
        e[j] = -h;
        let minus = pushed_moment(m, &xi.compose(&e));
        for i in 0..d {
            jac[i * d + j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    let rhs: Vec<f64> = f0.iter().map(|x| -x).collect();
    solve_dense(&jac, &rhs)
}

/// Checks `X_{e₁}(d_r(z)) > X_{e₁}(z)` at `samples` uniform random interior
/// points.
pub fn monotonicity_check(r: f64, samples: usize, seed: u64) -> bool {
    assert!(r > 0.0 && r < 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift = Complex64::new(r, 0.0);
    (0..samples).all(|_| {
        let z = loop {
            let z = Complex64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
            if z.norm_sqr() < 1.0 {
                break z;
            }
        };
        disk_features(disk_moebius(shift, z)).0 > disk_features(z).0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{moment_vector, uniform_disk, x_s};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn disk_map_basics() {
        let z = c(0.3, -0.4);
        assert_eq!(disk_moebius(c(0.0, 0.0), z), z);
        let xi = c(0.2, 0.5);
        assert!((disk_moebius(xi, c(0.0, 0.0)) - xi).norm() < 1e-15);
        let b = Complex64::from_polar(1.0, 2.1);
        assert!((disk_moebius(xi, b).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ball_map_boundary_and_antipode() {
        let xi = [0.3, -0.2, 0.5, 0.1];
        let n = norm(&xi);
        let x: Vec<f64> = xi.iter().map(|v| -v / n).collect();
        assert!((norm(&ball_moebius(&xi, &x)) - 1.0).abs() < 1e-12);
        let zero = [0.0; 4];
        let img = ball_moebius(&xi, &zero);
        assert!(img.iter().zip(&xi).all(|(a, b)| (a - b).abs() < 1e-15));
        assert_eq!(ball_moebius(&zero, &x), x);
    }

    #[test]
    fn disk_composition_law() {
        let eta = c(0.3, 0.4);
        let xi = c(-0.5, 0.2);
        let q = composition_factor(eta, xi);
        assert!((q.norm() - 1.0).abs() < 1e-13);
        let alpha = disk_moebius(-xi, eta);
        for z in [c(0.1, 0.2), c(-0.7, 0.1), c(0.0, -0.9)] {
            let lhs = disk_moebius(eta, disk_moebius(-xi, z));
            assert!((lhs - q * disk_moebius(alpha, z)).norm() < 1e-13);
        }
    }

    #[test]
    fn conformal_factor_matches_volume() {
        // ∫_{S²} λ² dg₀ = 4π for any ξ
        let xi = [0.4, -0.3, 0.2];
        let rule = crate::quadrature::SphereRule::full(2, 48, 96);
        let vol: f64 = (0..rule.len())
            .map(|i| rule.weights[i] * ball_moebius_factor(&xi, rule.point(i)).powi(2))
            .sum();
        assert!((vol - 4.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn reflection_properties() {
        let p = [0.6, 0.0, 0.8];
        let x = [0.1, 0.7, -0.2];
        let back = reflection(&p, &reflection(&p, &x));
        assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-15));
        let rp = reflection(&p, &p);
        assert!(rp.iter().zip(&p).all(|(a, b)| (a + b).abs() < 1e-15));
        let pc = Complex64::from_polar(1.0, 0.9);
        let z = c(0.3, -0.5);
        let v = reflection(&[pc.re, pc.im], &[z.re, z.im]);
        let w = disk_reflection(pc, z);
        assert!((v[0] - w.re).abs() < 1e-15 && (v[1] - w.im).abs() < 1e-15);
    }

    #[test]
    fn symmetric_measures_are_renormalized() {
        let m = uniform_disk(32, 64);
        let r = renormalize(&m, 1e-10, 0).unwrap();
        assert!(r.xi.norm() < 1e-10);
        let q = [0.4, 0.3];
        let two = DiscreteMeasure::new(Space::Disk, vec![q[0], q[1], -q[0], -q[1]], vec![1.0, 1.0]).unwrap();
        assert!(renormalize(&two, 1e-10, 0).unwrap().xi.norm() < 1e-10);
        assert!(renormalize(&two, 1e-10, 7).unwrap().xi.norm() < 1e-10);
    }

    #[test]
    fn recovers_planted_shift() {
        let m = push_moebius(&uniform_disk(48, 96), &MoebiusParam::disk(c(0.3, 0.0)));
        let r = renormalize(&m, 1e-10, 0).unwrap();
        assert!((r.xi.as_complex() - c(-0.3, 0.0)).norm() < 1e-8);
        assert!(moment_vector(&push_moebius(&m, &r.xi)).iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn sphere_planted_shift_and_idempotence() {
        let m = crate::measures::sphere_quadrature(3, 12, 24, |_| 1.0).unwrap();
        let xi = [0.2, -0.1, 0.3, 0.25];
        let pushed = m.pushforward(|x, out| ball_moebius_into(&xi, x, out));
        let r = renormalize(&pushed, 1e-10, 0).unwrap();
        for (a, b) in r.xi.xi.iter().zip(&xi) {
            assert!((a + b).abs() < 1e-8);
        }
        let again = renormalize(&push_moebius(&pushed, &r.xi), 1e-10, 3).unwrap();
        assert!(again.xi.norm() < 1e-9);
    }

    #[test]
    fn boundary_concentration_fails() {
        let p = Complex64::from_polar(1.0, 0.3);
        let m = DiscreteMeasure::new(Space::Disk, vec![p.re, p.im], vec![1.0]).unwrap();
        assert!(matches!(renormalize(&m, 1e-10, 0), Err(Error::NonConvergence { .. })));
        let empty = DiscreteMeasure::new(Space::Disk, vec![0.0, 0.0], vec![0.0]).unwrap();
        assert!(matches!(renormalize(&empty, 1e-10, 0), Err(Error::ZeroMass)));
    }

    #[test]
    fn monotonicity_lemma() {
        assert!(monotonicity_check(0.5, 100_000, 1));
        assert!(monotonicity_check(0.99, 100_000, 2));
    }

    proptest! {
        #[test]
        fn disk_inverse(a in -0.7..0.7f64, b in -0.7..0.7f64, t in 0.0..6.3f64, r in 0.0..1.0f64) {
            let xi = c(a, b);
            let z = Complex64::from_polar(r, t);
            prop_assert!((disk_moebius(-xi, disk_moebius(xi, z)) - z).norm() < 1e-13);
        }

        #[test]
        fn ball_matches_disk_for_n1(a in -0.7..0.7f64, b in -0.7..0.7f64, t in 0.0..6.3f64, r in 0.0..1.0f64) {
            let z = Complex64::from_polar(r, t);
            let w = disk_moebius(c(a, b), z);
            let v = ball_moebius(&[a, b], &[z.re, z.im]);
            prop_assert!((v[0] - w.re).abs() < 1e-13 && (v[1] - w.im).abs() < 1e-13);
        }

        #[test]
        fn ball_inverse_on_sphere(v in proptest::collection::vec(-1.0..1.0f64, 4), w in proptest::collection::vec(-0.4..0.4f64, 4)) {
            let n = norm(&v);
            prop_assume!(n > 1e-3);
            let x: Vec<f64> = v.iter().map(|t| t / n).collect();
            let y = ball_moebius(&w, &x);
            prop_assert!((norm(&y) - 1.0).abs() < 1e-12);
            let minus: Vec<f64> = w.iter().map(|t| -t).collect();
            let back = ball_moebius(&minus, &y);
            prop_assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
        }

        #[test]
        fn eigenfunctions_commute_with_reflection(t in 0.0..6.3f64, u in 0.0..6.3f64, r in 0.0..1.0f64, a in 0.0..6.3f64) {
            let p = [t.cos(), t.sin()];
            let s = [u.cos(), u.sin()];
            let z = Complex64::from_polar(r, a);
            let lhs = x_s(Space::Disk, &reflection(&p, &[z.re, z.im]), &s);
            let rhs = x_s(Space::Disk, &[z.re, z.im], &reflection(&p, &s));
            prop_assert!((lhs - rhs).abs() < 1e-13);
        }

        #[test]
        fn rotation_equivariance(angle in 0.0..6.3f64, a in -0.4..0.4f64, b in -0.4..0.4f64) {
            let base = push_moebius(&uniform_disk(12, 24), &MoebiusParam::disk(c(a, b)));
            let (s, co) = angle.sin_cos();
            let rotated = base.rotated(&[co, -s, s, co]);
            let x0 = renormalize(&base, 1e-11, 0).unwrap().xi.as_complex();
            let x1 = renormalize(&rotated, 1e-11, 0).unwrap().xi.as_complex();
            prop_assert!((x0 * Complex64::from_polar(1.0, angle) - x1).norm() < 1e-9);
        }
    }
}
