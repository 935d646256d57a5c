//! Hyperbolic and spherical caps, the cap reflection, folding, the explicit
//! cap-to-disk map and the rearrangement pipeline.
//!
//! The disk rearrangement of a measure `μ` along a cap `a` runs
//!
//! 1. fold: `μ_a = μ|_a + (τ_a)_* μ|_{a*}`;
//! 2. renormalize: `T_a = d_{ξ(a)}`;
//! 3. uniformize the image cap `b = T_a(a)` with `φ_b`;
//! 4. renormalize again: `T'_a = d_{η(a)}`,
//!
//! giving `ν_a = (T'_a ∘ φ_b ∘ T_a)_* μ_a`. On the sphere steps 3 and 4 are
//! absent.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm};
use crate::measures::{DiscreteMeasure, DiskPoint, PolarGrid, Space};
use crate::moebius::{
    ball_moebius, ball_moebius_into, disk_moebius, disk_moebius_prime, disk_reflection, push_moebius,
    reflection, renormalize,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Membership slack for points numerically on `∂a`.
const EDGE_TOL: f64 = 1e-13;

/// The cap `a_{r,p} = d_{rp}(a_{0,p})`, where `a_{0,p}` is the half-disk (or
/// hemisphere) `{x · p > 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub space: Space,
    pub r: f64,
    pub p: Vec<f64>,
}

impl Cap {
    pub fn new(space: Space, r: f64, p: Vec<f64>) -> Result<Self> {
        if !(r > -1.0 && r < 1.0) {
            return Err(Error::InvalidInput(format!("cap parameter r = {r} not in (-1, 1)")));
        }
        if p.len() != space.dim() || (norm(&p) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput("cap direction must be a unit vector".into()));
        }
        Ok(Cap { space, r, p })
    }

    /// Disk cap with direction `e^{i angle}`.
    pub fn disk(r: f64, angle: f64) -> Result<Self> {
        Self::new(Space::Disk, r, vec![angle.cos(), angle.sin()])
    }

    pub fn disk_p(r: f64, p: DiskPoint) -> Result<Self> {
        let p = p / p.norm();
        Self::new(Space::Disk, r, vec![p.re, p.im])
    }

    pub fn p_complex(&self) -> DiskPoint {
        Complex64::new(self.p[0], self.p[1])
    }

    pub fn angle(&self) -> f64 {
        self.p[1].atan2(self.p[0])
    }

    /// `rp`, the Möbius parameter carrying `a_{0,p}` onto the cap.
    pub fn center_shift(&self) -> Vec<f64> {
        self.p.iter().map(|x| self.r * x).collect()
    }

    /// The complementary cap `a_{−r,−p}`.
    pub fn complement(&self) -> Cap {
        Cap {
            space: self.space,
            r: -self.r,
            p: self.p.iter().map(|x| -x).collect(),
        }
    }

    /// Signed coordinate `d_{−rp}(x) · p`; nonnegative on the closed cap.
    pub fn level(&self, x: &[f64]) -> f64 {
        match self.space {
            Space::Disk => {
                let u = disk_moebius(-self.r * self.p_complex(), Complex64::new(x[0], x[1]));
                u.re * self.p[0] + u.im * self.p[1]
            }
            Space::Sphere { .. } => {
                let shift: Vec<f64> = self.p.iter().map(|v| -self.r * v).collect();
                dot(&ball_moebius(&shift, x), &self.p)
            }
        }
    }

    /// Closed-cap membership; atoms on `∂a` belong to the cap.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.level(x) >= -EDGE_TOL
    }

    /// Ideal endpoints of the boundary geodesic of a disk cap.
    pub fn endpoints(&self) -> (DiskPoint, DiskPoint) {
        let p = self.p_complex();
        let r = self.r;
        let scale = 1.0 / (1.0 + r * r);
        let a = p * Complex64::new(2.0 * r, 1.0 - r * r) * scale;
        let b = p * Complex64::new(2.0 * r, -(1.0 - r * r)) * scale;
        (a, b)
    }

    /// Disk cap whose boundary geodesic joins the unit points `f1`, `f2`,
    /// on the side containing `inside`.
    pub fn through(f1: DiskPoint, f2: DiskPoint, inside: DiskPoint) -> Result<Cap> {
        let s = f1 + f2;
        let (m, r) = if s.norm() < 1e-14 {
            (f1 * Complex64::new(0.0, 1.0), 0.0)
        } else {
            let m = s / s.norm();
            let c = (f1 * m.conj()).re.clamp(-1.0, 1.0);
            let sn = (1.0 - c * c).sqrt();
            (m, c / (1.0 + sn))
        };
        let cap = Cap::disk_p(r, m)?;
        if cap.contains(&[inside.re, inside.im]) {
            Ok(cap)
        } else {
            Ok(cap.complement())
        }
    }
}

/// `τ_a = d_{rp} ∘ R_p ∘ d_{−rp}`.
pub fn cap_reflection(a: &Cap, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    cap_reflection_into(a, x, &mut out);
    out
}

pub fn cap_reflection_into(a: &Cap, x: &[f64], out: &mut [f64]) {
    match a.space {
        Space::Disk => {
            let w = disk_cap_reflection(a, Complex64::new(x[0], x[1]));
            out[0] = w.re;
            out[1] = w.im;
        }
        Space::Sphere { .. } => {
            let rp = a.center_shift();
            let minus: Vec<f64> = rp.iter().map(|v| -v).collect();
            let u = ball_moebius(&minus, x);
            let v = reflection(&a.p, &u);
            ball_moebius_into(&rp, &v, out);
        }
    }
}

#[inline]
pub fn disk_cap_reflection(a: &Cap, z: DiskPoint) -> DiskPoint {
    let p = a.p_complex();
    let rp = a.r * p;
    disk_moebius(rp, disk_reflection(p, disk_moebius(-rp, z)))
}

/// Jacobian `|τ_a'(z)|` of the (antiholomorphic) disk reflection.
pub fn disk_cap_reflection_factor(a: &Cap, z: DiskPoint) -> f64 {
    let p = a.p_complex();
    let rp = a.r * p;
    let u = disk_moebius(-rp, z);
    disk_moebius_prime(rp, disk_reflection(p, u)).norm() * disk_moebius_prime(-rp, z).norm()
}

/// Folded measure: atoms in the closed cap stay, the others are reflected in
/// by `τ_a` with unchanged weight.
pub fn fold_measure(m: &DiscreteMeasure, a: &Cap) -> Result<DiscreteMeasure> {
    if m.space != a.space {
        return Err(Error::SpaceMismatch(m.space.label(), a.space.label()));
    }
    Ok(m.pushforward(|x, out| {
        if a.contains(x) {
            out.copy_from_slice(x);
        } else {
            cap_reflection_into(a, x, out);
        }
    }))
}

/// Conformal map `φ_b` from a disk cap onto the disk:
/// `d_{−rp}` to the half-disk, rotation to the upper half-disk,
/// `w = −(v + 1/v)/2` onto the upper half-plane, Cayley onto the disk, and a
/// final automorphism with `φ_b(z₀) = 0`, `φ_b'(z₀) > 0`.
///
/// The base point is `z₀ = d_{rp}(s p)` with `s = max(−r, 1/2)`, which is the
/// origin whenever `r ≤ −1/2`; this makes `φ_b → id` as the cap fills the
/// disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CapMap {
    pub cap: Cap,
    base: DiskPoint,
    c0: DiskPoint,
    lambda: DiskPoint,
}

impl CapMap {
    pub fn new(cap: &Cap) -> Result<Self> {
        if cap.space != Space::Disk {
            return Err(Error::SpaceMismatch(cap.space.label(), "disk".into()));
        }
        let p = cap.p_complex();
        let s = (-cap.r).max(0.5);
        let base = disk_moebius(cap.r * p, s * p);
        let mut map = CapMap {
            cap: cap.clone(),
            base,
            c0: Complex64::new(0.0, 0.0),
            lambda: Complex64::new(1.0, 0.0),
        };
        map.c0 = map.raw(base);
        let d = map.raw_prime(base) * disk_moebius_prime(-map.c0, map.c0);
        map.lambda = d.conj() / d.norm();
        Ok(map)
    }

    pub fn base_point(&self) -> DiskPoint {
        self.base
    }

    fn half_disk(&self, z: DiskPoint) -> DiskPoint {
        let p = self.cap.p_complex();
        Complex64::new(0.0, 1.0) * p.conj() * disk_moebius(-self.cap.r * p, z)
    }

    fn raw(&self, z: DiskPoint) -> DiskPoint {
        let v = self.half_disk(z);
        if v.norm() < 1e-300 {
            return Complex64::new(1.0, 0.0);
        }
        let w = -0.5 * (v + 1.0 / v);
        let i = Complex64::new(0.0, 1.0);
        (w - i) / (w + i)
    }

    fn raw_prime(&self, z: DiskPoint) -> DiskPoint {
        let p = self.cap.p_complex();
        let i = Complex64::new(0.0, 1.0);
        let dv = i * p.conj() * disk_moebius_prime(-self.cap.r * p, z);
        let v = self.half_disk(z);
        let w = -0.5 * (v + 1.0 / v);
        let dw = -0.5 * (1.0 - 1.0 / (v * v));
        let dc = 2.0 * i / ((w + i) * (w + i));
        dc * dw * dv
    }

    /// `φ_b(z)` for `z` in the closed cap.
    pub fn eval(&self, z: DiskPoint) -> Result<DiskPoint> {
        if !self.cap.contains(&[z.re, z.im]) {
            return Err(Error::EvaluationOutsideCap(z.re, z.im));
        }
        Ok(self.eval_unchecked(z))
    }

    /// `φ_b(z)` without the membership check; points just outside `∂b` due to
    /// rounding land just outside the unit circle and are clamped onto it.
    pub fn eval_unchecked(&self, z: DiskPoint) -> DiskPoint {
        let w = self.lambda * disk_moebius(-self.c0, self.raw(z));
        let n = w.norm();
        if n > 1.0 {
            w / n
        } else {
            w
        }
    }

    /// `φ_b'(z)`.
    pub fn derivative(&self, z: DiskPoint) -> DiskPoint {
        self.lambda * disk_moebius_prime(-self.c0, self.raw(z)) * self.raw_prime(z)
    }

    /// `φ_b^{-1}(w)` for `w` in the closed disk.
    pub fn inverse(&self, w: DiskPoint) -> DiskPoint {
        let i = Complex64::new(0.0, 1.0);
        let c = disk_moebius(self.c0, self.lambda.conj() * w);
        if (1.0 - c).norm() < 1e-300 {
            return disk_moebius(self.cap.r * self.cap.p_complex(), Complex64::new(0.0, 0.0));
        }
        let h = i * (1.0 + c) / (1.0 - c);
        // v² + 2hv + 1 = 0; the roots multiply to 1, keep the one in the disk
        let disc = (h * h - 1.0).sqrt();
        let v1 = -h + disc;
        let v2 = -h - disc;
        let v = if v1.norm() <= v2.norm() { v1 } else { v2 };
        let p = self.cap.p_complex();
        let u = -i * p * v;
        disk_moebius(self.cap.r * p, u)
    }
}

/// Convenience constructor mirroring the operation name.
pub fn cap_to_disk(b: &Cap) -> Result<CapMap> {
    CapMap::new(b)
}

/// Diagnostics recorded by [`rearrange`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangeTrace {
    pub cap: Cap,
    /// Renormalizer of the folded measure, `T_a = d_{ξ(a)}`.
    pub xi_a: Vec<f64>,
    /// Image cap `T_a(a)`; absent on the sphere.
    pub b: Option<Cap>,
    /// Renormalizer after `φ_b`, `T'_a = d_{η(a)}`.
    pub eta_a: Vec<f64>,
    /// Closed form `−2r/(1+r²) p` for the renormalizer of `(τ_a)_* μ`.
    pub zeta_a_predicted: Vec<f64>,
    /// `d_{−ζ_a}(ξ(a))`, the renormalizer of `(d_{ζ_a})_* μ_a`.
    pub eta_hat: Vec<f64>,
    /// `|q(a)|` for `q(a) = (ζ̄η̂ + 1)/(ζη̄̂ + 1)`.
    pub q_norm: f64,
    /// Moment sup-norm of the output measure.
    pub residual: f64,
}

/// Predicted renormalizer `ζ_a = −2r/(1+r²) p` of `(τ_a)_* μ` when `μ` is
/// renormalized and invariant under `R_p`.
pub fn zeta_predicted(a: &Cap) -> Vec<f64> {
    let k = -2.0 * a.r / (1.0 + a.r * a.r);
    a.p.iter().map(|x| k * x).collect()
}

/// Image cap `b = d_ξ(a)` of a disk cap.
pub fn image_cap(a: &Cap, xi: DiskPoint) -> Result<Cap> {
    let (e1, e2) = a.endpoints();
    let f1 = disk_moebius(xi, e1);
    let f2 = disk_moebius(xi, e2);
    let p = a.p_complex();
    let inside = disk_moebius(xi, disk_moebius(a.r * p, 0.5 * p));
    Cap::through(f1 / f1.norm(), f2 / f2.norm(), inside)
}

/// Rearranged measure `ν_a` and its trace.
pub fn rearrange(m: &DiscreteMeasure, a: &Cap) -> Result<(DiscreteMeasure, RearrangeTrace)> {
    rearrange_tol(m, a, 1e-10)
}

pub fn rearrange_tol(
    m: &DiscreteMeasure,
    a: &Cap,
    tol: f64,
) -> Result<(DiscreteMeasure, RearrangeTrace)> {
    let folded = fold_measure(m, a)?;
    let first = renormalize(&folded, tol, 0)?;
    let pushed = push_moebius(&folded, &first.xi);
    let zeta = zeta_predicted(a);
    match a.space {
        Space::Disk => {
            let xi = first.xi.as_complex();
            let b = image_cap(a, xi)?;
            let phi = CapMap::new(&b)?;
            let uniformized = pushed.pushforward_disk(|z| phi.eval_unchecked(z));
            let second = renormalize(&uniformized, tol, 0)?;
            let nu = push_moebius(&uniformized, &second.xi);
            let zc = Complex64::new(zeta[0], zeta[1]);
            let eta_hat = disk_moebius(-zc, xi);
            let q = (zc.conj() * eta_hat + 1.0) / (zc * eta_hat.conj() + 1.0);
            let trace = RearrangeTrace {
                cap: a.clone(),
                xi_a: first.xi.xi.clone(),
                b: Some(b),
                eta_a: second.xi.xi.clone(),
                zeta_a_predicted: zeta,
                eta_hat: vec![eta_hat.re, eta_hat.im],
                q_norm: q.norm(),
                residual: second.residual,
            };
            Ok((nu, trace))
        }
        Space::Sphere { .. } => {
            let minus: Vec<f64> = zeta.iter().map(|v| -v).collect();
            let eta_hat = ball_moebius(&minus, &first.xi.xi);
            let trace = RearrangeTrace {
                cap: a.clone(),
                xi_a: first.xi.xi.clone(),
                b: None,
                eta_a: vec![0.0; a.space.dim()],
                zeta_a_predicted: zeta,
                eta_hat,
                q_norm: 1.0,
                residual: first.residual,
            };
            Ok((pushed, trace))
        }
    }
}

/// Exact density of a disk rearrangement, evaluated through the inverse
/// pipeline `ψ_a = (T'_a ∘ φ_b ∘ T_a)^{-1}`:
/// `δ(w) = |ψ_a'(w)|² (ρ(ψ_a w) + ρ(τ_a ψ_a w) |τ_a'(ψ_a w)|²)`.
#[derive(Clone)]
pub struct RearrangedDensity {
    density: Arc<dyn Fn(DiskPoint) -> f64 + Send + Sync>,
    cap: Cap,
    xi: DiskPoint,
    eta: DiskPoint,
    phi: CapMap,
}

impl RearrangedDensity {
    pub fn new(
        density: Arc<dyn Fn(DiskPoint) -> f64 + Send + Sync>,
        trace: &RearrangeTrace,
    ) -> Result<Self> {
        let b = trace
            .b
            .as_ref()
            .ok_or_else(|| Error::SpaceMismatch(trace.cap.space.label(), "disk".into()))?;
        Ok(RearrangedDensity {
            density,
            cap: trace.cap.clone(),
            xi: Complex64::new(trace.xi_a[0], trace.xi_a[1]),
            eta: Complex64::new(trace.eta_a[0], trace.eta_a[1]),
            phi: CapMap::new(b)?,
        })
    }

    /// `ψ_a(w)` and `|ψ_a'(w)|`.
    pub fn inverse_map(&self, w: DiskPoint) -> (DiskPoint, f64) {
        let y = disk_moebius(-self.eta, w);
        let dy = disk_moebius_prime(-self.eta, w).norm();
        let x = self.phi.inverse(y);
        let dx = dy / self.phi.derivative(x).norm();
        let z = disk_moebius(-self.xi, x);
        let dz = dx * disk_moebius_prime(-self.xi, x).norm();
        (z, dz)
    }

    pub fn eval(&self, w: DiskPoint) -> f64 {
        let (z, jac) = self.inverse_map(w);
        let reflected = disk_cap_reflection(&self.cap, z);
        let tj = disk_cap_reflection_factor(&self.cap, z);
        jac * jac * ((self.density)(z) + (self.density)(reflected) * tj * tj)
    }

    /// The rearranged measure sampled on a polar grid.
    pub fn on_grid(&self, grid: &PolarGrid) -> Result<DiscreteMeasure> {
        grid.measure(|w| self.eval(w))
    }
}

/// Radial profiles of a measure laid out on a composite polar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubharmonicReport {
    pub radii: Vec<f64>,
    /// Circle integrals `W(ρ) = ∫ δ(ρe^{iθ}) dθ`.
    pub w: Vec<f64>,
    /// Panel edges and `G(r) = ∫_{|z|<r} δ`.
    pub edges: Vec<f64>,
    pub g: Vec<f64>,
    /// Largest decrease `max(W_j − W_{j+1}, 0)` relative to `max W`.
    pub monotonicity_violation: f64,
    /// Largest excess `max(G(r) − πr², 0)`.
    pub growth_violation: f64,
    /// `max |G(r) − πr²|`.
    pub growth_deviation: f64,
}

/// Circle integrals and cumulative masses of `nu` after rescaling to mass π.
pub fn subharmonic_diagnostics(nu: &DiscreteMeasure) -> Result<SubharmonicReport> {
    let grid = nu.grid.as_ref().ok_or(Error::GridMismatch)?;
    if nu.space != Space::Disk || grid.panel_edges.len() < 3 || nu.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if nu.total_mass() <= 0.0 {
        return Err(Error::ZeroMass);
    }
    let scale = std::f64::consts::PI / nu.total_mass();
    let nt = grid.n_theta;
    let weights = nu.weights();
    let w = grid
        .radii
        .iter()
        .zip(&grid.radial_weights)
        .enumerate()
        .map(|(j, (&rho, &wr))| weights[j * nt..(j + 1) * nt].iter().sum::<f64>() * scale / (rho * wr))
        .collect();
    Ok(profile_report(grid, w))
}

/// Same report for a density given pointwise, with circle integrals by
/// adaptive quadrature. `mass` is the exact total mass used to rescale to π;
/// densities with integrable boundary singularities (the corners of a cap
/// opened by `φ_b`) are handled without relying on the angular grid.
pub fn density_diagnostics(
    density: impl Fn(DiskPoint) -> f64 + Sync,
    mass: f64,
    grid: &PolarGrid,
) -> Result<SubharmonicReport> {
    use rayon::prelude::*;
    if grid.panel_edges.len() < 3 {
        return Err(Error::GridMismatch);
    }
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let scale = std::f64::consts::PI / mass;
    let w = grid
        .radii
        .par_iter()
        .map(|&rho| {
            let f = |t: f64| density(Complex64::from_polar(rho, t));
            crate::quadrature::adaptive_gk(f, 0.0, 2.0 * std::f64::consts::PI, 1e-11, 16) * scale
        })
        .collect();
    Ok(profile_report(grid, w))
}

fn profile_report(grid: &PolarGrid, w: Vec<f64>) -> SubharmonicReport {
    let wmax = w.iter().cloned().fold(0.0_f64, f64::max).max(1e-300);
    let monotonicity_violation = w
        .windows(2)
        .map(|p| (p[0] - p[1]).max(0.0) / wmax)
        .fold(0.0, f64::max);
    let ring: Vec<f64> = w
        .iter()
        .zip(grid.radii.iter().zip(&grid.radial_weights))
        .map(|(wj, (rho, wr))| wj * rho * wr)
        .collect();
    let mut g = vec![0.0];
    let mut acc = 0.0;
    for panel in 0..grid.panel_edges.len() - 1 {
        acc += ring[panel * grid.per_panel..(panel + 1) * grid.per_panel]
            .iter()
            .sum::<f64>();
        g.push(acc);
    }
    let pi = std::f64::consts::PI;
    let mut growth_violation: f64 = 0.0;
    let mut growth_deviation: f64 = 0.0;
    for (r, gv) in grid.panel_edges.iter().zip(&g) {
        let d = gv - pi * r * r;
        growth_violation = growth_violation.max(d);
        growth_deviation = growth_deviation.max(d.abs());
    }
    SubharmonicReport {
        radii: grid.radii.clone(),
        w,
        edges: grid.panel_edges.clone(),
        g,
        monotonicity_violation,
        growth_violation,
        growth_deviation,
    }
}

/// Standard composite polar grid used by the diagnostics (96 × 192 atoms).
pub fn standard_grid() -> PolarGrid {
    PolarGrid::composite(24, 4, 192)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{
        disk_quadrature, measure_distance, moment_vector, pullback_measure, uniform_disk,
        ConformalDomain,
    };
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn reflection_is_involution_fixing_the_edge() {
        let a = Cap::disk(0.4, 0.7).unwrap();
        for z in [c(0.1, 0.2), c(-0.5, 0.3), c(0.0, -0.95)] {
            let back = disk_cap_reflection(&a, disk_cap_reflection(&a, z));
            assert!((back - z).norm() < 1e-12);
        }
        let p = a.p_complex();
        for t in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            let edge = disk_moebius(a.r * p, c(0.0, t) * p);
            assert!((disk_cap_reflection(&a, edge) - edge).norm() < 1e-12);
            assert!(a.level(&[edge.re, edge.im]).abs() < 1e-12);
        }
        let half = Cap::disk(0.0, 1.1).unwrap();
        let z = c(0.3, -0.2);
        assert_eq!(disk_cap_reflection(&half, z), disk_reflection(half.p_complex(), z));
    }

    #[test]
    fn reflection_swaps_cap_and_complement() {
        let a = Cap::disk(-0.3, 2.0).unwrap();
        for k in 0..50 {
            let z = Complex64::from_polar(0.02 * k as f64, 0.37 * k as f64);
            let inside = a.level(&[z.re, z.im]);
            let w = disk_cap_reflection(&a, z);
            let outside = a.level(&[w.re, w.im]);
            assert!(inside * outside <= 1e-14);
        }
    }

    #[test]
    fn conjugation_identity() {
        for (r, t) in [(0.3, 0.2), (-0.6, 2.5), (0.9, -1.0)] {
            let a = Cap::disk(r, t).unwrap();
            let zeta = zeta_predicted(&a);
            let zc = c(zeta[0], zeta[1]);
            for z in [c(0.1, 0.7), c(-0.4, -0.4), c(0.8, 0.0)] {
                let lhs = disk_moebius(zc, disk_cap_reflection(&a, z));
                let rhs = disk_reflection(a.p_complex(), z);
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn fold_of_uniform_over_half_disk() {
        let m = uniform_disk(16, 32);
        let a = Cap::disk(0.0, 0.0).unwrap();
        let f = fold_measure(&m, &a).unwrap();
        assert!((f.total_mass() - m.total_mass()).abs() < 1e-12);
        // reflected atoms land on grid nodes: every right-half node carries twice its weight
        let mut sums = std::collections::BTreeMap::new();
        for (p, w) in f.atoms() {
            assert!(p[0] >= 0.0);
            let key = ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
            *sums.entry(key).or_insert(0.0) += w;
        }
        for (p, w) in m.atoms() {
            if p[0] > 0.0 {
                let key = ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64);
                assert!((sums[&key] - 2.0 * w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn fold_matches_fine_reference() {
        let a = Cap::disk(0.35, 0.8).unwrap();
        // the lifted integrands have a kink along the cap edge; the angular
        // rule needs 384 nodes to get below 1e-6
        let coarse = fold_measure(&uniform_disk(192, 384), &a).unwrap();
        let fine = fold_measure(&uniform_disk(768, 1536), &a).unwrap();
        let d = measure_distance(&coarse, &fine).unwrap();
        assert!(d < 1e-6, "distance {d}");
    }

    #[test]
    fn cap_map_sends_half_disk_to_disk() {
        let b = Cap::disk(0.0, 0.0).unwrap();
        let phi = CapMap::new(&b).unwrap();
        for k in 1..40 {
            let z = Complex64::from_polar(0.024 * k as f64, -1.5 + 0.075 * k as f64);
            let w = phi.eval(z).unwrap();
            assert!(w.norm() < 1.0);
            assert!((phi.inverse(w) - z).norm() < 1e-10);
        }
        // flat-edge midpoint lands on the circle
        assert!((phi.eval(c(0.0, 0.0)).unwrap().norm() - 1.0).abs() < 1e-12);
        assert!(matches!(phi.eval(c(-0.5, 0.0)), Err(Error::EvaluationOutsideCap(..))));
        let w0 = phi.eval(phi.base_point()).unwrap();
        assert!(w0.norm() < 1e-14);
        let d0 = phi.derivative(phi.base_point());
        assert!(d0.im.abs() < 1e-12 * d0.norm() && d0.re > 0.0);
    }

    #[test]
    fn cap_map_is_conformal() {
        let b = Cap::disk(-0.4, 1.3).unwrap();
        let phi = CapMap::new(&b).unwrap();
        let h = 1e-6;
        for k in 0..20 {
            let z = Complex64::from_polar(0.3 + 0.02 * k as f64, 1.3 + 0.2 * (k as f64 - 10.0) / 10.0);
            let fx = (phi.eval_unchecked(z + h) - phi.eval_unchecked(z - h)) / (2.0 * h);
            let fy = (phi.eval_unchecked(z + c(0.0, h)) - phi.eval_unchecked(z - c(0.0, h))) / (2.0 * h);
            // u_x = v_y, u_y = −v_x
            let residual = (fx.re - fy.im).abs() + (fy.re + fx.im).abs();
            assert!(residual < 1e-6 * fx.norm().max(1.0));
            assert!((fx - phi.derivative(z)).norm() < 1e-6 * fx.norm());
        }
    }

    #[test]
    fn cap_map_tends_to_identity() {
        let b = Cap::disk(-0.99, 0.6).unwrap();
        let phi = CapMap::new(&b).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..=8 {
            for k in 0..32 {
                let z = Complex64::from_polar(0.1 * j as f64, 2.0 * PI * k as f64 / 32.0);
                worst = worst.max((phi.eval(z).unwrap() - z).norm());
            }
        }
        assert!(worst < 0.05, "sup deviation {worst}");
    }

    #[test]
    fn image_cap_matches_pointwise_image() {
        let a = Cap::disk(0.2, 0.4).unwrap();
        let xi = c(-0.3, 0.25);
        let b = image_cap(&a, xi).unwrap();
        for k in 0..200 {
            let z = Complex64::from_polar(0.005 * k as f64, 0.7 * k as f64);
            let w = disk_moebius(xi, z);
            assert_eq!(a.contains(&[z.re, z.im]), b.contains(&[w.re, w.im]), "{z}");
        }
    }

    #[test]
    fn renormalizer_of_reflected_uniform() {
        let m = uniform_disk(48, 96);
        let a = Cap::disk(0.5, 0.0).unwrap();
        let reflected = m.pushforward(|x, out| cap_reflection_into(&a, x, out));
        let r = renormalize(&reflected, 1e-11, 0).unwrap();
        assert!((r.xi.xi[0] + 0.8).abs() < 1e-6 && r.xi.xi[1].abs() < 1e-6);
        assert_eq!(zeta_predicted(&a), vec![-0.8, -0.0]);
    }

    #[test]
    fn rearrangement_invariants() {
        let m = uniform_disk(48, 96);
        for (r, t) in [(0.5, 0.0), (-0.3, 1.0), (0.8, 2.5)] {
            let a = Cap::disk(r, t).unwrap();
            let (nu, trace) = rearrange(&m, &a).unwrap();
            assert!((nu.total_mass() - m.total_mass()).abs() < 1e-12 * m.total_mass());
            assert!(moment_vector(&nu).iter().all(|v| v.abs() < 1e-8));
            assert!((trace.q_norm - 1.0).abs() < 1e-10);
            assert!(trace.b.as_ref().unwrap().r < 0.0);
        }
    }

    #[test]
    fn sphere_rearrangement_invariants() {
        let m = crate::measures::sphere_quadrature(3, 10, 20, |x| 1.0 + 0.3 * x[0] * x[0]).unwrap();
        let p = vec![0.0, 0.6, 0.0, 0.8];
        let a = Cap::new(Space::Sphere { n: 3 }, 0.4, p).unwrap();
        let folded = fold_measure(&m, &a).unwrap();
        assert!(folded.atoms().all(|(x, _)| a.contains(x)));
        let (nu, trace) = rearrange(&m, &a).unwrap();
        assert!((nu.total_mass() - m.total_mass()).abs() < 1e-12 * m.total_mass());
        assert!(moment_vector(&nu).iter().all(|v| v.abs() < 1e-8));
        assert!(trace.b.is_none());
    }

    #[test]
    fn flip_flop_for_uniform() {
        let m = uniform_disk(96, 192);
        let a = Cap::disk(0.99, 0.3).unwrap();
        let (nu, _) = rearrange(&m, &a).unwrap();
        assert!(measure_distance(&nu, &m).unwrap() < 0.05);
    }

    #[test]
    fn uniform_saturates_growth_bound() {
        let grid = standard_grid();
        let nu = grid.measure(|_| 1.0).unwrap();
        let rep = subharmonic_diagnostics(&nu).unwrap();
        assert!(rep.growth_deviation < 1e-10);
        assert!(rep.monotonicity_violation < 1e-12);
    }

    #[test]
    fn subharmonic_density_has_no_violations() {
        let grid = standard_grid();
        let nu = grid.measure(|z| (1.0 + 0.6 * z).norm_sqr()).unwrap();
        let rep = subharmonic_diagnostics(&nu).unwrap();
        assert_eq!(rep.monotonicity_violation, 0.0);
        assert!(rep.growth_violation <= 1e-12);
        let plain = disk_quadrature(16, 32, |_| 1.0).unwrap();
        assert!(matches!(subharmonic_diagnostics(&plain), Err(Error::GridMismatch)));
    }

    #[test]
    fn exact_density_matches_atom_pipeline() {
        let domain = ConformalDomain::from_real(&[1.0, 0.3]).unwrap();
        let mu = pullback_measure(&domain, 96, 192).unwrap();
        let xi = renormalize(&mu, 1e-12, 0).unwrap().xi;
        let canon = push_moebius(&mu, &xi);
        let shift = -xi.as_complex();
        let d2 = domain.clone();
        let density: Arc<dyn Fn(DiskPoint) -> f64 + Send + Sync> = Arc::new(move |w| {
            let z = disk_moebius(shift, w);
            d2.dphi(z).norm_sqr() * disk_moebius_prime(shift, w).norm_sqr()
        });
        let a = Cap::disk(0.3, 1.0).unwrap();
        let (nu, trace) = rearrange(&canon, &a).unwrap();
        let exact = RearrangedDensity::new(density, &trace).unwrap();
        // the exact density has integrable 1/|w − c| peaks at two boundary points,
        // so the plain grid misses some mass near the circle
        let gridded = exact.on_grid(&PolarGrid::composite(24, 4, 1536)).unwrap();
        assert!((gridded.total_mass() - nu.total_mass()).abs() < 2e-3 * nu.total_mass());
        assert!(measure_distance(&gridded, &nu).unwrap() < 1e-2);
        let rep = density_diagnostics(|w| exact.eval(w), nu.total_mass(), &standard_grid()).unwrap();
        assert!(rep.monotonicity_violation < 1e-6);
        assert!(rep.growth_violation < 1e-6);
    }

    proptest! {
        #[test]
        fn cap_reflection_involution(r in -0.9..0.9f64, t in 0.0..6.3f64, rho in 0.0..1.0f64, th in 0.0..6.3f64) {
            let a = Cap::disk(r, t).unwrap();
            let z = Complex64::from_polar(rho, th);
            prop_assert!((disk_cap_reflection(&a, disk_cap_reflection(&a, z)) - z).norm() < 1e-12);
        }

        #[test]
        fn cap_map_inverse_round_trip(r in -0.95..0.9f64, t in 0.0..6.3f64, rho in 0.0..0.99f64, th in 0.0..6.3f64) {
            let b = Cap::disk(r, t).unwrap();
            let phi = CapMap::new(&b).unwrap();
            let w = Complex64::from_polar(rho, th);
            let z = phi.inverse(w);
            prop_assert!(b.contains(&[z.re, z.im]));
            prop_assert!((phi.eval_unchecked(z) - w).norm() < 1e-9);
        }
    }
}
