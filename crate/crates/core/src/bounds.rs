//! Test functions and Rayleigh-quotient bounds.
//!
//! On the disk the test functions are `u_a^s = X_s ∘ ψ_a^{-1}` on a cap `a`,
//! lifted to the whole disk through the cap reflection. Their Dirichlet energy
//! is cap-independent and their `L²` norm against the original measure equals
//! `∫ X_s² dν_a`, which is bounded below for a multiple rearrangement. On the
//! sphere the numerator is replaced by the conformally invariant `n`-energy.

use crate::caps::{disk_cap_reflection, rearrange, Cap, CapMap, RearrangeTrace};
use crate::directions::{canonicalize, classify, default_r_grid, default_theta_grid, scan_caps, SCAN_EPS};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, tangent_frame};
use crate::measures::{
    direction_form, disk_features, pullback_measure, x_s, ConformalDomain, DirectionForm,
    DiscreteMeasure, DiskPoint, Space,
};
use crate::moebius::{ball_moebius, ball_moebius_factor, disk_moebius};
use crate::quadrature::{gauss_legendre_on, SphereRule};
use crate::specfun::{bound_constants, k_n, mu1_disk, radial_l2, radial_profile, radial_profile_prime};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Discretization allowance on every certificate inequality.
pub const SLACK: f64 = 1e-2;

/// `u_a^s = X_s ∘ ψ_a^{-1}` on the cap `a`, where `ψ_a^{-1}` is the
/// rearrangement pipeline `T'_a ∘ φ_b ∘ T_a` (just `T_a` on the sphere).
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub cap: Cap,
    pub s: Vec<f64>,
    xi: Vec<f64>,
    eta: Vec<f64>,
    phi: Option<CapMap>,
}

impl TestFunction {
    /// Test function for the pipeline recorded in `trace`.
    pub fn new(trace: &RearrangeTrace, s: &[f64]) -> Result<Self> {
        let space = trace.cap.space;
        if s.len() != space.dim() {
            return Err(Error::InvalidInput(format!(
                "direction has {} components, expected {}",
                s.len(),
                space.dim()
            )));
        }
        let phi = match &trace.b {
            Some(b) => Some(CapMap::new(b)?),
            None => None,
        };
        Ok(TestFunction {
            cap: trace.cap.clone(),
            s: unit(s)?,
            xi: trace.xi_a.clone(),
            eta: trace.eta_a.clone(),
            phi,
        })
    }

    /// `u = X_s` on `a` with no transport.
    pub fn bare(cap: &Cap, s: &[f64]) -> Result<Self> {
        let d = cap.space.dim();
        if s.len() != d {
            return Err(Error::InvalidInput(format!(
                "direction has {} components, expected {d}",
                s.len()
            )));
        }
        Ok(TestFunction {
            cap: cap.clone(),
            s: unit(s)?,
            xi: vec![0.0; d],
            eta: vec![0.0; d],
            phi: None,
        })
    }

    /// `ψ_a^{-1}(x)`, for `x` in the closed cap.
    pub fn transport(&self, x: &[f64]) -> Vec<f64> {
        match self.cap.space {
            Space::Disk => {
                let y = self.transport_disk(Complex64::new(x[0], x[1]));
                vec![y.re, y.im]
            }
            Space::Sphere { .. } => ball_moebius(&self.xi, x),
        }
    }

    fn transport_disk(&self, z: DiskPoint) -> DiskPoint {
        let xi = Complex64::new(self.xi[0], self.xi[1]);
        let eta = Complex64::new(self.eta[0], self.eta[1]);
        let mut w = disk_moebius(xi, z);
        if let Some(phi) = &self.phi {
            w = phi.eval_unchecked(w);
        }
        disk_moebius(eta, w)
    }

    /// `u(x)` for `x` in the closed cap (not checked).
    pub fn on_cap(&self, x: &[f64]) -> f64 {
        match self.cap.space {
            Space::Disk => self.on_cap_disk(Complex64::new(x[0], x[1])),
            Space::Sphere { .. } => dot(&ball_moebius(&self.xi, x), &self.s),
        }
    }

    fn on_cap_disk(&self, z: DiskPoint) -> f64 {
        let (a, b) = disk_features(self.transport_disk(z));
        a * self.s[0] + b * self.s[1]
    }

    /// The lift `ũ`: `u` on `a`, `u ∘ τ_a` on the complement.
    pub fn lift(&self, x: &[f64]) -> f64 {
        if self.cap.contains(x) {
            self.on_cap(x)
        } else {
            self.on_cap(&crate::caps::cap_reflection(&self.cap, x))
        }
    }
}

fn unit(s: &[f64]) -> Result<Vec<f64>> {
    let n = norm(s);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidInput("direction must be a nonzero vector".into()));
    }
    Ok(s.iter().map(|x| x / n).collect())
}

/// `ũ(z)` for a test function.
pub fn lift_evaluate(tf: &TestFunction, x: &[f64]) -> f64 {
    tf.lift(x)
}

/// `∫_D |∇ũ_a^s|² = 2 μ₁(D) π I_f`, the same for every cap and direction.
pub fn dirichlet_energy_closed_form() -> f64 {
    2.0 * mu1_disk() * PI * radial_l2()
}

/// `∫_D |∇ũ|²` by quadrature over the two sides of `∂a`, each parametrized as
/// `d_{rp}` of a half-disk, with central-difference gradients of the side's
/// own branch.
pub fn dirichlet_energy_quadrature(tf: &TestFunction, n_r: usize, n_theta: usize) -> Result<f64> {
    if tf.cap.space != Space::Disk {
        return Err(Error::SpaceMismatch(tf.cap.space.label(), "disk".into()));
    }
    let cap = &tf.cap;
    let p = cap.p_complex();
    let rp = cap.r * p;
    let h = 1e-6;
    let side = |reflect: bool| -> f64 {
        let branch = |z: DiskPoint| {
            if reflect {
                tf.on_cap_disk(disk_cap_reflection(cap, z))
            } else {
                tf.on_cap_disk(z)
            }
        };
        let centre = if reflect { (-p).arg() } else { p.arg() };
        let radial: Vec<(f64, f64)> = gauss_legendre_on(n_r, 0.0, 1.0).collect();
        let angular: Vec<(f64, f64)> =
            gauss_legendre_on(n_theta, centre - 0.5 * PI, centre + 0.5 * PI).collect();
        radial
            .par_iter()
            .map(|&(rho, wr)| {
                let mut acc = 0.0;
                for &(t, wt) in &angular {
                    let u = Complex64::from_polar(rho, t);
                    let z = disk_moebius(rp, u);
                    let jac = crate::moebius::disk_moebius_prime(rp, u).norm_sqr();
                    let gx = (branch(z + h) - branch(z - h)) / (2.0 * h);
                    let gy = (branch(z + Complex64::new(0.0, h)) - branch(z - Complex64::new(0.0, h)))
                        / (2.0 * h);
                    acc += wt * (gx * gx + gy * gy) * jac;
                }
                acc * wr * rho
            })
            .sum()
    };
    Ok(side(false) + side(true))
}

/// Output of [`l2_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Bound {
    /// `∫ X_s² dν` with `ν` scaled to mass `π`.
    pub value: f64,
    /// `π I_f`.
    pub lower: f64,
    /// `½ ∫ f(|z|)² dν`, equal to `value` for an exactly multiple `ν`.
    pub averaged: f64,
    pub gap: f64,
}

/// `∫ X_s² dν_a` against its lower bound `π I_f`. The measure is scaled to
/// mass `π` first.
pub fn l2_lower_bound(nu: &DiscreteMeasure, s: &[f64], tol: f64) -> Result<L2Bound> {
    if nu.space != Space::Disk {
        return Err(Error::SpaceMismatch(nu.space.label(), "disk".into()));
    }
    let nu = nu.with_mass(PI)?;
    let gap = direction_form(&nu).gap();
    if gap > tol {
        return Err(Error::NotMultiple { gap, tolerance: tol });
    }
    let s = unit(s)?;
    let value = nu.integrate(|x| {
        let v = x_s(Space::Disk, x, &s);
        v * v
    });
    let averaged = 0.5
        * nu.integrate(|x| {
            let f = radial_profile(norm(x).min(1.0));
            f * f
        });
    Ok(L2Bound {
        value,
        lower: PI * radial_l2(),
        averaged,
        gap,
    })
}

/// `∫ f(|z|)² dν` two ways: the atom sum, and `f(1)² G(1) − ∫₀¹ (f²)' G dr`
/// with `G(r) = ν(|z| < r)`, the latter integrated atom by atom.
pub fn radial_by_parts(nu: &DiscreteMeasure) -> (f64, f64) {
    let atom_sum = nu.integrate(|x| {
        let f = radial_profile(norm(x).min(1.0));
        f * f
    });
    let f1 = radial_profile(1.0);
    let boundary = f1 * f1 * nu.total_mass();
    let tail: f64 = nu
        .atoms()
        .map(|(x, w)| {
            let r0 = norm(x).min(1.0);
            let inner: f64 = gauss_legendre_on(12, r0, 1.0)
                .map(|(r, wr)| wr * 2.0 * radial_profile(r) * radial_profile_prime(r))
                .sum();
            w * inner
        })
        .sum();
    (atom_sum, boundary - tail)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    SimpleFolded,
    MultipleDirect,
}

/// Result of [`planar_bound_certificate`]. `quotient_sup` is the supremum of
/// the Rayleigh quotient over the test space with the measure scaled to mass
/// `π`, so that `μ₂(Ω)·Area(Ω) ≤ π·quotient_sup`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub domain_id: String,
    pub area: f64,
    pub quotient_sup: f64,
    /// `2μ₁(D)` (simple-folded) or `μ₁(D)` (multiple-direct).
    pub bound: f64,
    pub margin: f64,
    pub branch: Branch,
    pub slack: f64,
    /// Gap of the canonical measure.
    pub measure_gap: f64,
    /// Multiple cap used by the simple branch.
    pub cap: Option<Cap>,
    /// Gap of the rearrangement along `cap`.
    pub cap_gap: Option<f64>,
    /// Test-function energy (numerator).
    pub energy: f64,
    /// `min_s ∫ ũ_s² dμ` (denominator).
    pub min_denominator: f64,
    pub min_direction: [f64; 2],
    /// The same denominator recomputed by lifting onto the original atoms.
    pub lift_denominator: f64,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.quotient_sup <= self.bound * (1.0 + self.slack)
    }

    /// Implied upper bound on `μ₂(Ω)·Area(Ω)`.
    pub fn eigenvalue_bound(&self) -> f64 {
        PI * self.quotient_sup
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateOptions {
    pub n_r: usize,
    pub n_theta: usize,
    pub eps: f64,
    pub r_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        CertificateOptions {
            n_r: 96,
            n_theta: 192,
            eps: SCAN_EPS,
            r_grid: default_r_grid(),
            theta_grid: default_theta_grid(36),
        }
    }
}

/// Minimizes `V(s)` over unit `s` in the plane: 64 directions, then
/// golden-section search around the best one.
pub fn min_direction(form: &DirectionForm) -> ([f64; 2], f64) {
    let v = |t: f64| form.value(&[t.cos(), t.sin()]);
    let n = 64;
    let (mut best_t, mut best) = (0.0, f64::INFINITY);
    for k in 0..n {
        let t = PI * k as f64 / n as f64;
        let val = v(t);
        if val < best {
            best = val;
            best_t = t;
        }
    }
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut a, mut b) = (best_t - PI / n as f64, best_t + PI / n as f64);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (v(c), v(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = v(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = v(d);
        }
    }
    let t = 0.5 * (a + b);
    let val = v(t);
    if val < best {
        ([t.cos(), t.sin()], val)
    } else {
        ([best_t.cos(), best_t.sin()], best)
    }
}

/// Certificate with default resolution.
pub fn planar_bound_certificate(domain: &ConformalDomain, id: &str) -> Result<BoundReport> {
    planar_bound_certificate_with(domain, id, &CertificateOptions::default())
}

/// Builds the two-dimensional test space for `μ₂` of `φ(D)` and bounds its
/// Rayleigh quotient. Multiple measures use `{X_s}` directly; simple ones use
/// the lifted test functions of a multiple cap found by [`scan_caps`].
pub fn planar_bound_certificate_with(
    domain: &ConformalDomain,
    id: &str,
    opts: &CertificateOptions,
) -> Result<BoundReport> {
    let mu = pullback_measure(domain, opts.n_r, opts.n_theta)?.with_mass(PI)?;
    let canon = canonicalize(&mu)?;
    let cls = classify(&canon.measure, opts.eps);
    let mu1 = mu1_disk();
    if cls.is_multiple() {
        let form = direction_form(&canon.measure);
        let (s, v) = min_direction(&form);
        let energy = mu1 * PI * radial_l2();
        let lift = canon.measure.integrate(|x| {
            let u = x_s(Space::Disk, x, &s);
            u * u
        });
        let quotient = energy / v;
        return Ok(BoundReport {
            domain_id: id.to_string(),
            area: domain.area,
            quotient_sup: quotient,
            bound: mu1,
            margin: mu1 - quotient,
            branch: Branch::MultipleDirect,
            slack: SLACK,
            measure_gap: cls.gap(),
            cap: None,
            cap_gap: None,
            energy,
            min_denominator: v,
            min_direction: s,
            lift_denominator: lift,
        });
    }
    let scan = scan_caps(&canon.measure, &opts.r_grid, &opts.theta_grid, opts.eps)?;
    let (nu, trace) = rearrange(&canon.measure, &scan.cap)?;
    let form = direction_form(&nu);
    let (s, v) = min_direction(&form);
    let tf = TestFunction::new(&trace, &s)?;
    let lift = canon.measure.integrate(|x| {
        let u = tf.lift(x);
        u * u
    });
    let energy = dirichlet_energy_closed_form();
    let quotient = energy / v;
    let bound = 2.0 * mu1;
    Ok(BoundReport {
        domain_id: id.to_string(),
        area: domain.area,
        quotient_sup: quotient,
        bound,
        margin: bound - quotient,
        branch: Branch::SimpleFolded,
        slack: SLACK,
        measure_gap: cls.gap(),
        cap: Some(scan.cap),
        cap_gap: Some(form.gap()),
        energy,
        min_denominator: v,
        min_direction: s,
        lift_denominator: lift,
    })
}

/// Modified Rayleigh quotient `R′(ũ) = (∫|∇ũ|ⁿ)^{2/n} / ∫ ũ² dg` on `S^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereQuotient {
    pub n: usize,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
    /// `(n+1)(2K_n)^{2/n}`.
    pub bound: f64,
    pub cap: Option<Cap>,
    pub s: Vec<f64>,
}

impl SphereQuotient {
    pub fn holds(&self) -> bool {
        self.ratio < self.bound
    }
}

/// Polar and azimuthal node counts of the numerator rule.
const SPHERE_RULE: (usize, usize) = (32, 64);

/// `R′(ũ_a^s)` for a measure `g` on `S^n` (scaled to unit mass). With a cap
/// the test function is the lift of `X_s ∘ d_{ξ(a)}` and the numerator is
/// `(2∫_{d_ξ(a)} |∇X_s|ⁿ)^{2/n}`, integrated over the hemisphere through
/// `d_ξ ∘ d_{rp}`; without one it is `X_s` itself on the whole sphere.
pub fn sphere_modified_quotient(g: &DiscreteMeasure, a: Option<&Cap>, s: &[f64]) -> Result<SphereQuotient> {
    let Space::Sphere { n } = g.space else {
        return Err(Error::SpaceMismatch(g.space.label(), "sphere".into()));
    };
    if s.len() != n + 1 {
        return Err(Error::InvalidInput(format!(
            "direction has {} components, expected {}",
            s.len(),
            n + 1
        )));
    }
    let s = unit(s)?;
    let g = g.with_mass(1.0)?;
    let nf = n as f64;
    let grad_pow = |y: &[f64]| {
        let c = dot(&s, y);
        (1.0 - c * c).max(0.0).powf(0.5 * nf)
    };
    let (np, na) = SPHERE_RULE;
    let (numerator, denominator) = match a {
        None => {
            let rule = SphereRule::full(n, np, na);
            let energy: f64 = (0..rule.len())
                .into_par_iter()
                .map(|i| rule.weights[i] * grad_pow(rule.point(i)))
                .sum();
            let den = g.integrate(|x| {
                let u = dot(&s, x);
                u * u
            });
            (energy.powf(2.0 / nf), den)
        }
        Some(cap) => {
            if cap.space != g.space {
                return Err(Error::SpaceMismatch(cap.space.label(), g.space.label()));
            }
            let (nu, trace) = rearrange(&g, cap)?;
            let xi = trace.xi_a.clone();
            let rp = cap.center_shift();
            let rule = SphereRule::cap(n, &cap.p, 0.5 * PI, np, na);
            let energy: f64 = (0..rule.len())
                .into_par_iter()
                .map(|i| {
                    let x = rule.point(i);
                    let y = ball_moebius(&rp, x);
                    let lam = ball_moebius_factor(&rp, x) * ball_moebius_factor(&xi, &y);
                    let z = ball_moebius(&xi, &y);
                    rule.weights[i] * grad_pow(&z) * lam.powf(nf)
                })
                .sum();
            let den = nu.integrate(|x| {
                let u = dot(&s, x);
                u * u
            });
            ((2.0 * energy).powf(2.0 / nf), den)
        }
    };
    let bound = bound_constants(n as u32).theorem_constant;
    Ok(SphereQuotient {
        n,
        numerator,
        denominator,
        ratio: numerator / denominator,
        bound,
        cap: a.cloned(),
        s,
    })
}

/// `(2K_n)^{2/n}(n+1)` recomputed from `K_n`; equals the theorem constant.
pub fn sphere_bound(n: usize) -> f64 {
    (n as f64 + 1.0) * (2.0 * k_n(n as u32)).powf(2.0 / n as f64)
}

/// Both quotients of a function on a weighted sphere rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    /// `∫ ρ^{1−2/n} |∇u|² dg₀ / ∫ u² ρ dg₀`.
    pub r: f64,
    /// `(∫ |∇u|ⁿ dg₀)^{2/n} / ∫ u² ρ dg₀`.
    pub r_prime: f64,
    /// `R = R′` to 1e-8 relative.
    pub equality: bool,
}

/// Compares the Rayleigh quotient of the metric `ρ^{2/n} g₀` with the
/// modified quotient, where `ρ` is the density of `g` (scaled to unit mass)
/// relative to its underlying sphere rule. Gradients are central differences
/// along an orthonormal tangent frame.
pub fn holder_gap_check(u: impl Fn(&[f64]) -> f64 + Sync, g: &DiscreteMeasure) -> Result<HolderReport> {
    let Space::Sphere { n } = g.space else {
        return Err(Error::SpaceMismatch(g.space.label(), "sphere".into()));
    };
    let reference = g.reference_weights.as_ref().ok_or(Error::GridMismatch)?;
    let mass = g.total_mass();
    let nf = n as f64;
    let h = 1e-6;
    let parts: Vec<(f64, f64, f64)> = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = g.point(i);
            let w0 = reference[i];
            let rho = g.weights()[i] / (w0 * mass);
            let mut grad2 = 0.0;
            for v in tangent_frame(x) {
                let plus = step(x, &v, h);
                let minus = step(x, &v, -h);
                let d = (u(&plus) - u(&minus)) / (2.0 * h);
                grad2 += d * d;
            }
            let ux = u(x);
            (
                w0 * rho.powf(1.0 - 2.0 / nf) * grad2,
                w0 * grad2.powf(0.5 * nf),
                w0 * rho * ux * ux,
            )
        })
        .collect();
    let dirichlet: f64 = parts.iter().map(|p| p.0).sum();
    let n_energy: f64 = parts.iter().map(|p| p.1).sum();
    let l2: f64 = parts.iter().map(|p| p.2).sum();
    if !(l2 > 0.0) {
        return Err(Error::InvalidInput("test function vanishes on the support".into()));
    }
    let r = dirichlet / l2;
    let r_prime = n_energy.powf(2.0 / nf) / l2;
    Ok(HolderReport {
        r,
        r_prime,
        equality: (r - r_prime).abs() <= 1e-8 * r_prime,
    })
}

/// `exp_x(t v)` approximated by normalizing `x + t v`; the curve has unit
/// speed at `t = 0`, which is all a central difference needs.
fn step(x: &[f64], v: &[f64], t: f64) -> Vec<f64> {
    let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + t * b).collect();
    let ny = norm(&y);
    y.iter().map(|c| c / ny).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{disk_quadrature, sphere_quadrature, uniform_disk};
    use crate::quadrature::adaptive_gk;
    use crate::specfun::bessel_j1;

    #[test]
    fn radial_l2_matches_quadrature() {
        let q = adaptive_gk(
            |r| {
                let f = bessel_j1(crate::specfun::zeta() * r);
                f * f * r
            },
            0.0,
            1.0,
            1e-13,
            4,
        );
        assert!((q - radial_l2()).abs() < 1e-10);
    }

    #[test]
    fn energy_is_direction_free() {
        let e = dirichlet_energy_closed_form();
        let cap = Cap::disk(0.2, 0.4).unwrap();
        for s in [[1.0, 0.0], [0.0, 1.0]] {
            let tf = TestFunction::bare(&cap, &s).unwrap();
            assert_eq!(tf.s.len(), 2);
            assert!((dirichlet_energy_closed_form() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn bare_lift_on_half_disk_is_even_reflection() {
        let p = Complex64::from_polar(1.0, 0.7);
        let cap = Cap::disk_p(0.0, p).unwrap();
        let tf = TestFunction::bare(&cap, &[0.6, 0.8]).unwrap();
        for z in [Complex64::new(-0.3, 0.1), Complex64::new(-0.5, -0.6)] {
            if cap.contains(&[z.re, z.im]) {
                continue;
            }
            let refl = crate::moebius::disk_reflection(p, z);
            let direct = x_s(Space::Disk, &[refl.re, refl.im], &[0.6, 0.8]);
            assert!((tf.lift(&[z.re, z.im]) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn lift_is_continuous_across_the_edge() {
        let mu = disk_quadrature(24, 48, |z| (1.0 + 0.6 * z).norm_sqr()).unwrap();
        let cap = Cap::disk(0.3, 1.1).unwrap();
        let (_, trace) = rearrange(&mu, &cap).unwrap();
        let tf = TestFunction::new(&trace, &[1.0, 0.5]).unwrap();
        let p = cap.p_complex();
        for t in [-1.2_f64, -0.4, 0.3, 1.0] {
            let edge = disk_moebius(cap.r * p, Complex64::new(0.0, 1.0) * p * t.tanh());
            let inward = edge + 1e-9 * p;
            let outward = edge - 1e-9 * p;
            let a = tf.lift(&[inward.re, inward.im]);
            let b = tf.lift(&[outward.re, outward.im]);
            assert!((a - b).abs() < 1e-7, "{a} {b}");
        }
    }

    #[test]
    fn lift_integral_equals_folded_integral() {
        let mu = disk_quadrature(32, 64, |z| (1.0 + 0.4 * z * z).norm_sqr()).unwrap();
        let cap = Cap::disk(-0.2, 2.0).unwrap();
        let (nu, trace) = rearrange(&mu, &cap).unwrap();
        let tf = TestFunction::new(&trace, &[0.3, -1.0]).unwrap();
        let lifted = mu.integrate(|x| tf.lift(x));
        let folded = crate::caps::fold_measure(&mu, &cap).unwrap().integrate(|x| tf.on_cap(x));
        let pushed = nu.integrate(|x| x_s(Space::Disk, x, &tf.s));
        assert!((lifted - folded).abs() < 1e-8);
        assert!((lifted - pushed).abs() < 1e-8);
    }

    #[test]
    fn uniform_measure_saturates_l2_bound() {
        let nu = uniform_disk(48, 96);
        let b = l2_lower_bound(&nu, &[1.0, 0.0], 1e-3).unwrap();
        assert!((b.value - b.lower).abs() < 1e-10);
        assert!((b.averaged - b.lower).abs() < 1e-10);
        let elongated = disk_quadrature(24, 48, |z| 1.0 + 0.8 * z.re * z.re).unwrap();
        let err = l2_lower_bound(&elongated, &[1.0, 0.0], 1e-3).unwrap_err();
        assert!(matches!(err, Error::NotMultiple { .. }));
    }

    #[test]
    fn radial_integration_by_parts() {
        let nu = disk_quadrature(32, 64, |z| (1.0 + 0.5 * z).norm_sqr()).unwrap();
        let (a, b) = radial_by_parts(&nu);
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn golden_section_finds_eigenvalue() {
        let form = DirectionForm::from_matrix(vec![2.0, 0.3, 0.3, 1.0], 2);
        let (s, v) = min_direction(&form);
        assert!((v - form.eigenvalues[1]).abs() < 1e-12);
        assert!((norm(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disk_certificate_is_multiple_and_saturates() {
        let r = planar_bound_certificate(&ConformalDomain::identity(), "disk").unwrap();
        assert_eq!(r.branch, Branch::MultipleDirect);
        assert!((r.quotient_sup - mu1_disk()).abs() < 1e-8 * mu1_disk());
        assert!(r.holds());
    }

    #[test]
    fn sphere_bound_matches_constants() {
        for n in [1, 3, 5] {
            let c = bound_constants(n as u32).theorem_constant;
            assert!((sphere_bound(n) - c).abs() < 1e-10 * c);
        }
    }

    #[test]
    fn full_sphere_numerator_is_k_n() {
        let g = sphere_quadrature(3, 8, 16, |_| 1.0).unwrap();
        let k = k_n(3).powf(2.0 / 3.0);
        let q = sphere_modified_quotient(&g, None, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((q.numerator - k).abs() < 1e-8 * k);
        let q = sphere_modified_quotient(&g, None, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!((q.numerator - k).abs() < 1e-6 * k);
        assert!((q.denominator - 0.25).abs() < 1e-6);
        assert!(q.holds());
    }

    #[test]
    fn hemisphere_rearrangement_of_uniform_sphere() {
        let g = sphere_quadrature(3, 12, 24, |_| 1.0).unwrap();
        let cap = Cap::new(Space::Sphere { n: 3 }, 0.0, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let q = sphere_modified_quotient(&g, Some(&cap), &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(q.denominator >= 0.25 - 1e-3, "{}", q.denominator);
        assert!(q.holds(), "{} {}", q.ratio, q.bound);
    }

    #[test]
    fn holder_equality_for_unit_speed_function() {
        let g = sphere_quadrature(1, 4, 256, |_| 1.0).unwrap();
        let tri = |x: &[f64]| 0.5 * PI - x[0].atan2(x[1]).abs();
        let rep = holder_gap_check(tri, &g).unwrap();
        assert!((rep.r - rep.r_prime).abs() < 1e-8 * rep.r_prime);
        assert!(rep.equality);
    }

    #[test]
    fn holder_strict_for_coordinate_on_s3() {
        let g = sphere_quadrature(3, 12, 24, |_| 1.0).unwrap();
        let rep = holder_gap_check(|x| x[0], &g).unwrap();
        assert!(rep.r < rep.r_prime - 1e-3);
        assert!(!rep.equality);
        // R(X_s) = λ₁ Vol^{2/n} for the round sphere
        let expected = 3.0 * crate::specfun::omega_n(3).powf(2.0 / 3.0);
        assert!((rep.r - expected).abs() < 1e-6 * expected);
    }
}
