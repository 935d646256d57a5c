//! Maximizing directions: simple/multiple classification, canonical form,
//! the cap scan for a multiple rearrangement, and winding/degree checks.

use crate::caps::{rearrange, Cap};
use crate::error::{Error, Result};
use crate::linalg::{determinant, dot, norm, solve_dense, tangent_frame};
use crate::measures::{direction_form, DirectionForm, DiscreteMeasure, DiskPoint, Space, SpherePoint};
use crate::moebius::{disk_moebius, disk_moebius_prime, push_moebius, renormalize, MoebiusParam};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Default relative-gap tolerance for calling a measure multiple.
pub const SCAN_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Simple { direction: Vec<f64>, gap: f64 },
    Multiple { gap: f64 },
}

impl Classification {
    pub fn is_multiple(&self) -> bool {
        matches!(self, Classification::Multiple { .. })
    }

    pub fn gap(&self) -> f64 {
        match self {
            Classification::Simple { gap, .. } | Classification::Multiple { gap } => *gap,
        }
    }
}

/// Multiple iff the relative gap between the two largest eigenvalues of the
/// direction form is below `eps`.
pub fn classify(m: &DiscreteMeasure, eps: f64) -> Classification {
    classify_form(&direction_form(m), eps)
}

pub fn classify_form(form: &DirectionForm, eps: f64) -> Classification {
    let gap = form.gap();
    if gap < eps {
        Classification::Multiple { gap }
    } else {
        Classification::Simple {
            direction: form.max_direction.clone(),
            gap,
        }
    }
}

/// A measure brought to canonical position: `canonical = (Q ∘ d_ξ)_* original`
/// with `Q` orthogonal.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub measure: DiscreteMeasure,
    pub xi: MoebiusParam,
    /// Row-major orthogonal matrix applied after `d_ξ`.
    pub rotation: Vec<f64>,
    pub form: DirectionForm,
}

impl Canonical {
    /// Density of the canonical disk measure, given the density of the
    /// original one.
    pub fn pull_density(
        &self,
        density: Arc<dyn Fn(DiskPoint) -> f64 + Send + Sync>,
    ) -> Arc<dyn Fn(DiskPoint) -> f64 + Send + Sync> {
        let q = &self.rotation;
        // Q is a rotation or a reflection in the plane
        let det = q[0] * q[3] - q[1] * q[2];
        let (qc, reflect) = (Complex64::new(q[0], q[2]), det < 0.0);
        let shift = -self.xi.as_complex();
        Arc::new(move |w: DiskPoint| {
            // undo Q
            let v = if reflect {
                (w * qc.conj()).conj()
            } else {
                w * qc.conj()
            };
            let z = disk_moebius(shift, v);
            density(z) * disk_moebius_prime(shift, v).norm_sqr()
        })
    }
}

/// Renormalizes, then rotates the maximizing direction onto `e₁`.
pub fn canonicalize(m: &DiscreteMeasure) -> Result<Canonical> {
    let renorm = renormalize(m, 1e-12, 0)?;
    let centered = push_moebius(m, &renorm.xi);
    let form = direction_form(&centered);
    let s = &form.max_direction;
    let d = m.dim();
    let rotation = match m.space {
        Space::Disk => {
            let (c, sn) = (s[0], s[1]);
            vec![c, sn, -sn, c]
        }
        Space::Sphere { .. } => householder_to_e1(s),
    };
    let mut measure = centered.rotated(&rotation);
    measure.reference_weights = None;
    let form = direction_form(&measure);
    debug_assert_eq!(rotation.len(), d * d);
    Ok(Canonical {
        measure,
        xi: renorm.xi,
        rotation,
        form,
    })
}

fn householder_to_e1(s: &[f64]) -> Vec<f64> {
    let d = s.len();
    let mut v = s.to_vec();
    v[0] -= 1.0;
    let vv = dot(&v, &v);
    let mut q = vec![0.0; d * d];
    for i in 0..d {
        q[i * d + i] = 1.0;
    }
    if vv < 1e-30 {
        return q;
    }
    for i in 0..d {
        for j in 0..d {
            q[i * d + j] -= 2.0 * v[i] * v[j] / vv;
        }
    }
    q
}

/// Projective angle of a planar direction, in `[0, π)`.
pub fn projective_angle(s: &[f64]) -> f64 {
    let a = s[1].atan2(s[0]);
    a.rem_euclid(PI)
}

/// Distance between two projective angles, in `[0, π/2]`.
pub fn projective_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// One evaluation of the direction field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub r: f64,
    pub theta: f64,
    pub s: [f64; 2],
    pub gap: f64,
    /// `((B₁₁ − B₂₂) + 2iB₁₂)/tr B`; vanishes exactly at multiple caps.
    pub deviator: [f64; 2],
}

fn field_sample(m: &DiscreteMeasure, r: f64, theta: f64) -> Result<FieldSample> {
    let cap = Cap::disk(r, theta)?;
    let (nu, _) = rearrange(m, &cap)?;
    let f = direction_form(&nu);
    let b = &f.matrix;
    let tr = b[0] + b[3];
    Ok(FieldSample {
        r,
        theta,
        s: [f.max_direction[0], f.max_direction[1]],
        gap: f.gap(),
        deviator: [(b[0] - b[3]) / tr, 2.0 * b[1] / tr],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindingEntry {
    pub r: f64,
    pub winding: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapScanResult {
    pub cap: Cap,
    pub gap: f64,
    pub direction_field: Vec<FieldSample>,
    pub winding_numbers: Vec<WindingEntry>,
    pub refinement_steps: usize,
}

impl CapScanResult {
    /// CSV with columns `r, theta, s_x, s_y, gap`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,s_x,s_y,gap\n");
        for f in &self.direction_field {
            out.push_str(&format!(
                "{:.6},{:.6},{:.12},{:.12},{:.6e}\n",
                f.r, f.theta, f.s[0], f.s[1], f.gap
            ));
        }
        out
    }
}

/// Half-turn count of the projective field along a loop of samples.
fn loop_winding(samples: &[&FieldSample]) -> Result<i64> {
    let mut total = 0.0;
    for i in 0..samples.len() {
        let a = samples[i];
        let b = samples[(i + 1) % samples.len()];
        for s in [a, b] {
            if s.gap < 1e-9 {
                return Err(Error::DegenerateField {
                    gap: s.gap,
                    angle: s.theta,
                });
            }
        }
        let mut d = projective_angle(&b.s) - projective_angle(&a.s);
        d -= PI * (d / PI).round();
        total += d;
    }
    Ok((total / PI).round() as i64)
}

/// Number of half-turns of `θ ↦ [s(a_{r,e^{iθ}})]` in `ℝP¹`.
pub fn winding_diagnostic(m: &DiscreteMeasure, r: f64, n_theta: usize) -> Result<i64> {
    let samples: Vec<FieldSample> = (0..n_theta)
        .into_par_iter()
        .map(|k| field_sample(m, r, 2.0 * PI * k as f64 / n_theta as f64))
        .collect::<Result<_>>()?;
    let refs: Vec<&FieldSample> = samples.iter().collect();
    loop_winding(&refs)
}

/// Default r-ladder for scans.
pub fn default_r_grid() -> Vec<f64> {
    (0..13).map(|i| -0.95 + 0.95 * i as f64 / 6.0).collect()
}

pub fn default_theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Scans caps `a_{r,e^{iθ}}` for a multiple rearrangement.
///
/// Cells of the `(r, θ)` grid around which the deviator winds are refined
/// by damped Newton on the deviator (central differences), with a pattern
/// search on the gap as fallback.
pub fn scan_caps(
    m: &DiscreteMeasure,
    r_grid: &[f64],
    theta_grid: &[f64],
    eps: f64,
) -> Result<CapScanResult> {
    if m.space != Space::Disk {
        return Err(Error::DimensionUnsupported(m.dim() - 1));
    }
    let nr = r_grid.len();
    let nt = theta_grid.len();
    let jobs: Vec<(f64, f64)> = r_grid
        .iter()
        .flat_map(|&r| theta_grid.iter().map(move |&t| (r, t)))
        .collect();
    let field: Vec<FieldSample> = jobs
        .par_iter()
        .map(|&(r, t)| field_sample(m, r, t))
        .collect::<Result<_>>()?;
    let at = |i: usize, j: usize| &field[i * nt + (j % nt)];
    let winding_numbers = (0..nr)
        .map(|i| {
            let row: Vec<&FieldSample> = (0..nt).map(|j| at(i, j)).collect();
            WindingEntry {
                r: r_grid[i],
                winding: loop_winding(&row).unwrap_or(i64::MIN),
            }
        })
        .collect();

    let mut candidates: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..nr.saturating_sub(1) {
        for j in 0..nt {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut turn = 0.0;
            for k in 0..4 {
                let a = corners[k].deviator;
                let b = corners[(k + 1) % 4].deviator;
                let d = Complex64::new(b[0], b[1]) / Complex64::new(a[0], a[1]);
                turn += d.arg();
            }
            if (turn / (2.0 * PI)).round() != 0.0 {
                let gmin = corners.iter().map(|c| c.gap).fold(f64::INFINITY, f64::min);
                let t1 = theta_grid[j];
                let t2 = if j + 1 < nt { theta_grid[j + 1] } else { theta_grid[0] + 2.0 * PI };
                candidates.push((0.5 * (r_grid[i] + r_grid[i + 1]), 0.5 * (t1 + t2), gmin));
            }
        }
    }
    let best_grid = field
        .iter()
        .min_by(|a, b| a.gap.total_cmp(&b.gap))
        .expect("nonempty grid");
    if candidates.is_empty() {
        candidates.push((best_grid.r, best_grid.theta, best_grid.gap));
    }
    candidates.sort_by(|a, b| a.2.total_cmp(&b.2));

    let mut best: Option<(FieldSample, usize)> = None;
    let mut steps = 0;
    for &(r0, t0, _) in candidates.iter().take(4) {
        let (sample, used) = refine(m, r0, t0)?;
        steps += used;
        let better = best.as_ref().is_none_or(|(b, _)| sample.gap < b.gap);
        if better {
            best = Some((sample, used));
        }
        if best.as_ref().is_some_and(|(b, _)| b.gap < 1e-6) {
            break;
        }
    }
    let (sample, _) = best.expect("at least one candidate");
    let cap = Cap::disk(sample.r, sample.theta)?;
    if sample.gap >= eps {
        return Err(Error::NotFound {
            gap: sample.gap,
            r: sample.r,
            angle: sample.theta,
        });
    }
    Ok(CapScanResult {
        cap,
        gap: sample.gap,
        direction_field: field,
        winding_numbers,
        refinement_steps: steps,
    })
}

fn refine(m: &DiscreteMeasure, r0: f64, t0: f64) -> Result<(FieldSample, usize)> {
    let clamp_r = |r: f64| r.clamp(-0.995, 0.995);
    let mut cur = field_sample(m, r0, t0)?;
    let mut steps = 0;
    let h = 1e-5;
    for _ in 0..25 {
        if cur.gap < 1e-9 {
            break;
        }
        steps += 1;
        let pr = field_sample(m, clamp_r(cur.r + h), cur.theta)?;
        let mr = field_sample(m, clamp_r(cur.r - h), cur.theta)?;
        let pt = field_sample(m, cur.r, cur.theta + h)?;
        let mt = field_sample(m, cur.r, cur.theta - h)?;
        let dr = pr.r - mr.r;
        let jac = [
            (pr.deviator[0] - mr.deviator[0]) / dr,
            (pt.deviator[0] - mt.deviator[0]) / (2.0 * h),
            (pr.deviator[1] - mr.deviator[1]) / dr,
            (pt.deviator[1] - mt.deviator[1]) / (2.0 * h),
        ];
        let Some(step) = solve_dense(&jac, &[-cur.deviator[0], -cur.deviator[1]]) else {
            break;
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..10 {
            let r = clamp_r(cur.r + alpha * step[0].clamp(-0.2, 0.2));
            let t = cur.theta + alpha * step[1].clamp(-0.5, 0.5);
            let cand = field_sample(m, r, t)?;
            if cand.gap < cur.gap {
                accepted = Some(cand);
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(c) => cur = c,
            None => break,
        }
    }
    if cur.gap >= 1e-6 {
        let (c, used) = pattern_search(m, cur)?;
        cur = c;
        steps += used;
    }
    Ok((cur, steps))
}

fn pattern_search(m: &DiscreteMeasure, start: FieldSample) -> Result<(FieldSample, usize)> {
    let mut cur = start;
    let mut step = 0.02;
    let mut used = 0;
    while step > 1e-7 && used < 200 {
        used += 1;
        let mut moved = false;
        for (dr, dt) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let r = (cur.r + dr).clamp(-0.995, 0.995);
            let cand = field_sample(m, r, cur.theta + dt)?;
            if cand.gap < cur.gap {
                cur = cand;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((cur, used))
}

/// Gap of the rearrangement of a sphere measure along `a_{r,p}`.
pub fn sphere_cap_gap(m: &DiscreteMeasure, r: f64, p: &[f64]) -> Result<f64> {
    let cap = Cap::new(m.space, r, p.to_vec())?;
    let (nu, _) = rearrange(m, &cap)?;
    Ok(direction_form(&nu).gap())
}

/// Minimizes the gap over caps of the sphere by multistart pattern search in
/// `(r, p)`.
pub fn sphere_scan(m: &DiscreteMeasure, eps: f64, seed: u64) -> Result<(Cap, f64)> {
    let Space::Sphere { n } = m.space else {
        return Err(Error::DimensionUnsupported(2));
    };
    if n % 2 == 0 {
        return Err(Error::DimensionUnsupported(n));
    }
    let d = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in [-0.5, 0.0, 0.5] {
        for _ in 0..8 {
            let g: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let nn = norm(&g);
            starts.push((r, g.iter().map(|x| x / nn).collect()));
        }
    }
    let scored: Vec<(f64, f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|(r, p)| sphere_cap_gap(m, r, &p).map(|g| (g, r, p)))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[a].0.total_cmp(&scored[b].0));
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for &k in order.iter().take(3) {
        let (mut g, mut r, mut p) = scored[k].clone();
        let mut step = 0.1;
        let mut iters = 0;
        while step > 1e-6 && iters < 400 && g > 1e-9 {
            iters += 1;
            let frame = tangent_frame(&p);
            let mut moved = false;
            let mut moves: Vec<(f64, Vec<f64>)> = vec![(step, vec![0.0; d]), (-step, vec![0.0; d])];
            for v in &frame {
                moves.push((0.0, v.iter().map(|x| x * step).collect()));
                moves.push((0.0, v.iter().map(|x| -x * step).collect()));
            }
            for (dr, dp) in moves {
                let rr = (r + dr).clamp(-0.98, 0.98);
                let q: Vec<f64> = p.iter().zip(&dp).map(|(a, b)| a + b).collect();
                let qn = norm(&q);
                let q: Vec<f64> = q.iter().map(|x| x / qn).collect();
                let cand = sphere_cap_gap(m, rr, &q)?;
                if cand < g {
                    g = cand;
                    r = rr;
                    p = q;
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if best.as_ref().is_none_or(|b| g < b.0) {
            best = Some((g, r, p));
        }
        if best.as_ref().is_some_and(|b| b.0 < eps * 1e-3) {
            break;
        }
    }
    let (g, r, p) = best.expect("starts");
    if g >= eps {
        return Err(Error::NotFound { gap: g, r, angle: p[0].acos() });
    }
    Ok((Cap::new(m.space, r, p)?, g))
}

/// `ψ(p) = 2(e₁, p)p − e₁`.
pub fn psi_map(p: &[f64]) -> Vec<f64> {
    let t = 2.0 * p[0];
    let mut out: Vec<f64> = p.iter().map(|x| t * x).collect();
    out[0] -= 1.0;
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub n: usize,
    pub deg_psi: i64,
    pub deg_phi: i64,
    pub target: Vec<f64>,
    pub preimages: Vec<Vec<f64>>,
    pub signs: Vec<i64>,
}

/// Degree of `ψ` (and of its projectivization `φ = π ∘ ψ`) counted with
/// signed preimages of a random regular value. Preimages are located by
/// Newton's method started from the `grid` points; orientation signs come
/// from finite-difference Jacobians in positively oriented tangent frames.
pub fn sphere_degree_check(n: usize, grid: &[SpherePoint], seed: u64) -> Result<DegreeReport> {
    if n % 2 == 0 {
        return Err(Error::EvenDimension(n));
    }
    if grid.iter().any(|p| p.n() != n) {
        return Err(Error::InvalidInput("grid points of the wrong dimension".into()));
    }
    let d = n + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = loop {
        let g: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let nn = norm(&g);
        if nn > 0.1 {
            let y: Vec<f64> = g.iter().map(|x| x / nn).collect();
            if (y[0] + 1.0).abs() > 0.1 && (y[0] - 1.0).abs() > 0.1 {
                break y;
            }
        }
    };
    let (pre_y, sign_y) = signed_preimages(&target, grid);
    let antipode: Vec<f64> = target.iter().map(|x| -x).collect();
    let (pre_minus, sign_minus) = signed_preimages(&antipode, grid);
    let deg_psi: i64 = sign_y.iter().sum();
    // the antipodal map of S^n has degree (−1)^{n+1}
    let antipodal = if n % 2 == 1 { 1 } else { -1 };
    let deg_phi = deg_psi + antipodal * sign_minus.iter().sum::<i64>();
    let mut preimages = pre_y;
    preimages.extend(pre_minus);
    let mut signs = sign_y;
    signs.extend(sign_minus);
    Ok(DegreeReport {
        n,
        deg_psi,
        deg_phi,
        target,
        preimages,
        signs,
    })
}

fn signed_preimages(y: &[f64], grid: &[SpherePoint]) -> (Vec<Vec<f64>>, Vec<i64>) {
    let d = y.len();
    let n = d - 1;
    let frame_y = tangent_frame(y);
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut signs = Vec::new();
    for start in grid {
        let mut p = start.coords().to_vec();
        let mut ok = false;
        for _ in 0..60 {
            let f = psi_map(&p);
            let res: Vec<f64> = f.iter().zip(y).map(|(a, b)| a - b).collect();
            if norm(&res) < 1e-13 {
                ok = true;
                break;
            }
            let (jac, frame_p) = tangent_jacobian(&p, &frame_y);
            let rhs: Vec<f64> = frame_y.iter().map(|v| -dot(v, &res)).collect();
            let Some(step) = solve_dense(&jac, &rhs) else { break };
            let mut q = p.clone();
            for (k, v) in frame_p.iter().enumerate() {
                for i in 0..d {
                    q[i] += step[k].clamp(-0.5, 0.5) * v[i];
                }
            }
            let qn = norm(&q);
            p = q.iter().map(|x| x / qn).collect();
        }
        if !ok || found.iter().any(|f| norm(&f.iter().zip(&p).map(|(a, b)| a - b).collect::<Vec<_>>()) < 1e-6) {
            continue;
        }
        let (jac, _) = tangent_jacobian(&p, &frame_y);
        let det = determinant(&jac, n);
        signs.push(if det > 0.0 { 1 } else { -1 });
        found.push(p);
    }
    (found, signs)
}

/// Jacobian of `ψ` at `p` from the oriented frame at `p` to `frame_y`.
fn tangent_jacobian(p: &[f64], frame_y: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = p.len();
    let n = d - 1;
    let frame_p = tangent_frame(p);
    let h = 1e-6;
    let mut jac = vec![0.0; n * n];
    for (j, v) in frame_p.iter().enumerate() {
        let plus: Vec<f64> = p.iter().zip(v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = p.iter().zip(v).map(|(a, b)| a - h * b).collect();
        let np = norm(&plus);
        let nm = norm(&minus);
        let fp = psi_map(&plus.iter().map(|x| x / np).collect::<Vec<_>>());
        let fm = psi_map(&minus.iter().map(|x| x / nm).collect::<Vec<_>>());
        let diff: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        for (i, w) in frame_y.iter().enumerate() {
            jac[i * n + j] = dot(w, &diff);
        }
    }
    (jac, frame_p)
}

/// Starting points for [`sphere_degree_check`]: the nodes of a product rule.
pub fn sphere_grid(n: usize, n_polar: usize, n_az: usize) -> Vec<SpherePoint> {
    let rule = crate::quadrature::SphereRule::full(n, n_polar, n_az);
    (0..rule.len())
        .map(|i| SpherePoint::normalized(rule.point(i).to_vec()))
        .collect()
}
