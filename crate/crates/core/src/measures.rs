//! Atom-set measures on the closed unit disk and the unit n-sphere.
//!
//! A [`DiscreteMeasure`] stores its atoms flat (`dim` coordinates per atom)
//! next to their weights. Masses are never normalized implicitly: the total
//! mass of a pullback measure is the area of the image domain.

use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigen};
use crate::quadrature::{gauss_legendre_on, SphereRule};
use crate::specfun::radial_profile;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Points of the closed disk use complex notation.
pub type DiskPoint = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum Space {
    Disk,
    Sphere { n: usize },
}

impl Space {
    /// Number of ambient coordinates per atom.
    pub fn dim(&self) -> usize {
        match *self {
            Space::Disk => 2,
            Space::Sphere { n } => n + 1,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Space::Disk => "disk".to_string(),
            Space::Sphere { n } => format!("sphere({n})"),
        }
    }
}

/// Unit vector in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let r = crate::linalg::norm(&coords);
        if coords.len() < 2 || (r - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "sphere point must have unit norm, got {r}"
            )));
        }
        Ok(SpherePoint(coords))
    }

    /// Normalizes any nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Self {
        let r = crate::linalg::norm(&coords);
        coords.iter_mut().for_each(|x| *x /= r);
        SpherePoint(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len() - 1
    }
}

/// Layout of a composite Gauss–Legendre × uniform polar grid. Atom `j *
/// n_theta + k` sits at radius `radii[j]` and angle `2π(k + 1/2)/n_theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub radial_weights: Vec<f64>,
    pub n_theta: usize,
    pub per_panel: usize,
    pub panel_edges: Vec<f64>,
}

impl PolarGrid {
    pub fn composite(panels: usize, per_panel: usize, n_theta: usize) -> Self {
        let mut radii = Vec::with_capacity(panels * per_panel);
        let mut radial_weights = Vec::with_capacity(panels * per_panel);
        let edges: Vec<f64> = (0..=panels).map(|i| i as f64 / panels as f64).collect();
        for p in 0..panels {
            for (r, w) in gauss_legendre_on(per_panel, edges[p], edges[p + 1]) {
                radii.push(r);
                radial_weights.push(w);
            }
        }
        PolarGrid {
            radii,
            radial_weights,
            n_theta,
            per_panel,
            panel_edges: edges,
        }
    }

    pub fn angle(&self, k: usize) -> f64 {
        2.0 * PI * (k as f64 + 0.5) / self.n_theta as f64
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Builds the grid measure `density · r dr dθ`.
    pub fn measure(&self, density: impl Fn(DiskPoint) -> f64) -> Result<DiscreteMeasure> {
        let dtheta = 2.0 * PI / self.n_theta as f64;
        let mut points = Vec::with_capacity(2 * self.len());
        let mut weights = Vec::with_capacity(self.len());
        let mut base = Vec::with_capacity(self.len());
        let trig: Vec<(f64, f64)> = (0..self.n_theta).map(|k| self.angle(k).sin_cos()).collect();
        for (&r, &wr) in self.radii.iter().zip(&self.radial_weights) {
            for &(s, c) in &trig {
                let z = Complex64::new(r * c, r * s);
                let rho = density(z);
                if rho < 0.0 || rho.is_nan() {
                    return Err(Error::NegativeDensity {
                        value: rho,
                        x: z.re,
                        y: z.im,
                    });
                }
                let b = wr * r * dtheta;
                points.push(z.re);
                points.push(z.im);
                weights.push(rho * b);
                base.push(b);
            }
        }
        let mut m = DiscreteMeasure::new(Space::Disk, points, weights)?;
        m.grid = Some(self.clone());
        m.reference_weights = Some(base);
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub space: Space,
    points: Vec<f64>,
    weights: Vec<f64>,
    total_mass: f64,
    /// Present when the atoms sit on a [`PolarGrid`] in grid order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PolarGrid>,
    /// Weights of the underlying reference rule (Lebesgue or round measure),
    /// so that `weights[i] / reference_weights[i]` recovers the density.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_weights: Option<Vec<f64>>,
}

impl DiscreteMeasure {
    pub fn new(space: Space, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let d = space.dim();
        if points.len() != d * weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for {} atoms of dimension {d}",
                points.len(),
                weights.len()
            )));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!("atom {i} has weight {w}")));
            }
        }
        for (i, p) in points.chunks(d).enumerate() {
            let r2 = dot(p, p);
            let ok = match space {
                Space::Disk => r2 <= 1.0 + 1e-12,
                Space::Sphere { .. } => (r2.sqrt() - 1.0).abs() <= 1e-12,
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "atom {i} at radius {} is not in {}",
                    r2.sqrt(),
                    space.label()
                )));
            }
        }
        let total_mass = pairwise_sum(&weights);
        Ok(DiscreteMeasure {
            space,
            points,
            weights,
            total_mass,
            grid: None,
            reference_weights: None,
        })
    }

    /// Builds a measure without the membership check; callers guarantee the
    /// atoms were produced by maps of the space onto itself. Coordinates are
    /// clamped back onto the space to absorb rounding.
    pub(crate) fn from_transport(space: Space, mut points: Vec<f64>, weights: Vec<f64>) -> Self {
        let d = space.dim();
        for p in points.chunks_mut(d) {
            let r = dot(p, p).sqrt();
            match space {
                Space::Disk => {
                    if r > 1.0 {
                        p.iter_mut().for_each(|x| *x /= r);
                    }
                }
                Space::Sphere { .. } => p.iter_mut().for_each(|x| *x /= r),
            }
        }
        let total_mass = pairwise_sum(&weights);
        DiscreteMeasure {
            space,
            points,
            weights,
            total_mass,
            grid: None,
            reference_weights: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn disk_point(&self, i: usize) -> DiskPoint {
        debug_assert_eq!(self.space, Space::Disk);
        Complex64::new(self.points[2 * i], self.points[2 * i + 1])
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks(self.dim()).zip(self.weights.iter().copied())
    }

    /// Pushforward by a pointwise map of the space onto itself.
    pub fn pushforward(&self, map: impl Fn(&[f64], &mut [f64])) -> DiscreteMeasure {
        let d = self.dim();
        let mut out = vec![0.0; self.points.len()];
        for (src, dst) in self.points.chunks(d).zip(out.chunks_mut(d)) {
            map(src, dst);
        }
        DiscreteMeasure::from_transport(self.space, out, self.weights.clone())
    }

    /// Pushforward of a disk measure by a complex map.
    pub fn pushforward_disk(&self, map: impl Fn(DiskPoint) -> DiskPoint) -> DiscreteMeasure {
        assert_eq!(self.space, Space::Disk);
        self.pushforward(|p, out| {
            let w = map(Complex64::new(p[0], p[1]));
            out[0] = w.re;
            out[1] = w.im;
        })
    }

    /// Same measure with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> DiscreteMeasure {
        let mut m = self.clone();
        m.weights.iter_mut().for_each(|w| *w *= factor);
        m.total_mass *= factor;
        m
    }

    /// Rescaled to total mass `mass`.
    pub fn with_mass(&self, mass: f64) -> Result<DiscreteMeasure> {
        if self.total_mass <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(self.scaled(mass / self.total_mass))
    }

    /// Applies an orthogonal matrix (row-major, `dim × dim`) to every atom.
    pub fn rotated(&self, q: &[f64]) -> DiscreteMeasure {
        let d = self.dim();
        let mut m = self.pushforward(|p, out| {
            for i in 0..d {
                out[i] = (0..d).map(|j| q[i * d + j] * p[j]).sum();
            }
        });
        m.reference_weights = self.reference_weights.clone();
        m
    }

    /// Integral of `f` against the measure.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let vals: Vec<f64> = self.atoms().map(|(p, w)| w * f(p)).collect();
        pairwise_sum(&vals)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let d = self.dim();
        let atoms: Vec<Vec<f64>> = self
            .atoms()
            .map(|(p, w)| {
                let mut row = p.to_vec();
                row.push(w);
                row
            })
            .collect();
        let (label, n) = match self.space {
            Space::Disk => ("disk", 2),
            Space::Sphere { n } => ("sphere", n),
        };
        debug_assert_eq!(atoms.first().map_or(d + 1, |a| a.len()), d + 1);
        serde_json::json!({
            "schema": 1,
            "space": label,
            "n": n,
            "atoms": atoms,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let schema = value.get("schema").and_then(|s| s.as_u64()).unwrap_or(1);
        if schema != 1 {
            return Err(Error::InvalidInput(format!("unsupported schema {schema}")));
        }
        let space = match value.get("space").and_then(|s| s.as_str()) {
            Some("disk") => Space::Disk,
            Some("sphere") => {
                let n = value
                    .get("n")
                    .and_then(|n| n.as_u64())
                    .ok_or_else(|| Error::InvalidInput("sphere measure needs n".into()))?;
                Space::Sphere { n: n as usize }
            }
            other => return Err(Error::InvalidInput(format!("unknown space {other:?}"))),
        };
        let rows: Vec<Vec<f64>> = serde_json::from_value(
            value
                .get("atoms")
                .cloned()
                .ok_or_else(|| Error::InvalidInput("missing atoms".into()))?,
        )?;
        let d = space.dim();
        let mut points = Vec::with_capacity(rows.len() * d);
        let mut weights = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d + 1 {
                return Err(Error::InvalidInput(format!(
                    "atom {i} has {} entries, expected {}",
                    row.len(),
                    d + 1
                )));
            }
            points.extend_from_slice(&row[..d]);
            weights.push(row[d]);
        }
        DiscreteMeasure::new(space, points, weights)
    }
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Coordinates of the first eigenfunctions at `x`: `f(|z|) z/|z|` on the disk,
/// `x` itself on the sphere. `X_s(x)` is the dot product of this with `s`.
#[inline]
pub fn eigen_features(space: Space, x: &[f64], out: &mut [f64]) {
    match space {
        Space::Disk => {
            let (a, b) = disk_features(Complex64::new(x[0], x[1]));
            out[0] = a;
            out[1] = b;
        }
        Space::Sphere { .. } => out.copy_from_slice(x),
    }
}

#[inline]
pub fn disk_features(z: DiskPoint) -> (f64, f64) {
    let r = z.norm();
    if r == 0.0 {
        return (0.0, 0.0);
    }
    let g = radial_profile(r.min(1.0)) / r;
    (g * z.re, g * z.im)
}

/// `X_s(x)`.
pub fn x_s(space: Space, x: &[f64], s: &[f64]) -> f64 {
    let mut feat = vec![0.0; space.dim()];
    eigen_features(space, x, &mut feat);
    dot(&feat, s)
}

/// Tensor Gauss–Legendre (radial) × uniform (angular) disk rule with weights
/// `density · r · Δ`.
pub fn disk_quadrature(
    n_r: usize,
    n_theta: usize,
    density: impl Fn(DiskPoint) -> f64,
) -> Result<DiscreteMeasure> {
    if n_r < 4 || n_theta < 4 {
        return Err(Error::InvalidInput(format!(
            "disk quadrature needs at least 4×4 nodes, got {n_r}×{n_theta}"
        )));
    }
    PolarGrid::composite(1, n_r, n_theta).measure(density)
}

pub fn uniform_disk(n_r: usize, n_theta: usize) -> DiscreteMeasure {
    disk_quadrature(n_r, n_theta, |_| 1.0).expect("constant density")
}

/// Product rule on `S^n` weighted by `density` (relative to the round measure).
pub fn sphere_quadrature(
    n: usize,
    n_polar: usize,
    n_az: usize,
    density: impl Fn(&[f64]) -> f64,
) -> Result<DiscreteMeasure> {
    let rule = SphereRule::full(n, n_polar, n_az);
    let mut weights = Vec::with_capacity(rule.len());
    for i in 0..rule.len() {
        let rho = density(rule.point(i));
        if rho < 0.0 || rho.is_nan() {
            let p = rule.point(i);
            return Err(Error::NegativeDensity {
                value: rho,
                x: p[0],
                y: p[1],
            });
        }
        weights.push(rho * rule.weights[i]);
    }
    let mut m = DiscreteMeasure::from_transport(Space::Sphere { n }, rule.points, weights);
    m.reference_weights = Some(rule.weights);
    Ok(m)
}

pub fn moment_vector(m: &DiscreteMeasure) -> Vec<f64> {
    let d = m.dim();
    match m.space {
        Space::Disk => {
            let mut a = Vec::with_capacity(m.len());
            let mut b = Vec::with_capacity(m.len());
            for (i, &w) in m.weights().iter().enumerate() {
                let (x, y) = disk_features(m.disk_point(i));
                a.push(w * x);
                b.push(w * y);
            }
            vec![pairwise_sum(&a), pairwise_sum(&b)]
        }
        Space::Sphere { .. } => (0..d)
            .map(|k| {
                let v: Vec<f64> = m.atoms().map(|(p, w)| w * p[k]).collect();
                pairwise_sum(&v)
            })
            .collect(),
    }
}

/// The quadratic form `V(s) = ∫ X_s² dm` and its eigen-structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionForm {
    pub dim: usize,
    /// Row-major `dim × dim`.
    pub matrix: Vec<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub eig_max: f64,
    /// Second-largest eigenvalue.
    pub eig_min_relevant: f64,
    pub max_direction: Vec<f64>,
}

impl DirectionForm {
    pub fn from_matrix(matrix: Vec<f64>, dim: usize) -> Self {
        let (eigenvalues, eigenvectors) = sym_eigen(&matrix, dim);
        let mut max_direction = eigenvectors[0].clone();
        // fixed sign: first nonnegligible coordinate positive
        if let Some(first) = max_direction.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                max_direction.iter_mut().for_each(|x| *x = -*x);
            }
        }
        DirectionForm {
            dim,
            eig_max: eigenvalues[0],
            eig_min_relevant: eigenvalues[1],
            eigenvalues,
            eigenvectors,
            matrix,
            max_direction,
        }
    }

    /// `V(s) = sᵀ B s`.
    pub fn value(&self, s: &[f64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += s[i] * self.matrix[i * d + j] * s[j];
            }
        }
        acc
    }

    /// Relative gap `(M − m)/(M + m)` between the two largest eigenvalues.
    pub fn gap(&self) -> f64 {
        let (big, small) = (self.eig_max, self.eig_min_relevant);
        if big + small <= 0.0 {
            return 0.0;
        }
        ((big - small) / (big + small)).max(0.0)
    }
}

pub fn direction_form(m: &DiscreteMeasure) -> DirectionForm {
    let d = m.dim();
    let mut matrix = vec![0.0; d * d];
    let mut feat = vec![0.0; d];
    let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(m.len()); d * (d + 1) / 2];
    for (p, w) in m.atoms() {
        eigen_features(m.space, p, &mut feat);
        let mut idx = 0;
        for i in 0..d {
            for j in i..d {
                cols[idx].push(w * feat[i] * feat[j]);
                idx += 1;
            }
        }
    }
    let mut idx = 0;
    for i in 0..d {
        for j in i..d {
            let v = pairwise_sum(&cols[idx]);
            matrix[i * d + j] = v;
            matrix[j * d + i] = v;
            idx += 1;
        }
    }
    DirectionForm::from_matrix(matrix, d)
}

/// Moment metric: supremum, over a rotation-invariant dictionary of smooth
/// test functions, of `|∫ f dm1 − ∫ f dm2|`.
///
/// The dictionary is the unit ball of each family
/// `{X_s}`, `{X_s X_t}`, `{(x·s)(x·t)}` (operator norms of the differences),
/// plus the radial moments `1, |x|², |x|⁴`.
pub fn measure_distance(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> Result<f64> {
    if m1.space != m2.space {
        return Err(Error::SpaceMismatch(m1.space.label(), m2.space.label()));
    }
    let a = MomentSummary::of(m1);
    let b = MomentSummary::of(m2);
    let d = m1.dim();
    let first: Vec<f64> = a.first.iter().zip(&b.first).map(|(x, y)| x - y).collect();
    let mut dist = crate::linalg::norm(&first);
    dist = dist.max(spectral_norm(&a.form, &b.form, d));
    dist = dist.max(spectral_norm(&a.coords, &b.coords, d));
    for (x, y) in a.radial.iter().zip(&b.radial) {
        dist = dist.max((x - y).abs());
    }
    Ok(dist)
}

struct MomentSummary {
    first: Vec<f64>,
    form: Vec<f64>,
    coords: Vec<f64>,
    radial: [f64; 3],
}

impl MomentSummary {
    fn of(m: &DiscreteMeasure) -> Self {
        let d = m.dim();
        let first = moment_vector(m);
        let form = direction_form(m).matrix;
        let mut coords = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = m.integrate(|p| p[i] * p[j]);
                coords[i * d + j] = v;
                coords[j * d + i] = v;
            }
        }
        let radial = [
            m.total_mass(),
            m.integrate(|p| dot(p, p)),
            m.integrate(|p| dot(p, p).powi(2)),
        ];
        MomentSummary {
            first,
            form,
            coords,
            radial,
        }
    }
}

fn spectral_norm(a: &[f64], b: &[f64], d: usize) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (vals, _) = sym_eigen(&diff, d);
    vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Planar domain given as the image of the disk under a polynomial
/// `φ(z) = Σ_{k≥1} c_k z^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalDomain {
    pub coeffs: Vec<Complex64>,
    pub area: f64,
}

impl ConformalDomain {
    /// Validates `c₁ ≠ 0` and certifies univalence: accepted outright when
    /// `Σ_{k≥2} k|c_k| < |c₁|`, otherwise by a grid check of `|φ'|` and a
    /// boundary self-intersection test.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs[0].norm() == 0.0 {
            return Err(Error::NotUnivalent("c1 must be nonzero".into()));
        }
        let area = PI
            * coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1) as f64 * c.norm_sqr())
                .sum::<f64>();
        let dom = ConformalDomain { coeffs, area };
        let tail: f64 = dom
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| (i + 1) as f64 * c.norm())
            .sum();
        if tail < dom.coeffs[0].norm() {
            return Ok(dom);
        }
        dom.certify_by_sampling()?;
        Ok(dom)
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn identity() -> Self {
        Self::from_real(&[1.0]).expect("identity map")
    }

    pub fn phi(&self, z: DiskPoint) -> DiskPoint {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = (acc + c) * z;
        }
        acc
    }

    pub fn dphi(&self, z: DiskPoint) -> DiskPoint {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * z + c * (i + 1) as f64;
        }
        acc
    }

    fn certify_by_sampling(&self) -> Result<()> {
        for j in 0..=64 {
            let r = j as f64 / 64.0;
            for k in 0..256 {
                let t = 2.0 * PI * k as f64 / 256.0;
                if self.dphi(Complex64::from_polar(r, t)).norm() <= 1e-10 {
                    return Err(Error::NotUnivalent(format!(
                        "φ' vanishes near r = {r}, θ = {t}"
                    )));
                }
            }
        }
        let m = 512;
        let pts: Vec<DiskPoint> = (0..m)
            .map(|k| self.phi(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)))
            .collect();
        let winding = winding_number(&pts, self.phi(Complex64::new(0.0, 0.0)));
        if winding != 1 {
            return Err(Error::NotUnivalent(format!("boundary winding number {winding}")));
        }
        for i in 0..m {
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                if segments_cross(pts[i], pts[(i + 1) % m], pts[j], pts[(j + 1) % m]) {
                    return Err(Error::NotUnivalent("boundary curve self-intersects".into()));
                }
            }
        }
        Ok(())
    }
}

fn winding_number(curve: &[DiskPoint], center: DiskPoint) -> i64 {
    let mut total = 0.0;
    for i in 0..curve.len() {
        let a = curve[i] - center;
        let b = curve[(i + 1) % curve.len()] - center;
        total += (b / a).arg();
    }
    (total / (2.0 * PI)).round() as i64
}

fn segments_cross(a: DiskPoint, b: DiskPoint, c: DiskPoint, d: DiskPoint) -> bool {
    let orient = |p: DiskPoint, q: DiskPoint, r: DiskPoint| {
        (q.re - p.re) * (r.im - p.im) - (q.im - p.im) * (r.re - p.re)
    };
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Pullback `|φ'(z)|² dz` of the area measure of `φ(D)`.
pub fn pullback_measure(
    domain: &ConformalDomain,
    n_r: usize,
    n_theta: usize,
) -> Result<DiscreteMeasure> {
    disk_quadrature(n_r, n_theta, |z| domain.dphi(z).norm_sqr())
}
