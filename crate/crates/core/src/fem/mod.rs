//! P1 finite elements for the Neumann Laplacian on planar domains: mesh
//! generation, assembly, a shift-invert Lanczos eigensolver and the corpus
//! sweep against the planar eigenvalue bounds.

mod eigen;
mod mesh;
mod sparse;

pub use eigen::{lanczos_shift_invert, neumann_eigs, neumann_eigs_with, EigenOptions, SpectralResult};
pub use mesh::{
    build_mesh, conformal_image, neck_area, polar_disk, rectangle, two_disks_neck, DomainSpec, Mesh,
};
pub use sparse::{rcm, CsrMatrix, SkylineCholesky};

use crate::error::{Error, Result};
use crate::specfun::{planar_bound, polya_bound, szego_bound};
use crate::measures::ConformalDomain;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Stiffness and consistent mass matrices.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
}

/// Element matrices of the P1 triangle `(p0, p1, p2)`.
pub fn element_matrices(p: [[f64; 2]; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
    let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (k, m, area)
}

/// Assembles `K` and `M`. Element matrices are computed in parallel and
/// scattered in triangle order.
pub fn assemble(mesh: &Mesh) -> Result<Assembled> {
    let elements: Vec<([[f64; 3]; 3], [[f64; 3]; 3], f64)> = mesh
        .triangles
        .par_iter()
        .map(|t| element_matrices([mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]]))
        .collect();
    let mut kt = Vec::with_capacity(9 * elements.len());
    let mut mt = Vec::with_capacity(9 * elements.len());
    for (idx, (t, (k, m, area))) in mesh.triangles.iter().zip(&elements).enumerate() {
        if !(*area > 0.0) {
            return Err(Error::DegenerateTriangle { index: idx, area: *area });
        }
        for i in 0..3 {
            for j in 0..3 {
                kt.push((t[i], t[j], k[i][j]));
                mt.push((t[i], t[j], m[i][j]));
            }
        }
    }
    let n = mesh.vertices.len();
    Ok(Assembled {
        stiffness: CsrMatrix::from_triplets(n, kt),
        mass: CsrMatrix::from_triplets(n, mt),
    })
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub spec: DomainSpec,
}

/// One row of the corpus table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub id: String,
    pub spec: DomainSpec,
    pub area: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub mu1_area: Option<f64>,
    pub mu2_area: Option<f64>,
    pub vertices: Option<usize>,
    /// Inequalities exceeded beyond the FEM tolerance, by tag.
    pub violations: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeckStep {
    pub epsilon: f64,
    pub mu2_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub h: f64,
    pub tolerance: f64,
    /// `μ₁(D)π`.
    pub szego: f64,
    /// `2μ₁(D)π`.
    pub thm11: f64,
    /// `8π`.
    pub polya_k2: f64,
    pub rows: Vec<CorpusRow>,
    /// Two-disk members by decreasing `ε`.
    pub neck_sequence: Vec<NeckStep>,
    /// `μ₂·Area` strictly increases as `ε` decreases.
    pub neck_increasing: bool,
}

impl CorpusReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.violations.is_empty() && r.error.is_none())
    }
}

/// Relative allowance for FEM discretization error in the corpus checks.
pub const FEM_TOLERANCE: f64 = 0.02;

/// Meshes and solves every entry, then checks `μ₁·A ≤ μ₁(D)π`,
/// `μ₂·A ≤ 2μ₁(D)π` and `μ₂·A ≤ 8π`, each with [`FEM_TOLERANCE`]. Failures
/// are recorded per row; rows are sorted by id.
pub fn verify_corpus(entries: &[CorpusEntry], h: f64) -> CorpusReport {
    let szego = szego_bound();
    let thm = planar_bound();
    let polya = polya_bound(2);
    let mut rows: Vec<CorpusRow> = entries
        .par_iter()
        .map(|e| {
            let mut row = CorpusRow {
                id: e.id.clone(),
                spec: e.spec.clone(),
                area: None,
                mu1: None,
                mu2: None,
                mu1_area: None,
                mu2_area: None,
                vertices: None,
                violations: Vec::new(),
                error: None,
            };
            match build_mesh(&e.spec, h).and_then(|m| neumann_eigs(&m, 2).map(|r| (m, r))) {
                Ok((mesh, res)) => {
                    let (m1, m2) = (res.products[1], res.products[2]);
                    row.area = Some(res.area);
                    row.mu1 = Some(res.eigenvalues[1]);
                    row.mu2 = Some(res.eigenvalues[2]);
                    row.mu1_area = Some(m1);
                    row.mu2_area = Some(m2);
                    row.vertices = Some(mesh.vertices.len());
                    if m1 > szego * (1.0 + FEM_TOLERANCE) {
                        row.violations.push("szego".into());
                    }
                    if m2 > thm * (1.0 + FEM_TOLERANCE) {
                        row.violations.push("thm1.1".into());
                    }
                    if m2 > polya * (1.0 + FEM_TOLERANCE) {
                        row.violations.push("polya-k2".into());
                    }
                }
                Err(err) => row.error = Some(err.to_string()),
            }
            row
        })
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let mut neck: Vec<NeckStep> = rows
        .iter()
        .filter_map(|r| match (&r.spec, r.mu2_area) {
            (DomainSpec::TwoDisksNeck { epsilon, .. }, Some(v)) => Some(NeckStep {
                epsilon: *epsilon,
                mu2_area: v,
            }),
            _ => None,
        })
        .collect();
    neck.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
    let neck_increasing = neck.windows(2).all(|w| w[1].mu2_area > w[0].mu2_area);
    CorpusReport {
        h,
        tolerance: FEM_TOLERANCE,
        szego,
        thm11: thm,
        polya_k2: polya,
        rows,
        neck_sequence: neck,
        neck_increasing,
    }
}

/// `z + Σ_{k=2}^{6} a_k z^k` with random complex `a_k`, scaled so that
/// `Σ k|a_k| = 0.5` (univalent by the coefficient test).
pub fn perturbed_disk(seed: u64) -> Result<ConformalDomain> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![num_complex::Complex64::new(1.0, 0.0)];
    for _ in 2..=6 {
        coeffs.push(num_complex::Complex64::new(
            rng.random::<f64>() * 2.0 - 1.0,
            rng.random::<f64>() * 2.0 - 1.0,
        ));
    }
    let total: f64 = coeffs.iter().enumerate().skip(1).map(|(k, c)| (k + 1) as f64 * c.norm()).sum();
    for c in coeffs.iter_mut().skip(1) {
        *c *= 0.5 / total;
    }
    ConformalDomain::new(coeffs)
}

/// Square, 2×1 rectangle, unit disk, three elongated conformal images and
/// five random perturbed disks.
pub fn default_corpus(seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut out = vec![
        CorpusEntry {
            id: "disk".into(),
            spec: DomainSpec::Disk { radius: 1.0 },
        },
        CorpusEntry {
            id: "rectangle-2x1".into(),
            spec: DomainSpec::Rectangle { a: 2.0, b: 1.0 },
        },
        CorpusEntry {
            id: "square".into(),
            spec: DomainSpec::Rectangle { a: 1.0, b: 1.0 },
        },
    ];
    for (id, c) in [
        ("conformal-quadratic", vec![1.0, 0.3]),
        ("conformal-ellipse-a", vec![1.0, 0.0, 0.1]),
        ("conformal-ellipse-b", vec![1.0, 0.0, 0.2]),
    ] {
        out.push(CorpusEntry {
            id: id.into(),
            spec: DomainSpec::conformal(&ConformalDomain::from_real(&c)?),
        });
    }
    for k in 0..5 {
        out.push(CorpusEntry {
            id: format!("perturbed-{k}"),
            spec: DomainSpec::conformal(&perturbed_disk(seed.wrapping_add(k))?),
        });
    }
    Ok(out)
}

/// Two-disk members for `ε ∈ {0.4, 0.2, 0.1, 0.05}` with neck length `0.2`.
pub fn neck_family() -> Vec<CorpusEntry> {
    [0.4, 0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| CorpusEntry {
            id: format!("neck-{eps}"),
            spec: DomainSpec::TwoDisksNeck {
                epsilon: eps,
                neck_length: 0.2,
            },
        })
        .collect()
}
