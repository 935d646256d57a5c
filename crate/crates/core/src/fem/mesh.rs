//! Triangle meshes and the generators for the planar test corpus.

use crate::error::{Error, Result};
use crate::measures::ConformalDomain;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<[usize; 2]>,
}

fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh {
    /// Builds a mesh from vertices and triangles, orienting every triangle
    /// counterclockwise and deriving the boundary edges.
    pub fn from_triangles(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut tris = triangles;
        for t in tris.iter_mut() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::InvalidMesh("triangle references a missing vertex".into()));
            }
            if signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
                t.swap(1, 2);
            }
        }
        let boundary_edges = boundary_of(&tris)?;
        let mesh = Mesh {
            vertices,
            triangles: tris,
            boundary_edges,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        signed_area(self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]])
    }

    pub fn max_edge(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .map(|(a, b)| dist(self.vertices[a], self.vertices[b]))
            })
            .fold(0.0, f64::max)
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = PI;
        for t in &self.triangles {
            let p = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            for k in 0..3 {
                let a = p[k];
                let b = p[(k + 1) % 3];
                let c = p[(k + 2) % 3];
                let u = [b[0] - a[0], b[1] - a[1]];
                let v = [c[0] - a[0], c[1] - a[1]];
                let ang = (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]).abs();
                best = best.min(ang);
            }
        }
        best
    }

    /// Checks orientation, duplicate vertices, connectivity and the boundary
    /// edge list.
    pub fn validate(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= self.vertices.len()) {
                return Err(Error::InvalidMesh(format!("triangle {i} references a missing vertex")));
            }
            let a = self.triangle_area(t);
            if !(a > 0.0) {
                return Err(Error::DegenerateTriangle { index: i, area: a });
            }
        }
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a][0].total_cmp(&self.vertices[b][0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if self.vertices[j][0] - self.vertices[i][0] > 1e-12 {
                    break;
                }
                if dist(self.vertices[i], self.vertices[j]) <= 1e-12 {
                    return Err(Error::InvalidMesh(format!("vertices {i} and {j} coincide")));
                }
            }
        }
        let derived = boundary_of(&self.triangles)?;
        let mut given: Vec<[usize; 2]> = self.boundary_edges.iter().map(|e| sorted(*e)).collect();
        let mut expect: Vec<[usize; 2]> = derived.iter().map(|e| sorted(*e)).collect();
        given.sort();
        expect.sort();
        if given != expect {
            return Err(Error::InvalidMesh(
                "boundary edges do not match the edges used by exactly one triangle".into(),
            ));
        }
        // edge-connectivity over triangles
        let mut parent: Vec<usize> = (0..self.triangles.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut owner: HashMap<[usize; 2], usize> = HashMap::new();
        for (i, t) in self.triangles.iter().enumerate() {
            for e in edges_of(t) {
                if let Some(&j) = owner.get(&e) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                } else {
                    owner.insert(e, i);
                }
            }
        }
        let root = find(&mut parent, 0);
        if (0..self.triangles.len()).any(|i| find(&mut parent, i) != root) {
            return Err(Error::InvalidMesh("mesh is not edge-connected".into()));
        }
        let used: std::collections::HashSet<usize> = self.triangles.iter().flatten().copied().collect();
        if used.len() != self.vertices.len() {
            return Err(Error::InvalidMesh("mesh has isolated vertices".into()));
        }
        Ok(())
    }

    /// Uniform scaling by `t`.
    pub fn scaled(&self, t: f64) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|v| [t * v[0], t * v[1]]).collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.clone(),
        }
    }

    /// Text format: `nv nt nb`, then vertex lines `x y`, triangle lines
    /// `i j k` and boundary-edge lines `i j`, all indices 0-based.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\n",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            out.push_str(&format!("{:e} {:e}\n", v[0], v[1]));
        }
        for t in &self.triangles {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for e in &self.boundary_edges {
            out.push_str(&format!("{} {}\n", e[0], e[1]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidMesh(m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty mesh file"))?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_>>()?;
        if head.len() != 3 {
            return Err(bad("header must be `nv nt nb`"));
        }
        let mut vertices = Vec::with_capacity(head[0]);
        for _ in 0..head[0] {
            let v: Vec<f64> = lines
                .next()
                .ok_or_else(|| bad("missing vertex line"))?
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("bad vertex")))
                .collect::<Result<_>>()?;
            if v.len() != 2 {
                return Err(bad("vertex lines hold two numbers"));
            }
            vertices.push([v[0], v[1]]);
        }
        let mut ints = |count: usize, width: usize, what: &str| -> Result<Vec<Vec<usize>>> {
            (0..count)
                .map(|_| {
                    let v: Vec<usize> = lines
                        .next()
                        .ok_or_else(|| bad(&format!("missing {what} line")))?
                        .split_whitespace()
                        .map(|s| s.parse().map_err(|_| bad(&format!("bad {what}"))))
                        .collect::<Result<_>>()?;
                    if v.len() != width {
                        return Err(bad(&format!("{what} lines hold {width} indices")));
                    }
                    Ok(v)
                })
                .collect()
        };
        let triangles = ints(head[1], 3, "triangle")?
            .into_iter()
            .map(|v| [v[0], v[1], v[2]])
            .collect();
        let boundary_edges = ints(head[2], 2, "boundary edge")?
            .into_iter()
            .map(|v| [v[0], v[1]])
            .collect();
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

fn sorted(e: [usize; 2]) -> [usize; 2] {
    if e[0] < e[1] {
        e
    } else {
        [e[1], e[0]]
    }
}

fn edges_of(t: &[usize; 3]) -> [[usize; 2]; 3] {
    [sorted([t[0], t[1]]), sorted([t[1], t[2]]), sorted([t[2], t[0]])]
}

/// Edges used by exactly one triangle, oriented as in that triangle.
fn boundary_of(triangles: &[[usize; 3]]) -> Result<Vec<[usize; 2]>> {
    let mut count: HashMap<[usize; 2], (usize, [usize; 2])> = HashMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let e = count.entry(sorted([a, b])).or_insert((0, [a, b]));
            e.0 += 1;
        }
    }
    let mut out = Vec::new();
    for (_, (c, e)) in count {
        match c {
            1 => out.push(e),
            2 => {}
            _ => return Err(Error::InvalidMesh("edge shared by more than two triangles".into())),
        }
    }
    out.sort();
    Ok(out)
}

/// Planar domains of the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk { radius: f64 },
    Rectangle { a: f64, b: f64 },
    /// Image of the unit disk under `φ(z) = Σ c_k z^{k+1}`; coefficients as
    /// `[re, im]` pairs.
    ConformalImage { coeffs: Vec<[f64; 2]> },
    /// Unit disks centred at `(±(1 + L/2), 0)` joined by the strip
    /// `|y| ≤ ε/2` between the centres.
    TwoDisksNeck { epsilon: f64, neck_length: f64 },
}

impl DomainSpec {
    pub fn conformal(domain: &ConformalDomain) -> Self {
        DomainSpec::ConformalImage {
            coeffs: domain.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }

    /// Shorthand: `disk`, `disk:R`, `square`, `rectangle:A,B`, `neck:EPS,L`,
    /// `conformal:c1,c2,…` (real coefficients), or inline JSON.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.starts_with('{') {
            let spec: DomainSpec = serde_json::from_str(text)?;
            spec.check()?;
            return Ok(spec);
        }
        let (name, args) = match text.split_once(':') {
            Some((n, a)) => (n, a),
            None => (text, ""),
        };
        let nums: Vec<f64> = if args.is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::InvalidSpec(format!("bad number `{s}` in `{text}`")))
                })
                .collect::<Result<_>>()?
        };
        let arity = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("`{name}` takes {n} numbers")))
            }
        };
        let spec = match name {
            "disk" if nums.is_empty() => DomainSpec::Disk { radius: 1.0 },
            "disk" => {
                arity(1)?;
                DomainSpec::Disk { radius: nums[0] }
            }
            "square" => {
                arity(0)?;
                DomainSpec::Rectangle { a: 1.0, b: 1.0 }
            }
            "rectangle" => {
                arity(2)?;
                DomainSpec::Rectangle {
                    a: nums[0],
                    b: nums[1],
                }
            }
            "neck" => {
                arity(2)?;
                DomainSpec::TwoDisksNeck {
                    epsilon: nums[0],
                    neck_length: nums[1],
                }
            }
            "conformal" => DomainSpec::ConformalImage {
                coeffs: nums.iter().map(|&c| [c, 0.0]).collect(),
            },
            _ => return Err(Error::InvalidSpec(format!("unknown domain `{text}`"))),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidSpec(format!("{what} must be positive, got {x}")))
            }
        };
        match self {
            DomainSpec::Disk { radius } => positive(*radius, "radius"),
            DomainSpec::Rectangle { a, b } => {
                positive(*a, "side a")?;
                positive(*b, "side b")
            }
            DomainSpec::ConformalImage { .. } => self.conformal_domain().map(|_| ()),
            DomainSpec::TwoDisksNeck {
                epsilon,
                neck_length,
            } => {
                positive(*epsilon, "neck width")?;
                positive(*neck_length, "neck length")?;
                if *epsilon >= 1.0 {
                    return Err(Error::InvalidSpec("neck width must be below 1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn conformal_domain(&self) -> Result<ConformalDomain> {
        match self {
            DomainSpec::ConformalImage { coeffs } => {
                ConformalDomain::new(coeffs.iter().map(|c| Complex64::new(c[0], c[1])).collect())
            }
            _ => Err(Error::InvalidSpec("not a conformal image".into())),
        }
    }

    /// Exact area of the domain.
    pub fn exact_area(&self) -> Result<f64> {
        Ok(match self {
            DomainSpec::Disk { radius } => PI * radius * radius,
            DomainSpec::Rectangle { a, b } => a * b,
            DomainSpec::ConformalImage { .. } => self.conformal_domain()?.area,
            DomainSpec::TwoDisksNeck {
                epsilon,
                neck_length,
            } => neck_area(*epsilon, *neck_length),
        })
    }
}

/// Area of two unit disks plus the strip `[−c, c] × [−ε/2, ε/2]`, `c = 1 + L/2`,
/// minus the two half-lenses the strip shares with the disks.
pub fn neck_area(epsilon: f64, neck_length: f64) -> f64 {
    let c = 1.0 + 0.5 * neck_length;
    let a = 0.5 * epsilon;
    let overlap = a * (1.0 - a * a).sqrt() + a.asin();
    2.0 * PI + 2.0 * c * epsilon - 2.0 * overlap
}

/// Meshes `spec` with maximum edge length `h`.
pub fn build_mesh(spec: &DomainSpec, h: f64) -> Result<Mesh> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidSpec(format!("mesh size must be positive, got {h}")));
    }
    spec.check()?;
    match spec {
        DomainSpec::Disk { radius } => polar_disk(*radius, h),
        DomainSpec::Rectangle { a, b } => rectangle(*a, *b, h),
        DomainSpec::ConformalImage { .. } => conformal_image(&spec.conformal_domain()?, h),
        DomainSpec::TwoDisksNeck {
            epsilon,
            neck_length,
        } => {
            if *epsilon < 4.0 * h {
                return Err(Error::NeckTooNarrow {
                    width: *epsilon,
                    limit: 4.0 * h,
                });
            }
            two_disks_neck(*epsilon, *neck_length, h)
        }
    }
}

/// Structured polar mesh: `n` rings, ring `i` carrying `6i` vertices, with
/// `n` increased until every edge is at most `h`.
pub fn polar_disk(radius: f64, h: f64) -> Result<Mesh> {
    let mut n = ((1.05 * radius / h).ceil() as usize).max(2);
    loop {
        let mesh = polar_rings(radius, n)?;
        if mesh.max_edge() <= h {
            return Ok(mesh);
        }
        n += 1;
    }
}

fn polar_rings(radius: f64, n: usize) -> Result<Mesh> {
    let mut vertices = vec![[0.0, 0.0]];
    let mut start = vec![0usize];
    for i in 1..=n {
        start.push(vertices.len());
        let r = radius * i as f64 / n as f64;
        let m = 6 * i;
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            vertices.push([r * t.cos(), r * t.sin()]);
        }
    }
    let mut triangles = Vec::new();
    for j in 0..6 {
        triangles.push([0, start[1] + j, start[1] + (j + 1) % 6]);
    }
    for i in 2..=n {
        let (ni, no) = (6 * (i - 1), 6 * i);
        let (si, so) = (start[i - 1], start[i]);
        let (mut a, mut b) = (0usize, 0usize);
        while a < ni || b < no {
            let next_in = (a + 1) as f64 / ni as f64;
            let next_out = (b + 1) as f64 / no as f64;
            if b >= no || (a < ni && next_in < next_out) {
                triangles.push([si + a % ni, so + b % no, si + (a + 1) % ni]);
                a += 1;
            } else {
                triangles.push([si + a % ni, so + b % no, so + (b + 1) % no]);
                b += 1;
            }
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

/// Structured rectangle mesh `[0, a] × [0, b]` with alternating diagonals.
pub fn rectangle(a: f64, b: f64, h: f64) -> Result<Mesh> {
    let nx = ((a * 2f64.sqrt() / h).ceil() as usize).max(1);
    let ny = ((b * 2f64.sqrt() / h).ceil() as usize).max(1);
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([a * i as f64 / nx as f64, b * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (p, q, r, s) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([p, q, r]);
                triangles.push([p, r, s]);
            } else {
                triangles.push([p, q, s]);
                triangles.push([q, r, s]);
            }
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

/// Pushes a polar disk mesh through `φ`, refining until every image edge is
/// at most `h`.
pub fn conformal_image(domain: &ConformalDomain, h: f64) -> Result<Mesh> {
    let mut dmax: f64 = 0.0;
    for k in 0..720 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 720.0);
        dmax = dmax.max(domain.dphi(z).norm());
    }
    let mut hd = h / dmax.max(1.0);
    for _ in 0..20 {
        let disk = polar_disk(1.0, hd)?;
        let vertices = disk
            .vertices
            .iter()
            .map(|v| {
                let w = domain.phi(Complex64::new(v[0], v[1]));
                [w.re, w.im]
            })
            .collect();
        let mesh = Mesh {
            vertices,
            triangles: disk.triangles,
            boundary_edges: disk.boundary_edges,
        };
        if mesh.max_edge() <= h {
            mesh.validate()?;
            return Ok(mesh);
        }
        hd *= 0.95;
    }
    Err(Error::InvalidSpec("conformal image could not be resolved at this mesh size".into()))
}

/// Signed distance (negative inside) to the two-disk-and-strip union; exact
/// outside, a lower bound on depth inside.
fn neck_sdf(p: [f64; 2], c: f64, a: f64) -> f64 {
    let d1 = (p[0] - c).hypot(p[1]) - 1.0;
    let d2 = (p[0] + c).hypot(p[1]) - 1.0;
    let qx = p[0].abs() - c;
    let qy = p[1].abs() - a;
    let d3 = qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0);
    d1.min(d2).min(d3)
}

/// Closed boundary curve of the neck domain, counterclockwise, as a list of
/// pieces each mapping `t ∈ [0, 1]` to a point.
fn neck_boundary(c: f64, a: f64) -> Vec<Box<dyn Fn(f64) -> [f64; 2] + Send + Sync>> {
    let alpha = a.asin();
    let xj = c - (1.0 - a * a).sqrt();
    vec![
        // right disk, from the lower junction round to the upper one
        Box::new(move |t: f64| {
            let th = -PI + alpha + t * (2.0 * PI - 2.0 * alpha);
            [c + th.cos(), th.sin()]
        }),
        // top of the strip, right to left
        Box::new(move |t: f64| [xj - 2.0 * xj * t, a]),
        // left disk
        Box::new(move |t: f64| {
            let th = alpha + t * (2.0 * PI - 2.0 * alpha);
            [-c + th.cos(), th.sin()]
        }),
        // bottom of the strip, left to right
        Box::new(move |t: f64| [-xj + 2.0 * xj * t, -a]),
    ]
}

fn piece_length(f: &dyn Fn(f64) -> [f64; 2]) -> f64 {
    let n = 2000;
    (0..n)
        .map(|k| dist(f(k as f64 / n as f64), f((k + 1) as f64 / n as f64)))
        .sum()
}

/// Delaunay mesh of the two-disk neck: boundary samples, a hexagonal interior
/// lattice kept clear of the boundary, then refinement passes that split
/// missing boundary segments and long interior edges.
pub fn two_disks_neck(epsilon: f64, neck_length: f64, h: f64) -> Result<Mesh> {
    let c = 1.0 + 0.5 * neck_length;
    let a = 0.5 * epsilon;
    let spacing = 0.85 * h;
    let pieces = neck_boundary(c, a);
    // boundary samples as (piece, t) so that segments can be split on the curve
    let mut samples: Vec<(usize, f64)> = Vec::new();
    for (k, f) in pieces.iter().enumerate() {
        let m = ((piece_length(f.as_ref()) / spacing).ceil() as usize).max(2);
        for j in 0..m {
            samples.push((k, j as f64 / m as f64));
        }
    }
    let mut interior: Vec<[f64; 2]> = Vec::new();
    let dy = spacing * 3f64.sqrt() / 2.0;
    let ny = (1.0 / dy).ceil() as i64 + 1;
    let nx = ((c + 1.0) / spacing).ceil() as i64 + 1;
    for j in -ny..=ny {
        let shift = if j.rem_euclid(2) == 1 { 0.5 * spacing } else { 0.0 };
        for i in -nx..=nx {
            let p = [i as f64 * spacing + shift, j as f64 * dy];
            if neck_sdf(p, c, a) < -0.5 * spacing {
                interior.push(p);
            }
        }
    }
    for _pass in 0..30 {
        let boundary: Vec<[f64; 2]> = samples.iter().map(|&(k, t)| pieces[k](t)).collect();
        let nb = boundary.len();
        let mut points = boundary.clone();
        points.extend_from_slice(&interior);
        let coords: Vec<delaunator::Point> = points
            .iter()
            .map(|p| delaunator::Point { x: p[0], y: p[1] })
            .collect();
        let tri = delaunator::triangulate(&coords);
        let mut triangles = Vec::with_capacity(tri.triangles.len() / 3);
        for t in tri.triangles.chunks(3) {
            let (p, q, r) = (points[t[0]], points[t[1]], points[t[2]]);
            let centroid = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0];
            if neck_sdf(centroid, c, a) < 0.0 {
                triangles.push([t[0], t[1], t[2]]);
            }
        }
        let mut edge_set = std::collections::HashSet::new();
        for t in &triangles {
            for e in edges_of(t) {
                edge_set.insert(e);
            }
        }
        // boundary segments missing from the triangulation
        let mut missing = Vec::new();
        for i in 0..nb {
            if !edge_set.contains(&sorted([i, (i + 1) % nb])) {
                missing.push(i);
            }
        }
        // long interior edges
        let mut long = Vec::new();
        for &e in &edge_set {
            if e[0] >= nb || e[1] >= nb {
                if dist(points[e[0]], points[e[1]]) > h {
                    long.push(e);
                }
            } else if dist(points[e[0]], points[e[1]]) > h {
                let consecutive = (e[0] + 1) % nb == e[1] || (e[1] + 1) % nb == e[0];
                if !consecutive {
                    long.push(e);
                }
            }
        }
        if missing.is_empty() && long.is_empty() {
            let mesh = Mesh::from_triangles(points, triangles)?;
            return Ok(compact(mesh));
        }
        for i in missing.into_iter().rev() {
            let (k, t) = samples[i];
            let (k2, t2) = samples[(i + 1) % nb];
            let mid = if k == k2 {
                (k, 0.5 * (t + t2))
            } else {
                (k, 0.5 * (t + 1.0))
            };
            samples.insert(i + 1, mid);
        }
        long.sort();
        for e in long {
            let p = points[e[0]];
            let q = points[e[1]];
            let m = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
            if neck_sdf(m, c, a) < -0.25 * spacing {
                interior.push(m);
            }
        }
    }
    Err(Error::InvalidMesh("neck refinement did not terminate".into()))
}

/// Drops vertices not used by any triangle.
fn compact(mesh: Mesh) -> Mesh {
    let mut map = vec![usize::MAX; mesh.vertices.len()];
    let mut vertices = Vec::new();
    for t in &mesh.triangles {
        for &v in t {
            if map[v] == usize::MAX {
                map[v] = vertices.len();
                vertices.push(mesh.vertices[v]);
            }
        }
    }
    let triangles: Vec<[usize; 3]> = mesh
        .triangles
        .iter()
        .map(|t| [map[t[0]], map[t[1]], map[t[2]]])
        .collect();
    let boundary_edges = mesh
        .boundary_edges
        .iter()
        .map(|e| [map[e[0]], map[e[1]]])
        .collect();
    Mesh {
        vertices,
        triangles,
        boundary_edges,
    }
}
