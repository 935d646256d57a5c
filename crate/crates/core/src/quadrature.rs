//! Gauss–Legendre rules and product rules on the n-sphere.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`, yielding `(node, weight)`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.into_iter()
        .zip(w)
        .map(move |(x, w)| (mid + half * x, half * w))
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = GAUSS7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += GAUSS7_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on `[a, b]`, started from
/// `pieces` equal subintervals, bisecting until the local error estimate is
/// below `tol · |interval| / |[a, b]|`.
pub fn adaptive_gk(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, pieces: usize) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let (val, err) = gk15(f, a, b);
        if err <= tol || err <= 1e-14 * val.abs() || depth == 0 {
            return val;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth - 1) + rec(f, m, b, 0.5 * tol, depth - 1)
    }
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + i as f64 * h;
            rec(&f, lo, lo + h, tol / pieces as f64, 30)
        })
        .sum()
}

/// Product quadrature on a geodesic ball `{x ∈ S^n : angle(x, axis) <= theta_max}`.
///
/// Points are stored flat with stride `n + 1`. Polar angle uses Gauss–Legendre
/// in θ; the S^{n-1} factor is built recursively, with a uniform offset rule on
/// the circle.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub n: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.n + 1;
        &self.points[i * d..(i + 1) * d]
    }

    /// Full-sphere rule. `n_polar` Gauss nodes per polar angle, `n_az` on the circle.
    pub fn full(n: usize, n_polar: usize, n_az: usize) -> Self {
        let mut axis = vec![0.0; n + 1];
        axis[n] = 1.0;
        Self::cap(n, &axis, PI, n_polar, n_az)
    }

    /// Rule on the cap of angular radius `theta_max` around the unit vector `axis`.
    pub fn cap(n: usize, axis: &[f64], theta_max: f64, n_polar: usize, n_az: usize) -> Self {
        assert_eq!(axis.len(), n + 1);
        assert!(n >= 1);
        let base = Self::cap_about_last(n, theta_max, n_polar, n_az);
        // Householder reflection sending e_n to axis
        let d = n + 1;
        let mut v = axis.to_vec();
        v[n] -= 1.0;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv < 1e-28 {
            return base;
        }
        let mut points = base.points;
        for p in points.chunks_mut(d) {
            let dot: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vv;
            for (x, vi) in p.iter_mut().zip(&v) {
                *x -= s * vi;
            }
        }
        SphereRule {
            n,
            points,
            weights: base.weights,
        }
    }

    fn cap_about_last(n: usize, theta_max: f64, n_polar: usize, n_az: usize) -> Self {
        if n == 1 {
            // arc of half-width theta_max centered on e_1 = (0, 1)
            let h = 2.0 * theta_max / n_az as f64;
            let mut points = Vec::with_capacity(2 * n_az);
            for k in 0..n_az {
                let t = -theta_max + (k as f64 + 0.5) * h;
                points.push(t.sin());
                points.push(t.cos());
            }
            return SphereRule {
                n,
                points,
                weights: vec![h; n_az],
            };
        }
        let sub = Self::cap_about_last(n - 1, PI, n_polar, n_az);
        let d = n + 1;
        let mut points = Vec::with_capacity(n_polar * sub.len() * d);
        let mut weights = Vec::with_capacity(n_polar * sub.len());
        for (theta, w) in gauss_legendre_on(n_polar, 0.0, theta_max) {
            let (s, c) = theta.sin_cos();
            let jac = s.powi(n as i32 - 1);
            for j in 0..sub.len() {
                let y = sub.point(j);
                for yi in y {
                    points.push(s * yi);
                }
                points.push(c);
                weights.push(w * jac * sub.weights[j]);
            }
        }
        SphereRule { n, points, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::omega_n;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
        let (x, _) = gauss_legendre(96);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn adaptive_rule_handles_near_singular_peaks() {
        let v = adaptive_gk(|x| x.exp(), 0.0, 1.0, 1e-14, 1);
        assert!((v - (1.0_f64.exp() - 1.0)).abs() < 1e-14);
        // ∫₀^{2π} dθ / (1 − 2ρ cos θ + ρ²) = 2π/(1 − ρ²)
        let rho = 0.999;
        let v = adaptive_gk(|t| 1.0 / (1.0 - 2.0 * rho * t.cos() + rho * rho), 0.0, 2.0 * PI, 1e-10, 16);
        let exact = 2.0 * PI / (1.0 - rho * rho);
        assert!((v - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn sphere_rules_recover_volumes() {
        for n in 1..=4 {
            let rule = SphereRule::full(n, 24, 48);
            let vol: f64 = rule.weights.iter().sum();
            assert!((vol - omega_n(n as u32)).abs() < 1e-10 * vol, "n = {n}");
            for i in 0..rule.len() {
                let r: f64 = rule.point(i).iter().map(|x| x * x).sum();
                assert!((r - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hemisphere_about_arbitrary_axis() {
        let axis = [0.6, 0.0, -0.8, 0.0];
        let rule = SphereRule::cap(3, &axis, PI / 2.0, 24, 48);
        let vol: f64 = rule.weights.iter().sum();
        assert!((vol - 0.5 * omega_n(3)).abs() < 1e-10);
        for i in 0..rule.len() {
            let dot: f64 = rule.point(i).iter().zip(&axis).map(|(a, b)| a * b).sum();
            assert!(dot >= -1e-12);
        }
        // second moment of the axis coordinate over the hemisphere = ω_3 / 8
        let m2: f64 = (0..rule.len())
            .map(|i| {
                let dot: f64 = rule.point(i).iter().zip(&axis).map(|(a, b)| a * b).sum();
                rule.weights[i] * dot * dot
            })
            .sum();
        assert!((m2 - omega_n(3) / 8.0).abs() < 1e-10);
    }
}
