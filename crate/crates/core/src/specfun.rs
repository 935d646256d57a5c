//! Special functions and the closed-form constants of the disk and sphere
//! eigenvalue bounds.
//!
//! Everything here is plain `f64`. The Bessel functions are only needed on
//! moderate real arguments (the radial profile uses `x <= ζ ≈ 1.84`), but they
//! are accurate well beyond that range so the module can be tested on its own.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of `|Γ(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1-x) = π / sin(πx)
        (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Γ(x) for real `x`, Lanczos approximation with reflection below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        // split the power to stay finite up to Γ(171)
        let half = t.powf(0.5 * (x + 0.5));
        (2.0 * PI).sqrt() * half * (half * (-t).exp()) * acc
    }
}

fn bessel_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
    }
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + order) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller backward recurrence, normalized with `J0 + 2 Σ J_{2k} = 1`.
/// Returns `(J0(x), J1(x))` for `x > 0`.
fn bessel_miller(x: f64) -> (f64, f64) {
    let mut start = (x + 20.0 + (40.0 * x).sqrt()) as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    let mut j0 = 0.0;
    let mut j1 = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx % 2 == 0 && idx > 0 {
            norm += 2.0 * cur;
        }
        if idx == 1 {
            j1 = cur;
        }
        if idx == 0 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

fn bessel_asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() > last {
            break;
        }
        last = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        bessel_series(0, ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        bessel_miller(ax).0
    } else {
        bessel_asymptotic(0, ax)
    }
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        bessel_series(1, ax)
    } else if ax <= ASYMPTOTIC_LIMIT {
        bessel_miller(ax).1
    } else {
        bessel_asymptotic(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// `J1'(x) = J0(x) - J1(x)/x`, with the limit `1/2` at the origin.
pub fn bessel_j1_prime(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 0.5 - 3.0 * x * x / 16.0;
    }
    bessel_j0(x) - bessel_j1(x) / x
}

/// Smallest positive zero of `J1'`, cached after the first call.
pub fn zeta() -> f64 {
    static ZETA: OnceLock<f64> = OnceLock::new();
    *ZETA.get_or_init(|| {
        let (mut lo, mut hi) = (1.0_f64, 3.0_f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if bessel_j1_prime(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// Alias kept close to the operation name used by callers.
pub fn find_zeta() -> f64 {
    zeta()
}

/// First positive Neumann eigenvalue of the unit disk, `ζ²`.
pub fn mu1_disk() -> f64 {
    let z = zeta();
    z * z
}

/// Radial profile `f(r) = J1(ζ r)` of the first disk eigenfunctions.
#[inline]
pub fn radial_profile(r: f64) -> f64 {
    let x = zeta() * r;
    // inlined series: the argument never exceeds ζ on the closed disk
    if x.abs() < 4.0 {
        let half = 0.5 * x;
        let q = -half * half;
        let mut term = half;
        let mut sum = term;
        for k in 1..30 {
            term *= q / (k * (k + 1)) as f64;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        sum
    } else {
        bessel_j1(x)
    }
}

/// Derivative of the radial profile, `ζ J1'(ζ r)`.
pub fn radial_profile_prime(r: f64) -> f64 {
    let z = zeta();
    z * bessel_j1_prime(z * r)
}

/// `I_f = ∫₀¹ J1(ζ r)² r dr = (ζ² - 1) J1(ζ)² / (2ζ²)`.
pub fn radial_l2() -> f64 {
    let z = zeta();
    let j = bessel_j1(z);
    (z * z - 1.0) * j * j / (2.0 * z * z)
}

/// Volume of the unit round n-sphere, `2π^{(n+1)/2} / Γ((n+1)/2)`.
pub fn omega_n(n: u32) -> f64 {
    let a = 0.5 * (n as f64 + 1.0);
    (2.0_f64.ln() + a * PI.ln() - ln_gamma(a)).exp()
}

/// `K_n = ∫_{S^n} |∇X_s|^n dg₀ = 2π^{(n+1)/2} Γ(n) / (Γ(n/2) Γ(n+1/2))`.
pub fn k_n(n: u32) -> f64 {
    let nf = n as f64;
    (2.0_f64.ln() + 0.5 * (nf + 1.0) * PI.ln() + ln_gamma(nf)
        - ln_gamma(0.5 * nf)
        - ln_gamma(nf + 0.5))
    .exp()
}

/// Sphere-bound constants for dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub n: u32,
    /// `(n+1)(2K_n)^{2/n}`
    pub theorem_constant: f64,
    /// `n(2ω_n)^{2/n}`
    pub conjecture_constant: f64,
    pub ratio: f64,
    /// Set when `n` is even: the odd-dimension bound does not apply there.
    pub even_dimension_warning: bool,
}

pub fn bound_constants(n: u32) -> BoundConstants {
    assert!(n >= 1, "dimension must be positive");
    let nf = n as f64;
    let theorem = (nf + 1.0) * ((2.0 / nf) * (2.0 * k_n(n)).ln()).exp();
    let conjecture = nf * ((2.0 / nf) * (2.0 * omega_n(n)).ln()).exp();
    BoundConstants {
        n,
        theorem_constant: theorem,
        conjecture_constant: conjecture,
        ratio: theorem / conjecture,
        even_dimension_warning: n % 2 == 0,
    }
}

/// `2 μ1(D) π`, the planar bound on `μ2 · Area`.
pub fn planar_bound() -> f64 {
    2.0 * mu1_disk() * PI
}

/// `μ1(D) π`, the bound on `μ1 · Area`.
pub fn szego_bound() -> f64 {
    mu1_disk() * PI
}

/// `4kπ`.
pub fn polya_bound(k: u32) -> f64 {
    4.0 * k as f64 * PI
}
