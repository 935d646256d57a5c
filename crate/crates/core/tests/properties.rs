use foldspec::caps::{disk_cap_reflection, fold_measure, rearrange, Cap};
use foldspec::cli::parse_config_text;
use foldspec::fem::{neumann_eigs, rectangle, DomainSpec, Mesh};
use foldspec::measures::{disk_quadrature, moment_vector, uniform_disk};
use foldspec::moebius::{disk_moebius, push_moebius, renormalize, MoebiusParam};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn moebius_preserves_the_disk(xr in -0.9..0.9f64, xi in -0.4..0.4f64, rho in 0.0..0.999f64, t in 0.0..6.3f64) {
        let xi = Complex64::new(xr, xi);
        let z = Complex64::from_polar(rho, t);
        let w = disk_moebius(xi, z);
        prop_assert!(w.norm() < 1.0);
        prop_assert!((disk_moebius(-xi, w) - z).norm() < 1e-10);
    }

    #[test]
    fn cap_reflection_fixes_the_boundary_circle(r in -0.9..0.9f64, angle in 0.0..6.3f64, t in 0.0..6.3f64) {
        let a = Cap::disk(r, angle).unwrap();
        let z = Complex64::from_polar(1.0, t);
        prop_assert!((disk_cap_reflection(&a, z).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fold_and_rearrange_preserve_mass(r in -0.8..0.8f64, angle in 0.0..6.3f64, c in 0.0..0.4f64) {
        let m = disk_quadrature(12, 24, |z| 1.0 + c * z.re + 0.2 * c * (z * z).im).unwrap();
        let a = Cap::disk(r, angle).unwrap();
        let mass = m.total_mass();
        let folded = fold_measure(&m, &a).unwrap();
        prop_assert!((folded.total_mass() - mass).abs() < 1e-12 * mass);
        let (nu, _) = rearrange(&m, &a).unwrap();
        prop_assert!((nu.total_mass() - mass).abs() < 1e-12 * mass);
        prop_assert!(moment_vector(&nu).iter().all(|v| v.abs() < 1e-8 * mass));
    }

    #[test]
    fn renormalized_push_has_zero_moments(rho in 0.0..0.7f64, t in 0.0..6.3f64, seed in 0u64..4) {
        let m = push_moebius(&uniform_disk(16, 32), &MoebiusParam::disk(Complex64::from_polar(rho, t)));
        let r = renormalize(&m, 1e-12, seed).unwrap();
        let back = push_moebius(&m, &r.xi);
        prop_assert!(moment_vector(&back).iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn eigenvalue_area_products_are_scale_free(a in 0.5..2.0f64, s in 0.3..3.0f64) {
        let mesh = rectangle(a, 1.0, 0.25).unwrap();
        let r1 = neumann_eigs(&mesh, 2).unwrap();
        let r2 = neumann_eigs(&mesh.scaled(s), 2).unwrap();
        for i in 1..3 {
            prop_assert!((r1.products[i] - r2.products[i]).abs() < 1e-8 * r1.products[i]);
        }
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z]{3,8}") {
        let known = ["seed", "n_r", "n_theta", "h", "tol", "out", "format"];
        let res = parse_config_text(&format!("{key}=1"));
        prop_assert_eq!(res.is_ok(), known.contains(&key.as_str()));
    }

    #[test]
    fn domain_specs_round_trip(eps in 0.05..0.5f64, len in 0.01..1.0f64, a in 0.2..3.0f64) {
        for spec in [
            DomainSpec::TwoDisksNeck { epsilon: eps, neck_length: len },
            DomainSpec::Rectangle { a, b: 1.0 },
            DomainSpec::Disk { radius: a },
        ] {
            let text = serde_json::to_string(&spec).unwrap();
            prop_assert_eq!(DomainSpec::parse(&text).unwrap(), spec);
        }
    }
}

#[test]
fn mesh_text_round_trip() {
    let mesh = rectangle(1.5, 1.0, 0.3).unwrap();
    let back = Mesh::from_text(&mesh.to_text()).unwrap();
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.boundary_edges.len(), mesh.boundary_edges.len());
    assert!((back.area() - 1.5).abs() < 1e-12);
}
