//! Property tests over randomized inputs.

use corrosion_crack::chem::{binding_rate, damage_diffusivity};
use corrosion_crack::driver::{Preset, Scenario};
use corrosion_crack::fem::{solve_direct, CsrMatrix, SparseSystem};
use corrosion_crack::mech::{czm_calibrate, degradation};
use corrosion_crack::mesh::{generate_ogrid, Mesh, OGridSpec};
use corrosion_crack::units::{parse_quantity, Dimension};
use proptest::prelude::*;

fn total_area(m: &Mesh) -> f64 {
    (0..m.num_triangles()).map(|t| m.triangle_area(t)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn direct_solver_inverts_dominant_matrices(
        n in 2usize..30,
        entries in prop::collection::vec((0usize..30, 0usize..30, -1.0f64..1.0), 0..80),
        b in prop::collection::vec(-10.0f64..10.0, 30),
    ) {
        let mut dense = vec![vec![0.0; n]; n];
        for (i, j, v) in entries {
            let (i, j) = (i % n, j % n);
            if i != j {
                dense[i][j] += v;
                dense[j][i] += v;
            }
        }
        for i in 0..n {
            dense[i][i] = 1.0 + dense[i].iter().map(|v| v.abs()).sum::<f64>();
        }
        let a = CsrMatrix::from_dense(&dense);
        let rhs = b[..n].to_vec();
        let x = solve_direct(&SparseSystem::new(a.clone(), rhs.clone()).unwrap()).unwrap();
        for (ax, bi) in a.mul_vec(&x).iter().zip(&rhs) {
            prop_assert!((ax - bi).abs() <= 1e-10 * (1.0 + bi.abs()));
        }
    }

    #[test]
    fn rectangles_tile_their_area(w in 0.01f64..1.0, h in 0.01f64..1.0, nx in 1usize..20, ny in 1usize..20) {
        let m = Mesh::rectangle(w, h, nx, ny).unwrap();
        prop_assert_eq!(m.num_triangles(), 2 * nx * ny);
        prop_assert!((total_area(&m) - w * h).abs() <= 1e-12 * w * h);
        prop_assert!(m.validate().is_ok());
    }

    #[test]
    fn ogrids_are_valid_for_any_cover(cover_mm in 12.0f64..40.0, d_mm in 8.0f64..16.0, n in 8usize..24) {
        let mut spec = OGridSpec::with_cover(0.1, 0.1, d_mm * 1e-3, cover_mm * 1e-3);
        spec.circumferential_divisions = 4 * n;
        let m = generate_ogrid(&spec).unwrap();
        prop_assert!(m.validate().is_ok());
        prop_assert!((total_area(&m) - 0.01).abs() < 1e-12);
        prop_assert!((0..m.num_triangles()).all(|t| m.triangle_area(t) > 0.0));
        prop_assert_eq!(m.boundaries.steel_interface.len(), 4 * n);
    }

    #[test]
    fn degradation_stays_in_unit_interval(phi in 0.0f64..=1.0, l_mm in 0.5f64..5.0) {
        let mech = Scenario::preset(Preset::Chen2020).mech_params();
        let c = czm_calibrate(&mech, l_mm * 1e-3).unwrap();
        let (g, dg) = degradation(phi, &c);
        prop_assert!((0.0..=1.0).contains(&g));
        prop_assert!(dg <= 0.0);
    }

    #[test]
    fn binding_never_releases(c_f in 0.0f64..1e3, c_b in 0.0f64..1e3) {
        let p = Scenario::preset(Preset::Chen2020).transport;
        prop_assert!(binding_rate(c_f, c_b, &p) >= 0.0);
    }

    #[test]
    fn damaged_diffusivity_lies_between_the_limits(phi in 0.0f64..=1.0) {
        let (d0, dc, p0) = (2.7e-12, 2e-9, 0.15);
        let d = damage_diffusivity(phi, p0, d0, dc, p0).unwrap();
        prop_assert!(d >= d0 * (1.0 - 1e-12) && d <= dc * (1.0 + 1e-12));
    }

    #[test]
    fn millimetres_scale_to_metres(x in 0.001f64..1e4) {
        let v = parse_quantity(&format!("{x} mm"), Dimension::LENGTH).unwrap();
        prop_assert!((v - x * 1e-3).abs() <= 1e-15 * x);
    }
}
