use nalgebra::{Matrix3, SymmetricEigen};
use pdc_core::dispersion::{dn_dlambda, dn_dlambda_with_step, indicatrix_rotation, principal_indices};
use pdc_core::phasematch::{PdcProcess, ProcessMedia};
use pdc_core::waveoptics::*;
use pdc_core::{load_crystal, CrystalDefinition, Direction, Error, Mode, Vec3};
use proptest::prelude::*;

fn bibo() -> CrystalDefinition {
    CrystalDefinition::bundled_bibo()
}

fn bbo() -> CrystalDefinition {
    CrystalDefinition::bundled_bbo()
}

fn t_dir() -> Direction {
    Direction::from_spherical_deg(63.5, 53.5)
}

/// Uniaxial extraordinary index and walk-off for polar angle `theta` from the optic axis.
fn uniaxial_e(no: f64, ne: f64, theta: f64) -> (f64, f64) {
    let inv = theta.cos().powi(2) / (no * no) + theta.sin().powi(2) / (ne * ne);
    let n = 1.0 / inv.sqrt();
    let rho = (0.5 * n * n * (1.0 / (ne * ne) - 1.0 / (no * no)) * (2.0 * theta).sin()).atan().abs();
    (n, rho)
}

/// Ray direction from S ∝ E × (k × E), E = ε⁻¹ D, D an eigenvector of the
/// projected inverse permittivity; all in the indicatrix frame.
fn analytic_ray(c: &CrystalDefinition, lambda: f64, k: &Direction, mode: Mode) -> Vec3 {
    let n = principal_indices(c, lambda).unwrap().n;
    let rot = indicatrix_rotation(c, lambda).unwrap();
    let k0 = rot.to_indicatrix(&k.vector());
    let p = Matrix3::identity() - k0 * k0.transpose();
    let inv_eps = Matrix3::from_diagonal(&Vec3::new(1.0 / (n[0] * n[0]), 1.0 / (n[1] * n[1]), 1.0 / (n[2] * n[2])));
    let eig = SymmetricEigen::new(p * inv_eps * p);
    let mut idx: Vec<usize> = (0..3).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // eigenvalue 0 belongs to k; the largest 1/n² is the fast mode
    let col = match mode {
        Mode::Fast => idx[2],
        Mode::Slow => idx[1],
    };
    let d: Vec3 = eig.eigenvectors.column(col).into();
    let e = inv_eps * d;
    let s = e.cross(&k0.cross(&e)).normalize();
    rot.to_physical(&s)
}

#[test]
fn principal_axis_indices() {
    let c = bibo();
    let rot = indicatrix_rotation(&c, 780.0).unwrap();
    let n = principal_indices(&c, 780.0).unwrap().n;
    let along_e2 = Direction::new(rot.to_physical(&Vec3::y())).unwrap();
    let m = mode_indices(&c, 780.0, &along_e2).unwrap();
    let (lo, hi) = (n[0].min(n[2]), n[0].max(n[2]));
    assert!((m.fast - lo).abs() < 1e-14 && (m.slow - hi).abs() < 1e-14);
}

#[test]
fn optic_axis_is_degenerate() {
    let c = bibo();
    let n = principal_indices(&c, 780.0).unwrap().n;
    let (nx, ny, nz) = (n[1], n[2], n[0]);
    // Optic axes lie in the x–z plane at angle V_z from z.
    let tan_v = (nz / nx) * ((ny * ny - nx * nx) / (nz * nz - ny * ny)).sqrt();
    let v = tan_v.atan();
    // The optical x–z plane is the e2⁰–e1⁰ plane.
    let k0 = Vec3::new(v.cos(), v.sin(), 0.0);
    let rot = indicatrix_rotation(&c, 780.0).unwrap();
    let axis = Direction::new(rot.to_physical(&k0)).unwrap();
    let m = mode_indices(&c, 780.0, &axis).unwrap();
    assert!((m.fast - ny).abs() < 1e-12 && (m.slow - ny).abs() < 1e-12);
    assert!(matches!(mode_polarizations(&c, 780.0, &axis), Err(Error::DegenerateDirection { .. })));
}

#[test]
fn bbo_optic_axis_solve_fails() {
    assert!(matches!(solve_wave(&bbo(), 780.0, &Direction::e3()), Err(Error::DegenerateDirection { .. })));
}

#[test]
fn bbo_ordinary_index_constant() {
    let c = bbo();
    let no = principal_indices(&c, 780.0).unwrap().n[0];
    for i in 1..30 {
        let d = Direction::from_spherical_deg(17.0 * i as f64, 90.0 - 3.0 * i as f64);
        let m = mode_indices(&c, 780.0, &d).unwrap();
        assert!((m.slow - no).abs() < 1e-14);
    }
}

#[test]
fn bbo_walkoff_matches_closed_form() {
    let c = bbo();
    let p = principal_indices(&c, 780.0).unwrap().n;
    let (no, ne) = (p[0], p[2]);
    for i in 0..50 {
        let theta = (5.0 + 1.6 * i as f64).to_radians();
        let psi = 7.3 * i as f64;
        let d = Direction::from_spherical_deg(psi, 90.0 - theta.to_degrees());
        let (n_e, rho) = uniaxial_e(no, ne, theta);
        let sol = solve_wave(&c, 780.0, &d).unwrap();
        assert!((sol.n_fast - n_e).abs() < 1e-14);
        assert!((sol.alpha_fast_deg - rho.to_degrees()).abs() < 1e-5, "θ={theta}");
        assert!(sol.alpha_slow_deg < 1e-7);
        let w = spatial_walkoff(&c, 780.0, &d, 1.0).unwrap();
        assert!((w.theta_swo_deg - rho.to_degrees()).abs() < 1e-5);
    }
}

#[test]
fn bibo_poynting_matches_analytic_ray() {
    let c = bibo();
    for (lambda, d) in [(780.0, t_dir()), (390.0, t_dir()), (780.0, Direction::from_spherical_deg(20.0, -35.0))] {
        for mode in [Mode::Fast, Mode::Slow] {
            let num = poynting_vector(&c, lambda, &d, mode).unwrap();
            let ana = Direction::new(analytic_ray(&c, lambda, &d, mode)).unwrap();
            let ana = if ana.vector().dot(&d.vector()) < 0.0 { ana.reversed() } else { ana };
            assert!(num.angle_deg(&ana) < 1e-5, "{mode:?}: {}", num.angle_deg(&ana));
        }
    }
}

#[test]
fn poynting_step_convergence() {
    let c = bibo();
    let d = t_dir();
    let swo = |step: f64| {
        let f = poynting_vector_with_step(&c, 780.0, &d, Mode::Fast, step).unwrap().direction;
        let s = poynting_vector_with_step(&c, 780.0, &d, Mode::Slow, step).unwrap().direction;
        f.angle_deg(&s)
    };
    assert!((swo(POYNTING_STEP_RAD) - swo(0.5 * POYNTING_STEP_RAD)).abs() < 1e-6);
    let fit = poynting_vector_with_step(&c, 780.0, &d, Mode::Slow, POYNTING_STEP_RAD).unwrap();
    assert!(fit.planarity_residual < 1e-6);
}

#[test]
fn principal_axis_poynting_parallel() {
    let c = bibo();
    let rot = indicatrix_rotation(&c, 780.0).unwrap();
    let d = Direction::new(rot.to_physical(&Vec3::y())).unwrap();
    for mode in [Mode::Fast, Mode::Slow] {
        assert!(poynting_vector(&c, 780.0, &d, mode).unwrap().angle_deg(&d) < 1e-7);
    }
    let (nf, ns) = ray_indices(&c, 780.0, &d).unwrap();
    let m = mode_indices(&c, 780.0, &d).unwrap();
    assert!((nf - m.fast).abs() < 1e-12 && (ns - m.slow).abs() < 1e-12);
}

#[test]
fn isotropic_has_no_walkoff() {
    let glass = load_crystal(include_str!("data/isotropic.json")).unwrap();
    let w = spatial_walkoff(&glass, 600.0, &Direction::from_spherical_deg(30.0, 20.0), 2.0).unwrap();
    assert!(w.theta_swo_deg < 1e-9);
}

#[test]
fn zero_thickness_no_delay() {
    let t = temporal_walkoff(&bibo(), 780.0, &t_dir(), 0.0).unwrap();
    assert_eq!(t.delta_t_fs, 0.0);
    assert!(temporal_walkoff(&bibo(), 780.0, &t_dir(), -1.0).is_err());
}

#[test]
fn delay_is_eq3() {
    let c = bibo();
    let (f, s) = ray_indices(&c, 780.0, &t_dir()).unwrap();
    let t = temporal_walkoff(&c, 780.0, &t_dir(), 1.5).unwrap();
    assert_eq!(t.delta_n_r, s - f);
    assert!((t.delta_t_fs - 1.5e-3 * (s - f) / SPEED_OF_LIGHT * 1e15).abs() < 1e-12);
}

#[test]
fn pump_index_matches_phasematch() {
    let c = bibo();
    let sol = solve_wave(&c, 390.0, &t_dir()).unwrap();
    let process = PdcProcess::degenerate_fsf(390.0).unwrap();
    let media: ProcessMedia = process.media(&c).unwrap();
    let k = media.pump_k(&t_dir().vector()).norm();
    assert!((k - 2.0 * std::f64::consts::PI * sol.n_fast / 0.39).abs() < 1e-12 * k);
}

#[test]
fn displacement_consistent() {
    let w = spatial_walkoff(&bibo(), 780.0, &t_dir(), 1.5).unwrap();
    let expect = 1.5e3 * w.theta_swo_deg.to_radians().tan();
    assert!((w.transverse_displacement_um - expect).abs() <= 1e-9 * expect);
}

#[test]
fn dn_dlambda_richardson() {
    let c = bibo();
    for mode in [Mode::Fast, Mode::Slow] {
        let h = dn_dlambda_with_step(&c, 780.0, &t_dir(), mode, 0.1).unwrap();
        let h2 = dn_dlambda_with_step(&c, 780.0, &t_dir(), mode, 0.05).unwrap();
        let extrapolated = (4.0 * h2 - h) / 3.0;
        // Central differences: error scales as h², so the 0.1 nm truncation error is (h − h2)·4/3.
        assert!((h - extrapolated).abs() < 1e-6 * h.abs());
    }
}

#[test]
fn ordinary_dispersion_direction_independent() {
    let c = bbo();
    let a = dn_dlambda(&c, 780.0, &Direction::from_spherical_deg(10.0, 40.0), Mode::Slow).unwrap();
    let b = dn_dlambda(&c, 780.0, &Direction::from_spherical_deg(-70.0, 12.0), Mode::Slow).unwrap();
    assert!((a - b).abs() <= 1e-10 * a.abs());
}

fn crystal_strategy() -> impl Strategy<Value = (bool, f64)> {
    (any::<bool>(), 300f64..2000.0)
}

proptest! {
    #[test]
    fn fresnel_residual_small((use_bibo, lambda) in crystal_strategy(), psi in -180f64..180.0, rho in -89f64..89.0) {
        let c = if use_bibo { bibo() } else { bbo() };
        let d = Direction::from_spherical_deg(psi, rho);
        let m = mode_indices(&c, lambda, &d).unwrap();
        prop_assert!(m.fast <= m.slow);
        let p = principal_indices(&c, lambda).unwrap().n;
        let k0 = indicatrix_rotation(&c, lambda).unwrap().to_indicatrix(&d.vector());
        prop_assert!(fresnel_residual(&p, &k0, m.fast).abs() < 1e-10);
        prop_assert!(fresnel_residual(&p, &k0, m.slow).abs() < 1e-10);
    }

    #[test]
    fn wave_solution_invariants(psi in -180f64..180.0, rho in -89f64..89.0, lambda in 350f64..1600.0) {
        let c = bibo();
        let d = Direction::from_spherical_deg(psi, rho);
        match solve_wave(&c, lambda, &d) {
            Err(Error::DegenerateDirection { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
            Ok(s) => {
                let k = d.vector();
                prop_assert!(s.d_fast.vector().dot(&s.d_slow.vector()).abs() < 1e-9);
                prop_assert!(s.d_fast.vector().dot(&k).abs() < 1e-9);
                prop_assert!(s.d_slow.vector().dot(&k).abs() < 1e-9);
                prop_assert!((s.n_r_fast - s.n_fast * s.alpha_fast_deg.to_radians().cos()).abs() < 1e-12);
                prop_assert!((s.n_r_slow - s.n_slow * s.alpha_slow_deg.to_radians().cos()).abs() < 1e-12);
                for (dd, ss) in [(s.d_fast, s.s_fast), (s.d_slow, s.s_slow)] {
                    let normal = k.cross(&dd.vector()).normalize();
                    prop_assert!(normal.dot(&ss.vector()).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn polarization_methods_agree(psi in -180f64..180.0, rho in -89f64..89.0) {
        let c = bibo();
        let d = Direction::from_spherical_deg(psi, rho);
        if let Ok((f, _)) = mode_polarizations(&c, 780.0, &d) {
            let ray = analytic_ray(&c, 780.0, &d, Mode::Fast);
            // the ray, k and D are coplanar
            let normal = d.vector().cross(&f.vector()).normalize();
            prop_assert!(normal.dot(&ray).abs() < 1e-9);
        }
    }

    #[test]
    fn indices_continuous_in_wavelength(psi in 0f64..90.0, rho in -89f64..89.0, lambda in 350f64..1500.0) {
        let c = bibo();
        let d = Direction::from_spherical_deg(psi, rho);
        let a = mode_indices(&c, lambda, &d).unwrap();
        let b = mode_indices(&c, lambda + 1e-6, &d).unwrap();
        prop_assert!((a.fast - b.fast).abs() < 1e-8 && (a.slow - b.slow).abs() < 1e-8);
    }
}
