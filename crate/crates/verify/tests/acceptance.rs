//! One verdict line per acceptance criterion; tolerances are fixed here.

use std::process::ExitCode;

use pdc_cli::reference::{
    bbo_pm_direction, bibo_cones, bibo_filter_sweep, bibo_pump_direction, bibo_pump_sweep, bibo_spectral_direction,
    crossing_walkoffs, degenerate_process, overlap, polarization_angles, reference_filter, reference_pump, BBO_THICKNESS_MM,
    BIBO_THICKNESS_MM, DC_NM,
};
use pdc_core::dispersion::{dn_dlambda, dn_dlambda_with_step, indicatrix_rotation, principal_indices};
use pdc_core::nonlinearity::deff_collinear;
use pdc_core::phasematch::{
    collinear_curve, fit_circle, mismatch, nearest_collinear_direction, stereographic_project, CollinearScan, ConeOptions,
};
use pdc_core::spectra::{coherence_time, joint_spectrum, overlap_vs_filter, overlap_vs_thickness, SpectrumOptions};
use pdc_core::waveoptics::{fresnel_residual, mode_indices, solve_wave, spatial_walkoff, temporal_walkoff};
use pdc_core::{CrystalDefinition, Direction, Error, Mode};
use pdc_verify::{run_all, Checklist, Criterion};

type Outcome = Result<(), String>;

fn bibo() -> CrystalDefinition {
    CrystalDefinition::bundled_bibo()
}

fn bbo() -> CrystalDefinition {
    CrystalDefinition::bundled_bbo()
}

fn err(e: Error) -> String {
    e.to_string()
}

fn indicatrix_orientation(c: &mut Checklist) -> Outcome {
    let b = bibo();
    c.near("Φ(390)", indicatrix_rotation(&b, 390.0).map_err(err)?.phi_deg, 43.8, 0.1);
    c.near("Φ(780)", indicatrix_rotation(&b, 780.0).map_err(err)?.phi_deg, 46.9, 0.1);
    Ok(())
}

fn collinear_membership(c: &mut Checklist) -> Outcome {
    let b = bibo();
    let t = bibo_pump_direction();
    let process = degenerate_process();
    let scanned = collinear_curve(&b, &process, CollinearScan::default())
        .map_err(err)?
        .iter()
        .map(|d| d.angle_deg(&t))
        .fold(f64::INFINITY, f64::min);
    let refined = nearest_collinear_direction(&b, &process, &t, 3.0).map_err(err)?.angle_deg(&t);
    c.near("distance from T, deg", scanned.min(refined), 0.0, 0.3);
    Ok(())
}

fn cone_geometry(c: &mut Checklist) -> Outcome {
    let cones = bibo_cones(&bibo(), ConeOptions::default()).map_err(err)?;
    let g = &cones.geometry;
    c.near("separation", g.separation_deg, 6.9, 0.3);
    c.near("intersection angle", g.intersection_angle_deg, 90.0, 1.0);
    c.below("P offset", g.p.angle_deg(&Direction::from_spherical_deg(-80.6, 30.9)), 0.5);
    c.below("R offset", g.r.angle_deg(&Direction::from_spherical_deg(-1.4, -17.4)), 0.5);
    for (name, a) in [("T·P", g.angle_tp_deg), ("T·R", g.angle_tr_deg), ("P·R", g.angle_pr_deg)] {
        c.near(name, a, 90.0, 0.2);
    }
    Ok(())
}

fn cone_points_phase_match(c: &mut Checklist) -> Outcome {
    let b = bibo();
    let process = degenerate_process();
    let pump = bibo_pump_direction();
    let cones = bibo_cones(&b, ConeOptions::default()).map_err(err)?;
    c.holds(
        "cones non-empty and paired",
        !cones.slow.internal.is_empty() && cones.slow.internal.len() == cones.fast.internal.len(),
    );
    let mut worst: f64 = 0.0;
    for (s, f) in cones.slow.internal.iter().zip(&cones.fast.internal) {
        worst = worst.max(mismatch(&b, &process, &pump, s, f).map_err(err)?.relative_mismatch);
    }
    c.below("largest |Δk|/|k_f|", worst, 5e-5);
    Ok(())
}

fn polarization(c: &mut Checklist) -> Outcome {
    let b = bibo();
    let cones = bibo_cones(&b, ConeOptions::default()).map_err(err)?;
    let p = polarization_angles(&b, &degenerate_process(), &cones.geometry).map_err(err)?;
    c.near("pump", p.pump_deg, 13.2, 0.3);
    c.near("upper crossing", p.upper_deg, 14.5, 0.3);
    c.near("lower crossing", p.lower_deg, 16.0, 0.3);
    Ok(())
}

fn effective_nonlinearity(c: &mut Checklist) -> Outcome {
    let (bi, bb) = (bibo(), bbo());
    let process = degenerate_process();
    let t = bibo_pump_direction();
    let bbo_dir = bbo_pm_direction(&bb).map_err(err)?;
    let d_bbo = deff_collinear(&bb, &bbo_dir, &process, true).map_err(err)?;
    let d_kleinman = deff_collinear(&bi, &t, &process, true).map_err(err)?;
    let d_full = deff_collinear(&bi, &t, &process, false).map_err(err)?;
    c.near("BBO", d_bbo, 1.15, 0.05);
    c.near("BiBO Kleinman", d_kleinman, 2.00, 0.05);
    c.near("BiBO full", d_full, 2.02, 0.05);
    c.near("(BiBO/BBO)²", (d_kleinman / d_bbo).powi(2), 3.09, 0.2);
    Ok(())
}

fn spatial_walkoff_check(c: &mut Checklist) -> Outcome {
    let (bi, bb) = (bibo(), bbo());
    let bbo_dir = bbo_pm_direction(&bb).map_err(err)?;
    let w = spatial_walkoff(&bb, DC_NM, &bbo_dir, BBO_THICKNESS_MM).map_err(err)?;
    c.near("BBO angle", w.theta_swo_deg, 4.15, 0.05);
    c.near("BBO µm", w.transverse_displacement_um, 145.0, 3.0);

    let cones = bibo_cones(&bi, ConeOptions::default()).map_err(err)?;
    let wb = crossing_walkoffs(&bi, &degenerate_process(), &cones.geometry, BIBO_THICKNESS_MM).map_err(err)?;
    c.near("BiBO upper angle", wb[0].theta_swo_deg, 3.6, 0.05);
    c.near("BiBO lower angle", wb[1].theta_swo_deg, 3.55, 0.05);
    c.near("BiBO upper µm", wb[0].transverse_displacement_um, 95.0, 3.0);
    c.near("BiBO lower µm", wb[1].transverse_displacement_um, 95.0, 3.0);

    // closed-form extraordinary walk-off in the uniaxial crystal
    let mut worst: f64 = 0.0;
    for lambda in [390.0, DC_NM] {
        let p = principal_indices(&bb, lambda).map_err(err)?.n;
        let (no, ne) = (p[0], p[2]);
        for i in 0..18 {
            let theta = (4.0 + 4.7 * i as f64).to_radians();
            let d = Direction::from_spherical_deg(11.0 * i as f64, 90.0 - theta.to_degrees());
            let inv = theta.cos().powi(2) / (no * no) + theta.sin().powi(2) / (ne * ne);
            let rho = (0.5 / inv * (1.0 / (ne * ne) - 1.0 / (no * no)) * (2.0 * theta).sin()).atan().abs();
            let numeric = spatial_walkoff(&bb, lambda, &d, 1.0).map_err(err)?.theta_swo_deg;
            worst = worst.max((numeric - rho.to_degrees()).abs());
        }
    }
    c.below("uniaxial numeric vs closed form, deg", worst, 1e-5);
    Ok(())
}

fn temporal_walkoff_check(c: &mut Checklist) -> Outcome {
    let (bi, bb) = (bibo(), bbo());
    let tb = temporal_walkoff(&bb, DC_NM, &bbo_pm_direction(&bb).map_err(err)?, BBO_THICKNESS_MM).map_err(err)?;
    let ti = temporal_walkoff(&bi, DC_NM, &bibo_pump_direction(), BIBO_THICKNESS_MM).map_err(err)?;
    c.near("BBO Δn_r", tb.delta_n_r.abs(), 0.05, 0.005);
    c.near("BiBO Δn_r", ti.delta_n_r.abs(), 0.15, 0.015);
    c.near("BBO δT fs", tb.delta_t_fs.abs(), 330.0, 15.0);
    c.near("BiBO δT fs", ti.delta_t_fs.abs(), 750.0, 40.0);
    c.near("τ_c fs", coherence_time(&reference_filter()), 180.0, 15.0);
    Ok(())
}

fn dispersion_table(c: &mut Checklist) -> Outcome {
    let (bi, bb) = (bibo(), bbo());
    let bbo_dir = bbo_pm_direction(&bb).map_err(err)?;
    let t = bibo_pump_direction();
    let slope = |cr: &CrystalDefinition, d: &Direction, m: Mode| dn_dlambda(cr, DC_NM, d, m).map_err(err);
    let rows = [
        ("BBO slow", slope(&bb, &bbo_dir, Mode::Slow)?, 3.15e-5),
        ("BBO fast", slope(&bb, &bbo_dir, Mode::Fast)?, 2.85e-5),
        ("BiBO slow", slope(&bi, &t, Mode::Slow)?, 7.0e-5),
        ("BiBO fast", slope(&bi, &t, Mode::Fast)?, 5.0e-5),
    ];
    for (name, value, target) in rows {
        c.near(&format!("{name} |dn/dλ| 1/nm"), value.abs(), target, 0.1 * target);
    }
    c.near("BiBO slow/fast", rows[2].1 / rows[3].1, 1.4, 0.15);
    Ok(())
}

fn bandwidth_geometry(c: &mut Checklist) -> Outcome {
    let b = bibo();
    let pump = bibo_pump_sweep(&b, ConeOptions::default()).map_err(err)?;
    c.near("pump slope ratio", pump.slope_ratio, 3.65, 0.15);
    c.near("pump width ratio", pump.width_ratio, 2.8, 0.1);
    let filter = bibo_filter_sweep(&b, ConeOptions::default()).map_err(err)?;
    c.near("filter spread ratio", filter.spread_ratio, 1.0, 0.25);
    Ok(())
}

fn spectral_overlap(c: &mut Checklist) -> Outcome {
    let (bi, bb) = (bibo(), bbo());
    let bbo_dir = bbo_pm_direction(&bb).map_err(err)?;
    let bibo_dir = bibo_spectral_direction(&bi).map_err(err)?;
    c.near("BBO 2 mm", overlap(&bb, &bbo_dir, 2.0).map_err(err)?, 0.982, 0.02);
    c.near("BiBO 2 mm", overlap(&bi, &bibo_dir, 2.0).map_err(err)?, 0.896, 0.02);
    c.near("BiBO 1.5 mm", overlap(&bi, &bibo_dir, 1.5).map_err(err)?, 0.928, 0.02);

    let options = SpectrumOptions::default();
    let (pump, filter) = (reference_pump(), reference_filter());
    for (name, crystal, dir) in [("BBO", &bb, &bbo_dir), ("BiBO", &bi, &bibo_dir)] {
        let by_l =
            overlap_vs_thickness(crystal, &pump, dir, &[0.5, 1.0, 1.5, 2.0, 2.5, 3.0], Some(&filter), &options).map_err(err)?;
        c.holds(&format!("{name} falls with L"), by_l.windows(2).all(|w| w[1].overlap < w[0].overlap));
        let by_w =
            overlap_vs_filter(crystal, &pump, dir, 2.0, &filter, &[10.0, 8.0, 6.0, 4.0, 3.0, 2.0, 1.0], &options).map_err(err)?;
        c.holds(&format!("{name} rises as the filter narrows"), by_w.windows(2).all(|w| w[1].overlap > w[0].overlap));
    }
    Ok(())
}

fn sample_directions() -> impl Iterator<Item = Direction> {
    (0..24).flat_map(|i| {
        (0..13).map(move |j| Direction::from_spherical_deg(-180.0 + 15.0 * i as f64 + 0.37, -84.0 + 14.0 * j as f64 + 0.21))
    })
}

fn property_suites(c: &mut Checklist) -> Outcome {
    let mut fresnel: f64 = 0.0;
    let mut transverse: f64 = 0.0;
    let mut frame: f64 = 0.0;
    for crystal in [bibo(), bbo()] {
        for lambda in [390.0, 780.0, 1200.0] {
            let p = principal_indices(&crystal, lambda).map_err(err)?.n;
            let rot = indicatrix_rotation(&crystal, lambda).map_err(err)?;
            for d in sample_directions() {
                let v = d.vector();
                let k0 = rot.to_indicatrix(&v);
                frame = frame.max((rot.to_physical(&k0) - v).norm());
                let m = mode_indices(&crystal, lambda, &d).map_err(err)?;
                fresnel = fresnel.max(fresnel_residual(&p, &k0, m.fast).abs()).max(fresnel_residual(&p, &k0, m.slow).abs());
                match solve_wave(&crystal, lambda, &d) {
                    Ok(s) => {
                        let (df, ds) = (s.d_fast.vector(), s.d_slow.vector());
                        transverse = transverse.max(df.dot(&ds).abs()).max(df.dot(&v).abs()).max(ds.dot(&v).abs());
                    }
                    Err(Error::DegenerateDirection { .. }) => {}
                    Err(e) => return Err(err(e)),
                }
            }
        }
    }
    for d in sample_directions() {
        let (psi, rho) = d.to_spherical_deg();
        frame = frame.max((Direction::from_spherical_deg(psi, rho).vector() - d.vector()).norm());
    }
    c.below("Fresnel residual", fresnel, 1e-10);
    c.below("D orthogonality/transversality", transverse, 1e-9);
    c.below("frame round trip", frame, 1e-12);

    let mut circle: f64 = 0.0;
    for d in sample_directions().filter(|d| d.vector().y > -0.5) {
        let ring: Vec<_> = (0..72)
            .map(|i| stereographic_project(&d.offset(5f64.to_radians(), (5.0 * i as f64).to_radians())))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let fit = fit_circle(&ring).ok_or("circle fit failed")?;
        circle = circle.max(fit.max_residual / fit.radius);
    }
    c.below("stereographic circle residual", circle, 1e-6);

    let bi = bibo();
    let dir = bibo_spectral_direction(&bi).map_err(err)?;
    let (pump, filter) = (reference_pump(), reference_filter());
    let at = |n: usize| {
        let options = SpectrumOptions { grid_points: n, ..SpectrumOptions::default() };
        joint_spectrum(&bi, &pump, &dir, 2.0, Some(&filter), &options).map(|j| j.overlap).map_err(err)
    };
    c.below("overlap grid 512 vs 1024", (at(512)? - at(1024)?).abs(), 1e-3);
    let t = bibo_pump_direction();
    let coarse = dn_dlambda_with_step(&bi, DC_NM, &t, Mode::Slow, 0.1).map_err(err)?;
    let fine = dn_dlambda_with_step(&bi, DC_NM, &t, Mode::Slow, 0.05).map_err(err)?;
    c.below("dn/dλ step halving, relative", ((coarse - fine) / fine).abs(), 1e-6);
    let sep = |n: usize| {
        let options = ConeOptions { azimuth_count: n, ..ConeOptions::default() };
        bibo_cones(&bi, options).map(|g| g.geometry.separation_deg).map_err(err)
    };
    c.below("separation azimuth doubling, deg", (sep(360)? - sep(720)?).abs(), 0.05);

    c.holds("byte-identical CLI reruns", cli_reruns_identical()?);
    Ok(())
}

fn cli_reruns_identical() -> Result<bool, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let crystal = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/bibo.json");
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let csv = dir.path().join(format!("cones_{tag}.csv"));
        let json = dir.path().join(format!("geometry_{tag}.json"));
        let spectra = dir.path().join(format!("spectra_{tag}.json"));
        let args: Vec<String> = [
            "pdc",
            "cones",
            "--crystal",
            crystal,
            "--dir",
            "63.5,53.5",
            "-o",
            csv.to_str().unwrap(),
            "--geometry-out",
            json.to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        if pdc_cli::run(args) != 0 {
            return Err("cones command failed".into());
        }
        let args: Vec<String> = [
            "pdc",
            "spectra",
            "--crystal",
            crystal,
            "--dir",
            "63.5,53.5",
            "--snap-collinear",
            "--thickness-mm",
            "1.5",
            "-o",
            spectra.to_str().unwrap(),
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        if pdc_cli::run(args) != 0 {
            return Err("spectra command failed".into());
        }
        let read = |p: &std::path::Path| std::fs::read(p).map_err(|e| e.to_string());
        outputs.push((read(&csv)?, read(&json)?, read(&spectra)?));
    }
    Ok(outputs[0] == outputs[1])
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { number: 1, title: "indicatrix orientation", check: indicatrix_orientation },
        Criterion { number: 2, title: "collinear membership", check: collinear_membership },
        Criterion { number: 3, title: "cone geometry", check: cone_geometry },
        Criterion { number: 4, title: "cone points phase-match", check: cone_points_phase_match },
        Criterion { number: 5, title: "polarization", check: polarization },
        Criterion { number: 6, title: "effective nonlinearity", check: effective_nonlinearity },
        Criterion { number: 7, title: "spatial walk-off", check: spatial_walkoff_check },
        Criterion { number: 8, title: "temporal walk-off", check: temporal_walkoff_check },
        Criterion { number: 9, title: "dispersion table", check: dispersion_table },
        Criterion { number: 10, title: "bandwidth geometry", check: bandwidth_geometry },
        Criterion { number: 11, title: "spectral overlap", check: spectral_overlap },
        Criterion { number: 12, title: "property suites", check: property_suites },
    ];
    if run_all(&criteria) == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
