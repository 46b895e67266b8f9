use pdc_core::phasematch::{nearest_collinear_direction, PdcProcess};
use pdc_core::spectra::*;
use pdc_core::{load_crystal, CrystalDefinition, Direction, Error, Mode};

fn bibo_dir() -> Direction {
    let p = PdcProcess::degenerate_fsf(390.0).unwrap();
    nearest_collinear_direction(&CrystalDefinition::bundled_bibo(), &p, &Direction::from_spherical_deg(63.5, 53.5), 3.0).unwrap()
}

fn bbo_dir() -> Direction {
    let p = PdcProcess::degenerate_fsf(390.0).unwrap();
    nearest_collinear_direction(&CrystalDefinition::bundled_bbo(), &p, &Direction::from_spherical_deg(0.0, -46.0), 2.0).unwrap()
}

fn pump() -> PumpSpec {
    PumpSpec::new(390.0, 2.0).unwrap()
}

fn filter(fwhm: f64) -> FilterSpec {
    FilterSpec::new(780.0, fwhm, FilterShape::Gaussian).unwrap()
}

fn small() -> SpectrumOptions {
    SpectrumOptions { grid_points: 192, ..SpectrumOptions::default() }
}

fn bibo_spectrum(l: f64, f: Option<&FilterSpec>, o: &SpectrumOptions) -> JointSpectrum {
    joint_spectrum(&CrystalDefinition::bundled_bibo(), &pump(), &bibo_dir(), l, f, o).unwrap()
}

#[test]
fn intensity_and_marginals_normalized() {
    let js = bibo_spectrum(2.0, Some(&filter(3.0)), &small());
    let h = js.step_nm();
    assert!((js.intensity.iter().sum::<f64>() * h * h - 1.0).abs() < 1e-12);
    assert!((js.marginal_signal.iter().sum::<f64>() * h - 1.0).abs() < 1e-12);
    assert!((js.marginal_idler.iter().sum::<f64>() * h - 1.0).abs() < 1e-12);
    for v in [js.overlap, js.min_overlap, js.exchange_overlap, js.aspect_ratio] {
        assert!((0.0..=1.0 + 1e-12).contains(&v));
    }
}

#[test]
fn isotropic_medium_gives_identical_marginals() {
    let glass = load_crystal(include_str!("data/isotropic.json")).unwrap();
    let js = joint_spectrum(&glass, &pump(), &Direction::e1(), 2.0, Some(&filter(3.0)), &small()).unwrap();
    for (a, b) in js.marginal_signal.iter().zip(&js.marginal_idler) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((js.overlap - 1.0).abs() < 1e-12);
    assert!((js.min_overlap - 1.0).abs() < 1e-9);
    assert!((js.exchange_overlap - 1.0).abs() < 1e-12);
}

#[test]
fn coarse_grid_rejected() {
    let o = SpectrumOptions { grid_points: 63, ..SpectrumOptions::default() };
    let r = joint_spectrum(&CrystalDefinition::bundled_bibo(), &pump(), &bibo_dir(), 2.0, None, &o);
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn grid_converged() {
    let a = bibo_spectrum(2.0, Some(&filter(3.0)), &SpectrumOptions::default());
    let b = bibo_spectrum(2.0, Some(&filter(3.0)), &SpectrumOptions { grid_points: 1024, ..SpectrumOptions::default() });
    assert!((a.overlap - b.overlap).abs() < 1e-3);
}

#[test]
fn emission_centered_on_energy_conservation() {
    let js = bibo_spectrum(2.0, Some(&filter(3.0)), &small());
    let n = js.len();
    let l = &js.lambda_nm;
    let mut mean = 0.0;
    for i in 0..n {
        for j in 0..n {
            mean += js.intensity[i * n + j] * (1.0 / l[i] + 1.0 / l[j]);
        }
    }
    mean *= js.step_nm() * js.step_nm();
    assert!((1.0 / mean - 390.0).abs() < 0.1, "{}", 1.0 / mean);
}

#[test]
fn swapping_modes_transposes_spectrum() {
    let a = bibo_spectrum(2.0, Some(&filter(3.0)), &small());
    let b = bibo_spectrum(2.0, Some(&filter(3.0)), &SpectrumOptions { modes: (Mode::Fast, Mode::Slow), ..small() });
    let n = a.len();
    for i in 0..n {
        for j in 0..n {
            assert!((a.intensity[i * n + j] - b.intensity[j * n + i]).abs() < 1e-12);
        }
    }
    assert!((a.overlap - b.overlap).abs() < 1e-12);
}

#[test]
fn bibo_support_more_elongated_than_bbo() {
    let bibo = bibo_spectrum(2.0, Some(&filter(3.0)), &small());
    let bbo = joint_spectrum(&CrystalDefinition::bundled_bbo(), &pump(), &bbo_dir(), 2.0, Some(&filter(3.0)), &small()).unwrap();
    assert!(bibo.aspect_ratio < bbo.aspect_ratio);
}

#[test]
fn overlap_falls_with_thickness() {
    let ls = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    let o = small();
    let bibo =
        overlap_vs_thickness(&CrystalDefinition::bundled_bibo(), &pump(), &bibo_dir(), &ls, Some(&filter(3.0)), &o).unwrap();
    let bbo = overlap_vs_thickness(&CrystalDefinition::bundled_bbo(), &pump(), &bbo_dir(), &ls, Some(&filter(3.0)), &o).unwrap();
    for w in bibo.windows(2) {
        assert!(w[1].overlap < w[0].overlap);
    }
    for (a, b) in bibo.iter().zip(&bbo) {
        assert!(b.overlap >= a.overlap);
    }
}

#[test]
fn thin_crystal_limit() {
    // with sinc → 1 the amplitude is symmetric under exchange
    let js = bibo_spectrum(1e-5, Some(&filter(3.0)), &small());
    assert!(js.overlap > 1.0 - 1e-6);
    assert!(js.exchange_overlap > 1.0 - 1e-6);
}

#[test]
fn overlap_rises_as_filter_narrows() {
    let rows = overlap_vs_filter(
        &CrystalDefinition::bundled_bibo(),
        &pump(),
        &bibo_dir(),
        2.0,
        &filter(3.0),
        &[8.0, 5.0, 3.0, 2.0, 1.0],
        &small(),
    )
    .unwrap();
    for w in rows.windows(2) {
        assert!(w[1].overlap > w[0].overlap);
    }
}

#[test]
fn wide_filter_recovers_unfiltered() {
    let o = SpectrumOptions { half_span_nm: Some(8.0), ..small() };
    let open = bibo_spectrum(2.0, None, &o);
    let wide = bibo_spectrum(2.0, Some(&filter(1e6)), &o);
    assert!((open.overlap - wide.overlap).abs() < 1e-9);
}

#[test]
fn filter_sweep_matches_single_point() {
    let o = small();
    let single = bibo_spectrum(2.0, Some(&filter(3.0)), &o);
    let rows =
        overlap_vs_filter(&CrystalDefinition::bundled_bibo(), &pump(), &bibo_dir(), 2.0, &filter(1.0), &[2.0, 3.0], &o).unwrap();
    assert_eq!(rows[1].overlap, single.overlap);
}

#[test]
fn coherence_time_of_three_nm_filter() {
    let tau = coherence_time(&filter(3.0));
    assert!((tau - 180.0).abs() < 15.0, "{tau}");
    assert!((coherence_time(&filter(1.5)) - 2.0 * tau).abs() < 1e-9);
    assert!(compensation_required(630.0, tau));
    assert!(!compensation_required(100.0, tau));
}

#[test]
fn filter_transmission_profile() {
    let f = filter(3.0);
    assert_eq!(f.transmission(780.0), 1.0);
    // half maximum at ±FWHM/2 in wavenumber
    let edge = 1.0 / (1.0 / 780.0 + 1.5 / (780.0 * 780.0));
    assert!((f.transmission(edge) - 0.5).abs() < 1e-12);
    let r = FilterSpec::new(780.0, 3.0, FilterShape::Rectangular).unwrap();
    assert_eq!(r.transmission(781.4), 1.0);
    assert_eq!(r.transmission(781.6), 0.0);
    assert!(FilterSpec::new(780.0, 0.0, FilterShape::Gaussian).is_err());
}
