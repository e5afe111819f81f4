//! Measured sweep amplitudes against the closed-form optical response.

use fbgvib::sweep::{
    default_rpm_grid, default_sweep_template, run_sweep, steady_amplitude, Attribution,
    DEFAULT_DISCARD_FRACTION,
};
use fbgvib::vib_model::{simulate, Scenario, TwoDofParams};

#[test]
fn straight_trace_at_960_rpm_matches_the_response() {
    let params = TwoDofParams::default();
    let scenario = Scenario {
        noise_sigma_nm: 0.0,
        ..Scenario::straight(960.0, 10.0)
    };
    let trace = simulate(&scenario, &params, 1).unwrap();
    let measured =
        steady_amplitude(&trace.channels[0], trace.sample_rate_hz, DEFAULT_DISCARD_FRACTION)
            .unwrap();
    let expected = params.output_amplitude_nm(16.0).unwrap();
    assert!((measured - expected).abs() < 0.02 * expected, "{measured} vs {expected}");
}

#[test]
fn every_sweep_point_matches_the_response() {
    let params = TwoDofParams::default();
    let report = run_sweep(&default_rpm_grid(), &default_sweep_template(), &params, 5).unwrap();
    for p in &report.points {
        let expected = params.output_amplitude_nm(p.rpm / 60.0).unwrap();
        assert!(
            (p.amplitude_nm - expected).abs() <= 0.02 * expected,
            "{} rpm: {} vs {expected}",
            p.rpm,
            p.amplitude_nm
        );
    }
}

#[test]
fn avoid_bands_bracket_the_peaks_and_spare_the_presets() {
    let params = TwoDofParams::default();
    let report = run_sweep(&default_rpm_grid(), &default_sweep_template(), &params, 5).unwrap();
    assert_eq!(report.resonances.len(), 2);
    for r in &report.resonances {
        assert!(r.avoid_band_rpm.0 <= r.rpm && r.rpm <= r.avoid_band_rpm.1);
    }
    let high = &report.resonances[1];
    assert!(high.avoid_band_rpm.0 <= 960.0 && 960.0 <= high.avoid_band_rpm.1);
    assert_eq!(high.attribution, Attribution::ManipulatorDominant);
    assert_eq!(report.resonances[0].attribution, Attribution::SensorDominant);
    for preset in [70.0, 2250.0] {
        assert!(!report.is_avoided(preset), "{preset} rpm sits in an avoid band");
    }
    assert!(report.points.windows(2).all(|w| w[0].rpm < w[1].rpm));
    assert!(report.points.iter().all(|p| p.amplitude_nm >= 0.0));
}

#[test]
fn noisy_sweep_still_finds_both_peaks() {
    let params = TwoDofParams::default();
    let template = Scenario {
        noise_sigma_nm: 0.002,
        ..default_sweep_template()
    };
    let report = run_sweep(&default_rpm_grid(), &template, &params, 9).unwrap();
    let rpms: Vec<f64> = report.resonances.iter().map(|r| r.rpm).collect();
    assert_eq!(rpms.len(), 2, "{rpms:?}");
    assert!((rpms[0] - 24.0).abs() <= 6.0 && (rpms[1] - 960.0).abs() <= 60.0, "{rpms:?}");
}
