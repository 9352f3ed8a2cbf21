use proptest::prelude::*;
use satqkd_core::lidar::*;

fn nominal() -> MonitorSetup {
    MonitorSetup::default()
}

#[test]
fn quadrupled_power_halves_small_bounds() {
    let s = nominal();
    let (one, four) = (s.satellite(), s.with_power(4.0).satellite());
    for z in [1e4, 5e4, 1e5] {
        let ratio = lidar_size_bound(z, &four).radius() / lidar_size_bound(z, &one).radius();
        assert!((ratio - 0.5).abs() < 1e-3, "z={z}: {ratio}");
    }
}

#[test]
fn dual_profile_peaks_inside_the_link() {
    for p_t in [1.0, 4.0] {
        let profile = nominal().with_power(p_t).profile(401).unwrap();
        let peak = profile
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.r_e.total_cmp(&b.1.r_e))
            .unwrap()
            .0;
        assert!(peak > 0 && peak < profile.len() - 1);
        assert_eq!(profile[0].r_e, 0.0);
        assert_eq!(profile[profile.len() - 1].r_e, 0.0);
    }
}

#[test]
fn radar_equation_agrees_in_magnitude() {
    let s = nominal();
    let ground = s.ground();
    for d in [1e5, 2.5e5, 4e5] {
        let optics = lidar_size_bound(d, &ground).radius();
        let radar = ground.radar_equivalent_radius(d);
        let ratio = optics / radar;
        eprintln!("d = {d:e} m: LIDAR bound {optics:.4e} m, radar-equation bound {radar:.4e} m, ratio {ratio:.3}");
        assert!((0.1..=10.0).contains(&ratio));
    }
}

#[test]
fn background_floors_call_for_photon_counting() {
    let s = nominal();
    // Below a picowatt at 800 nm is a few million photons per second or less.
    assert!(s.satellite().p_min < 1e-12);
    assert!(s.ground().p_min < 1e-12);
    let bg = s.background;
    let ratio = background_power(Side::Satellite, &bg, 0.3) / background_power(Side::Satellite, &bg, 0.15);
    assert!((ratio - 4.0).abs() < 1e-12);
}

#[test]
fn higher_power_helps_more_at_low_elevation() {
    let thetas = [0.0, 1.3];
    let one = elevation_sweep(&nominal(), &thetas, 301).unwrap();
    let four = elevation_sweep(&nominal().with_power(4.0), &thetas, 301).unwrap();
    assert!(one[0].max_eta_ae < 0.1 && four[0].max_eta_ae < 0.1);
    assert!(one[1].max_eta_ae > 0.5);
    assert!(four[1].max_eta_ae < 0.3);
}

fn lidar() -> impl Strategy<Value = LidarConfig> {
    (0.1..100.0f64, 0.01..=1.0f64, 0.01..=1.0f64, 1e-16..1e-12f64, 0.05..1.0f64).prop_map(
        |(p_t, kappa, alpha, p_min, w0)| LidarConfig {
            p_t,
            kappa,
            alpha,
            p_min,
            beam: BeamParams {
                w0,
                lambda: 800e-9,
                m2: 3.0,
            },
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn size_bound_grows_with_range_and_noise(cfg in lidar(), z in 1e3..1e6f64, k in 1.0..4.0f64) {
        let base = lidar_size_bound(z, &cfg).radius();
        prop_assert!(lidar_size_bound(z * k, &cfg).radius() >= base);
        let noisy = LidarConfig { p_min: cfg.p_min * k, ..cfg };
        prop_assert!(lidar_size_bound(z, &noisy).radius() >= base);
        let bright = LidarConfig { p_t: cfg.p_t * k, ..cfg };
        prop_assert!(lidar_size_bound(z, &bright).radius() <= base);
        let shiny = LidarConfig { alpha: (cfg.alpha * k).min(1.0), ..cfg };
        prop_assert!(lidar_size_bound(z, &shiny).radius() <= base);
    }

    #[test]
    fn reflectivity_threshold_grows_with_range(cfg in lidar(), z in 1e3..1e6f64, k in 1.0..4.0f64) {
        prop_assert!(alpha_min(z * k, &cfg) >= alpha_min(z, &cfg));
    }

    #[test]
    fn transmittances_are_fractions(rho in 0.0..100.0f64, w in 1e-3..100.0f64) {
        let t = aperture_transmittance(rho, w);
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert!(aperture_transmittance(rho * 1.5, w) >= t);
    }

    #[test]
    fn beam_only_widens(z in 0.0..1e7f64, dz in 0.0..1e6f64) {
        let b = BeamParams { w0: 0.15, lambda: 800e-9, m2: 3.0 };
        prop_assert!(beam_width(z + dz, &b) >= beam_width(z, &b));
    }
}
