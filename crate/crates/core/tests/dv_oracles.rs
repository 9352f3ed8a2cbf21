use proptest::prelude::*;
use satqkd_core::dv::*;
use satqkd_oracles::{self as oracle, McLink, McTally};

fn within(tally: &McTally, count: u64, expected: f64, sigmas: f64) -> bool {
    let (p, s) = tally.rate(count);
    (p - expected).abs() <= sigmas * s.max(1.0 / tally.pulses as f64)
}

#[test]
fn entropy_reference_value() {
    // 50-digit evaluation
    assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528).abs() < 1e-15);
}

#[test]
fn poisson_split_sums_to_closed_forms() {
    for (mu, eta_ae) in [(0.5, 0.01), (2.0, 0.3), (30.0, 1e-3)] {
        let p = DvParams {
            mu,
            eta_ae,
            ..DvParams::default()
        };
        let b = photon_number_bounds(&p);
        let p0: f64 = (0..400).map(|i| oracle::poisson_split(mu, eta_ae, i, 0)).sum();
        assert!((b.p0_eve - p0).abs() < 1e-14, "{} vs {p0}", b.p0_eve);
        let p11 = oracle::poisson_split(mu, eta_ae, 1, 1);
        assert!((b.p11 - p11).abs() <= 1e-13 * p11, "{} vs {p11}", b.p11);
    }
}

#[test]
fn gain_and_errors_match_simulation() {
    let p = DvParams {
        mu: 0.5,
        eta_ae: 0.3,
        ..DvParams::default()
    };
    let link = McLink {
        mu: p.mu,
        eta: p.eta(),
        eta_ae: p.eta_ae,
        p_dc: p.p_dc,
        e_d: p.e_d,
        single_photon: false,
    };
    let t = oracle::simulate_link(&link, 10_000_000, 8, 2024);
    let o = channel_observables(&p);
    assert!(within(&t, t.clicks, o.gain, 3.0));
    assert!(within(&t, t.errors, o.gain * o.qber, 3.0));
    let (_, _, s0, s11) = oracle::link_expectations(&link);
    assert!(within(&t, t.clicks_m0, s0, 3.0));
    assert!(within(&t, t.clicks_n1m1, s11, 3.0));
}

#[test]
fn bounds_stay_below_simulated_tallies() {
    for (mu, eta_ae, single) in [(0.5, 1e-4, false), (3.0, 2e-4, false), (1.0, 0.4, true)] {
        let p = DvParams {
            source: if single { Source::Sps } else { Source::Wcp },
            mu,
            eta_ae,
            ..DvParams::default()
        };
        let link = McLink {
            mu,
            eta: p.eta(),
            eta_ae,
            p_dc: p.p_dc,
            e_d: p.e_d,
            single_photon: single,
        };
        let t = oracle::simulate_link(&link, 4_000_000, 4, 99);
        let terms = restricted_rate_terms(&p, &channel_observables(&p));
        let (m0, s0) = t.rate(t.clicks_m0);
        let (m11, s11) = t.rate(t.clicks_n1m1);
        assert!(terms.s0 <= m0 + 3.0 * s0, "S0 bound {} above {m0}", terms.s0);
        assert!(terms.s11 <= m11 + 3.0 * s11, "S11 bound {} above {m11}", terms.s11);
    }
}

fn params() -> impl Strategy<Value = DvParams> {
    (1e-3..50.0f64, 1e-6..=1.0f64, 1e-5..=1.0f64, 0.0..1e-4f64, 0.0..0.1f64, any::<bool>()).prop_map(
        |(mu, eta_ch, eta_ae, p_dc, e_d, sps)| DvParams {
            source: if sps { Source::Sps } else { Source::Wcp },
            mu,
            eta_ch,
            eta_ae,
            p_dc,
            e_d,
            ..DvParams::default()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn observables_in_range(p in params()) {
        let o = channel_observables(&p);
        let floor = 1.0 - (1.0 - p.p_dc).powi(2);
        prop_assert!(o.gain >= floor * (1.0 - 1e-12) && o.gain <= 1.0);
        prop_assert!((0.0..=0.5).contains(&o.qber));
    }

    // Holds while eta <= 0.5. Beyond that the weak-coherent S11 bound
    // Q - (1 - p11) can turn positive and grow with eta_ae faster than S0
    // shrinks, so the lower bound (not the true rate) rises again.
    #[test]
    fn rate_falls_as_eve_collects_more(p in params(), k in 1.0..100.0f64) {
        prop_assume!(p.eta() <= 0.5);
        let wider = DvParams { eta_ae: (p.eta_ae * k).min(1.0), ..p };
        prop_assert!(rate_at(&wider) <= rate_at(&p) + 1e-15);
    }

    #[test]
    fn optimised_rate_beats_any_intensity(eta_ae in 1e-5..2e-3f64, mu in 1e-3..1e3f64) {
        let p = DvParams { eta_ae, mu, ..DvParams::default() };
        let best = optimize_mu(&p, &MuSearch::default()).unwrap();
        prop_assert!(best.rate >= rate_at(&p).max(0.0) - 1e-9 * best.rate.abs().max(1e-12));
    }
}
