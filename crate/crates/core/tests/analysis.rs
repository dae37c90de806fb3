use mbwave::analysis::*;
use mbwave::data::{History, InitialData};
use mbwave::delay::{compatible_history, DelayOptions, DelayParams, DelayProfile};
use mbwave::geometry::DomainGeometry;
use mbwave::profile::NeumannProfile;
use mbwave::quad::Quadrature;

fn neumann(k: f64, a: f64, data: InitialData) -> NeumannProfile {
    NeumannProfile::build(DomainGeometry::new(k).unwrap(), a, data, Quadrature::default()).unwrap()
}

#[test]
fn examples_match_their_closed_form_energies() {
    for k in [0.3, 0.5, 0.8] {
        let kinds = [ExampleKind::Ex1, ExampleKind::Ex2, ExampleKind::Ex3(-0.4), ExampleKind::Ex3(0.9)];
        for kind in kinds {
            let ex = example_solution(kind, k).unwrap();
            let p = neumann(k, ex.a, ex.data.clone());
            for t in [0.0, 1.0, 4.5, 20.0] {
                let e = energy_e1(&p, t).unwrap();
                let exact = ex.energy(t);
                assert!((e / exact - 1.0).abs() < 1e-9, "{kind:?} k = {k} t = {t}: {e} vs {exact}");
            }
        }
    }
}

#[test]
fn conservation_for_several_expansion_rates() {
    for k in [0.1, 0.5, 0.9] {
        let th = thresholds(k).unwrap();
        for a in [th.a1, th.a2] {
            let p = neumann(k, a, InitialData::bump(1.0, 0.5, 0.2).unwrap());
            let e0 = energy_e1(&p, 0.0).unwrap();
            for t in [1.0, 3.0, 10.0] {
                assert!((energy_e1(&p, t).unwrap() - e0).abs() < 1e-8 * e0, "k = {k} a = {a} t = {t}");
            }
        }
    }
}

#[test]
fn energy_change_has_the_sign_of_the_rate_coefficient() {
    let k = 0.5;
    for a in [0.0, 0.2, 0.3, 1.0, 3.0, 3.9, 5.0] {
        let p = neumann(k, a, InitialData::sine(1.0, 0.3));
        let mut prev = energy_e1(&p, 0.0).unwrap();
        let c = rate_coefficient(k, a);
        for i in 1..=20 {
            let e = energy_e1(&p, 0.5 * i as f64).unwrap();
            let step = e - prev;
            assert!(step * c >= 0.0, "a = {a}: step {step} against coefficient {c}");
            prev = e;
        }
    }
}

#[test]
fn sandwich_holds_at_the_first_order_gains() {
    let k = 0.5;
    for a in [k, 1.0 / k] {
        for data in [InitialData::sine(1.0, 0.0), InitialData::bump(1.0, 0.2, 0.1).unwrap()] {
            let p = neumann(k, a, data);
            let e0 = energy_e1(&p, 0.0).unwrap();
            for t in [0.5, 2.0, 7.0] {
                let (lo, hi) = first_order_decay_bounds(k, t, e0);
                let e = energy_e1(&p, t).unwrap();
                assert!(lo <= e * (1.0 + 1e-12) && e <= hi * (1.0 + 1e-12), "a = {a} t = {t}");
            }
        }
    }
}

#[test]
fn exponent_is_monotone_on_each_branch() {
    let k = 0.5;
    let th = thresholds(k).unwrap();
    let grid = |lo: f64, hi: f64| (1..100).map(move |i| lo + (hi - lo) * i as f64 / 100.0);
    let below: Vec<f64> = grid(-0.99, 0.99).map(|a| energy_exponent(k, a).unwrap()).collect();
    assert!(below.windows(2).all(|w| w[1] < w[0]));
    let above: Vec<f64> = grid(1.01, 10.0).map(|a| energy_exponent(k, a).unwrap()).collect();
    assert!(above.windows(2).all(|w| w[1] > w[0]));
    for (a, g) in [(th.a1, 0.0), (th.a2, 0.0), (th.b1, -1.0), (th.b2, -1.0)] {
        assert!((energy_exponent(k, a).unwrap() - g).abs() < 1e-12, "a = {a}");
    }
    assert!(energy_exponent(k, 1.0).is_err());
}

#[test]
fn neumann_classification_covers_the_line() {
    let k = 0.5;
    let th = thresholds(k).unwrap();
    use NeumannRegimeKind::*;
    let cases = [
        (th.a1 - 0.1, IncreasingPolynomialOnly),
        (th.a1, Conserved),
        (0.4, DecayAtMostFirstOrder),
        (th.b1, DecayExactlyFirstOrder),
        (1.0, DecayAtLeastFirstOrder),
        (th.b2, DecayExactlyFirstOrder),
        (3.0, DecayAtMostFirstOrder),
        (th.a2, Conserved),
        (th.a2 + 0.1, IncreasingPolynomialOnly),
        (-0.5, IncreasingPolynomialOnly),
    ];
    for (a, kind) in cases {
        let r = classify_neumann_regime(k, a).unwrap();
        assert_eq!(r.kind, kind, "a = {a}");
        let back: NeumannRegime = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
    assert!(classify_neumann_regime(1.2, 0.5).is_err());
}

#[test]
fn delay_classification_windows() {
    let r = classify_delay_regime(0.5, 2.0, 1.0, 1.0, Some(1.0)).unwrap();
    assert_eq!(r.kind, DelayRegimeKind::DecreasingWithWindow);
    let w = r.tau_window.unwrap();
    assert!((w.lower - 2.0 / 3.0).abs() < 1e-12 && w.upper == 2.0);
    assert!(!w.lower_closed && !w.upper_closed);
    assert!((r.rate_constant.unwrap() - 0.25).abs() < 1e-12);

    let r = classify_delay_regime(0.5, 1.0, 3.0, 1.0, None).unwrap();
    assert_eq!(r.kind, DelayRegimeKind::IncreasingWithWindow);
    let w = r.tau_window.unwrap();
    assert!((w.lower - 1.0 / 3.0).abs() < 1e-12 && (w.upper - 0.4).abs() < 1e-12);
    assert!(w.lower_closed && w.upper_closed);
    assert_eq!(r.rate_constant, None);

    let r = classify_delay_regime(0.5, 1.0, 1.5, 1.0, Some(1.0)).unwrap();
    assert_eq!(r.kind, DelayRegimeKind::Indeterminate);
    assert!(classify_delay_regime(0.5, 2.0, 1.0, 1.0, Some(2.5)).is_err());
    assert!(classify_delay_regime(0.5, 2.0, 1.0, 0.0, None).is_err());
}

#[test]
fn delay_energy_rate_matches_finite_differences() {
    let k = 0.5;
    let prm = DelayParams { mu1: 2.0, mu2: 1.0, tau: 1.0, xi: 1.0 };
    let data = InitialData::sine(1.0, 0.5);
    let g = DomainGeometry::new(k).unwrap();
    let history = compatible_history(&g, &prm, &data).unwrap();
    let p = DelayProfile::build(g, prm, data, history, DelayOptions::default()).unwrap();
    let h = 1e-4;
    // Away from t = 1, 2, 3, 4, where P(t) meets a kink of f'.
    for t in [0.37, 1.43, 2.61, 3.29, 4.5] {
        let fd = (energy_e2(&p, t + h).unwrap() - energy_e2(&p, t - h).unwrap()) / (2.0 * h);
        let rate = energy_rate_e2(&p, t).unwrap();
        assert!((fd - rate).abs() < 1e-6 * rate.abs().max(1.0), "t = {t}: {fd} vs {rate}");
    }
}

#[test]
fn delay_energy_direct_and_reduced_agree() {
    let prm = DelayParams { mu1: 0.5, mu2: 0.5, tau: 1.5, xi: 2.0 };
    let g = DomainGeometry::new(0.5).unwrap();
    let p = DelayProfile::build(g, prm, InitialData::sine(1.0, -0.5), History::sine(1.0, 2.0), DelayOptions::default())
        .unwrap();
    for t in [0.0, 0.8, 2.2, 5.0] {
        let r = energy_e2_with(&p, t, EnergyMethod::Reduced).unwrap();
        let d = energy_e2_with(&p, t, EnergyMethod::Direct).unwrap();
        assert!((r - d).abs() < 1e-8 * r, "t = {t}: {r} vs {d}");
    }
}

#[test]
fn trace_csv_layout() {
    let k = 0.5;
    let ex = example_solution(ExampleKind::Ex1, k).unwrap();
    let p = neumann(k, ex.a, ex.data.clone());
    let regime = classify_neumann_regime(k, ex.a).unwrap();
    let trace = EnergyTrace::neumann(&p, &[0.0, 2.0], regime).unwrap();
    let csv = trace.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,E,dE_analytic,ut_boundary");
    let fields: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(fields[0], 2.0);
    assert!((fields[1] - 1.0 / 3.0).abs() < 1e-15);
    assert!(lines[2].split(',').all(|v| v.split('e').next().unwrap().trim_start_matches('-').len() == 18));
    assert!(EnergyTrace::neumann(&p, &[1.0, 0.5], regime).is_err());
}
