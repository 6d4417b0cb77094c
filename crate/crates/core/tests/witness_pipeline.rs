use ensemblectl::analytic::BivariateSeries;
use ensemblectl::ensemble::{demos, gram_residual, profile_from_series};
use ensemblectl::witness::{build_witness, extend_and_bound, CertificateJson};
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn certificate_survives_json() {
    let b = [BivariateSeries::sigma_bar(), BivariateSeries::one().add(&BivariateSeries::sigma().scale(c(0.0, 0.5)))];
    let cert = build_witness(&b, 1.0, 12).unwrap();
    assert!(cert.is_sound());
    let text = serde_json::to_string(&CertificateJson::from(&cert)).unwrap();
    let back: CertificateJson = serde_json::from_str(&text).unwrap();
    let f0 = back.f0().unwrap();
    for (r, t) in [(0.7, 0.0), (0.75, 1.3), (0.8, -2.0)] {
        let a = cert.f0.eval_polar(r, t);
        let b = f0.eval_polar(r, t);
        assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()), "{a} vs {b}");
    }
}

#[test]
fn lower_bound_never_exceeds_the_residual() {
    // ẋ = σx + u on the unit disk: the Krylov residual is an upper bound on
    // the distance, the witness bound a lower one
    let cert = build_witness(&[BivariateSeries::one()], 1.0, 25).unwrap();
    let k_max = 10;
    let sys = demos::disk_demo(1.0, 48, 4 * k_max + 8).unwrap();
    let targets = [
        BivariateSeries::sigma().mul(&BivariateSeries::sigma_bar()),
        BivariateSeries::sigma_bar().add(&BivariateSeries::one()),
        BivariateSeries::sigma().mul(&BivariateSeries::sigma_bar()).pow(2),
    ];
    for t in &targets {
        let bound = extend_and_bound(&cert, t).unwrap();
        let profile = profile_from_series(&sys.space, t).unwrap();
        let r = gram_residual(&sys, &profile, k_max).unwrap();
        assert!(bound <= r[k_max] + 1e-12, "bound {bound} above residual {}", r[k_max]);
    }
    let reachable = BivariateSeries::sigma().pow(3);
    assert!(extend_and_bound(&cert, &reachable).unwrap() < 1e-12);
}

#[test]
fn scaling_inputs_keeps_soundness() {
    let b = BivariateSeries::sigma_bar().pow(2).add(&BivariateSeries::sigma());
    for s in [1e-4, 1.0, 1e3] {
        let cert = build_witness(&[b.scale(c(s, 0.0))], 1.0, 25).unwrap();
        assert!(cert.is_sound(), "scale {s}: {}", cert.max_relative_residual());
    }
}

#[test]
fn ring_dependent_inputs_are_dropped() {
    // 1 and 1 + cσ give proportional rows of Φ
    let b = [
        BivariateSeries::holomorphic(&[c(1.0, 0.0), c(0.3, 0.2)]),
        BivariateSeries::sigma_bar().pow(2),
    ];
    let cert = build_witness(&b, 1.0, 25).unwrap();
    assert!(cert.is_sound());
    assert!(!cert.dropped_inputs.is_empty());
    assert!(cert.null_identity_residual < 1e-12);
}

#[test]
fn larger_radius_shifts_the_annulus() {
    let cert = build_witness(&[BivariateSeries::sigma_bar()], 2.0, 10).unwrap();
    assert_eq!((cert.config.r1, cert.config.r2), (1.4, 1.6));
    assert!(cert.is_sound());
}
