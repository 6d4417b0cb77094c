//! Acceptance criteria 1-8, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`). Criteria whose literal wording
//! cannot hold print FAIL with the measured values. The process exits nonzero
//! only when a check that is expected to hold does not.

use std::f64::consts::PI;
use std::process::ExitCode;

use ensemblectl::analytic::BivariateSeries;
use ensemblectl::basis::build_basis;
use ensemblectl::ensemble::simulate::realify_profile;
use ensemblectl::ensemble::{
    demos as edemos, gram_residual, profile_from_fn, profile_from_series, simulate, EnsembleSystem, FieldTag, Input,
    MatrixField, ParamSpace,
};
use ensemblectl::poly::Frame;
use ensemblectl::reduction::jacobian::jacobian_at;
use ensemblectl::reduction::{demos, run_pipeline, PipelineOptions, Route};
use ensemblectl::witness::{build_witness, null_condition_sum, verify_orthogonality, WitnessCertificate};
use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

struct Outcome {
    pass: bool,
    /// The literal criterion fails for a documented reason while every
    /// attainable part holds.
    known_gap: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Outcome { pass, known_gap: false, detail }
    }
}

fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_poly(rng: &mut ChaCha8Rng, degree: u32) -> BivariateSeries {
    loop {
        let mut terms = Vec::new();
        for k in 0..=degree {
            for l in 0..=degree - k {
                if rng.gen_bool(0.5) {
                    terms.push((k, l, random_c(rng)));
                }
            }
        }
        if !terms.is_empty() {
            return BivariateSeries::new(terms, f64::INFINITY).unwrap();
        }
    }
}

fn random_lists() -> Vec<Vec<BivariateSeries>> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    (0..50)
        .map(|_| {
            let m = rng.gen_range(1..=4);
            (0..m).map(|_| random_poly(&mut rng, 3)).collect()
        })
        .collect()
}

const K_MAX: u32 = 25;

fn soundness(cert: &WitnessCertificate) -> (bool, f64) {
    let worst = cert.residuals.iter().map(|r| r.relative).fold(0.0, f64::max);
    (cert.f0_norm > 0.0 && worst <= 1e-9 && cert.residuals.iter().all(|r| r.k <= K_MAX), worst)
}

fn criterion_1(certs: &[Result<WitnessCertificate, String>]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, c) in certs.iter().enumerate() {
        match c {
            Ok(cert) => {
                let (ok, w) = soundness(cert);
                worst = worst.max(w);
                if !ok {
                    failures.push(format!("#{i} (f0_norm {:.2e}, rel {w:.2e})", cert.f0_norm));
                }
            }
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    Outcome::check(
        failures.is_empty(),
        format!(
            "{} of {} certificates sound, worst relative residual {worst:.2e}{}",
            certs.len() - failures.len(),
            certs.len(),
            if failures.is_empty() { String::new() } else { format!("; failing {}", failures.join(", ")) }
        ),
    )
}

fn criterion_2(lists: &[Vec<BivariateSeries>], certs: &[Result<WitnessCertificate, String>]) -> Outcome {
    let mut null_worst: f64 = 0.0;
    let mut route_worst: f64 = 0.0;
    let mut ok = true;
    for (b, c) in lists.iter().zip(certs) {
        let Ok(cert) = c else {
            ok = false;
            continue;
        };
        null_worst = null_worst.max(cert.null_identity_residual);
        let mut inputs = vec![BivariateSeries::one()];
        inputs.extend(b.iter().cloned());
        for g in &inputs {
            for k in 0..=K_MAX {
                let direct = verify_orthogonality(&cert.f0, g, k).unwrap();
                let moment = null_condition_sum(&cert.f0, g, k as i32).unwrap().norm();
                route_worst = route_worst.max((direct - PI * moment).abs());
            }
        }
    }
    // routes on functions that are not orthogonal to anything
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut generic_worst: f64 = 0.0;
    for _ in 0..20 {
        let f = random_poly(&mut rng, 3).to_fourier_radial(0.7, 0.8).unwrap();
        let g = random_poly(&mut rng, 3);
        for k in 0..=K_MAX {
            let direct = verify_orthogonality(&f, &g, k).unwrap();
            let moment = null_condition_sum(&f, &g, k as i32).unwrap().norm();
            generic_worst = generic_worst.max((direct - PI * moment).abs());
        }
    }
    ok &= null_worst <= 1e-9 && route_worst <= 1e-10 && generic_worst <= 1e-10;
    Outcome::check(
        ok,
        format!(
            "null identity {null_worst:.2e}; route gap on witnesses {route_worst:.2e}, on generic pairs {generic_worst:.2e} (factor pi)"
        ),
    )
}

/// Shifted Legendre `p_1` on `[s1, s2]` by Gram-Schmidt with exact monomial
/// moments. Returns monomial coefficients `[c0, c1]`.
fn oracle_p1(s1: f64, s2: f64) -> [f64; 2] {
    let moment = |j: i32| (s2.powi(j + 1) - s1.powi(j + 1)) / (j + 1) as f64;
    let p0 = 1.0 / moment(0).sqrt();
    // q = s - <s, p0> p0
    let proj = moment(1) * p0 * p0;
    let norm_sq = moment(2) - 2.0 * proj * moment(1) + proj * proj * moment(0);
    let n = norm_sq.sqrt();
    [-proj / n, 1.0 / n]
}

fn criterion_3() -> Outcome {
    let cert = match build_witness(&[BivariateSeries::one()], 1.0, K_MAX) {
        Ok(c) => c,
        Err(e) => return Outcome::check(false, format!("build_witness failed: {e}")),
    };
    let (s1, s2) = (cert.config.s1(), cert.config.s2());
    let p1 = oracle_p1(s1, s2);
    let expect = [(s2 - s1).sqrt() * p1[0], (s2 - s1).sqrt() * p1[1]];
    let others = cert.f0.components().iter().filter(|(&k, rho)| k != 0 && !rho.is_zero()).count();
    let Some(rho) = cert.f0.component(0) else {
        return Outcome::check(false, "f0 has no angular-0 component".into());
    };
    let mono = rho.poly.in_frame(Frame::MONOMIAL);
    let got: Vec<C64> = mono.coeffs().to_vec();
    let phase = if got.len() > 1 { got[1] / got[1].norm() } else { C64::new(1.0, 0.0) };
    let mut err: f64 = 0.0;
    for j in 0..got.len().max(2) {
        let g = got.get(j).copied().unwrap_or_default() / phase;
        let e = expect.get(j).copied().unwrap_or(0.0);
        err = err.max((g - C64::new(e, 0.0)).norm());
    }
    Outcome::check(
        err <= 1e-10 && rho.exponent == 0 && others == 0,
        format!("f0 = {:.12} + {:.12} s up to phase, coefficient error {err:.2e}", expect[0], expect[1]),
    )
}

fn criterion_4() -> Outcome {
    let k_max = 12;
    let sys = edemos::disk_demo(1.0, 32, 4 * k_max + 8).unwrap();
    let target = profile_from_series(&sys.space, &BivariateSeries::sigma_bar()).unwrap();
    let r = gram_residual(&sys, &target, k_max).unwrap();
    let exact = (PI / 2.0).sqrt();
    let err = r.iter().map(|v| (v - exact).abs()).fold(0.0, f64::max);
    Outcome::check(
        err <= 1e-8,
        format!("r_K for K = 0..{k_max} within {err:.2e} of sqrt(pi/2) = {exact:.12}"),
    )
}

fn criterion_5() -> Outcome {
    let sys = edemos::interval_demo(256).unwrap();
    let sigma = profile_from_series(&sys.space, &BivariateSeries::sigma()).unwrap();
    let r_sigma = gram_residual(&sys, &sigma, 3).unwrap();
    let hits_zero = r_sigma[0] > 0.1 && r_sigma[1] <= 1e-10;

    let kink = profile_from_fn(&sys.space, 1, |p| vec![C64::new((p[0] - 0.5).abs(), 0.0)]).unwrap();
    let r = gram_residual(&sys, &kink, 40).unwrap();
    const THRESHOLD: f64 = 1e-3;
    let strict = r.windows(2).all(|w| w[1] < w[0]);
    let monotone = r.windows(2).all(|w| w[1] <= w[0]);
    let even_strict = (1..r.len()).step_by(2).all(|k| k + 1 >= r.len() || r[k + 1] < r[k]);
    let stalls = r.windows(2).filter(|w| w[1] >= w[0]).count();
    let below = r[40] < THRESHOLD;
    let attainable = hits_zero && monotone && even_strict && below;
    Outcome {
        pass: attainable && strict,
        known_gap: attainable && !strict,
        detail: format!(
            "target sigma: r_1 = {:.1e}; target |sigma - 1/2|: r_40 = {:.3e} (< {THRESHOLD:.0e}), nonincreasing, \
             strict at every even step, {stalls} odd-step stalls (odd Krylov directions are orthogonal to an even target)",
            r_sigma[1], r[40]
        ),
    }
}

fn criterion_6() -> Outcome {
    let space = ParamSpace::disk(1.0, 8, 16).unwrap();
    let a = BivariateSeries::sigma().scale(C64::new(0.5, 2.0)).add(&BivariateSeries::sigma_bar());
    let b = vec![BivariateSeries::one(), BivariateSeries::sigma_bar().scale(C64::new(0.0, 1.0))];
    let sys = EnsembleSystem::scalar(space, a, b, FieldTag::Complex).unwrap();
    let real = sys.realify().unwrap();
    let u = Input::function(|t| vec![C64::new((3.0 * t).sin(), 0.5 - t), C64::new(t * t, (2.0 * t).cos())]);
    let x0 = sys.space.sample(|p| C64::new(1.0 - p[0], p[1] * p[0]));
    let tc = simulate(&sys, &u, &x0, 1.0, None).unwrap();
    let tr = simulate(&real, &u.realified(), &realify_profile(&x0, 1), 1.0, Some(tc.times.len() - 1)).unwrap();
    let mut worst: f64 = 0.0;
    for (c, r) in tc.states.iter().zip(&tr.states) {
        for (x, y) in realify_profile(c, 1).iter().zip(r) {
            worst = worst.max((x - y).norm());
        }
    }
    Outcome::check(
        worst <= 1e-8 && tc.states.len() == tr.states.len(),
        format!("{} steps over T = 1, max (re, im) gap {worst:.2e}", tc.times.len() - 1),
    )
}

/// `max_{k ≤ 10, i} |⟨g, a^k b_i⟩| / (‖g‖ ‖a^k b_i‖)`, recomputed from the
/// system on the witness grid.
fn slice_ratio(sys: &EnsembleSystem, w: &ensemblectl::reduction::SliceWitness) -> f64 {
    let pts = &w.points;
    let a: Vec<C64> = pts.iter().map(|p| sys.a.eval_point(p).unwrap()[(0, 0)]).collect();
    let m = sys.b.shape().1;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        let mut h: Vec<C64> = pts.iter().map(|p| sys.b.eval_point(p).unwrap()[(0, i)]).collect();
        for _k in 0..=10 {
            let norm = w.space.norm(&h);
            if norm > 0.0 {
                worst = worst.max(w.space.inner(&w.g, &h).norm() / (w.g_norm * norm));
            }
            h = h.iter().zip(&a).map(|(x, y)| x * y).collect();
        }
    }
    worst
}

fn criterion_7() -> Outcome {
    let opts = PipelineOptions::default();
    let mut parts = Vec::new();
    let mut attainable = true;

    let literal = demos::diagonal_real(demos::unit_box(12).unwrap()).unwrap();
    let literal_normal_form = match run_pipeline(&literal, &opts) {
        Ok(rep) => match &rep.route {
            Route::NormalForm { certificate, .. } => soundness(certificate).0,
            Route::Slice(w) => {
                let ratio = slice_ratio(rep.reduction.primary(), w);
                attainable &= ratio <= 1e-8;
                parts.push(format!(
                    "diag(s1, 2+s1+s2^2): corner is real so k_J = {}, slice route (ratio {ratio:.1e})",
                    rep.jacobian.k_j
                ));
                false
            }
        },
        Err(e) => {
            attainable = false;
            parts.push(format!("diag(s1, 2+s1+s2^2): {e}"));
            false
        }
    };

    let complex = demos::diagonal_complex(demos::unit_box(12).unwrap()).unwrap();
    match run_pipeline(&complex, &opts) {
        Ok(rep) => match &rep.route {
            Route::NormalForm { normal_form, certificate } => {
                let (ok, worst) = soundness(certificate);
                attainable &= ok;
                parts.push(format!(
                    "diag(s1, 2+s1+s2^2+i s2): normal form R = {:.4}, certificate rel {worst:.1e}",
                    normal_form.r
                ));
            }
            Route::Slice(_) => {
                attainable = false;
                parts.push("diag(s1, 2+s1+s2^2+i s2): unexpected slice route".into());
            }
        },
        Err(e) => {
            attainable = false;
            parts.push(format!("diag(s1, 2+s1+s2^2+i s2): {e}"));
        }
    }

    let disk = ParamSpace::disk(1.0, 16, 32).unwrap();
    let re = EnsembleSystem::scalar(disk, demos::sigma1(), vec![BivariateSeries::one()], FieldTag::Complex).unwrap();
    match run_pipeline(&re, &opts) {
        Ok(rep) => match &rep.route {
            Route::Slice(w) => {
                let ratio = slice_ratio(rep.reduction.primary(), w);
                attainable &= ratio <= 1e-8;
                parts.push(format!("a = re sigma: slice route, ratio {ratio:.1e} (reported {:.1e})", w.max_ratio));
            }
            Route::NormalForm { .. } => {
                attainable = false;
                parts.push("a = re sigma: unexpected normal-form route".into());
            }
        },
        Err(e) => {
            attainable = false;
            parts.push(format!("a = re sigma: {e}"));
        }
    }
    Outcome {
        pass: attainable && literal_normal_form,
        known_gap: attainable && !literal_normal_form,
        detail: parts.join("; "),
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);

    // series Jacobian vs central differences
    let space = ParamSpace::disk(1.0, 4, 8).unwrap();
    let mut jac_err: f64 = 0.0;
    for _ in 0..20 {
        let a = random_poly(&mut rng, 4);
        let field = MatrixField::scalar(a.clone());
        for _ in 0..5 {
            let r = rng.gen_range(0.0..0.8);
            let t = rng.gen_range(0.0..2.0 * PI);
            let p = [r * t.cos(), r * t.sin()];
            let j = jacobian_at(&field, &space, &p).unwrap();
            let h = 1e-6;
            for d in 0..2 {
                let mut plus = p;
                let mut minus = p;
                plus[d] += h;
                minus[d] -= h;
                let fp = a.eval(C64::new(plus[0], plus[1])).unwrap();
                let fm = a.eval(C64::new(minus[0], minus[1])).unwrap();
                let diff = (fp - fm) / (2.0 * h);
                let scale = 1.0 + diff.norm();
                jac_err = jac_err.max((j[(0, d)] - diff.re).abs() / scale);
                jac_err = jac_err.max((j[(1, d)] - diff.im).abs() / scale);
            }
        }
    }

    // Gram matrix by an independent Gauss-Legendre rule
    let mut gram_err: f64 = 0.0;
    let rule = GaussLegendre::new(40).unwrap();
    for (s1, s2, n) in [(0.49, 0.64, 8), (0.0, 1.0, 10), (1.96, 2.56, 6), (0.1225, 0.16, 5)] {
        let basis = build_basis(s1, s2, n).unwrap();
        for i in 0..=n {
            for j in 0..=n {
                let pi = basis.get(i).unwrap();
                let pj = basis.get(j).unwrap();
                let re = rule.integrate(s1, s2, |s| (pi.eval(s).conj() * pj.eval(s)).re);
                let im = rule.integrate(s1, s2, |s| (pi.eval(s).conj() * pj.eval(s)).im);
                let v = C64::new(re, im);
                let expect = if i == j { 1.0 } else { 0.0 };
                gram_err = gram_err.max((v - C64::new(expect, 0.0)).norm());
            }
        }
    }

    // angular quadrature vs exact η_k
    let mut eta_err: f64 = 0.0;
    let n_theta = 64;
    for _ in 0..10 {
        let f = random_poly(&mut rng, 5);
        for r in [0.1, 0.45, 0.8, 1.0] {
            for k in -6..=6 {
                let q: C64 = (0..n_theta)
                    .map(|j| {
                        let t = 2.0 * PI * j as f64 / n_theta as f64;
                        f.eval(C64::from_polar(r, t)).unwrap() * C64::from_polar(1.0, -(k as f64) * t)
                    })
                    .sum::<C64>()
                    / n_theta as f64;
                eta_err = eta_err.max((f.eta(k).eval(r) - q).norm());
            }
        }
    }

    Outcome::check(
        jac_err <= 1e-6 && gram_err <= 1e-10 && eta_err <= 1e-8,
        format!("Jacobian vs differences {jac_err:.1e}; Gram - I {gram_err:.1e}; eta_k vs quadrature {eta_err:.1e}"),
    )
}

fn main() -> ExitCode {
    let lists = random_lists();
    let certs: Vec<Result<WitnessCertificate, String>> =
        lists.iter().map(|b| build_witness(b, 1.0, K_MAX).map_err(|e| e.to_string())).collect();

    let outcomes = [
        criterion_1(&certs),
        criterion_2(&lists, &certs),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
    ];
    let mut unexpected = false;
    for (i, o) in outcomes.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag}  {}", i + 1, o.detail);
        unexpected |= !o.pass && !o.known_gap;
    }
    if unexpected {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
