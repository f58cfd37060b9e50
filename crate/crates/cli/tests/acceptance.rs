//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test --release -p modelcheck-cli --test acceptance -- --nocapture`
//! to see the lines.

use modelcheck::cutoff::{hessian_sweep, variation_factor};
use modelcheck::pde::{
    classify_stochastic_completeness, exterior_eigenfunction, li_yau_ratio, positivity_probe, solve_dirichlet_exhaustion,
    Completeness, ExhaustionOptions,
};
use modelcheck::radial::{bump, generate_corpus, TestCorpus};
use modelcheck::specfun::log_bessel_i;
use modelcheck::verify::{
    density_probe, density_surrogate, enrichment_change, hardy_constant, verify_cz2, verify_hardy, VerifyOptions, BOCHNER_TOL,
};
use modelcheck::{build_green, build_model, CurvatureProfile, ModelManifold, Verdict};
use modelcheck_cli::run::default_t_max;
use modelcheck_cli::Command;
use std::time::{Duration, Instant};

fn verdict(n: u32, what: &str, pass: bool, detail: String) {
    println!("criterion {n:>2} {} {what}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {what}: {detail}");
}

fn power(alpha: f64) -> CurvatureProfile {
    CurvatureProfile::PowerLaw { a: 1.0, alpha }
}

fn model(n: usize, profile: CurvatureProfile, t_max: f64, tol: f64) -> ModelManifold {
    build_model(n, profile, t_max, tol).unwrap()
}

fn sample(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..=count).map(move |k| lo * (hi / lo).powf(k as f64 / count as f64))
}

#[test]
fn c01_closed_form_geometry() {
    let t0 = Instant::now();
    let m = model(3, power(0.0), 30.0, 1e-10);
    let mut err: f64 = 0.0;
    for t in sample(0.1, 30.0, 600) {
        let s = m.state(t).unwrap();
        let coth = 1.0 / t.tanh();
        let log_sinh = t + (-(-2.0 * t).exp()).ln_1p() - std::f64::consts::LN_2;
        err = err.max((s.w - coth).abs() / coth).max((s.logj - log_sinh).abs() / log_sinh.abs());
    }
    let el = t0.elapsed();
    verdict(1, "closed-form geometry", err < 1e-8 && el < Duration::from_secs(1), format!("max relative error {err:e}, {el:?}"));
}

#[test]
fn c02_bessel_cross_check() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for alpha in [1.0, 2.0] {
        let m = model(3, power(alpha), 30.0, 1e-10);
        let nu = 1.0 / (alpha + 2.0);
        let oracle = |t: f64| 0.5 * t.ln() + log_bessel_i(nu, 2.0 * nu * t.powf(0.5 / nu)).unwrap().log_value;
        let c = m.logj(1.0).unwrap() - oracle(1.0);
        for t in sample(0.1, 30.0, 600) {
            let lj = m.logj(t).unwrap();
            worst = worst.max((lj - oracle(t) - c).abs() / lj.abs());
        }
    }
    let el = t0.elapsed();
    verdict(2, "Bessel cross-check", worst < 1e-6 && el < Duration::from_secs(5), format!("max relative error {worst:e}, {el:?}"));
}

#[test]
fn c03_asymptotic_fits() {
    let t0 = Instant::now();
    let (mut w_err, mut d_err, mut drift, mut y_ok): (f64, f64, f64, bool) = (0.0, 0.0, 0.0, true);
    for alpha in [0.0, 1.0, 2.0] {
        for n in [2, 3] {
            let m = model(n, power(alpha), 2048.0, 1e-10);
            let f = m.fits().unwrap();
            w_err = w_err.max((f.w_ratio_limit - 1.0).abs());
            drift = drift.max(f.y_drift);
            y_ok &= f.y_constant.is_finite() && f.y_constant > 0.0;
            for p in [1.5, 2.0, 3.0] {
                let g = build_green(&m, p).unwrap();
                d_err = d_err.max(g.derivative_fit(&m).unwrap().relative_error());
            }
        }
    }
    let el = t0.elapsed();
    let pass = w_err < 0.02 && d_err < 0.01 && drift < 0.05 && y_ok && el < Duration::from_secs(60);
    verdict(
        3,
        "asymptotic fits",
        pass,
        format!("w/(At^(a/2)) off by {w_err:e}, G' constant off by {d_err:e}, y drift {drift:e}, {el:?}"),
    );
}

#[test]
fn c04_sharp_hardy() {
    let t0 = Instant::now();
    let opts = VerifyOptions::default();
    let mut failures = Vec::new();
    let mut min_saturation = f64::INFINITY;
    let mut max_excess = f64::NEG_INFINITY;
    for alpha in [0.0, 1.0, 2.0] {
        let m = model(3, power(alpha), default_t_max(Command::Hardy, &power(alpha)), 1e-10);
        for p in [1.5, 2.0, 3.0] {
            let g = build_green(&m, p).unwrap();
            let family = g.near_extremal_family(&m, 0.0).unwrap();
            let corpus = generate_corpus(&TestCorpus::new(42, 200), &m, g.r_k, family).unwrap();
            let sharp = hardy_constant(p);
            for beta in [0.0, alpha / (alpha + 2.0)] {
                let r = verify_hardy(&m, &g, p, beta, &corpus, &opts).unwrap();
                let sat = r
                    .records
                    .iter()
                    .filter(|x| x.label.starts_with("extremal"))
                    .map(|x| x.ratio / sharp)
                    .fold(0.0, f64::max);
                let excess = r.empirical_constant / sharp - 1.0;
                min_saturation = min_saturation.min(sat);
                max_excess = max_excess.max(excess);
                if excess > 1e-6 || sat < 0.5 || r.verdict != Verdict::Holds {
                    failures.push(format!("alpha={alpha} p={p} beta={beta}: excess {excess:e}, saturation {sat}"));
                }
            }
        }
    }
    let el = t0.elapsed();
    verdict(
        4,
        "sharp Hardy",
        failures.is_empty() && el < Duration::from_secs(300),
        format!("max ratio/B - 1 = {max_excess:e}, min saturation {min_saturation:.4}, {el:?} {failures:?}"),
    );
}

#[test]
fn c05_bochner_and_cz2() {
    let opts = VerifyOptions::default();
    let (mut worst_resid, mut worst_change): (f64, f64) = (0.0, 0.0);
    for alpha in [0.0, 1.0, 2.0] {
        let m = model(3, power(alpha), default_t_max(Command::Cz2, &power(alpha)), 1e-10);
        let base = generate_corpus(&TestCorpus::new(7, 200), &m, 0.0, vec![]).unwrap();
        let rich = generate_corpus(&TestCorpus::new(7, 400), &m, 0.0, vec![]).unwrap();
        let a = verify_cz2(&m, &base, alpha, &[1.0], &[0.0], &opts).unwrap();
        let b = verify_cz2(&m, &rich, alpha, &[1.0], &[0.0], &opts).unwrap();
        worst_resid = worst_resid.max(a.bochner.empirical_constant).max(b.bochner.empirical_constant);
        worst_change = worst_change.max(enrichment_change(&a.cz2, &b.cz2));
    }
    verdict(
        5,
        "Bochner identity and CZ(2) stability",
        worst_resid < BOCHNER_TOL && worst_change < 0.1,
        format!("max residual {worst_resid:e}, max change under doubling {worst_change:e}"),
    );
}

#[test]
fn c06_green_harmonicity() {
    let mut worst: f64 = 0.0;
    for alpha in [0.0, 1.0, 2.0] {
        let m = model(3, power(alpha), default_t_max(Command::Green, &power(alpha)), 1e-10);
        for p in [1.5, 2.0, 3.0] {
            worst = worst.max(build_green(&m, p).unwrap().superharmonicity_residual(&m).unwrap());
        }
    }
    verdict(6, "Green p-harmonicity", worst < 1e-7, format!("max residual {worst:e}"));
}

#[test]
fn c07_exhaustion() {
    let m = model(3, power(0.0), 40.0, 1e-10);
    let psi = bump("psi", Some(1.0), 2.0, 0.25, 0.25, 1.0, 0);
    let radii = [8.0, 16.0, 32.0];
    let solve = |cells: f64| {
        let o = ExhaustionOptions {
            cells_per_unit: cells,
            ..Default::default()
        };
        solve_dirichlet_exhaustion(&m, &psi, &radii, &[1.0, 2.0, 4.0], &o).unwrap()
    };
    let (a, b) = (solve(64.0), solve(256.0));
    let sup = a.levels.iter().map(|l| l.sup_norm).fold(0.0, f64::max);
    let mut oracle: f64 = 0.0;
    for (la, lb) in a.levels.iter().zip(&b.levels) {
        // integers are mesh nodes at every resolution
        for k in 1..la.radius as usize {
            let t = k as f64;
            oracle = oracle.max((la.value_at(t).unwrap() - lb.value_at(t).unwrap()).abs() / sup);
        }
    }
    let pass = a.monotonicity_violation <= 1e-10 && a.lp_excess() <= 1e-8 && a.sup_excess() <= 1e-8 && oracle < 1e-6;
    verdict(
        7,
        "exhaustion solver",
        pass,
        format!(
            "monotonicity {:e}, L^p excess {:e}, sup excess {:e}, refined-mesh difference {oracle:e}",
            a.monotonicity_violation,
            a.lp_excess(),
            a.sup_excess()
        ),
    );
}

#[test]
fn c08_stochastic_threshold() {
    let mut cases: Vec<(CurvatureProfile, Completeness)> = [2.5, 3.0, 4.0]
        .iter()
        .map(|&a| (power(a), Completeness::Incomplete))
        .chain([0.0, 1.0, 2.0].iter().map(|&a| (power(a), Completeness::Complete)))
        .collect();
    cases.push((CurvatureProfile::Flat, Completeness::Complete));
    let mut wrong = Vec::new();
    let mut resid: f64 = 0.0;
    for (profile, expected) in cases {
        for n in [2, 3] {
            let m = model(n, profile.clone(), 2048.0, 1e-11);
            let r = classify_stochastic_completeness(&m).unwrap();
            resid = resid.max(r.identity_residual);
            if r.verdict != expected {
                wrong.push(format!("{profile:?} n={n}: {:?} (ratios {:?})", r.verdict, r.ratios));
            }
        }
    }
    verdict(
        8,
        "stochastic completeness threshold",
        wrong.is_empty() && resid <= 1e-9,
        format!("identity residual {resid:e}, misclassified {wrong:?}"),
    );
}

#[test]
fn c09_cutoff_scaling() {
    let radii = [16.0, 32.0, 64.0, 128.0, 256.0, 512.0, 1024.0];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for beta in [0.0, 2.0, 4.0] {
        let m = model(3, power(beta), 2048.0, 1e-10);
        let certs = hessian_sweep(&m, &radii, beta).unwrap();
        let g = variation_factor(&certs.iter().map(|c| c.grad_certificate).collect::<Vec<_>>());
        let h = variation_factor(&certs.iter().map(|c| c.second_certificate).collect::<Vec<_>>());
        worst = worst.max(g).max(h);
        detail.push(format!("beta={beta}: {g:.4}/{h:.4}"));
    }
    verdict(9, "cutoff scaling", worst < 2.0, format!("variation factors {}", detail.join(", ")));
}

#[test]
fn c10_density() {
    let m = model(3, power(1.0), 160.0, 1e-10);
    let f = density_surrogate(&m, 2.0, 6.0).unwrap();
    let r = density_probe(&m, &f, 2.0, &[8.0, 16.0, 32.0, 64.0], &VerifyOptions::default()).unwrap();
    let last: Vec<String> = r
        .records
        .iter()
        .filter(|x| x.label.contains("R03"))
        .map(|x| format!("{}={:.2e}", x.label, x.ratio))
        .collect();
    verdict(10, "density mechanism", r.verdict == Verdict::Holds, format!("final ratios {last:?}"));
}

#[test]
fn c11_li_yau() {
    let m = model(3, CurvatureProfile::IteratedLog { a: 1.0, k: 0, t_onset: 2.0 }, 140.0, 1e-10);
    let v = exterior_eigenfunction(&m, 1.0).unwrap();
    let lam = m.profile.lambda().unwrap();
    let ratios: Vec<f64> = [8.0, 16.0, 32.0, 64.0]
        .iter()
        .map(|&r| li_yau_ratio(&m, &v, |t| lam.value(t), r, 2.0).unwrap())
        .collect();
    let variation = variation_factor(&ratios);

    // flat space: v = e^{-t}/t, so sup_{[10,20]} |v'/v| / λ(10) = (1 + 1/10)/10
    let flat = model(3, CurvatureProfile::Flat, 40.0, 1e-12);
    let fv = exterior_eigenfunction(&flat, 1.0).unwrap();
    let q = li_yau_ratio(&flat, &fv, Ok, 10.0, 2.0).unwrap();
    let closed = 0.11;
    let err = (q - closed).abs() / closed;
    verdict(
        11,
        "Li-Yau ratio",
        variation < 2.0 && err < 1e-10,
        format!("ratios {ratios:?} (variation {variation:.4}), flat {q} vs {closed} (error {err:e})"),
    );
}

#[test]
fn c12_positivity() {
    let psi = bump("psi", Some(1.0), 2.0, 0.25, 0.25, 1.0, 0);
    let mu = bump("mu", Some(1.0), 2.0, 0.25, 0.25, 1.0, 0);
    let mut bad = Vec::new();
    let mut detail = Vec::new();
    for alpha in [0.0, 1.0, 2.0] {
        let m = model(3, power(alpha), 130.0, 1e-10);
        let r = positivity_probe(&m, &mu, &psi, &[8.0, 16.0, 32.0, 64.0], &ExhaustionOptions::default()).unwrap();
        let last = r.pairing.last().unwrap();
        let tail = last.laplacian_chi.abs().max(last.gradient.abs()) / r.target.abs();
        detail.push(format!("alpha={alpha}: min u/sup u {:.1e}, cutoff terms {tail:.1e}", r.min_u / r.sup_u));
        if !(r.positive && r.cutoff_terms_decay) {
            bad.push(alpha);
        }
    }
    verdict(12, "positivity probe", bad.is_empty(), format!("{} failing {bad:?}", detail.join("; ")));
}

#[test]
fn c13_determinism() {
    let exe = env!("CARGO_BIN_EXE_modelcheck");
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(exe)
            .args(["all", "--plot", "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "run {name} exited with {status}");
        let read = |f: &str| std::fs::read(out.join(f)).unwrap();
        (read("records.csv"), read("report.json"))
    };
    let (csv_a, json_a) = run("a");
    let (csv_b, json_b) = run("b");
    verdict(
        13,
        "determinism",
        csv_a == csv_b && json_a == json_b,
        format!("records.csv {} bytes, report.json {} bytes", csv_a.len(), json_a.len()),
    );
}
