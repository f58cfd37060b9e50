use modelcheck::green::build_green_seeded_at;
use modelcheck::pde::{exterior_eigenfunction, solve_dirichlet_exhaustion, ExhaustionOptions};
use modelcheck::radial::{bump, generate_corpus, TestCorpus};
use modelcheck::verify::{hardy_constant, verify_hardy, VerifyOptions};
use modelcheck::*;

fn power(alpha: f64, t_max: f64) -> ModelManifold {
    build_model(3, CurvatureProfile::PowerLaw { a: 1.0, alpha }, t_max, 1e-10).unwrap()
}

fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn hardy_single_bump_against_simpson() {
    let m = power(1.0, 30.0);
    let (p, beta) = (2.0, 1.0 / 3.0);
    let g = build_green(&m, p).unwrap();
    let (a, b) = (g.r_k + 1.0, g.r_k + 4.0);
    let f = bump("b", Some(a), b, 0.75, 0.75, 1.0, 2);
    let r = verify_hardy(&m, &g, p, beta, std::slice::from_ref(&f), &VerifyOptions::default()).unwrap();
    // the volume factor is rescaled by its value at b; it cancels in the ratio
    let top = 2.0 * m.logj(b).unwrap();
    let vol = |t: f64| (2.0 * m.logj(t).unwrap() - top).exp();
    let weight = |t: f64| {
        let s = g.state(&m, t).unwrap();
        (-s.log_g).powf(beta * p)
    };
    let lhs = simpson(a, b, 30_000, |t| {
        let z = g.z_at(&m, t).unwrap();
        weight(t) * (f.value(t) / z).abs().powf(p) * vol(t)
    });
    let rhs = simpson(a, b, 30_000, |t| weight(t) * f.d1(t).abs().powf(p) * vol(t));
    let oracle = lhs / rhs;
    let got = r.records[0].ratio;
    assert!((got - oracle).abs() / oracle < 1e-8, "{got} vs {oracle}");
    assert!(got < hardy_constant(p));
}

#[test]
fn hardy_ratios_ignore_the_green_seed() {
    for alpha in [0.0, 1.0] {
        let m = power(alpha, if alpha == 0.0 { 60.0 } else { 40.0 });
        let p = 2.0;
        let g = build_green(&m, p).unwrap();
        let h = build_green_seeded_at(&m, p, 0.9 * m.t_max).unwrap();
        let corpus = generate_corpus(&TestCorpus::new(5, 40), &m, g.r_k.max(h.r_k), vec![]).unwrap();
        let corpus: Vec<_> = corpus.into_iter().filter(|f| f.support.1 <= 0.85 * m.t_max).collect();
        let opts = VerifyOptions::default();
        let a = verify_hardy(&m, &g, p, 0.0, &corpus, &opts).unwrap();
        let b = verify_hardy(&m, &h, p, 0.0, &corpus, &opts).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            assert!((x.ratio - y.ratio).abs() <= 1e-6 * x.ratio, "{}: {} vs {}", x.label, x.ratio, y.ratio);
        }
    }
}

#[test]
fn near_extremal_family_climbs_towards_the_constant() {
    let m = power(0.0, 100.0);
    for p in [1.5, 2.0, 3.0] {
        let g = build_green(&m, p).unwrap();
        let family = g.near_extremal_family(&m, 0.0).unwrap();
        let r = verify_hardy(&m, &g, p, 0.0, &family, &VerifyOptions::default()).unwrap();
        // longer windows come later in the family
        let ratios: Vec<f64> = family.iter().map(|f| r.find(&f.label).unwrap().ratio).collect();
        assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{ratios:?}");
        assert!(*ratios.last().unwrap() > 0.5 * hardy_constant(p));
    }
}

#[test]
fn green_log_growth_and_weight_domination() {
    for alpha in [1.0, 2.0] {
        let m = power(alpha, 60.0);
        let g = build_green(&m, 2.0).unwrap();
        let e = 1.0 + 0.5 * alpha;
        let c = |t: f64| -g.log_g_at(&m, t).unwrap() / t.powf(e);
        let (c1, c2) = (c(m.t_max / 2.0), c(m.t_max));
        assert!(c2 > 0.0 && (c1 - c2).abs() / c2 < 0.05, "alpha={alpha}: {c1} {c2}");
        let beta = alpha / (alpha + 2.0);
        let dom = |lo: f64, hi: f64| {
            g.grid
                .iter()
                .filter(|&&t| t >= lo.max(g.r_k) && t <= hi)
                .map(|&t| {
                    let s = g.state(&m, t).unwrap();
                    (-s.log_g).powf(beta) * s.z
                })
                .fold(0.0, f64::max)
        };
        let (near, far) = (dom(m.t_max / 4.0, m.t_max / 2.0), dom(m.t_max / 2.0, m.t_max));
        assert!(far.is_finite() && far <= 1.1 * near, "alpha={alpha}: {near} {far}");
    }
}

#[test]
fn unit_source_exhaustion_matches_closed_form() {
    let m = power(0.0, 40.0);
    let one = RadialFunction::new("one", (0.0, 40.0), vec![], |_| Jet::constant(1.0));
    let opts = ExhaustionOptions {
        require_compact: false,
        ..Default::default()
    };
    let s = solve_dirichlet_exhaustion(&m, &one, &[8.0, 16.0, 32.0], &[2.0], &opts).unwrap();
    assert!(s.monotonicity_violation <= 1e-12);
    for lvl in &s.levels {
        assert!(lvl.min_interior >= 0.0 && lvl.sup_norm <= 1.0 + 1e-12);
    }
    // in H³, Δ(g/sinh t) = (g'' - g)/sinh t, so 1 - v = c·sinh(√2 t)/sinh t
    let r2 = std::f64::consts::SQRT_2;
    for lvl in &s.levels {
        let r = lvl.radius;
        for (&t, &got) in lvl.t.iter().zip(&lvl.v) {
            let shape = if t > 0.0 { (r2 * t).sinh() / t.sinh() } else { r2 };
            let exact = 1.0 - shape * r.sinh() / (r2 * r).sinh();
            assert!((got - exact).abs() < 1e-7, "R={r} t={t}: {got} vs {exact}");
        }
    }
}

#[test]
fn compact_mode_rejects_wide_sources() {
    let m = power(0.0, 40.0);
    let one = RadialFunction::new("one", (0.0, 40.0), vec![], |_| Jet::constant(1.0));
    assert!(solve_dirichlet_exhaustion(&m, &one, &[8.0, 16.0], &[2.0], &ExhaustionOptions::default()).is_err());
}

#[test]
fn eigenfunction_tracks_mean_curvature() {
    let m = build_model(3, CurvatureProfile::IteratedLog { a: 1.0, k: 0, t_onset: 2.0 }, 140.0, 1e-10).unwrap();
    let v = exterior_eigenfunction(&m, 1.0).unwrap();
    let t = m.t_max / 2.0;
    let (s, _, _) = v.state(&m, t).unwrap();
    let h = 2.0 * m.w(t).unwrap();
    assert!((s.abs() - h).abs() / h < 0.2, "{s} vs {h}");
}
