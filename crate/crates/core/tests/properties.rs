use modelcheck::cutoff::{make_hessian_cutoff, variation_factor};
use modelcheck::curvature::smoothstep;
use modelcheck::interp::hermite;
use modelcheck::pde::thomas;
use modelcheck::radial::{generate_corpus, hessian_norm, TestCorpus};
use modelcheck::verify::Record;
use modelcheck::*;
use proptest::prelude::*;
use std::sync::OnceLock;

fn shared_model() -> &'static ModelManifold {
    static M: OnceLock<ModelManifold> = OnceLock::new();
    M.get_or_init(|| build_model(3, CurvatureProfile::PowerLaw { a: 1.0, alpha: 1.0 }, 20.0, 1e-10).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_reproduces_cubics(c in prop::array::uniform4(-5.0f64..5.0), a in -3.0f64..3.0, h in 0.1f64..4.0, s in 0.0f64..1.0) {
        let f = |t: f64| c[0] + t * (c[1] + t * (c[2] + t * c[3]));
        let df = |t: f64| c[1] + t * (2.0 * c[2] + 3.0 * t * c[3]);
        let b = a + h;
        let t = a + s * h;
        let (v, d, _) = hermite(a, b, f(a), f(b), df(a), df(b), t);
        let scale = 1.0 + c.iter().map(|x| x.abs()).sum::<f64>() * (1.0 + b.abs()).powi(3);
        prop_assert!((v - f(t)).abs() < 1e-11 * scale);
        prop_assert!((d - df(t)).abs() < 1e-10 * scale);
    }

    #[test]
    fn thomas_keeps_m_matrix_solutions_nonnegative(
        rows in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0, 0.0f64..3.0, 0.0f64..1.0), 2..60)
    ) {
        let n = rows.len();
        let sub: Vec<f64> = rows.iter().map(|r| -r.0).collect();
        let sup: Vec<f64> = rows.iter().map(|r| -r.1).collect();
        let diag: Vec<f64> = rows.iter().map(|r| r.0 + r.1 + 0.1 + r.2).collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let x = thomas(&sub, &diag, &sup, &rhs);
        for i in 0..n {
            prop_assert!(x[i] >= 0.0);
            let mut r = diag[i] * x[i] - rhs[i];
            if i > 0 { r += sub[i] * x[i - 1]; }
            if i + 1 < n { r += sup[i] * x[i + 1]; }
            prop_assert!(r.abs() < 1e-12 * (1.0 + rhs.iter().cloned().fold(0.0, f64::max)));
        }
    }

    #[test]
    fn records_agree_with_their_logs(l1 in -2000.0f64..2000.0, d in -50.0f64..50.0) {
        let r = Record::from_logs("x", l1, l1 + d);
        prop_assert!((r.ratio.ln() + d).abs() < 1e-9);
        prop_assert!(r.lhs.is_finite() && r.rhs.is_finite());
        prop_assert!((r.lhs / r.rhs - r.ratio).abs() <= 1e-12 * r.ratio);
    }

    #[test]
    fn variation_is_scale_free(v in prop::collection::vec(0.1f64..10.0, 1..20), k in 0.01f64..100.0) {
        let f = variation_factor(&v);
        prop_assert!(f >= 1.0);
        let scaled: Vec<f64> = v.iter().map(|x| x * k).collect();
        prop_assert!((variation_factor(&scaled) - f).abs() < 1e-12 * f);
    }

    #[test]
    fn smoothstep_is_a_monotone_unit_ramp(a in -0.5f64..1.5, b in -0.5f64..1.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(smoothstep(lo) <= smoothstep(hi));
        prop_assert!((0.0..=1.0).contains(&smoothstep(a)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn comparison_monotonicity(a1 in 0.2f64..2.0, a2 in 0.2f64..2.0, alpha in 0.0f64..3.0) {
        let (lo, hi) = if a1 < a2 { (a1, a2) } else { (a2, a1) };
        let m_lo = build_model(3, CurvatureProfile::PowerLaw { a: lo, alpha }, 15.0, 1e-10).unwrap();
        let m_hi = build_model(3, CurvatureProfile::PowerLaw { a: hi, alpha }, 15.0, 1e-10).unwrap();
        for k in 1..150 {
            let t = 0.1 * k as f64;
            let (w_lo, w_hi) = (m_lo.w(t).unwrap(), m_hi.w(t).unwrap());
            prop_assert!(w_hi >= w_lo * (1.0 - 1e-9), "t={} {} {}", t, w_lo, w_hi);
        }
    }

    #[test]
    fn corpus_prefix_and_determinism(seed in any::<u64>(), size in 1usize..40) {
        let m = shared_model();
        let a = generate_corpus(&TestCorpus::new(seed, size), m, 0.0, vec![]).unwrap();
        let b = generate_corpus(&TestCorpus::new(seed, 2 * size), m, 0.0, vec![]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert_eq!(&x.label, &y.label);
            prop_assert_eq!(x.support, y.support);
        }
    }

    #[test]
    fn kato_and_cutoff_closure(seed in any::<u64>()) {
        let m = shared_model();
        let corpus = generate_corpus(&TestCorpus::new(seed, 8), m, 0.0, vec![]).unwrap();
        let chi = make_hessian_cutoff(m, 4.0).unwrap();
        for f in &corpus {
            let (a, b) = f.support;
            for k in 0..=200 {
                let t = (a + (b - a) * k as f64 / 200.0).max(1e-3);
                let j = f.jet(t);
                // |(|f'|)'| = |f''| wherever f' ≠ 0
                if j.d1 != 0.0 {
                    prop_assert!(j.d2.abs() <= hessian_norm(&j, m.w(t).unwrap(), m.n) * (1.0 + 1e-14));
                }
            }
            let g = f.product(&chi);
            prop_assert!(g.check_support(m).is_ok());
            prop_assert!(g.is_empty() || (g.support.0 >= a && g.support.1 <= b.min(8.0)));
        }
    }
}
