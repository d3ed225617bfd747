use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use roughdisc::resistance::{
    brace, r_t_hybrid, resistances, resistances_with, support_start, Rule, ScatterLaw,
};

fn interval_set() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec(0.0f64..FRAC_PI_2, 2..8).prop_map(|mut cuts| {
        cuts.sort_by(f64::total_cmp);
        cuts.chunks_exact(2).map(|c| (c[0], c[1])).collect()
    })
}

#[test]
fn idealized_values() {
    for l in [1.1, 1.5, 2.0, 5.0, 10.0] {
        let s = resistances(&ScatterLaw::Specular, l).unwrap();
        assert!(s.t.abs() < 1e-10 && (s.l + 1.0).abs() < 1e-9, "{s:?}");
        let r = resistances(&ScatterLaw::Retro, l).unwrap();
        assert!((r.t - 3.0 * PI * l / 8.0).abs() < 1e-9 * l, "{r:?}");
        assert!(
            (r.l + 1.5).abs() < 1e-9 && (r.i + 1.5 * l).abs() < 1e-9 * l,
            "{r:?}"
        );
    }
}

#[test]
fn brace_grows_like_fourth_power() {
    let gap = |l: f64| {
        (0..=100)
            .map(|k| (brace(k as f64 * FRAC_PI_2 / 100.0, l) / l.powi(4) - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let gaps: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&l| gap(l)).collect();
    assert!(
        gaps.windows(2).all(|w| w[1] < w[0]) && gaps[2] < 1e-5,
        "{gaps:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transversal_forms_agree(set in interval_set(), lambda in 1.05f64..20.0) {
        let f = r_t_hybrid(&set, lambda).unwrap();
        prop_assert!((f.x_form - f.zeta_form).abs() < 1e-8, "{:?}", f);
    }

    #[test]
    fn quadrature_is_converged(lambda in 1.05f64..20.0, n in 24usize..48) {
        for law in [ScatterLaw::Specular, ScatterLaw::Retro] {
            let a = resistances_with(&law, lambda, Rule::GaussLegendre(n)).unwrap();
            let b = resistances_with(&law, lambda, Rule::GaussLegendre(2 * n)).unwrap();
            let scale = 1.0 + lambda;
            prop_assert!((a.t - b.t).abs() < 1e-9 * scale && (a.l - b.l).abs() < 1e-9 && (a.i - b.i).abs() < 1e-9 * scale);
        }
    }

    // a set below the support start changes nothing
    #[test]
    fn intervals_outside_support_are_inert(lambda in 1.05f64..20.0, lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
        let x0 = support_start(lambda);
        let (a, b) = (lo.min(hi) * x0, lo.max(hi) * x0);
        let f = r_t_hybrid(&[(a, b)], lambda).unwrap();
        prop_assert!(f.x_form.abs() < 1e-12 && f.zeta_form.abs() < 1e-12);
    }
}
