use greenlink::linkbudget::{avg_snr, AvgSnr, FadingModel, LinkBudget};
use greenlink::schemes::{
    avg_ser_closed, avg_ser_model, bound_terms, required_avg_snr, required_symbol_energy,
    total_energy, CircuitProfile, SchemeConfig, SchemeId, SerModel,
};
use greenlink::solver::{bisect, RootSpec};
use proptest::prelude::*;

fn scheme_and_m() -> impl Strategy<Value = (SchemeId, u64)> {
    let pairs: Vec<(SchemeId, u64)> = SchemeId::ALL
        .iter()
        .flat_map(|&s| {
            (1..=6)
                .map(|b| 1u64 << b)
                .filter(move |&m| s.validate_m(m).is_ok())
                .map(move |m| (s, m))
        })
        .collect();
    proptest::sample::select(pairs)
}

fn fading() -> impl Strategy<Value = FadingModel> {
    prop_oneof![
        Just(FadingModel::rayleigh()),
        (-5.0f64..20.0).prop_map(|k| FadingModel::rician_db(k, 1.0)),
        Just(FadingModel::Awgn { omega: 1.0 }),
    ]
}

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

proptest! {
    #[test]
    fn closed_form_falls_with_snr((s, m) in scheme_and_m(), g in 0.0f64..1e4, step in 1e-3f64..1e3) {
        let ray = FadingModel::rayleigh();
        let lo = avg_ser_closed(s, m, &ray, AvgSnr::new(g).unwrap()).unwrap();
        let hi = avg_ser_closed(s, m, &ray, AvgSnr::new(g + step).unwrap()).unwrap();
        prop_assert!(hi <= lo);
        if lo < 1.0 {
            prop_assert!(hi < lo, "{s} M={m}: {hi} !< {lo}");
        }
    }

    #[test]
    fn inversion_round_trip((s, m) in scheme_and_m(), f in fading(), target in log_uniform(1e-6, 1e-2)) {
        let g = required_avg_snr(s, m, &f, target).unwrap();
        let p = avg_ser_model(s, m, &f, AvgSnr::new(g).unwrap()).unwrap();
        prop_assert!((p / target - 1.0).abs() < 1e-8, "{s} M={m} {f}: {p} vs {target}");
    }

    #[test]
    fn energy_terms_add_up(
        (s, m) in scheme_and_m(),
        f in fading(),
        d in log_uniform(1.0, 200.0),
        target in log_uniform(1e-5, 1e-2),
    ) {
        let cfg = SchemeConfig::table_one(s, m).with_target(target);
        let e = total_energy(&cfg, &LinkBudget::table_one(d), &f, &CircuitProfile::for_scheme(s)).unwrap();
        let sum = e.transmit_j + e.circuit_j + e.transient_j;
        prop_assert!((sum - e.total_j).abs() <= 1e-12 * e.total_j);
        prop_assert!(e.transmit_j > 0.0 && e.circuit_j > 0.0 && e.transient_j >= 0.0);
    }

    #[test]
    fn exact_conditional_never_exceeds_bound((s, m) in scheme_and_m(), g in 0.0f64..200.0) {
        let exact = SerModel::new(s, m).unwrap().conditional(g).unwrap();
        let bound = bound_terms(s, m).unwrap().conditional(g);
        prop_assert!(exact <= bound * (1.0 + 1e-12) + 1e-300, "{s} M={m} γ={g}: {exact} > {bound}");
    }

    #[test]
    fn bisection_is_deterministic(
        (s, m) in scheme_and_m(),
        k_db in -5.0f64..20.0,
        d in log_uniform(1.0, 100.0),
        target in log_uniform(1e-5, 1e-2),
    ) {
        let cfg = SchemeConfig::table_one(s, m).with_target(target);
        let lb = LinkBudget::table_one(d);
        let f = FadingModel::rician_db(k_db, 1.0);
        let a = required_symbol_energy(&cfg, &lb, &f).unwrap();
        let b = required_symbol_energy(&cfg, &lb, &f).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        let g = avg_snr(&lb, &f, a).unwrap().value();
        prop_assert!((g / required_avg_snr(s, m, &f, target).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bisect_finds_linear_roots(root in -1e3f64..1e3, width in 1e-3f64..1e3, slope in 0.1f64..10.0) {
        let spec = RootSpec { rel_tol: 1e-12, ..RootSpec::new(root - width, root + 2.0 * width) };
        let x = bisect(|x| slope * (x - root), spec).unwrap();
        prop_assert!((x - root).abs() <= 1e-12 * root.abs().max(width) * 4.0 + 1e-300);
    }
}
