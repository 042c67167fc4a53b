use mellin_sampling::analysis::{rate_fit, ErrorRow, ErrorTable};
use mellin_sampling::kernels::{averaged_kernel, moment};
use mellin_sampling::operators::{SampledSeries, SamplingConfig, SeriesKind};
use mellin_sampling::registry;
use mellin_sampling::{KernelDescriptor, KernelSpec, PositiveReal, TestFunction, Truncation};
use proptest::prelude::*;

fn order() -> impl Strategy<Value = u32> {
    1u32..=6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bspline_partition_of_unity(n in order(), c in -50.0f64..50.0) {
        let k = KernelSpec::bspline(n).unwrap();
        let m0 = moment(&k, 0, PositiveReal::from_log(c), Truncation::ExactCompact).unwrap();
        prop_assert!((m0 - 1.0).abs() < 1e-12, "m0 = {m0}");
    }

    #[test]
    fn jackson_partition_of_unity(c in -5.0f64..5.0) {
        let k = KernelSpec::jackson(1.0, 2).unwrap();
        let m0 = moment(&k, 0, PositiveReal::from_log(c), Truncation::TailTolerance(1e-9)).unwrap();
        prop_assert!((m0 - 1.0).abs() < 1e-8, "m0 = {m0}");
    }

    #[test]
    fn averaging_raises_the_order(n in 1u32..=5, v in -4.0f64..4.0) {
        let a = averaged_kernel(&KernelSpec::bspline(n).unwrap()).eval_log(v);
        let b = KernelSpec::bspline(n + 1).unwrap().eval_log(v);
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn bspline_is_even_and_nonnegative(n in order(), v in -4.0f64..4.0) {
        let k = KernelSpec::bspline(n).unwrap();
        prop_assert!(k.eval_log(v) >= 0.0);
        // Knots are where left/right conventions differ.
        if n % 2 == 0 || (v.abs() - v.abs().floor() - 0.5).abs() > 1e-9 {
            prop_assert!((k.eval_log(v) - k.eval_log(-v)).abs() < 1e-14);
        }
    }

    #[test]
    fn descriptor_round_trip(n in order(), alpha in 0.5f64..4.0, jn in 1u32..5, wrap in any::<bool>()) {
        for d in [KernelDescriptor::BSpline { order: n }, KernelDescriptor::Jackson { alpha, n: jn }] {
            let d = if wrap { KernelDescriptor::Averaged { inner: Box::new(d) } } else { d };
            let text = d.to_string();
            prop_assert_eq!(&text.parse::<KernelDescriptor>().unwrap(), &d);
            let json = serde_json::to_string(&d).unwrap();
            prop_assert_eq!(&serde_json::from_str::<KernelDescriptor>(&json).unwrap(), &d);
        }
    }

    #[test]
    fn rate_fit_recovers_power_laws(rate in 0.2f64..3.0, scale in 1e-3f64..10.0) {
        let rows = [4.0, 8.0, 16.0, 32.0, 64.0]
            .iter()
            .map(|&w| ErrorRow { w, sup_error: scale * w.powf(-rate), theory_bound: None })
            .collect();
        let (fitted, r2) = rate_fit(&ErrorTable::new(rows)).unwrap();
        prop_assert!((fitted - rate).abs() < 1e-9);
        prop_assert!(r2 > 1.0 - 1e-12);
    }

    #[test]
    fn series_reproduce_constants(n in order(), w in 2.0f64..50.0, v in -1.0f64..1.0) {
        let k = KernelSpec::bspline(n).unwrap();
        let f = registry::const1();
        let cfg = SamplingConfig::for_kernel(&k, w);
        for kind in [SeriesKind::Generalized, SeriesKind::Kantorovich] {
            let s = SampledSeries::new(&f, &k, &cfg, kind, v, v).unwrap();
            prop_assert!((s.value(v).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generalized_series_commutes_with_integer_shifts(j in -20i64..20, w in 2.0f64..20.0, v in -1.0f64..1.0) {
        // Shifting f by j/w in log coordinates shifts the series by the same amount.
        let k = KernelSpec::bspline(3).unwrap();
        let cfg = SamplingConfig::for_kernel(&k, w);
        let f = registry::sin_log();
        let shift = j as f64 / w;
        let g = TestFunction::new("shifted", move |t: f64| (t + shift).sin());
        let lhs = SampledSeries::new(&g, &k, &cfg, SeriesKind::Generalized, v, v).unwrap().value(v).unwrap();
        let at = v + shift;
        let rhs = SampledSeries::new(&f, &k, &cfg, SeriesKind::Generalized, at, at).unwrap().value(at).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
    }
}

#[test]
fn kantorovich_is_generalized_of_cell_averages_for_affine_functions() {
    // For an affine f the cell average equals the midpoint value, so I_w f(v) = S_w f(v - 1/(2w)).
    let k = KernelSpec::bspline(4).unwrap();
    let f = registry::log_windowed();
    let w = 12.0;
    let cfg = SamplingConfig::for_kernel(&k, w);
    let s = SampledSeries::new(&f, &k, &cfg, SeriesKind::Generalized, -1.2, 1.2).unwrap();
    let i = SampledSeries::new(&f, &k, &cfg, SeriesKind::Kantorovich, -1.2, 1.2).unwrap();
    for step in 0..=20 {
        let v = -1.0 + 0.1 * step as f64;
        let a = i.value(v).unwrap();
        let b = s.value(v + 0.5 / w).unwrap();
        assert!((a - b).abs() < 1e-12, "v = {v}: {a} vs {b}");
    }
}

#[test]
fn unknown_registry_id_is_none() {
    assert!(registry::lookup("missing").is_none());
    assert_eq!(registry::all().len(), registry::IDS.len());
}
