use ctqd::csvio::{round_value, Table};
use ctqd::scan::{run_scan, run_scan_many, Axis, Metric, Param, ScanGrid, ScanSetup};
use ctqd_core::design::assemble::{assemble, HierarchySpec, Level3Mode};
use ctqd_core::design::level3::TargetState;
use ctqd_core::design::presets;
use ctqd_core::frame::characterize_pair;
use ctqd_core::{ErrorModel, PropagationConfig, Sequence, State3};
use proptest::prelude::*;

fn setup() -> ScanSetup {
    ScanSetup { target: TargetState::default(), initial: State3::basis(0), base: ErrorModel::NONE, propagation: PropagationConfig::default().with_steps(200) }
}

fn designed(name: &str, spec: Option<HierarchySpec>) -> Sequence {
    let p = presets::find(name).unwrap();
    let spec = spec.unwrap_or(p.spec);
    let cfg = PropagationConfig::default().with_steps(200);
    let ch = characterize_pair(&p.pair, &ErrorModel::NONE, &cfg).unwrap();
    assemble(&spec, &p.base_pair(&ch), &ch).unwrap()
}

#[test]
fn worker_count_does_not_change_results() {
    let seq = designed("4,3", None);
    let x = Axis::new(Param::DOmegaS, -0.4, 0.4, 7);
    let y = Axis::new(Param::Stark, -0.2, 0.3, 4);
    let metrics = [Metric::PF, Metric::F, Metric::PE];
    let one = run_scan(&setup(), &seq, x, y, &metrics, Some(1)).unwrap();
    for w in [2, 3, 8] {
        let many = run_scan(&setup(), &seq, x, y, &metrics, Some(w)).unwrap();
        assert_eq!(one, many, "workers {w}");
        assert_eq!(one.to_table().to_string().unwrap(), many.to_table().to_string().unwrap());
    }
    assert_eq!(one.values.len(), 7 * 4 * 3);
}

#[test]
fn shared_scan_matches_separate_scans() {
    let a = designed("4,3", None);
    let b = designed("4,3", Some(HierarchySpec::new(2, 5, Level3Mode::Pc, TargetState::default())));
    let c = designed("2,1", None);
    let x = Axis::new(Param::DOmegaS, -0.3, 0.3, 3);
    let y = Axis::new(Param::DDelta, -0.3, 0.3, 3);
    let grids = run_scan_many(&setup(), &[&a, &b, &c], x, y, &[Metric::F, Metric::PE], Some(2)).unwrap();
    for (g, s) in grids.iter().zip([&a, &b, &c]) {
        assert_eq!(g, &run_scan(&setup(), s, x, y, &[Metric::F, Metric::PE], Some(1)).unwrap());
    }
}

#[test]
fn axis_and_base_errors_compose() {
    let seq = designed("2,1", None);
    let mut s = setup();
    s.base = ErrorModel { d_omega_p: 0.2, ..ErrorModel::NONE };
    let x = Axis::new(Param::DOmegaS, 0.2, 0.2, 2);
    let y = Axis::new(Param::DDelta, 0.0, 0.0, 2);
    let g = run_scan(&s, &seq, x, y, &[Metric::F], Some(1)).unwrap();
    let direct = ctqd::scan::evaluate(&seq, &ErrorModel::amplitude(0.2), &s.initial, &s.target, &s.propagation).unwrap();
    assert!(g.values.iter().all(|&v| v == direct.f));
}

fn param() -> impl Strategy<Value = Param> {
    prop::sample::select(Param::ALL.to_vec())
}

fn axis() -> impl Strategy<Value = Axis> {
    (param(), -1e3..1e3f64, 0.0..1e3f64, 2usize..6).prop_map(|(p, min, span, n)| Axis::new(p, min, min + span, n))
}

fn grid() -> impl Strategy<Value = ScanGrid> {
    (axis(), axis(), prop::sample::subsequence(Metric::ALL.to_vec(), 1..=3)).prop_flat_map(|(x, y, metrics)| {
        let n = x.count * y.count * metrics.len();
        prop::collection::vec(prop_oneof![0.0..=1.0f64, Just(0.0), Just(1.0), 1e-300..1e-3f64], n).prop_map(move |values| ScanGrid {
            x,
            y,
            metrics: metrics.clone(),
            values,
        })
    })
}

proptest! {
    #[test]
    fn csv_round_trip_is_bit_exact(g in grid()) {
        let text = g.to_table().to_string().unwrap();
        let back = ScanGrid::from_table(&Table::parse(&text).unwrap()).unwrap();
        let want = g.rounded();
        prop_assert_eq!(back.values.len(), want.values.len());
        for (a, b) in back.values.iter().zip(&want.values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(&back, &want);
        prop_assert_eq!(back.to_table().to_string().unwrap(), text);
    }

    #[test]
    fn rounding_is_idempotent(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        let r = round_value(v);
        prop_assert_eq!(round_value(r).to_bits(), r.to_bits());
        prop_assert!((r - v).abs() <= v.abs() * 1e-11);
    }
}
