mod support;

use proptest::prelude::*;

use boxjenkins::series::{difference, load_csv, parse_csv, to_csv_string, write_csv};
use support::*;

fn positive_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1e-3f64..1e5, 1..60)
}

fn real_values(min_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e4f64..1e4, min_len..60)
}

proptest! {
    #[test]
    fn box_cox_roundtrip(values in positive_values(), lambda in prop::sample::select(vec![0.0, 0.5, 1.0])) {
        check_box_cox_roundtrip(&values, lambda).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn differencing_roundtrip(values in real_values(3), d in 0usize..3) {
        check_difference_roundtrip(&values, d).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn differencing_is_linear(
        pair in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..40),
        a in -10.0f64..10.0,
        b in -10.0f64..10.0,
    ) {
        let x: Vec<f64> = pair.iter().map(|v| v.0).collect();
        let y: Vec<f64> = pair.iter().map(|v| v.1).collect();
        let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
        let lhs = difference(&series(combo), 1).unwrap();
        let dx = difference(&series(x), 1).unwrap();
        let dy = difference(&series(y), 1).unwrap();
        for ((l, u), v) in lhs.values().iter().zip(dx.values()).zip(dy.values()) {
            let r = a * u + b * v;
            prop_assert!((l - r).abs() <= 1e-9 * r.abs().max(1.0), "{} vs {}", l, r);
        }
    }

    #[test]
    fn csv_text_roundtrip(values in real_values(1), year in 1990i32..2030, month in 1u32..=12) {
        let s = boxjenkins::series::TimeSeries::new(
            boxjenkins::series::Period::new(year, month).unwrap(),
            values,
        ).unwrap();
        let back = parse_csv(&to_csv_string(&s)).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn csv_file_roundtrip_of_bundled_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fire.csv");
    let s = boxjenkins::series::fire_incidence();
    write_csv(&s, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), s);
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        boxjenkins::series::FIRE_CSV
    );
}

#[test]
fn fire_series_differencing_roundtrip() {
    let s = boxjenkins::series::fire_incidence();
    check_difference_roundtrip(s.values(), 1).unwrap();
}
