use opcalc_cli::io::{from_json, from_matrix_market, read_matrix, to_json, to_matrix_market, write_matrix, MatrixFormat};
use opcalc_core::{Complex64, ComplexMatrix};
use proptest::prelude::*;

fn matrices() -> impl Strategy<Value = ComplexMatrix> {
    (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        proptest::collection::vec((any::<f64>(), any::<f64>()), r * c).prop_map(move |v| {
            let data = v
                .into_iter()
                .map(|(re, im)| {
                    let fix = |x: f64| if x.is_finite() { x } else { 0.0 };
                    Complex64::new(fix(re), fix(im))
                })
                .collect();
            ComplexMatrix::from_row_major(r, c, data).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn matrix_market_round_trip_is_exact(m in matrices()) {
        prop_assert_eq!(from_matrix_market(&to_matrix_market(&m)).unwrap(), m);
    }

    #[test]
    fn json_round_trip_is_exact(m in matrices()) {
        prop_assert_eq!(from_json(&to_json(&m)).unwrap(), m);
    }
}

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let m = ComplexMatrix::from_fn(3, 2, |i, j| Complex64::new(0.1 * i as f64, 1e-300 * j as f64));
    for (name, fmt) in [("m.mtx", MatrixFormat::MatrixMarket), ("m.json", MatrixFormat::Json)] {
        let path = dir.path().join(name);
        write_matrix(&path, &m, fmt).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), m);
    }
}

#[test]
fn json_parses_tiny_values_exactly() {
    let m = ComplexMatrix::scalar(Complex64::new(0.0, 4.589_924_372_558_04e-106));
    let z = ComplexMatrix::scalar(Complex64::new(f64::MIN_POSITIVE, -5e-324));
    for x in [m, z] {
        assert_eq!(from_json(&to_json(&x)).unwrap(), x);
    }
}
