//! Faddeeva accuracy map against the 60-digit table in tests/data.

use num_complex::Complex64;
use qshutter::special::faddeeva;

struct Row {
    upper: bool,
    z: Complex64,
    w: Complex64,
}

fn table() -> Vec<Row> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/faddeeva_reference.csv");
    let text = std::fs::read_to_string(path).expect("reference table present");
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let num = |i: usize| f[i].parse::<f64>().expect("numeric field");
            Row { upper: f[0] == "upper", z: Complex64::new(num(1), num(2)), w: Complex64::new(num(3), num(4)) }
        })
        .collect()
}

fn worst(rows: impl Iterator<Item = Row>) -> (f64, Complex64, usize) {
    let mut max = 0.0;
    let mut at = Complex64::new(0.0, 0.0);
    let mut n = 0;
    for r in rows {
        let got = faddeeva(r.z).expect("finite in the tabulated region");
        let rel = (got - r.w).norm() / r.w.norm();
        if rel > max {
            max = rel;
            at = r.z;
        }
        n += 1;
    }
    (max, at, n)
}

#[test]
fn upper_half_plane_grid() {
    let (max, at, n) = worst(table().into_iter().filter(|r| r.upper));
    assert_eq!(n, 10_000);
    println!("upper half: max relative error {max:.2e} at {at}");
    assert!(max < 1e-13, "max relative error {max:e} at {at}");
}

#[test]
fn lower_half_plane_grid() {
    // the whole lower grid has |exp(-z²)| <= e^144, far from the overflow region
    let rows = table().into_iter().filter(|r| !r.upper && r.z.im * r.z.im - r.z.re * r.z.re < 280.0 * 10f64.ln());
    let (max, at, n) = worst(rows);
    assert_eq!(n, 10_000);
    println!("lower half: max relative error {max:.2e} at {at}");
    assert!(max < 1e-10, "max relative error {max:e} at {at}");
}
