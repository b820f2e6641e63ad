use frakolm::constants::{gamma, rgamma};

fn fixtures() -> Vec<(f64, f64)> {
    let text = include_str!("fixtures/gamma_reference.csv");
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split(',');
            let x = it.next().unwrap().trim().parse().unwrap();
            let g = it.next().unwrap().trim().parse().unwrap();
            (x, g)
        })
        .collect()
}

#[test]
fn gamma_matches_reference_table() {
    let rows = fixtures();
    assert_eq!(rows.len(), 50);
    let mut worst = 0.0_f64;
    for (x, g) in rows {
        let got = gamma(x).unwrap();
        let rel = ((got - g) / g).abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-14, "x={x}: got {got}, want {g}, rel {rel:e}");
    }
    println!("worst relative error {worst:e}");
}

#[test]
fn rgamma_matches_reciprocal() {
    for (x, g) in fixtures() {
        let r = rgamma(x);
        assert!(((r * g) - 1.0).abs() <= 2e-14, "x={x}");
    }
}
