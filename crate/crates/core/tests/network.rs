use std::path::{Path, PathBuf};

use acopf_core::{build_ybus, load_case, parse_case, write_case, BusKind, NetworkCase64};
use num_complex::Complex64;

fn case_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/cases/{name}.m"))
}

fn load(name: &str) -> NetworkCase64 {
    load_case(&case_path(name)).unwrap()
}

const ALL: [&str; 8] = [
    "case9",
    "case14",
    "case14_congested",
    "case30",
    "case39",
    "case57",
    "case118",
    "case300",
];

#[test]
fn every_bundled_case_parses_and_is_connected() {
    for name in ALL {
        let c = load(name);
        assert_eq!(c.components().len(), 1, "{name}");
        assert_eq!(
            c.buses.iter().filter(|b| b.kind == BusKind::Slack).count(),
            1,
            "{name}"
        );
        assert!(build_ybus(&c).is_ok(), "{name}");
    }
}

#[test]
fn ieee14_counts_and_per_unit_values() {
    let c = load("case14");
    assert_eq!((c.buses.len(), c.branches.len(), c.generators.len()), (14, 20, 5));
    assert_eq!(c.base_mva, 100.0);
    // 94.2 MW / 100 MVA
    assert!((c.buses[2].pd - 0.942).abs() < 1e-15);
    assert_eq!(c.generators[0].pmax, 3.324);
    // 0.0430293 $/MW²h · 100², 20 $/MWh · 100
    assert!((c.generators[0].a - 430.293).abs() < 1e-9);
    assert!((c.generators[0].b - 2000.0).abs() < 1e-12);
    assert_eq!(c.generators[1].qmin, -0.4);
}

/// Dense Y-bus stamped branch by branch, without merging parallel circuits.
fn stamp(c: &NetworkCase64) -> Vec<Vec<Complex64>> {
    let n = c.buses.len();
    let mut y = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (i, b) in c.buses.iter().enumerate() {
        y[i][i] += Complex64::new(b.gsh, b.bsh);
    }
    for br in &c.branches {
        let ys = 1.0 / Complex64::new(br.r, br.x);
        let bc = Complex64::new(0.0, br.b_ch / 2.0);
        let t = Complex64::from_polar(br.tap, br.shift);
        let (f, k) = (br.from, br.to);
        y[f][f] += (ys + bc) / (t * t.conj());
        y[f][k] += -ys / t.conj();
        y[k][f] += -ys / t;
        y[k][k] += ys + bc;
    }
    y
}

#[test]
fn ybus_matches_independent_stamp() {
    for name in ["case9", "case14", "case30", "case118", "case300"] {
        let c = load(name);
        let dense = build_ybus(&c).unwrap().to_dense();
        let reference = stamp(&c);
        for i in 0..c.buses.len() {
            let row_sum: Complex64 = dense[i].iter().sum();
            let ref_sum: Complex64 = reference[i].iter().sum();
            assert!((row_sum - ref_sum).norm() < 1e-9, "{name} row {i}");
            for j in 0..c.buses.len() {
                assert!(
                    (dense[i][j] - reference[i][j]).norm() < 1e-9,
                    "{name} ({i},{j}): {} vs {}",
                    dense[i][j],
                    reference[i][j]
                );
            }
        }
    }
}

#[test]
fn ybus_of_untapped_case_is_symmetric() {
    let y = build_ybus(&load("case30")).unwrap();
    assert!(y.is_symmetric(1e-12));
}

#[test]
fn writer_round_trips_bundled_cases() {
    for name in ["case14", "case57"] {
        let c = load(name);
        let again: NetworkCase64 = parse_case(&write_case(&c)).unwrap();
        assert_eq!(c.buses.len(), again.buses.len());
        for (a, b) in c.buses.iter().zip(&again.buses) {
            assert!((a.pd - b.pd).abs() < 1e-12 && (a.vmax - b.vmax).abs() < 1e-12);
        }
        for (a, b) in c.branches.iter().zip(&again.branches) {
            assert!((a.x - b.x).abs() < 1e-12 && (a.tap - b.tap).abs() < 1e-12);
        }
        for (a, b) in c.generators.iter().zip(&again.generators) {
            assert!((a.a - b.a).abs() < 1e-9 && (a.pmax - b.pmax).abs() < 1e-12);
        }
    }
}

#[test]
fn json_dump_is_parseable_and_stable() {
    let c = load("case9");
    let text = c.to_json();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["buses"].as_array().unwrap().len(), 9);
    assert_eq!(v["buses"][0]["kind"], "slack");
    assert_eq!(text, load("case9").to_json());
}

#[test]
fn congested_variant_scales_loads_and_tightens_two_ratings() {
    let t = load("case14");
    let c = load("case14_congested");
    for (a, b) in t.buses.iter().zip(&c.buses) {
        assert!((b.pd - 1.2 * a.pd).abs() < 1e-12);
    }
    let rated: Vec<(usize, usize, f64)> = c
        .branches
        .iter()
        .filter_map(|b| b.rate.map(|r| (c.buses[b.from].id, c.buses[b.to].id, r)))
        .filter(|&(_, _, r)| r < 99.0)
        .collect();
    assert_eq!(rated, vec![(1, 2, 1.1), (1, 5, 0.55)]);
}
