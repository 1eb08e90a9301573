use std::collections::HashSet;
use std::path::Path;

use acopf_core::experiment::IEEE14_CYCLES;
use acopf_core::{
    build, build_ybus, cycle_from_buses, cycle_sums, extract_solution, fundamental_cycles,
    link_angles_cs, link_angles_theta, load_case, map_exact_point, recover_angles, run_powerflow,
    AngleSource, CycleBasis, FormulationKind, Link, NetworkCase64, PowerFlowSpec,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn load(name: &str) -> NetworkCase64 {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/cases/{name}.m"));
    load_case(&p).unwrap()
}

fn bare_link(from: usize, to: usize) -> Link<f64> {
    let z = Complex64::new(0.0, 0.0);
    Link {
        from,
        to,
        branches: vec![],
        y_ff: z,
        y_ft: z,
        y_tf: z,
        y_tt: z,
        rate: None,
    }
}

fn check_walks(basis: &CycleBasis, links: &[Link<f64>]) {
    for c in &basis.cycles {
        assert_eq!(c.buses.first(), c.buses.last());
        assert_eq!(c.edges.len() + 1, c.buses.len());
        for (w, &(k, o)) in c.buses.windows(2).zip(&c.edges) {
            let l = &links[k];
            let (a, b) = if o > 0 { (l.from, l.to) } else { (l.to, l.from) };
            assert_eq!((a, b), (w[0], w[1]));
        }
    }
}

#[test]
fn ieee14_has_seven_independent_cycles() {
    let c = load("case14");
    let links = c.links().unwrap();
    let basis = fundamental_cycles(&c).unwrap();
    assert_eq!(links.len(), 20);
    assert_eq!(basis.tree_edges.len(), 13);
    assert_eq!(basis.cycles.len(), 7);
    check_walks(&basis, &links);
}

#[test]
fn every_case_basis_has_circuit_rank_cycles() {
    for name in ["case9", "case30", "case39", "case57", "case118", "case300"] {
        let c = load(name);
        let links = c.links().unwrap();
        let basis = fundamental_cycles(&c).unwrap();
        assert_eq!(basis.cycles.len() + c.buses.len(), links.len() + 1, "{name}");
        check_walks(&basis, &links);
    }
}

#[test]
fn golden_ieee14_cycles_build_and_label() {
    let c = load("case14");
    let links = c.links().unwrap();
    for ids in IEEE14_CYCLES {
        let cycle = cycle_from_buses(&c, &links, ids).unwrap();
        assert_eq!(cycle.edges.len(), ids.len() - 1);
        let label: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
        assert_eq!(cycle.label(&c), label.join("-"));
    }
    assert!(cycle_from_buses(&c, &links, &[1, 3, 4, 1]).is_err());
    assert!(cycle_from_buses(&c, &links, &[1, 2, 5]).is_err());
}

#[test]
fn exact_point_angles_close_on_every_cycle() {
    for name in ["case14", "case30", "case118"] {
        let c = load(name);
        let links = c.links().unwrap();
        let pf = run_powerflow(&c, &PowerFlowSpec::from_case(&c), 1e-11, 30).unwrap();
        let opf = build(&c, &build_ybus(&c).unwrap(), FormulationKind::RelaxedNoArctan, 1.0, None)
            .unwrap();
        let x = map_exact_point(&opf, &c, &pf.vm, &pf.va, &pf.pg, &pf.qg).unwrap();
        let sol = extract_solution(&opf, &c, &x).unwrap();

        let basis = fundamental_cycles(&c).unwrap();
        let cs = cycle_sums(
            &basis.cycles,
            &link_angles_cs(&sol.cij, &sol.sij),
            AngleSource::RecoveredFromCS,
        );
        assert!(cs.max_abs_sum <= 1e-9, "{name}: {}", cs.max_abs_sum);

        let theta = recover_angles(&sol, &c).unwrap();
        let slack = c.slack();
        for i in 0..c.buses.len() {
            assert!((theta[i] - (pf.va[i] - pf.va[slack])).abs() <= 1e-9, "{name} bus {i}");
        }
        let direct = cycle_sums(
            &basis.cycles,
            &link_angles_theta(&theta, &links),
            AngleSource::DirectTheta,
        );
        assert!(direct.max_abs_sum <= 1e-12);
    }
}

#[test]
fn zero_sine_terms_give_flat_angles() {
    let c = load("case9");
    let opf = build(&c, &build_ybus(&c).unwrap(), FormulationKind::RelaxedNoArctan, 1.0, None)
        .unwrap();
    let n = c.buses.len();
    let flat = map_exact_point(
        &opf,
        &c,
        &vec![1.0; n],
        &vec![0.0; n],
        &vec![0.0; c.generators.len()],
        &vec![0.0; c.generators.len()],
    )
    .unwrap();
    let sol = extract_solution(&opf, &c, &flat).unwrap();
    assert!(sol.sij.iter().all(|&s| s == 0.0));
    assert!(recover_angles(&sol, &c).unwrap().iter().all(|&t| t == 0.0));
}

/// Connected random graph: a random tree plus extra chords, parallel
/// chords excluded.
fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (3usize..12)
        .prop_flat_map(|n| {
            let parents: Vec<BoxedStrategy<usize>> =
                (1..n).map(|v| (0..v).boxed()).collect();
            (Just(n), parents, prop::collection::vec((0..n, 0..n), 0..12))
        })
        .prop_map(|(n, parents, chords)| {
            let mut seen = HashSet::new();
            let mut edges = Vec::new();
            for (v, p) in parents.into_iter().enumerate() {
                let v = v + 1;
                seen.insert((p.min(v), p.max(v)));
                // alternate orientation so both signs appear
                edges.push(if v % 2 == 0 { (p, v) } else { (v, p) });
            }
            for (a, b) in chords {
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    edges.push((a, b));
                }
            }
            (n, edges)
        })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fundamental_basis_invariants(
        (n, edges) in random_graph(),
        root_pick in 0usize..64,
        potentials in prop::collection::vec(-3.0f64..3.0, 12),
        raw in prop::collection::vec(-3.0f64..3.0, 64),
    ) {
        let links: Vec<Link<f64>> = edges.iter().map(|&(a, b)| bare_link(a, b)).collect();
        let root = root_pick % n;
        let basis = CycleBasis::from_links(n, root, &links).unwrap();
        prop_assert_eq!(basis.tree_edges.len(), n - 1);
        prop_assert_eq!(basis.cycles.len() + n, links.len() + 1);
        check_walks(&basis, &links);

        // each cycle owns exactly one chord, and each chord one cycle
        let tree: HashSet<usize> = basis.tree_edges.iter().copied().collect();
        let mut owners = HashSet::new();
        for c in &basis.cycles {
            let chords: Vec<usize> = c.edges.iter().map(|e| e.0).filter(|k| !tree.contains(k)).collect();
            prop_assert_eq!(chords.len(), 1);
            prop_assert!(owners.insert(chords[0]));
        }

        // potential differences close on every cycle
        let theta = &potentials[..n];
        let r = cycle_sums(&basis.cycles, &link_angles_theta(theta, &links), AngleSource::DirectTheta);
        prop_assert!(r.max_abs_sum <= 1e-12);

        // reversal negates the sum
        let angles = &raw[..links.len()];
        for c in &basis.cycles {
            prop_assert!((c.sum(angles) + c.reversed().sum(angles)).abs() <= 1e-12);
        }
    }
}
