use std::f64::consts::PI;

use proptest::prelude::*;

use risfocus_core::eval::gain_map;
use risfocus_core::ris::unit_cell_factor;
use risfocus_core::sdr::opt_codeword;
use risfocus_core::{build_codebook, reference_scenario, AngleDirection, ArrayGeometry, CodebookFile, Method, Scenario, Wave};

#[test]
fn files_round_trip_through_evaluation() {
    let s = reference_scenario(5, (4, 4), 15f64.to_radians()).unwrap();
    let loaded = Scenario::from_json(&s.to_json(None).unwrap()).unwrap();
    assert_eq!(loaded.to_json(None).unwrap(), s.to_json(None).unwrap());

    let books: Vec<_> = Method::ALL.iter().map(|&m| build_codebook(&s, 3, m, 1e-6).unwrap()).collect();
    let text = CodebookFile::new(&books, None).unwrap().to_json().unwrap();
    let back = CodebookFile::from_json(&text).unwrap().into_codebooks(&loaded).unwrap();
    for (a, b) in books.iter().zip(&back) {
        assert_eq!(a.targets(), vec![1, 2, 4]);
        for t in a.targets() {
            let ga = gain_map(&s, a.codeword(t).unwrap(), 3, t, a.method).unwrap();
            let gb = gain_map(&loaded, b.codeword(t).unwrap(), 3, t, b.method).unwrap();
            assert!((ga.entries - gb.entries).abs().max() < 1e-9);
        }
    }
}

#[test]
fn opt_worst_case_is_competitive() {
    for seed in 1..=5 {
        let s = reference_scenario(seed, (5, 5), 20f64.to_radians()).unwrap();
        let lin = build_codebook(&s, 2, Method::Linear, 1e-6).unwrap();
        let opt = build_codebook(&s, 2, Method::Opt, 1e-6).unwrap();
        for t in lin.targets() {
            let gl = gain_map(&s, lin.codeword(t).unwrap(), 2, t, Method::Linear).unwrap().min();
            let go = gain_map(&s, opt.codeword(t).unwrap(), 2, t, Method::Opt).unwrap().min();
            // rank-one restoration may lose a little against the relaxed optimum
            assert!(go >= 0.8 * gl, "seed {seed} target {t}: opt {go} linear {gl}");
        }
    }
}

fn direction() -> impl Strategy<Value = AngleDirection> {
    (0.0..PI, 0.0..2.0 * PI).prop_map(|(t, p)| AngleDirection::new(t, p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restored_never_exceeds_relaxed(
        nx in 1usize..5,
        nz in 1usize..5,
        inc in prop::collection::vec(direction(), 1..4),
        refl in prop::collection::vec(direction(), 1..4),
    ) {
        let w = Wave::new(0.01).unwrap();
        let g = ArrayGeometry::in_wavelengths(nx, nz, &w, 0.25, 0.25).unwrap();
        let gbar = unit_cell_factor(&g, &w);
        let sol = opt_codeword(&g, &w, &inc, &refl, gbar, 1e-6).unwrap();
        prop_assert!(sol.gamma_restored <= sol.gamma_relaxed * (1.0 + 1e-6));
        prop_assert!(sol.gamma_restored > 0.0);
        prop_assert!(sol.codeword.coefficients().iter().all(|c| (c.norm() - 1.0).abs() < 1e-9));
    }
}
