use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use risfocus_core::codebook::scenario_linear_codebook;
use risfocus_core::eval::gain_map;
use risfocus_core::ris::{linear_response, response, unit_cell_factor};
use risfocus_core::sdr::opt_codeword;
use risfocus_core::{reference_scenario, AngleDirection, ArrayGeometry, Method, PhaseVector, RayPair, Wave};
use std::hint::black_box;

fn response_functions(c: &mut Criterion) {
    let w = Wave::new(0.01).unwrap();
    let g = ArrayGeometry::in_wavelengths(10, 10, &w, 0.25, 0.25).unwrap();
    let gbar = unit_cell_factor(&g, &w);
    let design = RayPair::new(AngleDirection::horizontal(0.4), AngleDirection::horizontal(2.1));
    let ray = RayPair::new(AngleDirection::horizontal(0.5), AngleDirection::horizontal(2.0));
    let p = PhaseVector::uniform(g);

    c.bench_function("response 10x10", |b| {
        b.iter(|| response(black_box(&p), &g, &w, black_box(&ray), gbar).unwrap())
    });
    c.bench_function("linear_response 10x10", |b| {
        b.iter(|| linear_response(&g, &w, black_box(&ray), black_box(&design), gbar))
    });
}

fn sdr_codewords(c: &mut Criterion) {
    let mut group = c.benchmark_group("opt_codeword");
    group.sample_size(10);
    for n in [4usize, 7, 10] {
        let s = reference_scenario(1, (n, n), 20f64.to_radians()).unwrap();
        let g = s.ris[0].geometry;
        let gbar = unit_cell_factor(&g, &s.wave);
        let inc = s.incident_rays(1).unwrap();
        let refl = s.departure_rays(1, 3).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{n}")), &n, |b, _| {
            b.iter(|| opt_codeword(&g, &s.wave, &inc, &refl, gbar, 1e-6).unwrap())
        });
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let s = reference_scenario(1, (10, 10), 10f64.to_radians()).unwrap();
    let book = scenario_linear_codebook(&s, 1).unwrap();
    let cw = book.codeword(3).unwrap().clone();
    c.bench_function("gain_map 10x10 L=3", |b| {
        b.iter(|| gain_map(&s, black_box(&cw), 1, 3, Method::Linear).unwrap())
    });
}

criterion_group!(benches, response_functions, sdr_codewords, evaluation);
criterion_main!(benches);
