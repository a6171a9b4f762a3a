use criterion::{criterion_group, criterion_main, Criterion};
use llhmm::cell::{homogenized_tensor, solve_cell_commensurate};
use llhmm::{upscale_all, CellCoefficient, MacroField, MicroRunSpec, WindowSpec};

fn cell(c: &mut Criterion) {
    let a = CellCoefficient::paper_2d();
    c.bench_function("cell_2d_n32", |b| {
        b.iter(|| homogenized_tensor(&a, 32).unwrap())
    });
    c.bench_function("cell_2d_commensurate", |b| {
        b.iter(|| solve_cell_commensurate(&a, 8).unwrap())
    });
}

fn upscale(c: &mut Criterion) {
    let mut g = c.benchmark_group("upscale");
    g.sample_size(10);
    let spec = MicroRunSpec::new(
        CellCoefficient::paper_1d(),
        MacroField::Helix,
        1.0 / 140.0,
        0.1,
        WindowSpec {
            mu: 0.03,
            eta: 1.5e-4,
            px: 5,
            qx: 7,
            pt: 5,
            qt: 7,
        },
    );
    g.bench_function("1d_eps_1_140", |b| b.iter(|| upscale_all(&spec).unwrap()));
    let spec2 = MicroRunSpec::new(
        CellCoefficient::paper_2d(),
        MacroField::Wave2d,
        1.0 / 20.0,
        0.1,
        WindowSpec {
            mu: 0.12,
            eta: 3e-3,
            px: 5,
            qx: 7,
            pt: 3,
            qt: 7,
        },
    );
    g.bench_function("2d_eps_1_20", |b| b.iter(|| upscale_all(&spec2).unwrap()));
    g.finish();
}

criterion_group!(benches, cell, upscale);
criterion_main!(benches);
