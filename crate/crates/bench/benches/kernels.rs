use criterion::{black_box, criterion_group, criterion_main, Criterion};
use symbreak_core::dimer::{build_dimer_model, DimerParams};
use symbreak_core::ssh::{limit_cycle_solve, quantum_steady_state, LimitCycleOptions, SSHParams, SshSteadyOptions};
use symbreak_core::{steady_state, SteadyStateOptions, C64};

fn liouvillian(c: &mut Criterion) {
    let p = DimerParams::new(1.0, 4.0, 1.5, 7.0).unwrap();
    let model = build_dimer_model(&p, [16, 16]).unwrap();
    c.bench_function("dimer liouvillian 16x16", |b| b.iter(|| black_box(model.liouvillian().unwrap())));
}

fn steady(c: &mut Criterion) {
    let mut g = c.benchmark_group("steady state");
    g.sample_size(10);
    let p = DimerParams::new(1.0, 4.0, 1.5, 7.0).unwrap();
    for dims in [8, 20] {
        let l = build_dimer_model(&p, [dims, dims]).unwrap().liouvillian().unwrap();
        g.bench_function(format!("dimer {dims}x{dims}"), |b| {
            b.iter(|| black_box(steady_state(&l, &SteadyStateOptions::default()).unwrap()))
        });
    }
    let ssh = SSHParams::from_xi(3, 1.0, 0.1, 1.0, 1.0, 0.01).unwrap();
    g.bench_function("ssh N=3 dims 4", |b| {
        b.iter(|| black_box(quantum_steady_state(&ssh, 4, &SshSteadyOptions::default()).unwrap()))
    });
    g.finish();
}

fn semiclassics(c: &mut Criterion) {
    let p = SSHParams::new(21, 1.0, -0.65, 0.001, 1.0, 0.2).unwrap();
    let v: Vec<C64> = (0..21).map(|i| C64::from_polar(1.0 / (1.0 + i as f64), 0.3 * i as f64)).collect();
    c.bench_function("ssh rhs N=21", |b| b.iter(|| black_box(symbreak_core::ssh::semiclassical_rhs(&v, &p))));

    let mut g = c.benchmark_group("limit cycle");
    g.sample_size(10);
    g.bench_function("ssh N=21", |b| {
        b.iter(|| black_box(limit_cycle_solve(&p, None, &LimitCycleOptions::default()).unwrap()))
    });
    g.finish();
}

criterion_group!(benches, liouvillian, steady, semiclassics);
criterion_main!(benches);
