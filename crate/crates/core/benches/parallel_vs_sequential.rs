//! Sequential vs rayon execution of the data-parallel kernels.
//!
//! Run with: cargo bench -p clbath

use std::hint::black_box;

use clbath::bath::{generate, SpectralModel};
use clbath::dynamics::{initial_state, NormalModes};
use clbath::exec::ExecPolicy;
use clbath::model::{BathSpec, CompositeModel, SystemSpec};
use clbath::qstate::{encode, tomography_sample};
use clbath::qwalk::{SparseAbs, WalkSimulator, DEFAULT_RESOURCE_CAP};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;

const POLICIES: [(&str, ExecPolicy); 2] = [("sequential", ExecPolicy::Sequential), ("parallel", ExecPolicy::Parallel)];

fn single_mass(bath: BathSpec) -> CompositeModel {
    let sys = SystemSpec::new(vec![1.0], DMatrix::from_element(1, 1, 1.0), 0).unwrap();
    CompositeModel::new(sys, bath).unwrap()
}

fn walk_segment(c: &mut Criterion) {
    let model = single_mass(BathSpec::new(vec![0.5, 1.0, 1.5], vec![0.2, 0.3, 0.25]).unwrap());
    let psi = encode(&model, &initial_state(&model, &[1.0], &[0.0]).unwrap()).unwrap();
    let mut group = c.benchmark_group("walk_segment");
    group.sample_size(10);
    for bits in [6u32, 8] {
        for (name, policy) in POLICIES {
            let sim = WalkSimulator::new(&model, bits, DEFAULT_RESOURCE_CAP, policy).unwrap();
            group.bench_with_input(BenchmarkId::new(name, bits), &bits, |b, _| {
                b.iter(|| black_box(sim.segment(&psi.amplitudes, 0.5)))
            });
        }
    }
    group.finish();
}

fn tomography_batch(c: &mut Criterion) {
    let model = single_mass(BathSpec::new(vec![0.5, 1.0, 1.5], vec![0.2, 0.3, 0.25]).unwrap());
    let psi = encode(&model, &initial_state(&model, &[1.0], &[0.4]).unwrap()).unwrap();
    let mut group = c.benchmark_group("tomography_100_seeds");
    for (name, policy) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| black_box(policy.map_range(100, |s| tomography_sample(&psi, 16_000, s as u64).unwrap())))
        });
    }
    group.finish();
}

fn trajectory(c: &mut Criterion) {
    let bath = generate(&SpectralModel::UniformFlat { nu_max: 2.0, coupling_scale: 0.1 }, 1024).unwrap();
    let model = single_mass(bath);
    let modes = NormalModes::new(&model).unwrap();
    let s0 = initial_state(&model, &[1.0], &[0.0]).unwrap();
    let times: Vec<f64> = (0..4000).map(|k| k as f64 * 0.05).collect();
    let mut group = c.benchmark_group("normal_mode_trajectory");
    group.sample_size(10);
    for (name, policy) in POLICIES {
        group.bench_function(name, |b| b.iter(|| black_box(modes.primary_trajectory(&s0, &times, policy))));
    }
    group.finish();
}

fn abs_matvec(c: &mut Criterion) {
    let bath = generate(&SpectralModel::UniformFlat { nu_max: 2.0, coupling_scale: 0.5 }, 1 << 16).unwrap();
    let graph = SparseAbs::from_model(&single_mass(bath));
    let x = vec![1.0; graph.dim()];
    let mut out = vec![0.0; graph.dim()];
    let mut group = c.benchmark_group("abs_hamiltonian_matvec");
    for (name, policy) in POLICIES {
        group.bench_function(name, |b| {
            b.iter(|| {
                graph.mul(&x, &mut out, policy);
                black_box(out[0])
            })
        });
    }
    group.finish();
}

criterion_group!(benches, walk_segment, tomography_batch, trajectory, abs_matvec);
criterion_main!(benches);
