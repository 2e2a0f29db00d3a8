//! Cross-checks between independent computations of the same quantity.

mod common;

use clbath::bath::{generate, read_explicit_csv, SpectralModel};
use clbath::diagnostics::{abs_norm_check, arboricity_bound, frobenius_norm_sq, spectral_norm, stable_rank};
use clbath::dynamics::{
    equations_of_motion, evolve_normal_modes, evolve_verlet, initial_state, system_energy, total_energy, NormalModes,
};
use clbath::exec::ExecPolicy;
use clbath::hamsim::{propagate, SpectralData};
use clbath::linalg::{max_abs_diff_c, principal_sqrt};
use clbath::model::{build_spring_matrix, SystemSpec};
use clbath::qstate::{decode, encode, raw_blocks, tomography_sample};
use clbath::qwalk::{abs_principal_eigenvector, WalkSimulator, DEFAULT_RESOURCE_CAP};
use clbath::C64;
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn spring_matrix_matches_pair_sum_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kappa = random_kappa(&mut rng, 3);
    let sys = SystemSpec::new(vec![1.0; 3], kappa.clone(), 0).unwrap();
    let k = build_spring_matrix(&sys).unwrap();
    for _ in 0..10 {
        let x = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let mut direct = 0.0;
        for i in 0..3 {
            direct += 0.5 * kappa[(i, i)] * x[i] * x[i];
            for j in (i + 1)..3 {
                direct += 0.5 * kappa[(i, j)] * (x[i] - x[j]).powi(2);
            }
        }
        let form = 0.5 * x.dot(&(&k * &x));
        assert!((direct - form).abs() < 1e-12, "{direct} vs {form}");
    }
}

#[test]
fn principal_sqrt_of_spring_matrix() {
    let k = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
    let r = principal_sqrt(&k).unwrap();
    assert!((&r * &r - &k).amax() < 1e-12);
}

#[test]
fn hamiltonian_spectrum_is_normal_mode_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let nus: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
    let model = unit_model(&nus, &[0.5; 4]);
    let mut eig: Vec<f64> = SpectralData::for_model(&model).unwrap().values.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let w = normal_mode_frequencies(&model);
    let mut want: Vec<f64> = w.iter().map(|v| -v).chain(w.iter().copied()).collect();
    want.sort_by(f64::total_cmp);
    for (a, b) in eig.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{eig:?} vs {want:?}");
    }
    for _ in 0..5 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(1..=5);
        let m = random_model(&mut rng, d, n);
        let top = normal_mode_frequencies(&m).last().copied().unwrap();
        assert!((spectral_norm(&m) - top).abs() < 1e-10 * top);
    }
}

#[test]
fn spectral_norm_approaches_band_edge_as_coupling_vanishes() {
    let mut gaps = Vec::new();
    for c in [1.0, 0.1, 0.01] {
        let bath = generate(&SpectralModel::UniformFlat { nu_max: 2.0, coupling_scale: c }, 64).unwrap();
        let model = unit_model(bath.frequencies(), bath.couplings());
        let edge = 2.0_f64.max(model.stiffness_block().norm());
        gaps.push(((spectral_norm(&model) - edge) / edge).abs());
    }
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[2] < 1e-3, "{gaps:?}");
}

#[test]
fn normal_modes_match_verlet() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = random_model(&mut rng, 1, 2);
    let s0 = random_state(&mut rng, &model);
    let exact = evolve_normal_modes(&model, &s0, 1.0).unwrap();
    let stepped = evolve_verlet(&model, &s0, 1.0, 1e-4).unwrap();
    assert!(exact.max_abs_diff(&stepped) < 1e-6, "{}", exact.max_abs_diff(&stepped));
}

#[test]
fn verlet_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = random_model(&mut rng, 2, 3);
    let s0 = random_state(&mut rng, &model);
    let exact = evolve_normal_modes(&model, &s0, 2.0).unwrap();
    let e1 = exact.max_abs_diff(&evolve_verlet(&model, &s0, 2.0, 0.02).unwrap());
    let e2 = exact.max_abs_diff(&evolve_verlet(&model, &s0, 2.0, 0.01).unwrap());
    let ratio = e1 / e2;
    assert!((3.6..4.4).contains(&ratio), "{ratio}");
}

#[test]
fn verlet_energy_over_a_hundred_steps() {
    let model = unit_model(&[1.0], &[0.1]);
    let s0 = initial_state(&model, &[1.0], &[0.0]).unwrap();
    let e0 = total_energy(&model, &s0);
    let s = evolve_verlet(&model, &s0, 0.1, 1e-3).unwrap();
    assert!((total_energy(&model, &s) - e0).abs() < 1e-8);
}

#[test]
fn verlet_closes_the_decoupled_orbit() {
    let model = unit_model(&[1.0], &[0.0]);
    let s0 = initial_state(&model, &[1.0], &[0.0]).unwrap();
    let s = evolve_verlet(&model, &s0, 2.0 * std::f64::consts::PI, 1e-3).unwrap();
    assert!((s.x[0] - 1.0).abs() < 1e-5 && s.p[0].abs() < 1e-5);
}

#[test]
fn normal_mode_evolution_conserves_composes_and_reverses() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(1..=6);
        let model = random_model(&mut rng, d, n);
        let modes = NormalModes::new(&model).unwrap();
        let s0 = random_state(&mut rng, &model);
        let e0 = total_energy(&model, &s0);
        for t in [0.5, 10.0, 1000.0] {
            assert!((total_energy(&model, &modes.evolve(&s0, t)) - e0).abs() <= 1e-10 * e0);
        }
        let two_steps = modes.evolve(&modes.evolve(&s0, 0.7), 1.9);
        assert!(two_steps.max_abs_diff(&modes.evolve(&s0, 2.6)) < 1e-10);
        let back = modes.evolve(&modes.evolve(&s0, 3.0).reversed(), 3.0).reversed();
        assert!(back.x.iter().zip(&s0.x).all(|(a, b)| (a - b).abs() < 1e-9));
        assert!(back.k.iter().zip(&s0.k).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}

#[test]
fn finite_difference_matches_equations_of_motion() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let model = random_model(&mut rng, 3, 4);
    let modes = NormalModes::new(&model).unwrap();
    let s0 = random_state(&mut rng, &model);
    let h = 1e-6;
    let (fwd, bwd) = (modes.evolve(&s0, h), modes.evolve(&s0, -h));
    let rhs = equations_of_motion(&model, &s0);
    let fd = |a: &DVector<f64>, b: &DVector<f64>| (a - b) / (2.0 * h);
    assert!((fd(&fwd.x, &bwd.x) - &rhs.x).amax() < 1e-6);
    assert!((fd(&fwd.p, &bwd.p) - &rhs.p).amax() < 1e-6);
    assert!((fd(&fwd.y, &bwd.y) - &rhs.y).amax() < 1e-6);
    assert!((fd(&fwd.k, &bwd.k) - &rhs.k).amax() < 1e-6);
}

#[test]
fn energy_is_half_the_squared_block_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let model = random_model(&mut rng, 3, 5);
    let s = random_state(&mut rng, &model);
    let raw = raw_blocks(&model, &s).unwrap();
    assert!((raw.norm_squared() - 2.0 * total_energy(&model, &s)).abs() < 1e-12);
    assert_eq!(system_energy(&model, &DVector::zeros(3), &DVector::zeros(3)), 0.0);
}

#[test]
fn spectral_data_is_a_faithful_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let model = random_model(&mut rng, 3, 6);
    let h = model.assemble_hamiltonian().unwrap();
    let sd = SpectralData::for_model(&model).unwrap();
    let dim = sd.dim();
    assert!(max_abs_diff_c(&sd.reconstruct(), &h) <= 1e-10 * sd.norm());
    assert!(max_abs_diff_c(&(&sd.vectors * sd.vectors.adjoint()), &DMatrix::identity(dim, dim)) < 1e-10);
    let mut vals: Vec<f64> = sd.values.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    for k in 0..dim / 2 {
        assert!((vals[k] + vals[dim - 1 - k]).abs() < 1e-10);
    }
    let psi = encode(&model, &random_state(&mut rng, &model)).unwrap();
    let a = propagate(&sd, &propagate(&sd, &psi, 0.4), 1.1);
    let b = propagate(&sd, &psi, 1.5);
    assert!(a.max_abs_diff(&b) < 1e-10);
    assert!((b.norm() - 1.0).abs() < 1e-12);
    assert!(propagate(&sd, &psi, 0.0).max_abs_diff(&psi) < 1e-14);
}

#[test]
fn decoupled_quarter_period_decodes_to_minus_p() {
    let model = unit_model(&[1.0], &[0.0]);
    let s0 = initial_state(&model, &[1.0], &[0.0]).unwrap();
    let sd = SpectralData::for_model(&model).unwrap();
    let out = decode(&model, &propagate(&sd, &encode(&model, &s0).unwrap(), std::f64::consts::FRAC_PI_2)).unwrap();
    assert!(out.x[0].abs() < 1e-12 && (out.p[0] + 1.0).abs() < 1e-12);
}

#[test]
fn tomography_converges_to_direct_readout() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let model = random_model(&mut rng, 2, 3);
    let psi = encode(&model, &random_state(&mut rng, &model)).unwrap();
    let truth: Vec<f64> = (0..4).map(|i| psi.amplitudes[i].re).collect();
    let err = |shots| {
        let est = tomography_sample(&psi, shots, 99).unwrap();
        est.aligned_with(&truth).iter().zip(&truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    assert!(err(1_000_000) < 0.01);
    assert!(err(1_000_000) < err(100));
}

#[test]
fn perron_value_is_tree_norm_for_single_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..5 {
        let n = rng.random_range(1..=6);
        let model = random_model(&mut rng, 1, n);
        let h = model.assemble_hamiltonian().unwrap();
        let (hnorm, v) = abs_principal_eigenvector(&h).unwrap();
        assert!(v.iter().all(|&x| x > 0.0));
        let exact = SpectralData::for_model(&model).unwrap().norm();
        assert!((hnorm - exact).abs() < 1e-9, "{hnorm} vs {exact}");
    }
}

#[test]
fn perron_value_respects_arboricity_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for d in [2, 3] {
        let model = random_model(&mut rng, d, 4);
        let h = model.assemble_hamiltonian().unwrap();
        let (hnorm, _) = abs_principal_eigenvector(&h).unwrap();
        let exact = SpectralData::for_model(&model).unwrap().norm();
        let cert = arboricity_bound(&model).unwrap();
        assert!(cert.forests <= d, "{} forests for d = {d}", cert.forests);
        assert!(hnorm >= exact * (1.0 - 1e-12) && hnorm <= 2.0 * cert.forests as f64 * exact);
        let check = abs_norm_check(&model).unwrap();
        assert!((check.abs_norm - hnorm).abs() < 1e-9 * hnorm);
    }
}

#[test]
fn single_mass_graph_is_a_tree() {
    let model = unit_model(&[0.3, 0.6, 0.9], &[0.1, 0.2, 0.3]);
    let cert = arboricity_bound(&model).unwrap();
    assert_eq!(cert.forests, 1);
    assert_eq!(cert.edges, cert.vertices - 1);
}

#[test]
fn frobenius_closed_form_matches_entrywise() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..10 {
        let d = rng.random_range(1..=4);
        let n = rng.random_range(1..=8);
        let model = random_model(&mut rng, d, n);
        let f = frobenius_norm_sq(&model);
        assert!((f.closed_form - f.entrywise.unwrap()).abs() < 1e-10 * f.closed_form);
        assert!((f.system_closed_form - f.system_entrywise).abs() < 1e-12 * f.system_closed_form);
    }
}

#[test]
fn stable_rank_grows_with_bath_size() {
    let ranks: Vec<f64> = [8, 32, 128, 512]
        .iter()
        .map(|&n| {
            let bath = generate(&SpectralModel::UniformFlat { nu_max: 2.0, coupling_scale: 0.5 }, n).unwrap();
            stable_rank(&unit_model(bath.frequencies(), bath.couplings()))
        })
        .collect();
    assert!(ranks.windows(2).all(|w| w[1] > w[0]), "{ranks:?}");
}

#[test]
fn explicit_bath_from_csv() {
    let bath = read_explicit_csv("nu,g\n1.0,0.1\n0.5,-0.2\n".as_bytes()).unwrap();
    assert_eq!(bath.frequencies(), &[1.0, 0.5]);
    assert_eq!(bath.couplings(), &[0.1, -0.2]);
    assert!(read_explicit_csv("nu,g\n0.0,0.1\n".as_bytes()).is_err());
}

#[test]
fn walk_step_is_unitary_when_phases_sit_on_bins() {
    // Ĥ = [[0, i], [−i, 0]] has normalized eigenvalues ±1, walk phases ±π/2.
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    let h = DMatrix::from_row_slice(2, 2, &[z, i, -i, z]);
    let space = clbath::qwalk::WalkSpace::new(&h.transpose()).unwrap();
    let sim = WalkSimulator::from_space(space, 4, DEFAULT_RESOURCE_CAP, ExecPolicy::Sequential).unwrap();
    let u = sim.segment_matrix(0.8);
    assert!(max_abs_diff_c(&(u.adjoint() * &u), &DMatrix::identity(2, 2)) < 1e-10);
    let sd = clbath::hamsim::spectral_decompose(&h).unwrap();
    assert!(max_abs_diff_c(&u, &sd.propagator(0.8)) < 1e-10);
}

#[test]
fn walk_step_contracts_and_sharpens_with_phase_bits() {
    let model = unit_model(&[0.5, 1.0, 1.5], &[0.2, 0.3, 0.25]);
    let mut defects = Vec::new();
    for bits in [4, 6, 8] {
        let sim = WalkSimulator::new(&model, bits, DEFAULT_RESOURCE_CAP, ExecPolicy::Parallel).unwrap();
        let u = sim.segment_matrix(0.5);
        let dim = u.nrows();
        let gram = u.adjoint() * &u;
        let top = gram.clone().symmetric_eigenvalues().max();
        assert!(top <= 1.0 + 1e-10, "{top}");
        defects.push(max_abs_diff_c(&gram, &DMatrix::identity(dim, dim)));
    }
    assert!(defects[0] > defects[1] && defects[1] > defects[2], "{defects:?}");
}
