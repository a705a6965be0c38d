use nalgebra::DVector;
use spindrive::dynamics::{
    evolve_constant, evolve_driven, evolve_driven_terms, stroboscopic_times, PropagatorConfig, TimeGrid,
};
use spindrive::models::{
    build_static_hamiltonian, driven_hamiltonian, effective_hamiltonian, static_terms, ChainModel, CouplingProfile,
    DriveSpec,
};
use spindrive::observables::{single_excitation_block, transfer_oracle, TransferTask};
use spindrive::operators::{basis_product_state, Axis, PureState, C64};

/// Classical RK4 on the full time-dependent Schrödinger equation.
fn rk4(m: &ChainModel, d: &DriveSpec, psi0: &PureState, t_end: f64, dt: f64) -> DVector<C64> {
    let rhs = |t: f64, psi: &DVector<C64>| -> DVector<C64> {
        driven_hamiltonian(m, d, t).unwrap().matrix() * psi * C64::new(0.0, -1.0)
    };
    let steps = (t_end / dt).round() as usize;
    let h = t_end / steps as f64;
    let mut psi = psi0.amplitudes().clone();
    for k in 0..steps {
        let t = k as f64 * h;
        let k1 = rhs(t, &psi);
        let k2 = rhs(t + 0.5 * h, &(&psi + &k1 * C64::new(0.5 * h, 0.0)));
        let k3 = rhs(t + 0.5 * h, &(&psi + &k2 * C64::new(0.5 * h, 0.0)));
        let k4 = rhs(t + h, &(&psi + &k3 * C64::new(h, 0.0)));
        psi += (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
    }
    psi
}

#[test]
fn midpoint_propagator_agrees_with_fine_rk4() {
    let cases = [
        (ChainModel::ising(2, &CouplingProfile::Uniform(1.0)).unwrap(), Axis::Z),
        (
            ChainModel::xy(3, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(0.7)).unwrap(),
            Axis::Y,
        ),
        (
            ChainModel::xy_gamma(3, &CouplingProfile::Explicit(vec![1.0, 0.5]), 0.3).unwrap(),
            Axis::Y,
        ),
    ];
    for (m, axis) in cases {
        let d = DriveSpec::calibrated(axis, 0.0, 20.0).unwrap();
        let cfg = PropagatorConfig {
            check_convergence: false,
            ..Default::default()
        };
        let task = TransferTask::end_to_end(m.n_sites, Axis::Z).unwrap();
        let t_end = 3.0 * d.period();
        let r = evolve_driven(&m, &d, &task.initial, &TimeGrid::new(vec![t_end]).unwrap(), &cfg).unwrap();
        let fine = rk4(&m, &d, &task.initial, t_end, cfg.substep(Some(&d)) / 10.0);
        let got = r.pure_states().unwrap()[0].amplitudes();
        let infidelity = 1.0 - got.dotc(&fine).norm_sqr();
        assert!(infidelity < 1e-6, "{:?}: {infidelity:e}", m.family);
    }
}

#[test]
fn stroboscopic_error_shrinks_with_frequency() {
    let m = ChainModel::ising(3, &CouplingProfile::Uniform(1.0)).unwrap();
    let task = TransferTask::end_to_end(3, Axis::Z).unwrap();
    let cfg = PropagatorConfig {
        check_convergence: false,
        ..Default::default()
    };
    let worst: Vec<f64> = [25.0, 50.0, 100.0]
        .iter()
        .map(|&w| {
            let d = DriveSpec::calibrated(Axis::Z, 0.0, w).unwrap();
            let grid = stroboscopic_times(w, 5.0).unwrap();
            let a = evolve_driven(&m, &d, &task.initial, &grid, &cfg).unwrap();
            let b = evolve_constant(&effective_hamiltonian(&m, &d).unwrap(), &task.initial, &grid).unwrap();
            a.pure_states()
                .unwrap()
                .iter()
                .zip(b.pure_states().unwrap())
                .map(|(x, y)| 1.0 - x.overlap(y))
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(worst[0] > worst[1] && worst[1] > worst[2], "{worst:?}");
}

#[test]
fn pst_driven_ising_five_sites() {
    let m = ChainModel::ising(5, &CouplingProfile::Pst).unwrap();
    let d = DriveSpec::calibrated(Axis::Z, 0.0, 100.0 * m.max_coupling()).unwrap();
    let task = TransferTask::end_to_end(5, Axis::Z).unwrap();
    let grid = stroboscopic_times(d.omega, 3.0).unwrap();
    let driven = evolve_driven(&m, &d, &task.initial, &grid, &PropagatorConfig::default()).unwrap();
    let eff = evolve_constant(&effective_hamiltonian(&m, &d).unwrap(), &task.initial, &grid).unwrap();
    for (a, b) in driven.pure_states().unwrap().iter().zip(eff.pure_states().unwrap()) {
        assert!(a.overlap(b) >= 0.99);
    }
}

#[test]
fn two_site_transfer_time_comes_from_the_block() {
    let m = ChainModel::xy(2, &CouplingProfile::Uniform(0.5), &CouplingProfile::Uniform(0.5)).unwrap();
    let h = build_static_hamiltonian(&m).unwrap();
    let oracle = transfer_oracle(&single_excitation_block(&h, 2).unwrap()).unwrap();
    let psi = basis_product_state(2, &[0, 1], Axis::Z).unwrap();
    let target = basis_product_state(2, &[1, 0], Axis::Z).unwrap();
    let r = evolve_constant(&h, &psi, &TimeGrid::new(vec![oracle.transfer_time]).unwrap()).unwrap();
    assert!((oracle.transfer_time - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!((r.pure_states().unwrap()[0].overlap(&target) - 1.0).abs() < 1e-12);
}

#[test]
fn off_lattice_samples_use_partial_steps() {
    // H(t) = g cos(ωt) X on one site: exact rotation angle g sin(ωt)/ω, up to
    // the O(Δ²) midpoint error
    let d = DriveSpec::new(Axis::X, 3.0, 7.0).unwrap();
    let psi = basis_product_state(1, &[0], Axis::Z).unwrap();
    let times = vec![0.013, 0.5, 0.777, 1.9];
    let r = evolve_driven_terms(
        &spindrive::operators::PauliSum::new(1),
        Some(&d),
        &psi,
        &TimeGrid::new(times.clone()).unwrap(),
        &PropagatorConfig {
            steps_per_period: 1024,
            ..Default::default()
        },
    )
    .unwrap();
    for (s, t) in r.pure_states().unwrap().iter().zip(times) {
        let theta = d.g * (d.omega * t).sin() / d.omega;
        let p0 = theta.cos().powi(2);
        assert!((s.amplitudes()[0].norm_sqr() - p0).abs() < 1e-5, "t={t}");
    }
}

#[test]
fn undriven_lattice_matches_spectral_evolution() {
    let m = ChainModel::ising_nnn(4, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(0.8)).unwrap();
    let psi = basis_product_state(4, &[0, 1, 1, 0], Axis::X).unwrap();
    let grid = TimeGrid::new(vec![0.0, 0.25, 1.0, 1.0005]).unwrap();
    let a = evolve_driven_terms(
        &static_terms(&m).unwrap(),
        None,
        &psi,
        &grid,
        &PropagatorConfig::default(),
    )
    .unwrap();
    let b = evolve_constant(&build_static_hamiltonian(&m).unwrap(), &psi, &grid).unwrap();
    for (x, y) in a.pure_states().unwrap().iter().zip(b.pure_states().unwrap()) {
        assert!(1.0 - x.overlap(y) < 1e-12);
    }
}
