use spindrive::dynamics::{PropagatorConfig, TimeGrid};
use spindrive::models::{ChainModel, CouplingProfile, DriveSpec};
use spindrive::noise::{evolve_noisy, sample_ou, NoiseSpec, StreamId};
use spindrive::observables::{fidelity_series, TransferTask};
use spindrive::operators::Axis;

fn stream(trial: usize) -> StreamId {
    StreamId {
        trial,
        site: 3,
        axis: Axis::Y,
    }
}

#[test]
fn long_trajectory_is_stationary() {
    let spec = NoiseSpec {
        master_seed: 99,
        ..Default::default()
    };
    let n = 150_000;
    let delta = spec.tau / 5.0;
    let grid = TimeGrid::uniform(delta * (n - 1) as f64, n).unwrap();
    let v = sample_ou(&spec, &grid, stream(0)).values;
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    assert!((var - 0.25).abs() < 0.05 * 0.25, "variance {var}");
    // correlated samples: the standard error of the mean grows by √((1+ρ)/(1−ρ))
    let rho = (-delta / spec.tau).exp();
    let se = 0.5 / (n as f64).sqrt() * ((1.0 + rho) / (1.0 - rho)).sqrt();
    assert!(mean.abs() < 3.0 * se, "mean {mean}");
}

#[test]
fn autocorrelation_follows_the_closed_form_at_several_lags() {
    let spec = NoiseSpec {
        master_seed: 5,
        ..Default::default()
    };
    let n = 200_000;
    let delta = spec.tau / 5.0;
    let grid = TimeGrid::uniform(delta * (n - 1) as f64, n).unwrap();
    let v = sample_ou(&spec, &grid, stream(1)).values;
    let mean = v.iter().sum::<f64>() / n as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    for lag in [1usize, 2, 5] {
        let c = (0..n - lag).map(|k| (v[k] - mean) * (v[k + lag] - mean)).sum::<f64>() / (n - lag) as f64 / var;
        let want = (-(lag as f64) * delta / spec.tau).exp();
        assert!((c - want).abs() < 0.05 * want, "lag {lag}: {c} vs {want}");
    }
}

#[test]
fn nonuniform_grids_use_the_local_step() {
    let spec = NoiseSpec {
        sigma: 1.0,
        tau: 1.0,
        master_seed: 3,
        ..Default::default()
    };
    // a step much longer than τ decorrelates completely
    let grid = TimeGrid::new(vec![0.0, 1e-9, 1e3]).unwrap();
    let v = sample_ou(&spec, &grid, stream(0)).values;
    assert!((v[0] - v[1]).abs() < 1e-3);
}

#[test]
fn ensemble_does_not_depend_on_trial_count_for_shared_trials() {
    let m = ChainModel::ising(3, &CouplingProfile::Uniform(1.0)).unwrap();
    let d = DriveSpec::calibrated(Axis::Z, 0.0, 100.0).unwrap();
    let psi = TransferTask::end_to_end(3, Axis::Z).unwrap().initial;
    let grid = TimeGrid::uniform(0.3, 4).unwrap();
    let cfg = PropagatorConfig::default();
    let spec = |trials| NoiseSpec {
        trials,
        master_seed: 17,
        ..Default::default()
    };
    let three = evolve_noisy(&m, Some(&d), &spec(3), &psi, &grid, &cfg).unwrap();
    let five = evolve_noisy(&m, Some(&d), &spec(5), &psi, &grid, &cfg).unwrap();
    for k in 0..grid.len() {
        assert_eq!(three.states_at(k)[..], five.states_at(k)[..3]);
    }
}

#[test]
fn driven_transfer_survives_noise() {
    let n = 5;
    let ising = ChainModel::ising(n, &CouplingProfile::Pst).unwrap();
    let d = DriveSpec::calibrated(Axis::Z, 0.0, 100.0 * ising.max_coupling()).unwrap();
    let task = TransferTask::end_to_end(n, Axis::Z).unwrap();
    let grid = spindrive::dynamics::stroboscopic_times(d.omega, 1.7)
        .unwrap()
        .decimated(8);
    let spec = NoiseSpec {
        master_seed: 1,
        trials: 8,
        ..Default::default()
    };
    let cfg = PropagatorConfig::default();
    let clean = spindrive::dynamics::evolve_driven(&ising, &d, &task.initial, &grid, &cfg).unwrap();
    let noisy = evolve_noisy(&ising, Some(&d), &spec, &task.initial, &grid, &cfg).unwrap();
    let fc = fidelity_series(&clean, &task.target).unwrap();
    let fn_ = fidelity_series(&noisy, &task.target).unwrap();
    for k in 0..grid.len() {
        assert!((fc[k] - fn_[k]).abs() <= 0.1, "t = {}", grid.samples()[k]);
        let rho = noisy.density_matrix(k);
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!(rho.min_eigenvalue() > -1e-9);
    }
}
