//! Ornstein–Uhlenbeck local field noise and noisy ensemble propagation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::{run_lattice, EvolutionMeta, EvolutionResult, PropagatorConfig, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::models::{control_frame_unitary, static_terms, ChainModel, DriveSpec};
use crate::operators::{build_pauli_operator, Axis, DenseOperator, PauliString, PauliSum, PureState};
use crate::propagator::lattice_len;

/// Quadrature nodes per period used by [`decoupling_residual`].
pub const DECOUPLING_NODES: usize = 2048;

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub mu: f64,
    /// Stationary standard deviation.
    pub sigma: f64,
    /// Correlation time.
    pub tau: f64,
    /// Field components applied on every site.
    pub axes: Vec<Axis>,
    pub trials: usize,
    pub master_seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            mu: 0.0,
            sigma: 0.5,
            tau: 0.005,
            axes: vec![Axis::X, Axis::Y],
            trials: 20,
            master_seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Model(format!("noise sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::Model(format!("noise tau must be > 0, got {}", self.tau)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Model("noise mu must be finite".into()));
        }
        if self.trials == 0 {
            return Err(Error::Model("noise trials must be >= 1".into()));
        }
        if self.axes.is_empty() {
            return Err(Error::Model("noise needs at least one axis".into()));
        }
        let mut seen = self.axes.clone();
        seen.sort_by_key(|a| a.name());
        seen.dedup();
        if seen.len() != self.axes.len() {
            return Err(Error::Model("noise axes repeat".into()));
        }
        Ok(())
    }
}

/// Identifies one independent noise stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub trial: usize,
    pub site: usize,
    pub axis: Axis,
}

impl StreamId {
    /// Seed for this stream under `master_seed`.
    pub fn seed(&self, master_seed: u64) -> u64 {
        let axis = match self.axis {
            Axis::X => 0u64,
            Axis::Y => 1,
            Axis::Z => 2,
        };
        let mut h = splitmix(master_seed);
        h = splitmix(h ^ self.trial as u64);
        h = splitmix(h ^ self.site as u64);
        splitmix(h ^ axis)
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OuTrajectory {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

/// Exact OU update on the grid, starting from the stationary distribution.
pub fn sample_ou(spec: &NoiseSpec, grid: &TimeGrid, stream: StreamId) -> OuTrajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(stream.seed(spec.master_seed));
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut values = Vec::with_capacity(grid.len());
    let mut b = spec.mu + spec.sigma * draw();
    values.push(b);
    for w in grid.samples().windows(2) {
        let decay = (-(w[1] - w[0]) / spec.tau).exp();
        b = spec.mu + (b - spec.mu) * decay + spec.sigma * (1.0 - decay * decay).sqrt() * draw();
        values.push(b);
    }
    OuTrajectory {
        grid: grid.clone(),
        values,
    }
}

/// Noisy ensemble for a chain model with an optional drive.
pub fn evolve_noisy(
    m: &ChainModel,
    d: Option<&DriveSpec>,
    spec: &NoiseSpec,
    psi0: &PureState,
    grid: &TimeGrid,
    cfg: &PropagatorConfig,
) -> Result<EvolutionResult> {
    let mut r = evolve_noisy_terms(&static_terms(m)?, d, spec, psi0, grid, cfg)?;
    r.meta.high_frequency_ok = d.map(|d| d.high_frequency_ok(m));
    Ok(r)
}

/// Noisy ensemble under `H0 + h(t) Σσ_axis + Σ_{i,m} B_m^i(t) σ_m^i`, with the
/// fields held constant on each propagator substep.
pub fn evolve_noisy_terms(
    h0: &PauliSum,
    drive: Option<&DriveSpec>,
    spec: &NoiseSpec,
    psi0: &PureState,
    grid: &TimeGrid,
    cfg: &PropagatorConfig,
) -> Result<EvolutionResult> {
    cfg.validate()?;
    spec.validate()?;
    if psi0.dim() != h0.dim() {
        return Err(Error::Shape(format!(
            "state dimension {} vs Hamiltonian dimension {}",
            psi0.dim(),
            h0.dim()
        )));
    }
    let n = h0.n_sites();
    let dt = cfg.substep(drive);
    let lattice = TimeGrid::new((0..lattice_len(grid.t_end(), dt)).map(|k| k as f64 * dt).collect())?;
    let mut channels = Vec::new();
    let mut streams = Vec::new();
    for site in 1..=n {
        for &axis in &spec.axes {
            channels.push(PauliString::single(n, site, axis, 1.0)?);
            streams.push((site, axis));
        }
    }
    let trial = |k: usize| -> Result<Vec<PureState>> {
        let noise: Vec<Vec<f64>> = streams
            .iter()
            .map(|&(site, axis)| sample_ou(spec, &lattice, StreamId { trial: k, site, axis }).values)
            .collect();
        run_lattice(h0, drive, &channels, psi0, grid, dt, &noise)
    };
    let trials = run_trials(spec.trials, trial)?;
    Ok(EvolutionResult {
        grid: grid.clone(),
        trajectory: Trajectory::Ensemble(trials),
        meta: EvolutionMeta {
            description: "noisy".into(),
            drive: drive.copied(),
            noise: Some(spec.clone()),
            substep: Some(dt),
            ..Default::default()
        },
    })
}

#[cfg(feature = "parallel")]
fn run_trials<F, T>(count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T> + Sync + Send,
    T: Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_trials<F, T>(count: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..count).map(f).collect()
}

/// Operator norm of the one-period average of a static single-site noise
/// field `a Σ_{m∈axes} σ_m` seen in the drive's rotating frame.
pub fn decoupling_residual(d: &DriveSpec, axes: &[Axis], amplitude: f64) -> f64 {
    let mut field = DenseOperator::zeros(2);
    for &axis in axes {
        let p = PauliString::single(1, 1, axis, amplitude).expect("single site");
        field = &field + &build_pauli_operator(&p);
    }
    let period = d.period();
    let mut avg = DenseOperator::zeros(2);
    for k in 0..DECOUPLING_NODES {
        // midpoint nodes; the integrand is smooth and periodic
        let t = (k as f64 + 0.5) * period / DECOUPLING_NODES as f64;
        let u = control_frame_unitary(d, 1, t);
        avg = &avg + &(&(&u.adjoint() * &field) * &u);
    }
    DenseOperator(avg.0 / crate::operators::c(DECOUPLING_NODES as f64, 0.0)).operator_norm()
}
