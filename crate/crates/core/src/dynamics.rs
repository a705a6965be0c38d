//! State propagation under constant and periodically driven Hamiltonians.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{field_terms, static_terms, ChainModel, DriveSpec};
use crate::noise::NoiseSpec;
use crate::operators::{c, DenseOperator, DensityMatrix, PauliSum, PureState, C64};
use crate::propagator::{propagate, Generator};

const HERMITIAN_TOL: f64 = 1e-10;

/// Strictly increasing, non-negative sample times. Initial states are given
/// at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    samples: Vec<f64>,
}

impl TimeGrid {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Shape("time grid has no samples".into()));
        }
        if samples.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Shape("sample times must be finite and non-negative".into()));
        }
        if samples.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Shape("sample times must be strictly increasing".into()));
        }
        Ok(Self { samples })
    }

    /// `n` evenly spaced samples on `[0, t_end]`.
    pub fn uniform(t_end: f64, n: usize) -> Result<Self> {
        if n < 2 || !(t_end > 0.0) {
            return Err(Error::Shape(format!(
                "uniform grid needs n >= 2 and t_end > 0 (got n = {n}, t_end = {t_end})"
            )));
        }
        let step = t_end / (n - 1) as f64;
        Self::new((0..n).map(|k| k as f64 * step).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.samples[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.samples.last().expect("non-empty grid")
    }

    /// Every `stride`-th sample, always keeping the first.
    pub fn decimated(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        Self {
            samples: self.samples.iter().step_by(stride).copied().collect(),
        }
    }
}

/// `t_n = 2πn/ω` for `n = 0..=⌊horizon·ω/2π⌋`.
pub fn stroboscopic_times(omega: f64, horizon: f64) -> Result<TimeGrid> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Model(format!("drive frequency must be positive, got {omega}")));
    }
    if !(horizon >= 0.0) {
        return Err(Error::Shape(format!("horizon must be non-negative, got {horizon}")));
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let count = (horizon / period + 1e-9).floor() as usize;
    TimeGrid::new((0..=count).map(|n| n as f64 * period).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorConfig {
    /// Midpoint substeps per drive period; even and at least 16.
    pub steps_per_period: usize,
    /// Largest final-state infidelity between the run and a run with doubled
    /// resolution that still counts as converged.
    pub convergence_tol: f64,
    pub check_convergence: bool,
    /// Substep used when there is no drive to set the time scale.
    pub undriven_substep: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            steps_per_period: 64,
            convergence_tol: 1e-8,
            check_convergence: true,
            undriven_substep: 1e-3,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < 16 || !self.steps_per_period.is_multiple_of(2) {
            return Err(Error::Model(format!(
                "steps_per_period must be even and >= 16, got {}",
                self.steps_per_period
            )));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Model("convergence_tol must be positive".into()));
        }
        if !(self.undriven_substep > 0.0) {
            return Err(Error::Model("undriven_substep must be positive".into()));
        }
        Ok(())
    }

    /// Lattice spacing for the given drive.
    pub fn substep(&self, drive: Option<&DriveSpec>) -> f64 {
        match drive {
            Some(d) => d.period() / self.steps_per_period as f64,
            None => self.undriven_substep,
        }
    }
}

/// Outcome of re-running a driven propagation at twice the resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub steps_per_period: usize,
    pub infidelity_on_doubling: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvolutionMeta {
    pub description: String,
    pub drive: Option<DriveSpec>,
    pub noise: Option<NoiseSpec>,
    pub substep: Option<f64>,
    pub convergence: Option<ConvergenceReport>,
    pub high_frequency_ok: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Trajectory {
    Pure(Vec<PureState>),
    /// `trials[k][s]`: trial `k` at sample `s`.
    Ensemble(Vec<Vec<PureState>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionResult {
    pub grid: TimeGrid,
    pub trajectory: Trajectory,
    pub meta: EvolutionMeta,
}

impl EvolutionResult {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.states_at(0)[0].n_sites()
    }

    pub fn trials(&self) -> usize {
        match &self.trajectory {
            Trajectory::Pure(_) => 1,
            Trajectory::Ensemble(t) => t.len(),
        }
    }

    /// Pure trajectory, if this is not an ensemble.
    pub fn pure_states(&self) -> Option<&[PureState]> {
        match &self.trajectory {
            Trajectory::Pure(s) => Some(s),
            Trajectory::Ensemble(_) => None,
        }
    }

    /// One state per trial at `sample`.
    pub fn states_at(&self, sample: usize) -> Vec<&PureState> {
        match &self.trajectory {
            Trajectory::Pure(s) => vec![&s[sample]],
            Trajectory::Ensemble(t) => t.iter().map(|tr| &tr[sample]).collect(),
        }
    }

    /// Equal-weight average of the trial projectors at `sample`, summed in
    /// trial order.
    pub fn density_matrix(&self, sample: usize) -> DensityMatrix {
        let states = self.states_at(sample);
        let dim = states[0].dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for s in &states {
            let a = s.amplitudes();
            m += a * a.adjoint();
        }
        DensityMatrix::from_raw(m / c(states.len() as f64, 0.0))
    }
}

fn check_state(psi0: &PureState, dim: usize) -> Result<()> {
    if psi0.dim() != dim {
        return Err(Error::Shape(format!(
            "state dimension {} vs Hamiltonian dimension {dim}",
            psi0.dim()
        )));
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian operator.
struct Spectrum {
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

fn spectrum(h: &DenseOperator) -> Spectrum {
    let real = h.0.iter().all(|z| z.im == 0.0);
    if real {
        let eig = h.0.map(|z| z.re).symmetric_eigen();
        Spectrum {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors.map(|x| c(x, 0.0)),
        }
    } else {
        let eig = h.0.clone().symmetric_eigen();
        Spectrum {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }
}

/// `|ψ(t)⟩ = e^{−iHt}|ψ0⟩` through the eigendecomposition of `H`.
pub fn evolve_constant(h: &DenseOperator, psi0: &PureState, grid: &TimeGrid) -> Result<EvolutionResult> {
    check_state(psi0, h.dim())?;
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::Numerical(format!(
            "Hamiltonian is not Hermitian (deviation {err:.3e})"
        )));
    }
    let spec = spectrum(h);
    let coeffs = spec.vectors.adjoint() * psi0.amplitudes();
    let states = grid
        .samples()
        .iter()
        .map(|&t| {
            let rotated = DVector::from_iterator(
                coeffs.len(),
                coeffs
                    .iter()
                    .zip(&spec.values)
                    .map(|(a, e)| a * C64::from_polar(1.0, -e * t)),
            );
            PureState::from_raw(psi0.n_sites(), &spec.vectors * rotated)
        })
        .collect();
    Ok(EvolutionResult {
        grid: grid.clone(),
        trajectory: Trajectory::Pure(states),
        meta: EvolutionMeta {
            description: "constant".into(),
            ..Default::default()
        },
    })
}

/// Driven chain `H(t) = H_static + g cos(ωt) Σ σ_axis` by the midpoint
/// piecewise-constant exponential rule.
pub fn evolve_driven(
    m: &ChainModel,
    d: &DriveSpec,
    psi0: &PureState,
    grid: &TimeGrid,
    cfg: &PropagatorConfig,
) -> Result<EvolutionResult> {
    let mut r = evolve_driven_terms(&static_terms(m)?, Some(d), psi0, grid, cfg)?;
    r.meta.high_frequency_ok = Some(d.high_frequency_ok(m));
    Ok(r)
}

pub(crate) fn run_lattice(
    h0: &PauliSum,
    drive: Option<&DriveSpec>,
    noise_channels: &[crate::operators::PauliString],
    psi0: &PureState,
    grid: &TimeGrid,
    dt: f64,
    noise: &[Vec<f64>],
) -> Result<Vec<PureState>> {
    let field = match drive {
        Some(d) if d.g != 0.0 => Some(field_terms(h0.n_sites(), d.axis)?),
        _ => None,
    };
    let mut gen = Generator::new(h0, drive.zip(field.as_ref()), noise_channels);
    let raw = propagate(&mut gen, psi0.amplitudes().as_slice(), grid.samples(), dt, noise);
    Ok(raw
        .into_iter()
        .map(|v| PureState::from_raw(psi0.n_sites(), DVector::from_vec(v)))
        .collect())
}

/// As [`evolve_driven`] for an arbitrary static Pauli sum; `drive = None`
/// propagates the static part alone on `cfg.undriven_substep`.
pub fn evolve_driven_terms(
    h0: &PauliSum,
    drive: Option<&DriveSpec>,
    psi0: &PureState,
    grid: &TimeGrid,
    cfg: &PropagatorConfig,
) -> Result<EvolutionResult> {
    cfg.validate()?;
    check_state(psi0, h0.dim())?;
    let dt = cfg.substep(drive);
    let check = cfg.check_convergence && drive.is_some_and(|d| d.g != 0.0);
    let (states, fine) = if check {
        let base = || run_lattice(h0, drive, &[], psi0, grid, dt, &[]);
        let fine = || run_lattice(h0, drive, &[], psi0, grid, 0.5 * dt, &[]);
        let (a, b) = join(base, fine);
        (a?, Some(b?))
    } else {
        (run_lattice(h0, drive, &[], psi0, grid, dt, &[])?, None)
    };
    let convergence = fine.map(|f| {
        let last = states.len() - 1;
        let infidelity = 1.0 - states[last].overlap(&f[last]);
        ConvergenceReport {
            steps_per_period: cfg.steps_per_period,
            infidelity_on_doubling: infidelity,
            converged: infidelity < cfg.convergence_tol,
        }
    });
    Ok(EvolutionResult {
        grid: grid.clone(),
        trajectory: Trajectory::Pure(states),
        meta: EvolutionMeta {
            description: "driven".into(),
            drive: drive.copied(),
            substep: Some(dt),
            convergence,
            ..Default::default()
        },
    })
}

#[cfg(feature = "parallel")]
pub(crate) fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn join<A, B, RA, RB>(a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA,
    B: FnOnce() -> RB,
{
    (a(), b())
}
