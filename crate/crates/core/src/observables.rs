//! Transfer fidelity, two-site concurrence and the single-excitation oracle.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::dynamics::{EvolutionResult, TimeGrid};
use crate::error::{Error, Result};
use crate::operators::{basis_product_state, c, site_bit, Axis, DenseOperator, DensityMatrix, PureState, C64};

const PSD_TOL: f64 = 1e-10;
const CONSERVATION_TOL: f64 = 1e-10;

/// `⟨ψ|ρ|ψ⟩` clamped to `[0, 1]`.
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    Ok(rho.expectation(target)?.clamp(0.0, 1.0))
}

/// Fidelity of the trial-averaged state at every sample.
pub fn fidelity_series(result: &EvolutionResult, target: &PureState) -> Result<Vec<f64>> {
    if result.n_sites() != target.n_sites() {
        return Err(Error::Shape(format!(
            "target on {} sites vs evolution on {}",
            target.n_sites(),
            result.n_sites()
        )));
    }
    Ok((0..result.len())
        .map(|k| {
            let states = result.states_at(k);
            let sum: f64 = states.iter().map(|s| target.overlap(s)).sum();
            (sum / states.len() as f64).clamp(0.0, 1.0)
        })
        .collect())
}

/// Wootters concurrence of a two-qubit density matrix.
///
/// With `ρ = W W†`, the square roots of the eigenvalues of `ρ ρ̃` are the
/// singular values of `Wᵀ (σy⊗σy) W`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::Shape(format!(
            "concurrence needs a 4x4 matrix, got {}",
            rho.dim()
        )));
    }
    let eig = rho.matrix().clone().symmetric_eigen();
    let mut w = eig.eigenvectors;
    for (k, &p) in eig.eigenvalues.iter().enumerate() {
        if p < -PSD_TOL {
            return Err(Error::Numerical(format!(
                "density matrix has negative eigenvalue {p:.3e}"
            )));
        }
        let s = p.max(0.0).sqrt();
        w.column_mut(k).scale_mut(s);
    }
    let m = w.transpose() * spin_flip() * &w;
    let mut lambda: Vec<f64> = m.singular_values().iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).clamp(0.0, 1.0))
}

/// `σy ⊗ σy`.
pub(crate) fn spin_flip() -> DMatrix<C64> {
    let y = Axis::Y.pauli();
    y.kronecker(&y)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ConcurrenceOrder {
    /// Concurrence of each trial, then averaged.
    #[default]
    PerTrial,
    /// Concurrence of the trial-averaged reduced state.
    AveragedState,
}

impl ConcurrenceOrder {
    pub fn name(self) -> &'static str {
        match self {
            Self::PerTrial => "per-trial",
            Self::AveragedState => "averaged-state",
        }
    }
}

impl std::str::FromStr for ConcurrenceOrder {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "per-trial" => Ok(Self::PerTrial),
            "averaged-state" => Ok(Self::AveragedState),
            other => Err(format!("unknown concurrence order `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcurrenceSeries {
    pub grid: TimeGrid,
    pub pair: (usize, usize),
    pub values: Vec<f64>,
}

impl ConcurrenceSeries {
    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

pub fn pair_concurrence(
    result: &EvolutionResult,
    pair: (usize, usize),
    order: ConcurrenceOrder,
) -> Result<ConcurrenceSeries> {
    let mut values = Vec::with_capacity(result.len());
    for k in 0..result.len() {
        let states = result.states_at(k);
        let v = match order {
            ConcurrenceOrder::PerTrial => {
                let mut sum = 0.0;
                for s in &states {
                    sum += concurrence(&s.reduced_pair(pair.0, pair.1)?)?;
                }
                sum / states.len() as f64
            }
            ConcurrenceOrder::AveragedState => {
                let mut m = DMatrix::<C64>::zeros(4, 4);
                for s in &states {
                    m += s.reduced_pair(pair.0, pair.1)?.matrix();
                }
                concurrence(&DensityMatrix::from_raw(m / c(states.len() as f64, 0.0)))?
            }
        };
        values.push(v);
    }
    Ok(ConcurrenceSeries {
        grid: result.grid.clone(),
        pair,
        values,
    })
}

/// Concurrence between sites 1 and N.
pub fn end_to_end_concurrence(result: &EvolutionResult) -> Result<ConcurrenceSeries> {
    let n = result.n_sites();
    if n < 2 {
        return Err(Error::InvalidSite("end-to-end concurrence needs N >= 2".into()));
    }
    pair_concurrence(result, (1, n), ConcurrenceOrder::default())
}

/// Concurrence between sites 1 and 2.
pub fn adjacent_concurrence(result: &EvolutionResult) -> Result<ConcurrenceSeries> {
    pair_concurrence(result, (1, 2), ConcurrenceOrder::default())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferTask {
    pub initial: PureState,
    pub target: PureState,
    pub description: String,
}

impl TransferTask {
    pub fn new(initial: PureState, target: PureState, description: impl Into<String>) -> Result<Self> {
        if initial.dim() != target.dim() {
            return Err(Error::Shape("initial and target states differ in dimension".into()));
        }
        Ok(Self {
            initial,
            target,
            description: description.into(),
        })
    }

    /// `|0 1 … 1⟩ → |1 … 1 0⟩` in the eigenbasis of `σ_basis`.
    pub fn end_to_end(n_sites: usize, basis: Axis) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidSite("transfer needs N >= 2".into()));
        }
        let mut from = vec![1u8; n_sites];
        from[0] = 0;
        let mut to = vec![1u8; n_sites];
        to[n_sites - 1] = 0;
        Self::new(
            basis_product_state(n_sites, &from, basis)?,
            basis_product_state(n_sites, &to, basis)?,
            format!("end-to-end transfer, N = {n_sites}, {basis} basis"),
        )
    }
}

/// Basis index of the state with only `site` in `|0⟩`.
pub fn single_excitation_index(n_sites: usize, site: usize) -> usize {
    ((1usize << n_sites) - 1) ^ site_bit(n_sites, site)
}

/// `H` restricted to the states with exactly one site in `|0⟩`, ordered by
/// that site.
pub fn single_excitation_block(h: &DenseOperator, n_sites: usize) -> Result<DMatrix<C64>> {
    if h.dim() != 1 << n_sites {
        return Err(Error::Shape(format!(
            "operator dimension {} is not 2^{n_sites}",
            h.dim()
        )));
    }
    // Σσz is diagonal, so [H, Σσz]_{ab} = H_ab (m_b − m_a)
    let mag = |b: usize| n_sites as f64 - 2.0 * b.count_ones() as f64;
    let mut comm = DMatrix::<C64>::zeros(h.dim(), h.dim());
    for a in 0..h.dim() {
        for b in 0..h.dim() {
            comm[(a, b)] = h.0[(a, b)] * (mag(b) - mag(a));
        }
    }
    let err = DenseOperator(comm).operator_norm();
    if err > CONSERVATION_TOL {
        return Err(Error::NotExcitationConserving(err));
    }
    let idx: Vec<usize> = (1..=n_sites).map(|s| single_excitation_index(n_sites, s)).collect();
    Ok(DMatrix::from_fn(n_sites, n_sites, |i, j| h.0[(idx[i], idx[j])]))
}

/// `|⟨to|e^{−iBt}|from⟩|²` for a Hermitian block, sites 1-based.
pub fn block_transfer_probability(block: &DMatrix<C64>, from: usize, to: usize, t: f64) -> f64 {
    let eig = block.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut amp = c(0.0, 0.0);
    for k in 0..block.nrows() {
        amp += v[(to - 1, k)] * v[(from - 1, k)].conj() * C64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    amp.norm_sqr()
}

/// Spectral data of a single-excitation block and the end-to-end transfer it
/// implies.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferOracle {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Mean gap between consecutive eigenvalues.
    pub spacing: f64,
    /// Largest deviation of any gap from `spacing`.
    pub spacing_error: f64,
    /// `π / spacing`.
    pub transfer_time: f64,
    /// End-to-end probability at `transfer_time`.
    pub probability: f64,
}

pub fn transfer_oracle(block: &DMatrix<C64>) -> Result<TransferOracle> {
    let n = block.nrows();
    if n < 2 || !block.is_square() {
        return Err(Error::Shape("transfer oracle needs a square block with N >= 2".into()));
    }
    let mut eigenvalues: Vec<f64> = block.clone().symmetric_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    let spacing = gaps.iter().sum::<f64>() / gaps.len() as f64;
    if !(spacing > 0.0) {
        return Err(Error::Numerical("single-excitation spectrum is degenerate".into()));
    }
    let spacing_error = gaps.iter().map(|g| (g - spacing).abs()).fold(0.0, f64::max);
    let transfer_time = PI / spacing;
    Ok(TransferOracle {
        probability: block_transfer_probability(block, 1, n, transfer_time),
        eigenvalues,
        spacing,
        spacing_error,
        transfer_time,
    })
}

/// Largest probability on `times` together with the time it occurs.
pub fn peak(times: &[f64], values: &[f64]) -> (f64, f64) {
    times.iter().zip(values).fold(
        (0.0, f64::NEG_INFINITY),
        |best, (&t, &v)| if v > best.1 { (t, v) } else { best },
    )
}
