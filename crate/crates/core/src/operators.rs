//! Pauli strings, dense operators and state primitives on the `2^N`-dimensional
//! chain Hilbert space.
//!
//! Site 1 is the leftmost tensor factor, i.e. the most significant bit of a
//! basis index. A basis index bit equal to 0 is the `|0⟩_z = (1, 0)` state.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const MAX_SITES: usize = 12;

const STATE_NORM_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The 2×2 Pauli matrix along this axis.
    pub fn pauli(self) -> DMatrix<C64> {
        let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        match self {
            Axis::X => DMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Axis::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Axis::Z => DMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(format!("unknown axis `{other}` (expected x, y or z)")),
        }
    }
}

/// Bit of a basis index that encodes `site` (1-based) in an `n_sites` chain.
#[inline]
pub fn site_bit(n_sites: usize, site: usize) -> usize {
    1 << (n_sites - site)
}

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::Shape(format!("chain length {n_sites} outside 1..={MAX_SITES}")));
    }
    Ok(())
}

fn check_site(n_sites: usize, site: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        return Err(Error::InvalidSite(format!("site {site} outside 1..={n_sites}")));
    }
    Ok(())
}

/// Tensor product of single-site Pauli factors times a scalar. Unlisted sites
/// carry the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString {
    n_sites: usize,
    factors: BTreeMap<usize, Axis>,
    coefficient: C64,
}

impl PauliString {
    pub fn new(n_sites: usize, factors: impl IntoIterator<Item = (usize, Axis)>, coefficient: C64) -> Result<Self> {
        check_sites(n_sites)?;
        let mut map = BTreeMap::new();
        for (site, axis) in factors {
            check_site(n_sites, site)?;
            if map.insert(site, axis).is_some() {
                return Err(Error::InvalidSite(format!("site {site} listed twice")));
            }
        }
        Ok(Self {
            n_sites,
            factors: map,
            coefficient,
        })
    }

    pub fn identity(n_sites: usize, coefficient: f64) -> Result<Self> {
        Self::new(n_sites, [], c(coefficient, 0.0))
    }

    pub fn single(n_sites: usize, site: usize, axis: Axis, coefficient: f64) -> Result<Self> {
        Self::new(n_sites, [(site, axis)], c(coefficient, 0.0))
    }

    /// `coefficient · σ_axis^a σ_axis^b`.
    pub fn pair(n_sites: usize, a: usize, b: usize, axis: Axis, coefficient: f64) -> Result<Self> {
        Self::new(n_sites, [(a, axis), (b, axis)], c(coefficient, 0.0))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn factors(&self) -> &BTreeMap<usize, Axis> {
        &self.factors
    }

    pub fn coefficient(&self) -> C64 {
        self.coefficient
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coefficient: self.coefficient * s,
            ..self.clone()
        }
    }

    /// Bit masks describing the action on basis states:
    /// `P|b⟩ = coeff · i^{n_y} · (-1)^{popcount(b & z_mask)} |b ^ x_mask⟩`.
    pub(crate) fn action(&self) -> PauliAction {
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut n_y = 0u32;
        for (&site, &axis) in &self.factors {
            let bit = site_bit(self.n_sites, site);
            match axis {
                Axis::X => x_mask |= bit,
                Axis::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
                Axis::Z => z_mask |= bit,
            }
        }
        let phase = match n_y % 4 {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        PauliAction {
            x_mask,
            z_mask,
            scale: self.coefficient * phase,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliAction {
    pub x_mask: usize,
    pub z_mask: usize,
    pub scale: C64,
}

impl PauliAction {
    /// Matrix element mapping `|b⟩` to `|b ^ x_mask⟩`.
    #[inline]
    pub fn element(&self, b: usize) -> C64 {
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -self.scale
        } else {
            self.scale
        }
    }
}

/// A sum of Pauli strings on a common chain.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_sites: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            terms: Vec::new(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if term.n_sites != self.n_sites {
            return Err(Error::Shape(format!(
                "term acts on {} sites, sum on {}",
                term.n_sites, self.n_sites
            )));
        }
        if term.coefficient != C64::new(0.0, 0.0) {
            self.terms.push(term);
        }
        Ok(())
    }

    pub fn extend(&mut self, other: &PauliSum) -> Result<()> {
        for t in &other.terms {
            self.push(t.clone())?;
        }
        Ok(())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            n_sites: self.n_sites,
            terms: self.terms.iter().map(|t| t.scaled(s)).collect(),
        }
    }

    /// Largest coefficient magnitude among the terms.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseOperator {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            let a = t.action();
            for b in 0..dim {
                m[(b ^ a.x_mask, b)] += a.element(b);
            }
        }
        DenseOperator(m)
    }
}

/// `coefficient × ⊗_sites σ` as a dense `2^N × 2^N` matrix.
pub fn build_pauli_operator(p: &PauliString) -> DenseOperator {
    let dim = 1 << p.n_sites;
    let a = p.action();
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        m[(b ^ a.x_mask, b)] = a.element(b);
    }
    DenseOperator(m)
}

/// Elementwise sum of equally sized operators.
pub fn sum_operators(terms: &[DenseOperator]) -> Result<DenseOperator> {
    let first = terms
        .first()
        .ok_or_else(|| Error::Shape("cannot sum an empty list of operators".into()))?;
    let mut acc = first.0.clone();
    for t in &terms[1..] {
        if t.dim() != first.dim() {
            return Err(Error::Shape(format!(
                "operator dimensions {} and {} differ",
                first.dim(),
                t.dim()
            )));
        }
        acc += &t.0;
    }
    Ok(DenseOperator(acc))
}

/// Dense complex square operator (ħ = 1, dimensionless energies).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator(pub DMatrix<C64>);

impl DenseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// Largest elementwise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest elementwise difference.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        (&self.0 - &other.0).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral norm.
    pub fn operator_norm(&self) -> f64 {
        self.0.clone().singular_values().max()
    }

    pub fn apply(&self, psi: &PureState) -> DVector<C64> {
        &self.0 * psi.amplitudes()
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, psi: &PureState) -> C64 {
        psi.amplitudes().dotc(&self.apply(psi))
    }

    /// `A ⊗ B`.
    pub fn kron(&self, other: &DenseOperator) -> Self {
        Self(self.0.kronecker(&other.0))
    }
}

impl std::ops::Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator(&self.0 + &rhs.0)
    }
}

impl std::ops::Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        DenseOperator(&self.0 * &rhs.0)
    }
}

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_sites: usize,
    amps: DVector<C64>,
}

impl PureState {
    pub fn new(amps: DVector<C64>) -> Result<Self> {
        let n_sites = sites_for_dim(amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::Numerical(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n_sites, amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(amps: DVector<C64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numerical("cannot normalize a zero vector".into()));
        }
        Self::new(amps / C64::new(norm, 0.0))
    }

    /// Computational basis state with the given index.
    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        check_sites(n_sites)?;
        let dim = 1 << n_sites;
        if index >= dim {
            return Err(Error::Shape(format!("basis index {index} >= {dim}")));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = c(1.0, 0.0);
        Ok(Self { n_sites, amps })
    }

    pub(crate) fn from_raw(n_sites: usize, amps: DVector<C64>) -> Self {
        Self { n_sites, amps }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix(&self.amps * self.amps.adjoint())
    }

    /// Reduced two-site density matrix, ordered `(a, b)`, computed without
    /// forming the full projector.
    pub fn reduced_pair(&self, a: usize, b: usize) -> Result<DensityMatrix> {
        let (bit_a, bit_b) = pair_bits(self.n_sites, a, b)?;
        let mut rho = DMatrix::zeros(4, 4);
        for env in env_indices(self.n_sites, bit_a, bit_b) {
            let idx = |k: usize| env | if k & 2 != 0 { bit_a } else { 0 } | if k & 1 != 0 { bit_b } else { 0 };
            for k in 0..4 {
                let ak = self.amps[idx(k)];
                for l in 0..4 {
                    rho[(k, l)] += ak * self.amps[idx(l)].conj();
                }
            }
        }
        Ok(DensityMatrix(rho))
    }
}

fn sites_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!("dimension {dim} is not 2^N with N >= 1")));
    }
    let n = dim.trailing_zeros() as usize;
    check_sites(n)?;
    Ok(n)
}

fn pair_bits(n_sites: usize, a: usize, b: usize) -> Result<(usize, usize)> {
    check_site(n_sites, a)?;
    check_site(n_sites, b)?;
    if a == b {
        return Err(Error::InvalidSite(format!("pair ({a}, {b}) repeats a site")));
    }
    Ok((site_bit(n_sites, a), site_bit(n_sites, b)))
}

/// Basis indices with both kept bits cleared.
fn env_indices(n_sites: usize, bit_a: usize, bit_b: usize) -> impl Iterator<Item = usize> {
    let keep = bit_a | bit_b;
    (0..1usize << n_sites).filter(move |i| i & keep == 0)
}

/// Product of single-site eigenstates of `σ_basis`; label 0 is the +1
/// eigenvector, label 1 the −1 eigenvector. Phases are fixed so that each
/// single-site vector has a real positive first amplitude.
pub fn basis_product_state(n_sites: usize, labels: &[u8], basis: Axis) -> Result<PureState> {
    check_sites(n_sites)?;
    if labels.len() != n_sites {
        return Err(Error::Shape(format!("{} labels for {n_sites} sites", labels.len())));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = DVector::from_element(1, c(1.0, 0.0));
    for &label in labels {
        let single: [C64; 2] = match (basis, label) {
            (Axis::Z, 0) => [c(1.0, 0.0), c(0.0, 0.0)],
            (Axis::Z, 1) => [c(0.0, 0.0), c(1.0, 0.0)],
            (Axis::X, 0) => [c(h, 0.0), c(h, 0.0)],
            (Axis::X, 1) => [c(h, 0.0), c(-h, 0.0)],
            (Axis::Y, 0) => [c(h, 0.0), c(0.0, h)],
            (Axis::Y, 1) => [c(h, 0.0), c(0.0, -h)],
            (_, other) => return Err(Error::Shape(format!("site label {other} is not 0 or 1"))),
        };
        amps = amps.kronecker(&DVector::from_row_slice(&single));
    }
    Ok(PureState { n_sites, amps })
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity to 1e-10.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Shape("density matrix is not square".into()));
        }
        sites_for_dim(m.nrows())?;
        let op = DenseOperator(m);
        let herm = op.hermiticity_error();
        if herm > DENSITY_TOL {
            return Err(Error::Numerical(format!("density matrix not Hermitian ({herm:.2e})")));
        }
        let rho = DensityMatrix(op.0);
        let tr = rho.trace();
        if (tr - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Numerical(format!("density matrix trace {tr} is not 1")));
        }
        let min = rho.min_eigenvalue();
        if min < -DENSITY_TOL {
            return Err(Error::Numerical(format!(
                "density matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    /// Convex combination `Σ w_k |ψ_k⟩⟨ψ_k|`, summed in the given order.
    pub fn mixture(weights: &[f64], states: &[PureState]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Shape("weights and states must be non-empty and aligned".into()));
        }
        let dim = states[0].dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::Shape("states in a mixture differ in dimension".into()));
            }
            m += (&s.amps * s.amps.adjoint()) * c(*w, 0.0);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.clone().symmetric_eigenvalues().min()
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "state dimension {} vs density matrix {}",
                psi.dim(),
                self.dim()
            )));
        }
        Ok(psi.amps.dotc(&(&self.0 * &psi.amps)).re)
    }
}

/// Reduced density matrix of the ordered pair `(a, b)`; all other sites are
/// traced out.
pub fn partial_trace_to_pair(rho: &DensityMatrix, keep: (usize, usize)) -> Result<DensityMatrix> {
    let n = rho.n_sites();
    let (bit_a, bit_b) = pair_bits(n, keep.0, keep.1)?;
    let idx = |env: usize, k: usize| env | if k & 2 != 0 { bit_a } else { 0 } | if k & 1 != 0 { bit_b } else { 0 };
    let mut out = DMatrix::zeros(4, 4);
    for env in env_indices(n, bit_a, bit_b) {
        for k in 0..4 {
            for l in 0..4 {
                out[(k, l)] += rho.0[(idx(env, k), idx(env, l))];
            }
        }
    }
    Ok(DensityMatrix(out))
}
