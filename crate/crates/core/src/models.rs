//! Static, driven and rotating-frame effective chain Hamiltonians.
//!
//! Static chains:
//! - Ising: `Σ J_i X_i X_{i+1}`
//! - XY: `Σ (Jx_i X_i X_{i+1} + Jy_i Y_i Y_{i+1})`
//! - XY-gamma: `Σ J_i [(γ+1) X_i X_{i+1} + (1−γ) Y_i Y_{i+1}]`
//! - Ising-NNN: `Σ J_i X_i X_{i+1} + Σ (L_i/N) X_i X_{i+2}`
//!
//! A drive adds `g cos(ωt) Σ σ_axis^i`. In the frame of the drive, keeping only
//! the zeroth Jacobi-Anger harmonic, a bond along an axis transverse to the
//! drive is reweighted by `A = J0(4g/ω)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::bessel::{j0_inverse_first_branch, J0_MIN_VALUE};
use crate::error::{Error, Result};
use crate::operators::{c, Axis, DenseOperator, PauliString, PauliSum, C64};

pub use crate::bessel::{bessel_j0, J0_FIRST_ZERO, J0_MIN_ARG};

/// Ratio `ω / max|J|` below which the zeroth-order description is flagged.
pub const HIGH_FREQUENCY_RATIO: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChainFamily {
    Ising,
    Xy,
    XyGamma,
    IsingNnn,
}

impl ChainFamily {
    pub fn name(self) -> &'static str {
        match self {
            ChainFamily::Ising => "ising",
            ChainFamily::Xy => "xy",
            ChainFamily::XyGamma => "xy-gamma",
            ChainFamily::IsingNnn => "ising-nnn",
        }
    }
}

impl fmt::Display for ChainFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChainFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ising" => Ok(ChainFamily::Ising),
            "xy" => Ok(ChainFamily::Xy),
            "xy-gamma" => Ok(ChainFamily::XyGamma),
            "ising-nnn" => Ok(ChainFamily::IsingNnn),
            other => Err(format!(
                "unknown family `{other}` (expected ising, xy, xy-gamma or ising-nnn)"
            )),
        }
    }
}

/// How a per-bond coupling array is specified.
#[derive(Clone, Debug, PartialEq)]
pub enum CouplingProfile {
    Uniform(f64),
    /// `J_i = √(i(N−i))`, the mirror-symmetric profile of perfect transfer.
    Pst,
    Explicit(Vec<f64>),
}

impl CouplingProfile {
    /// Values for bonds `1..=n_bonds` of an `n_sites` chain.
    pub fn expand(&self, n_sites: usize, n_bonds: usize) -> Result<Vec<f64>> {
        match self {
            CouplingProfile::Uniform(v) => Ok(vec![*v; n_bonds]),
            CouplingProfile::Pst => Ok((1..=n_bonds).map(|i| ((i * (n_sites - i)) as f64).sqrt()).collect()),
            CouplingProfile::Explicit(v) if v.len() == n_bonds => Ok(v.clone()),
            CouplingProfile::Explicit(v) => Err(Error::Model(format!(
                "{} couplings given, {n_bonds} bonds expected",
                v.len()
            ))),
        }
    }
}

/// Declarative chain description. Arrays are indexed by bond, bond `i` joins
/// sites `i` and `i+1` (or `i+2` for `l_nnn`).
#[derive(Clone, Debug, PartialEq)]
pub struct ChainModel {
    pub n_sites: usize,
    pub family: ChainFamily,
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
    pub gamma: f64,
    pub l_nnn: Vec<f64>,
}

impl ChainModel {
    pub fn ising(n_sites: usize, j: &CouplingProfile) -> Result<Self> {
        check_length(n_sites)?;
        Self {
            n_sites,
            family: ChainFamily::Ising,
            jx: j.expand(n_sites, n_sites - 1)?,
            jy: Vec::new(),
            gamma: 0.0,
            l_nnn: Vec::new(),
        }
        .validated()
    }

    pub fn xy(n_sites: usize, jx: &CouplingProfile, jy: &CouplingProfile) -> Result<Self> {
        check_length(n_sites)?;
        Self {
            n_sites,
            family: ChainFamily::Xy,
            jx: jx.expand(n_sites, n_sites - 1)?,
            jy: jy.expand(n_sites, n_sites - 1)?,
            gamma: 0.0,
            l_nnn: Vec::new(),
        }
        .validated()
    }

    pub fn xy_gamma(n_sites: usize, j: &CouplingProfile, gamma: f64) -> Result<Self> {
        check_length(n_sites)?;
        Self {
            n_sites,
            family: ChainFamily::XyGamma,
            jx: j.expand(n_sites, n_sites - 1)?,
            jy: Vec::new(),
            gamma,
            l_nnn: Vec::new(),
        }
        .validated()
    }

    pub fn ising_nnn(n_sites: usize, j: &CouplingProfile, l: &CouplingProfile) -> Result<Self> {
        check_length(n_sites)?;
        Self {
            n_sites,
            family: ChainFamily::IsingNnn,
            jx: j.expand(n_sites, n_sites - 1)?,
            jy: Vec::new(),
            gamma: 0.0,
            l_nnn: l.expand(n_sites, n_sites.saturating_sub(2))?,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_length(self.n_sites)?;
        let bonds = self.n_sites - 1;
        let expect = |name: &str, v: &[f64], n: usize| -> Result<()> {
            if v.len() != n {
                return Err(Error::Model(format!(
                    "{} chain of {} sites needs {n} `{name}` values, got {}",
                    self.family,
                    self.n_sites,
                    v.len()
                )));
            }
            if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::Model(format!("non-finite coupling {bad} in `{name}`")));
            }
            Ok(())
        };
        expect("jx", &self.jx, bonds)?;
        match self.family {
            ChainFamily::Xy => expect("jy", &self.jy, bonds)?,
            _ => expect("jy", &self.jy, 0)?,
        }
        match self.family {
            ChainFamily::IsingNnn => {
                if self.n_sites < 3 {
                    return Err(Error::Model("next-nearest couplings need at least 3 sites".into()));
                }
                expect("l_nnn", &self.l_nnn, self.n_sites - 2)?
            }
            _ => expect("l_nnn", &self.l_nnn, 0)?,
        }
        if self.family != ChainFamily::XyGamma && self.gamma != 0.0 {
            return Err(Error::Model("anisotropy γ only applies to the xy-gamma family".into()));
        }
        Ok(())
    }

    /// Largest coefficient magnitude in the static Hamiltonian.
    pub fn max_coupling(&self) -> f64 {
        static_terms(self).map(|h| h.max_coefficient()).unwrap_or(0.0)
    }
}

fn check_length(n_sites: usize) -> Result<()> {
    if !(2..=crate::operators::MAX_SITES).contains(&n_sites) {
        return Err(Error::Model(format!(
            "chain length {n_sites} outside 2..={}",
            crate::operators::MAX_SITES
        )));
    }
    Ok(())
}

/// Sinusoidal control field `g cos(ωt)` along `axis` on every site.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSpec {
    pub axis: Axis,
    pub g: f64,
    pub omega: f64,
}

impl DriveSpec {
    pub fn new(axis: Axis, g: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::Model(format!("drive frequency must be positive, got {omega}")));
        }
        if !g.is_finite() {
            return Err(Error::Model(format!("drive amplitude must be finite, got {g}")));
        }
        Ok(Self { axis, g, omega })
    }

    /// Drive calibrated so that `J0(4g/ω) = target_a`.
    pub fn calibrated(axis: Axis, target_a: f64, omega: f64) -> Result<Self> {
        Self::new(axis, calibrate_drive(target_a, omega)?, omega)
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    /// `A = J0(4g/ω)`.
    pub fn bessel_weight(&self) -> f64 {
        bessel_j0(4.0 * self.g / self.omega)
    }

    /// `g sin(ωt)/ω`, the accumulated rotation angle of the control frame.
    pub fn frame_angle(&self, t: f64) -> f64 {
        self.g * (self.omega * t).sin() / self.omega
    }

    /// Whether `ω >= 20 · max|J|`, the regime where the zeroth-order
    /// description is expected to hold.
    pub fn high_frequency_ok(&self, model: &ChainModel) -> bool {
        self.omega >= HIGH_FREQUENCY_RATIO * model.max_coupling()
    }

    /// The same drive with zero amplitude; keeps the frequency so a paired
    /// undriven run shares the time lattice.
    pub fn switched_off(&self) -> Self {
        Self { g: 0.0, ..*self }
    }
}

/// `g cos(ωt)`.
pub fn drive_value(d: &DriveSpec, t: f64) -> f64 {
    d.g * (d.omega * t).cos()
}

fn bond_sum(h: &mut PauliSum, n: usize, range: usize, coeffs: &[f64], axis: Axis, scale: f64) -> Result<()> {
    for (k, &j) in coeffs.iter().enumerate() {
        let i = k + 1;
        h.push(PauliString::pair(n, i, i + range, axis, scale * j)?)?;
    }
    Ok(())
}

/// Static chain Hamiltonian as a Pauli sum.
pub fn static_terms(m: &ChainModel) -> Result<PauliSum> {
    m.validate()?;
    let n = m.n_sites;
    let mut h = PauliSum::new(n);
    match m.family {
        ChainFamily::Ising => bond_sum(&mut h, n, 1, &m.jx, Axis::X, 1.0)?,
        ChainFamily::Xy => {
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, 1.0)?;
            bond_sum(&mut h, n, 1, &m.jy, Axis::Y, 1.0)?;
        }
        ChainFamily::XyGamma => {
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, m.gamma + 1.0)?;
            bond_sum(&mut h, n, 1, &m.jx, Axis::Y, 1.0 - m.gamma)?;
        }
        ChainFamily::IsingNnn => {
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, 1.0)?;
            bond_sum(&mut h, n, 2, &m.l_nnn, Axis::X, 1.0 / n as f64)?;
        }
    }
    Ok(h)
}

pub fn build_static_hamiltonian(m: &ChainModel) -> Result<DenseOperator> {
    Ok(static_terms(m)?.to_dense())
}

/// `Σ_i σ_axis^i`.
pub fn field_terms(n_sites: usize, axis: Axis) -> Result<PauliSum> {
    let mut h = PauliSum::new(n_sites);
    for i in 1..=n_sites {
        h.push(PauliString::single(n_sites, i, axis, 1.0)?)?;
    }
    Ok(h)
}

/// `H(t) = H_static + g cos(ωt) Σ σ_axis^i`.
pub fn driven_hamiltonian(m: &ChainModel, d: &DriveSpec, t: f64) -> Result<DenseOperator> {
    let mut h = static_terms(m)?;
    h.extend(&field_terms(m.n_sites, d.axis)?.scaled(drive_value(d, t)))?;
    Ok(h.to_dense())
}

/// Smallest `g >= 0` with `J0(4g/ω) = target_a`.
pub fn calibrate_drive(target_a: f64, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Model(format!("drive frequency must be positive, got {omega}")));
    }
    let x = j0_inverse_first_branch(target_a).ok_or(Error::Calibration {
        target: target_a,
        min: J0_MIN_VALUE,
    })?;
    Ok(omega * x / 4.0)
}

/// Zeroth-order rotating-frame Hamiltonian as a Pauli sum.
pub fn effective_terms(m: &ChainModel, d: &DriveSpec) -> Result<PauliSum> {
    m.validate()?;
    let a = d.bessel_weight();
    let n = m.n_sites;
    let mut h = PauliSum::new(n);
    let plus = 0.5 * (a + 1.0);
    let minus = 0.5 * (a - 1.0);
    match (m.family, d.axis) {
        (ChainFamily::Ising, Axis::Z) => {
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, plus)?;
            bond_sum(&mut h, n, 1, &m.jx, Axis::Y, -minus)?;
        }
        (ChainFamily::Xy, Axis::Z) => {
            let xx: Vec<f64> = m.jx.iter().zip(&m.jy).map(|(jx, jy)| jx * plus - jy * minus).collect();
            let yy: Vec<f64> = m.jx.iter().zip(&m.jy).map(|(jx, jy)| jy * plus - jx * minus).collect();
            bond_sum(&mut h, n, 1, &xx, Axis::X, 1.0)?;
            bond_sum(&mut h, n, 1, &yy, Axis::Y, 1.0)?;
        }
        (ChainFamily::Xy, Axis::Y) => {
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, plus)?;
            bond_sum(&mut h, n, 1, &m.jx, Axis::Z, -minus)?;
            bond_sum(&mut h, n, 1, &m.jy, Axis::Y, 1.0)?;
        }
        (ChainFamily::XyGamma, Axis::Y) => {
            let g = m.gamma;
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, (g + 1.0) * plus)?;
            bond_sum(&mut h, n, 1, &m.jx, Axis::Z, -(g + 1.0) * minus)?;
            bond_sum(&mut h, n, 1, &m.jx, Axis::Y, 1.0 - g)?;
        }
        (ChainFamily::IsingNnn, Axis::Z) => {
            bond_sum(&mut h, n, 1, &m.jx, Axis::X, plus)?;
            bond_sum(&mut h, n, 1, &m.jx, Axis::Y, -minus)?;
            let inv_n = 1.0 / n as f64;
            bond_sum(&mut h, n, 2, &m.l_nnn, Axis::X, plus * inv_n)?;
            bond_sum(&mut h, n, 2, &m.l_nnn, Axis::Y, -minus * inv_n)?;
        }
        (family, axis) => return Err(Error::UnsupportedTransform { family, axis }),
    }
    Ok(h)
}

pub fn effective_hamiltonian(m: &ChainModel, d: &DriveSpec) -> Result<DenseOperator> {
    Ok(effective_terms(m, d)?.to_dense())
}

/// `exp(−i g sin(ωt)/ω Σ σ_axis^i)`, built as the `n_sites`-fold tensor power
/// of the single-site rotation.
pub fn control_frame_unitary(d: &DriveSpec, n_sites: usize, t: f64) -> DenseOperator {
    let theta = d.frame_angle(t);
    let single = DMatrix::<C64>::identity(2, 2) * c(theta.cos(), 0.0) - d.axis.pauli() * c(0.0, theta.sin());
    let mut u = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for _ in 0..n_sites {
        u = u.kronecker(&single);
    }
    DenseOperator(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_pauli_operator, sum_operators};
    use std::f64::consts::PI;

    fn xx(n: usize, a: usize, b: usize, axis: Axis, s: f64) -> DenseOperator {
        build_pauli_operator(&PauliString::pair(n, a, b, axis, s).unwrap())
    }

    #[test]
    fn ising_two_sites_is_xx() {
        let m = ChainModel::ising(2, &CouplingProfile::Uniform(1.0)).unwrap();
        let h = build_static_hamiltonian(&m).unwrap();
        assert_eq!(h, xx(2, 1, 2, Axis::X, 1.0));
    }

    #[test]
    fn gamma_one_is_doubled_ising() {
        let j = CouplingProfile::Explicit(vec![0.3, 1.1, -0.7]);
        let g = ChainModel::xy_gamma(4, &j, 1.0).unwrap();
        let i2 = ChainModel::ising(4, &CouplingProfile::Explicit(vec![0.6, 2.2, -1.4])).unwrap();
        let diff = build_static_hamiltonian(&g)
            .unwrap()
            .max_abs_diff(&build_static_hamiltonian(&i2).unwrap());
        assert!(diff < 1e-15);
    }

    #[test]
    fn nnn_term_scaled_by_chain_length() {
        let m = ChainModel::ising_nnn(3, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(1.0)).unwrap();
        let h = static_terms(&m).unwrap();
        let nnn: Vec<_> = h
            .terms()
            .iter()
            .filter(|t| t.factors().contains_key(&1) && t.factors().contains_key(&3))
            .collect();
        assert_eq!(nnn.len(), 1);
        assert!((nnn[0].coefficient().re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn array_length_mismatch() {
        let r = ChainModel::xy(
            4,
            &CouplingProfile::Uniform(1.0),
            &CouplingProfile::Explicit(vec![1.0, 2.0]),
        );
        assert!(matches!(r, Err(Error::Model(_))));
        let mut m = ChainModel::ising(3, &CouplingProfile::Uniform(1.0)).unwrap();
        m.l_nnn = vec![1.0];
        assert!(matches!(build_static_hamiltonian(&m), Err(Error::Model(_))));
    }

    #[test]
    fn pst_profile() {
        let j = CouplingProfile::Pst.expand(7, 6).unwrap();
        let want = [6.0, 10.0, 12.0, 12.0, 10.0, 6.0].map(f64::sqrt);
        for (a, b) in j.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn drive_values() {
        let d = DriveSpec::new(Axis::Z, 1.0, 2.0 * PI).unwrap();
        assert_eq!(drive_value(&d, 0.0), 1.0);
        assert!(drive_value(&d, 0.25).abs() < 1e-15);
        let d = DriveSpec::new(Axis::Z, 100.0 / (4.0 * 2.4048), 100.0).unwrap();
        assert!((drive_value(&d, 0.0) - 10.395_874_9).abs() < 1e-6);
        assert!(DriveSpec::new(Axis::Z, 1.0, 0.0).is_err());
    }

    #[test]
    fn driven_assembly() {
        let m = ChainModel::ising(2, &CouplingProfile::Uniform(1.0)).unwrap();
        let d = DriveSpec::new(Axis::Z, 0.7, 3.0).unwrap();
        let t0 = driven_hamiltonian(&m, &d, 0.0).unwrap();
        let z1 = build_pauli_operator(&PauliString::single(2, 1, Axis::Z, 0.7).unwrap());
        let z2 = build_pauli_operator(&PauliString::single(2, 2, Axis::Z, 0.7).unwrap());
        let want = sum_operators(&[xx(2, 1, 2, Axis::X, 1.0), z1, z2]).unwrap();
        assert!(t0.max_abs_diff(&want) < 1e-15);

        let quarter = PI / (2.0 * d.omega);
        let hq = driven_hamiltonian(&m, &d, quarter).unwrap();
        assert!(hq.max_abs_diff(&build_static_hamiltonian(&m).unwrap()) < 1e-15);
    }

    #[test]
    fn driven_nnn_assembly() {
        let m = ChainModel::ising_nnn(3, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(1.0)).unwrap();
        let d = DriveSpec::new(Axis::Z, 2.0, 50.0).unwrap();
        let mut parts = vec![build_static_hamiltonian(&m).unwrap()];
        for i in 1..=3 {
            parts.push(build_pauli_operator(&PauliString::single(3, i, Axis::Z, 2.0).unwrap()));
        }
        let want = sum_operators(&parts).unwrap();
        assert!(driven_hamiltonian(&m, &d, 0.0).unwrap().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn calibration() {
        assert_eq!(calibrate_drive(1.0, 37.0).unwrap(), 0.0);
        let g = calibrate_drive(0.0, 100.0).unwrap();
        assert!((g - 60.120_638_942_394_32).abs() < 1e-9);
        let g = calibrate_drive(0.5, 40.0).unwrap();
        assert!((g - 15.211_440_576_687_65).abs() < 1e-9);
        assert!(matches!(calibrate_drive(-0.41, 10.0), Err(Error::Calibration { .. })));
        assert!(matches!(calibrate_drive(1.2, 10.0), Err(Error::Calibration { .. })));
        for a in [-0.4, -0.2, 0.0, 0.1, 0.5, 0.99] {
            let g = calibrate_drive(a, 13.0).unwrap();
            assert!((bessel_j0(4.0 * g / 13.0) - a).abs() <= 1e-10);
        }
    }

    #[test]
    fn effective_ising_limits() {
        let m = ChainModel::ising(4, &CouplingProfile::Explicit(vec![1.0, 0.5, 2.0])).unwrap();
        let off = DriveSpec::new(Axis::Z, 0.0, 10.0).unwrap();
        let h = effective_hamiltonian(&m, &off).unwrap();
        assert!(h.max_abs_diff(&build_static_hamiltonian(&m).unwrap()) < 1e-15);

        let iso = DriveSpec::calibrated(Axis::Z, 0.0, 10.0).unwrap();
        let h = effective_hamiltonian(&m, &iso).unwrap();
        let mut want = Vec::new();
        for (i, j) in [1.0, 0.5, 2.0].iter().enumerate() {
            want.push(xx(4, i + 1, i + 2, Axis::X, j / 2.0));
            want.push(xx(4, i + 1, i + 2, Axis::Y, j / 2.0));
        }
        assert!(h.max_abs_diff(&sum_operators(&want).unwrap()) < 1e-12);
    }

    #[test]
    fn effective_xxx_and_rotated_xxz() {
        let n = 4;
        let d = DriveSpec::calibrated(Axis::Y, 0.0, 50.0).unwrap();
        let m = ChainModel::xy(n, &CouplingProfile::Uniform(2.0), &CouplingProfile::Uniform(1.0)).unwrap();
        let h = effective_hamiltonian(&m, &d).unwrap();
        let mut want = Vec::new();
        for i in 1..n {
            for axis in Axis::ALL {
                want.push(xx(n, i, i + 1, axis, 1.0));
            }
        }
        assert!(h.max_abs_diff(&sum_operators(&want).unwrap()) < 1e-12);

        let m = ChainModel::xy(n, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(1.0)).unwrap();
        let h = effective_hamiltonian(&m, &d).unwrap();
        let mut want = Vec::new();
        for i in 1..n {
            want.push(xx(n, i, i + 1, Axis::X, 0.5));
            want.push(xx(n, i, i + 1, Axis::Z, 0.5));
            want.push(xx(n, i, i + 1, Axis::Y, 1.0));
        }
        assert!(h.max_abs_diff(&sum_operators(&want).unwrap()) < 1e-12);
    }

    #[test]
    fn isotropic_xy_unchanged_by_z_drive() {
        let j = CouplingProfile::Pst;
        let m = ChainModel::xy(5, &j, &j).unwrap();
        for a in [-0.3, 0.0, 0.4, 1.0] {
            let d = DriveSpec::calibrated(Axis::Z, a, 30.0).unwrap();
            let h = effective_hamiltonian(&m, &d).unwrap();
            assert!(h.max_abs_diff(&build_static_hamiltonian(&m).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn gamma_one_matches_doubled_ising_effective() {
        // y-drive on the γ form vs z-drive on Ising: same structure with Z and Y exchanged,
        // so compare the coefficient lists instead of the operators
        let d = DriveSpec::calibrated(Axis::Y, 0.3, 20.0).unwrap();
        let g = ChainModel::xy_gamma(3, &CouplingProfile::Uniform(0.8), 1.0).unwrap();
        let h = effective_terms(&g, &d).unwrap();
        let a = d.bessel_weight();
        for t in h.terms() {
            let axis = *t.factors().values().next().unwrap();
            let want = match axis {
                Axis::X => 0.8 * (a + 1.0),
                Axis::Z => -0.8 * (a - 1.0),
                Axis::Y => unreachable!("YY weight vanishes at γ = 1"),
            };
            assert!((t.coefficient().re - want).abs() < 1e-14);
        }
    }

    #[test]
    fn unsupported_pairs() {
        let m = ChainModel::ising(3, &CouplingProfile::Uniform(1.0)).unwrap();
        let d = DriveSpec::new(Axis::X, 1.0, 10.0).unwrap();
        assert!(matches!(
            effective_hamiltonian(&m, &d),
            Err(Error::UnsupportedTransform {
                family: ChainFamily::Ising,
                axis: Axis::X
            })
        ));
        let g = ChainModel::xy_gamma(3, &CouplingProfile::Uniform(1.0), 0.2).unwrap();
        let dz = DriveSpec::new(Axis::Z, 1.0, 10.0).unwrap();
        assert!(effective_hamiltonian(&g, &dz).is_err());
    }

    #[test]
    fn frame_unitary() {
        let d = DriveSpec::new(Axis::Z, 3.0, 7.0).unwrap();
        assert!(control_frame_unitary(&d, 3, 0.0).max_abs_diff(&DenseOperator::identity(8)) < 1e-15);
        assert!(control_frame_unitary(&d, 3, d.period()).max_abs_diff(&DenseOperator::identity(8)) < 1e-14);

        // g sin(ωt)/ω = π/4 at t = π/(2ω) with g = ω π/4
        let d = DriveSpec::new(Axis::Z, PI / 4.0 * 2.0, 2.0).unwrap();
        let u = control_frame_unitary(&d, 1, PI / 4.0);
        let e = C64::from_polar(1.0, -PI / 4.0);
        assert!((u.0[(0, 0)] - e).norm() < 1e-15);
        assert!((u.0[(1, 1)] - e.conj()).norm() < 1e-15);
        assert!(u.0[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn raising_operator_picks_up_phase() {
        let n = 3;
        let d = DriveSpec::new(Axis::Z, 2.3, 5.0).unwrap();
        for t in [0.0, 0.1, 0.37, 1.0] {
            let u = control_frame_unitary(&d, n, t);
            let ud = u.adjoint();
            for j in 1..=n {
                let x = build_pauli_operator(&PauliString::single(n, j, Axis::X, 1.0).unwrap());
                let y = build_pauli_operator(&PauliString::single(n, j, Axis::Y, 1.0).unwrap());
                for sign in [1.0, -1.0] {
                    let s = DenseOperator(&x.0 + &y.0 * c(0.0, sign));
                    let rotated = &(&ud * &s) * &u;
                    let phase = C64::from_polar(1.0, sign * 2.0 * d.frame_angle(t));
                    let want = DenseOperator(&s.0 * phase);
                    assert!(rotated.max_abs_diff(&want) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn period_average_reproduces_effective_hamiltonian() {
        let cases = [
            (
                ChainModel::ising(4, &CouplingProfile::Explicit(vec![1.0, 0.4, 0.9])).unwrap(),
                Axis::Z,
            ),
            (
                ChainModel::xy(4, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(0.3)).unwrap(),
                Axis::Z,
            ),
            (
                ChainModel::xy(4, &CouplingProfile::Uniform(2.0), &CouplingProfile::Uniform(1.0)).unwrap(),
                Axis::Y,
            ),
            (
                ChainModel::xy_gamma(4, &CouplingProfile::Uniform(1.0), 0.4).unwrap(),
                Axis::Y,
            ),
            (
                ChainModel::ising_nnn(4, &CouplingProfile::Uniform(1.0), &CouplingProfile::Uniform(1.0)).unwrap(),
                Axis::Z,
            ),
        ];
        let nodes = 512;
        for (m, axis) in cases {
            let v = build_static_hamiltonian(&m).unwrap();
            let scale = v.operator_norm();
            for x in [0.0, 0.8, 1.7, J0_FIRST_ZERO] {
                let omega = 40.0;
                let d = DriveSpec::new(axis, x * omega / 4.0, omega).unwrap();
                let mut avg = DenseOperator::zeros(v.dim());
                for k in 0..nodes {
                    let t = d.period() * k as f64 / nodes as f64;
                    let u = control_frame_unitary(&d, m.n_sites, t);
                    avg = &avg + &(&(&u.adjoint() * &v) * &u);
                }
                let avg = DenseOperator(avg.0 / c(nodes as f64, 0.0));
                let eff = effective_hamiltonian(&m, &d).unwrap();
                let err = DenseOperator(&avg.0 - &eff.0).operator_norm();
                assert!(err <= 5e-3 * scale, "{:?} {axis:?} x={x}: {err}", m.family);
            }
        }
    }

    #[test]
    fn hamiltonians_are_hermitian() {
        let m = ChainModel::xy(5, &CouplingProfile::Pst, &CouplingProfile::Uniform(-0.3)).unwrap();
        let d = DriveSpec::new(Axis::Y, 1.3, 9.0).unwrap();
        assert!(build_static_hamiltonian(&m).unwrap().is_hermitian(1e-12));
        assert!(driven_hamiltonian(&m, &d, 0.4).unwrap().is_hermitian(1e-12));
        assert!(effective_hamiltonian(&m, &d).unwrap().is_hermitian(1e-12));
    }

    #[test]
    fn high_frequency_flag() {
        let m = ChainModel::ising(3, &CouplingProfile::Uniform(2.0)).unwrap();
        assert!(DriveSpec::new(Axis::Z, 1.0, 40.0).unwrap().high_frequency_ok(&m));
        assert!(!DriveSpec::new(Axis::Z, 1.0, 39.0).unwrap().high_frequency_ok(&m));
    }
}
