//! Matrix-free application of Pauli-sum generators and piecewise-constant
//! exponential stepping.
//!
//! Every Pauli string maps `|b⟩` to a multiple of `|b ^ x_mask⟩`, so a sum of
//! strings is stored as one coefficient vector per distinct flip mask. A step
//! assembles `H(t_mid)` in that form and applies `exp(−i H Δ)` to the state
//! by a Taylor series on sub-intervals short enough that `‖H‖ δ <= 1/2`.

use std::collections::BTreeMap;

use crate::models::{drive_value, DriveSpec};
use crate::operators::{c, PauliString, PauliSum, C64};

const TAYLOR_SLICE: f64 = 0.5;
const TAYLOR_MAX_TERMS: usize = 60;
const TAYLOR_TOL: f64 = 1e-17;

/// Coefficient vectors keyed by flip mask.
fn compile(terms: &[PauliString], dim: usize) -> BTreeMap<usize, Vec<C64>> {
    let mut out: BTreeMap<usize, Vec<C64>> = BTreeMap::new();
    for t in terms {
        let a = t.action();
        let v = out.entry(a.x_mask).or_insert_with(|| vec![C64::new(0.0, 0.0); dim]);
        for (b, x) in v.iter_mut().enumerate() {
            *x += a.element(b);
        }
    }
    out
}

/// Per-basis-state coefficients keyed by their slot in `masks`.
type MaskedTerms = Vec<(usize, Vec<C64>)>;

/// A time-dependent generator `H(t) = H_0 + h(t) F + Σ_c B_c(t) N_c` with
/// `F = Σ σ_axis` the drive field and `N_c` single-site noise channels.
pub(crate) struct Generator {
    dim: usize,
    masks: Vec<usize>,
    base: Vec<Vec<C64>>,
    drive: Option<(DriveSpec, MaskedTerms)>,
    noise: MaskedTerms,
    ws: Vec<Vec<C64>>,
    bound: f64,
    term: Vec<C64>,
    scratch: Vec<C64>,
}

impl Generator {
    pub fn new(
        static_terms: &PauliSum,
        drive: Option<(&DriveSpec, &PauliSum)>,
        noise_channels: &[PauliString],
    ) -> Self {
        let dim = static_terms.dim();
        let base_c = compile(static_terms.terms(), dim);
        let drive_c = drive.map(|(d, f)| (*d, compile(f.terms(), dim)));
        let noise_c: Vec<_> = noise_channels
            .iter()
            .map(|p| compile(std::slice::from_ref(p), dim))
            .collect();

        let mut masks: Vec<usize> = base_c.keys().copied().collect();
        if let Some((_, f)) = &drive_c {
            masks.extend(f.keys());
        }
        for n in &noise_c {
            masks.extend(n.keys());
        }
        masks.sort_unstable();
        masks.dedup();
        let slot = |m: usize| masks.binary_search(&m).expect("mask registered");

        let zeros = vec![C64::new(0.0, 0.0); dim];
        let mut base = vec![zeros.clone(); masks.len()];
        for (m, v) in base_c {
            base[slot(m)] = v;
        }
        let drive = drive_c.map(|(d, f)| (d, f.into_iter().map(|(m, v)| (slot(m), v)).collect()));
        let noise = noise_c
            .into_iter()
            .map(|n| {
                let (m, v) = n.into_iter().next().expect("noise channel has one term");
                (slot(m), v)
            })
            .collect();
        let ws = base.clone();
        Self {
            dim,
            masks,
            base,
            drive,
            noise,
            ws,
            bound: 0.0,
            term: zeros.clone(),
            scratch: zeros,
        }
    }

    pub fn n_noise_channels(&self) -> usize {
        self.noise.len()
    }

    /// Assembles `H(t)` with the given noise amplitudes.
    pub fn set_time(&mut self, t: f64, noise: &[f64]) {
        for (w, b) in self.ws.iter_mut().zip(&self.base) {
            w.copy_from_slice(b);
        }
        if let Some((d, parts)) = &self.drive {
            let h = drive_value(d, t);
            if h != 0.0 {
                for (s, v) in parts {
                    for (w, x) in self.ws[*s].iter_mut().zip(v) {
                        *w += x * h;
                    }
                }
            }
        }
        for ((s, v), &b) in self.noise.iter().zip(noise) {
            if b != 0.0 {
                for (w, x) in self.ws[*s].iter_mut().zip(v) {
                    *w += x * b;
                }
            }
        }
        // each slot is a permutation times a diagonal
        self.bound = self
            .ws
            .iter()
            .map(|w| w.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .sum();
    }

    /// `out = H x` for the assembled `H`.
    fn apply(ws: &[Vec<C64>], masks: &[usize], x: &[C64], out: &mut [C64]) {
        out.fill(C64::new(0.0, 0.0));
        for (w, &m) in ws.iter().zip(masks) {
            if m == 0 {
                for ((o, wi), xi) in out.iter_mut().zip(w).zip(x) {
                    *o += wi * xi;
                }
            } else {
                for b in 0..x.len() {
                    out[b ^ m] += w[b] * x[b];
                }
            }
        }
    }

    /// `psi ← exp(−i H dt) psi` for the assembled `H`.
    pub fn exp_apply(&mut self, psi: &mut [C64], dt: f64) {
        debug_assert_eq!(psi.len(), self.dim);
        if dt == 0.0 {
            return;
        }
        let slices = ((self.bound * dt.abs()) / TAYLOR_SLICE).ceil().max(1.0) as usize;
        let h = dt / slices as f64;
        for _ in 0..slices {
            self.term.copy_from_slice(psi);
            for k in 1..=TAYLOR_MAX_TERMS {
                Self::apply(&self.ws, &self.masks, &self.term, &mut self.scratch);
                let f = c(0.0, -h / k as f64);
                let mut norm2 = 0.0;
                for ((t, s), p) in self.term.iter_mut().zip(&self.scratch).zip(psi.iter_mut()) {
                    *t = s * f;
                    *p += *t;
                    norm2 += t.norm_sqr();
                }
                if norm2 < TAYLOR_TOL * TAYLOR_TOL {
                    break;
                }
            }
        }
    }

    /// Single step with the generator evaluated at `t_mid`.
    pub fn step(&mut self, psi: &mut [C64], t_mid: f64, dt: f64, noise: &[f64]) {
        self.set_time(t_mid, noise);
        self.exp_apply(psi, dt);
    }
}

/// Propagates `psi0` from `t = 0` on the lattice `k·dt`, recording the state at
/// each sample time. Samples off the lattice are reached with one partial step
/// from the preceding lattice point; the main propagation continues from the
/// lattice. `noise[c][k]` is the amplitude of channel `c` on `[k dt, (k+1) dt)`.
pub(crate) fn propagate(
    gen: &mut Generator,
    psi0: &[C64],
    samples: &[f64],
    dt: f64,
    noise: &[Vec<f64>],
) -> Vec<Vec<C64>> {
    assert_eq!(noise.len(), gen.n_noise_channels());
    let mut amps = vec![0.0; noise.len()];
    let load = |k: usize, amps: &mut Vec<f64>| {
        for (a, ch) in amps.iter_mut().zip(noise) {
            *a = ch[k];
        }
    };
    let mut psi = psi0.to_vec();
    let mut k = 0usize;
    let mut out = Vec::with_capacity(samples.len());
    for &s in samples {
        let (full, partial) = lattice_position(s, dt);
        while k < full {
            load(k, &mut amps);
            gen.step(&mut psi, (k as f64 + 0.5) * dt, dt, &amps);
            k += 1;
        }
        if partial > 0.0 {
            let mut tmp = psi.clone();
            load(k, &mut amps);
            gen.step(&mut tmp, k as f64 * dt + 0.5 * partial, partial, &amps);
            out.push(tmp);
        } else {
            out.push(psi.clone());
        }
    }
    out
}

/// Number of whole lattice steps before `t` and the remaining partial step.
pub(crate) fn lattice_position(t: f64, dt: f64) -> (usize, f64) {
    let pos = t / dt;
    let nearest = pos.round();
    if (pos - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        (nearest as usize, 0.0)
    } else {
        let full = pos.floor();
        (full as usize, t - full * dt)
    }
}

/// Lattice points needed to cover `t_end`, inclusive of the partial step.
pub(crate) fn lattice_len(t_end: f64, dt: f64) -> usize {
    let (full, _) = lattice_position(t_end, dt);
    full + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Axis;
    use nalgebra::DVector;

    fn random_sum(n: usize) -> PauliSum {
        let mut h = PauliSum::new(n);
        let mut seed = 17u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for i in 1..=n {
            for axis in Axis::ALL {
                h.push(PauliString::single(n, i, axis, next()).unwrap()).unwrap();
                if i < n {
                    h.push(PauliString::pair(n, i, i + 1, axis, next()).unwrap()).unwrap();
                }
            }
        }
        h
    }

    #[test]
    fn matrix_free_product_matches_dense() {
        let h = random_sum(4);
        let mut gen = Generator::new(&h, None, &[]);
        gen.set_time(0.0, &[]);
        let x: Vec<C64> = (0..16).map(|i| c(i as f64 * 0.1, 1.0 - i as f64 * 0.05)).collect();
        let mut out = vec![C64::new(0.0, 0.0); 16];
        Generator::apply(&gen.ws, &gen.masks, &x, &mut out);
        let dense = &h.to_dense().0 * DVector::from_vec(x);
        for (a, b) in out.iter().zip(dense.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn exponential_matches_eigendecomposition() {
        let h = random_sum(3);
        let dense = h.to_dense();
        let eig = dense.0.clone().symmetric_eigen();
        let psi0: Vec<C64> = (0..8).map(|i| c(if i == 3 { 1.0 } else { 0.0 }, 0.0)).collect();
        for dt in [0.01, 0.7, 5.0] {
            let mut gen = Generator::new(&h, None, &[]);
            gen.set_time(0.0, &[]);
            let mut psi = psi0.clone();
            gen.exp_apply(&mut psi, dt);
            let phases = eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * dt));
            let v = &eig.eigenvectors;
            let want = v * DVector::from_vec(
                (v.adjoint() * DVector::from_vec(psi0.clone()))
                    .iter()
                    .zip(phases.iter())
                    .map(|(a, p)| a * p)
                    .collect(),
            );
            for (a, b) in psi.iter().zip(want.iter()) {
                assert!((a - b).norm() < 1e-12, "dt={dt}");
            }
        }
    }

    #[test]
    fn lattice_positions() {
        assert_eq!(lattice_position(0.0, 0.1), (0, 0.0));
        assert_eq!(lattice_position(0.3, 0.1), (3, 0.0));
        let (k, p) = lattice_position(0.35, 0.1);
        assert_eq!(k, 3);
        assert!((p - 0.05).abs() < 1e-12);
        assert_eq!(lattice_len(0.35, 0.1), 4);
    }
}
