//! Browser bindings: transfer and entanglement curves for small driven
//! chains, and the drive calibration.

use spindrive::models::{calibrate_drive, DriveSpec};
use spindrive::operators::Axis;
use spindrive::scenario::{parse_scenario, run_scenario};
use wasm_bindgen::prelude::*;

/// Time series sharing one time axis, one column per run.
#[wasm_bindgen]
#[derive(Clone, Debug)]
pub struct Curves {
    times: Vec<f64>,
    labels: Vec<String>,
    columns: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl Curves {
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    pub fn labels(&self) -> Vec<String> {
        self.labels.clone()
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.columns.get(k).cloned().unwrap_or_default()
    }

    /// Largest value of column `k` and the time it occurs.
    pub fn peak(&self, k: usize) -> Vec<f64> {
        let (t, v) = spindrive::observables::peak(&self.times, &self.columns[k]);
        vec![t, v]
    }
}

impl Curves {
    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }
}

/// Drive amplitude and residual coupling weight for a target `A` at
/// frequency `omega`.
#[wasm_bindgen]
#[derive(Clone, Copy, Debug)]
pub struct Calibration {
    pub g: f64,
    pub ratio: f64,
    pub weight: f64,
}

pub fn calibration(target_a: f64, omega: f64) -> spindrive::Result<Calibration> {
    let g = calibrate_drive(target_a, omega)?;
    let d = DriveSpec::new(Axis::Z, g, omega)?;
    Ok(Calibration {
        g,
        ratio: 4.0 * g / omega,
        weight: d.bessel_weight(),
    })
}

/// Ising chain with transfer couplings under a z drive: end-to-end fidelity
/// for the driven chain, its effective chain and the bare chain.
pub fn transfer_curves(n: usize, omega_scale: f64, target_a: f64, horizon: f64) -> spindrive::Result<Curves> {
    let text = format!(
        "name = transfer\nmodel.family = ising\nmodel.n = {n}\nmodel.j = pst\n\
         drive.axis = z\ndrive.omega_scale = {omega_scale}\ndrive.target_a = {target_a}\n\
         task.kind = transfer\ngrid.kind = stroboscopic\ngrid.horizon = {horizon}\n\
         propagator.check_convergence = false\nruns = driven, effective, undriven\n"
    );
    curves(&text)
}

/// Anisotropic XY chain under a y drive: end-to-end concurrence from a
/// single flipped spin.
pub fn entanglement_curves(n: usize, jx: f64, jy: f64, omega_scale: f64, horizon: f64) -> spindrive::Result<Curves> {
    let text = format!(
        "name = entanglement\nmodel.family = xy\nmodel.n = {n}\nmodel.jx = {jx}\nmodel.jy = {jy}\n\
         drive.axis = y\ndrive.omega_scale = {omega_scale}\ndrive.target_a = 0\n\
         task.kind = concurrence\ngrid.kind = stroboscopic\ngrid.horizon = {horizon}\n\
         propagator.check_convergence = false\nruns = driven, effective, undriven\n"
    );
    curves(&text)
}

fn curves(text: &str) -> spindrive::Result<Curves> {
    let s = parse_scenario(text)?;
    let records = run_scenario(&s)?;
    Ok(Curves {
        times: records[0].grid.samples().to_vec(),
        labels: records.iter().map(|r| r.label.clone()).collect(),
        columns: records.into_iter().map(|r| r.values).collect(),
    })
}

#[wasm_bindgen]
pub fn calibrate(target_a: f64, omega: f64) -> Result<Calibration, JsError> {
    calibration(target_a, omega).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn transfer(n: usize, omega_scale: f64, target_a: f64, horizon: f64) -> Result<Curves, JsError> {
    transfer_curves(n, omega_scale, target_a, horizon).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn entanglement(n: usize, jx: f64, jy: f64, omega_scale: f64, horizon: f64) -> Result<Curves, JsError> {
    entanglement_curves(n, jx, jy, omega_scale, horizon).map_err(|e| JsError::new(&e.to_string()))
}
